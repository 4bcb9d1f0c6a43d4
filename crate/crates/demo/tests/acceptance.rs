//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command as Process;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use easel::backend::{BackendOp, HeadlessBackend, OpArg, OpKind};
use easel::views::{button, counter, text, vpanel, window, WindowSpec};
use easel::{Error, Observable, ObsError, Renderer, WidgetHandle};
use easel_demo::demos::initial_groups;
use easel_demo::{eval_formula, Demo, Inputs, Script, Session};
use parking_lot::Mutex;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

type Check = Result<(), String>;
type Criterion = (&'static str, Box<dyn Fn() -> Check>);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn manifest(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn script(demo: Demo) -> Script {
    let src = std::fs::read_to_string(manifest(&format!("scripts/{}.script", demo.name()))).unwrap();
    Script::parse(&src).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("easel-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn cli_dump(demo: Demo, derived: bool, dump: &PathBuf) -> Result<String, String> {
    let mut cmd = Process::new(env!("CARGO_BIN_EXE_easel"));
    cmd.args(["demo", demo.name(), "--backend", "headless", "--script"])
        .arg(manifest(&format!("scripts/{}.script", demo.name())))
        .arg("--dump-log")
        .arg(dump);
    if derived {
        cmd.arg("--derived-inputs");
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    if out.status.code() != Some(0) {
        return Err(format!(
            "{} exited with {:?}: {}",
            demo.name(),
            out.status.code(),
            String::from_utf8_lossy(&out.stdout)
        ));
    }
    std::fs::read_to_string(dump).map_err(|e| e.to_string())
}

fn ops_since(b: &HeadlessBackend, from: usize) -> Vec<BackendOp> {
    b.call_log()[from..].to_vec()
}

fn label_of(b: &HeadlessBackend, w: WidgetHandle) -> String {
    b.record(w).and_then(|r| r.label).unwrap_or_default()
}

fn prop<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Check {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn counter_behaviour() -> Check {
    let dump = scratch("counter.log");
    let start = Instant::now();
    let got = cli_dump(Demo::Counter, false, &dump)?;
    let took = start.elapsed();
    let golden = std::fs::read_to_string(manifest("tests/golden/counter.log")).unwrap();
    ensure!(got == golden, "dump differs from golden:\n{got}");
    ensure!(took < Duration::from_secs(1), "took {took:?}");
    Ok(())
}

fn component_reuse() -> Check {
    let s = Session::headless(Demo::Counters, Inputs::Roots).unwrap();
    let root = s.root.root_widget();
    let rows = s.backend.live_children(root);
    let one = s.backend.live_children(rows[0]);
    let two = s.backend.live_children(rows[1]);
    ensure!(label_of(&s.backend, one[1]) == "0", "counter 1 starts at {}", label_of(&s.backend, one[1]));
    ensure!(label_of(&s.backend, two[1]) == "5", "counter 2 starts at {}", label_of(&s.backend, two[1]));
    let before = s.backend.op_count();
    s.execute(&Script::parse("click window/0/2").unwrap()).map_err(|e| e.to_string())?;
    let ops = ops_since(&s.backend, before);
    let sets: Vec<_> = ops.iter().filter(|op| op.kind == OpKind::SetLabel).collect();
    ensure!(sets.len() == 1, "{} SetLabel ops", sets.len());
    ensure!(sets[0].target == Some(one[1]) && sets[0].text() == Some("1"), "got {}", sets[0]);
    let touched: Vec<_> = ops.iter().filter(|op| op.target == Some(two[1])).collect();
    ensure!(touched.is_empty(), "counter 2 label received {touched:?}");
    s.root.teardown();
    Ok(())
}

fn observable_suite() -> Check {
    // (a) k updates fold like function iteration
    let step = (0..4usize, -50i64..50);
    prop(256, (any::<i64>(), prop::collection::vec(step, 0..=100)), |(init, fs)| {
        let apply = |(k, c): (usize, i64), x: i64| match k {
            0 => x.wrapping_add(c),
            1 => x.wrapping_mul(c),
            2 => x ^ c,
            _ => x.wrapping_sub(c).rotate_left(3),
        };
        let o = Observable::new(init);
        for &f in &fs {
            o.update(|x| apply(f, *x)).unwrap();
        }
        let want = fs.iter().fold(init, |x, &f| apply(f, x));
        prop_assert_eq!(o.peek(), want);
        Ok(())
    })
    .map_err(|e| format!("(a) {e}"))?;

    // (b) derived chains follow their closed form
    let deltas = prop::collection::vec(-1000i64..1000, 1..=20);
    prop(256, (-1_000_000i64..1_000_000, deltas, -1_000_000i64..1_000_000), |(v, ds, w)| {
        let root = Observable::new(v);
        let mut chain = vec![root.clone()];
        for &d in &ds {
            let next = chain.last().unwrap().map(move |x| x + d);
            chain.push(next);
        }
        let sum: i64 = ds.iter().sum();
        prop_assert_eq!(chain.last().unwrap().peek(), v + sum);
        root.set(w).unwrap();
        for (i, o) in chain.iter().enumerate() {
            prop_assert_eq!(o.peek(), w + ds[..i].iter().sum::<i64>());
        }
        Ok(())
    })
    .map_err(|e| format!("(b) {e}"))?;

    // (c) updating a derived observable always errors
    prop(256, (any::<i32>(), 1usize..6, any::<i32>()), |(v, n, x)| {
        let root = Observable::new(v as i64);
        let mut d = root.map(|x| x * 2);
        for _ in 1..n {
            d = d.map(|x| x + 1);
        }
        let before = d.peek();
        prop_assert!(matches!(d.update(|_| x as i64), Err(ObsError::DerivedUpdate(_))));
        prop_assert!(matches!(d.set(x as i64), Err(ObsError::DerivedUpdate(_))));
        prop_assert_eq!(d.peek(), before);
        Ok(())
    })
    .map_err(|e| format!("(c) {e}"))?;

    // (d) a late observer never sees earlier commits
    prop(256, (prop::collection::vec(any::<i64>(), 0..20), any::<i64>()), |(early, next)| {
        let o = Observable::new(0i64);
        for &v in &early {
            o.set(v).unwrap();
        }
        let seen = Arc::new(Mutex::new(Vec::new()));
        let log = seen.clone();
        let sub = o.observe(move |v| log.lock().push(*v));
        prop_assert!(seen.lock().is_empty());
        o.set(next).unwrap();
        prop_assert_eq!(seen.lock().clone(), vec![next]);
        sub.unobserve();
        Ok(())
    })
    .map_err(|e| format!("(d) {e}"))?;

    // (e) concurrent add1 commits are not lost
    let o = Observable::new(0i64);
    thread::scope(|s| {
        for _ in 0..8 {
            let o = o.clone();
            s.spawn(move || {
                for _ in 0..1000 {
                    o.update(|x| x + 1).unwrap();
                }
            });
        }
    });
    ensure!(o.peek() == 8000, "(e) ended at {}", o.peek());
    Ok(())
}

fn no_leaks() -> Check {
    for demo in Demo::ALL {
        let s = Session::headless(demo, Inputs::Roots).unwrap();
        let outcome = s.run(&script(demo)).map_err(|e| e.to_string())?;
        ensure!(outcome.report.passed(), "{}: {}", demo.name(), outcome.report);
        let leaks = s.check_leaks();
        ensure!(leaks.clean(), "{}: {leaks:?}", demo.name());
        let creates = s.backend.call_log().iter().filter(|op| op.kind.is_create()).count();
        let destroys = s.count(OpKind::Destroy);
        ensure!(creates == destroys, "{}: {creates} creates, {destroys} destroys", demo.name());
    }
    Ok(())
}

fn reusability() -> Check {
    for first in [0, 1] {
        let b = HeadlessBackend::new();
        let r = Renderer::new(b.clone());
        let c = Observable::new(0i64);
        let model = c.clone();
        let shared = window(WindowSpec::new("Shared").child(counter(&c, move |f| model.update(|n| f(*n)))));
        let roots = [r.render(&shared).unwrap(), r.render(&shared).unwrap()];
        let parts: Vec<Vec<WidgetHandle>> = roots
            .iter()
            .map(|root| b.live_children(b.live_children(root.root_widget())[0]))
            .collect();
        ensure!(parts[0][1] != parts[1][1], "the two renders share a label");

        let before = b.op_count();
        c.update(|n| n + 1).unwrap();
        r.run_until_idle();
        let sets: Vec<_> = ops_since(&b, before).into_iter().filter(|op| op.kind == OpKind::SetLabel).collect();
        ensure!(sets.len() == 2, "{} SetLabel ops for one commit", sets.len());
        ensure!(
            label_of(&b, parts[0][1]) == "1" && label_of(&b, parts[1][1]) == "1",
            "labels differ after a commit"
        );

        // a click in either tree goes through the shared model
        b.simulate_click(parts[1][2]).unwrap();
        r.run_until_idle();
        ensure!(label_of(&b, parts[0][1]) == "2", "click in tree 2 did not reach tree 1");

        let (gone, kept) = (first, 1 - first);
        roots[gone].teardown();
        ensure!(
            parts[kept].iter().all(|w| b.record(*w).is_some_and(|r| r.alive)),
            "tearing down tree {} killed tree {}",
            gone + 1,
            kept + 1
        );
        let before = b.op_count();
        c.update(|n| n + 1).unwrap();
        r.run_until_idle();
        let ops = ops_since(&b, before);
        ensure!(
            ops.len() == 1 && ops[0].target == Some(parts[kept][1]) && ops[0].text() == Some("3"),
            "after teardown of tree {}: {ops:?}",
            gone + 1
        );
        b.simulate_click(parts[kept][0]).unwrap();
        r.run_until_idle();
        ensure!(label_of(&b, parts[kept][1]) == "2", "surviving tree stopped working");
        ensure!(roots[gone].active_subscriptions() == 0, "torn down tree still subscribed");
        roots[kept].teardown();
    }
    Ok(())
}

fn ddau_purity() -> Check {
    for demo in Demo::ALL {
        let s = Session::headless(demo, Inputs::Derived).unwrap();
        let outcome = s.run(&script(demo)).map_err(|e| e.to_string())?;
        ensure!(outcome.report.passed(), "{}: {}", demo.name(), outcome.report);
        ensure!(
            s.derived_update_errors() == 0,
            "{}: {} derived update errors: {:?}",
            demo.name(),
            s.derived_update_errors(),
            s.errors()
        );
    }
    // the counter is able to see a violation
    let b = HeadlessBackend::new();
    let hits = Arc::new(Mutex::new(0));
    let h = hits.clone();
    let r = Renderer::with_error_hook(
        b.clone(),
        Arc::new(move |e: &Error| {
            if e.is_derived_update() {
                *h.lock() += 1;
            }
        }),
    );
    let input = Observable::new(0i64).map(|x| *x);
    let writer = input.clone();
    let root = r
        .render(&window(WindowSpec::new("w").child(button("write", move || writer.set(1).map(|_| ())))))
        .unwrap();
    b.simulate_click(b.live_children(root.root_widget())[0]).unwrap();
    r.run_until_idle();
    ensure!(*hits.lock() == 1, "a write to a derived input went unnoticed");
    root.teardown();
    Ok(())
}

fn goodbye_escape_hatch() -> Check {
    let s = Session::headless(Demo::Goodbye, Inputs::Roots).unwrap();
    let outcome = s.run(&script(Demo::Goodbye)).map_err(|e| e.to_string())?;
    ensure!(outcome.report.passed(), "{}", outcome.report);
    ensure!(outcome.closed_by_app, "the event loop did not stop on its own");
    let log = s.backend.call_log();
    let at = |pred: &dyn Fn(&BackendOp) -> bool| log.iter().position(pred);
    let can = at(&|op| op.kind == OpKind::CanClose);
    let on = at(&|op| op.kind == OpKind::OnClose);
    let hide = at(&|op| op.kind == OpKind::Show && op.args.contains(&OpArg::Flag(false)));
    match (can, on, hide) {
        (Some(a), Some(b), Some(c)) if a < b && b < c => Ok(()),
        other => Err(format!("close sequence positions {other:?}")),
    }
}

/// A second interpreter: shunting-yard into postfix, then a stack machine.
fn naive_eval(expr: &str, l: i64, c: i64) -> i128 {
    #[derive(Clone, Copy, PartialEq)]
    enum Tok {
        Num(i128),
        Op(char),
        Neg,
        Open,
        Close,
    }
    let mut toks = Vec::new();
    let chars: Vec<char> = expr.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            ' ' => {}
            '0'..='9' => {
                let mut n = 0i128;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    n = n * 10 + chars[i].to_digit(10).unwrap() as i128;
                    i += 1;
                }
                toks.push(Tok::Num(n));
                continue;
            }
            'L' => toks.push(Tok::Num(l as i128)),
            'C' => toks.push(Tok::Num(c as i128)),
            '(' => toks.push(Tok::Open),
            ')' => toks.push(Tok::Close),
            '-' if matches!(toks.last(), None | Some(Tok::Op(_) | Tok::Neg | Tok::Open)) => toks.push(Tok::Neg),
            '+' | '-' | '*' => toks.push(Tok::Op(ch)),
            other => panic!("unexpected {other}"),
        }
        i += 1;
    }
    let prec = |t: Tok| match t {
        Tok::Op('*') => 2,
        Tok::Op(_) => 1,
        Tok::Neg => 3,
        _ => 0,
    };
    let mut out = Vec::new();
    let mut ops: Vec<Tok> = Vec::new();
    for t in toks {
        match t {
            Tok::Num(_) => out.push(t),
            Tok::Neg | Tok::Open => ops.push(t),
            Tok::Op(_) => {
                while let Some(&top) = ops.last() {
                    if top != Tok::Open && prec(top) >= prec(t) {
                        out.push(ops.pop().unwrap());
                    } else {
                        break;
                    }
                }
                ops.push(t);
            }
            Tok::Close => {
                while let Some(top) = ops.pop() {
                    if top == Tok::Open {
                        break;
                    }
                    out.push(top);
                }
            }
        }
    }
    out.extend(ops.into_iter().rev());
    let mut stack: Vec<i128> = Vec::new();
    for t in out {
        match t {
            Tok::Num(n) => stack.push(n),
            Tok::Neg => {
                let a = stack.pop().unwrap();
                stack.push(-a);
            }
            Tok::Op(op) => {
                let b = stack.pop().unwrap();
                let a = stack.pop().unwrap();
                stack.push(match op {
                    '+' => a + b,
                    '-' => a - b,
                    _ => a * b,
                });
            }
            _ => unreachable!(),
        }
    }
    stack.pop().unwrap()
}

fn expression() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0i64..=20).prop_map(|n| n.to_string()),
        Just("L".to_string()),
        Just("C".to_string()),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!['+', '-', '*']), inner.clone())
                .prop_map(|(a, op, b)| format!("{a} {op} {b}")),
            inner.clone().prop_map(|a| format!("({a})")),
            inner.prop_map(|a| format!("-{a}")),
        ]
    })
}

fn env_threading() -> Check {
    let s = Session::headless(Demo::Tracker, Inputs::Roots).unwrap();
    let before = s.backend.op_count();
    s.execute(&Script::parse("commit L set 3").unwrap()).map_err(|e| e.to_string())?;
    let updated = ops_since(&s.backend, before)
        .iter()
        .filter(|op| op.kind == OpKind::SetLabel && op.text().is_some_and(|t| t.contains('/')))
        .count();
    ensure!(updated == 2, "{updated} visible hp labels re-rendered, expected 2");
    let env = [("L".to_string(), 3), ("C".to_string(), 3)];
    let groups = initial_groups();
    for tab in 0..3 {
        let cmds = format!("select window/2/1 {tab}\nselect window/3/1 {tab}");
        s.execute(&Script::parse(&cmds).unwrap()).map_err(|e| e.to_string())?;
        for (g, group) in groups.iter().enumerate() {
            let m = &group.monsters[tab];
            let max = eval_formula(&m.hp_formula, &env).map_err(|e| e.to_string())?;
            ensure!(max as i128 == naive_eval(&m.hp_formula, 3, 3), "{} disagrees", m.hp_formula);
            let path = easel_demo::script::parse_path(&format!("window/{}/1/0/1", g + 2)).unwrap();
            let w = s.resolve(&path)?;
            let want = format!("{} {}/{}", m.name, m.hp, max);
            ensure!(label_of(&s.backend, w) == want, "got {:?}, want {want:?}", label_of(&s.backend, w));
        }
    }
    s.root.teardown();

    let cases = Arc::new(Mutex::new(0));
    let counted = cases.clone();
    prop(50, (expression(), -10i64..10, -10i64..10), |(expr, l, c)| {
        *counted.lock() += 1;
        let env = [("L".to_string(), l), ("C".to_string(), c)];
        let got = eval_formula(&expr, &env).map_err(|e| TestCaseError::fail(format!("{expr}: {e}")))?;
        prop_assert_eq!(got as i128, naive_eval(&expr, l, c), "{}", expr);
        Ok(())
    })?;
    ensure!(*cases.lock() == 50, "ran {} expressions", cases.lock());
    Ok(())
}

fn determinism() -> Check {
    for demo in Demo::ALL {
        for derived in [false, true] {
            let dump = scratch(&format!("{}-{derived}.log", demo.name()));
            let first = cli_dump(demo, derived, &dump)?;
            for run in 2..=5 {
                ensure!(cli_dump(demo, derived, &dump)? == first, "{} run {run} differs", demo.name());
            }
        }
    }
    Ok(())
}

fn label_texts(log: &[BackendOp], label: WidgetHandle) -> Vec<(u64, String)> {
    log.iter()
        .filter(|op| op.kind == OpKind::SetLabel && op.target == Some(label))
        .map(|op| (op.seq, op.text().unwrap_or_default().to_string()))
        .collect()
}

fn interleaved(pattern: &[bool], threaded: bool) -> Result<(), String> {
    let b = HeadlessBackend::new();
    let r = Renderer::new(b.clone());
    let (x, y) = (Observable::new(String::new()), Observable::new(String::new()));
    let root = r.render(&window(WindowSpec::new("w").child(vpanel([text(&x), text(&y)])))).unwrap();
    let labels = b.live_children(b.live_children(root.root_widget())[0]);
    let (mut want_x, mut want_y) = (Vec::new(), Vec::new());
    for (i, &to_x) in pattern.iter().enumerate() {
        if to_x {
            want_x.push(format!("v{i}"));
        } else {
            want_y.push(format!("v{i}"));
        }
    }
    let from = b.op_count();
    thread::scope(|s| {
        let (lr, lroot) = (r.clone(), root.clone());
        let event_loop = s.spawn(move || lr.run(&lroot));
        if threaded {
            let a = s.spawn(|| want_x.iter().for_each(|v| drop(x.set(v.clone()))));
            let b = s.spawn(|| want_y.iter().for_each(|v| drop(y.set(v.clone()))));
            a.join().unwrap();
            b.join().unwrap();
        } else {
            for (i, &to_x) in pattern.iter().enumerate() {
                let o = if to_x { &x } else { &y };
                o.set(format!("v{i}")).unwrap();
            }
        }
        r.wait_idle();
        root.teardown();
        event_loop.join().unwrap();
    });
    let log = ops_since(&b, from);
    for (label, want) in [(labels[0], &want_x), (labels[1], &want_y)] {
        let got = label_texts(&log, label);
        ensure!(got.windows(2).all(|w| w[0].0 < w[1].0), "sequence numbers out of order");
        let texts: Vec<&String> = got.iter().map(|(_, t)| t).collect();
        ensure!(texts == want.iter().collect::<Vec<_>>(), "applied {texts:?}, committed {want:?}");
    }
    Ok(())
}

fn ordering_contract(started: Instant) -> Check {
    let pattern = prop::collection::vec(any::<bool>(), 100);
    for threaded in [false, true] {
        prop(20, pattern.clone(), |p| interleaved(&p, threaded).map_err(TestCaseError::fail))
            .map_err(|e| format!("threaded={threaded}: {e}"))?;
    }
    ensure!(started.elapsed() < Duration::from_secs(30), "suite took {:?}", started.elapsed());
    Ok(())
}

fn main() {
    let started = Instant::now();
    let criteria: Vec<Criterion> = vec![
        ("counter script and golden log", Box::new(counter_behaviour)),
        ("component reuse", Box::new(component_reuse)),
        ("observable semantics", Box::new(observable_suite)),
        ("lifecycle leaves nothing behind", Box::new(no_leaks)),
        ("shared view rendered twice", Box::new(reusability)),
        ("views never write their inputs", Box::new(ddau_purity)),
        ("goodbye closes itself", Box::new(goodbye_escape_hatch)),
        ("env threading in the tracker", Box::new(env_threading)),
        ("deterministic dump logs", Box::new(determinism)),
        ("per-observable commit order", Box::new(move || ordering_contract(started))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(()) => println!("PASS {}: {name}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed in {:?}", criteria.len() - failed, criteria.len(), started.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
