use easel::backend::{BackendOp, HeadlessBackend, OpKind, WidgetKind};
use easel_demo::demos::initial_groups;
use easel_demo::{eval_formula, CommitOp, Demo, Inputs, Script, ScriptError, Session};
use easel_term::TerminalBackend;

fn script(demo: Demo) -> Script {
    let path = format!("{}/scripts/{}.script", env!("CARGO_MANIFEST_DIR"), demo.name());
    Script::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn projected(log: &[BackendOp]) -> Vec<String> {
    log.iter()
        .filter(|op| matches!(op.kind, OpKind::SetLabel | OpKind::Show | OpKind::Destroy))
        .map(|op| {
            let mut s = op.to_string();
            // drop the sequence number, it depends on what else was logged
            s.drain(..s.find(' ').unwrap() + 1);
            s
        })
        .collect()
}

#[test]
fn terminal_and_headless_agree() {
    for demo in Demo::ALL {
        let h = Session::start(demo, Inputs::Roots, HeadlessBackend::new()).unwrap();
        let t = Session::start(demo, Inputs::Roots, TerminalBackend::new()).unwrap();
        let s = script(demo);
        let a = h.run(&s).unwrap();
        let b = t.run(&s).unwrap();
        assert_eq!(a.report, b.report, "{}", demo.name());
        assert!(a.report.passed());
        assert_eq!(projected(&h.backend.call_log()), projected(&t.backend.call_log()), "{}", demo.name());
    }
}

#[test]
fn empty_script_gives_an_empty_passing_report() {
    let s = Session::headless(Demo::Counter, Inputs::Roots).unwrap();
    let out = s.run(&Script::default()).unwrap();
    assert!(out.report.expectations.is_empty());
    assert!(out.report.passed());
    assert!(!out.closed_by_app);
}

#[test]
fn mismatch_reports_both_texts() {
    let s = Session::headless(Demo::Counter, Inputs::Roots).unwrap();
    let report = s
        .execute(&Script::parse("click window/0/2\nexpect-label window/0/1 \"5\"").unwrap())
        .unwrap();
    assert_eq!(report.failures(), 1);
    assert_eq!(report.expectations[0].detail, "expected \"5\", got \"1\"");
    assert!(report.to_string().contains("FAIL line 2"));
}

#[test]
fn resolution_failure_aborts() {
    let s = Session::headless(Demo::Counter, Inputs::Roots).unwrap();
    let err = s
        .execute(&Script::parse("idle\nclick window/0/panel/3\nexpect-label window/0/1 \"0\"").unwrap())
        .unwrap_err();
    assert!(matches!(err, ScriptError::Resolve { line: 2, .. }), "{err}");
    let err = s.execute(&Script::parse("click window/0/1").unwrap()).unwrap_err();
    assert!(matches!(err, ScriptError::Backend { line: 1, .. }), "{err}");
}

#[test]
fn paths_by_kind_and_text() {
    let s = Session::headless(Demo::Counter, Inputs::Roots).unwrap();
    let by_index = s.resolve(&easel_demo::script::parse_path("window/0/panel/2").unwrap()).unwrap();
    let by_text = s.resolve(&easel_demo::script::parse_path("\"+\"").unwrap()).unwrap();
    assert_eq!(by_index, by_text);
    assert_eq!(s.backend.record(by_text).unwrap().kind, WidgetKind::Button);
    assert!(s.resolve(&easel_demo::script::parse_path("window/0/label").unwrap()).is_err());
}

fn hp_labels(s: &Session<HeadlessBackend>) -> Vec<String> {
    s.backend
        .with_recorder(|r| {
            r.records()
                .filter(|w| w.alive && w.kind == WidgetKind::Label)
                .filter_map(|w| w.label.clone())
                .filter(|l| l.contains('/'))
                .collect::<Vec<_>>()
        })
}

fn expected_hp(env: &[(String, i64)], tab: usize) -> Vec<String> {
    initial_groups()
        .iter()
        .map(|g| {
            let m = &g.monsters[tab];
            format!("{} {}/{}", m.name, m.hp, eval_formula(&m.hp_formula, env).unwrap())
        })
        .collect()
}

#[test]
fn tracker_threads_the_env_to_every_tab() {
    for inputs in [Inputs::Roots, Inputs::Derived] {
        let s = Session::headless(Demo::Tracker, inputs).unwrap();
        for (level, players) in [(2, 3), (3, 3), (7, 1), (0, 4)] {
            s.app.commit("L", &CommitOp::Set(level)).unwrap();
            s.app.commit("C", &CommitOp::Set(players)).unwrap();
            let env = vec![("L".into(), level), ("C".into(), players)];
            for tab in 0..3 {
                let cmds = format!("select window/2/1 {tab}\nselect window/3/1 {tab}\nidle");
                s.execute(&Script::parse(&cmds).unwrap()).unwrap();
                assert_eq!(hp_labels(&s), expected_hp(&env, tab), "L={level} C={players} tab={tab}");
            }
        }
        s.root.teardown();
        assert!(s.check_leaks().clean());
        assert_eq!(s.derived_update_errors(), 0);
    }
}

#[test]
fn tracker_hp_buttons_edit_the_selected_monster() {
    let s = Session::headless(Demo::Tracker, Inputs::Roots).unwrap();
    let cmds = "select window/2/1 1\nclick window/2/1/0/2\nclick window/2/1/0/2\nselect window/2/1 0\nselect window/2/1 1";
    s.execute(&Script::parse(cmds).unwrap()).unwrap();
    assert_eq!(hp_labels(&s)[0], "Archer 8/6");
}

#[test]
fn every_demo_leaves_nothing_behind() {
    for demo in Demo::ALL {
        for inputs in [Inputs::Roots, Inputs::Derived] {
            let s = Session::headless(demo, inputs).unwrap();
            s.run(&script(demo)).unwrap();
            let leaks = s.check_leaks();
            assert!(leaks.clean(), "{}: {leaks:?}", demo.name());
        }
    }
}
