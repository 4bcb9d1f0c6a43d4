//! The example programs.
//!
//! Each demo builds its model and a view over it and names the observables
//! a script may commit to. None of them touches a widget handle.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use easel::backend::Backend;
use easel::views::{add1, button, counter, hpanel, sub1, tabs, text, vpanel, window, WindowSpec};
use easel::{make_view, AnyView, Error, ObsError, Observable, WidgetHandle, WindowControls};
use parking_lot::Mutex;

use crate::formula::{eval_formula, lookup, Env};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Demo {
    Counter,
    Counters,
    Goodbye,
    Tracker,
}

impl Demo {
    pub const ALL: [Demo; 4] = [Demo::Counter, Demo::Counters, Demo::Goodbye, Demo::Tracker];

    pub fn name(self) -> &'static str {
        match self {
            Demo::Counter => "counter",
            Demo::Counters => "counters",
            Demo::Goodbye => "goodbye",
            Demo::Tracker => "tracker",
        }
    }

    pub fn build(self, inputs: Inputs) -> DemoApp {
        match self {
            Demo::Counter => counter_demo(inputs),
            Demo::Counters => counters_demo(inputs),
            Demo::Goodbye => goodbye_demo(),
            Demo::Tracker => tracker_demo(inputs),
        }
    }
}

impl fmt::Display for Demo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Demo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Demo::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown demo {s:?}"))
    }
}

/// How data reaches the views.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Inputs {
    /// Views get the model's observables themselves.
    #[default]
    Roots,
    /// Views only ever see derived copies, so any attempt by a view to write
    /// its inputs fails.
    Derived,
}

impl Inputs {
    fn pass<T: Clone + Send + Sync + 'static>(self, o: &Observable<T>) -> Observable<T> {
        match self {
            Inputs::Roots => o.clone(),
            Inputs::Derived => o.map(T::clone),
        }
    }
}

/// A scripted change to a named observable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommitOp {
    Add1,
    Sub1,
    Set(i64),
    SetText(String),
}

impl fmt::Display for CommitOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommitOp::Add1 => f.write_str("add1"),
            CommitOp::Sub1 => f.write_str("sub1"),
            CommitOp::Set(n) => write!(f, "set {n}"),
            CommitOp::SetText(s) => write!(f, "set-text {}", easel::backend::quote(s)),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CommitError {
    #[error("no observable named {0:?}")]
    Unknown(String),
    #[error("{op} does not apply to {name:?}")]
    WrongType { name: String, op: String },
    #[error(transparent)]
    Obs(#[from] ObsError),
}

type Target = Arc<dyn Fn(&CommitOp) -> Result<(), CommitError> + Send + Sync>;

/// A demo ready to render.
pub struct DemoApp {
    pub view: AnyView,
    targets: BTreeMap<String, Target>,
}

impl DemoApp {
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.targets.keys().map(String::as_str)
    }

    pub fn commit(&self, name: &str, op: &CommitOp) -> Result<(), CommitError> {
        let target = self
            .targets
            .get(name)
            .ok_or_else(|| CommitError::Unknown(name.to_string()))?;
        target(op)
    }
}

fn int_target(name: &str, o: &Observable<i64>) -> Target {
    let (name, o) = (name.to_string(), o.clone());
    Arc::new(move |op| {
        match op {
            CommitOp::Add1 => o.update(|n| add1(*n))?,
            CommitOp::Sub1 => o.update(|n| sub1(*n))?,
            CommitOp::Set(v) => o.set(*v)?,
            CommitOp::SetText(_) => {
                return Err(CommitError::WrongType {
                    name: name.clone(),
                    op: op.to_string(),
                })
            }
        };
        Ok(())
    })
}

fn text_target(o: &Observable<String>) -> Target {
    let o = o.clone();
    Arc::new(move |op| {
        let next = match op {
            CommitOp::SetText(s) => s.clone(),
            CommitOp::Set(n) => n.to_string(),
            other => {
                return Err(CommitError::WrongType {
                    name: "title".into(),
                    op: other.to_string(),
                })
            }
        };
        o.set(next)?;
        Ok(())
    })
}

/// One "-", count, "+" row over a single observable.
pub fn counter_demo(inputs: Inputs) -> DemoApp {
    let count = Observable::new(0i64);
    let shown = inputs.pass(&count);
    let (dec, inc) = (count.clone(), count.clone());
    let view = window(WindowSpec::new("Counter").child(hpanel([
        button("-", move || dec.update(|n| sub1(*n))),
        text(shown.map(|n| n.to_string())),
        button("+", move || inc.update(|n| add1(*n))),
    ])));
    DemoApp {
        view,
        targets: BTreeMap::from([("count".to_string(), int_target("count", &count))]),
    }
}

/// Two instances of the reusable counter over separate observables.
pub fn counters_demo(inputs: Inputs) -> DemoApp {
    let c1 = Observable::new(0i64);
    let c2 = Observable::new(5i64);
    let title = Observable::new("Counters".to_string());
    let (m1, m2) = (c1.clone(), c2.clone());
    let view = window(
        WindowSpec::new(inputs.pass(&title))
            .child(counter(&inputs.pass(&c1), move |f| m1.update(|n| f(*n))))
            .child(counter(&inputs.pass(&c2), move |f| m2.update(|n| f(*n)))),
    );
    DemoApp {
        view,
        targets: BTreeMap::from([
            ("c1".to_string(), int_target("c1", &c1)),
            ("c2".to_string(), int_target("c2", &c2)),
            ("title".to_string(), text_target(&title)),
        ]),
    }
}

/// A window that closes itself when its button is clicked.
pub fn goodbye_demo() -> DemoApp {
    let close: Arc<Mutex<Option<WindowControls>>> = Arc::new(Mutex::new(None));
    let capture = close.clone();
    let view = window(
        WindowSpec::new("Goodbye World")
            .customize(move |_, controls| *capture.lock() = Some(controls))
            .child(button("Click Me!", move || {
                if let Some(controls) = close.lock().as_ref() {
                    controls.close();
                }
            })),
    );
    DemoApp {
        view,
        targets: BTreeMap::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monster {
    pub name: String,
    pub hp_formula: String,
    pub hp: i64,
}

impl fmt::Display for Monster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub name: String,
    pub monsters: Vec<Monster>,
}

/// The text an hp label shows: current and maximum hit points, the maximum
/// coming from the monster's formula.
pub fn hp_text(m: &Monster, env: &[(String, i64)]) -> String {
    match eval_formula(&m.hp_formula, env) {
        Ok(max) => format!("{} {}/{}", m.name, m.hp, max),
        Err(e) => format!("{} {}/? ({e})", m.name, m.hp),
    }
}

pub fn initial_env() -> Env {
    vec![("L".to_string(), 2), ("C".to_string(), 3)]
}

pub fn initial_groups() -> Vec<Group> {
    let monster = |name: &str, f: &str, hp| Monster {
        name: name.into(),
        hp_formula: f.into(),
        hp,
    };
    vec![
        Group {
            name: "Bandits".into(),
            monsters: vec![
                monster("Guard", "2*L+4", 8),
                monster("Archer", "L*3", 6),
                monster("Leader", "(L+C)*2+1", 11),
            ],
        },
        Group {
            name: "Undead".into(),
            monsters: vec![
                monster("Zombie", "5+L*L", 9),
                monster("Skeleton", "2*L", 4),
                monster("Wraith", "3*(L+1)-C", 6),
            ],
        },
    ]
}

/// Shows a monster's hit points against the shared environment. Depends on
/// both observables, so it re-renders when either changes.
fn hp_view(monster: &Observable<Monster>, env: &Observable<Env>) -> AnyView {
    let (m, e) = (monster.clone(), env.clone());
    let (m2, e2) = (monster.clone(), env.clone());
    make_view(
        [monster.erase(), env.erase()],
        move |cx, parent| {
            let parent = parent.ok_or(Error::MissingParent("hp"))?;
            cx.create_label(parent, &hp_text(&m.peek(), &e.peek()))
        },
        move |backend: &mut dyn Backend, widget: WidgetHandle, changed, value| {
            let text = if changed.is(&m2) {
                let monster = value.downcast_ref::<Monster>().ok_or(Error::ValueType(changed.id()))?;
                hp_text(monster, &e2.peek())
            } else {
                let env = value.downcast_ref::<Env>().ok_or(Error::ValueType(changed.id()))?;
                hp_text(&m2.peek(), env)
            };
            backend.set_label(widget, &text)?;
            Ok(())
        },
        |_, _| Ok(()),
    )
}

fn monster_view<R: easel::view::ActionResult>(
    monster: &Observable<Monster>,
    env: &Observable<Env>,
    action: impl Fn(fn(i64) -> i64) -> R + Send + Sync + 'static,
) -> AnyView {
    let action = Arc::new(action);
    let minus = action.clone();
    hpanel([
        button("-", move || minus(sub1)),
        hp_view(monster, env),
        button("+", move || action(add1)),
    ])
}

fn monster_group_view(
    group: usize,
    name: &str,
    monsters: Observable<Vec<Monster>>,
    env: &Observable<Env>,
    model: &Observable<Vec<Group>>,
) -> AnyView {
    let (env, model) = (env.clone(), model.clone());
    vpanel([
        text(name),
        tabs(monsters, move |monster| {
            let (model, picked) = (model.clone(), monster.clone());
            monster_view(&monster, &env, move |f| {
                let who = picked.peek().name;
                model.update(|groups| {
                    let mut groups = groups.clone();
                    for m in groups[group].monsters.iter_mut().filter(|m| m.name == who) {
                        m.hp = f(m.hp);
                    }
                    groups
                })
            })
        }),
    ])
}

fn env_target(var: &'static str, env: &Observable<Env>) -> Target {
    let env = env.clone();
    Arc::new(move |op| {
        let f: Box<dyn Fn(i64) -> i64> = match op {
            CommitOp::Add1 => Box::new(add1),
            CommitOp::Sub1 => Box::new(sub1),
            CommitOp::Set(v) => {
                let v = *v;
                Box::new(move |_| v)
            }
            CommitOp::SetText(_) => {
                return Err(CommitError::WrongType {
                    name: var.to_string(),
                    op: op.to_string(),
                })
            }
        };
        env.update(|e| set_var(e, var, f(lookup(e, var).unwrap_or(0))))?;
        Ok(())
    })
}

fn set_var(env: &[(String, i64)], var: &str, value: i64) -> Env {
    let mut env = env.to_vec();
    match env.iter_mut().find(|(k, _)| k == var) {
        Some(slot) => slot.1 = value,
        None => env.push((var.to_string(), value)),
    }
    env
}

fn env_row(label: &str, var: &'static str, env: &Observable<Env>, model: &Observable<Env>) -> AnyView {
    let value = env.map(move |e| lookup(e, var).unwrap_or(0));
    let model = model.clone();
    hpanel([
        text(label),
        counter(&value, move |f| model.update(|e| set_var(e, var, f(lookup(e, var).unwrap_or(0))))),
    ])
}

/// Two monster groups of three, with hit point formulas evaluated against
/// a shared environment of level `L` and player count `C`.
pub fn tracker_demo(inputs: Inputs) -> DemoApp {
    let env = Observable::new(initial_env());
    let groups = Observable::new(initial_groups());
    let shown_env = inputs.pass(&env);
    let shown_groups = inputs.pass(&groups);
    let mut spec = WindowSpec::new("Tracker")
        .child(env_row("Level", "L", &shown_env, &env))
        .child(env_row("Players", "C", &shown_env, &env));
    for (i, g) in initial_groups().iter().enumerate() {
        let monsters = shown_groups.map(move |gs| gs[i].monsters.clone());
        spec = spec.child(monster_group_view(i, &g.name, monsters, &shown_env, &groups));
    }
    DemoApp {
        view: window(spec),
        targets: BTreeMap::from([
            ("L".to_string(), env_target("L", &env)),
            ("C".to_string(), env_target("C", &env)),
        ]),
    }
}
