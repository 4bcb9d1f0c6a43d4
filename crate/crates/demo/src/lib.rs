//! Example programs for easel and a scripted-event harness that drives them
//! deterministically.

pub mod demos;
pub mod formula;
pub mod script;
pub mod session;

pub use demos::{CommitOp, Demo, DemoApp, Inputs};
pub use formula::{eval_formula, Env, FormulaError};
pub use script::{Command, ParseError, Path, Script};
pub use session::{LeakCheck, Outcome, Report, ScriptBackend, ScriptError, Session};
