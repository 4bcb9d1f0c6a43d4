//! Running a demo under a script.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use easel::backend::{BackendError, BackendOp, HeadlessBackend, OpKind, WidgetRecord};
use easel::{Backend, Error, RenderRoot, Renderer, WidgetHandle};
use easel_term::TerminalBackend;
use parking_lot::Mutex;

use crate::demos::{CommitError, CommitOp, Demo, DemoApp, Inputs};
use crate::script::{Command, Path, Script, Segment};

/// What a script needs from a backend besides the toolkit calls.
pub trait ScriptBackend: Backend + Clone + 'static {
    fn click(&self, widget: WidgetHandle) -> Result<(), BackendError>;
    fn select(&self, widget: WidgetHandle, index: usize) -> Result<(), BackendError>;
    fn record(&self, widget: WidgetHandle) -> Option<WidgetRecord>;
    fn live_children(&self, widget: WidgetHandle) -> Vec<WidgetHandle>;
    fn call_log(&self) -> Vec<BackendOp>;
    fn dump_log(&self) -> String;
}

impl ScriptBackend for HeadlessBackend {
    fn click(&self, widget: WidgetHandle) -> Result<(), BackendError> {
        self.simulate_click(widget)
    }
    fn select(&self, widget: WidgetHandle, index: usize) -> Result<(), BackendError> {
        self.simulate_select(widget, index)
    }
    fn record(&self, widget: WidgetHandle) -> Option<WidgetRecord> {
        HeadlessBackend::record(self, widget)
    }
    fn live_children(&self, widget: WidgetHandle) -> Vec<WidgetHandle> {
        HeadlessBackend::live_children(self, widget)
    }
    fn call_log(&self) -> Vec<BackendOp> {
        HeadlessBackend::call_log(self)
    }
    fn dump_log(&self) -> String {
        HeadlessBackend::dump_log(self)
    }
}

impl ScriptBackend for TerminalBackend {
    fn click(&self, widget: WidgetHandle) -> Result<(), BackendError> {
        self.simulate_click(widget)
    }
    fn select(&self, widget: WidgetHandle, index: usize) -> Result<(), BackendError> {
        TerminalBackend::select(self, widget, index)
    }
    fn record(&self, widget: WidgetHandle) -> Option<WidgetRecord> {
        TerminalBackend::record(self, widget)
    }
    fn live_children(&self, widget: WidgetHandle) -> Vec<WidgetHandle> {
        TerminalBackend::live_children(self, widget)
    }
    fn call_log(&self) -> Vec<BackendOp> {
        TerminalBackend::call_log(self)
    }
    fn dump_log(&self) -> String {
        TerminalBackend::dump_log(self)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScriptError {
    #[error("line {line}: cannot resolve {path}: {msg}")]
    Resolve { line: usize, path: String, msg: String },
    #[error("line {line}: {source}")]
    Commit {
        line: usize,
        #[source]
        source: CommitError,
    },
    #[error("line {line}: {source}")]
    Backend {
        line: usize,
        #[source]
        source: BackendError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub line: usize,
    pub command: String,
    pub passed: bool,
    /// Expected and actual values when the expectation failed.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub expectations: Vec<Expectation>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.expectations.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> usize {
        self.expectations.iter().filter(|e| !e.passed).count()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.expectations {
            if e.passed {
                writeln!(f, "PASS line {}: {}", e.line, e.command)?;
            } else {
                writeln!(f, "FAIL line {}: {} ({})", e.line, e.command, e.detail)?;
            }
        }
        let n = self.expectations.len();
        match self.failures() {
            0 => writeln!(f, "{n} expectation(s) passed"),
            k => writeln!(f, "{k} of {n} expectation(s) failed"),
        }
    }
}

/// The result of [`Session::run`].
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    /// The window closed itself and the event loop stopped before the
    /// session tore it down.
    pub closed_by_app: bool,
}

/// Checks made after teardown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeakCheck {
    /// Handles created but never destroyed.
    pub undestroyed: Vec<WidgetHandle>,
    /// Handles destroyed more than once, or never created.
    pub unbalanced: Vec<WidgetHandle>,
    /// Backend ops issued by commits made after teardown.
    pub ops_after_teardown: usize,
    pub active_subscriptions: usize,
}

impl LeakCheck {
    pub fn clean(&self) -> bool {
        self.undestroyed.is_empty()
            && self.unbalanced.is_empty()
            && self.ops_after_teardown == 0
            && self.active_subscriptions == 0
    }
}

/// One rendered demo on one backend.
pub struct Session<B: ScriptBackend> {
    pub demo: Demo,
    pub app: DemoApp,
    pub backend: B,
    pub renderer: Renderer,
    pub root: RenderRoot,
    errors: Arc<Mutex<Vec<String>>>,
    derived_updates: Arc<AtomicUsize>,
}

impl Session<HeadlessBackend> {
    pub fn headless(demo: Demo, inputs: Inputs) -> Result<Self, Error> {
        Session::start(demo, inputs, HeadlessBackend::new())
    }
}

impl<B: ScriptBackend> Session<B> {
    pub fn start(demo: Demo, inputs: Inputs, backend: B) -> Result<Self, Error> {
        let app = demo.build(inputs);
        let errors = Arc::new(Mutex::new(Vec::new()));
        let derived_updates = Arc::new(AtomicUsize::new(0));
        let (e, d) = (errors.clone(), derived_updates.clone());
        let renderer = Renderer::with_error_hook(
            backend.clone(),
            Arc::new(move |err: &Error| {
                if err.is_derived_update() {
                    d.fetch_add(1, Ordering::SeqCst);
                }
                eprintln!("easel: {err}");
                e.lock().push(err.to_string());
            }),
        );
        let root = renderer.render(&app.view)?;
        Ok(Session {
            demo,
            app,
            backend,
            renderer,
            root,
            errors,
            derived_updates,
        })
    }

    /// Errors reported to the renderer so far.
    pub fn errors(&self) -> Vec<String> {
        self.errors.lock().clone()
    }

    pub fn derived_update_errors(&self) -> usize {
        self.derived_updates.load(Ordering::SeqCst)
    }

    pub fn resolve(&self, path: &Path) -> Result<WidgetHandle, String> {
        let mut at = self.root.root_widget();
        for seg in &path.0 {
            let rec = self.backend.record(at).ok_or("unknown widget")?;
            match seg {
                Segment::Kind(k) => {
                    if rec.kind != *k {
                        return Err(format!("{at} is a {}, not a {}", rec.kind.name(), k.name()));
                    }
                }
                Segment::Index(i) => {
                    let kids = self.backend.live_children(at);
                    at = *kids
                        .get(*i)
                        .ok_or_else(|| format!("{at} has {} live children, no child {i}", kids.len()))?;
                }
                Segment::Text(t) => {
                    at = self.find_text(at, t).ok_or_else(|| format!("no widget labelled {t:?} under {at}"))?;
                }
            }
        }
        match self.backend.record(at) {
            Some(r) if r.alive => Ok(at),
            _ => Err(format!("{at} is not alive")),
        }
    }

    fn find_text(&self, under: WidgetHandle, text: &str) -> Option<WidgetHandle> {
        for kid in self.backend.live_children(under) {
            if self.backend.record(kid)?.label.as_deref() == Some(text) {
                return Some(kid);
            }
            if let Some(found) = self.find_text(kid, text) {
                return Some(found);
            }
        }
        None
    }

    /// Runs `script`, pumping the event loop on this thread after every
    /// event.
    pub fn execute(&self, script: &Script) -> Result<Report, ScriptError> {
        let mut report = Report::default();
        for line in &script.lines {
            let n = line.number;
            let resolve = |p: &Path| {
                self.resolve(p).map_err(|msg| ScriptError::Resolve {
                    line: n,
                    path: p.to_string(),
                    msg,
                })
            };
            let backend_err = |source| ScriptError::Backend { line: n, source };
            match &line.command {
                Command::Click(p) => {
                    self.backend.click(resolve(p)?).map_err(backend_err)?;
                    self.renderer.wait_idle();
                }
                Command::Select(p, i) => {
                    self.backend.select(resolve(p)?, *i).map_err(backend_err)?;
                    self.renderer.wait_idle();
                }
                Command::Commit { name, op } => {
                    self.renderer
                        .scoped(|| self.app.commit(name, op))
                        .map_err(|source| ScriptError::Commit { line: n, source })?;
                    self.renderer.wait_idle();
                }
                Command::Idle => self.renderer.wait_idle(),
                Command::ExpectLabel(p, want) => {
                    self.renderer.wait_idle();
                    let w = resolve(p)?;
                    let got = self.backend.record(w).and_then(|r| r.label);
                    let passed = got.as_deref() == Some(want.as_str());
                    report.expectations.push(Expectation {
                        line: n,
                        command: line.command.to_string(),
                        passed,
                        detail: format!("expected {want:?}, got {:?}", got.unwrap_or_default()),
                    });
                }
                Command::ExpectLogCount(kind, want) => {
                    self.renderer.wait_idle();
                    let got = self.count(*kind);
                    report.expectations.push(Expectation {
                        line: n,
                        command: line.command.to_string(),
                        passed: got == *want,
                        detail: format!("expected {want}, got {got}"),
                    });
                }
            }
        }
        Ok(report)
    }

    pub fn count(&self, kind: OpKind) -> usize {
        self.backend.call_log().iter().filter(|op| op.kind == kind).count()
    }

    /// Runs the event loop on its own thread, feeds `script` from this one,
    /// then tears the demo down.
    pub fn run(&self, script: &Script) -> Result<Outcome, ScriptError> {
        thread::scope(|s| {
            let (renderer, root) = (self.renderer.clone(), self.root.clone());
            let event_loop = s.spawn(move || renderer.run(&root));
            let result = self.execute(script);
            let closed_by_app = !self.root.is_open();
            if closed_by_app {
                // the loop stops by itself once the window is closed
                let _ = event_loop.join();
                self.root.teardown();
            } else {
                self.root.teardown();
                let _ = event_loop.join();
            }
            result.map(|report| Outcome {
                report,
                closed_by_app,
            })
        })
    }

    /// After teardown: every created widget destroyed exactly once, no
    /// backend ops in response to further commits, no live subscriptions.
    pub fn check_leaks(&self) -> LeakCheck {
        let log = self.backend.call_log();
        let mut created = Vec::new();
        let mut destroyed = Vec::new();
        for op in &log {
            if op.kind.is_create() {
                created.extend(op.target);
            } else if op.kind == OpKind::Destroy {
                destroyed.extend(op.target);
            }
        }
        let undestroyed = created.iter().filter(|h| !destroyed.contains(h)).copied().collect();
        let mut unbalanced = Vec::new();
        for h in &destroyed {
            let times = destroyed.iter().filter(|d| *d == h).count();
            if (times != 1 || !created.contains(h)) && !unbalanced.contains(h) {
                unbalanced.push(*h);
            }
        }
        let before = log.len();
        let names: Vec<String> = self.app.names().map(str::to_string).collect();
        for name in names {
            self.renderer.scoped(|| {
                if self.app.commit(&name, &CommitOp::Add1).is_err() {
                    let _ = self.app.commit(&name, &CommitOp::SetText("after".into()));
                }
            });
        }
        self.renderer.wait_idle();
        LeakCheck {
            undestroyed,
            unbalanced,
            ops_after_teardown: self.backend.call_log().len() - before,
            active_subscriptions: self.root.active_subscriptions(),
        }
    }
}
