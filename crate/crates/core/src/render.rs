//! The renderer: builds widget trees from views, wires observables to
//! queued view updates and runs the event loop.
//!
//! Every piece of work that touches views or the backend is a job on one
//! FIFO queue. Whoever pumps the queue ([`Renderer::run_until_idle`],
//! [`Renderer::run`]) is the event loop; at most one job runs at a time.

use std::cell::Cell;
use std::collections::VecDeque;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, OnceLock, Weak};
use std::time::Duration;

use parking_lot::{Condvar, Mutex};

use crate::backend::{Backend, Orientation, WidgetHandle};
use crate::obs::{self, AnyObservable, BoxError, ObsError, Subscription, Value};
use crate::view::{Action, ActionResult, AnyView};
use crate::Error;

/// Receives errors that have no caller: failed view updates, failed
/// actions, panics in jobs and observable errors raised on the loop.
pub type ErrorHook = Arc<dyn Fn(&Error) + Send + Sync>;

thread_local! {
    static IN_JOB: Cell<bool> = const { Cell::new(false) };
}

struct InJob(bool);

impl InJob {
    fn enter() -> Self {
        InJob(IN_JOB.replace(true))
    }
}

impl Drop for InJob {
    fn drop(&mut self) {
        IN_JOB.set(self.0);
    }
}

fn in_job() -> bool {
    IN_JOB.get()
}

type Callback = Box<dyn FnOnce() -> Result<(), BoxError> + Send>;

enum Job {
    Update {
        node: Weak<NodeState>,
        dep: usize,
        value: Value,
    },
    Callback(Callback),
    Close(Weak<RootState>),
    Teardown(Arc<RootState>),
}

#[derive(Default)]
struct Queue {
    jobs: VecDeque<Job>,
    busy: bool,
    looping: usize,
}

struct Shared {
    backend: Mutex<Box<dyn Backend>>,
    queue: Mutex<Queue>,
    cond: Condvar,
    hook: ErrorHook,
    // rendered roots stay wired until torn down, whether or not the caller
    // keeps its RenderRoot
    roots: Mutex<Vec<Arc<RootState>>>,
}

impl Shared {
    fn push(&self, job: Job) {
        self.queue.lock().jobs.push_back(job);
        self.cond.notify_all();
    }

    fn report(&self, err: &Error) {
        (self.hook)(err)
    }
}

fn push_weak(shared: &Weak<Shared>, job: Job) {
    if let Some(shared) = shared.upgrade() {
        shared.push(job);
    }
}

struct NodeState {
    view: AnyView,
    deps: Vec<AnyObservable>,
    widget: OnceLock<WidgetHandle>,
    alive: AtomicBool,
    subs: Mutex<Vec<Subscription>>,
    children: Mutex<Vec<Arc<NodeState>>>,
}

impl NodeState {
    fn walk(self: &Arc<Self>, out: &mut Vec<Arc<NodeState>>) {
        // post-order: leaves first
        for child in self.children.lock().iter() {
            child.walk(out);
        }
        out.push(self.clone());
    }
}

type CloseHandler = Arc<dyn Fn() + Send + Sync>;

struct RootState {
    window: OnceLock<WidgetHandle>,
    open: AtomicBool,
    torn_down: AtomicBool,
    tree: Mutex<Option<Arc<NodeState>>>,
    close_handlers: Mutex<Vec<CloseHandler>>,
}

/// Renders views against one backend and owns its event queue.
///
/// Clones share the backend and the queue.
#[derive(Clone)]
pub struct Renderer {
    shared: Arc<Shared>,
}

impl Renderer {
    /// A renderer whose error hook writes to standard error.
    pub fn new(backend: impl Backend + 'static) -> Self {
        Self::with_error_hook(backend, Arc::new(|e: &Error| eprintln!("easel: {e}")))
    }

    pub fn with_error_hook(backend: impl Backend + 'static, hook: ErrorHook) -> Self {
        Renderer {
            shared: Arc::new(Shared {
                backend: Mutex::new(Box::new(backend)),
                queue: Mutex::new(Queue::default()),
                cond: Condvar::new(),
                hook,
                roots: Mutex::new(Vec::new()),
            }),
        }
    }

    pub fn dispatcher(&self) -> Dispatcher {
        Dispatcher {
            shared: Arc::downgrade(&self.shared),
        }
    }

    pub fn report(&self, err: &Error) {
        self.shared.report(err)
    }

    /// Runs `f` with observable errors on this thread routed to the
    /// renderer's hook instead of standard error.
    pub fn scoped<R>(&self, f: impl FnOnce() -> R) -> R {
        obs::with_error_hook(self.obs_bridge(), f)
    }

    fn obs_bridge(&self) -> obs::ErrorHook {
        let hook = self.shared.hook.clone();
        Arc::new(move |e: &ObsError| hook(&Error::Obs(e.duplicate())))
    }

    /// Builds `view` as a new top-level window and shows it.
    ///
    /// On failure every widget created so far is destroyed and every
    /// subscription revoked. Calling this from inside a job fails with
    /// [`Error::Reentrant`].
    pub fn render(&self, view: &AnyView) -> Result<RenderRoot, Error> {
        if in_job() {
            return Err(Error::Reentrant);
        }
        let root = Arc::new(RootState {
            window: OnceLock::new(),
            open: AtomicBool::new(false),
            torn_down: AtomicBool::new(false),
            tree: Mutex::new(None),
            close_handlers: Mutex::new(Vec::new()),
        });
        let mut guard = self.shared.backend.lock();
        let _job = InJob::enter();
        let backend: &mut dyn Backend = &mut **guard;
        let weak = Arc::downgrade(&self.shared);
        let mut cx = BuildCx {
            backend,
            shared: weak,
            root: root.clone(),
            current: None,
            created: Vec::new(),
            windows: Vec::new(),
        };
        let node = obs::with_error_hook(self.obs_bridge(), || cx.build(view, None))?;
        let widget = *node.widget.get().expect("built node has a widget");
        let result = if cx.windows.contains(&widget) {
            cx.backend.show(widget, true).map_err(Error::from)
        } else {
            Err(Error::RootNotWindow)
        };
        if let Err(e) = result {
            dismantle(cx.backend, &node, &self.shared);
            return Err(e);
        }
        let _ = root.window.set(widget);
        *root.tree.lock() = Some(node);
        root.open.store(true, Ordering::SeqCst);
        self.shared.roots.lock().push(root.clone());
        Ok(RenderRoot {
            root,
            shared: self.shared.clone(),
        })
    }

    /// Runs queued jobs, including ones they enqueue, until the queue is
    /// empty. Returns the number of jobs run. Inside a job this does
    /// nothing and returns 0.
    pub fn run_until_idle(&self) -> usize {
        if in_job() {
            return 0;
        }
        let mut count = 0;
        while self.run_one() {
            count += 1;
        }
        count
    }

    fn run_one(&self) -> bool {
        let mut backend = self.shared.backend.lock();
        let job = {
            let mut q = self.shared.queue.lock();
            match q.jobs.pop_front() {
                Some(job) => {
                    q.busy = true;
                    job
                }
                None => return false,
            }
        };
        let _job = InJob::enter();
        let shared = &self.shared;
        let outcome = obs::with_error_hook(self.obs_bridge(), || {
            catch_unwind(AssertUnwindSafe(|| execute(shared, &mut **backend, job)))
        });
        if let Err(panic) = outcome {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            shared.report(&Error::Panic(msg));
        }
        drop(backend);
        self.shared.queue.lock().busy = false;
        self.shared.cond.notify_all();
        true
    }

    /// Runs the event loop on this thread until `root` is closed or torn
    /// down.
    pub fn run(&self, root: &RenderRoot) {
        self.run_with(root, || {})
    }

    /// Like [`run`](Self::run), calling `after` each time the queue drains.
    pub fn run_with(&self, root: &RenderRoot, mut after: impl FnMut()) {
        if in_job() {
            return;
        }
        self.shared.queue.lock().looping += 1;
        loop {
            self.run_until_idle();
            after();
            if !root.is_open() {
                break;
            }
            self.dispatcher().wait(Some(Duration::from_millis(50)));
        }
        self.shared.queue.lock().looping -= 1;
        self.shared.cond.notify_all();
    }

    /// Blocks until the queue is empty and no job is running. If no thread
    /// is running the loop, pumps it on this one.
    pub fn wait_idle(&self) {
        if in_job() {
            return;
        }
        {
            let mut q = self.shared.queue.lock();
            while q.looping > 0 && (!q.jobs.is_empty() || q.busy) {
                self.shared.cond.wait(&mut q);
            }
            if q.looping > 0 {
                return;
            }
        }
        self.run_until_idle();
    }

    /// Runs `f` against the backend with the event loop held.
    pub fn with_backend<R>(&self, f: impl FnOnce(&mut dyn Backend) -> R) -> R {
        let mut guard = self.shared.backend.lock();
        f(&mut **guard)
    }
}

fn execute(shared: &Arc<Shared>, backend: &mut dyn Backend, job: Job) {
    match job {
        Job::Update { node, dep, value } => {
            let Some(node) = node.upgrade() else { return };
            if !node.alive.load(Ordering::SeqCst) {
                return;
            }
            let Some(&widget) = node.widget.get() else { return };
            if let Err(e) = node.view.update(backend, widget, &node.deps[dep], &value) {
                shared.report(&e);
            }
        }
        Job::Callback(f) => {
            if let Err(e) = f() {
                shared.report(&Error::from_action(e));
            }
        }
        Job::Close(root) => {
            let Some(root) = root.upgrade() else { return };
            if let Err(e) = close(backend, &root) {
                shared.report(&e);
            }
        }
        Job::Teardown(root) => teardown(backend, &root, shared),
    }
}

fn close(backend: &mut dyn Backend, root: &RootState) -> Result<(), Error> {
    let Some(&window) = root.window.get() else { return Ok(()) };
    if !root.open.load(Ordering::SeqCst) || !backend.is_alive(window) || !backend.is_visible(window)
    {
        return Ok(());
    }
    if !backend.can_close(window)? {
        return Ok(());
    }
    backend.on_close(window)?;
    let handlers = root.close_handlers.lock().clone();
    for handler in handlers {
        handler();
    }
    backend.show(window, false)?;
    root.open.store(false, Ordering::SeqCst);
    Ok(())
}

fn teardown(backend: &mut dyn Backend, root: &RootState, shared: &Shared) {
    if root.torn_down.swap(true, Ordering::SeqCst) {
        return;
    }
    root.open.store(false, Ordering::SeqCst);
    shared.roots.lock().retain(|r| !std::ptr::eq(&**r, root));
    let tree = root.tree.lock().take();
    if let Some(node) = tree {
        dismantle(backend, &node, shared);
    }
}

/// Revokes every subscription under `node`, runs destroy leaf-first, then
/// destroys the backend widget.
fn dismantle(backend: &mut dyn Backend, node: &Arc<NodeState>, shared: &Shared) {
    let mut nodes = Vec::new();
    node.walk(&mut nodes);
    for n in &nodes {
        for sub in n.subs.lock().drain(..) {
            sub.unobserve();
        }
    }
    for n in &nodes {
        if n.alive.swap(false, Ordering::SeqCst) {
            let widget = *n.widget.get().expect("live node has a widget");
            if let Err(e) = n.view.destroy(backend, widget) {
                shared.report(&e);
            }
        }
    }
    if let Some(&widget) = node.widget.get() {
        if backend.is_alive(widget) {
            if let Err(e) = backend.destroy_widget(widget) {
                shared.report(&e.into());
            }
        }
    }
}

/// A handle for queueing work onto a renderer's event loop from any thread.
#[derive(Clone)]
pub struct Dispatcher {
    shared: Weak<Shared>,
}

impl Dispatcher {
    /// Queues `action` to run on the loop.
    pub fn queue_action(&self, action: &Action) {
        let action = action.clone();
        push_weak(&self.shared, Job::Callback(Box::new(move || action.invoke())));
    }

    /// Queues a one-off callback. Errors go to the error hook.
    pub fn post<R: ActionResult>(&self, f: impl FnOnce() -> R + Send + 'static) {
        push_weak(&self.shared, Job::Callback(Box::new(move || f().into_result())));
    }

    /// Number of queued jobs, not counting one that is running.
    pub fn pending(&self) -> usize {
        self.shared.upgrade().map_or(0, |s| s.queue.lock().jobs.len())
    }

    /// Waits until a job is queued, or `timeout` passes. Returns whether
    /// jobs are pending.
    pub fn wait(&self, timeout: Option<Duration>) -> bool {
        let Some(shared) = self.shared.upgrade() else { return false };
        let mut q = shared.queue.lock();
        if q.jobs.is_empty() {
            match timeout {
                Some(t) => {
                    shared.cond.wait_for(&mut q, t);
                }
                None => shared.cond.wait(&mut q),
            }
        }
        !q.jobs.is_empty()
    }
}

/// Capabilities handed to window customizers.
#[derive(Clone)]
pub struct WindowControls {
    shared: Weak<Shared>,
    root: Weak<RootState>,
}

impl WindowControls {
    /// Queues the close protocol: ask the window whether it can close,
    /// notify it, then hide it. Does nothing once the window is hidden.
    pub fn close(&self) {
        push_weak(&self.shared, Job::Close(self.root.clone()));
    }

    /// Registers `f` to run during the close protocol, after the window is
    /// told it is closing and before it is hidden.
    pub fn on_close(&self, f: impl Fn() + Send + Sync + 'static) {
        if let Some(root) = self.root.upgrade() {
            root.close_handlers.lock().push(Arc::new(f));
        }
    }

    pub fn is_open(&self) -> bool {
        self.root
            .upgrade()
            .is_some_and(|r| r.open.load(Ordering::SeqCst))
    }
}

/// One rendered window and its wiring.
#[derive(Clone)]
pub struct RenderRoot {
    root: Arc<RootState>,
    shared: Arc<Shared>,
}

impl RenderRoot {
    pub fn root_widget(&self) -> WidgetHandle {
        *self.root.window.get().expect("rendered root has a window")
    }

    /// True until the window is closed or the root torn down.
    pub fn is_open(&self) -> bool {
        self.root.open.load(Ordering::SeqCst)
    }

    pub fn is_torn_down(&self) -> bool {
        self.root.torn_down.load(Ordering::SeqCst)
    }

    /// Revokes all subscriptions, runs each view's destroy leaf-first and
    /// destroys the widgets. Idempotent. From inside a job the teardown is
    /// queued instead.
    pub fn teardown(&self) {
        if in_job() {
            self.shared.push(Job::Teardown(self.root.clone()));
            return;
        }
        {
            let mut guard = self.shared.backend.lock();
            let _job = InJob::enter();
            teardown(&mut **guard, &self.root, &self.shared);
        }
        // wake a loop waiting for jobs so it notices
        self.shared.cond.notify_all();
    }

    /// Queues the close protocol for this window.
    pub fn request_close(&self) {
        self.controls().close()
    }

    pub fn controls(&self) -> WindowControls {
        WindowControls {
            shared: Arc::downgrade(&self.shared),
            root: Arc::downgrade(&self.root),
        }
    }

    /// Number of live subscriptions held by this root's wiring.
    pub fn active_subscriptions(&self) -> usize {
        let Some(node) = self.root.tree.lock().clone() else { return 0 };
        let mut nodes = Vec::new();
        node.walk(&mut nodes);
        nodes
            .iter()
            .map(|n| n.subs.lock().iter().filter(|s| s.is_active()).count())
            .sum()
    }

    /// The widgets wired to views, in creation order.
    pub fn widgets(&self) -> Vec<WidgetHandle> {
        let Some(node) = self.root.tree.lock().clone() else { return Vec::new() };
        let mut nodes = Vec::new();
        node.walk(&mut nodes);
        let mut handles: Vec<_> = nodes.iter().filter_map(|n| n.widget.get().copied()).collect();
        handles.sort_by_key(|h| h.id());
        handles
    }
}

/// The context a view's `create` runs in.
///
/// Widgets created through it are destroyed again if the view fails, and
/// handlers passed to buttons and tabs are queued on the event loop rather
/// than run inline.
pub struct BuildCx<'a> {
    backend: &'a mut dyn Backend,
    shared: Weak<Shared>,
    root: Arc<RootState>,
    current: Option<Arc<NodeState>>,
    created: Vec<WidgetHandle>,
    windows: Vec<WidgetHandle>,
}

impl<'a> BuildCx<'a> {
    pub fn backend(&mut self) -> &mut dyn Backend {
        &mut *self.backend
    }

    pub fn dispatcher(&self) -> Dispatcher {
        Dispatcher {
            shared: self.shared.clone(),
        }
    }

    /// Controls for the window this tree is being built into.
    pub fn window_controls(&self) -> WindowControls {
        WindowControls {
            shared: self.shared.clone(),
            root: Arc::downgrade(&self.root),
        }
    }

    fn track(&mut self, r: Result<WidgetHandle, crate::backend::BackendError>) -> Result<WidgetHandle, Error> {
        let handle = r?;
        self.created.push(handle);
        Ok(handle)
    }

    pub fn create_window(&mut self, title: &str) -> Result<WidgetHandle, Error> {
        let r = self.backend.create_window(title);
        let handle = self.track(r)?;
        self.windows.push(handle);
        Ok(handle)
    }

    pub fn create_panel(&mut self, parent: WidgetHandle, orientation: Orientation) -> Result<WidgetHandle, Error> {
        let r = self.backend.create_panel(parent, orientation);
        self.track(r)
    }

    pub fn create_label(&mut self, parent: WidgetHandle, text: &str) -> Result<WidgetHandle, Error> {
        let r = self.backend.create_label(parent, text);
        self.track(r)
    }

    /// Creates a button whose clicks queue `action`.
    pub fn create_button(&mut self, parent: WidgetHandle, label: &str, action: Action) -> Result<WidgetHandle, Error> {
        let dispatcher = self.dispatcher();
        let r = self
            .backend
            .create_button(parent, label, Arc::new(move || dispatcher.queue_action(&action)));
        self.track(r)
    }

    /// Creates a tab container whose selections queue `on_select`.
    pub fn create_tabs<R: ActionResult>(
        &mut self,
        parent: WidgetHandle,
        labels: &[String],
        on_select: impl Fn(usize) -> R + Send + Sync + 'static,
    ) -> Result<WidgetHandle, Error> {
        let dispatcher = self.dispatcher();
        let on_select = Arc::new(on_select);
        let handler = Arc::new(move |index: usize| {
            let on_select = on_select.clone();
            dispatcher.post(move || on_select(index).into_result());
        });
        let r = self.backend.create_tabs(parent, labels, handler);
        self.track(r)
    }

    /// Renders a child view under `parent`, wiring its dependencies.
    pub fn render_child(&mut self, view: &AnyView, parent: WidgetHandle) -> Result<WidgetHandle, Error> {
        let node = self.build(view, Some(parent))?;
        let widget = *node.widget.get().expect("built node has a widget");
        if let Some(current) = &self.current {
            current.children.lock().push(node);
        }
        Ok(widget)
    }

    fn build(&mut self, view: &AnyView, parent: Option<WidgetHandle>) -> Result<Arc<NodeState>, Error> {
        let deps = view.dependencies();
        let node = Arc::new(NodeState {
            view: view.clone(),
            deps,
            widget: OnceLock::new(),
            alive: AtomicBool::new(false),
            subs: Mutex::new(Vec::new()),
            children: Mutex::new(Vec::new()),
        });
        // Subscribe before create so no commit between the initial peek
        // and the wiring is lost; updates are dropped until create finishes.
        for (i, dep) in node.deps.iter().enumerate() {
            let weak = Arc::downgrade(&node);
            let shared = self.shared.clone();
            let sub = dep.observe_value(move |value| {
                push_weak(
                    &shared,
                    Job::Update {
                        node: weak.clone(),
                        dep: i,
                        value,
                    },
                )
            });
            node.subs.lock().push(sub);
        }
        let mark = self.created.len();
        let saved = self.current.replace(node.clone());
        let result = view.create(self, parent);
        self.current = saved;
        match result {
            Ok(widget) => {
                let _ = node.widget.set(widget);
                node.alive.store(true, Ordering::SeqCst);
                Ok(node)
            }
            Err(e) => {
                self.unwind(mark, &node);
                Err(e)
            }
        }
    }

    fn unwind(&mut self, mark: usize, node: &Arc<NodeState>) {
        let shared = self.shared.upgrade();
        let mut nodes = Vec::new();
        node.walk(&mut nodes);
        for n in &nodes {
            for sub in n.subs.lock().drain(..) {
                sub.unobserve();
            }
        }
        for n in &nodes {
            if n.alive.swap(false, Ordering::SeqCst) {
                let widget = *n.widget.get().expect("live node has a widget");
                if let Err(e) = n.view.destroy(self.backend, widget) {
                    if let Some(s) = &shared {
                        s.report(&e);
                    }
                }
            }
        }
        for handle in self.created.drain(mark..).rev().collect::<Vec<_>>() {
            if self.backend.is_alive(handle) {
                if let Err(e) = self.backend.destroy_widget(handle) {
                    if let Some(s) = &shared {
                        s.report(&e.into());
                    }
                }
            }
        }
        self.windows.retain(|w| self.backend.is_alive(*w));
    }
}
