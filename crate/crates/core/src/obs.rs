//! Observable values.
//!
//! An [`Observable`] is a shared cell holding a value and an ordered registry
//! of observers. Root observables are created with [`Observable::new`] and
//! changed with [`Observable::update`]; derived observables are created with
//! [`Observable::map`] and follow their source.
//!
//! Propagation is synchronous and depth-first: a commit notifies, in
//! registration order and on the committing thread, exactly the observers
//! that were registered when the new value was committed. Derived observables
//! recompute eagerly from inside that notification pass. There is no
//! equality gating and no topological scheduling, so two observables derived
//! from the same source may briefly disagree while a notification is in
//! flight. Once every notification has returned, each derived value equals
//! its mapper applied to its source's value.
//!
//! ```
//! use easel::obs::Observable;
//!
//! let count = Observable::new(0_i64);
//! let label = count.map(|n| n.to_string());
//! count.update(|n| n + 1).unwrap();
//! assert_eq!(label.peek(), "1");
//! assert!(label.update(|s| s.clone()).is_err());
//! ```

use std::any::Any;
use std::cell::{Cell, RefCell};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;

use parking_lot::{Mutex, ReentrantMutex, RwLock};

/// Boxed error used for failures raised by user-supplied functions.
pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

/// Default maximum nesting of notification passes on one thread.
pub const DEFAULT_PROPAGATION_DEPTH_LIMIT: usize = 1000;

static NEXT_OBS_ID: AtomicU64 = AtomicU64::new(1);
static NEXT_SUB_ID: AtomicU64 = AtomicU64::new(1);
static DEPTH_LIMIT: AtomicUsize = AtomicUsize::new(DEFAULT_PROPAGATION_DEPTH_LIMIT);

thread_local! {
    static DEPTH: Cell<usize> = const { Cell::new(0) };
    static HOOKS: RefCell<Vec<ErrorHook>> = const { RefCell::new(Vec::new()) };
}

#[derive(Debug, thiserror::Error)]
pub enum ObsError {
    #[error("derived observable {0} cannot be updated directly")]
    DerivedUpdate(ObsId),
    #[error("propagation depth limit of {limit} exceeded")]
    PropagationDepth { limit: usize },
    #[error("update function failed: {0}")]
    Update(#[source] BoxError),
    #[error("mapper failed: {0}")]
    Mapper(#[source] BoxError),
}

impl ObsError {
    /// A copy of this error. Errors raised by user functions are kept as
    /// their message.
    pub fn duplicate(&self) -> ObsError {
        match self {
            ObsError::DerivedUpdate(id) => ObsError::DerivedUpdate(*id),
            ObsError::PropagationDepth { limit } => ObsError::PropagationDepth { limit: *limit },
            ObsError::Update(e) => ObsError::Update(e.to_string().into()),
            ObsError::Mapper(e) => ObsError::Mapper(e.to_string().into()),
        }
    }
}

/// Receives errors raised while a notification pass is running, where there
/// is no caller to return them to.
pub type ErrorHook = Arc<dyn Fn(&ObsError) + Send + Sync>;

/// Runs `f` with `hook` installed as this thread's propagation error hook.
///
/// Hooks nest; the innermost one wins. Without a hook, errors are written to
/// standard error.
pub fn with_error_hook<R>(hook: ErrorHook, f: impl FnOnce() -> R) -> R {
    struct Pop;
    impl Drop for Pop {
        fn drop(&mut self) {
            HOOKS.with(|h| {
                h.borrow_mut().pop();
            });
        }
    }
    HOOKS.with(|h| h.borrow_mut().push(hook));
    let _pop = Pop;
    f()
}

pub(crate) fn report(err: &ObsError) {
    let hook = HOOKS.with(|h| h.borrow().last().cloned());
    match hook {
        Some(hook) => hook(err),
        None => eprintln!("easel: {err}"),
    }
}

/// Sets the process-wide limit on nested notification passes per thread.
pub fn set_propagation_depth_limit(limit: usize) {
    DEPTH_LIMIT.store(limit, Ordering::SeqCst);
}

pub fn propagation_depth_limit() -> usize {
    DEPTH_LIMIT.load(Ordering::SeqCst)
}

struct DepthGuard;

impl DepthGuard {
    fn enter() -> Result<Self, ObsError> {
        let depth = DEPTH.get();
        let limit = propagation_depth_limit();
        if depth >= limit {
            report(&ObsError::PropagationDepth { limit });
            return Err(ObsError::PropagationDepth { limit });
        }
        DEPTH.set(depth + 1);
        Ok(DepthGuard)
    }
}

impl Drop for DepthGuard {
    fn drop(&mut self) {
        DEPTH.set(DEPTH.get() - 1);
    }
}

/// Identity of an observable. Ids increase strictly in creation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObsId(u64);

impl ObsId {
    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for ObsId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObsKind {
    Root,
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubId(u64);

/// A type-erased committed value, as delivered to erased observers.
#[derive(Clone)]
pub struct Value(Arc<dyn Any + Send + Sync>);

impl Value {
    pub fn new<T: Any + Send + Sync>(value: T) -> Self {
        Value(Arc::new(value))
    }

    pub fn downcast_ref<T: Any>(&self) -> Option<&T> {
        self.0.downcast_ref()
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Value(..)")
    }
}

type Callback<T> = Arc<dyn Fn(&T) + Send + Sync>;
type Mapper<T, U> = Arc<dyn Fn(&T) -> Result<U, BoxError> + Send + Sync>;

struct Entry<T> {
    sub: SubId,
    active: Arc<AtomicBool>,
    callback: Callback<T>,
    // links feed derived observables and are not counted as observers
    link: bool,
}

struct Inner<T> {
    id: ObsId,
    kind: ObsKind,
    value: RwLock<T>,
    entries: Mutex<Vec<Entry<T>>>,
    // serializes commits so notification order matches commit order
    notify: ReentrantMutex<()>,
    upstream: Option<(Arc<dyn Node>, SubId)>,
}

impl<T> Drop for Inner<T> {
    fn drop(&mut self) {
        if let Some((source, sub)) = &self.upstream {
            source.unregister(*sub);
        }
    }
}

impl<T: Clone + Send + Sync + 'static> Inner<T> {
    fn new(kind: ObsKind, value: T, upstream: Option<(Arc<dyn Node>, SubId)>) -> Self {
        Inner {
            id: ObsId(NEXT_OBS_ID.fetch_add(1, Ordering::Relaxed)),
            kind,
            value: RwLock::new(value),
            entries: Mutex::new(Vec::new()),
            notify: ReentrantMutex::new(()),
            upstream,
        }
    }

    fn commit(&self, f: impl FnOnce(&T) -> Result<T, ObsError>) -> Result<T, ObsError> {
        let _serial = self.notify.lock();
        let _depth = DepthGuard::enter()?;
        let new = {
            let current = self.value.read_recursive();
            f(&current)?
        };
        let snapshot: Vec<(Arc<AtomicBool>, Callback<T>)> = {
            let mut value = self.value.write();
            *value = new.clone();
            self.entries
                .lock()
                .iter()
                .map(|e| (e.active.clone(), e.callback.clone()))
                .collect()
        };
        for (active, callback) in snapshot {
            if active.load(Ordering::Acquire) {
                callback(&new);
            }
        }
        Ok(new)
    }

    fn register(self: &Arc<Self>, callback: Callback<T>) -> Subscription {
        let sub = SubId(NEXT_SUB_ID.fetch_add(1, Ordering::Relaxed));
        let active = Arc::new(AtomicBool::new(true));
        self.entries.lock().push(Entry {
            sub,
            active: active.clone(),
            callback,
            link: false,
        });
        Subscription {
            id: sub,
            target: AnyObservable {
                node: self.clone(),
            },
            active,
        }
    }
}

trait Node: Send + Sync {
    fn id(&self) -> ObsId;
    fn kind(&self) -> ObsKind;
    fn unregister(&self, sub: SubId);
    fn observer_count(&self) -> usize;
    fn peek_value(&self) -> Value;
    fn observe_value(self: Arc<Self>, callback: Arc<dyn Fn(Value) + Send + Sync>) -> Subscription;
    fn into_any(self: Arc<Self>) -> Arc<dyn Any + Send + Sync>;
}

impl<T: Clone + Send + Sync + 'static> Node for Inner<T> {
    fn id(&self) -> ObsId {
        self.id
    }

    fn kind(&self) -> ObsKind {
        self.kind
    }

    fn unregister(&self, sub: SubId) {
        let mut entries = self.entries.lock();
        if let Some(pos) = entries.iter().position(|e| e.sub == sub) {
            let entry = entries.remove(pos);
            entry.active.store(false, Ordering::Release);
        }
    }

    fn observer_count(&self) -> usize {
        self.entries.lock().iter().filter(|e| !e.link).count()
    }

    fn peek_value(&self) -> Value {
        Value::new(self.value.read_recursive().clone())
    }

    fn observe_value(self: Arc<Self>, callback: Arc<dyn Fn(Value) + Send + Sync>) -> Subscription {
        self.register(Arc::new(move |v: &T| callback(Value::new(v.clone()))))
    }

    fn into_any(self: Arc<Self>) -> Arc<dyn Any + Send + Sync> {
        self
    }
}

/// A reactive cell. Cloning yields another handle to the same cell.
pub struct Observable<T> {
    inner: Arc<Inner<T>>,
}

impl<T> Clone for Observable<T> {
    fn clone(&self) -> Self {
        Observable {
            inner: self.inner.clone(),
        }
    }
}

impl<T> fmt::Debug for Observable<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("id", &self.inner.id)
            .field("kind", &self.inner.kind)
            .finish()
    }
}

impl<T: Clone + Send + Sync + 'static> Observable<T> {
    /// Creates a root observable holding `initial`.
    pub fn new(initial: T) -> Self {
        Observable {
            inner: Arc::new(Inner::new(ObsKind::Root, initial, None)),
        }
    }

    pub fn id(&self) -> ObsId {
        self.inner.id
    }

    pub fn kind(&self) -> ObsKind {
        self.inner.kind
    }

    pub fn is_derived(&self) -> bool {
        self.inner.kind == ObsKind::Derived
    }

    /// Returns a copy of the current value without subscribing.
    pub fn peek(&self) -> T {
        self.inner.value.read_recursive().clone()
    }

    /// Borrows the current value without subscribing.
    pub fn with<R>(&self, f: impl FnOnce(&T) -> R) -> R {
        f(&self.inner.value.read_recursive())
    }

    /// Replaces the value with `f(old)` and notifies the observers registered
    /// at the time of the commit. Returns the new value.
    pub fn update(&self, f: impl FnOnce(&T) -> T) -> Result<T, ObsError> {
        self.try_update(|v| Ok::<_, BoxError>(f(v)))
    }

    /// Like [`update`](Self::update), but `f` may fail, in which case the
    /// value is left unchanged and nobody is notified.
    pub fn try_update<E: Into<BoxError>>(
        &self,
        f: impl FnOnce(&T) -> Result<T, E>,
    ) -> Result<T, ObsError> {
        if self.is_derived() {
            return Err(ObsError::DerivedUpdate(self.id()));
        }
        self.inner
            .commit(|v| f(v).map_err(|e| ObsError::Update(e.into())))
    }

    pub fn set(&self, value: T) -> Result<T, ObsError> {
        self.update(move |_| value)
    }

    /// Derives a read-only observable whose value is `mapper` applied to this
    /// observable's value. The mapper runs now and on every commit.
    pub fn map<U, F>(&self, mapper: F) -> Observable<U>
    where
        U: Clone + Send + Sync + 'static,
        F: Fn(&T) -> U + Send + Sync + 'static,
    {
        self.derive(Arc::new(move |v: &T| Ok(mapper(v))))
            .expect("infallible mapper")
    }

    /// Like [`map`](Self::map) with a fallible mapper. A failure at creation
    /// is returned; a failure during propagation keeps the previous derived
    /// value, skips its observers and goes to the thread's error hook.
    pub fn try_map<U, E, F>(&self, mapper: F) -> Result<Observable<U>, ObsError>
    where
        U: Clone + Send + Sync + 'static,
        E: Into<BoxError>,
        F: Fn(&T) -> Result<U, E> + Send + Sync + 'static,
    {
        self.derive(Arc::new(move |v: &T| mapper(v).map_err(Into::into)))
    }

    fn derive<U: Clone + Send + Sync + 'static>(
        &self,
        mapper: Mapper<T, U>,
    ) -> Result<Observable<U>, ObsError> {
        // holding the serial lock keeps a commit from slipping between the
        // initial computation and the link registration
        let _serial = self.inner.notify.lock();
        let initial = {
            let current = self.inner.value.read_recursive();
            mapper(&current).map_err(ObsError::Mapper)?
        };
        let sub = SubId(NEXT_SUB_ID.fetch_add(1, Ordering::Relaxed));
        let source: Arc<dyn Node> = self.inner.clone();
        let derived = Arc::new(Inner::new(ObsKind::Derived, initial, Some((source, sub))));
        let weak = Arc::downgrade(&derived);
        let link: Callback<T> = Arc::new(move |v: &T| {
            let Some(derived) = weak.upgrade() else {
                return;
            };
            match mapper(v) {
                // depth failures are reported where they trip
                Ok(value) => drop(derived.commit(move |_| Ok(value))),
                Err(e) => report(&ObsError::Mapper(e)),
            }
        });
        self.inner.entries.lock().push(Entry {
            sub,
            active: Arc::new(AtomicBool::new(true)),
            callback: link,
            link: true,
        });
        Ok(Observable { inner: derived })
    }

    /// Registers `callback` for every value committed from now on. The
    /// current value is not delivered.
    pub fn observe(&self, callback: impl Fn(&T) + Send + Sync + 'static) -> Subscription {
        self.inner.register(Arc::new(callback))
    }

    /// Number of registered observers, not counting derived observables.
    pub fn observer_count(&self) -> usize {
        self.inner.observer_count()
    }

    pub fn erase(&self) -> AnyObservable {
        AnyObservable {
            node: self.inner.clone(),
        }
    }
}

/// A type-erased observable handle, compared and hashed by identity.
#[derive(Clone)]
pub struct AnyObservable {
    node: Arc<dyn Node>,
}

impl AnyObservable {
    pub fn id(&self) -> ObsId {
        self.node.id()
    }

    pub fn kind(&self) -> ObsKind {
        self.node.kind()
    }

    pub fn peek_value(&self) -> Value {
        self.node.peek_value()
    }

    /// Like [`Observable::observe`], delivering each value type-erased.
    pub fn observe_value(&self, callback: impl Fn(Value) + Send + Sync + 'static) -> Subscription {
        self.node.clone().observe_value(Arc::new(callback))
    }

    pub fn observer_count(&self) -> usize {
        self.node.observer_count()
    }

    pub fn downcast<T: Clone + Send + Sync + 'static>(&self) -> Option<Observable<T>> {
        self.node
            .clone()
            .into_any()
            .downcast::<Inner<T>>()
            .ok()
            .map(|inner| Observable { inner })
    }

    pub fn is<T: Clone + Send + Sync + 'static>(&self, other: &Observable<T>) -> bool {
        self.id() == other.id()
    }
}

impl PartialEq for AnyObservable {
    fn eq(&self, other: &Self) -> bool {
        self.id() == other.id()
    }
}

impl Eq for AnyObservable {}

impl Hash for AnyObservable {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id().hash(state);
    }
}

impl fmt::Debug for AnyObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnyObservable")
            .field("id", &self.id())
            .field("kind", &self.kind())
            .finish()
    }
}

impl<T: Clone + Send + Sync + 'static> From<Observable<T>> for AnyObservable {
    fn from(o: Observable<T>) -> Self {
        o.erase()
    }
}

impl<T: Clone + Send + Sync + 'static> From<&Observable<T>> for AnyObservable {
    fn from(o: &Observable<T>) -> Self {
        o.erase()
    }
}

/// A revocable observer registration.
#[derive(Clone)]
pub struct Subscription {
    id: SubId,
    target: AnyObservable,
    active: Arc<AtomicBool>,
}

impl Subscription {
    pub fn id(&self) -> SubId {
        self.id
    }

    pub fn target(&self) -> &AnyObservable {
        &self.target
    }

    pub fn is_active(&self) -> bool {
        self.active.load(Ordering::Acquire)
    }

    /// Revokes the registration. Idempotent.
    pub fn unobserve(&self) {
        if self.active.swap(false, Ordering::AcqRel) {
            self.target.node.unregister(self.id);
        }
    }
}

impl fmt::Debug for Subscription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subscription")
            .field("id", &self.id)
            .field("target", &self.target.id())
            .field("active", &self.is_active())
            .finish()
    }
}

/// Removes identity duplicates, keeping first occurrences in order.
pub fn dedup_by_identity(observables: impl IntoIterator<Item = AnyObservable>) -> Vec<AnyObservable> {
    let mut seen = std::collections::HashSet::new();
    observables
        .into_iter()
        .filter(|o| seen.insert(o.id()))
        .collect()
}
