//! The view lifecycle.
//!
//! A [`View`] describes how to build a widget subtree, which observables it
//! depends on, how to apply a committed dependency value to a widget it
//! built, and how to release per-widget resources. The renderer owns the
//! lifecycle; application code only composes views and hands the result to
//! [`Renderer::render`](crate::Renderer::render).
//!
//! One view value may be rendered any number of times, at once. Anything a
//! view remembers about a rendered widget must therefore be keyed by that
//! widget's handle (or captured per `create` call), never stored once per
//! view.
//!
//! Custom views either implement [`View`] directly or wrap closures with
//! [`make_view`]:
//!
//! ```
//! use easel::backend::HeadlessBackend;
//! use easel::{make_view, Error, Observable, Renderer};
//! use easel::views::{window, WindowSpec};
//!
//! let label = Observable::new("Hello".to_string());
//! let source = label.clone();
//! let shouting = make_view(
//!     [label.erase()],
//!     move |cx, parent| {
//!         let parent = parent.ok_or(Error::MissingParent("shouting"))?;
//!         cx.create_label(parent, &source.peek().to_uppercase())
//!     },
//!     |backend, widget, _changed, value| {
//!         let text = value.downcast_ref::<String>().expect("string label");
//!         Ok(backend.set_label(widget, &text.to_uppercase())?)
//!     },
//!     |_backend, _widget| Ok(()),
//! );
//!
//! let backend = HeadlessBackend::new();
//! let renderer = Renderer::new(backend.clone());
//! let _root = renderer.render(&window(WindowSpec::new("w").child(shouting))).unwrap();
//! label.set("bye".into()).unwrap();
//! renderer.run_until_idle();
//! assert!(backend.dump_log().contains(r#"SetLabel #2 "BYE""#));
//! ```

use std::fmt;
use std::sync::Arc;

use crate::backend::{Backend, WidgetHandle, WidgetKind};
use crate::obs::{dedup_by_identity, AnyObservable, BoxError, Observable, Value};
use crate::render::BuildCx;
use crate::Error;

/// A widget-tree lifecycle descriptor.
pub trait View: Send + Sync {
    /// The observables this view displays. Sampled once per render.
    fn dependencies(&self) -> Vec<AnyObservable>;

    /// Builds the widget (and any children, through
    /// [`BuildCx::render_child`]) under `parent`, or as a top-level widget
    /// when `parent` is `None`.
    fn create(&self, cx: &mut BuildCx<'_>, parent: Option<WidgetHandle>) -> Result<WidgetHandle, Error>;

    /// Applies a value committed to `changed`, one of [`dependencies`](Self::dependencies).
    fn update(
        &self,
        backend: &mut dyn Backend,
        widget: WidgetHandle,
        changed: &AnyObservable,
        value: &Value,
    ) -> Result<(), Error>;

    /// Releases whatever the view keeps for `widget`. The renderer destroys
    /// the backend widgets afterwards.
    fn destroy(&self, _backend: &mut dyn Backend, _widget: WidgetHandle) -> Result<(), Error> {
        Ok(())
    }
}

pub type AnyView = Arc<dyn View>;

type CreateFn = dyn Fn(&mut BuildCx<'_>, Option<WidgetHandle>) -> Result<WidgetHandle, Error> + Send + Sync;
type UpdateFn =
    dyn Fn(&mut dyn Backend, WidgetHandle, &AnyObservable, &Value) -> Result<(), Error> + Send + Sync;
type DestroyFn = dyn Fn(&mut dyn Backend, WidgetHandle) -> Result<(), Error> + Send + Sync;

struct FnView {
    deps: Vec<AnyObservable>,
    create: Box<CreateFn>,
    update: Box<UpdateFn>,
    destroy: Box<DestroyFn>,
}

impl View for FnView {
    fn dependencies(&self) -> Vec<AnyObservable> {
        self.deps.clone()
    }

    fn create(&self, cx: &mut BuildCx<'_>, parent: Option<WidgetHandle>) -> Result<WidgetHandle, Error> {
        (self.create)(cx, parent)
    }

    fn update(
        &self,
        backend: &mut dyn Backend,
        widget: WidgetHandle,
        changed: &AnyObservable,
        value: &Value,
    ) -> Result<(), Error> {
        (self.update)(backend, widget, changed, value)
    }

    fn destroy(&self, backend: &mut dyn Backend, widget: WidgetHandle) -> Result<(), Error> {
        (self.destroy)(backend, widget)
    }
}

/// Builds a view from its lifecycle functions. Duplicate dependencies are
/// dropped.
pub fn make_view<C, U, D>(
    deps: impl IntoIterator<Item = AnyObservable>,
    create: C,
    update: U,
    destroy: D,
) -> AnyView
where
    C: Fn(&mut BuildCx<'_>, Option<WidgetHandle>) -> Result<WidgetHandle, Error> + Send + Sync + 'static,
    U: Fn(&mut dyn Backend, WidgetHandle, &AnyObservable, &Value) -> Result<(), Error>
        + Send
        + Sync
        + 'static,
    D: Fn(&mut dyn Backend, WidgetHandle) -> Result<(), Error> + Send + Sync + 'static,
{
    Arc::new(FnView {
        deps: dedup_by_identity(deps),
        create: Box::new(create),
        update: Box::new(update),
        destroy: Box::new(destroy),
    })
}

/// What an action callback may return.
pub trait ActionResult {
    fn into_result(self) -> Result<(), BoxError>;
}

impl ActionResult for () {
    fn into_result(self) -> Result<(), BoxError> {
        Ok(())
    }
}

impl<T, E: Into<BoxError>> ActionResult for Result<T, E> {
    fn into_result(self) -> Result<(), BoxError> {
        self.map(drop).map_err(Into::into)
    }
}

/// A user-intent callback. Actions run on the event loop and never see
/// backend handles.
#[derive(Clone)]
pub struct Action(Arc<dyn Fn() -> Result<(), BoxError> + Send + Sync>);

impl Action {
    pub fn new<R: ActionResult>(f: impl Fn() -> R + Send + Sync + 'static) -> Self {
        Action(Arc::new(move || f().into_result()))
    }

    pub fn invoke(&self) -> Result<(), BoxError> {
        (self.0)()
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Action(..)")
    }
}

/// A widget property: fixed, or following an observable.
pub enum Prop<T> {
    Const(T),
    Dynamic(Observable<T>),
}

impl<T: Clone> Clone for Prop<T> {
    fn clone(&self) -> Self {
        match self {
            Prop::Const(v) => Prop::Const(v.clone()),
            Prop::Dynamic(o) => Prop::Dynamic(o.clone()),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Prop<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prop::Const(v) => f.debug_tuple("Const").field(v).finish(),
            Prop::Dynamic(o) => f.debug_tuple("Dynamic").field(o).finish(),
        }
    }
}

impl<T: Clone + Send + Sync + 'static> Prop<T> {
    /// The value to show now: the constant, or a peek at the observable.
    pub fn current(&self) -> T {
        match self {
            Prop::Const(v) => v.clone(),
            Prop::Dynamic(o) => o.peek(),
        }
    }

    pub fn observable(&self) -> Option<AnyObservable> {
        match self {
            Prop::Const(_) => None,
            Prop::Dynamic(o) => Some(o.erase()),
        }
    }

    pub fn follows(&self, changed: &AnyObservable) -> bool {
        matches!(self, Prop::Dynamic(o) if o.id() == changed.id())
    }
}

impl From<&str> for Prop<String> {
    fn from(s: &str) -> Self {
        Prop::Const(s.to_string())
    }
}

impl From<String> for Prop<String> {
    fn from(s: String) -> Self {
        Prop::Const(s)
    }
}

impl<T> From<Observable<T>> for Prop<T> {
    fn from(o: Observable<T>) -> Self {
        Prop::Dynamic(o)
    }
}

impl<T> From<&Observable<T>> for Prop<T> {
    fn from(o: &Observable<T>) -> Self {
        Prop::Dynamic(o.clone())
    }
}

/// Describes a single backend widget for [`lift_widget`].
#[derive(Debug, Clone)]
pub enum WidgetSpec {
    Label { text: Prop<String> },
    Button { label: Prop<String>, action: Action },
}

impl WidgetSpec {
    pub fn kind(&self) -> WidgetKind {
        match self {
            WidgetSpec::Label { .. } => WidgetKind::Label,
            WidgetSpec::Button { .. } => WidgetKind::Button,
        }
    }

    fn text(&self) -> &Prop<String> {
        match self {
            WidgetSpec::Label { text } => text,
            WidgetSpec::Button { label, .. } => label,
        }
    }
}

struct Lifted(WidgetSpec);

impl View for Lifted {
    fn dependencies(&self) -> Vec<AnyObservable> {
        self.0.text().observable().into_iter().collect()
    }

    fn create(&self, cx: &mut BuildCx<'_>, parent: Option<WidgetHandle>) -> Result<WidgetHandle, Error> {
        let kind = self.0.kind();
        if !cx.backend().supports(kind) {
            return Err(crate::backend::BackendError::Unsupported(kind).into());
        }
        let parent = parent.ok_or(Error::MissingParent(kind.name()))?;
        match &self.0 {
            WidgetSpec::Label { text } => cx.create_label(parent, &text.current()),
            WidgetSpec::Button { label, action } => {
                cx.create_button(parent, &label.current(), action.clone())
            }
        }
    }

    fn update(
        &self,
        backend: &mut dyn Backend,
        widget: WidgetHandle,
        changed: &AnyObservable,
        value: &Value,
    ) -> Result<(), Error> {
        if !self.0.text().follows(changed) {
            return Ok(());
        }
        let text = value
            .downcast_ref::<String>()
            .ok_or(Error::ValueType(changed.id()))?;
        backend.set_label(widget, text)?;
        Ok(())
    }
}

/// Wraps one backend widget as a view. Observable properties become
/// dependencies; constants do not.
pub fn lift_widget(spec: WidgetSpec) -> AnyView {
    Arc::new(Lifted(spec))
}
