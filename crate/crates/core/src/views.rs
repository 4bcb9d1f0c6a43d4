//! Standard views.
//!
//! Views take their data as observables (or constants) and report user
//! intent through callbacks. None of them ever writes to an observable it
//! was given.

use std::collections::HashMap;
use std::fmt::Display;
use std::sync::Arc;

use parking_lot::Mutex;

use crate::backend::{Backend, Orientation, WidgetHandle};
use crate::obs::{AnyObservable, Observable, Value};
use crate::render::{BuildCx, WindowControls};
use crate::view::{lift_widget, Action, ActionResult, AnyView, Prop, View, WidgetSpec};
use crate::Error;

type Customizer = Arc<dyn Fn(WidgetHandle, WindowControls) + Send + Sync>;

/// Describes a top-level window.
#[derive(Clone)]
pub struct WindowSpec {
    title: Prop<String>,
    customizer: Option<Customizer>,
    children: Vec<AnyView>,
}

impl WindowSpec {
    pub fn new(title: impl Into<Prop<String>>) -> Self {
        WindowSpec {
            title: title.into(),
            customizer: None,
            children: Vec::new(),
        }
    }

    /// Sets a hook that runs once per rendered window, right after the
    /// window is created and before it is shown. It receives the window's
    /// handle and its [`WindowControls`].
    pub fn customize(mut self, f: impl Fn(WidgetHandle, WindowControls) + Send + Sync + 'static) -> Self {
        self.customizer = Some(Arc::new(f));
        self
    }

    pub fn child(mut self, view: AnyView) -> Self {
        self.children.push(view);
        self
    }

    pub fn children(mut self, views: impl IntoIterator<Item = AnyView>) -> Self {
        self.children.extend(views);
        self
    }
}

struct WindowView(WindowSpec);

impl View for WindowView {
    fn dependencies(&self) -> Vec<AnyObservable> {
        self.0.title.observable().into_iter().collect()
    }

    fn create(&self, cx: &mut BuildCx<'_>, parent: Option<WidgetHandle>) -> Result<WidgetHandle, Error> {
        if parent.is_some() {
            return Err(Error::NestedWindow);
        }
        let window = cx.create_window(&self.0.title.current())?;
        if let Some(customize) = &self.0.customizer {
            customize(window, cx.window_controls());
        }
        for child in &self.0.children {
            cx.render_child(child, window)?;
        }
        Ok(window)
    }

    fn update(
        &self,
        backend: &mut dyn Backend,
        widget: WidgetHandle,
        changed: &AnyObservable,
        value: &Value,
    ) -> Result<(), Error> {
        if self.0.title.follows(changed) {
            let title = value
                .downcast_ref::<String>()
                .ok_or(Error::ValueType(changed.id()))?;
            backend.set_label(widget, title)?;
        }
        Ok(())
    }
}

/// A top-level window. Children are stacked vertically.
pub fn window(spec: WindowSpec) -> AnyView {
    Arc::new(WindowView(spec))
}

struct PanelView {
    orientation: Orientation,
    children: Vec<AnyView>,
}

impl View for PanelView {
    fn dependencies(&self) -> Vec<AnyObservable> {
        Vec::new()
    }

    fn create(&self, cx: &mut BuildCx<'_>, parent: Option<WidgetHandle>) -> Result<WidgetHandle, Error> {
        let parent = parent.ok_or(Error::MissingParent("panel"))?;
        let panel = cx.create_panel(parent, self.orientation)?;
        for child in &self.children {
            cx.render_child(child, panel)?;
        }
        Ok(panel)
    }

    fn update(&self, _: &mut dyn Backend, _: WidgetHandle, _: &AnyObservable, _: &Value) -> Result<(), Error> {
        Ok(())
    }
}

pub fn hpanel(children: impl IntoIterator<Item = AnyView>) -> AnyView {
    Arc::new(PanelView {
        orientation: Orientation::Horizontal,
        children: children.into_iter().collect(),
    })
}

pub fn vpanel(children: impl IntoIterator<Item = AnyView>) -> AnyView {
    Arc::new(PanelView {
        orientation: Orientation::Vertical,
        children: children.into_iter().collect(),
    })
}

/// A push button. Clicks run `action` on the event loop.
pub fn button<R: ActionResult>(
    label: impl Into<Prop<String>>,
    action: impl Fn() -> R + Send + Sync + 'static,
) -> AnyView {
    lift_widget(WidgetSpec::Button {
        label: label.into(),
        action: Action::new(action),
    })
}

/// A text label.
pub fn text(content: impl Into<Prop<String>>) -> AnyView {
    lift_widget(WidgetSpec::Label {
        text: content.into(),
    })
}

struct TabState<I> {
    index: usize,
    current: Observable<I>,
}

type SelectedView<I> = dyn Fn(Observable<I>) -> AnyView + Send + Sync;

struct TabsView<I> {
    items: Observable<Vec<I>>,
    selected_view: Arc<SelectedView<I>>,
    state: Mutex<HashMap<WidgetHandle, Arc<Mutex<TabState<I>>>>>,
}

fn labels<I: Display>(items: &[I]) -> Vec<String> {
    items.iter().map(|i| i.to_string()).collect()
}

impl<I: Clone + Display + Send + Sync + 'static> View for TabsView<I> {
    fn dependencies(&self) -> Vec<AnyObservable> {
        vec![self.items.erase()]
    }

    fn create(&self, cx: &mut BuildCx<'_>, parent: Option<WidgetHandle>) -> Result<WidgetHandle, Error> {
        let parent = parent.ok_or(Error::MissingParent("tabs"))?;
        let list = self.items.peek();
        let first = list.first().ok_or(Error::EmptyItems)?.clone();
        let current = Observable::new(first);
        let child = (self.selected_view)(current.map(I::clone));
        let state = Arc::new(Mutex::new(TabState { index: 0, current }));

        let items = self.items.clone();
        let local = state.clone();
        let widget = cx.create_tabs(parent, &labels(&list), move |index| {
            let list = items.peek();
            let Some(item) = list.get(index) else { return Ok(()) };
            let current = {
                let mut st = local.lock();
                st.index = index;
                st.current.clone()
            };
            current.set(item.clone()).map(drop)
        })?;
        cx.render_child(&child, widget)?;
        self.state.lock().insert(widget, state);
        Ok(widget)
    }

    fn update(
        &self,
        backend: &mut dyn Backend,
        widget: WidgetHandle,
        changed: &AnyObservable,
        value: &Value,
    ) -> Result<(), Error> {
        let list = value
            .downcast_ref::<Vec<I>>()
            .ok_or(Error::ValueType(changed.id()))?;
        let Some(state) = self.state.lock().get(&widget).cloned() else { return Ok(()) };
        if list.is_empty() {
            // nothing to select: keep showing the last item
            state.lock().index = 0;
            backend.set_tabs(widget, &[], 0)?;
            return Ok(());
        }
        let (index, current) = {
            let mut st = state.lock();
            st.index = st.index.min(list.len() - 1);
            (st.index, st.current.clone())
        };
        backend.set_tabs(widget, &labels(list), index)?;
        current.set(list[index].clone())?;
        Ok(())
    }

    fn destroy(&self, _backend: &mut dyn Backend, widget: WidgetHandle) -> Result<(), Error> {
        self.state.lock().remove(&widget);
        Ok(())
    }
}

/// A tab container over `items`, one tab per item, labelled with the
/// item's `Display` form.
///
/// `selected_view` builds the content from a derived observable of the
/// selected item. Selection is local to each rendered widget and starts at
/// the first item; when the list shrinks the selection moves to the last
/// item. Rendering with an empty list fails with [`Error::EmptyItems`].
pub fn tabs<I, F>(items: Observable<Vec<I>>, selected_view: F) -> AnyView
where
    I: Clone + Display + Send + Sync + 'static,
    F: Fn(Observable<I>) -> AnyView + Send + Sync + 'static,
{
    Arc::new(TabsView {
        items,
        selected_view: Arc::new(selected_view),
        state: Mutex::new(HashMap::new()),
    })
}

pub fn add1(n: i64) -> i64 {
    n + 1
}

pub fn sub1(n: i64) -> i64 {
    n - 1
}

/// A reusable counter: a "-" button, the count and a "+" button.
///
/// The buttons hand [`sub1`] or [`add1`] to `action`; the counter never
/// changes `count` itself, so the caller decides what a click means.
pub fn counter<R: ActionResult>(
    count: &Observable<i64>,
    action: impl Fn(fn(i64) -> i64) -> R + Send + Sync + 'static,
) -> AnyView {
    let action = Arc::new(action);
    let minus = action.clone();
    hpanel([
        button("-", move || minus(sub1)),
        text(count.map(|n| n.to_string())),
        button("+", move || action(add1)),
    ])
}
