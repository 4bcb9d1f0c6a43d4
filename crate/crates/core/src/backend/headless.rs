use std::sync::Arc;

use parking_lot::Mutex;

use super::{
    Backend, BackendError, BackendOp, ClickHandler, Orientation, Recorder, SelectHandler,
    WidgetHandle, WidgetKind, WidgetRecord,
};

/// A deterministic, display-less backend.
///
/// Clones share one [`Recorder`]: hand one clone to the renderer and keep
/// another to simulate user input and inspect the call log from any thread.
#[derive(Clone, Debug, Default)]
pub struct HeadlessBackend {
    inner: Arc<Mutex<Recorder>>,
}

impl HeadlessBackend {
    pub fn new() -> Self {
        Self::default()
    }

    /// A headless backend that cannot create widgets of `kind`.
    pub fn without(kind: WidgetKind) -> Self {
        let backend = Self::new();
        backend.inner.lock().disable(kind);
        backend
    }

    /// Simulates a click. The button's handler runs after the click is
    /// logged; renderer-made handlers only enqueue the action.
    pub fn simulate_click(&self, button: WidgetHandle) -> Result<(), BackendError> {
        let handler = self.inner.lock().click(button)?;
        handler();
        Ok(())
    }

    pub fn simulate_select(&self, tabs: WidgetHandle, index: usize) -> Result<(), BackendError> {
        let handler = self.inner.lock().select(tabs, index)?;
        handler(index);
        Ok(())
    }

    /// A copy of the call log so far.
    pub fn call_log(&self) -> Vec<BackendOp> {
        self.inner.lock().log().to_vec()
    }

    pub fn op_count(&self) -> usize {
        self.inner.lock().log().len()
    }

    pub fn dump_log(&self) -> String {
        self.inner.lock().dump()
    }

    pub fn record(&self, widget: WidgetHandle) -> Option<WidgetRecord> {
        self.inner.lock().record(widget).cloned()
    }

    pub fn live_children(&self, widget: WidgetHandle) -> Vec<WidgetHandle> {
        self.inner.lock().live_children(widget)
    }

    pub fn set_can_close(&self, window: WidgetHandle, allowed: bool) -> Result<(), BackendError> {
        self.inner.lock().set_can_close(window, allowed)
    }

    pub fn with_recorder<R>(&self, f: impl FnOnce(&Recorder) -> R) -> R {
        f(&self.inner.lock())
    }
}

impl Backend for HeadlessBackend {
    fn supports(&self, kind: WidgetKind) -> bool {
        self.inner.lock().supports(kind)
    }

    fn create_window(&mut self, title: &str) -> Result<WidgetHandle, BackendError> {
        self.inner.lock().create_window(title)
    }

    fn create_panel(
        &mut self,
        parent: WidgetHandle,
        orientation: Orientation,
    ) -> Result<WidgetHandle, BackendError> {
        self.inner.lock().create_panel(parent, orientation)
    }

    fn create_button(
        &mut self,
        parent: WidgetHandle,
        label: &str,
        on_click: ClickHandler,
    ) -> Result<WidgetHandle, BackendError> {
        self.inner.lock().create_button(parent, label, on_click)
    }

    fn create_label(&mut self, parent: WidgetHandle, text: &str) -> Result<WidgetHandle, BackendError> {
        self.inner.lock().create_label(parent, text)
    }

    fn create_tabs(
        &mut self,
        parent: WidgetHandle,
        labels: &[String],
        on_select: SelectHandler,
    ) -> Result<WidgetHandle, BackendError> {
        self.inner.lock().create_tabs(parent, labels, on_select)
    }

    fn set_label(&mut self, widget: WidgetHandle, text: &str) -> Result<(), BackendError> {
        self.inner.lock().set_label(widget, text)
    }

    fn set_tabs(
        &mut self,
        widget: WidgetHandle,
        labels: &[String],
        selected: usize,
    ) -> Result<(), BackendError> {
        self.inner.lock().set_tabs(widget, labels, selected)
    }

    fn show(&mut self, widget: WidgetHandle, visible: bool) -> Result<(), BackendError> {
        self.inner.lock().show(widget, visible)
    }

    fn can_close(&mut self, window: WidgetHandle) -> Result<bool, BackendError> {
        self.inner.lock().can_close(window)
    }

    fn on_close(&mut self, window: WidgetHandle) -> Result<(), BackendError> {
        self.inner.lock().on_close(window)
    }

    fn destroy_widget(&mut self, widget: WidgetHandle) -> Result<(), BackendError> {
        self.inner.lock().destroy_widget(widget)
    }

    fn is_alive(&self, widget: WidgetHandle) -> bool {
        self.inner.lock().is_alive(widget)
    }

    fn is_visible(&self, widget: WidgetHandle) -> bool {
        self.inner.lock().is_visible(widget)
    }
}
