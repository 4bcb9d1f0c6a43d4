//! The imperative widget toolkit the views are rendered into.
//!
//! A [`Backend`] owns a retained tree of widgets. Widgets are built parent
//! first, mutated in place and destroyed explicitly. The [`Recorder`] holds
//! that tree together with an append-only log of every operation performed on
//! it; [`HeadlessBackend`] exposes a recorder behind a shareable handle and
//! lets tests feed it user events.

mod headless;
mod log;
mod recorder;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

pub use headless::HeadlessBackend;
pub use log::{quote, BackendOp, OpArg, OpKind};
pub use recorder::{Recorder, WidgetRecord};

static NEXT_BACKEND_TAG: AtomicU64 = AtomicU64::new(1);

/// Identifies one backend instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BackendTag(u64);

impl BackendTag {
    pub fn fresh() -> Self {
        BackendTag(NEXT_BACKEND_TAG.fetch_add(1, Ordering::Relaxed))
    }
}

/// An opaque reference to one widget of one backend instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WidgetHandle {
    id: u64,
    backend: BackendTag,
}

impl WidgetHandle {
    pub fn new(backend: BackendTag, id: u64) -> Self {
        WidgetHandle { id, backend }
    }

    pub fn id(self) -> u64 {
        self.id
    }

    pub fn backend(self) -> BackendTag {
        self.backend
    }
}

impl fmt::Display for WidgetHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WidgetKind {
    Window,
    Panel,
    Button,
    Label,
    Tabs,
}

impl WidgetKind {
    pub fn name(self) -> &'static str {
        match self {
            WidgetKind::Window => "window",
            WidgetKind::Panel => "panel",
            WidgetKind::Button => "button",
            WidgetKind::Label => "label",
            WidgetKind::Tabs => "tabs",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "window" => WidgetKind::Window,
            "panel" => WidgetKind::Panel,
            "button" => WidgetKind::Button,
            "label" => WidgetKind::Label,
            "tabs" => WidgetKind::Tabs,
            _ => return None,
        })
    }

    pub fn is_container(self) -> bool {
        matches!(self, WidgetKind::Window | WidgetKind::Panel | WidgetKind::Tabs)
    }
}

impl fmt::Display for WidgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

impl Orientation {
    pub fn name(self) -> &'static str {
        match self {
            Orientation::Horizontal => "horizontal",
            Orientation::Vertical => "vertical",
        }
    }
}

/// Invoked by the backend when a button is activated.
pub type ClickHandler = Arc<dyn Fn() + Send + Sync>;
/// Invoked by the backend when a tab is chosen, with the tab index.
pub type SelectHandler = Arc<dyn Fn(usize) + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("unknown widget {0}")]
    UnknownHandle(WidgetHandle),
    #[error("parent widget {0} has been destroyed")]
    DeadParent(WidgetHandle),
    #[error("widget {0} has been destroyed")]
    DeadWidget(WidgetHandle),
    #[error("widget {0} is not a container")]
    NotAContainer(WidgetHandle),
    #[error("widget {0} is not a button")]
    NotAButton(WidgetHandle),
    #[error("widget {0} is not a tab container")]
    NotTabs(WidgetHandle),
    #[error("widget {0} is not a window")]
    NotAWindow(WidgetHandle),
    #[error("widget {0} has no label")]
    Unlabeled(WidgetHandle),
    #[error("tab index {index} out of range for {widget} with {len} tabs")]
    TabOutOfRange {
        widget: WidgetHandle,
        index: usize,
        len: usize,
    },
    #[error("backend does not support {0} widgets")]
    Unsupported(WidgetKind),
}

/// A retained-mode widget toolkit.
///
/// Mutating calls are made from the event loop thread only. Handlers passed
/// at creation are stored and called by the backend when the user acts; they
/// must not be called from inside a backend method.
pub trait Backend: Send {
    fn supports(&self, kind: WidgetKind) -> bool;

    /// Creates a hidden top-level window.
    fn create_window(&mut self, title: &str) -> Result<WidgetHandle, BackendError>;

    fn create_panel(
        &mut self,
        parent: WidgetHandle,
        orientation: Orientation,
    ) -> Result<WidgetHandle, BackendError>;

    fn create_button(
        &mut self,
        parent: WidgetHandle,
        label: &str,
        on_click: ClickHandler,
    ) -> Result<WidgetHandle, BackendError>;

    fn create_label(&mut self, parent: WidgetHandle, text: &str)
        -> Result<WidgetHandle, BackendError>;

    fn create_tabs(
        &mut self,
        parent: WidgetHandle,
        labels: &[String],
        on_select: SelectHandler,
    ) -> Result<WidgetHandle, BackendError>;

    /// Sets the text of a label or button, or the title of a window.
    fn set_label(&mut self, widget: WidgetHandle, text: &str) -> Result<(), BackendError>;

    fn set_tabs(
        &mut self,
        widget: WidgetHandle,
        labels: &[String],
        selected: usize,
    ) -> Result<(), BackendError>;

    fn show(&mut self, widget: WidgetHandle, visible: bool) -> Result<(), BackendError>;

    /// Asks a window whether it agrees to close.
    fn can_close(&mut self, window: WidgetHandle) -> Result<bool, BackendError>;

    /// Tells a window it is closing.
    fn on_close(&mut self, window: WidgetHandle) -> Result<(), BackendError>;

    /// Destroys a widget and its subtree, children before parents.
    fn destroy_widget(&mut self, widget: WidgetHandle) -> Result<(), BackendError>;

    fn is_alive(&self, widget: WidgetHandle) -> bool;

    fn is_visible(&self, widget: WidgetHandle) -> bool;
}
