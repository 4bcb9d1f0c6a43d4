use std::collections::HashSet;
use std::fmt;

use super::{
    Backend, BackendError, BackendOp, BackendTag, ClickHandler, OpArg, OpKind, Orientation,
    SelectHandler, WidgetHandle, WidgetKind,
};

/// Snapshot of one widget's retained state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WidgetRecord {
    pub handle: WidgetHandle,
    pub kind: WidgetKind,
    pub parent: Option<WidgetHandle>,
    pub orientation: Option<Orientation>,
    pub label: Option<String>,
    pub tabs: Vec<String>,
    pub selected: usize,
    pub visible: bool,
    pub alive: bool,
    /// Children in creation order, including destroyed ones.
    pub children: Vec<WidgetHandle>,
    pub can_close: bool,
}

struct Slot {
    record: WidgetRecord,
    on_click: Option<ClickHandler>,
    on_select: Option<SelectHandler>,
}

/// A widget tree plus a log of every operation applied to it.
///
/// Handles are consecutive integers starting at 1 in creation order, so two
/// runs of the same program against fresh recorders produce identical logs.
pub struct Recorder {
    tag: BackendTag,
    slots: Vec<Slot>,
    log: Vec<BackendOp>,
    unsupported: HashSet<WidgetKind>,
}

impl Default for Recorder {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for Recorder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Recorder")
            .field("tag", &self.tag)
            .field("widgets", &self.slots.len())
            .field("ops", &self.log.len())
            .finish()
    }
}

impl Recorder {
    pub fn new() -> Self {
        Recorder {
            tag: BackendTag::fresh(),
            slots: Vec::new(),
            log: Vec::new(),
            unsupported: HashSet::new(),
        }
    }

    pub fn tag(&self) -> BackendTag {
        self.tag
    }

    /// Makes creation of `kind` fail with [`BackendError::Unsupported`].
    pub fn disable(&mut self, kind: WidgetKind) {
        self.unsupported.insert(kind);
    }

    pub fn log(&self) -> &[BackendOp] {
        &self.log
    }

    pub fn record(&self, widget: WidgetHandle) -> Option<&WidgetRecord> {
        self.slot(widget).ok().map(|s| &s.record)
    }

    pub fn records(&self) -> impl Iterator<Item = &WidgetRecord> {
        self.slots.iter().map(|s| &s.record)
    }

    /// Children of `widget` that are still alive, in creation order.
    pub fn live_children(&self, widget: WidgetHandle) -> Vec<WidgetHandle> {
        self.record(widget)
            .map(|r| {
                r.children
                    .iter()
                    .copied()
                    .filter(|c| self.is_alive(*c))
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn set_can_close(&mut self, window: WidgetHandle, allowed: bool) -> Result<(), BackendError> {
        self.live_mut(window)?.record.can_close = allowed;
        Ok(())
    }

    /// Records a button activation and hands back its handler. The caller
    /// invokes the handler after releasing any lock on the recorder.
    pub fn click(&mut self, button: WidgetHandle) -> Result<ClickHandler, BackendError> {
        let slot = self.live(button)?;
        if slot.record.kind != WidgetKind::Button {
            return Err(BackendError::NotAButton(button));
        }
        let handler = slot.on_click.clone().expect("buttons carry a handler");
        self.push(OpKind::InvokeCallback, Some(button), vec![]);
        Ok(handler)
    }

    /// Records a tab choice, moves the selection and hands back the handler.
    pub fn select(&mut self, tabs: WidgetHandle, index: usize) -> Result<SelectHandler, BackendError> {
        let slot = self.live_mut(tabs)?;
        if slot.record.kind != WidgetKind::Tabs {
            return Err(BackendError::NotTabs(tabs));
        }
        let len = slot.record.tabs.len();
        if index >= len {
            return Err(BackendError::TabOutOfRange {
                widget: tabs,
                index,
                len,
            });
        }
        slot.record.selected = index;
        let handler = slot.on_select.clone().expect("tabs carry a handler");
        self.push(OpKind::InvokeCallback, Some(tabs), vec![OpArg::Index(index)]);
        Ok(handler)
    }

    /// Renders the log, one op per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for op in &self.log {
            out.push_str(&op.to_string());
            out.push('\n');
        }
        out
    }

    fn push(&mut self, kind: OpKind, target: Option<WidgetHandle>, args: Vec<OpArg>) {
        let seq = self.log.len() as u64 + 1;
        self.log.push(BackendOp {
            seq,
            kind,
            target,
            args,
        });
    }

    fn index(&self, widget: WidgetHandle) -> Result<usize, BackendError> {
        if widget.backend() != self.tag || widget.id() == 0 || widget.id() as usize > self.slots.len() {
            return Err(BackendError::UnknownHandle(widget));
        }
        Ok(widget.id() as usize - 1)
    }

    fn slot(&self, widget: WidgetHandle) -> Result<&Slot, BackendError> {
        Ok(&self.slots[self.index(widget)?])
    }

    fn live(&self, widget: WidgetHandle) -> Result<&Slot, BackendError> {
        let slot = self.slot(widget)?;
        if !slot.record.alive {
            return Err(BackendError::DeadWidget(widget));
        }
        Ok(slot)
    }

    fn live_mut(&mut self, widget: WidgetHandle) -> Result<&mut Slot, BackendError> {
        let i = self.index(widget)?;
        let slot = &mut self.slots[i];
        if !slot.record.alive {
            return Err(BackendError::DeadWidget(widget));
        }
        Ok(slot)
    }

    fn check_parent(&self, parent: WidgetHandle) -> Result<(), BackendError> {
        let slot = self.slot(parent)?;
        if !slot.record.alive {
            return Err(BackendError::DeadParent(parent));
        }
        if !slot.record.kind.is_container() {
            return Err(BackendError::NotAContainer(parent));
        }
        Ok(())
    }

    fn check_supported(&self, kind: WidgetKind) -> Result<(), BackendError> {
        if self.unsupported.contains(&kind) {
            return Err(BackendError::Unsupported(kind));
        }
        Ok(())
    }

    fn insert(
        &mut self,
        kind: WidgetKind,
        parent: Option<WidgetHandle>,
        configure: impl FnOnce(&mut Slot),
    ) -> WidgetHandle {
        let handle = WidgetHandle::new(self.tag, self.slots.len() as u64 + 1);
        let mut slot = Slot {
            record: WidgetRecord {
                handle,
                kind,
                parent,
                orientation: None,
                label: None,
                tabs: Vec::new(),
                selected: 0,
                // only windows start hidden
                visible: kind != WidgetKind::Window,
                alive: true,
                children: Vec::new(),
                can_close: true,
            },
            on_click: None,
            on_select: None,
        };
        configure(&mut slot);
        self.slots.push(slot);
        if let Some(parent) = parent {
            let i = parent.id() as usize - 1;
            self.slots[i].record.children.push(handle);
        }
        handle
    }

    fn destroy_subtree(&mut self, widget: WidgetHandle) {
        let i = widget.id() as usize - 1;
        let children = self.slots[i].record.children.clone();
        for child in children {
            if self.is_alive(child) {
                self.destroy_subtree(child);
            }
        }
        let slot = &mut self.slots[i];
        slot.record.alive = false;
        slot.on_click = None;
        slot.on_select = None;
        self.push(OpKind::Destroy, Some(widget), vec![]);
    }
}

impl Backend for Recorder {
    fn supports(&self, kind: WidgetKind) -> bool {
        !self.unsupported.contains(&kind)
    }

    fn create_window(&mut self, title: &str) -> Result<WidgetHandle, BackendError> {
        self.check_supported(WidgetKind::Window)?;
        let h = self.insert(WidgetKind::Window, None, |s| {
            s.record.label = Some(title.to_string())
        });
        self.push(OpKind::CreateWindow, Some(h), vec![OpArg::Text(title.to_string())]);
        Ok(h)
    }

    fn create_panel(
        &mut self,
        parent: WidgetHandle,
        orientation: Orientation,
    ) -> Result<WidgetHandle, BackendError> {
        self.check_supported(WidgetKind::Panel)?;
        self.check_parent(parent)?;
        let h = self.insert(WidgetKind::Panel, Some(parent), |s| {
            s.record.orientation = Some(orientation)
        });
        self.push(
            OpKind::CreatePanel,
            Some(h),
            vec![OpArg::Parent(parent), OpArg::Orientation(orientation)],
        );
        Ok(h)
    }

    fn create_button(
        &mut self,
        parent: WidgetHandle,
        label: &str,
        on_click: ClickHandler,
    ) -> Result<WidgetHandle, BackendError> {
        self.check_supported(WidgetKind::Button)?;
        self.check_parent(parent)?;
        let h = self.insert(WidgetKind::Button, Some(parent), |s| {
            s.record.label = Some(label.to_string());
            s.on_click = Some(on_click);
        });
        self.push(
            OpKind::CreateButton,
            Some(h),
            vec![OpArg::Parent(parent), OpArg::Text(label.to_string())],
        );
        Ok(h)
    }

    fn create_label(&mut self, parent: WidgetHandle, text: &str) -> Result<WidgetHandle, BackendError> {
        self.check_supported(WidgetKind::Label)?;
        self.check_parent(parent)?;
        let h = self.insert(WidgetKind::Label, Some(parent), |s| {
            s.record.label = Some(text.to_string())
        });
        self.push(
            OpKind::CreateLabel,
            Some(h),
            vec![OpArg::Parent(parent), OpArg::Text(text.to_string())],
        );
        Ok(h)
    }

    fn create_tabs(
        &mut self,
        parent: WidgetHandle,
        labels: &[String],
        on_select: SelectHandler,
    ) -> Result<WidgetHandle, BackendError> {
        self.check_supported(WidgetKind::Tabs)?;
        self.check_parent(parent)?;
        let h = self.insert(WidgetKind::Tabs, Some(parent), |s| {
            s.record.tabs = labels.to_vec();
            s.on_select = Some(on_select);
        });
        let mut args = vec![OpArg::Parent(parent)];
        args.extend(labels.iter().cloned().map(OpArg::Text));
        self.push(OpKind::CreateTabs, Some(h), args);
        Ok(h)
    }

    fn set_label(&mut self, widget: WidgetHandle, text: &str) -> Result<(), BackendError> {
        let slot = self.live_mut(widget)?;
        match slot.record.kind {
            WidgetKind::Window | WidgetKind::Button | WidgetKind::Label => {}
            _ => return Err(BackendError::Unlabeled(widget)),
        }
        slot.record.label = Some(text.to_string());
        self.push(OpKind::SetLabel, Some(widget), vec![OpArg::Text(text.to_string())]);
        Ok(())
    }

    fn set_tabs(
        &mut self,
        widget: WidgetHandle,
        labels: &[String],
        selected: usize,
    ) -> Result<(), BackendError> {
        let slot = self.live_mut(widget)?;
        if slot.record.kind != WidgetKind::Tabs {
            return Err(BackendError::NotTabs(widget));
        }
        slot.record.tabs = labels.to_vec();
        slot.record.selected = selected;
        let mut args = vec![OpArg::Index(selected)];
        args.extend(labels.iter().cloned().map(OpArg::Text));
        self.push(OpKind::SetTabs, Some(widget), args);
        Ok(())
    }

    fn show(&mut self, widget: WidgetHandle, visible: bool) -> Result<(), BackendError> {
        self.live_mut(widget)?.record.visible = visible;
        self.push(OpKind::Show, Some(widget), vec![OpArg::Flag(visible)]);
        Ok(())
    }

    fn can_close(&mut self, window: WidgetHandle) -> Result<bool, BackendError> {
        let slot = self.live(window)?;
        if slot.record.kind != WidgetKind::Window {
            return Err(BackendError::NotAWindow(window));
        }
        let allowed = slot.record.can_close;
        self.push(OpKind::CanClose, Some(window), vec![OpArg::Flag(allowed)]);
        Ok(allowed)
    }

    fn on_close(&mut self, window: WidgetHandle) -> Result<(), BackendError> {
        let slot = self.live(window)?;
        if slot.record.kind != WidgetKind::Window {
            return Err(BackendError::NotAWindow(window));
        }
        self.push(OpKind::OnClose, Some(window), vec![]);
        Ok(())
    }

    fn destroy_widget(&mut self, widget: WidgetHandle) -> Result<(), BackendError> {
        self.live(widget)?;
        self.destroy_subtree(widget);
        Ok(())
    }

    fn is_alive(&self, widget: WidgetHandle) -> bool {
        self.slot(widget).map(|s| s.record.alive).unwrap_or(false)
    }

    fn is_visible(&self, widget: WidgetHandle) -> bool {
        self.slot(widget)
            .map(|s| s.record.alive && s.record.visible)
            .unwrap_or(false)
    }
}
