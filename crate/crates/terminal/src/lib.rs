//! A character-cell backend for easel.
//!
//! [`TerminalBackend`] keeps the same retained widget tree and call log as
//! the headless backend and adds a focus cursor and a text layout.
//! [`run_interactive`] puts the terminal in raw mode, draws the tree after
//! every change and turns key presses into the same queued callbacks a
//! scripted click produces:
//!
//! * Tab / Shift-Tab move the focus between buttons and tab bars
//! * Enter or Space activates the focused button
//! * Left / Right switch tabs on a focused tab bar
//! * q or Esc asks the window to close

use std::io::{self, IsTerminal, Write};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use crossterm::event::{self, Event, KeyCode, KeyEventKind, KeyModifiers};
use crossterm::{cursor, execute, queue, terminal};
use easel::backend::{
    BackendError, BackendOp, ClickHandler, Orientation, Recorder, SelectHandler, WidgetKind,
    WidgetRecord,
};
use easel::{Backend, RenderRoot, Renderer, WidgetHandle};
use parking_lot::Mutex;

#[derive(Debug, thiserror::Error)]
pub enum TerminalError {
    #[error("no interactive terminal attached")]
    TerminalUnavailable,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Input the backend understands, independent of the terminal library.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Key {
    Tab,
    BackTab,
    Enter,
    Space,
    Left,
    Right,
    Quit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyOutcome {
    Handled,
    Ignored,
    /// The user asked to close the window.
    Quit,
}

/// One widget's place on screen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placed {
    pub handle: WidgetHandle,
    pub kind: WidgetKind,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScreenLayout {
    pub rows: Vec<String>,
    /// Every visible live widget, in drawing order.
    pub placed: Vec<Placed>,
    pub focus: Option<WidgetHandle>,
}

impl ScreenLayout {
    pub fn text(&self) -> String {
        let mut s = self.rows.join("\n");
        s.push('\n');
        s
    }
}

struct State {
    rec: Recorder,
    focus: Option<WidgetHandle>,
    dirty: bool,
}

/// The terminal backend. Clones share one widget tree.
#[derive(Clone)]
pub struct TerminalBackend {
    inner: Arc<Mutex<State>>,
}

impl Default for TerminalBackend {
    fn default() -> Self {
        Self::new()
    }
}

// A laid-out piece of screen: lines of text plus widget positions relative
// to its top-left corner.
struct Block {
    lines: Vec<String>,
    placed: Vec<Placed>,
}

impl Block {
    fn width(&self) -> usize {
        self.lines.iter().map(|l| l.chars().count()).max().unwrap_or(0)
    }

    fn leaf(handle: WidgetHandle, kind: WidgetKind, line: String) -> Block {
        Block {
            lines: vec![line],
            placed: vec![Placed { handle, kind, row: 0, col: 0 }],
        }
    }

    fn shift(mut self, row: usize, col: usize) -> Block {
        for p in &mut self.placed {
            p.row += row;
            p.col += col;
        }
        self
    }

    fn beside(blocks: Vec<Block>) -> Block {
        let height = blocks.iter().map(|b| b.lines.len()).max().unwrap_or(0);
        let mut lines = vec![String::new(); height];
        let mut placed = Vec::new();
        let mut col = 0;
        for (i, b) in blocks.into_iter().enumerate() {
            if i > 0 {
                col += 1;
                for l in &mut lines {
                    l.push(' ');
                }
            }
            let w = b.width();
            for (r, line) in lines.iter_mut().enumerate() {
                let part = b.lines.get(r).map(String::as_str).unwrap_or("");
                line.push_str(part);
                line.extend(std::iter::repeat_n(' ', w - part.chars().count()));
            }
            placed.extend(b.shift(0, col).placed);
            col += w;
        }
        for l in &mut lines {
            let trimmed = l.trim_end().len();
            l.truncate(trimmed);
        }
        Block { lines, placed }
    }

    fn stacked(blocks: Vec<Block>) -> Block {
        let mut lines = Vec::new();
        let mut placed = Vec::new();
        for b in blocks {
            let row = lines.len();
            placed.extend(Block { lines: Vec::new(), placed: b.placed }.shift(row, 0).placed);
            lines.extend(b.lines);
        }
        Block { lines, placed }
    }

    fn indented(self, by: usize) -> Block {
        let pad = " ".repeat(by);
        let lines = self
            .lines
            .into_iter()
            .map(|l| if l.is_empty() { l } else { format!("{pad}{l}") })
            .collect();
        Block { lines, placed: self.placed }.shift(0, by)
    }
}

impl TerminalBackend {
    pub fn new() -> Self {
        TerminalBackend {
            inner: Arc::new(Mutex::new(State {
                rec: Recorder::new(),
                focus: None,
                dirty: true,
            })),
        }
    }

    pub fn call_log(&self) -> Vec<BackendOp> {
        self.inner.lock().rec.log().to_vec()
    }

    pub fn dump_log(&self) -> String {
        self.inner.lock().rec.dump()
    }

    pub fn record(&self, widget: WidgetHandle) -> Option<WidgetRecord> {
        self.inner.lock().rec.record(widget).cloned()
    }

    pub fn live_children(&self, widget: WidgetHandle) -> Vec<WidgetHandle> {
        self.inner.lock().rec.live_children(widget)
    }

    pub fn with_recorder<R>(&self, f: impl FnOnce(&Recorder) -> R) -> R {
        f(&self.inner.lock().rec)
    }

    pub fn focus(&self) -> Option<WidgetHandle> {
        self.layout().focus
    }

    /// Moves the focus to `widget` if it is focusable and on screen.
    pub fn set_focus(&self, widget: WidgetHandle) -> bool {
        let targets = self.focusable();
        let mut st = self.inner.lock();
        if targets.contains(&widget) {
            st.focus = Some(widget);
            st.dirty = true;
            true
        } else {
            false
        }
    }

    /// True if something changed since the last call.
    pub fn take_dirty(&self) -> bool {
        std::mem::take(&mut self.inner.lock().dirty)
    }

    fn focusable(&self) -> Vec<WidgetHandle> {
        let st = self.inner.lock();
        let mut out = Vec::new();
        for p in Self::layout_of(&st.rec).placed {
            if matches!(p.kind, WidgetKind::Button | WidgetKind::Tabs) {
                out.push(p.handle);
            }
        }
        out
    }

    /// Applies one key press. Button activation goes through the button's
    /// handler exactly like a scripted click.
    pub fn handle_key(&self, key: Key) -> KeyOutcome {
        let targets = self.focusable();
        let current = self.inner.lock().focus.filter(|f| targets.contains(f));
        match key {
            Key::Quit => KeyOutcome::Quit,
            Key::Tab | Key::BackTab => {
                if targets.is_empty() {
                    return KeyOutcome::Ignored;
                }
                let n = targets.len();
                let next = match (current.and_then(|c| targets.iter().position(|t| *t == c)), key) {
                    (None, Key::Tab) => 0,
                    (None, _) => n - 1,
                    (Some(i), Key::Tab) => (i + 1) % n,
                    (Some(i), _) => (i + n - 1) % n,
                };
                let mut st = self.inner.lock();
                st.focus = Some(targets[next]);
                st.dirty = true;
                KeyOutcome::Handled
            }
            Key::Enter | Key::Space | Key::Left | Key::Right => {
                let Some(target) = current.or_else(|| targets.first().copied()) else {
                    return KeyOutcome::Ignored;
                };
                let kind = self.record(target).map(|r| r.kind);
                match (kind, key) {
                    (Some(WidgetKind::Button), Key::Enter | Key::Space) => {
                        let handler = self.inner.lock().rec.click(target);
                        match handler {
                            Ok(h) => {
                                h();
                                KeyOutcome::Handled
                            }
                            Err(_) => KeyOutcome::Ignored,
                        }
                    }
                    (Some(WidgetKind::Tabs), _) => {
                        let rec = self.record(target).expect("tabs record");
                        let n = rec.tabs.len();
                        if n == 0 {
                            return KeyOutcome::Ignored;
                        }
                        let index = match key {
                            Key::Left => (rec.selected + n - 1) % n,
                            _ => (rec.selected + 1) % n,
                        };
                        self.select(target, index).map_or(KeyOutcome::Ignored, |_| KeyOutcome::Handled)
                    }
                    _ => KeyOutcome::Ignored,
                }
            }
        }
    }

    /// Clicks a button, as a scripted event.
    pub fn simulate_click(&self, button: WidgetHandle) -> Result<(), BackendError> {
        let handler = self.inner.lock().rec.click(button)?;
        handler();
        Ok(())
    }

    pub fn select(&self, tabs: WidgetHandle, index: usize) -> Result<(), BackendError> {
        let handler = {
            let mut st = self.inner.lock();
            st.dirty = true;
            st.rec.select(tabs, index)?
        };
        handler(index);
        Ok(())
    }

    pub fn layout(&self) -> ScreenLayout {
        let st = self.inner.lock();
        let mut layout = Self::layout_of(&st.rec);
        let focus = st.focus.filter(|f| {
            layout
                .placed
                .iter()
                .any(|p| p.handle == *f && matches!(p.kind, WidgetKind::Button | WidgetKind::Tabs))
        });
        layout.focus = focus;
        if let Some(f) = focus {
            let p = layout.placed.iter().find(|p| p.handle == f).expect("focus is placed");
            // mark the focused widget in place
            let row: Vec<char> = layout.rows[p.row].chars().collect();
            let mut row = row;
            row[p.col] = '>';
            layout.rows[p.row] = row.into_iter().collect();
        }
        layout
    }

    fn layout_of(rec: &Recorder) -> ScreenLayout {
        let windows: Vec<&WidgetRecord> = rec
            .records()
            .filter(|r| r.kind == WidgetKind::Window && r.alive && r.visible)
            .collect();
        let mut blocks = Vec::new();
        for (i, w) in windows.into_iter().enumerate() {
            if i > 0 {
                blocks.push(Block { lines: vec![String::new()], placed: Vec::new() });
            }
            blocks.push(Self::block(rec, w));
        }
        let b = Block::stacked(blocks);
        ScreenLayout {
            rows: b.lines,
            placed: b.placed,
            focus: None,
        }
    }

    fn children(rec: &Recorder, r: &WidgetRecord) -> Vec<Block> {
        r.children
            .iter()
            .filter_map(|c| rec.record(*c))
            .filter(|c| c.alive)
            .map(|c| Self::block(rec, c))
            .collect()
    }

    fn block(rec: &Recorder, r: &WidgetRecord) -> Block {
        let label = r.label.clone().unwrap_or_default();
        match r.kind {
            WidgetKind::Label => Block::leaf(r.handle, r.kind, label),
            WidgetKind::Button => Block::leaf(r.handle, r.kind, format!(" [{label}]")),
            WidgetKind::Window => {
                let title = Block::leaf(r.handle, r.kind, format!("= {label} ="));
                let body = Block::stacked(Self::children(rec, r)).indented(1);
                Block::stacked(vec![title, body])
            }
            WidgetKind::Panel => {
                let kids = Self::children(rec, r);
                let body = match r.orientation {
                    Some(Orientation::Horizontal) => Block::beside(kids),
                    _ => Block::stacked(kids),
                };
                let mut placed = vec![Placed { handle: r.handle, kind: r.kind, row: 0, col: 0 }];
                placed.extend(body.placed);
                Block { lines: body.lines, placed }
            }
            WidgetKind::Tabs => {
                let bar: Vec<String> = r
                    .tabs
                    .iter()
                    .enumerate()
                    .map(|(i, t)| if i == r.selected { format!("<{t}>") } else { format!(" {t} ") })
                    .collect();
                let header = Block::leaf(r.handle, r.kind, format!(" |{}|", bar.join("|")));
                let body = Block::stacked(Self::children(rec, r)).indented(1);
                Block::stacked(vec![header, body])
            }
        }
    }

    /// Clears `out` and draws the current layout.
    pub fn draw<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let layout = self.layout();
        queue!(out, terminal::Clear(terminal::ClearType::All))?;
        for (i, row) in layout.rows.iter().enumerate() {
            queue!(out, cursor::MoveTo(0, i as u16), crossterm::style::Print(row))?;
        }
        let help = "tab: focus  enter/space: press  left/right: tabs  q: close";
        queue!(
            out,
            cursor::MoveTo(0, layout.rows.len() as u16 + 1),
            crossterm::style::Print(help)
        )?;
        out.flush()
    }

    fn mutate<R>(&self, f: impl FnOnce(&mut Recorder) -> R) -> R {
        let mut st = self.inner.lock();
        st.dirty = true;
        f(&mut st.rec)
    }
}

impl Backend for TerminalBackend {
    fn supports(&self, kind: WidgetKind) -> bool {
        self.inner.lock().rec.supports(kind)
    }

    fn create_window(&mut self, title: &str) -> Result<WidgetHandle, BackendError> {
        self.mutate(|r| r.create_window(title))
    }

    fn create_panel(&mut self, parent: WidgetHandle, orientation: Orientation) -> Result<WidgetHandle, BackendError> {
        self.mutate(|r| r.create_panel(parent, orientation))
    }

    fn create_button(
        &mut self,
        parent: WidgetHandle,
        label: &str,
        on_click: ClickHandler,
    ) -> Result<WidgetHandle, BackendError> {
        self.mutate(|r| r.create_button(parent, label, on_click))
    }

    fn create_label(&mut self, parent: WidgetHandle, text: &str) -> Result<WidgetHandle, BackendError> {
        self.mutate(|r| r.create_label(parent, text))
    }

    fn create_tabs(
        &mut self,
        parent: WidgetHandle,
        labels: &[String],
        on_select: SelectHandler,
    ) -> Result<WidgetHandle, BackendError> {
        self.mutate(|r| r.create_tabs(parent, labels, on_select))
    }

    fn set_label(&mut self, widget: WidgetHandle, text: &str) -> Result<(), BackendError> {
        self.mutate(|r| r.set_label(widget, text))
    }

    fn set_tabs(&mut self, widget: WidgetHandle, labels: &[String], selected: usize) -> Result<(), BackendError> {
        self.mutate(|r| r.set_tabs(widget, labels, selected))
    }

    fn show(&mut self, widget: WidgetHandle, visible: bool) -> Result<(), BackendError> {
        self.mutate(|r| r.show(widget, visible))
    }

    fn can_close(&mut self, window: WidgetHandle) -> Result<bool, BackendError> {
        self.mutate(|r| r.can_close(window))
    }

    fn on_close(&mut self, window: WidgetHandle) -> Result<(), BackendError> {
        self.mutate(|r| r.on_close(window))
    }

    fn destroy_widget(&mut self, widget: WidgetHandle) -> Result<(), BackendError> {
        self.mutate(|r| r.destroy_widget(widget))
    }

    fn is_alive(&self, widget: WidgetHandle) -> bool {
        self.inner.lock().rec.is_alive(widget)
    }

    fn is_visible(&self, widget: WidgetHandle) -> bool {
        self.inner.lock().rec.is_visible(widget)
    }
}

fn translate(ev: Event) -> Option<Key> {
    let Event::Key(k) = ev else { return None };
    if k.kind == KeyEventKind::Release {
        return None;
    }
    Some(match k.code {
        KeyCode::Tab => Key::Tab,
        KeyCode::BackTab => Key::BackTab,
        KeyCode::Enter => Key::Enter,
        KeyCode::Char(' ') => Key::Space,
        KeyCode::Left => Key::Left,
        KeyCode::Right => Key::Right,
        KeyCode::Char('q') | KeyCode::Esc => Key::Quit,
        KeyCode::Char('c') if k.modifiers.contains(KeyModifiers::CONTROL) => Key::Quit,
        _ => return None,
    })
}

struct RawMode;

impl RawMode {
    fn enter() -> io::Result<Self> {
        terminal::enable_raw_mode()?;
        execute!(io::stdout(), terminal::EnterAlternateScreen, cursor::Hide)?;
        Ok(RawMode)
    }
}

impl Drop for RawMode {
    fn drop(&mut self) {
        let _ = execute!(io::stdout(), cursor::Show, terminal::LeaveAlternateScreen);
        let _ = terminal::disable_raw_mode();
    }
}

/// Runs `root` interactively until its window is closed or torn down.
///
/// `renderer` must have been built over a clone of `backend`. Key input is
/// read on a separate thread; jobs and drawing run on this one.
pub fn run_interactive(renderer: &Renderer, root: &RenderRoot, backend: &TerminalBackend) -> Result<(), TerminalError> {
    if !io::stdin().is_terminal() || !io::stdout().is_terminal() {
        return Err(TerminalError::TerminalUnavailable);
    }
    let _raw = RawMode::enter()?;
    let stop = Arc::new(AtomicBool::new(false));
    let input = {
        let (stop, backend, root) = (stop.clone(), backend.clone(), root.clone());
        thread::spawn(move || -> io::Result<()> {
            while !stop.load(Ordering::SeqCst) {
                if !event::poll(Duration::from_millis(50))? {
                    continue;
                }
                if let Some(key) = translate(event::read()?) {
                    if backend.handle_key(key) == KeyOutcome::Quit {
                        root.request_close();
                    }
                }
            }
            Ok(())
        })
    };
    let mut out = io::stdout();
    let mut draw_error = None;
    renderer.run_with(root, || {
        if backend.take_dirty() && draw_error.is_none() {
            draw_error = backend.draw(&mut out).err();
        }
    });
    stop.store(true, Ordering::SeqCst);
    let read = input.join().unwrap_or(Ok(()));
    if let Some(e) = draw_error {
        return Err(e.into());
    }
    read?;
    Ok(())
}
