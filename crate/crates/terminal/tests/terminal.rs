use std::io::IsTerminal;

use easel::backend::{OpKind, WidgetKind};
use easel::views::{button, counter, tabs, text, vpanel, window, WindowSpec};
use easel::{AnyView, Observable, Renderer};
use easel_term::{run_interactive, Key, KeyOutcome, TerminalBackend, TerminalError};

fn counter_app(c: &Observable<i64>) -> AnyView {
    let model = c.clone();
    window(WindowSpec::new("Counter").child(counter(c, move |f| model.update(|n| f(*n)))))
}

#[test]
fn counter_layout() {
    let b = TerminalBackend::new();
    let r = Renderer::new(b.clone());
    let c = Observable::new(0);
    r.render(&counter_app(&c)).unwrap();
    let layout = b.layout();
    assert_eq!(layout.rows, ["= Counter =", "  [-] 0  [+]"]);
    assert_eq!(layout.focus, None);
    assert_eq!(layout.placed.len(), 5);
}

#[test]
fn keyboard_drives_the_counter() {
    let b = TerminalBackend::new();
    let r = Renderer::new(b.clone());
    let c = Observable::new(0);
    r.render(&counter_app(&c)).unwrap();
    // focus "+", press twice, then "-" once
    assert_eq!(b.handle_key(Key::Tab), KeyOutcome::Handled);
    assert_eq!(b.handle_key(Key::Tab), KeyOutcome::Handled);
    b.handle_key(Key::Enter);
    b.handle_key(Key::Space);
    r.run_until_idle();
    b.handle_key(Key::BackTab);
    b.handle_key(Key::Enter);
    r.run_until_idle();
    assert_eq!(c.peek(), 1);
    let layout = b.layout();
    assert_eq!(layout.rows[1], " >[-] 1  [+]");
    let label = layout.placed.iter().find(|p| p.kind == WidgetKind::Label).unwrap();
    assert_eq!(b.record(label.handle).unwrap().label.as_deref(), Some("1"));
}

#[test]
fn focus_wraps_both_ways() {
    let b = TerminalBackend::new();
    let r = Renderer::new(b.clone());
    r.render(&window(WindowSpec::new("w").child(vpanel([button("a", || ()), text("t"), button("b", || ())]))))
        .unwrap();
    let buttons: Vec<_> = b
        .layout()
        .placed
        .iter()
        .filter(|p| p.kind == WidgetKind::Button)
        .map(|p| p.handle)
        .collect();
    b.handle_key(Key::BackTab);
    assert_eq!(b.focus(), Some(buttons[1]));
    b.handle_key(Key::Tab);
    assert_eq!(b.focus(), Some(buttons[0]));
    b.handle_key(Key::BackTab);
    assert_eq!(b.focus(), Some(buttons[1]));
    assert_eq!(b.handle_key(Key::Quit), KeyOutcome::Quit);
}

#[test]
fn no_focusable_widgets() {
    let b = TerminalBackend::new();
    let r = Renderer::new(b.clone());
    r.render(&window(WindowSpec::new("w").child(text("only text")))).unwrap();
    assert_eq!(b.handle_key(Key::Tab), KeyOutcome::Ignored);
    assert_eq!(b.handle_key(Key::Enter), KeyOutcome::Ignored);
}

#[test]
fn tabs_switch_with_arrows() {
    let b = TerminalBackend::new();
    let r = Renderer::new(b.clone());
    let items = Observable::new(vec!["a".to_string(), "b".to_string()]);
    r.render(&window(WindowSpec::new("w").child(tabs(items, |sel| text(sel))))).unwrap();
    assert_eq!(b.layout().rows, ["= w =", "  |<a>| b |", "  a"]);
    b.handle_key(Key::Right);
    r.run_until_idle();
    assert_eq!(b.layout().rows, ["= w =", "  | a |<b>|", "  b"]);
    b.handle_key(Key::Left);
    r.run_until_idle();
    assert_eq!(b.layout().rows[2], "  a");
}

#[test]
fn hidden_and_dead_widgets_are_not_drawn() {
    let b = TerminalBackend::new();
    let r = Renderer::new(b.clone());
    let root = r.render(&window(WindowSpec::new("w").child(text("x")))).unwrap();
    let visible = b.layout();
    // every visible live widget exactly once
    let mut handles: Vec<_> = visible.placed.iter().map(|p| p.handle).collect();
    handles.dedup();
    assert_eq!(handles.len(), 2);
    root.request_close();
    r.run_until_idle();
    assert!(b.layout().rows.is_empty());
    root.teardown();
    assert!(b.layout().placed.is_empty());
    assert_eq!(
        b.call_log().iter().filter(|op| op.kind == OpKind::Destroy).count(),
        2
    );
}

#[test]
fn draw_writes_rows() {
    let b = TerminalBackend::new();
    let r = Renderer::new(b.clone());
    r.render(&window(WindowSpec::new("hello").child(text("there")))).unwrap();
    let mut out = Vec::new();
    b.draw(&mut out).unwrap();
    let s = String::from_utf8_lossy(&out);
    assert!(s.contains("= hello ="));
    assert!(s.contains("there"));
    assert!(b.take_dirty());
    assert!(!b.take_dirty());
}

#[test]
fn refuses_without_a_terminal() {
    if std::io::stdin().is_terminal() && std::io::stdout().is_terminal() {
        return;
    }
    let b = TerminalBackend::new();
    let r = Renderer::new(b.clone());
    let root = r.render(&window(WindowSpec::new("w"))).unwrap();
    assert!(matches!(
        run_interactive(&r, &root, &b),
        Err(TerminalError::TerminalUnavailable)
    ));
}
