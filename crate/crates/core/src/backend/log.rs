use std::fmt;

use super::{Orientation, WidgetHandle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    CreateWindow,
    CreatePanel,
    CreateButton,
    CreateLabel,
    CreateTabs,
    SetLabel,
    SetTabs,
    Show,
    CanClose,
    OnClose,
    Destroy,
    InvokeCallback,
}

impl OpKind {
    pub const ALL: [OpKind; 12] = [
        OpKind::CreateWindow,
        OpKind::CreatePanel,
        OpKind::CreateButton,
        OpKind::CreateLabel,
        OpKind::CreateTabs,
        OpKind::SetLabel,
        OpKind::SetTabs,
        OpKind::Show,
        OpKind::CanClose,
        OpKind::OnClose,
        OpKind::Destroy,
        OpKind::InvokeCallback,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::CreateWindow => "CreateWindow",
            OpKind::CreatePanel => "CreatePanel",
            OpKind::CreateButton => "CreateButton",
            OpKind::CreateLabel => "CreateLabel",
            OpKind::CreateTabs => "CreateTabs",
            OpKind::SetLabel => "SetLabel",
            OpKind::SetTabs => "SetTabs",
            OpKind::Show => "Show",
            OpKind::CanClose => "CanClose",
            OpKind::OnClose => "OnClose",
            OpKind::Destroy => "Destroy",
            OpKind::InvokeCallback => "InvokeCallback",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        OpKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn is_create(self) -> bool {
        matches!(
            self,
            OpKind::CreateWindow
                | OpKind::CreatePanel
                | OpKind::CreateButton
                | OpKind::CreateLabel
                | OpKind::CreateTabs
        )
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpArg {
    Text(String),
    Parent(WidgetHandle),
    Orientation(Orientation),
    Flag(bool),
    Index(usize),
}

impl fmt::Display for OpArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpArg::Text(s) => f.write_str(&quote(s)),
            OpArg::Parent(h) => write!(f, "parent={h}"),
            OpArg::Orientation(o) => f.write_str(o.name()),
            OpArg::Flag(b) => write!(f, "{b}"),
            OpArg::Index(i) => write!(f, "{i}"),
        }
    }
}

/// One entry of a backend call log.
///
/// Renders as `seq kind target args...` with space-separated fields, `-` for
/// a missing target and text arguments quoted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendOp {
    pub seq: u64,
    pub kind: OpKind,
    pub target: Option<WidgetHandle>,
    pub args: Vec<OpArg>,
}

impl BackendOp {
    pub fn text(&self) -> Option<&str> {
        self.args.iter().find_map(|a| match a {
            OpArg::Text(s) => Some(s.as_str()),
            _ => None,
        })
    }
}

impl fmt::Display for BackendOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.seq, self.kind)?;
        match self.target {
            Some(h) => write!(f, " {h}")?,
            None => f.write_str(" -")?,
        }
        for arg in &self.args {
            write!(f, " {arg}")?;
        }
        Ok(())
    }
}

/// Double-quotes `s`, escaping backslash, quote and control characters.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => out.push_str(&format!("\\u{{{:x}}}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
