//! Event scripts: one command per line, `#` starts a comment.
//!
//! ```text
//! click <path>
//! select <path> <index>
//! commit <name> add1 | sub1 | set <int> | set-text "<text>"
//! expect-label <path> "<text>"
//! expect-log-count <OpKind> <int>
//! idle
//! ```
//!
//! A path walks the live widget tree from the root window. Integer segments
//! pick the n-th live child; kind segments (`window`, `panel`, `button`,
//! `label`, `tabs`) check the kind of the widget reached so far; a quoted
//! segment finds the first widget below (depth-first) labelled with that
//! text. `window/0/panel/1` is the second child of the panel that is the
//! window's first child.

use std::fmt;

use easel::backend::{quote, OpKind, WidgetKind};

use crate::demos::CommitOp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Kind(WidgetKind),
    Index(usize),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path(pub Vec<Segment>);

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            match seg {
                Segment::Kind(k) => f.write_str(k.name())?,
                Segment::Index(n) => write!(f, "{n}")?,
                Segment::Text(t) => f.write_str(&quote(t))?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Click(Path),
    Select(Path, usize),
    Commit { name: String, op: CommitOp },
    ExpectLabel(Path, String),
    ExpectLogCount(OpKind, usize),
    Idle,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Click(p) => write!(f, "click {p}"),
            Command::Select(p, i) => write!(f, "select {p} {i}"),
            Command::Commit { name, op } => write!(f, "commit {name} {op}"),
            Command::ExpectLabel(p, t) => write!(f, "expect-label {p} {}", quote(t)),
            Command::ExpectLogCount(k, n) => write!(f, "expect-log-count {} {n}", k.name()),
            Command::Idle => f.write_str("idle"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub number: usize,
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Script {
    pub lines: Vec<Line>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Word(String),
    Quoted(String),
}

fn tokenize(line: &str) -> Result<Vec<Token>, String> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '#' {
            break;
        } else if c == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some('n') => s.push('\n'),
                        Some(e @ ('"' | '\\')) => s.push(e),
                        Some(e) => return Err(format!("unknown escape \\{e}")),
                        None => return Err("unterminated string".into()),
                    },
                    Some(ch) => s.push(ch),
                }
            }
            out.push(Token::Quoted(s));
        } else {
            let mut w = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() {
                    break;
                }
                if ch == '"' {
                    // a quoted path segment glued to the rest of the word
                    chars.next();
                    w.push('"');
                    loop {
                        match chars.next() {
                            None => return Err("unterminated string".into()),
                            Some('\\') => match chars.next() {
                                Some(e) => {
                                    w.push('\\');
                                    w.push(e);
                                }
                                None => return Err("unterminated string".into()),
                            },
                            Some('"') => {
                                w.push('"');
                                break;
                            }
                            Some(ch) => w.push(ch),
                        }
                    }
                    continue;
                }
                w.push(ch);
                chars.next();
            }
            out.push(Token::Word(w));
        }
    }
    Ok(out)
}

fn unescape(s: &str) -> String {
    let mut out = String::new();
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some(e) => out.push(e),
                None => {}
            }
        } else {
            out.push(c);
        }
    }
    out
}

pub fn parse_path(s: &str) -> Result<Path, String> {
    if s.is_empty() {
        return Err("empty path".into());
    }
    let mut segs = Vec::new();
    let mut rest = s;
    loop {
        let (seg, tail) = if let Some(body) = rest.strip_prefix('"') {
            // find the closing quote, skipping escapes
            let mut end = None;
            let mut escaped = false;
            for (i, c) in body.char_indices() {
                match c {
                    _ if escaped => escaped = false,
                    '\\' => escaped = true,
                    '"' => {
                        end = Some(i);
                        break;
                    }
                    _ => {}
                }
            }
            let end = end.ok_or("unterminated string in path")?;
            let seg = Segment::Text(unescape(&body[..end]));
            (seg, &body[end + 1..])
        } else {
            let end = rest.find('/').unwrap_or(rest.len());
            let word = &rest[..end];
            let seg = if let Ok(n) = word.parse::<usize>() {
                Segment::Index(n)
            } else if let Some(k) = WidgetKind::from_name(word) {
                Segment::Kind(k)
            } else {
                return Err(format!("bad path segment {word:?}"));
            };
            (seg, &rest[end..])
        };
        segs.push(seg);
        if tail.is_empty() {
            break;
        }
        rest = tail.strip_prefix('/').ok_or_else(|| format!("expected '/' in path {s:?}"))?;
        if rest.is_empty() {
            return Err(format!("trailing '/' in path {s:?}"));
        }
    }
    Ok(Path(segs))
}

fn path_arg(tok: &Token) -> Result<Path, String> {
    match tok {
        Token::Word(w) => parse_path(w),
        Token::Quoted(t) => Ok(Path(vec![Segment::Text(t.clone())])),
    }
}

fn int_arg<T: std::str::FromStr>(tok: &Token, what: &str) -> Result<T, String> {
    match tok {
        Token::Word(w) => w.parse().map_err(|_| format!("expected {what}, found {w:?}")),
        Token::Quoted(q) => Err(format!("expected {what}, found \"{q}\"")),
    }
}

fn text_arg(tok: &Token) -> Result<String, String> {
    match tok {
        Token::Quoted(q) => Ok(q.clone()),
        Token::Word(w) => Err(format!("expected quoted text, found {w}")),
    }
}

fn parse_command(toks: &[Token]) -> Result<Command, String> {
    let Token::Word(head) = &toks[0] else {
        return Err("expected a command".into());
    };
    let args = &toks[1..];
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("{head} takes {n} argument(s), got {}", args.len()))
        }
    };
    match head.as_str() {
        "click" => {
            arity(1)?;
            Ok(Command::Click(path_arg(&args[0])?))
        }
        "select" => {
            arity(2)?;
            Ok(Command::Select(path_arg(&args[0])?, int_arg(&args[1], "an index")?))
        }
        "commit" => {
            if args.len() < 2 {
                return Err("commit takes a name and an operation".into());
            }
            let name = match &args[0] {
                Token::Word(w) => w.clone(),
                Token::Quoted(q) => q.clone(),
            };
            let op_args = &args[2..];
            let op = match &args[1] {
                Token::Word(w) if w == "add1" && op_args.is_empty() => CommitOp::Add1,
                Token::Word(w) if w == "sub1" && op_args.is_empty() => CommitOp::Sub1,
                Token::Word(w) if w == "set" && op_args.len() == 1 => {
                    CommitOp::Set(int_arg(&op_args[0], "an integer")?)
                }
                Token::Word(w) if w == "set-text" && op_args.len() == 1 => {
                    CommitOp::SetText(text_arg(&op_args[0])?)
                }
                _ => return Err("commit operation must be add1, sub1, set <int> or set-text \"<text>\"".into()),
            };
            Ok(Command::Commit { name, op })
        }
        "expect-label" => {
            arity(2)?;
            Ok(Command::ExpectLabel(path_arg(&args[0])?, text_arg(&args[1])?))
        }
        "expect-log-count" => {
            arity(2)?;
            let kind = match &args[0] {
                Token::Word(w) => OpKind::from_name(w).ok_or_else(|| format!("unknown op kind {w:?}"))?,
                Token::Quoted(q) => return Err(format!("unknown op kind \"{q}\"")),
            };
            Ok(Command::ExpectLogCount(kind, int_arg(&args[1], "a count")?))
        }
        "idle" => {
            arity(0)?;
            Ok(Command::Idle)
        }
        other => Err(format!("unknown command {other:?}")),
    }
}

impl Script {
    pub fn parse(src: &str) -> Result<Script, ParseError> {
        let mut lines = Vec::new();
        for (i, raw) in src.lines().enumerate() {
            let number = i + 1;
            let err = |msg: String| ParseError { line: number, msg };
            let toks = tokenize(raw).map_err(err)?;
            if toks.is_empty() {
                continue;
            }
            let command = parse_command(&toks).map_err(err)?;
            lines.push(Line { number, command });
        }
        Ok(Script { lines })
    }
}
