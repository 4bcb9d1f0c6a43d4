//! Integer formulas over named variables: `+`, `-`, `*`, parentheses,
//! literals and identifiers. `*` binds tighter than `+` and `-`; all three
//! are left-associative. A leading `-` negates.

use std::iter::Peekable;
use std::str::CharIndices;

/// Variable bindings, in the order they were defined.
pub type Env = Vec<(String, i64)>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("arithmetic overflow")]
    Overflow,
}

pub fn lookup(env: &[(String, i64)], name: &str) -> Option<i64> {
    env.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
}

/// Evaluates `expr` against `env`.
pub fn eval_formula(expr: &str, env: &[(String, i64)]) -> Result<i64, FormulaError> {
    let mut p = Parser {
        chars: expr.char_indices().peekable(),
        len: expr.len(),
        env,
    };
    let v = p.expr()?;
    p.skip_ws();
    match p.chars.peek() {
        None => Ok(v),
        Some(&(pos, c)) => Err(parse_err(pos, format!("unexpected {c:?}"))),
    }
}

/// The variables `expr` mentions, in order of first appearance.
pub fn variables(expr: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut cur = String::new();
    for c in expr.chars().chain(std::iter::once(' ')) {
        if c.is_ascii_alphanumeric() || c == '_' {
            cur.push(c);
        } else if !cur.is_empty() {
            let word = std::mem::take(&mut cur);
            let is_ident = word.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_');
            if is_ident && !out.contains(&word) {
                out.push(word);
            }
        }
    }
    out
}

fn parse_err(pos: usize, msg: impl Into<String>) -> FormulaError {
    FormulaError::Parse { pos, msg: msg.into() }
}

struct Parser<'a> {
    chars: Peekable<CharIndices<'a>>,
    len: usize,
    env: &'a [(String, i64)],
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.chars.next_if(|(_, c)| c.is_whitespace()).is_some() {}
    }

    fn peek(&mut self) -> Option<(usize, char)> {
        self.skip_ws();
        self.chars.peek().copied()
    }

    fn expr(&mut self) -> Result<i64, FormulaError> {
        let mut acc = self.term()?;
        while let Some((_, op @ ('+' | '-'))) = self.peek() {
            self.chars.next();
            let rhs = self.term()?;
            acc = if op == '+' { acc.checked_add(rhs) } else { acc.checked_sub(rhs) }
                .ok_or(FormulaError::Overflow)?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<i64, FormulaError> {
        let mut acc = self.unary()?;
        while let Some((_, '*')) = self.peek() {
            self.chars.next();
            let rhs = self.unary()?;
            acc = acc.checked_mul(rhs).ok_or(FormulaError::Overflow)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<i64, FormulaError> {
        if let Some((_, '-')) = self.peek() {
            self.chars.next();
            return self.unary()?.checked_neg().ok_or(FormulaError::Overflow);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<i64, FormulaError> {
        let Some((pos, c)) = self.peek() else {
            return Err(parse_err(self.len, "unexpected end of formula"));
        };
        if c == '(' {
            self.chars.next();
            let v = self.expr()?;
            return match self.peek() {
                Some((_, ')')) => {
                    self.chars.next();
                    Ok(v)
                }
                Some((p, c)) => Err(parse_err(p, format!("expected ')', found {c:?}"))),
                None => Err(parse_err(self.len, "expected ')'")),
            };
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some((_, d)) = self.chars.next_if(|(_, d)| d.is_ascii_digit()) {
                s.push(d);
            }
            return s.parse().map_err(|_| FormulaError::Overflow);
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut name = String::new();
            while let Some((_, d)) = self.chars.next_if(|(_, d)| d.is_ascii_alphanumeric() || *d == '_') {
                name.push(d);
            }
            return lookup(self.env, &name).ok_or(FormulaError::UnboundVariable(name));
        }
        Err(parse_err(pos, format!("unexpected {c:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, i64)]) -> Env {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn basics() {
        assert_eq!(eval_formula("2*L+1", &env(&[("L", 3)])), Ok(7));
        assert_eq!(eval_formula("5", &[]), Ok(5));
        assert_eq!(
            eval_formula("H", &[]),
            Err(FormulaError::UnboundVariable("H".into()))
        );
        assert_eq!(eval_formula("10 - 3 - 2", &[]), Ok(5));
        assert_eq!(eval_formula("2 * (3 + 4)", &[]), Ok(14));
        assert_eq!(eval_formula("-2 * -3", &[]), Ok(6));
        assert_eq!(eval_formula("1 + 2 * 3", &[]), Ok(7));
    }

    #[test]
    fn errors() {
        assert!(matches!(eval_formula("", &[]), Err(FormulaError::Parse { .. })));
        assert!(matches!(eval_formula("1 +", &[]), Err(FormulaError::Parse { .. })));
        assert!(matches!(eval_formula("(1", &[]), Err(FormulaError::Parse { .. })));
        assert!(matches!(eval_formula("1 2", &[]), Err(FormulaError::Parse { pos: 2, .. })));
        assert!(matches!(eval_formula("2 / 1", &[]), Err(FormulaError::Parse { .. })));
        assert_eq!(
            eval_formula("9223372036854775807 + 1", &[]),
            Err(FormulaError::Overflow)
        );
    }

    #[test]
    fn variable_listing() {
        assert_eq!(variables("2*L + C*L - 3x"), ["L", "C"]);
    }
}
