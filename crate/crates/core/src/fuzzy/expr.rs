//! Rule antecedents: `var IS term` atoms combined with `AND`, `OR`, `NOT`
//! and parentheses. `NOT` binds tightest, then `AND`, then `OR`; binary
//! operators associate to the left. Keywords are case-insensitive.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::FuzzyError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Atom { var: String, term: String },
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn atom(var: &str, term: &str) -> Self {
        Expr::Atom {
            var: var.to_string(),
            term: term.to_string(),
        }
    }

    pub fn and(self, rhs: Expr) -> Self {
        Expr::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Expr) -> Self {
        Expr::Or(Box::new(self), Box::new(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Expr::Not(Box::new(self))
    }

    /// Visits every atom in left-to-right order.
    pub fn atoms(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<(&'a str, &'a str)>) {
        match self {
            Expr::Atom { var, term } => out.push((var, term)),
            Expr::Not(e) => e.collect_atoms(out),
            Expr::And(l, r) | Expr::Or(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    /// Evaluates with min/max/complement given a degree lookup.
    pub fn eval<F>(&self, degree: &F) -> Result<f64, FuzzyError>
    where
        F: Fn(&str, &str) -> Option<f64>,
    {
        Ok(match self {
            Expr::Atom { var, term } => degree(var, term).ok_or_else(|| FuzzyError::UnknownAtom {
                var: var.clone(),
                term: term.clone(),
            })?,
            Expr::Not(e) => 1.0 - e.eval(degree)?,
            Expr::And(l, r) => l.eval(degree)?.min(r.eval(degree)?),
            Expr::Or(l, r) => l.eval(degree)?.max(r.eval(degree)?),
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(..) => 1,
            Expr::And(..) => 2,
            Expr::Not(_) | Expr::Atom { .. } => 3,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, child: &Expr, right: bool) -> fmt::Result {
        let wrap = child.precedence() < self.precedence()
            || (right && child.precedence() == self.precedence() && !matches!(child, Expr::Not(_) | Expr::Atom { .. }));
        if wrap {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Atom { var, term } => write!(f, "{var} IS {term}"),
            Expr::Not(e) => {
                f.write_str("NOT ")?;
                self.fmt_child(f, e, false)
            }
            Expr::And(l, r) => {
                self.fmt_child(f, l, false)?;
                f.write_str(" AND ")?;
                self.fmt_child(f, r, true)
            }
            Expr::Or(l, r) => {
                self.fmt_child(f, l, false)?;
                f.write_str(" OR ")?;
                self.fmt_child(f, r, true)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Is,
    And,
    Or,
    Not,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>, FuzzyError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(pos, ch)) = chars.peek() {
        if ch.is_whitespace() {
            chars.next();
        } else if ch == '(' {
            out.push(Token::LParen);
            chars.next();
        } else if ch == ')' {
            out.push(Token::RParen);
            chars.next();
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let mut word = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                    word.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(match word.to_ascii_uppercase().as_str() {
                "IS" => Token::Is,
                "AND" => Token::And,
                "OR" => Token::Or,
                "NOT" => Token::Not,
                _ => Token::Ident(word),
            });
        } else {
            return Err(FuzzyError::Parse(format!(
                "unexpected character `{ch}` at offset {pos} in `{src}`"
            )));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn err(&self, msg: &str) -> FuzzyError {
        FuzzyError::Parse(format!("{msg} (token {}) in `{}`", self.pos + 1, self.src))
    }

    fn or_expr(&mut self) -> Result<Expr, FuzzyError> {
        let mut lhs = self.and_expr()?;
        while self.peek() == Some(&Token::Or) {
            self.bump();
            lhs = lhs.or(self.and_expr()?);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, FuzzyError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Token::And) {
            self.bump();
            lhs = lhs.and(self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, FuzzyError> {
        match self.bump() {
            Some(Token::Not) => Ok(self.unary()?.not()),
            Some(Token::LParen) => {
                let e = self.or_expr()?;
                match self.bump() {
                    Some(Token::RParen) => Ok(e),
                    _ => Err(self.err("expected `)`")),
                }
            }
            Some(Token::Ident(var)) => {
                if self.bump() != Some(Token::Is) {
                    return Err(self.err(&format!("expected IS after `{var}`")));
                }
                match self.bump() {
                    Some(Token::Ident(term)) => Ok(Expr::Atom { var, term }),
                    _ => Err(self.err(&format!("expected a term name after `{var} IS`"))),
                }
            }
            _ => Err(self.err("expected `var IS term`, NOT, or `(`")),
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, FuzzyError> {
    let mut p = Parser {
        tokens: tokenize(src)?,
        pos: 0,
        src,
    };
    let e = p.or_expr()?;
    if p.pos != p.tokens.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}
