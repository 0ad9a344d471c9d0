//! Formula AST for the modal language: atoms, bottom, implication, and the
//! agent-indexed knowledge operator. Negation is notation: `~f` is `f -> bot`,
//! and the AST has no negation node.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// An agent name: `[a-z][a-z0-9_]*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Agent(pub String);

impl Agent {
    pub fn new(name: &str) -> Agent {
        Agent(name.to_string())
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An atomic proposition name: `[a-z][a-z0-9_]*`, with `bot` reserved.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(pub String);

impl Atom {
    pub fn new(name: &str) -> Atom {
        Atom(name.to_string())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A modal formula. `Implies(f, Bottom)` is the encoding of negation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    AtomF(Atom),
    Bottom,
    Implies(Box<Formula>, Box<Formula>),
    Know(Agent, Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::AtomF(Atom::new(name))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn know(agent: &str, f: Formula) -> Formula {
        Formula::Know(Agent::new(agent), Box::new(f))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::implies(f, Formula::Bottom)
    }

    /// Node count of the syntax tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::AtomF(_) | Formula::Bottom => 1,
            Formula::Implies(a, b) => 1 + a.size() + b.size(),
            Formula::Know(_, f) => 1 + f.size(),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Bot,
    Arrow,
    Tilde,
    LBrack,
    RBrack,
    LParen,
    RParen,
    KnowAlias(String),
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, message: message.into() }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn tokens(mut self) -> Result<Vec<(Token, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let (line, col) = (self.line, self.col);
            let c = self.src[self.pos];
            match c {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    self.bump();
                }
                b'(' => {
                    self.bump();
                    out.push((Token::LParen, line, col));
                }
                b')' => {
                    self.bump();
                    out.push((Token::RParen, line, col));
                }
                b'[' => {
                    self.bump();
                    out.push((Token::LBrack, line, col));
                }
                b']' => {
                    self.bump();
                    out.push((Token::RBrack, line, col));
                }
                b'~' => {
                    self.bump();
                    out.push((Token::Tilde, line, col));
                }
                b'-' => {
                    self.bump();
                    if self.pos < self.src.len() && self.src[self.pos] == b'>' {
                        self.bump();
                        out.push((Token::Arrow, line, col));
                    } else {
                        return Err(self.error("expected `>` after `-`"));
                    }
                }
                b'K' => {
                    self.bump();
                    if self.pos < self.src.len() && self.src[self.pos] == b'{' {
                        self.bump();
                        let name = self.ident()?;
                        if self.pos < self.src.len() && self.src[self.pos] == b'}' {
                            self.bump();
                            out.push((Token::KnowAlias(name), line, col));
                        } else {
                            return Err(self.error("expected `}` closing `K{`"));
                        }
                    } else {
                        return Err(self.error("expected `{` after `K`"));
                    }
                }
                b'a'..=b'z' => {
                    let name = self.ident()?;
                    let tok = if name == "bot" { Token::Bot } else { Token::Ident(name) };
                    out.push((tok, line, col));
                }
                other => {
                    return Err(self.error(format!("unknown token `{}`", other as char)));
                }
            }
        }
        Ok(out)
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        if self.pos >= self.src.len() || !self.src[self.pos].is_ascii_lowercase() {
            return Err(self.error("expected identifier"));
        }
        let mut name = String::new();
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_lowercase() || c.is_ascii_digit() || c == b'_' {
                name.push(self.bump() as char);
            } else {
                break;
            }
        }
        Ok(name)
    }
}

struct Parser {
    tokens: Vec<(Token, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        self.tokens.get(self.pos).map(|&(_, l, c)| (l, c)).unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError { line, col, message: message.into() }
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    // imp := unary ("->" imp)?
    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.peek() == Some(&Token::Arrow) {
            self.pos += 1;
            let rhs = self.imp()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    // unary := "~" unary | "[" ident "]" unary | "bot" | ident | "(" formula ")"
    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.bump() {
            Some(Token::Tilde) => Ok(Formula::not(self.unary()?)),
            Some(Token::LBrack) => {
                let name = match self.bump() {
                    Some(Token::Ident(name)) => name,
                    _ => return Err(self.error("expected agent name after `[`")),
                };
                self.expect(Token::RBrack, "`]`")?;
                Ok(Formula::Know(Agent(name), Box::new(self.unary()?)))
            }
            Some(Token::KnowAlias(name)) => Ok(Formula::Know(Agent(name), Box::new(self.unary()?))),
            Some(Token::Bot) => Ok(Formula::Bottom),
            Some(Token::Ident(name)) => Ok(Formula::AtomF(Atom(name))),
            Some(Token::LParen) => {
                let f = self.imp()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(f)
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expected formula"))
            }
        }
    }
}

/// Parses the formula grammar: `imp := unary ("->" imp)?` with unary
/// `~f`, `[agent]f` (alias `K{agent}f`), `bot`, atoms, and parentheses.
/// `->` is right-associative.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let lines = text.lines().count().max(1);
    let last_len = text.lines().last().map(|l| l.len()).unwrap_or(0);
    let tokens = Lexer::new(text).tokens()?;
    let mut p = Parser { tokens, pos: 0, end: (lines, last_len + 1) };
    let f = p.imp()?;
    if p.pos < p.tokens.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

fn fmt_into(f: &Formula, top: bool, out: &mut String) {
    match f {
        Formula::AtomF(a) => out.push_str(&a.0),
        Formula::Bottom => out.push_str("bot"),
        Formula::Implies(a, b) if **b == Formula::Bottom => {
            out.push('~');
            fmt_into(a, false, out);
        }
        Formula::Implies(a, b) => {
            if !top {
                out.push('(');
            }
            fmt_into(a, false, out);
            out.push_str(" -> ");
            fmt_into(b, false, out);
            if !top {
                out.push(')');
            }
        }
        Formula::Know(agent, inner) => {
            out.push('[');
            out.push_str(&agent.0);
            out.push(']');
            fmt_into(inner, false, out);
        }
    }
}

/// Canonical printed form: negations as `~f`, knowledge as `[a]f`, and every
/// nested implication explicitly parenthesized. Round-trips through
/// [`parse_formula`].
pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    fmt_into(f, true, &mut out);
    out
}

/// Post-order list of distinct subformulas: children precede parents, the
/// formula itself is last.
pub fn subformulas(f: &Formula) -> Vec<Formula> {
    fn walk(f: &Formula, out: &mut Vec<Formula>) {
        match f {
            Formula::AtomF(_) | Formula::Bottom => {}
            Formula::Implies(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            Formula::Know(_, inner) => walk(inner, out),
        }
        if !out.contains(f) {
            out.push(f.clone());
        }
    }
    let mut out = Vec::new();
    walk(f, &mut out);
    out
}

/// The set of atoms occurring in `f`.
pub fn atoms_of(f: &Formula) -> BTreeSet<Atom> {
    let mut out = BTreeSet::new();
    fn walk(f: &Formula, out: &mut BTreeSet<Atom>) {
        match f {
            Formula::AtomF(a) => {
                out.insert(a.clone());
            }
            Formula::Bottom => {}
            Formula::Implies(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            Formula::Know(_, inner) => walk(inner, out),
        }
    }
    walk(f, &mut out);
    out
}

/// The set of agents occurring in `f`.
pub fn agents_of(f: &Formula) -> BTreeSet<Agent> {
    let mut out = BTreeSet::new();
    fn walk(f: &Formula, out: &mut BTreeSet<Agent>) {
        match f {
            Formula::AtomF(_) | Formula::Bottom => {}
            Formula::Implies(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            Formula::Know(agent, inner) => {
                out.insert(agent.clone());
                walk(inner, out);
            }
        }
    }
    walk(f, &mut out);
    out
}

/// `n` pairwise-distinct atoms named `q0, q1, ...`, skipping any name in
/// `avoid`. Deterministic in its inputs.
pub fn fresh_atoms(n: usize, avoid: &BTreeSet<Atom>) -> Vec<Atom> {
    let mut out = Vec::with_capacity(n);
    let mut i = 0usize;
    while out.len() < n {
        let candidate = Atom(format!("q{i}"));
        if !avoid.contains(&candidate) {
            out.push(candidate);
        }
        i += 1;
    }
    out
}
