//! Text syntax for arithmetic formulas.
//!
//! Quantifiers are written `exists1 x.`, `forall2 Y.`, `exists3 YY.` with
//! the number giving the order; the body extends as far right as possible.
//! Atoms are `s < t`, `s = t`, and `t in Y`; `Y in YY` relates a set to a
//! family when the left side is bound as a second-order variable. Terms
//! are variables, numerals, `+`, `*`, and the `pair(s, t)` function.
//! Connectives `!`, `&`, `|`, `->`, `<->` bind in that order, with `->`
//! right-associative.

use std::fmt;

use super::{ArithError, ArithFormula, ArithTerm};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(u64),
    Quant(u8, bool),
    KwIn,
    KwPair,
    LParen,
    RParen,
    Dot,
    Comma,
    Plus,
    Star,
    Equals,
    Less,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DArrow,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Number(n) => write!(f, "{n}"),
            Tok::Quant(order, exists) => {
                write!(f, "{}{order}", if *exists { "exists" } else { "forall" })
            }
            Tok::KwIn => write!(f, "in"),
            Tok::KwPair => write!(f, "pair"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::Dot => write!(f, "."),
            Tok::Comma => write!(f, ","),
            Tok::Plus => write!(f, "+"),
            Tok::Star => write!(f, "*"),
            Tok::Equals => write!(f, "="),
            Tok::Less => write!(f, "<"),
            Tok::Bang => write!(f, "!"),
            Tok::Amp => write!(f, "&"),
            Tok::Pipe => write!(f, "|"),
            Tok::Arrow => write!(f, "->"),
            Tok::DArrow => write!(f, "<->"),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> ArithError {
    ArithError::Parse { line, col, msg: msg.into() }
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>, ArithError> {
        let mut out = Vec::new();
        while let Some(&c) = self.chars.peek() {
            let (line, col) = (self.line, self.col);
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            if c.is_ascii_digit() {
                let mut n: u64 = 0;
                while let Some(&d) = self.chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add(d as u64 - '0' as u64))
                        .ok_or_else(|| err(line, col, "numeral does not fit in 64 bits"))?;
                    self.bump();
                }
                out.push((Tok::Number(n), line, col));
                continue;
            }
            if c.is_ascii_alphabetic() {
                let mut s = String::new();
                while let Some(&d) = self.chars.peek() {
                    if !(d.is_ascii_alphanumeric() || d == '_' || d == '\'') {
                        break;
                    }
                    s.push(d);
                    self.bump();
                }
                let tok = match s.as_str() {
                    "exists1" => Tok::Quant(1, true),
                    "exists2" => Tok::Quant(2, true),
                    "exists3" => Tok::Quant(3, true),
                    "forall1" => Tok::Quant(1, false),
                    "forall2" => Tok::Quant(2, false),
                    "forall3" => Tok::Quant(3, false),
                    "in" => Tok::KwIn,
                    "pair" => Tok::KwPair,
                    _ => Tok::Ident(s),
                };
                out.push((tok, line, col));
                continue;
            }
            self.bump();
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '.' => Tok::Dot,
                ',' => Tok::Comma,
                '+' => Tok::Plus,
                '*' => Tok::Star,
                '=' => Tok::Equals,
                '!' => Tok::Bang,
                '&' => Tok::Amp,
                '|' => Tok::Pipe,
                '<' => match self.chars.peek() {
                    Some('-') => {
                        self.bump();
                        match self.bump() {
                            Some('>') => Tok::DArrow,
                            _ => return Err(err(line, col, "expected <->")),
                        }
                    }
                    _ => Tok::Less,
                },
                '-' => match self.bump() {
                    Some('>') => Tok::Arrow,
                    _ => return Err(err(line, col, "expected ->")),
                },
                other => return Err(err(line, col, format!("unexpected character {other:?}"))),
            };
            out.push((tok, line, col));
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    // Enclosing quantifier binders, innermost last, for resolving whether
    // `v in X` relates a natural to a set or a set to a family.
    binders: Vec<(String, u8)>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some((_, l, c)) => (*l, *c),
            None => self
                .toks
                .last()
                .map(|(_, l, c)| (*l, *c + 1))
                .unwrap_or((1, 1)),
        }
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ArithError> {
        let (line, col) = self.here();
        Err(err(line, col, msg))
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ArithError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let t = t.clone();
                self.fail(format!("expected {tok}, found {t}"))
            }
            None => self.fail(format!("expected {tok}, found end of input")),
        }
    }

    fn order_of(&self, name: &str) -> Option<u8> {
        self.binders.iter().rev().find(|(n, _)| n == name).map(|(_, o)| *o)
    }

    fn formula(&mut self) -> Result<ArithFormula, ArithError> {
        let mut left = self.implies()?;
        while self.peek() == Some(&Tok::DArrow) {
            self.pos += 1;
            let right = self.implies()?;
            left = left.iff(right);
        }
        Ok(left)
    }

    fn implies(&mut self) -> Result<ArithFormula, ArithError> {
        let left = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let right = self.implies()?;
            return Ok(left.implies(right));
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<ArithFormula, ArithError> {
        let mut left = self.and()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let right = self.and()?;
            left = left.or(right);
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<ArithFormula, ArithError> {
        let mut left = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let right = self.unary()?;
            left = left.and(right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<ArithFormula, ArithError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(self.unary()?.not())
            }
            Some(Tok::Quant(order, exists)) => {
                let (order, exists) = (*order, *exists);
                self.pos += 1;
                let var = match self.bump() {
                    Some(Tok::Ident(v)) => v,
                    Some(t) => return self.fail(format!("expected variable, found {t}")),
                    None => return self.fail("expected variable, found end of input"),
                };
                self.expect(Tok::Dot)?;
                self.binders.push((var.clone(), order));
                let body = self.formula();
                self.binders.pop();
                Ok(ArithFormula::quant(order, exists, var, body?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<ArithFormula, ArithError> {
        if self.peek() == Some(&Tok::LParen) {
            // A parenthesis may open a formula or a compound term such as
            // (x + y) * z = w; try the formula reading first.
            let save = self.pos;
            self.pos += 1;
            match self.formula().and_then(|f| self.expect(Tok::RParen).map(|_| f)) {
                Ok(f) => return Ok(f),
                Err(e) => {
                    self.pos = save;
                    return self.atom().map_err(|_| e);
                }
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<ArithFormula, ArithError> {
        let lhs = self.term()?;
        match self.bump() {
            Some(Tok::Less) => Ok(ArithFormula::less(lhs, self.term()?)),
            Some(Tok::Equals) => Ok(ArithFormula::eq(lhs, self.term()?)),
            Some(Tok::KwIn) => {
                let set = match self.bump() {
                    Some(Tok::Ident(v)) => v,
                    Some(t) => return self.fail(format!("expected variable after in, found {t}")),
                    None => return self.fail("expected variable after in"),
                };
                match &lhs {
                    ArithTerm::Var(member) => match self.order_of(member) {
                        Some(2) => Ok(ArithFormula::in_family(member.clone(), set)),
                        Some(3) => {
                            self.fail(format!("third-order variable {member} cannot be a member"))
                        }
                        _ => Ok(ArithFormula::in_set(lhs, set)),
                    },
                    _ => Ok(ArithFormula::in_set(lhs, set)),
                }
            }
            Some(t) => self.fail(format!("expected <, =, or in, found {t}")),
            None => self.fail("expected <, =, or in, found end of input"),
        }
    }

    fn term(&mut self) -> Result<ArithTerm, ArithError> {
        let mut left = self.multerm()?;
        while self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            let right = self.multerm()?;
            left = left.add(right);
        }
        Ok(left)
    }

    fn multerm(&mut self) -> Result<ArithTerm, ArithError> {
        let mut left = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            let right = self.factor()?;
            left = left.mul(right);
        }
        Ok(left)
    }

    fn factor(&mut self) -> Result<ArithTerm, ArithError> {
        match self.bump() {
            Some(Tok::Ident(v)) => Ok(ArithTerm::Var(v)),
            Some(Tok::Number(n)) => Ok(ArithTerm::Const(n)),
            Some(Tok::KwPair) => {
                self.expect(Tok::LParen)?;
                let a = self.term()?;
                self.expect(Tok::Comma)?;
                let b = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(a.pair(b))
            }
            Some(Tok::LParen) => {
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(t) => self.fail(format!("expected a term, found {t}")),
            None => self.fail("expected a term, found end of input"),
        }
    }
}

/// Parses the text syntax into a formula.
pub fn parse_arith(text: &str) -> Result<ArithFormula, ArithError> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, pos: 0, binders: Vec::new() };
    let f = p.formula()?;
    if p.peek().is_some() {
        return p.fail("unexpected trailing input");
    }
    Ok(f)
}

impl fmt::Display for ArithTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithTerm::Var(v) => write!(f, "{v}"),
            ArithTerm::Const(n) => write!(f, "{n}"),
            ArithTerm::Add(a, b) => {
                write!(f, "{a} + ")?;
                // A bare sum on the right would reassociate when reparsed.
                if matches!(**b, ArithTerm::Add(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            ArithTerm::Mul(a, b) => {
                if matches!(**a, ArithTerm::Add(..)) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " * ")?;
                if matches!(**b, ArithTerm::Add(..) | ArithTerm::Mul(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            ArithTerm::Pair(a, b) => write!(f, "pair({a}, {b})"),
        }
    }
}

// Binding strength, loosest first: <-> , -> , | , & , ! , atoms.
fn level(f: &ArithFormula) -> u8 {
    match f {
        ArithFormula::Quant { .. } => 0,
        ArithFormula::Iff(..) => 1,
        ArithFormula::Implies(..) => 2,
        ArithFormula::Or(..) => 3,
        ArithFormula::And(..) => 4,
        ArithFormula::Not(..) => 5,
        _ => 6,
    }
}

fn print_at(f: &ArithFormula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level(f) < min {
        write!(out, "(")?;
        print_at(f, 0, out)?;
        return write!(out, ")");
    }
    match f {
        ArithFormula::Less(a, b) => write!(out, "{a} < {b}"),
        ArithFormula::Eq(a, b) => write!(out, "{a} = {b}"),
        ArithFormula::InSet(t, s) => write!(out, "{t} in {s}"),
        ArithFormula::InFamily(s, fam) => write!(out, "{s} in {fam}"),
        ArithFormula::Not(a) => {
            write!(out, "!")?;
            print_at(a, 5, out)
        }
        ArithFormula::And(a, b) => {
            print_at(a, 4, out)?;
            write!(out, " & ")?;
            print_at(b, 5, out)
        }
        ArithFormula::Or(a, b) => {
            print_at(a, 3, out)?;
            write!(out, " | ")?;
            print_at(b, 4, out)
        }
        ArithFormula::Implies(a, b) => {
            print_at(a, 3, out)?;
            write!(out, " -> ")?;
            print_at(b, 2, out)
        }
        ArithFormula::Iff(a, b) => {
            print_at(a, 1, out)?;
            write!(out, " <-> ")?;
            print_at(b, 2, out)
        }
        ArithFormula::Quant { order, exists, var, body } => {
            let word = if *exists { "exists" } else { "forall" };
            write!(out, "{word}{order} {var}. ")?;
            print_at(body, 0, out)
        }
    }
}

impl fmt::Display for ArithFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print_at(self, 0, f)
    }
}
