//! Concrete syntax for formulas.
//!
//! Grammar sketch:
//!
//! ```text
//! formula := quantified | boolean combination | body
//! quant   := (exists | forall) SETVAR .
//!          | (exists | forall) ( SETVAR , min|max , formula ) .
//!          | (exists | forall) TRACEVAR in SETVAR .
//! body    := prop[TRACEVAR] | TRACEVAR |> SETVAR | TRACEVAR =_{p, ...} TRACEVAR
//!          | ! body | X body | F body | G body | body U body
//!          | body & body | body '|' body | body ^ body
//!          | body -> body | body <-> body | ( body )
//! ```
//!
//! Set variables start with an uppercase letter, trace variables and
//! propositions with a lowercase one. `ALL` and `D` name the ambient set
//! and the model set; they can be used as ranges and membership targets
//! but never bound. Precedence, tightest first: unary (`!`, `X`, `F`,
//! `G`), `U`, `&`, `|`, `^`, `->`, `<->`; `U` and `->` associate to the
//! right, the other binary operators to the left. A quantifier extends as
//! far to the right as possible. The agreement shorthand `p =_{a,b} q`
//! expands at parse time to `G ((a[p] <-> a[q]) & (b[p] <-> b[q]))` with
//! the listed propositions sorted. Boolean combinations may mix
//! quantified blocks and plain bodies, but `X`, `F`, `G`, and `U` accept
//! only quantifier-free operands.

use crate::traces::{Alphabet, VAR_ALL, VAR_D};

use super::{Formula, FormulaNode, LogicError, LtlBody, Polarity, Quantifier};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Exists,
    Forall,
    In,
    Min,
    Max,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Dot,
    Comma,
    Bang,
    Amp,
    Pipe,
    Caret,
    Arrow,
    DArrow,
    Member,
    EqProps(Vec<String>),
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("identifier {s:?}"),
            Token::Exists => "'exists'".into(),
            Token::Forall => "'forall'".into(),
            Token::In => "'in'".into(),
            Token::Min => "'min'".into(),
            Token::Max => "'max'".into(),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::LBracket => "'['".into(),
            Token::RBracket => "']'".into(),
            Token::Dot => "'.'".into(),
            Token::Comma => "','".into(),
            Token::Bang => "'!'".into(),
            Token::Amp => "'&'".into(),
            Token::Pipe => "'|'".into(),
            Token::Caret => "'^'".into(),
            Token::Arrow => "'->'".into(),
            Token::DArrow => "'<->'".into(),
            Token::Member => "'|>'".into(),
            Token::EqProps(_) => "agreement shorthand".into(),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

type Spanned = (Token, usize, usize);

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

    fn err(&self, msg: impl Into<String>) -> LogicError {
        LogicError::Syntax { line: self.line, col: self.col, msg: msg.into() }
    }

    fn ident(&mut self, first: char) -> String {
        let mut s = String::new();
        s.push(first);
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn eq_props(&mut self) -> Result<Vec<String>, LogicError> {
        // Called after '='; expects `_{ p, q, ... }`.
        match self.bump() {
            Some('_') => {}
            _ => return Err(self.err("expected '_{' after '=' in agreement shorthand")),
        }
        match self.bump() {
            Some('{') => {}
            _ => return Err(self.err("expected '{' after '=_' in agreement shorthand")),
        }
        let mut props = Vec::new();
        loop {
            match self.chars.peek() {
                Some(&c) if c.is_whitespace() || c == ',' => {
                    self.bump();
                }
                Some('}') => {
                    self.bump();
                    break;
                }
                Some(&c) if c.is_ascii_lowercase() => {
                    self.bump();
                    props.push(self.ident(c));
                }
                Some(&c) => return Err(self.err(format!("unexpected {c:?} in proposition list"))),
                None => return Err(self.err("unterminated proposition list")),
            }
        }
        if props.is_empty() {
            return Err(self.err("agreement shorthand needs at least one proposition"));
        }
        Ok(props)
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, LogicError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.chars.peek(), Some(c) if c.is_whitespace()) {
                self.bump();
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.bump() else { break };
            let tok = match c {
                '(' => Token::LParen,
                ')' => Token::RParen,
                '[' => Token::LBracket,
                ']' => Token::RBracket,
                '.' => Token::Dot,
                ',' => Token::Comma,
                '!' => Token::Bang,
                '&' => Token::Amp,
                '^' => Token::Caret,
                '|' => {
                    if self.chars.peek() == Some(&'>') {
                        self.bump();
                        Token::Member
                    } else {
                        Token::Pipe
                    }
                }
                '-' => {
                    if self.chars.peek() == Some(&'>') {
                        self.bump();
                        Token::Arrow
                    } else {
                        return Err(self.err("expected '->'"));
                    }
                }
                '<' => {
                    if self.bump() == Some('-') && self.chars.peek() == Some(&'>') {
                        self.bump();
                        Token::DArrow
                    } else {
                        return Err(self.err("expected '<->'"));
                    }
                }
                '=' => Token::EqProps(self.eq_props()?),
                c if c.is_ascii_alphabetic() => {
                    let word = self.ident(c);
                    match word.as_str() {
                        "exists" => Token::Exists,
                        "forall" => Token::Forall,
                        "in" => Token::In,
                        "min" => Token::Min,
                        "max" => Token::Max,
                        _ => Token::Ident(word),
                    }
                }
                other => return Err(self.err(format!("unexpected character {other:?}"))),
            };
            out.push((tok, line, col));
        }
        Ok(out)
    }
}

struct Parser<'a> {
    tokens: Vec<Spanned>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _, _)| t)
    }

    fn where_at(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|&(_, l, c)| (l, c))
            .unwrap_or((1, 1))
    }

    fn err_here(&self, msg: impl Into<String>) -> LogicError {
        let (line, col) = self.where_at();
        LogicError::Syntax { line, col, msg: msg.into() }
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Token) -> Result<(), LogicError> {
        match self.peek() {
            Some(t) if t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.err_here(format!("expected {}, found {}", want.describe(), t.describe()))),
            None => Err(self.err_here(format!("expected {}, found end of input", want.describe()))),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, LogicError> {
        match self.peek() {
            Some(Token::Ident(_)) => {
                let Some(Token::Ident(s)) = self.bump() else { unreachable!() };
                Ok(s)
            }
            Some(t) => Err(self.err_here(format!("expected {what}, found {}", t.describe()))),
            None => Err(self.err_here(format!("expected {what}, found end of input"))),
        }
    }

    fn is_set_name(s: &str) -> bool {
        s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
    }

    /// Lowest level: <-> (left-associative).
    fn parse_iff(&mut self) -> Result<FormulaNode, LogicError> {
        let mut lhs = self.parse_implies()?;
        while self.peek() == Some(&Token::DArrow) {
            self.bump();
            let rhs = self.parse_implies()?;
            lhs = lhs.iff(rhs);
        }
        Ok(lhs)
    }

    /// -> (right-associative).
    fn parse_implies(&mut self) -> Result<FormulaNode, LogicError> {
        let lhs = self.parse_xor()?;
        if self.peek() == Some(&Token::Arrow) {
            self.bump();
            let rhs = self.parse_implies()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn parse_xor(&mut self) -> Result<FormulaNode, LogicError> {
        let mut lhs = self.parse_or()?;
        while self.peek() == Some(&Token::Caret) {
            self.bump();
            let rhs = self.parse_or()?;
            lhs = lhs.xor(rhs);
        }
        Ok(lhs)
    }

    fn parse_or(&mut self) -> Result<FormulaNode, LogicError> {
        let mut lhs = self.parse_and()?;
        while self.peek() == Some(&Token::Pipe) {
            self.bump();
            let rhs = self.parse_and()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<FormulaNode, LogicError> {
        let mut lhs = self.parse_until()?;
        while self.peek() == Some(&Token::Amp) {
            self.bump();
            let rhs = self.parse_until()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    /// U binds tighter than the Boolean connectives and associates right.
    fn parse_until(&mut self) -> Result<FormulaNode, LogicError> {
        let lhs = self.parse_unary()?;
        if matches!(self.peek(), Some(Token::Ident(s)) if s == "U") {
            self.bump();
            let rhs = self.parse_until()?;
            let (FormulaNode::Body(a), FormulaNode::Body(b)) = (lhs, rhs) else {
                return Err(LogicError::QuantifierUnderTemporal);
            };
            return Ok(FormulaNode::Body(a.until(b)));
        }
        Ok(lhs)
    }

    fn parse_temporal_operand(&mut self) -> Result<LtlBody, LogicError> {
        match self.parse_unary()? {
            FormulaNode::Body(b) => Ok(b),
            _ => Err(LogicError::QuantifierUnderTemporal),
        }
    }

    fn parse_unary(&mut self) -> Result<FormulaNode, LogicError> {
        match self.peek() {
            Some(Token::Bang) => {
                self.bump();
                Ok(self.parse_unary()?.not())
            }
            Some(Token::Ident(s)) if s == "X" => {
                self.bump();
                Ok(FormulaNode::Body(self.parse_temporal_operand()?.next()))
            }
            Some(Token::Ident(s)) if s == "F" => {
                self.bump();
                Ok(FormulaNode::Body(self.parse_temporal_operand()?.eventually()))
            }
            Some(Token::Ident(s)) if s == "G" => {
                self.bump();
                Ok(FormulaNode::Body(self.parse_temporal_operand()?.globally()))
            }
            Some(Token::Exists) | Some(Token::Forall) => self.parse_quantified(),
            Some(Token::LParen) => {
                self.bump();
                let inner = self.parse_iff()?;
                self.expect(&Token::RParen)?;
                Ok(inner)
            }
            Some(Token::Ident(_)) => self.parse_atom(),
            Some(t) => Err(self.err_here(format!("expected a formula, found {}", t.describe()))),
            None => Err(self.err_here("expected a formula, found end of input")),
        }
    }

    fn parse_quantified(&mut self) -> Result<FormulaNode, LogicError> {
        let exists = matches!(self.bump(), Some(Token::Exists));
        let q = match self.peek() {
            // Guarded form: (SETVAR, min|max, guard)
            Some(Token::LParen) => {
                self.bump();
                let var = self.expect_ident("a set variable")?;
                if !Self::is_set_name(&var) {
                    return Err(self.err_here(format!(
                        "set variable must start with an uppercase letter, found {var:?}"
                    )));
                }
                if var == VAR_ALL || var == VAR_D {
                    return Err(LogicError::ReservedVariable(var));
                }
                self.expect(&Token::Comma)?;
                let polarity = match self.bump() {
                    Some(Token::Min) => Polarity::Min,
                    Some(Token::Max) => Polarity::Max,
                    _ => return Err(self.err_here("expected 'min' or 'max'")),
                };
                self.expect(&Token::Comma)?;
                let guard = self.parse_iff()?;
                self.expect(&Token::RParen)?;
                Quantifier::SetMM { exists, var, polarity, guard: Box::new(guard) }
            }
            Some(Token::Ident(_)) => {
                let var = self.expect_ident("a variable")?;
                if Self::is_set_name(&var) {
                    if var == VAR_ALL || var == VAR_D {
                        return Err(LogicError::ReservedVariable(var));
                    }
                    Quantifier::Set { exists, var }
                } else {
                    self.expect(&Token::In)?;
                    let range = self.expect_ident("a set variable")?;
                    if !Self::is_set_name(&range) {
                        return Err(self.err_here(format!(
                            "trace quantifier range must be a set variable, found {range:?}"
                        )));
                    }
                    Quantifier::Trace { exists, var, range }
                }
            }
            Some(t) => return Err(self.err_here(format!("expected a variable, found {}", t.describe()))),
            None => return Err(self.err_here("expected a variable, found end of input")),
        };
        self.expect(&Token::Dot)?;
        // Quantifier scope extends as far right as possible.
        let scope = self.parse_iff()?;
        Ok(FormulaNode::Quant(q, Box::new(scope)))
    }

    fn parse_atom(&mut self) -> Result<FormulaNode, LogicError> {
        let name = self.expect_ident("a proposition or trace variable")?;
        if Self::is_set_name(&name) {
            return Err(self.err_here(format!(
                "set variable {name:?} cannot stand alone; use a membership atom like p |> {name}"
            )));
        }
        match self.peek() {
            Some(Token::LBracket) => {
                // prop[var]
                self.bump();
                if !self.alphabet.contains(&name) {
                    return Err(LogicError::UnknownProposition(name));
                }
                let var = self.expect_ident("a trace variable")?;
                if Self::is_set_name(&var) {
                    return Err(self.err_here(format!(
                        "trace variable must start with a lowercase letter, found {var:?}"
                    )));
                }
                self.expect(&Token::RBracket)?;
                Ok(FormulaNode::Body(LtlBody::Atom { prop: name, var }))
            }
            Some(Token::Member) => {
                self.bump();
                let set = self.expect_ident("a set variable")?;
                if !Self::is_set_name(&set) {
                    return Err(self.err_here(format!(
                        "membership target must be a set variable, found {set:?}"
                    )));
                }
                Ok(FormulaNode::Body(LtlBody::InSet { var: name, set }))
            }
            Some(Token::EqProps(_)) => {
                let Some(Token::EqProps(props)) = self.bump() else { unreachable!() };
                for p in &props {
                    if !self.alphabet.contains(p) {
                        return Err(LogicError::UnknownProposition(p.clone()));
                    }
                }
                let other = self.expect_ident("a trace variable")?;
                if Self::is_set_name(&other) {
                    return Err(self.err_here(format!(
                        "agreement shorthand compares trace variables, found {other:?}"
                    )));
                }
                let body = LtlBody::eq_on(props.iter().map(String::as_str), &name, &other)
                    .expect("nonempty proposition list");
                Ok(FormulaNode::Body(body))
            }
            _ => Err(self.err_here(format!(
                "expected '[', '|>', or '=_{{...}}' after {name:?}"
            ))),
        }
    }
}

/// Parses the concrete syntax over the given alphabet.
pub fn parse_formula(text: &str, alphabet: &Alphabet) -> Result<Formula, LogicError> {
    let tokens = Lexer::new(text).tokens()?;
    let mut parser = Parser { tokens, pos: 0, alphabet };
    let node = parser.parse_iff()?;
    if parser.pos < parser.tokens.len() {
        return Err(parser.err_here(format!(
            "unexpected {} after the formula",
            parser.tokens[parser.pos].0.describe()
        )));
    }
    Formula::new(alphabet.clone(), node)
}

/// Propositions mentioned in the text (atom heads and agreement lists),
/// for alphabet inference. Tolerates unknown names; fails only on lexical
/// errors.
pub fn scan_props(text: &str) -> Result<Vec<String>, LogicError> {
    let tokens = Lexer::new(text).tokens()?;
    let mut props = std::collections::BTreeSet::new();
    for (i, (tok, _, _)) in tokens.iter().enumerate() {
        match tok {
            Token::Ident(name) if tokens.get(i + 1).map(|(t, _, _)| t) == Some(&Token::LBracket) => {
                if name.chars().next().is_some_and(|c| c.is_ascii_lowercase()) {
                    props.insert(name.clone());
                }
            }
            Token::EqProps(list) => props.extend(list.iter().cloned()),
            _ => {}
        }
    }
    Ok(props.into_iter().collect())
}
