//! Recursive-descent parser for terms, conditions and piecewise functions.
//!
//! ```text
//! term  := sum
//! sum   := prod (("+" | "-") prod)*
//! prod  := unary (("*" | "/") unary)*
//! unary := "-" unary | atom ("^" int)?
//! atom  := rational | ident | "normval(" term ")" | builtin "(" args ")" | "(" term ")"
//! cond  := conj ("||" conj)*
//! conj  := lit ("&&" lit)*
//! lit   := "|" term "|" ("<" | "<=" | "=") "|" term "|"
//!        | term "in" rational "*" "Q(" int "," int ")"
//!        | "ord(" term ")" "%" int "=" int
//!        | "!" lit | "(" cond ")" | "true"
//! piecewise := cond "=>" term (";" cond "=>" term)*
//! ```
//!
//! A rational literal `a/b` is a single token only when written without
//! spaces; `a / b` is a division.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{lookup_builtin, CmpOp, Condition, PiecewiseFunction, Term, TermError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ratio(BigInt, BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Pipe,
    OrOr,
    AndAnd,
    Bang,
    Lt,
    Le,
    Eq,
    Percent,
    Semi,
    Arrow,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, TermError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0, 1, 1);
    let digits = |start: usize| {
        let mut j = start;
        while j < chars.len() && chars[j].is_ascii_digit() {
            j += 1;
        }
        j
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let (tok, len) = if c.is_ascii_digit() {
            let end = digits(i);
            let num: String = chars[i..end].iter().collect();
            let num: BigInt = num.parse().expect("digits");
            if end + 1 < chars.len() && chars[end] == '/' && chars[end + 1].is_ascii_digit() {
                let dend = digits(end + 1);
                let den: String = chars[end + 1..dend].iter().collect();
                let den: BigInt = den.parse().expect("digits");
                if den.is_zero() {
                    return Err(syntax(line, column, "zero denominator in rational literal"));
                }
                (Tok::Ratio(num, den), dend - i)
            } else {
                (Tok::Int(num), end - i)
            }
        } else if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else {
            let next = chars.get(i + 1).copied();
            match (c, next) {
                ('|', Some('|')) => (Tok::OrOr, 2),
                ('&', Some('&')) => (Tok::AndAnd, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('=', Some('>')) => (Tok::Arrow, 2),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                ('/', _) => (Tok::Slash, 1),
                ('^', _) => (Tok::Caret, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                (',', _) => (Tok::Comma, 1),
                ('|', _) => (Tok::Pipe, 1),
                ('!', _) => (Tok::Bang, 1),
                ('<', _) => (Tok::Lt, 1),
                ('=', _) => (Tok::Eq, 1),
                ('%', _) => (Tok::Percent, 1),
                (';', _) => (Tok::Semi, 1),
                _ => return Err(syntax(line, column, &format!("unexpected character `{c}`"))),
            }
        };
        out.push(Spanned { tok, line, column });
        i += len;
        column += len;
    }
    out.push(Spanned { tok: Tok::Eof, line, column });
    Ok(out)
}

fn syntax(line: usize, column: usize, message: &str) -> TermError {
    TermError::Syntax { line, column, message: message.to_string() }
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    vars: Option<&'a [&'a str]>,
}

impl<'a> Parser<'a> {
    fn new(src: &str, vars: Option<&'a [&'a str]>) -> Result<Self, TermError> {
        Ok(Self { toks: lex(src)?, pos: 0, vars })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: &str) -> TermError {
        let s = &self.toks[self.pos];
        syntax(s.line, s.column, message)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), TermError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn expect_eof(&self) -> Result<(), TermError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    fn term(&mut self) -> Result<Term, TermError> {
        let mut lhs = self.prod()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Term::Add(Box::new(lhs), Box::new(self.prod()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Term::Sub(Box::new(lhs), Box::new(self.prod()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn prod(&mut self) -> Result<Term, TermError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Term::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Term::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Term, TermError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let literal_follows = matches!(self.peek(), Tok::Int(_) | Tok::Ratio(..));
            if literal_follows && *self.peek_at(1) != Tok::Caret {
                let value = self.rational_literal()?;
                return Ok(Term::Const(-value));
            }
            return Ok(Term::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let k = self.exponent()?;
            return Ok(Term::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64, TermError> {
        let parenthesized = *self.peek() == Tok::LParen;
        if parenthesized {
            self.bump();
        }
        let k = self.signed_int()?;
        if parenthesized {
            self.expect(Tok::RParen, "`)` after exponent")?;
        }
        Ok(k)
    }

    fn signed_int(&mut self) -> Result<i64, TermError> {
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        match self.peek().clone() {
            Tok::Int(n) => {
                let v = n.to_i64().ok_or_else(|| self.error("integer out of range"))?;
                self.bump();
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.error("expected an integer")),
        }
    }

    fn positive_int(&mut self) -> Result<u32, TermError> {
        let v = self.signed_int()?;
        u32::try_from(v).ok().filter(|v| *v > 0).ok_or_else(|| self.error("expected a positive integer"))
    }

    fn rational_literal(&mut self) -> Result<BigRational, TermError> {
        match self.bump() {
            Tok::Int(n) => Ok(BigRational::from_integer(n)),
            Tok::Ratio(n, d) => Ok(BigRational::new(n, d)),
            _ => {
                self.pos -= 1;
                Err(self.error("expected a rational number"))
            }
        }
    }

    fn atom(&mut self) -> Result<Term, TermError> {
        match self.peek().clone() {
            Tok::Int(_) | Tok::Ratio(..) => Ok(Term::Const(self.rational_literal()?)),
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(name) => {
                let (line, column) = (self.toks[self.pos].line, self.toks[self.pos].column);
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = vec![self.term()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen, "`)` after arguments")?;
                    if name == "normval" {
                        if args.len() != 1 {
                            return Err(syntax(line, column, "normval takes one argument"));
                        }
                        return Ok(Term::NormVal(Box::new(args.remove(0))));
                    }
                    if lookup_builtin(&name).is_none() {
                        return Err(TermError::UnknownBuiltin { name, line, column });
                    }
                    return Ok(Term::Builtin(name, args));
                }
                if let Some(vars) = self.vars {
                    if !vars.contains(&name.as_str()) {
                        return Err(TermError::UnboundVariable { name, line, column });
                    }
                }
                Ok(Term::Var(name))
            }
            _ => Err(self.error("expected a term")),
        }
    }

    fn cond(&mut self) -> Result<Condition, TermError> {
        let mut lhs = self.conj()?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            lhs = Condition::Or(Box::new(lhs), Box::new(self.conj()?));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Condition, TermError> {
        let mut lhs = self.lit()?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            lhs = Condition::And(Box::new(lhs), Box::new(self.lit()?));
        }
        Ok(lhs)
    }

    fn lit(&mut self) -> Result<Condition, TermError> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Condition::Not(Box::new(self.lit()?)))
            }
            Tok::Pipe => {
                self.bump();
                let a = self.term()?;
                self.expect(Tok::Pipe, "closing `|`")?;
                let op = match self.bump() {
                    Tok::Lt => CmpOp::Less,
                    Tok::Le => CmpOp::LessEq,
                    Tok::Eq => CmpOp::Equal,
                    _ => {
                        self.pos -= 1;
                        return Err(self.error("expected `<`, `<=` or `=`"));
                    }
                };
                self.expect(Tok::Pipe, "opening `|`")?;
                let b = self.term()?;
                self.expect(Tok::Pipe, "closing `|`")?;
                Ok(Condition::NormCmp(a, op, b))
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Condition::True)
            }
            Tok::Ident(s) if s == "ord" && *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let term = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Percent, "`%`")?;
                let modulus = self.positive_int()?;
                self.expect(Tok::Eq, "`=`")?;
                let residue = self.signed_int()?;
                Ok(Condition::OrdCongruence { term, modulus, residue })
            }
            Tok::LParen => {
                let saved = self.pos;
                self.bump();
                if let Ok(c) = self.cond() {
                    if *self.peek() == Tok::RParen {
                        self.bump();
                        return Ok(c);
                    }
                }
                self.pos = saved;
                self.coset_literal()
            }
            _ => self.coset_literal(),
        }
    }

    fn coset_literal(&mut self) -> Result<Condition, TermError> {
        let term = self.term()?;
        if !self.is_ident("in") {
            return Err(self.error("expected `in`"));
        }
        self.bump();
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        let mut lambda = self.rational_literal()?;
        if negative {
            lambda = -lambda;
        }
        self.expect(Tok::Star, "`*`")?;
        if !self.is_ident("Q") {
            return Err(self.error("expected `Q`"));
        }
        self.bump();
        self.expect(Tok::LParen, "`(`")?;
        let m = self.positive_int()?;
        self.expect(Tok::Comma, "`,`")?;
        let n = self.positive_int()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(Condition::CosetMember { term, lambda, m, n })
    }

    fn piecewise(&mut self) -> Result<Vec<(Condition, Term)>, TermError> {
        let mut pieces = Vec::new();
        loop {
            let c = self.cond()?;
            self.expect(Tok::Arrow, "`=>`")?;
            let t = self.term()?;
            pieces.push((c, t));
            if *self.peek() == Tok::Semi {
                self.bump();
                if *self.peek() == Tok::Eof {
                    break;
                }
            } else {
                break;
            }
        }
        Ok(pieces)
    }
}

pub fn parse_term(src: &str) -> Result<Term, TermError> {
    let mut p = Parser::new(src, None)?;
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parses a term whose variables must all come from `vars`.
pub fn parse_term_in(src: &str, vars: &[&str]) -> Result<Term, TermError> {
    let mut p = Parser::new(src, Some(vars))?;
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_condition(src: &str) -> Result<Condition, TermError> {
    let mut p = Parser::new(src, None)?;
    let c = p.cond()?;
    p.expect_eof()?;
    Ok(c)
}

/// Parses `cond => term; cond => term; ...` over the declared variables.
pub fn parse_piecewise(src: &str, vars: &[&str]) -> Result<PiecewiseFunction, TermError> {
    let mut p = Parser::new(src, Some(vars))?;
    let pieces = p.piecewise()?;
    p.expect_eof()?;
    Ok(PiecewiseFunction { variables: vars.iter().map(|v| v.to_string()).collect(), pieces })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Parsed {
    Term(Term),
    Condition(Condition),
    Piecewise(PiecewiseFunction),
}

/// Parses whichever of the three forms `src` is.
pub fn parse(src: &str) -> Result<Parsed, TermError> {
    let toks = lex(src)?;
    if toks.iter().any(|t| t.tok == Tok::Arrow) {
        let mut names: Vec<String> = Vec::new();
        for t in &toks {
            if let Tok::Ident(s) = &t.tok {
                let reserved = ["in", "Q", "ord", "true", "normval"].contains(&s.as_str());
                if !reserved && lookup_builtin(s).is_none() && !names.contains(s) {
                    names.push(s.clone());
                }
            }
        }
        let vars: Vec<&str> = names.iter().map(String::as_str).collect();
        return parse_piecewise(src, &vars).map(Parsed::Piecewise);
    }
    match parse_term(src) {
        Ok(t) => Ok(Parsed::Term(t)),
        Err(term_err) => match parse_condition(src) {
            Ok(c) => Ok(Parsed::Condition(c)),
            Err(cond_err) => match term_err {
                TermError::Syntax { .. } => Err(cond_err),
                other => Err(other),
            },
        },
    }
}
