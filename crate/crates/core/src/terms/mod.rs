//! The term and condition language for semialgebraic functions.
//!
//! Terms are rational expressions in named variables, extended with
//! `normval(t)` (the rational number `|t|` read back as an element of `Q_p`)
//! and a small table of builtins. Conditions compare norms, constrain the
//! valuation modulo an integer, or test membership in a coset `λ·Q_{m,n}`.
//! Every construct evaluates exactly at rational points.

mod builtins;
mod parser;
mod print;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::qp::{CosetSpec, PadicScalar, PrimeContext, Valuation};

pub use builtins::{lookup_builtin, BuiltinDerivative, BuiltinSpec, BUILTINS};
pub use parser::{parse, parse_condition, parse_piecewise, parse_term, parse_term_in, Parsed};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown builtin `{name}` at {line}:{column}")]
    UnknownBuiltin { name: String, line: usize, column: usize },
    #[error("unbound variable `{name}` at {line}:{column}")]
    UnboundVariable { name: String, line: usize, column: usize },
    #[error("no value for variable `{0}`")]
    MissingVariable(String),
    #[error("division by zero in `{subterm}`")]
    DivisionByZero { subterm: String },
    #[error("`{name}` is not defined at {argument}")]
    BuiltinDomain { name: String, argument: String },
    #[error("`{name}` takes {expected} argument(s), got {got}")]
    BuiltinArity { name: String, expected: usize, got: usize },
    #[error("builtin `{0}` is not registered")]
    UnregisteredBuiltin(String),
    #[error("no derivative registered for builtin `{0}`")]
    UnknownDerivative(String),
    #[error("pieces {first} and {second} both apply at {point}")]
    PieceOverlap { first: usize, second: usize, point: String },
    #[error("no piece applies at {0}")]
    NoPieceApplies(String),
}

/// A point: values for the named variables.
pub type Point = BTreeMap<String, PadicScalar>;

/// Builds a single-variable point.
pub fn point1(name: &str, value: PadicScalar) -> Point {
    let mut p = Point::new();
    p.insert(name.to_string(), value);
    p
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(BigRational),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Div(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Pow(Box<Term>, i64),
    /// `p^{-ord(t)}` as a rational number; undefined at `t = 0`.
    NormVal(Box<Term>),
    Builtin(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn int(n: i64) -> Term {
        Term::Const(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn constant(value: &PadicScalar) -> Term {
        Term::Const(value.value().clone())
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Term::Const(c) if c.is_zero())
    }

    fn is_one_const(&self) -> bool {
        matches!(self, Term::Const(c) if c.is_one())
    }

    /// Sum with zero-folding.
    pub fn plus(a: Term, b: Term) -> Term {
        match (a, b) {
            (a, b) if a.is_zero_const() => b,
            (a, b) if b.is_zero_const() => a,
            (Term::Const(x), Term::Const(y)) => Term::Const(x + y),
            (a, b) => Term::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn minus(a: Term, b: Term) -> Term {
        match (a, b) {
            (a, b) if b.is_zero_const() => a,
            (a, b) if a.is_zero_const() => Term::negate(b),
            (Term::Const(x), Term::Const(y)) => Term::Const(x - y),
            (a, b) => Term::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn times(a: Term, b: Term) -> Term {
        match (a, b) {
            (a, _) if a.is_zero_const() => Term::int(0),
            (_, b) if b.is_zero_const() => Term::int(0),
            (a, b) if a.is_one_const() => b,
            (a, b) if b.is_one_const() => a,
            (Term::Const(x), Term::Const(y)) => Term::Const(x * y),
            (a, b) => Term::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn over(a: Term, b: Term) -> Term {
        match (a, b) {
            (a, b) if a.is_zero_const() && !b.is_zero_const() => Term::int(0),
            (a, b) if b.is_one_const() => a,
            (a, b) => Term::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn negate(a: Term) -> Term {
        match a {
            Term::Const(x) => Term::Const(-x),
            Term::Neg(inner) => *inner,
            a => Term::Neg(Box::new(a)),
        }
    }

    pub fn power(a: Term, k: i64) -> Term {
        match k {
            0 => Term::int(1),
            1 => a,
            _ => Term::Pow(Box::new(a), k),
        }
    }

    /// Variables occurring in the term, in first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Const(_) => {}
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) | Term::Div(a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
            Term::Neg(a) | Term::Pow(a, _) | Term::NormVal(a) => a.collect_variables(out),
            Term::Builtin(_, args) => args.iter().for_each(|a| a.collect_variables(out)),
        }
    }

    pub fn evaluate(&self, ctx: PrimeContext, point: &Point) -> Result<PadicScalar, TermError> {
        let div_zero = || TermError::DivisionByZero { subterm: self.to_string() };
        Ok(match self {
            Term::Var(v) => point.get(v).cloned().ok_or_else(|| TermError::MissingVariable(v.clone()))?,
            Term::Const(c) => PadicScalar::new(ctx, c.clone()),
            Term::Add(a, b) => a.evaluate(ctx, point)? + b.evaluate(ctx, point)?,
            Term::Sub(a, b) => a.evaluate(ctx, point)? - b.evaluate(ctx, point)?,
            Term::Mul(a, b) => a.evaluate(ctx, point)? * b.evaluate(ctx, point)?,
            Term::Div(a, b) => {
                let num = a.evaluate(ctx, point)?;
                let den = b.evaluate(ctx, point)?;
                num.checked_div(&den).map_err(|_| div_zero())?
            }
            Term::Neg(a) => -a.evaluate(ctx, point)?,
            Term::Pow(a, k) => a.evaluate(ctx, point)?.checked_pow(*k).map_err(|_| div_zero())?,
            Term::NormVal(a) => {
                let x = a.evaluate(ctx, point)?;
                match x.ord() {
                    Valuation::Finite(v) => ctx.power(-v),
                    Valuation::PlusInfinity => {
                        return Err(TermError::BuiltinDomain { name: "normval".into(), argument: x.to_string() })
                    }
                }
            }
            Term::Builtin(name, args) => {
                let spec = lookup_builtin(name).ok_or_else(|| TermError::UnregisteredBuiltin(name.clone()))?;
                if args.len() != spec.arity {
                    return Err(TermError::BuiltinArity { name: name.clone(), expected: spec.arity, got: args.len() });
                }
                let values = args.iter().map(|a| a.evaluate(ctx, point)).collect::<Result<Vec<_>, _>>()?;
                (spec.evaluate)(&values)?
            }
        })
    }

    /// Evaluates a term in a single variable.
    pub fn eval_at(&self, var: &str, x: &PadicScalar) -> Result<PadicScalar, TermError> {
        self.evaluate(x.ctx(), &point1(var, x.clone()))
    }

    /// Symbolic derivative with respect to `var`. `normval` and builtins
    /// registered as locally constant differentiate to zero.
    pub fn differentiate(&self, var: &str) -> Result<Term, TermError> {
        Ok(match self {
            Term::Var(v) => Term::int(if v == var { 1 } else { 0 }),
            Term::Const(_) | Term::NormVal(_) => Term::int(0),
            Term::Add(a, b) => Term::plus(a.differentiate(var)?, b.differentiate(var)?),
            Term::Sub(a, b) => Term::minus(a.differentiate(var)?, b.differentiate(var)?),
            Term::Mul(a, b) => Term::plus(
                Term::times(a.differentiate(var)?, (**b).clone()),
                Term::times((**a).clone(), b.differentiate(var)?),
            ),
            Term::Div(a, b) => {
                let numerator = Term::minus(
                    Term::times(a.differentiate(var)?, (**b).clone()),
                    Term::times((**a).clone(), b.differentiate(var)?),
                );
                Term::over(numerator, Term::power((**b).clone(), 2))
            }
            Term::Neg(a) => Term::negate(a.differentiate(var)?),
            Term::Pow(a, k) => {
                let inner = a.differentiate(var)?;
                Term::times(Term::times(Term::int(*k), Term::power((**a).clone(), k - 1)), inner)
            }
            Term::Builtin(name, _) => {
                let spec = lookup_builtin(name).ok_or_else(|| TermError::UnknownDerivative(name.clone()))?;
                match spec.derivative {
                    BuiltinDerivative::LocallyConstant => Term::int(0),
                    BuiltinDerivative::Unknown => return Err(TermError::UnknownDerivative(name.clone())),
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Less,
    LessEq,
    Equal,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    True,
    NormCmp(Term, CmpOp, Term),
    /// `ord(term) ≡ residue (mod modulus)`; false at `term = 0`.
    OrdCongruence {
        term: Term,
        modulus: u32,
        residue: i64,
    },
    CosetMember {
        term: Term,
        lambda: BigRational,
        m: u32,
        n: u32,
    },
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    Not(Box<Condition>),
}

impl Condition {
    pub fn and(a: Condition, b: Condition) -> Condition {
        match (a, b) {
            (Condition::True, b) => b,
            (a, Condition::True) => a,
            (a, b) => Condition::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn evaluate(&self, ctx: PrimeContext, point: &Point) -> Result<bool, TermError> {
        Ok(match self {
            Condition::True => true,
            Condition::NormCmp(a, op, b) => {
                let na = a.evaluate(ctx, point)?.norm();
                let nb = b.evaluate(ctx, point)?.norm();
                match op {
                    CmpOp::Less => na < nb,
                    CmpOp::LessEq => na <= nb,
                    CmpOp::Equal => na == nb,
                }
            }
            Condition::OrdCongruence { term, modulus, residue } => match term.evaluate(ctx, point)?.ord() {
                Valuation::Finite(v) => (v - residue).rem_euclid(*modulus as i64) == 0,
                Valuation::PlusInfinity => false,
            },
            Condition::CosetMember { term, lambda, m, n } => {
                let x = term.evaluate(ctx, point)?;
                let coset = CosetSpec { lambda: PadicScalar::new(ctx, lambda.clone()), m: *m, n: *n };
                coset.contains(&x)
            }
            Condition::And(a, b) => a.evaluate(ctx, point)? && b.evaluate(ctx, point)?,
            Condition::Or(a, b) => a.evaluate(ctx, point)? || b.evaluate(ctx, point)?,
            Condition::Not(a) => !a.evaluate(ctx, point)?,
        })
    }

    pub fn eval_at(&self, var: &str, x: &PadicScalar) -> Result<bool, TermError> {
        self.evaluate(x.ctx(), &point1(var, x.clone()))
    }
}

/// A function given by cases. Piece conditions must be disjoint wherever the
/// function is evaluated; an overlap is reported as an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseFunction {
    pub variables: Vec<String>,
    pub pieces: Vec<(Condition, Term)>,
}

impl PiecewiseFunction {
    pub fn evaluate(&self, ctx: PrimeContext, point: &Point) -> Result<PadicScalar, TermError> {
        let mut chosen: Option<usize> = None;
        for (i, (cond, _)) in self.pieces.iter().enumerate() {
            if cond.evaluate(ctx, point)? {
                if let Some(first) = chosen {
                    return Err(TermError::PieceOverlap { first, second: i, point: render_point(point) });
                }
                chosen = Some(i);
            }
        }
        match chosen {
            Some(i) => self.pieces[i].1.evaluate(ctx, point),
            None => Err(TermError::NoPieceApplies(render_point(point))),
        }
    }
}

/// Either a single term or a function given by cases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Function {
    Term(Term),
    Piecewise(PiecewiseFunction),
}

impl Function {
    pub fn evaluate(&self, ctx: PrimeContext, point: &Point) -> Result<PadicScalar, TermError> {
        match self {
            Function::Term(t) => t.evaluate(ctx, point),
            Function::Piecewise(pw) => pw.evaluate(ctx, point),
        }
    }

    pub fn variables(&self) -> Vec<String> {
        match self {
            Function::Term(t) => t.variables(),
            Function::Piecewise(pw) => pw.variables.clone(),
        }
    }
}

impl From<Term> for Function {
    fn from(t: Term) -> Function {
        Function::Term(t)
    }
}

pub fn render_point(point: &Point) -> String {
    let parts: Vec<String> = point.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("({})", parts.join(", "))
}
