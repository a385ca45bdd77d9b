use std::fmt;

use num_traits::Signed;

use super::{CmpOp, Condition, Term};

// Printing precedence levels; an operand printed below its required level
// gets parentheses. The output re-parses to the same tree.
const SUM: u8 = 1;
const PROD: u8 = 2;
const UNARY: u8 = 3;
const ATOM: u8 = 5;

fn term_level(t: &Term) -> u8 {
    match t {
        Term::Add(..) | Term::Sub(..) => SUM,
        Term::Mul(..) | Term::Div(..) => PROD,
        Term::Neg(_) => UNARY,
        Term::Const(c) if c.is_negative() => UNARY,
        Term::Pow(..) => 4,
        _ => ATOM,
    }
}

fn write_term(t: &Term, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if term_level(t) < min {
        write!(f, "(")?;
        write_term(t, SUM, f)?;
        return write!(f, ")");
    }
    match t {
        Term::Var(v) => write!(f, "{v}"),
        Term::Const(c) => {
            if c.is_integer() {
                write!(f, "{}", c.numer())
            } else {
                write!(f, "{}/{}", c.numer(), c.denom())
            }
        }
        Term::Add(a, b) => binary(a, " + ", b, SUM, f),
        Term::Sub(a, b) => binary(a, " - ", b, SUM, f),
        Term::Mul(a, b) => binary(a, " * ", b, PROD, f),
        Term::Div(a, b) => binary(a, " / ", b, PROD, f),
        Term::Neg(a) => {
            write!(f, "-")?;
            // `-3` would re-parse as a negative literal.
            if matches!(**a, Term::Const(_)) {
                write!(f, "(")?;
                write_term(a, SUM, f)?;
                write!(f, ")")
            } else {
                write_term(a, UNARY, f)
            }
        }
        Term::Pow(a, k) => {
            write_term(a, ATOM, f)?;
            if *k < 0 {
                write!(f, "^({k})")
            } else {
                write!(f, "^{k}")
            }
        }
        Term::NormVal(a) => {
            write!(f, "normval(")?;
            write_term(a, SUM, f)?;
            write!(f, ")")
        }
        Term::Builtin(name, args) => {
            write!(f, "{name}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_term(a, SUM, f)?;
            }
            write!(f, ")")
        }
    }
}

fn binary(a: &Term, op: &str, b: &Term, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write_term(a, level, f)?;
    write!(f, "{op}")?;
    write_term(b, level + 1, f)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, SUM, f)
    }
}

const OR: u8 = 1;
const AND: u8 = 2;
const LIT: u8 = 3;

fn cond_level(c: &Condition) -> u8 {
    match c {
        Condition::Or(..) => OR,
        Condition::And(..) => AND,
        _ => LIT,
    }
}

fn write_cond(c: &Condition, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if cond_level(c) < min {
        write!(f, "(")?;
        write_cond(c, OR, f)?;
        return write!(f, ")");
    }
    match c {
        Condition::True => write!(f, "true"),
        Condition::NormCmp(a, op, b) => {
            let op = match op {
                CmpOp::Less => "<",
                CmpOp::LessEq => "<=",
                CmpOp::Equal => "=",
            };
            write!(f, "|{a}| {op} |{b}|")
        }
        Condition::OrdCongruence { term, modulus, residue } => {
            write!(f, "ord({term}) % {modulus} = {residue}")
        }
        Condition::CosetMember { term, lambda, m, n } => {
            write!(f, "{term} in ")?;
            if lambda.is_integer() {
                write!(f, "{}", lambda.numer())?;
            } else {
                write!(f, "{}/{}", lambda.numer(), lambda.denom())?;
            }
            write!(f, "*Q({m},{n})")
        }
        Condition::And(a, b) => {
            write_cond(a, AND, f)?;
            write!(f, " && ")?;
            write_cond(b, LIT, f)
        }
        Condition::Or(a, b) => {
            write_cond(a, OR, f)?;
            write!(f, " || ")?;
            write_cond(b, AND, f)
        }
        Condition::Not(a) => {
            write!(f, "!")?;
            write_cond(a, LIT, f)
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_cond(self, OR, f)
    }
}
