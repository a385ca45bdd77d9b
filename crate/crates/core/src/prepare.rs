//! Cell decomposition with a monomial norm form for products of linear
//! factors `f(t) = u·∏(t - c_i)^{a_i}`.
//!
//! On every output piece `ord f(t) = H + a·ord(t - c)` for a fixed center
//! `c`, exponent `a` and constant `H`.
//!
//! The decomposition works ball by ball around a current center. The region
//! `{ord(t - c) ∈ levels}` is split into the balls
//! `{ord(t - c) = ℓ, ac_m(t - c) = ξ}`. A ball holding no factor center sees
//! every factor at constant valuation, so `ord f` is a function `g(ℓ)` of
//! the level alone for each class `ξ`; consecutive levels on which `g` is
//! affine become one cell. A ball holding factor centers is re-centered at
//! the first of them and handled recursively over all deeper levels.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cells::{ball_profile, Cell};
use crate::qp::{CosetSpec, PadicScalar, PrimeContext};
use crate::regions::{Ball, Window};
use crate::terms::{parse_term, Point, Term, TermError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrepareError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("not a product of linear factors: {0}")]
    NotFactored(String),
    #[error("the unit coefficient must be nonzero")]
    ZeroCoefficient,
    #[error("ac depth must be at least 1")]
    NonPositiveDepth,
}

/// `u·∏(t - c_i)^{a_i}` with distinct centers and nonzero exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredTerm {
    pub var: String,
    pub unit: PadicScalar,
    pub factors: Vec<(PadicScalar, i64)>,
}

impl FactoredTerm {
    /// Builds the product, merging repeated centers and dropping factors
    /// whose exponents cancel.
    pub fn new(var: &str, unit: PadicScalar, factors: Vec<(PadicScalar, i64)>) -> Result<Self, PrepareError> {
        if unit.is_zero() {
            return Err(PrepareError::ZeroCoefficient);
        }
        let mut merged: Vec<(PadicScalar, i64)> = Vec::new();
        for (c, a) in factors {
            match merged.iter_mut().find(|(d, _)| *d == c) {
                Some((_, b)) => *b += a,
                None => merged.push((c, a)),
            }
        }
        merged.retain(|(_, a)| *a != 0);
        Ok(Self { var: var.to_string(), unit, factors: merged })
    }

    /// Recognizes a product (or quotient) of constants and powers of
    /// `t`, `t - c`, `t + c` in a parsed term.
    pub fn from_term(ctx: PrimeContext, term: &Term) -> Result<Self, PrepareError> {
        let vars = term.variables();
        if vars.len() > 1 {
            return Err(PrepareError::NotFactored(term.to_string()));
        }
        let var = vars.first().cloned().unwrap_or_else(|| "t".to_string());
        let mut unit = ctx.one();
        let mut factors = Vec::new();
        collect_factors(ctx, term, 1, &var, &mut unit, &mut factors)
            .ok_or_else(|| PrepareError::NotFactored(term.to_string()))?;
        Self::new(&var, unit, factors)
    }

    pub fn parse(ctx: PrimeContext, text: &str) -> Result<Self, PrepareError> {
        Self::from_term(ctx, &parse_term(text)?)
    }

    pub fn ctx(&self) -> PrimeContext {
        self.unit.ctx()
    }

    pub fn centers(&self) -> impl Iterator<Item = &PadicScalar> {
        self.factors.iter().map(|(c, _)| c)
    }

    pub fn is_center(&self, t: &PadicScalar) -> bool {
        self.centers().any(|c| c == t)
    }

    /// The expanded term `u * (t - c_1)^a_1 * ...`.
    pub fn to_term(&self) -> Term {
        let t = Term::var(&self.var);
        self.factors.iter().fold(Term::constant(&self.unit), |acc, (c, a)| {
            let base = if c.is_zero() { t.clone() } else { Term::minus(t.clone(), Term::constant(c)) };
            Term::times(acc, Term::power(base, *a))
        })
    }

    /// `ord f(t)` from the factor valuations; `None` at a center.
    pub fn ord_at(&self, t: &PadicScalar) -> Option<i64> {
        let mut total = self.unit.ord_finite()?;
        for (c, a) in &self.factors {
            total += a * (t - c).ord_finite()?;
        }
        Some(total)
    }

    /// `f(t)` by multiplying the factors out.
    pub fn evaluate(&self, t: &PadicScalar) -> Option<PadicScalar> {
        let mut value = self.unit.clone();
        for (c, a) in &self.factors {
            value = value * (t - c).checked_pow(*a).ok()?;
        }
        Some(value)
    }
}

fn collect_factors(
    ctx: PrimeContext,
    term: &Term,
    sign: i64,
    var: &str,
    unit: &mut PadicScalar,
    factors: &mut Vec<(PadicScalar, i64)>,
) -> Option<()> {
    let scalar = |c: &num_rational::BigRational| PadicScalar::new(ctx, c.clone());
    match term {
        Term::Const(c) => *unit = &*unit * &scalar(c).checked_pow(sign).ok()?,
        Term::Neg(a) => {
            *unit = -unit.clone();
            collect_factors(ctx, a, sign, var, unit, factors)?;
        }
        Term::Mul(a, b) => {
            collect_factors(ctx, a, sign, var, unit, factors)?;
            collect_factors(ctx, b, sign, var, unit, factors)?;
        }
        Term::Div(a, b) => {
            collect_factors(ctx, a, sign, var, unit, factors)?;
            collect_factors(ctx, b, -sign, var, unit, factors)?;
        }
        Term::Pow(a, k) => collect_factors(ctx, a, sign * k, var, unit, factors)?,
        _ => factors.push((linear_center(ctx, term, var)?, sign)),
    }
    Some(())
}

/// The root `c` of a linear factor `t`, `t - c` or `t + c`.
fn linear_center(ctx: PrimeContext, term: &Term, var: &str) -> Option<PadicScalar> {
    match term {
        Term::Var(v) if v == var => Some(ctx.zero()),
        Term::Sub(a, b) => match (a.as_ref(), b.as_ref()) {
            (Term::Var(v), Term::Const(c)) if v == var => Some(PadicScalar::new(ctx, c.clone())),
            _ => None,
        },
        Term::Add(a, b) => match (a.as_ref(), b.as_ref()) {
            (Term::Var(v), Term::Const(c)) | (Term::Const(c), Term::Var(v)) if v == var => {
                Some(-PadicScalar::new(ctx, c.clone()))
            }
            _ => None,
        },
        _ => None,
    }
}

impl fmt::Display for FactoredTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.unit)?;
        for (c, a) in &self.factors {
            write!(f, " * ({} - {})^{}", self.var, c, a)?;
        }
        Ok(())
    }
}

/// A cell on which `ord f(t) = h_exponent + a·ord(t - center)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedPiece {
    pub cell: Cell,
    pub center: PadicScalar,
    /// Index of the factor whose root is `center`; `None` for an auxiliary
    /// center.
    pub center_index: Option<usize>,
    pub a: i64,
    pub h_exponent: i64,
}

#[derive(Serialize)]
struct PieceJson {
    cell: String,
    center: String,
    center_index: Option<usize>,
    a: i64,
    h_exponent: i64,
}

impl Serialize for PreparedPiece {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PieceJson {
            cell: self.cell.to_string(),
            center: self.center.to_string(),
            center_index: self.center_index,
            a: self.a,
            h_exponent: self.h_exponent,
        }
        .serialize(s)
    }
}

impl fmt::Display for PreparedPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.center.p();
        write!(f, "{}: |f| = {}^{}·|t - {}|^{}", self.cell, p, -self.h_exponent, self.center, self.a)
    }
}

struct Preparer<'a> {
    f: &'a FactoredTerm,
    ctx: PrimeContext,
    m: u32,
    pieces: Vec<PreparedPiece>,
}

/// Decomposes `{t : ord(t) ∈ [w.v_min, w.v_max]}` minus the centers of `f`
/// into prepared pieces, splitting by `ac_{m_depth}` classes.
pub fn prepare(f: &FactoredTerm, w: &Window, m_depth: u32) -> Result<Vec<PreparedPiece>, PrepareError> {
    if m_depth < 1 {
        return Err(PrepareError::NonPositiveDepth);
    }
    let ctx = f.ctx();
    let mut state = Preparer { f, ctx, m: m_depth, pieces: Vec::new() };
    state.handle(&ctx.zero(), w.v_min, Some(w.v_max));
    let mut pieces = state.pieces;
    // Auxiliary centers sort after the factor centers.
    pieces.sort_by_cached_key(|piece| {
        let lo = piece.cell.level_range(&Point::new()).ok().and_then(|r| r.lo).unwrap_or(i64::MIN);
        let coset = &piece.cell.coset;
        (piece.center_index.unwrap_or(usize::MAX), lo, coset.lambda.ac(coset.m).residue)
    });
    Ok(pieces)
}

impl Preparer<'_> {
    fn units(&self) -> Vec<i64> {
        let p = self.ctx.p();
        (1..self.ctx.modulus(self.m)).filter(|u| u % p != 0).map(|u| u as i64).collect()
    }

    fn index_of(&self, c: &PadicScalar) -> Option<usize> {
        self.f.factors.iter().position(|(d, _)| d == c)
    }

    /// Covers `{ord(t - c) ∈ [lo, hi]}` (`hi = None`: unbounded).
    fn handle(&mut self, c: &PadicScalar, lo: i64, hi: Option<i64>) {
        let top = hi.unwrap_or_else(|| {
            let spread = self.f.centers().filter_map(|d| (d - c).ord_finite()).max().unwrap_or(lo);
            spread.max(lo) + 3
        });
        for xi in self.units() {
            let mut open: Vec<(i64, i64)> = Vec::new();
            for level in lo..=top {
                let ball = Ball::new(c + &(&self.ctx.power(level) * &self.ctx.int(xi)), level + self.m as i64);
                match self.f.centers().find(|d| ball.contains(d)).cloned() {
                    Some(inner) => {
                        self.flush(c, xi, &mut open, false);
                        self.handle(&inner, ball.radius_ord, None);
                    }
                    None => open.push((level, self.f.ord_at(&ball.center).expect("ball avoids centers"))),
                }
            }
            self.flush(c, xi, &mut open, hi.is_none());
        }
    }

    /// Turns a stretch of consecutive unblocked levels into cells, one per
    /// maximal run on which `g(ℓ)` is affine. With `unbounded`, the last run
    /// continues past the computed levels.
    fn flush(&mut self, c: &PadicScalar, xi: i64, open: &mut Vec<(i64, i64)>, unbounded: bool) {
        let levels = std::mem::take(open);
        let mut start = 0;
        while start < levels.len() {
            let mut end = start;
            let slope = levels.get(start + 1).map_or(0, |next| next.1 - levels[start].1);
            while end + 1 < levels.len() && levels[end + 1].1 - levels[end].1 == slope {
                end += 1;
            }
            let a = if end > start { slope } else { 0 };
            let (lo, g_lo) = levels[start];
            let hi = if unbounded && end + 1 == levels.len() { None } else { Some(levels[end].0) };
            self.emit(c, xi, lo, hi, a, g_lo - a * lo);
            start = end + 1;
        }
    }

    fn emit(&mut self, c: &PadicScalar, xi: i64, lo: i64, hi: Option<i64>, a: i64, h: i64) {
        let coset = CosetSpec::new(self.ctx.int(xi), self.m, 1).expect("positive depth");
        if hi == Some(lo) && lo == 0 {
            // At level 0 the identity cannot see `a`; describe the ball from a
            // center at nonzero distance instead.
            let ball = Ball::new(c + &self.ctx.int(xi), self.m as i64);
            self.pieces.push(self.recentered(&ball, a, h));
            return;
        }
        self.pieces.push(PreparedPiece {
            cell: Cell::over_point(c, coset, Some(lo), hi),
            center: c.clone(),
            center_index: self.index_of(c),
            a,
            h_exponent: h,
        });
    }

    fn recentered(&self, ball: &Ball, a: i64, h_at_zero: i64) -> PreparedPiece {
        let g = h_at_zero;
        let r = ball.radius_ord;
        let aux = self.ctx.power(if r - 1 != 0 { r - 1 } else { r - 2 });
        let candidates = self.f.centers().cloned().chain([self.ctx.zero(), &ball.center + &aux]);
        for d in candidates {
            let Some((b, n, xi)) = ball_profile(ball, &d) else {
                continue;
            };
            if b == 0 {
                continue;
            }
            let coset = CosetSpec::new(self.ctx.int(xi as i64), n, 1).expect("positive depth");
            return PreparedPiece {
                cell: Cell::over_point(&d, coset, Some(b), Some(b)),
                center_index: self.index_of(&d),
                center: d,
                a,
                h_exponent: g - a * b,
            };
        }
        unreachable!("the auxiliary center sits at nonzero distance")
    }
}

/// Checks `ord f(t) = H + a·ord(t - c)` at the depth-`M` representatives
/// of every ball of the piece; a level range open above is checked over its
/// first `M + 1` levels. Returns the first failing point.
pub fn verify_prepared(f: &FactoredTerm, piece: &PreparedPiece, depth: u32) -> Option<PadicScalar> {
    let origin = Point::new();
    let levels = piece.cell.capped_levels(&origin, depth as i64).ok()?;
    let (Some(&lo), Some(&hi)) = (levels.first(), levels.last()) else {
        return None;
    };
    let window = Window::new(lo, hi, 1).expect("ordered levels");
    let balls = piece.cell.enumerate_balls(&origin, &window).ok()?;
    let sub_depth = depth.saturating_sub(piece.cell.coset.m);
    for ball in balls {
        for t in ball.representatives(sub_depth) {
            let expected = (&t - &piece.center).ord_finite().map(|d| piece.h_exponent + piece.a * d);
            let actual = f.ord_at(&t);
            if actual.is_none() || actual != expected {
                return Some(t);
            }
        }
    }
    None
}

/// Points of the window's depth-`M` enumeration (plus the centers) that are
/// covered by no piece or by more than one, or that are centers lying in a
/// piece.
pub fn coverage_defects(f: &FactoredTerm, pieces: &[PreparedPiece], w: &Window) -> Vec<PadicScalar> {
    let origin = Point::new();
    let hits = |t: &PadicScalar| pieces.iter().filter(|p| p.cell.contains(t, &origin).unwrap_or(false)).count();
    let mut defects = Vec::new();
    for t in crate::regions::enumerate(w, f.ctx()).points {
        let expected = usize::from(!f.is_center(&t));
        if hits(&t) != expected {
            defects.push(t);
        }
    }
    for c in f.centers() {
        if hits(c) != 0 {
            defects.push(c.clone());
        }
    }
    defects
}
