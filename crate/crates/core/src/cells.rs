//! `p`-adic cells, their maximal balls, and fitting cells to a family of
//! balls.
//!
//! A cell over a base is the set of `(t, y)` with `y` in the base,
//! `|α(y)| < |t - c(y)| < |β(y)|` (either comparison may be absent) and
//! `t - c(y) ∈ λ·Q_{m,n}`. A 1-cell (`λ ≠ 0`) is a disjoint union of balls
//! `{w : ord(w - c) = a, ac_m(w - c) = ac_m(λ)}`, one for each admissible
//! level `a`.

use std::fmt;

use thiserror::Error;

use crate::qp::{CosetSpec, PadicScalar, PrimeContext, Valuation};
use crate::regions::{Ball, Window};
use crate::terms::{parse_condition, parse_term, CmpOp, Condition, Point, Term, TermError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CellError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("a 0-cell has no balls")]
    ZeroCellHasNoBalls,
    #[error("{0} is not in the cell")]
    NotInCell(String),
    #[error("every candidate center lies inside one of the balls")]
    NoCandidateFits,
    #[error("balls {0} and {1} are not disjoint")]
    BallsOverlap(String, String),
    #[error("invalid cell literal: {0}")]
    BadLiteral(String),
    #[error("cell has no lower level bound, cannot enumerate without a window")]
    Unbounded,
}

/// Admissible levels `a = ord(t - c)` of a cell above a base point, before
/// the congruence `a ≡ ord(λ) (mod n)` is applied. `None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelRange {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
    pub empty: bool,
}

impl LevelRange {
    pub fn contains(&self, a: i64) -> bool {
        !self.empty && self.lo.is_none_or(|lo| lo <= a) && self.hi.is_none_or(|hi| a <= hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub base_vars: Vec<String>,
    pub fiber_var: String,
    pub base_condition: Condition,
    pub center: Term,
    /// Present: `|α(y)| < |t - c(y)|`.
    pub alpha: Option<Term>,
    /// Present: `|t - c(y)| < |β(y)|`.
    pub beta: Option<Term>,
    pub coset: CosetSpec,
}

/// The ball `{w : ord(w - c) = a, ac_m(w - c) = ξ}`.
pub fn level_ball(center: &PadicScalar, level: i64, xi: u64, m: u32) -> Ball {
    let ctx = center.ctx();
    let offset = &ctx.power(level) * &ctx.int(xi as i64);
    Ball::new(center + &offset, level + m as i64)
}

impl Cell {
    /// A cell over a point base with constant center and level bounds
    /// `lo <= ord(t - c) <= hi` (either side optional).
    pub fn over_point(center: &PadicScalar, coset: CosetSpec, lo: Option<i64>, hi: Option<i64>) -> Cell {
        let ctx = center.ctx();
        Cell {
            base_vars: Vec::new(),
            fiber_var: "t".to_string(),
            base_condition: Condition::True,
            center: Term::constant(center),
            alpha: hi.map(|h| Term::constant(&ctx.power(h + 1))),
            beta: lo.map(|l| Term::constant(&ctx.power(l - 1))),
            coset,
        }
    }

    pub fn ctx(&self) -> PrimeContext {
        self.coset.lambda.ctx()
    }

    pub fn is_one_cell(&self) -> bool {
        !self.coset.is_zero_coset()
    }

    pub fn center_at(&self, y: &Point) -> Result<PadicScalar, CellError> {
        Ok(self.center.evaluate(self.ctx(), y)?)
    }

    pub fn level_range(&self, y: &Point) -> Result<LevelRange, CellError> {
        let ctx = self.ctx();
        let mut range = LevelRange { lo: None, hi: None, empty: false };
        if let Some(alpha) = &self.alpha {
            if let Valuation::Finite(v) = alpha.evaluate(ctx, y)?.ord() {
                range.hi = Some(v - 1);
            }
        }
        if let Some(beta) = &self.beta {
            match beta.evaluate(ctx, y)?.ord() {
                Valuation::Finite(v) => range.lo = Some(v + 1),
                Valuation::PlusInfinity => range.empty = true,
            }
        }
        if let (Some(lo), Some(hi)) = (range.lo, range.hi) {
            range.empty |= lo > hi;
        }
        Ok(range)
    }

    /// Whether `level` carries a ball of the cell above `y`.
    pub fn admits_level(&self, y: &Point, level: i64) -> Result<bool, CellError> {
        let Some(vl) = self.coset.lambda.ord_finite() else {
            return Ok(false);
        };
        Ok(self.base_condition.evaluate(self.ctx(), y)?
            && self.level_range(y)?.contains(level)
            && (level - vl).rem_euclid(self.coset.n as i64) == 0)
    }

    pub fn contains(&self, t: &PadicScalar, y: &Point) -> Result<bool, CellError> {
        if !self.base_condition.evaluate(self.ctx(), y)? {
            return Ok(false);
        }
        let d = t - &self.center_at(y)?;
        if !self.coset.contains(&d) {
            return Ok(false);
        }
        let range = self.level_range(y)?;
        Ok(match d.ord() {
            Valuation::Finite(a) => range.contains(a),
            // The 0-cell: only the comparisons with the boundaries matter.
            Valuation::PlusInfinity => !range.empty && range.lo.is_none(),
        })
    }

    /// The maximal ball `B` with `t ∈ B` and `B × {y}` inside the cell,
    /// built as `c + (t - c)·(1 + p^m·Z_p)`.
    pub fn ball_of(&self, t: &PadicScalar, y: &Point) -> Result<Ball, CellError> {
        if !self.is_one_cell() {
            return Err(CellError::ZeroCellHasNoBalls);
        }
        if !self.contains(t, y)? {
            return Err(CellError::NotInCell(t.to_string()));
        }
        let c = self.center_at(y)?;
        let d = t - &c;
        let a = d.ord_finite().expect("t - c is nonzero in a 1-cell");
        let ball = Ball::new(t.clone(), a + self.coset.m as i64);
        debug_assert_eq!(ball, level_ball(&c, a, self.coset.lambda.ac(self.coset.m).residue, self.coset.m));
        Ok(ball)
    }

    /// The balls of the cell above `y` whose level `ord(w - c)` lies in
    /// `[w.v_min, w.v_max]`, in increasing level order.
    pub fn enumerate_balls(&self, y: &Point, w: &Window) -> Result<Vec<Ball>, CellError> {
        if !self.is_one_cell() {
            return Err(CellError::ZeroCellHasNoBalls);
        }
        let c = self.center_at(y)?;
        let xi = self.coset.lambda.ac(self.coset.m).residue;
        let mut out = Vec::new();
        for a in w.levels() {
            if self.admits_level(y, a)? {
                out.push(level_ball(&c, a, xi, self.coset.m));
            }
        }
        Ok(out)
    }

    /// Levels of the cell above `y`, with an unbounded side capped at
    /// `span` levels past the finite one. Fails when both sides are open.
    pub fn capped_levels(&self, y: &Point, span: i64) -> Result<Vec<i64>, CellError> {
        let range = self.level_range(y)?;
        if range.empty || !self.is_one_cell() {
            return Ok(Vec::new());
        }
        let (lo, hi) = match (range.lo, range.hi) {
            (Some(lo), Some(hi)) => (lo, hi),
            (Some(lo), None) => (lo, lo + span),
            (None, Some(hi)) => (hi - span, hi),
            (None, None) => return Err(CellError::Unbounded),
        };
        let mut out = Vec::new();
        for a in lo..=hi {
            if self.admits_level(y, a)? {
                out.push(a);
            }
        }
        Ok(out)
    }

    /// The cell as a condition in the base and fiber variables.
    pub fn region_condition(&self) -> Condition {
        let d = Term::minus(Term::var(&self.fiber_var), self.center.clone());
        let mut cond = Condition::CosetMember {
            term: d.clone(),
            lambda: self.coset.lambda.value().clone(),
            m: self.coset.m,
            n: self.coset.n,
        };
        if let Some(a) = &self.alpha {
            cond = Condition::and(cond, Condition::NormCmp(a.clone(), CmpOp::Less, d.clone()));
        }
        if let Some(b) = &self.beta {
            cond = Condition::and(cond, Condition::NormCmp(d, CmpOp::Less, b.clone()));
        }
        Condition::and(self.base_condition.clone(), cond)
    }

    /// Parses `cell(center=<term>; coset=<rat>*Q(<m>,<n>); <bounds>; base=<cond>)`
    /// where `<bounds>` is `ord in [a,b]`, `ord > a`, `ord < b` or `all`.
    /// `alpha=<term>`, `beta=<term>` and `var=<name>` parts are also accepted.
    pub fn parse(ctx: PrimeContext, text: &str) -> Result<Cell, CellError> {
        let bad = |m: &str| CellError::BadLiteral(format!("{m} in `{text}`"));
        let body = text
            .trim()
            .strip_prefix("cell(")
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| bad("expected cell(...)"))?;
        let mut center = None;
        let mut coset = None;
        let mut alpha = None;
        let mut beta = None;
        let mut base = Condition::True;
        let mut fiber = "t".to_string();
        for part in body.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let pow = |k: i64| Some(Term::constant(&ctx.power(k)));
            if let Some(v) = part.strip_prefix("center=") {
                center = Some(parse_term(v)?);
            } else if let Some(v) = part.strip_prefix("coset=") {
                coset = Some(parse_coset(ctx, v).ok_or_else(|| bad("bad coset"))?);
            } else if let Some(v) = part.strip_prefix("base=") {
                base = parse_condition(v)?;
            } else if let Some(v) = part.strip_prefix("var=") {
                fiber = v.trim().to_string();
            } else if let Some(v) = part.strip_prefix("alpha=") {
                alpha = Some(parse_term(v)?);
            } else if let Some(v) = part.strip_prefix("beta=") {
                beta = Some(parse_term(v)?);
            } else if part == "all" {
            } else if let Some(v) = part.strip_prefix("ord in") {
                let v = v.trim().strip_prefix('[').and_then(|s| s.strip_suffix(']'));
                let (a, b) = v.and_then(|s| s.split_once(',')).ok_or_else(|| bad("bad range"))?;
                let a: i64 = a.trim().parse().map_err(|_| bad("bad range"))?;
                let b: i64 = b.trim().parse().map_err(|_| bad("bad range"))?;
                alpha = pow(b + 1);
                beta = pow(a - 1);
            } else if let Some(v) = part.strip_prefix("ord >") {
                beta = pow(v.trim().parse().map_err(|_| bad("bad bound"))?);
            } else if let Some(v) = part.strip_prefix("ord <") {
                alpha = pow(v.trim().parse().map_err(|_| bad("bad bound"))?);
            } else {
                return Err(bad(&format!("unknown part `{part}`")));
            }
        }
        let center = center.ok_or_else(|| bad("missing center"))?;
        let coset = coset.ok_or_else(|| bad("missing coset"))?;
        let mut base_vars: Vec<String> = center.variables();
        for t in [&alpha, &beta].into_iter().flatten() {
            base_vars.extend(t.variables());
        }
        base_vars.retain(|v| *v != fiber);
        base_vars.dedup();
        Ok(Cell { base_vars, fiber_var: fiber, base_condition: base, center, alpha, beta, coset })
    }
}

/// Parses `λ*Q(m,n)`.
pub fn parse_coset(ctx: PrimeContext, text: &str) -> Option<CosetSpec> {
    let (lambda, rest) = text.trim().split_once('*')?;
    let inner = rest.trim().strip_prefix("Q(")?.strip_suffix(')')?;
    let (m, n) = inner.split_once(',')?;
    let lambda = ctx.parse(lambda).ok()?;
    CosetSpec::new(lambda, m.trim().parse().ok()?, n.trim().parse().ok()?).ok()
}

fn constant_ord(t: &Option<Term>, ctx: PrimeContext) -> Option<Option<i64>> {
    match t {
        None => Some(None),
        Some(Term::Const(c)) => PadicScalar::new(ctx, c.clone()).ord_finite().map(Some),
        Some(_) => None,
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cell(center={}; coset={}", self.center, self.coset)?;
        let ctx = self.ctx();
        match (constant_ord(&self.alpha, ctx), constant_ord(&self.beta, ctx)) {
            (Some(None), Some(None)) => write!(f, "; all")?,
            (Some(Some(a)), Some(Some(b))) => write!(f, "; ord in [{},{}]", b + 1, a - 1)?,
            (Some(Some(a)), Some(None)) => write!(f, "; ord < {a}")?,
            (Some(None), Some(Some(b))) => write!(f, "; ord > {b}")?,
            _ => {
                if let Some(a) = &self.alpha {
                    write!(f, "; alpha={a}")?;
                }
                if let Some(b) = &self.beta {
                    write!(f, "; beta={b}")?;
                }
            }
        }
        if self.fiber_var != "t" {
            write!(f, "; var={}", self.fiber_var)?;
        }
        if self.base_condition != Condition::True {
            write!(f, "; base={}", self.base_condition)?;
        }
        write!(f, ")")
    }
}

/// Describes `ball` relative to an outside point `d` as
/// `{w : ord(w - d) = b, ac_n(w - d) = ξ}`; `None` when `d ∈ ball`.
pub fn ball_profile(ball: &Ball, d: &PadicScalar) -> Option<(i64, u32, u64)> {
    let diff = &ball.center - d;
    let b = diff.ord_finite()?;
    if b >= ball.radius_ord {
        return None;
    }
    let n = (ball.radius_ord - b) as u32;
    Some((b, n, diff.ac(n).residue))
}

/// Writes a disjoint family of balls as a minimal list of cells over a point
/// base, trying each candidate center in turn and keeping the first one that
/// needs the fewest cells.
pub fn fit_cell(balls: &[Ball], candidates: &[PadicScalar]) -> Result<Vec<Cell>, CellError> {
    for (i, a) in balls.iter().enumerate() {
        for b in &balls[i + 1..] {
            if !a.is_disjoint(b) {
                return Err(CellError::BallsOverlap(a.to_string(), b.to_string()));
            }
        }
    }
    let mut best: Option<Vec<Cell>> = None;
    for d in candidates {
        let Some(cells) = fit_with_center(balls, d) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| cells.len() < b.len()) {
            best = Some(cells);
        }
    }
    best.ok_or(CellError::NoCandidateFits)
}

fn fit_with_center(balls: &[Ball], d: &PadicScalar) -> Option<Vec<Cell>> {
    let ctx = d.ctx();
    // (depth n, residue ξ) -> levels, in first-seen order.
    let mut groups: Vec<((u32, u64), Vec<i64>)> = Vec::new();
    for ball in balls {
        let (b, n, xi) = ball_profile(ball, d)?;
        match groups.iter_mut().find(|(key, _)| *key == (n, xi)) {
            Some((_, levels)) => levels.push(b),
            None => groups.push(((n, xi), vec![b])),
        }
    }
    let mut cells = Vec::new();
    for ((n, xi), mut levels) in groups {
        levels.sort_unstable();
        for run in partition_into_progressions(&levels) {
            let lambda = &ctx.power(run.start) * &ctx.int(xi as i64);
            let coset = CosetSpec::new(lambda, n, run.step as u32).expect("positive");
            cells.push(Cell::over_point(d, coset, Some(run.start), Some(run.end)));
        }
    }
    Some(cells)
}

/// `start, start + step, ..., end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progression {
    pub start: i64,
    pub step: i64,
    pub end: i64,
}

impl Progression {
    fn len(&self) -> i64 {
        (self.end - self.start) / self.step + 1
    }
}

/// Sets larger than this are split greedily instead of by exhaustive search.
const EXACT_PARTITION_LIMIT: usize = 16;

/// Partitions a sorted set of distinct integers into as few arithmetic
/// progressions as possible (singletons use step 1).
pub fn partition_into_progressions(levels: &[i64]) -> Vec<Progression> {
    if levels.is_empty() {
        return Vec::new();
    }
    if levels.len() > EXACT_PARTITION_LIMIT {
        return greedy_progressions(levels);
    }
    let mut best = greedy_progressions(levels);
    let mut current = Vec::new();
    search(levels.to_vec(), &mut current, &mut best);
    best
}

fn search(rest: Vec<i64>, current: &mut Vec<Progression>, best: &mut Vec<Progression>) {
    if rest.is_empty() {
        if current.len() < best.len() {
            *best = current.clone();
        }
        return;
    }
    if current.len() + 1 >= best.len() {
        return;
    }
    let start = rest[0];
    let mut options = vec![Progression { start, step: 1, end: start }];
    for &next in &rest[1..] {
        let step = next - start;
        let mut end = start;
        while rest.binary_search(&(end + step)).is_ok() {
            end += step;
            options.push(Progression { start, step, end });
        }
    }
    options.sort_by_key(|p| -p.len());
    for prog in options {
        let remaining: Vec<i64> = rest
            .iter()
            .copied()
            .filter(|x| !(*x >= prog.start && *x <= prog.end && (x - prog.start) % prog.step == 0))
            .collect();
        current.push(prog);
        search(remaining, current, best);
        current.pop();
    }
}

fn greedy_progressions(levels: &[i64]) -> Vec<Progression> {
    let mut rest = levels.to_vec();
    let mut out = Vec::new();
    while let Some(&start) = rest.first() {
        let mut prog = Progression { start, step: 1, end: start };
        if let Some(&next) = rest.get(1) {
            let step = next - start;
            let mut end = start;
            while rest.binary_search(&(end + step)).is_ok() {
                end += step;
            }
            prog = Progression { start, step, end };
        }
        rest.retain(|x| !(*x >= prog.start && *x <= prog.end && (x - prog.start) % prog.step == 0));
        out.push(prog);
    }
    out
}
