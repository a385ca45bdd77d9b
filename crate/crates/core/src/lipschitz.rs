//! Lipschitz constants: empirical lower bounds over representatives,
//! certified upper bounds for cells with `m = 1` base dimension, the
//! bounded-derivative check, and the two classical counterexamples.
//!
//! Constants are exponents: `k` stands for `C = p^k`.

use std::fmt;

use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::cells::{Cell, CellError};
use crate::jacobian::{fiber_variable, BallCorrespondence, JacobianError};
use crate::qp::{PadicScalar, PrimeContext, Valuation};
use crate::regions::{enumerate, Ball, Window};
use crate::terms::{render_point, Condition, Function, Point, Term, TermError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LipschitzError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error(transparent)]
    Jacobian(#[from] JacobianError),
    #[error("no representative satisfies the region condition")]
    EmptyRegion,
    #[error("cell center is not 0: {0}")]
    CenterNotZero(String),
    #[error("ball {0} has no Jacobian certificate")]
    NotCertified(String),
    #[error("ball {ball}: jac_ord {jac_ord} exceeds epsilon = p^{epsilon}")]
    EpsilonTooSmall { ball: String, jac_ord: i64, epsilon: i64 },
    #[error("image ball {0} is not a ball of any fitted image cell")]
    ImageOutsideCells(String),
    #[error("ledger identity broken on {ball}: {detail}")]
    LedgerIdentityViolated { ball: String, detail: String },
    #[error("failed to start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LipschitzMode {
    EmpiricalLowerBound,
    CertifiedUpperBound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LipschitzReport {
    pub mode: LipschitzMode,
    /// `C = p^k`; `None` when every difference of values vanishes (`C = 0`).
    #[serde(rename = "C_exponent")]
    pub constant_exponent: Option<i64>,
    #[serde(serialize_with = "witness_json")]
    pub witness: Option<(Point, Point)>,
    pub depth: u32,
    pub region: String,
}

fn render_coords(p: &Point) -> String {
    if p.len() == 1 {
        p.values().next().expect("one coordinate").to_string()
    } else {
        render_point(p)
    }
}

fn witness_json<S: Serializer>(w: &Option<(Point, Point)>, s: S) -> Result<S::Ok, S::Error> {
    match w {
        None => s.serialize_none(),
        Some((a, b)) => {
            let mut seq = s.serialize_seq(Some(2))?;
            seq.serialize_element(&render_coords(a))?;
            seq.serialize_element(&render_coords(b))?;
            seq.end()
        }
    }
}

impl fmt::Display for LipschitzReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.mode {
            LipschitzMode::EmpiricalLowerBound => "lower bound, verified to depth",
            LipschitzMode::CertifiedUpperBound => "certified upper bound, depth",
        };
        match self.constant_exponent {
            Some(k) => write!(f, "C = p^{k}")?,
            None => write!(f, "C = 0")?,
        }
        write!(f, " ({kind} {}) on {}", self.depth, self.region)?;
        if let Some((a, b)) = &self.witness {
            write!(f, "; witness ({}, {})", render_coords(a), render_coords(b))?;
        }
        Ok(())
    }
}

/// `ord` of a tuple difference: the minimum coordinate valuation.
fn tuple_distance_ord(a: &Point, b: &Point) -> Valuation {
    a.iter().map(|(k, x)| (x - &b[k]).ord()).min().unwrap_or(Valuation::PlusInfinity)
}

/// All points of the region: the product of the window's representatives
/// over `vars`, filtered by `region`.
pub fn region_points(
    vars: &[String],
    region: &Condition,
    w: &Window,
    ctx: PrimeContext,
) -> Result<Vec<Point>, LipschitzError> {
    let reps = enumerate(w, ctx).points;
    let mut points = vec![Point::new()];
    for v in vars {
        points = points
            .into_iter()
            .flat_map(|p| {
                reps.iter().map(move |x| {
                    let mut q = p.clone();
                    q.insert(v.clone(), x.clone());
                    q
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for p in points {
        if region.evaluate(ctx, &p)? {
            out.push(p);
        }
    }
    Ok(out)
}

/// Best pair found so far: ratio exponent, then the least index pair.
type Best = Option<(i64, usize, usize)>;

fn better(a: Best, b: Best) -> Best {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

/// The largest `|f(x_1) - f(x_2)| / |x_1 - x_2|` over pairs of region
/// representatives, with the first pair (by enumeration index) attaining
/// it. This bounds any valid Lipschitz constant from below.
///
/// `vars` lists the coordinates (defaults to the variables of `f`); tuple
/// distances use the max norm. `jobs > 1` scans pairs on a worker pool.
pub fn empirical_lipschitz(
    f: &Function,
    vars: Option<&[String]>,
    region: &Condition,
    w: &Window,
    ctx: PrimeContext,
    jobs: usize,
) -> Result<LipschitzReport, LipschitzError> {
    let vars: Vec<String> = match vars {
        Some(v) => v.to_vec(),
        None => {
            let v = f.variables();
            if v.is_empty() {
                vec!["t".to_string()]
            } else {
                v
            }
        }
    };
    let points = region_points(&vars, region, w, ctx)?;
    if points.is_empty() {
        return Err(LipschitzError::EmptyRegion);
    }
    let values: Vec<PadicScalar> = points.iter().map(|p| f.evaluate(ctx, p)).collect::<Result<_, _>>()?;
    let row = |i: usize| -> Best {
        let mut best = None;
        for j in i + 1..points.len() {
            let Valuation::Finite(dy) = (&values[i] - &values[j]).ord() else {
                continue;
            };
            let dx = tuple_distance_ord(&points[i], &points[j]).finite().expect("distinct points");
            best = better(best, Some((dx - dy, i, j)));
        }
        best
    };
    let best = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| LipschitzError::Pool(e.to_string()))?;
        pool.install(|| (0..points.len()).into_par_iter().map(row).reduce(|| None, better))
    } else {
        (0..points.len()).map(row).fold(None, better)
    };
    let region_text = format!("{region} on ord in [{}, {}]", w.v_min, w.v_max);
    Ok(LipschitzReport {
        mode: LipschitzMode::EmpiricalLowerBound,
        constant_exponent: best.map(|b| b.0),
        witness: best.map(|(_, i, j)| (points[i].clone(), points[j].clone())),
        depth: w.depth,
        region: region_text,
    })
}

/// The certified constant `C = ε·p^{max(0, m' - m)}` for `f` on a cell with
/// center 0 whose balls correspond to balls of image cells with center 0.
///
/// Checks, on every ball pair, that `|f'| <= ε = p^epsilon_exponent` and
/// the ledger identity `m + jac_ord + a = m' + b` with `a`, `b` the source
/// and image levels.
pub fn certified_cell_constant(
    cell: &Cell,
    corr: &BallCorrespondence,
    epsilon_exponent: i64,
) -> Result<LipschitzReport, LipschitzError> {
    let origin = Point::new();
    let is_zero_centered = |c: &Cell| c.center_at(&origin).map(|x| x.is_zero());
    if !is_zero_centered(cell)? {
        return Err(LipschitzError::CenterNotZero(cell.to_string()));
    }
    for image_cell in &corr.image_cells {
        if !is_zero_centered(image_cell)? {
            return Err(LipschitzError::CenterNotZero(image_cell.to_string()));
        }
    }
    let m = cell.coset.m as i64;
    let mut m_prime = m;
    let mut depth = 0;
    for ((src, img), cert) in corr.pairs.iter().zip(&corr.certificates) {
        let cert = cert.as_ref().ok_or_else(|| LipschitzError::NotCertified(src.to_string()))?;
        depth = depth.max(cert.verified_depth);
        if cert.jac_ord < -epsilon_exponent {
            return Err(LipschitzError::EpsilonTooSmall {
                ball: src.to_string(),
                jac_ord: cert.jac_ord,
                epsilon: epsilon_exponent,
            });
        }
        let a = level_of(src);
        let b = level_of(img);
        let image_cell = corr
            .image_cells
            .iter()
            .find(|c| c.contains(&img.center, &origin).unwrap_or(false) && ball_of(c, img) == Some(img.clone()))
            .ok_or_else(|| LipschitzError::ImageOutsideCells(img.to_string()))?;
        let mi = image_cell.coset.m as i64;
        m_prime = m_prime.max(mi);
        if m + cert.jac_ord + a != mi + b {
            return Err(LipschitzError::LedgerIdentityViolated {
                ball: src.to_string(),
                detail: format!("{m} + {} + {a} != {mi} + {b}", cert.jac_ord),
            });
        }
    }
    Ok(LipschitzReport {
        mode: LipschitzMode::CertifiedUpperBound,
        constant_exponent: Some(certified_exponent(epsilon_exponent, m, m_prime)),
        witness: None,
        depth,
        region: cell.to_string(),
    })
}

/// The exponent of `ε·max(1, p^{m' - m})` for `ε = p^epsilon_exponent`.
pub fn certified_exponent(epsilon_exponent: i64, m: i64, m_prime: i64) -> i64 {
    epsilon_exponent + (m_prime - m).max(0)
}

fn level_of(ball: &Ball) -> i64 {
    ball.center.ord_finite().expect("balls of a 1-cell around 0 avoid 0")
}

fn ball_of(cell: &Cell, ball: &Ball) -> Option<Ball> {
    cell.ball_of(&ball.center, &Point::new()).ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum LocalLipschitzOutcome {
    /// Every same-ball pair satisfied `|f(x) - f(y)| <= |x - y|`.
    Pass {
        pairs_checked: usize,
    },
    /// The derivative bound fails at `point`, so the check does not apply.
    Skipped {
        point: PadicScalar,
        derivative_ord: Option<i64>,
    },
    Fail {
        x: PadicScalar,
        y: PadicScalar,
    },
}

/// Samples every granularity ball of the window (depth `w.depth`) one level
/// down and checks `|f(x) - f(y)| <= |x - y|` on all pairs inside a ball,
/// after confirming `|f'| <= 1` at every sampled point.
pub fn check_bounded_derivative_local_lipschitz(
    f: &Term,
    region: &Condition,
    w: &Window,
    ctx: PrimeContext,
) -> Result<LocalLipschitzOutcome, LipschitzError> {
    let var = fiber_variable(f)?;
    let df = f.differentiate(&var)?;
    let reps = enumerate(w, ctx);
    let mut groups = Vec::new();
    for (x, ball) in reps.points.iter().zip(&reps.balls) {
        if !region.eval_at(&var, x)? {
            continue;
        }
        let mut group = Vec::new();
        for y in ball.representatives(1) {
            let d = df.eval_at(&var, &y)?;
            if d.ord() < Valuation::Finite(0) {
                return Ok(LocalLipschitzOutcome::Skipped { point: y, derivative_ord: d.ord_finite() });
            }
            let fy = f.eval_at(&var, &y)?;
            group.push((y, fy));
        }
        groups.push(group);
    }
    let mut pairs_checked = 0;
    for group in &groups {
        for (i, (x, fx)) in group.iter().enumerate() {
            for (y, fy) in &group[i + 1..] {
                pairs_checked += 1;
                if (fx - fy).ord() < (x - y).ord() {
                    return Ok(LocalLipschitzOutcome::Fail { x: x.clone(), y: y.clone() });
                }
            }
        }
    }
    Ok(LocalLipschitzOutcome::Pass { pairs_checked })
}

/// One step of a counterexample family: a witness pair with the norm
/// exponents of its distance, of its value difference, and of their ratio.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub n: i64,
    pub x1: PadicScalar,
    pub x2: PadicScalar,
    pub distance_exponent: i64,
    pub value_exponent: i64,
    pub ratio_exponent: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CounterexampleTrace {
    pub p: u64,
    pub levels: (i64, i64),
    pub entries: Vec<TraceEntry>,
    /// `(n, k)` with `|g(p^n) - g(0)| / |p^n| = p^k`.
    pub derivative_trace: Vec<(i64, i64)>,
    pub pairs_checked: usize,
    /// First pair breaking the expected identity, if any.
    pub failure: Option<(PadicScalar, PadicScalar)>,
}

fn norm_exp(x: &PadicScalar) -> Option<i64> {
    x.ord_finite().map(|v| -v)
}

fn entry(n: i64, f: &Term, x1: PadicScalar, x2: PadicScalar) -> Result<TraceEntry, LipschitzError> {
    let dv = &f.eval_at("t", &x1)? - &f.eval_at("t", &x2)?;
    let distance_exponent = norm_exp(&(&x1 - &x2)).expect("distinct points");
    let value_exponent = norm_exp(&dv).unwrap_or(i64::MIN);
    Ok(TraceEntry { n, x1, x2, distance_exponent, value_exponent, ratio_exponent: value_exponent - distance_exponent })
}

/// `f(t) = |t|` on the nonzero integers: locally constant, yet
/// `|f(x_1) - f(x_2)| = |x_2|^{-1}` whenever `|x_2| < |x_1|`.
///
/// Checks both facts on every representative (constancy by sampling each
/// granularity ball one level down). The trace fixes `x_1 = p^{v_min}` and
/// walks `x_2 = p^n` down the window.
pub fn counterexample_exloc(w: &Window, ctx: PrimeContext) -> Result<CounterexampleTrace, LipschitzError> {
    let f = Term::NormVal(Box::new(Term::var("t")));
    let reps = enumerate(w, ctx);
    let values: Vec<PadicScalar> = reps.points.iter().map(|x| f.eval_at("t", x)).collect::<Result<_, _>>()?;
    let mut failure = None;
    'balls: for (ball, v) in reps.balls.iter().zip(&values) {
        for y in ball.representatives(1) {
            if f.eval_at("t", &y)? != *v {
                failure = Some((ball.center.clone(), y));
                break 'balls;
            }
        }
    }
    let mut pairs_checked = 0;
    for (i, x1) in reps.points.iter().enumerate() {
        for (j, x2) in reps.points.iter().enumerate() {
            if x2.ord() <= x1.ord() {
                continue;
            }
            pairs_checked += 1;
            let lhs = norm_exp(&(&values[i] - &values[j]));
            if lhs != x2.ord_finite() && failure.is_none() {
                failure = Some((x1.clone(), x2.clone()));
            }
        }
    }
    let x1 = ctx.power(w.v_min);
    let entries = (w.v_min + 1..=w.v_max).map(|n| entry(n, &f, x1.clone(), ctx.power(n))).collect::<Result<_, _>>()?;
    Ok(CounterexampleTrace {
        p: ctx.p(),
        levels: (w.v_min, w.v_max),
        entries,
        derivative_trace: Vec::new(),
        pairs_checked,
        failure,
    })
}

/// The locally constant `g` built from the balls `b + b^3·Z_p`: at level
/// `n` the witness pair `p^n` (special, `g = p^{2n}`) and `p^n + p^{3n-1}`
/// (`g = 0`) has ratio `p^{n-1}`, while `|g(p^n) - g(0)| / |p^n| = p^{-n}`.
pub fn counterexample_exloc2(n_max: i64, ctx: PrimeContext) -> Result<CounterexampleTrace, LipschitzError> {
    let g = Term::Builtin("exloc2".to_string(), vec![Term::var("t")]);
    let mut entries = Vec::new();
    let mut derivative_trace = Vec::new();
    let mut failure = None;
    for n in 1..=n_max {
        let bi = ctx.power(n);
        let bj = &bi + &ctx.power(3 * n - 1);
        let e = entry(n, &g, bi.clone(), bj.clone())?;
        let cube = norm_exp(&(&(&bi * &bi) * &bi)).expect("nonzero");
        let square = norm_exp(&(&bi * &bi)).expect("nonzero");
        if (e.distance_exponent != 1 + cube || e.value_exponent != square || e.ratio_exponent != n - 1)
            && failure.is_none()
        {
            failure = Some((bi.clone(), bj.clone()));
        }
        entries.push(e);
        let quotient = &g.eval_at("t", &bi)? - &g.eval_at("t", &ctx.zero())?;
        let k = norm_exp(&quotient).map_or(i64::MIN, |q| q - norm_exp(&bi).expect("nonzero"));
        derivative_trace.push((n, k));
    }
    Ok(CounterexampleTrace {
        p: ctx.p(),
        levels: (1, n_max),
        pairs_checked: entries.len(),
        entries,
        derivative_trace,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobian::check_ball_correspondence;
    use crate::qp::CosetSpec;
    use crate::terms::{parse_condition, parse_term};

    fn c(p: u64) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    fn empirical(f: &str, region: &str, w: Window, p: u64) -> LipschitzReport {
        let f = Function::Term(parse_term(f).unwrap());
        empirical_lipschitz(&f, None, &parse_condition(region).unwrap(), &w, c(p), 1).unwrap()
    }

    #[test]
    fn scaling_constant() {
        let r = empirical("3*t", "true", Window::new(0, 2, 2).unwrap(), 3);
        assert_eq!(r.constant_exponent, Some(-1));
    }

    #[test]
    fn squaring_on_a_coset() {
        let r = empirical("t^2", "t in 1*Q(1,1)", Window::new(0, 2, 2).unwrap(), 3);
        assert_eq!(r.constant_exponent, Some(0));
    }

    #[test]
    fn norm_function_blows_up() {
        let k = c(3);
        let r = empirical("normval(t)", "true", Window::new(0, 3, 1).unwrap(), 3);
        // The ratio for levels o1 < o2 is p^(o1 + o2); the top pair is (2, 3).
        assert_eq!(r.constant_exponent, Some(5));
        let (a, b) = r.witness.unwrap();
        assert_eq!((a["t"].clone(), b["t"].clone()), (k.int(9), k.int(27)));
        let r = empirical("normval(t)", "true", Window::new(0, 0, 1).unwrap(), 3);
        assert_eq!(r.constant_exponent, None);
    }

    #[test]
    fn parallel_scan_agrees() {
        let f = Function::Term(parse_term("t^3 + 2*t/9").unwrap());
        let w = Window::new(-1, 2, 2).unwrap();
        let seq = empirical_lipschitz(&f, None, &Condition::True, &w, c(3), 1).unwrap();
        let par = empirical_lipschitz(&f, None, &Condition::True, &w, c(3), 4).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn two_variable_scan() {
        let f = Function::Term(parse_term("x*y").unwrap());
        let w = Window::new(0, 1, 1).unwrap();
        let r = empirical_lipschitz(&f, None, &Condition::True, &w, c(2), 1).unwrap();
        assert_eq!(r.constant_exponent, Some(0));
    }

    #[test]
    fn empty_region() {
        let f = Function::Term(parse_term("t").unwrap());
        let w = Window::new(0, 1, 1).unwrap();
        let err = empirical_lipschitz(&f, None, &parse_condition("|t| < |t|").unwrap(), &w, c(3), 1);
        assert_eq!(err, Err(LipschitzError::EmptyRegion));
    }

    #[test]
    fn certified_squaring_pipeline() {
        let k = c(3);
        let cell = Cell::over_point(&k.zero(), CosetSpec::new(k.one(), 1, 1).unwrap(), None, None);
        let w = Window::new(0, 3, 1).unwrap();
        let f = parse_term("t^2").unwrap();
        let corr = check_ball_correspondence(&f, &cell, &Point::new(), &w, 3, &[]).unwrap().unwrap();
        let cert = certified_cell_constant(&cell, &corr, 0).unwrap();
        assert_eq!(cert.constant_exponent, Some(0));
        let shifted = Cell::over_point(&k.one(), CosetSpec::new(k.one(), 1, 1).unwrap(), None, None);
        assert!(matches!(certified_cell_constant(&shifted, &corr, 0), Err(LipschitzError::CenterNotZero(_))));
    }

    #[test]
    fn constant_formula_instances() {
        assert_eq!(certified_exponent(0, 1, 1), 0);
        assert_eq!(certified_exponent(0, 1, 2), 1);
        assert_eq!(certified_exponent(2, 3, 1), 2);
        let k = c(3);
        let f = parse_term("t^2").unwrap();
        let w = Window::new(0, 2, 1).unwrap();
        let src = Cell::over_point(&k.zero(), CosetSpec::new(k.one(), 1, 1).unwrap(), None, None);
        let mut corr = check_ball_correspondence(&f, &src, &Point::new(), &w, 2, &[]).unwrap().unwrap();
        assert_eq!(certified_cell_constant(&src, &corr, 0).unwrap().constant_exponent, Some(0));
        // Breaking the radius law on one pair trips the ledger identity.
        corr.pairs[1].1.radius_ord += 1;
        assert!(certified_cell_constant(&src, &corr, 0).is_err());
    }

    #[test]
    fn bounded_derivative_examples() {
        let run = |f: &str, w: Window, p: u64| {
            check_bounded_derivative_local_lipschitz(&parse_term(f).unwrap(), &Condition::True, &w, c(p)).unwrap()
        };
        assert!(matches!(run("t + t^3", Window::new(0, 2, 2).unwrap(), 3), LocalLipschitzOutcome::Pass { .. }));
        assert!(matches!(run("t/3", Window::new(0, 2, 2).unwrap(), 3), LocalLipschitzOutcome::Skipped { .. }));
        assert!(matches!(run("t^2", Window::new(1, 3, 2).unwrap(), 2), LocalLipschitzOutcome::Pass { .. }));
    }

    #[test]
    fn exloc_trace() {
        let t = counterexample_exloc(&Window::new(0, 3, 1).unwrap(), c(3)).unwrap();
        assert_eq!(t.failure, None);
        let last = t.entries.last().unwrap();
        assert_eq!((last.n, last.value_exponent, last.distance_exponent, last.ratio_exponent), (3, 3, 0, 3));
        let t = counterexample_exloc(&Window::new(1, 4, 1).unwrap(), c(2)).unwrap();
        let last = t.entries.last().unwrap();
        assert_eq!((last.value_exponent, last.distance_exponent, last.ratio_exponent), (4, -1, 5));
    }

    #[test]
    fn exloc2_trace() {
        let k = c(3);
        let t = counterexample_exloc2(4, k).unwrap();
        assert_eq!(t.failure, None);
        let e = &t.entries[1];
        assert_eq!((e.x1.clone(), e.x2.clone()), (k.int(9), k.int(252)));
        assert_eq!((e.distance_exponent, e.value_exponent, e.ratio_exponent), (-5, -4, 1));
        assert_eq!(t.entries[0].ratio_exponent, 0);
        assert_eq!(t.derivative_trace[3], (4, -4));
    }
}
