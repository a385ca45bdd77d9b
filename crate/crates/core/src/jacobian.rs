//! Per-ball Jacobian certification, ball images, and the correspondence
//! between the balls of a cell and the balls of its image.
//!
//! Everything here is exhaustive over the representatives of a ball at a
//! fixed depth `M`. A certificate is therefore a statement about depth `M`:
//! a term whose behaviour changes below that resolution (possible for
//! builtins) can violate the property deeper down. For polynomial terms the
//! test suite pins depths at which the checks are conclusive.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cells::{fit_cell, Cell, CellError};
use crate::qp::{PadicScalar, Valuation};
use crate::regions::{Ball, Window};
use crate::terms::{Point, Term, TermError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JacobianError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error("depth must be at least 1")]
    NonPositiveDepth,
    #[error("expected a univariate term, found variables {0:?}")]
    NotUnivariate(Vec<String>),
    #[error("ball {ball} is not certified: {violation}")]
    NotCertified { ball: String, violation: JacobianViolation },
}

/// The variable a univariate term is a function of (`t` for constants).
pub fn fiber_variable(f: &Term) -> Result<String, JacobianError> {
    let vars = f.variables();
    match vars.len() {
        0 => Ok("t".to_string()),
        1 => Ok(vars[0].clone()),
        _ => Err(JacobianError::NotUnivariate(vars)),
    }
}

/// `f` restricted to a ball is a bijection onto `image` with
/// `ord(f(x) - f(y)) = jac_ord + ord(x - y)`, verified at `verified_depth`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JacobianCertificate {
    pub ball: Ball,
    pub image: Ball,
    pub jac_ord: i64,
    #[serde(rename = "depth")]
    pub verified_depth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailedCondition {
    ANotInjective,
    AImageNotBall,
    CJacOrdVaries,
    DDistanceMismatch,
}

impl fmt::Display for FailedCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailedCondition::ANotInjective => "a_not_injective",
            FailedCondition::AImageNotBall => "a_image_not_ball",
            FailedCondition::CJacOrdVaries => "c_jac_ord_varies",
            FailedCondition::DDistanceMismatch => "d_distance_mismatch",
        })
    }
}

/// A failed condition with the points that exhibit it and their values
/// under `f`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JacobianViolation {
    pub failed_condition: FailedCondition,
    pub witness: Vec<PadicScalar>,
    pub values: Vec<PadicScalar>,
    /// The `jac_ord` the distance identity was tested against.
    pub claimed_jac_ord: Option<i64>,
    pub detail: String,
}

impl fmt::Display for JacobianViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self.witness.iter().map(|x| x.to_string()).collect();
        write!(f, "{} at ({}): {}", self.failed_condition, pts.join(", "), self.detail)
    }
}

impl JacobianViolation {
    /// Re-evaluates the witness against `f` and reports whether it still
    /// exhibits the recorded failure.
    pub fn recheck(&self, f: &Term) -> Result<bool, JacobianError> {
        let var = fiber_variable(f)?;
        let fx: Vec<PadicScalar> = self.witness.iter().map(|x| f.eval_at(&var, x)).collect::<Result<_, _>>()?;
        if fx != self.values {
            return Ok(false);
        }
        let pair = |v: &[PadicScalar]| (v.len() == 2).then(|| &v[0] - &v[1]);
        Ok(match self.failed_condition {
            FailedCondition::ANotInjective => {
                matches!((pair(&self.witness), pair(&fx)), (Some(dx), Some(dy)) if !dx.is_zero() && dy.is_zero())
            }
            FailedCondition::CJacOrdVaries => {
                let df = f.differentiate(&var)?;
                let ords: Vec<Valuation> =
                    self.witness.iter().map(|x| df.eval_at(&var, x).map(|d| d.ord())).collect::<Result<_, _>>()?;
                ords.iter().any(|o| o.is_infinite()) || ords.windows(2).any(|w| w[0] != w[1])
            }
            FailedCondition::DDistanceMismatch => match (pair(&self.witness), pair(&fx), self.claimed_jac_ord) {
                (Some(dx), Some(dy), Some(j)) => match dx.ord_finite() {
                    Some(d) => dy.ord() != Valuation::Finite(j + d),
                    None => false,
                },
                _ => false,
            },
            FailedCondition::AImageNotBall => true,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JacobianOutcome {
    Certified(JacobianCertificate),
    Violated(JacobianViolation),
}

impl JacobianOutcome {
    pub fn certificate(&self) -> Option<&JacobianCertificate> {
        match self {
            JacobianOutcome::Certified(c) => Some(c),
            JacobianOutcome::Violated(_) => None,
        }
    }
}

struct Sample {
    var: String,
    points: Vec<PadicScalar>,
    values: Vec<PadicScalar>,
}

fn sample(f: &Term, ball: &Ball, depth: u32) -> Result<Sample, JacobianError> {
    if depth < 1 {
        return Err(JacobianError::NonPositiveDepth);
    }
    let var = fiber_variable(f)?;
    let points = ball.representatives(depth);
    let values = points.iter().map(|x| f.eval_at(&var, x)).collect::<Result<_, _>>()?;
    Ok(Sample { var, points, values })
}

fn violation(cond: FailedCondition, s: &Sample, idx: &[usize], detail: String) -> JacobianViolation {
    JacobianViolation {
        claimed_jac_ord: None,
        failed_condition: cond,
        witness: idx.iter().map(|&i| s.points[i].clone()).collect(),
        values: idx.iter().map(|&i| s.values[i].clone()).collect(),
        detail,
    }
}

fn first_collision(s: &Sample) -> Option<(usize, usize)> {
    let mut seen: HashMap<&PadicScalar, usize> = HashMap::new();
    for (j, v) in s.values.iter().enumerate() {
        if let Some(&i) = seen.get(v) {
            return Some((i, j));
        }
        seen.insert(v, j);
    }
    None
}

/// The smallest ball around `f(x_0)` holding every image, and the first
/// pair of images landing in the same sub-ball one depth-`M` step down
/// (which means the images do not tile that ball).
fn image_ball(s: &Sample, depth: u32) -> (Option<Ball>, Option<(usize, usize)>) {
    let base = &s.values[0];
    let radius = s.values.iter().filter_map(|v| (v - base).ord_finite()).min();
    let Some(radius) = radius else {
        return (None, Some((0, 1)));
    };
    let fine = radius + depth as i64;
    let mut seen: HashMap<PadicScalar, usize> = HashMap::new();
    for (j, v) in s.values.iter().enumerate() {
        let key = (v - base).reduce_mod_power(fine);
        if let Some(&i) = seen.get(&key) {
            return (Some(Ball::new(base.clone(), radius)), Some((i, j)));
        }
        seen.insert(key, j);
    }
    (Some(Ball::new(base.clone(), radius)), None)
}

/// Checks the Jacobian property of `f` on `ball` over its depth-`M`
/// representatives. Conditions are tried in the order: exact collisions,
/// constancy of `ord f'`, image tiling, distance identity.
pub fn check_jacobian_on_ball(f: &Term, ball: &Ball, depth: u32) -> Result<JacobianOutcome, JacobianError> {
    let s = sample(f, ball, depth)?;
    if let Some((i, j)) = first_collision(&s) {
        let d = format!("f({}) = f({}) = {}", s.points[i], s.points[j], s.values[i]);
        return Ok(JacobianOutcome::Violated(violation(FailedCondition::ANotInjective, &s, &[i, j], d)));
    }
    let df = f.differentiate(&s.var)?;
    let ords: Vec<Valuation> =
        s.points.iter().map(|x| df.eval_at(&s.var, x).map(|d| d.ord())).collect::<Result<_, _>>()?;
    let Valuation::Finite(jac_ord) = ords[0] else {
        let d = format!("f'({}) = 0", s.points[0]);
        return Ok(JacobianOutcome::Violated(violation(FailedCondition::CJacOrdVaries, &s, &[0], d)));
    };
    if let Some(k) = ords.iter().position(|o| *o != ords[0]) {
        let d = format!("ord f'({}) = {}, ord f'({}) = {}", s.points[0], ords[0], s.points[k], ords[k]);
        return Ok(JacobianOutcome::Violated(violation(FailedCondition::CJacOrdVaries, &s, &[0, k], d)));
    }
    let (image, clash) = image_ball(&s, depth);
    if let Some((i, j)) = clash {
        let d = format!("images of {} and {} share a residue class", s.points[i], s.points[j]);
        return Ok(JacobianOutcome::Violated(violation(FailedCondition::AImageNotBall, &s, &[i, j], d)));
    }
    let image = image.expect("non-constant images");
    if let Some(v) = distance_mismatch(&s, jac_ord) {
        return Ok(JacobianOutcome::Violated(v));
    }
    Ok(JacobianOutcome::Certified(JacobianCertificate { ball: ball.clone(), image, jac_ord, verified_depth: depth }))
}

fn distance_mismatch(s: &Sample, jac_ord: i64) -> Option<JacobianViolation> {
    for i in 0..s.points.len() {
        for j in i + 1..s.points.len() {
            let dx = (&s.points[i] - &s.points[j]).ord_finite().expect("distinct points");
            let dy = (&s.values[i] - &s.values[j]).ord();
            if dy != Valuation::Finite(jac_ord + dx) {
                let d = format!("ord(f(x) - f(y)) = {dy}, expected {jac_ord} + {dx}");
                let mut v = violation(FailedCondition::DDistanceMismatch, s, &[i, j], d);
                v.claimed_jac_ord = Some(jac_ord);
                return Some(v);
            }
        }
    }
    None
}

/// Re-checks a certificate against `f` at its recorded depth, returning the
/// first pair (or point) that contradicts it.
pub fn verify_certificate(f: &Term, cert: &JacobianCertificate) -> Result<Option<JacobianViolation>, JacobianError> {
    let s = sample(f, &cert.ball, cert.verified_depth)?;
    if let Some(v) = distance_mismatch(&s, cert.jac_ord) {
        return Ok(Some(v));
    }
    if cert.image.radius_ord != cert.jac_ord + cert.ball.radius_ord {
        let d = format!("image radius {} != {} + {}", cert.image.radius_ord, cert.jac_ord, cert.ball.radius_ord);
        return Ok(Some(violation(FailedCondition::AImageNotBall, &s, &[0], d)));
    }
    if let Some(k) = s.values.iter().position(|v| !cert.image.contains(v)) {
        let d = format!("f({}) = {} lies outside {}", s.points[k], s.values[k], cert.image);
        return Ok(Some(violation(FailedCondition::AImageNotBall, &s, &[k], d)));
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotABall {
    pub witness: (PadicScalar, PadicScalar),
    pub detail: String,
}

/// The ball `f(B)`, provided the depth-`M` images fill it one per residue
/// class.
pub fn map_ball(f: &Term, ball: &Ball, depth: u32) -> Result<Result<Ball, NotABall>, JacobianError> {
    let s = sample(f, ball, depth)?;
    let (image, clash) = image_ball(&s, depth);
    Ok(match (image, clash) {
        (Some(b), None) => Ok(b),
        (image, Some((i, j))) => Err(NotABall {
            witness: (s.points[i].clone(), s.points[j].clone()),
            detail: match image {
                Some(b) => format!("images collide modulo p^{}", b.radius_ord + depth as i64),
                None => "f is constant on the representatives".to_string(),
            },
        }),
        (None, None) => unreachable!(),
    })
}

/// Source balls of a cell matched with their image balls, plus the cells
/// fitted to the images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallCorrespondence {
    pub pairs: Vec<(Ball, Ball)>,
    pub certificates: Vec<Option<JacobianCertificate>>,
    pub image_cells: Vec<Cell>,
}

impl BallCorrespondence {
    /// The fitted image cell, when the images fit in one cell.
    pub fn fitted_image_cell(&self) -> Option<&Cell> {
        match self.image_cells.as_slice() {
            [c] => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorrespondenceFailure {
    NotInjective { x: PadicScalar, y: PadicScalar, value: PadicScalar },
    ImageNotBall { source: Ball, witness: NotABall },
    ImagesOverlap { first: Ball, second: Ball },
    NoCandidateFits,
}

impl fmt::Display for CorrespondenceFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrespondenceFailure::NotInjective { x, y, value } => {
                write!(f, "not injective: f({x}) = f({y}) = {value}")
            }
            CorrespondenceFailure::ImageNotBall { source, witness } => write!(
                f,
                "image of {source} is not a ball: {} ({}, {})",
                witness.detail, witness.witness.0, witness.witness.1
            ),
            CorrespondenceFailure::ImagesOverlap { first, second } => write!(f, "images {first} and {second} overlap"),
            CorrespondenceFailure::NoCandidateFits => write!(f, "no candidate center fits the image balls"),
        }
    }
}

/// Maps every ball of `cell` above `y` with level in the window through
/// `f` and fits cells to the images. Candidate image centers are `f(c(y))`
/// when defined, `0`, then `extra_centers`.
pub fn check_ball_correspondence(
    f: &Term,
    cell: &Cell,
    y: &Point,
    w: &Window,
    depth: u32,
    extra_centers: &[PadicScalar],
) -> Result<Result<BallCorrespondence, CorrespondenceFailure>, JacobianError> {
    let var = fiber_variable(f)?;
    let balls = cell.enumerate_balls(y, w)?;
    let mut seen: HashMap<PadicScalar, PadicScalar> = HashMap::new();
    for ball in &balls {
        for x in ball.representatives(depth) {
            let v = f.eval_at(&var, &x)?;
            if let Some(prev) = seen.get(&v) {
                return Ok(Err(CorrespondenceFailure::NotInjective { x: prev.clone(), y: x, value: v }));
            }
            seen.insert(v, x);
        }
    }
    let mut pairs = Vec::new();
    let mut certificates = Vec::new();
    for ball in balls {
        let cert = check_jacobian_on_ball(f, &ball, depth)?.certificate().cloned();
        let image = match &cert {
            Some(c) => c.image.clone(),
            None => match map_ball(f, &ball, depth)? {
                Ok(b) => b,
                Err(witness) => return Ok(Err(CorrespondenceFailure::ImageNotBall { source: ball, witness })),
            },
        };
        pairs.push((ball, image));
        certificates.push(cert);
    }
    for (i, (_, a)) in pairs.iter().enumerate() {
        if let Some((_, b)) = pairs[i + 1..].iter().find(|(_, b)| !a.is_disjoint(b)) {
            return Ok(Err(CorrespondenceFailure::ImagesOverlap { first: a.clone(), second: b.clone() }));
        }
    }
    let ctx = cell.ctx();
    let mut candidates = Vec::new();
    if let Ok(c) = cell.center_at(y) {
        if let Ok(fc) = f.eval_at(&var, &c) {
            candidates.push(fc);
        }
    }
    candidates.push(ctx.zero());
    candidates.extend(extra_centers.iter().cloned());
    let images: Vec<Ball> = pairs.iter().map(|(_, b)| b.clone()).collect();
    match fit_cell(&images, &candidates) {
        Ok(image_cells) => Ok(Ok(BallCorrespondence { pairs, certificates, image_cells })),
        Err(CellError::NoCandidateFits) => Ok(Err(CorrespondenceFailure::NoCandidateFits)),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LipschitzDirection {
    Forward1Lip,
    Inverse1Lip,
}

/// Tags each ball of the cell by whether `f` or its inverse is 1-Lipschitz
/// there, read off from the certified `jac_ord`.
pub fn classify_forward_or_inverse_lipschitz(
    f: &Term,
    cell: &Cell,
    y: &Point,
    w: &Window,
    depth: u32,
) -> Result<Vec<(Ball, LipschitzDirection)>, JacobianError> {
    let mut out = Vec::new();
    for ball in cell.enumerate_balls(y, w)? {
        match check_jacobian_on_ball(f, &ball, depth)? {
            JacobianOutcome::Certified(c) => {
                let tag =
                    if c.jac_ord >= 0 { LipschitzDirection::Forward1Lip } else { LipschitzDirection::Inverse1Lip };
                out.push((ball, tag));
            }
            JacobianOutcome::Violated(v) => {
                return Err(JacobianError::NotCertified { ball: ball.to_string(), violation: v });
            }
        }
    }
    Ok(out)
}
