//! Balls `a + p^k·Z_p`, valuation windows, and exhaustive enumeration of
//! residue-class representatives.

use std::fmt;
use std::hash::{Hash, Hasher};

use serde::Serialize;
use thiserror::Error;

use crate::qp::{PadicScalar, PrimeContext, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegionError {
    #[error("depth must be positive, got {0}")]
    NonPositiveDepth(i64),
    #[error("empty window [{0}, {1}]")]
    EmptyWindow(i64, i64),
    #[error("invalid ball literal `{0}`")]
    BadBall(String),
}

/// The ball `center + p^radius_ord·Z_p`.
///
/// Equality is set equality: same radius and centers at distance at most the
/// radius.
#[derive(Debug, Clone, Serialize)]
pub struct Ball {
    pub center: PadicScalar,
    pub radius_ord: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallRelation {
    Disjoint,
    Equal,
    FirstInsideSecond,
    SecondInsideFirst,
}

impl Ball {
    pub fn new(center: PadicScalar, radius_ord: i64) -> Self {
        Self { center, radius_ord }
    }

    pub fn p(&self) -> u64 {
        self.center.p()
    }

    pub fn contains(&self, x: &PadicScalar) -> bool {
        (x - &self.center).ord() >= Valuation::Finite(self.radius_ord)
    }

    pub fn relation(&self, other: &Ball) -> BallRelation {
        let k = self.radius_ord.min(other.radius_ord);
        if (&self.center - &other.center).ord() < Valuation::Finite(k) {
            return BallRelation::Disjoint;
        }
        match self.radius_ord.cmp(&other.radius_ord) {
            std::cmp::Ordering::Equal => BallRelation::Equal,
            std::cmp::Ordering::Less => BallRelation::SecondInsideFirst,
            std::cmp::Ordering::Greater => BallRelation::FirstInsideSecond,
        }
    }

    pub fn is_disjoint(&self, other: &Ball) -> bool {
        self.relation(other) == BallRelation::Disjoint
    }

    /// The same ball with its canonical center (see
    /// [`PadicScalar::reduce_mod_power`]).
    pub fn canonical(&self) -> Ball {
        Ball::new(self.center.reduce_mod_power(self.radius_ord), self.radius_ord)
    }

    /// The ball of radius one step larger.
    pub fn parent(&self) -> Ball {
        Ball::new(self.center.clone(), self.radius_ord - 1)
    }

    /// One point in each of the `p^depth` sub-balls of radius
    /// `radius_ord + depth`, as `center + p^radius_ord·j` with `j` running
    /// over a balanced digit range in the order `0, 1, -1, 2, -2, ...`.
    ///
    /// The balanced range keeps `x` and `-x` together whenever both lie in
    /// the ball, so exact collisions of even functions surface as witnesses.
    pub fn representatives(&self, depth: u32) -> Vec<PadicScalar> {
        let ctx = self.center.ctx();
        let count = ctx.modulus(depth) as i64;
        let step = ctx.power(self.radius_ord);
        let mut out = Vec::with_capacity(count as usize);
        let mut j = 0i64;
        while (out.len() as i64) < count {
            out.push(&self.center + &(&step * &ctx.int(j)));
            j = if j > 0 { -j } else { -j + 1 };
        }
        out
    }

    /// The sub-balls of radius `radius_ord + depth`, one per representative.
    pub fn sub_balls(&self, depth: u32) -> Vec<Ball> {
        self.representatives(depth).into_iter().map(|c| Ball::new(c, self.radius_ord + depth as i64)).collect()
    }

    /// Parses the literal `"c + p^k"`, meaning `c + p^k·Z_p`.
    pub fn parse(ctx: PrimeContext, text: &str) -> Result<Ball, RegionError> {
        let bad = || RegionError::BadBall(text.to_string());
        let (center, radius) = text.rsplit_once('+').ok_or_else(bad)?;
        let (base, exp) = radius.trim().split_once('^').ok_or_else(bad)?;
        if base.trim().parse::<u64>().map_err(|_| bad())? != ctx.p() {
            return Err(bad());
        }
        let k: i64 = exp.trim().parse().map_err(|_| bad())?;
        let center = ctx.parse(center).map_err(|_| bad())?;
        Ok(Ball::new(center, k))
    }
}

impl PartialEq for Ball {
    fn eq(&self, other: &Ball) -> bool {
        self.relation(other) == BallRelation::Equal
    }
}

impl Eq for Ball {}

impl Hash for Ball {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let canonical = self.canonical();
        canonical.center.hash(state);
        canonical.radius_ord.hash(state);
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}^{}", self.center, self.p(), self.radius_ord)
    }
}

/// `{x : v_min <= ord(x) <= v_max}` discretized into balls of radius
/// `ord(x) + depth`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub v_min: i64,
    pub v_max: i64,
    pub depth: u32,
}

impl Window {
    pub fn new(v_min: i64, v_max: i64, depth: i64) -> Result<Self, RegionError> {
        if depth <= 0 {
            return Err(RegionError::NonPositiveDepth(depth));
        }
        if v_min > v_max {
            return Err(RegionError::EmptyWindow(v_min, v_max));
        }
        Ok(Self { v_min, v_max, depth: depth as u32 })
    }

    pub fn contains(&self, x: &PadicScalar) -> bool {
        match x.ord() {
            Valuation::Finite(v) => self.v_min <= v && v <= self.v_max,
            Valuation::PlusInfinity => false,
        }
    }

    pub fn with_depth(&self, depth: u32) -> Window {
        Window { depth, ..*self }
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<i64> {
        self.v_min..=self.v_max
    }
}

/// Representative points together with the granularity ball each one stands
/// for. `points[i]` lies in `balls[i]`.
#[derive(Debug, Clone)]
pub struct RepresentativeSet {
    pub points: Vec<PadicScalar>,
    pub balls: Vec<Ball>,
    pub depth: u32,
}

impl RepresentativeSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn granularity(&self, i: usize) -> &Ball {
        &self.balls[i]
    }

    /// Index of the granularity ball containing `x`, if any.
    pub fn locate(&self, x: &PadicScalar) -> Option<usize> {
        self.balls.iter().position(|b| b.contains(x))
    }
}

/// One canonical representative `p^v·u` per class, `u` the least positive
/// unit in its class modulo `p^depth`.
pub fn enumerate(w: &Window, ctx: PrimeContext) -> RepresentativeSet {
    let modulus = ctx.modulus(w.depth);
    let p = ctx.p();
    let mut points = Vec::new();
    let mut balls = Vec::new();
    for v in w.levels() {
        let scale = ctx.power(v);
        for u in (1..modulus).filter(|u| u % p != 0) {
            let x = &scale * &ctx.int(u as i64);
            balls.push(Ball::new(x.clone(), v + w.depth as i64));
            points.push(x);
        }
    }
    RepresentativeSet { points, balls, depth: w.depth }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c3() -> PrimeContext {
        PrimeContext::new(3).unwrap()
    }

    #[test]
    fn containment() {
        let c = c3();
        let b = Ball::new(c.one(), 1);
        assert!(b.contains(&c.int(4)));
        assert!(!b.contains(&c.int(2)));
        assert!(Ball::new(c.one(), 2).contains(&c.int(10)));
    }

    #[test]
    fn relations() {
        let c = c3();
        let b = |x: i64, k: i64| Ball::new(c.int(x), k);
        assert_eq!(b(1, 1).relation(&b(4, 2)), BallRelation::SecondInsideFirst);
        assert_eq!(b(4, 2).relation(&b(1, 1)), BallRelation::FirstInsideSecond);
        assert_eq!(b(1, 1).relation(&b(2, 1)), BallRelation::Disjoint);
        assert_eq!(b(1, 1).relation(&b(4, 1)), BallRelation::Equal);
        assert_eq!(b(1, 1), b(4, 1));
    }

    #[test]
    fn enumeration_counts() {
        let c = c3();
        assert_eq!(enumerate(&Window::new(0, 1, 2).unwrap(), c).len(), 12);
        let c2 = PrimeContext::new(2).unwrap();
        let single = enumerate(&Window::new(0, 0, 1).unwrap(), c2);
        assert_eq!(single.points, vec![c2.one()]);
        assert_eq!(single.balls[0], Ball::new(c2.one(), 1));
        let c5 = PrimeContext::new(5).unwrap();
        assert_eq!(enumerate(&Window::new(-1, 1, 1).unwrap(), c5).len(), 12);
    }

    #[test]
    fn window_validation() {
        assert_eq!(Window::new(0, 1, 0), Err(RegionError::NonPositiveDepth(0)));
        assert_eq!(Window::new(2, 1, 1), Err(RegionError::EmptyWindow(2, 1)));
    }

    #[test]
    fn balanced_representatives() {
        let c = c3();
        let reps = Ball::new(c.zero(), 1).representatives(2);
        let ints: Vec<i64> = reps.iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(ints, vec![0, 3, -3, 6, -6, 9, -9, 12, -12]);
        let c2 = PrimeContext::new(2).unwrap();
        let reps = Ball::new(c2.one(), 1).representatives(2);
        let ints: Vec<i64> = reps.iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(ints, vec![1, 3, -1, 5]);
    }

    #[test]
    fn ball_literal() {
        let c = c3();
        assert_eq!(Ball::parse(c, "0 + 3^1").unwrap(), Ball::new(c.zero(), 1));
        assert_eq!(Ball::parse(c, "-1/2 + 3^-2").unwrap(), Ball::new(c.ratio(-1, 2), -2));
        assert!(Ball::parse(c, "1 + 5^1").is_err());
        assert!(Ball::parse(c, "1").is_err());
    }
}
