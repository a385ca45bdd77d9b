//! Exact arithmetic in `Q_p` over rational representatives.
//!
//! Every scalar is an exact rational number read `p`-adically, so the
//! valuation, the norm and the angular components are computed exactly from
//! the numerator and denominator. Norms are never materialized as reals: a
//! norm is the integer exponent `e` with `|x| = p^e`, or the distinguished
//! [`Norm::Zero`] for `x = 0`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QpError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("tuple norm of an empty sequence")]
    EmptyTuple,
    #[error("invalid rational literal `{0}`")]
    BadRational(String),
    #[error("coset parameters must be positive (m = {m}, n = {n})")]
    BadCoset { m: u32, n: u32 },
    #[error("division by zero")]
    DivisionByZero,
}

/// The prime `p`. Since the field is fixed to `Q_p`, `p` is also the residue
/// field cardinality and the uniformizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeContext {
    p: u64,
}

impl PrimeContext {
    pub fn new(p: u64) -> Result<Self, QpError> {
        if is_prime(p) {
            Ok(Self { p })
        } else {
            Err(QpError::NotPrime(p))
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `p^n` as a machine integer.
    ///
    /// Panics when `p^n` does not fit in 63 bits; residues that large are far
    /// outside what any exhaustive scan in this crate can visit.
    pub fn modulus(&self, n: u32) -> u64 {
        self.p
            .checked_pow(n)
            .filter(|m| *m < (1 << 63))
            .unwrap_or_else(|| panic!("{}^{} overflows the residue arithmetic", self.p, n))
    }

    /// `p^k` as an exact scalar, for any integer `k`.
    pub fn power(&self, k: i64) -> PadicScalar {
        let base = BigInt::from(self.p).pow(k.unsigned_abs() as u32);
        let value = if k >= 0 { BigRational::from_integer(base) } else { BigRational::new(BigInt::one(), base) };
        PadicScalar::new(*self, value)
    }

    pub fn int(&self, n: i64) -> PadicScalar {
        PadicScalar::new(*self, BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(&self, num: i64, den: i64) -> PadicScalar {
        PadicScalar::new(*self, BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero(&self) -> PadicScalar {
        PadicScalar::new(*self, BigRational::zero())
    }

    pub fn one(&self) -> PadicScalar {
        PadicScalar::new(*self, BigRational::one())
    }

    /// Parses `a` or `a/b` (optionally signed) into a scalar.
    pub fn parse(&self, text: &str) -> Result<PadicScalar, QpError> {
        let value = parse_rational(text)?;
        Ok(PadicScalar::new(*self, value))
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn parse_rational(text: &str) -> Result<BigRational, QpError> {
    let bad = || QpError::BadRational(text.to_string());
    let trimmed = text.trim();
    let (num, den) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// The valuation extended to zero: `ord(0) = +inf`.
///
/// The derived ordering places `PlusInfinity` above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(i64),
    PlusInfinity,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::PlusInfinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Valuation::PlusInfinity
    }
}

impl Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::PlusInfinity,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::PlusInfinity => write!(f, "+inf"),
        }
    }
}

/// A norm as an element of the value group: `Exp(e)` means `|x| = p^e`.
///
/// `Zero` sorts below every `Exp`, so the derived ordering is the ordering of
/// the real norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Norm {
    Zero,
    Exp(i64),
}

impl Norm {
    pub fn exponent(self) -> Option<i64> {
        match self {
            Norm::Zero => None,
            Norm::Exp(e) => Some(e),
        }
    }

    /// `|x|·|y|`.
    pub fn times(self, other: Norm) -> Norm {
        match (self, other) {
            (Norm::Exp(a), Norm::Exp(b)) => Norm::Exp(a + b),
            _ => Norm::Zero,
        }
    }

    /// Renders the norm as `p^k` (or `0`), never as a decimal.
    pub fn render(self, p: u64) -> String {
        match self {
            Norm::Zero => "0".to_string(),
            Norm::Exp(e) => format!("{p}^{e}"),
        }
    }
}

/// `ac_n(x)`: the unit part of `x` reduced modulo `p^n`, with `ac_n(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AngularComponent {
    pub n: u32,
    pub residue: u64,
}

/// An exact rational number viewed as an element of `Q_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    value: BigRational,
    ctx: PrimeContext,
}

impl PadicScalar {
    pub fn new(ctx: PrimeContext, value: BigRational) -> Self {
        Self { value, ctx }
    }

    pub fn from_bigint(ctx: PrimeContext, value: BigInt) -> Self {
        Self::new(ctx, BigRational::from_integer(value))
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn ctx(&self) -> PrimeContext {
        self.ctx
    }

    pub fn p(&self) -> u64 {
        self.ctx.p
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// Splits a nonzero scalar as `p^v · a/b` with `a`, `b` prime to `p`
    /// and `b > 0`.
    pub fn unit_decomposition(&self) -> Option<(i64, BigInt, BigInt)> {
        if self.is_zero() {
            return None;
        }
        let p = BigInt::from(self.ctx.p);
        let (vn, a) = strip(self.value.numer().clone(), &p);
        let (vd, b) = strip(self.value.denom().clone(), &p);
        Some((vn - vd, a, b))
    }

    pub fn ord(&self) -> Valuation {
        match self.unit_decomposition() {
            Some((v, _, _)) => Valuation::Finite(v),
            None => Valuation::PlusInfinity,
        }
    }

    /// The valuation of a scalar known to be nonzero.
    pub fn ord_finite(&self) -> Option<i64> {
        self.ord().finite()
    }

    pub fn norm(&self) -> Norm {
        match self.ord() {
            Valuation::Finite(v) => Norm::Exp(-v),
            Valuation::PlusInfinity => Norm::Zero,
        }
    }

    pub fn ac(&self, n: u32) -> AngularComponent {
        assert!(n >= 1, "angular component depth must be positive");
        let Some((_, a, b)) = self.unit_decomposition() else {
            return AngularComponent { n, residue: 0 };
        };
        let modulus = self.ctx.modulus(n);
        let a = mod_u64(&a, modulus);
        let b = mod_u64(&b, modulus);
        let b_inv = mod_inverse(b, modulus).expect("denominator is a unit");
        let residue = ((a as u128 * b_inv as u128) % modulus as u128) as u64;
        AngularComponent { n, residue }
    }

    /// `x·p^{-ord(x)}` as an exact rational; zero stays zero.
    pub fn unit_part(&self) -> PadicScalar {
        match self.unit_decomposition() {
            Some((_, a, b)) => PadicScalar::new(self.ctx, BigRational::new(a, b)),
            None => self.clone(),
        }
    }

    pub fn checked_div(&self, rhs: &PadicScalar) -> Result<PadicScalar, QpError> {
        if rhs.is_zero() {
            return Err(QpError::DivisionByZero);
        }
        Ok(PadicScalar::new(self.ctx, &self.value / &rhs.value))
    }

    pub fn checked_pow(&self, exponent: i64) -> Result<PadicScalar, QpError> {
        if exponent < 0 && self.is_zero() {
            return Err(QpError::DivisionByZero);
        }
        let e = i32::try_from(exponent).expect("exponent fits in i32");
        Ok(PadicScalar::new(self.ctx, num_traits::pow::Pow::pow(&self.value, e)))
    }

    pub fn in_coset(&self, coset: &CosetSpec) -> bool {
        coset.contains(self)
    }

    /// Canonical representative of the ball `self + p^k·Z_p`: `0` when the
    /// ball contains `0`, otherwise `p^v·u` with `u` the least positive
    /// integer congruent to the unit part modulo `p^{k-v}`.
    pub fn reduce_mod_power(&self, k: i64) -> PadicScalar {
        match self.ord() {
            Valuation::Finite(v) if v < k => {
                let depth = (k - v) as u32;
                let u = self.ac(depth).residue;
                self.ctx.power(v) * self.ctx.int(u as i64)
            }
            _ => self.ctx.zero(),
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.value.is_integer() {
            self.value.numer().to_i64()
        } else {
            None
        }
    }
}

fn strip(mut n: BigInt, p: &BigInt) -> (i64, BigInt) {
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            break;
        }
        n = q;
        v += 1;
    }
    (v, n)
}

fn mod_u64(x: &BigInt, modulus: u64) -> u64 {
    x.mod_floor(&BigInt::from(modulus)).to_u64().expect("residue fits in u64")
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.value.is_integer() {
            write!(f, "{}", self.value.numer())
        } else {
            write!(f, "{}/{}", self.value.numer(), self.value.denom())
        }
    }
}

impl Serialize for PadicScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&PadicScalar> for &PadicScalar {
            type Output = PadicScalar;

            fn $method(self, rhs: &PadicScalar) -> PadicScalar {
                debug_assert_eq!(self.ctx, rhs.ctx, "mixed primes");
                PadicScalar::new(self.ctx, &self.value $op &rhs.value)
            }
        }

        impl $trait for PadicScalar {
            type Output = PadicScalar;

            fn $method(self, rhs: PadicScalar) -> PadicScalar {
                &self $op &rhs
            }
        }

        impl $trait<&PadicScalar> for PadicScalar {
            type Output = PadicScalar;

            fn $method(self, rhs: &PadicScalar) -> PadicScalar {
                &self $op rhs
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);

impl Neg for &PadicScalar {
    type Output = PadicScalar;

    fn neg(self) -> PadicScalar {
        PadicScalar::new(self.ctx, -&self.value)
    }
}

impl Neg for PadicScalar {
    type Output = PadicScalar;

    fn neg(self) -> PadicScalar {
        -&self
    }
}

/// The coset `λ·Q_{m,n}`, where `Q_{m,n} = {x ≠ 0 : ord(x) ∈ nZ, ac_m(x) = 1}`.
/// `λ = 0` denotes the singleton `{0}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CosetSpec {
    pub lambda: PadicScalar,
    pub m: u32,
    pub n: u32,
}

impl CosetSpec {
    pub fn new(lambda: PadicScalar, m: u32, n: u32) -> Result<Self, QpError> {
        if m == 0 || n == 0 {
            return Err(QpError::BadCoset { m, n });
        }
        Ok(Self { lambda, m, n })
    }

    pub fn is_zero_coset(&self) -> bool {
        self.lambda.is_zero()
    }

    pub fn contains(&self, x: &PadicScalar) -> bool {
        if self.lambda.is_zero() {
            return x.is_zero();
        }
        let (Some(vx), Some(vl)) = (x.ord_finite(), self.lambda.ord_finite()) else {
            return false;
        };
        if (vx - vl).rem_euclid(self.n as i64) != 0 {
            return false;
        }
        let quotient = x.checked_div(&self.lambda).expect("lambda is nonzero");
        quotient.ac(self.m).residue == 1
    }
}

impl fmt::Display for CosetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*Q({},{})", self.lambda, self.m, self.n)
    }
}

/// `|x| = max_i |x_i|` for a tuple.
pub fn tuple_norm(xs: &[PadicScalar]) -> Result<Norm, QpError> {
    xs.iter().map(PadicScalar::norm).max().ok_or(QpError::EmptyTuple)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    #[test]
    fn rejects_composites() {
        assert_eq!(PrimeContext::new(9), Err(QpError::NotPrime(9)));
        assert_eq!(PrimeContext::new(1), Err(QpError::NotPrime(1)));
        assert!(PrimeContext::new(7).is_ok());
    }

    #[test]
    fn ord_examples() {
        assert_eq!(ctx(3).int(9).ord(), Valuation::Finite(2));
        assert_eq!(ctx(5).zero().ord(), Valuation::PlusInfinity);
        assert_eq!(ctx(3).ratio(45, 2).ord(), Valuation::Finite(2));
        assert_eq!(ctx(3).ratio(2, 45).ord(), Valuation::Finite(-2));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(ctx(3).int(9).norm(), Norm::Exp(-2));
        assert_eq!(ctx(3).ratio(1, 3).norm(), Norm::Exp(1));
        assert_eq!(ctx(2).int(12).norm(), Norm::Exp(-2));
        assert_eq!(ctx(2).zero().norm(), Norm::Zero);
        assert!(Norm::Zero < Norm::Exp(-100));
    }

    #[test]
    fn ac_examples() {
        assert_eq!(ctx(3).int(45).ac(2).residue, 5);
        assert_eq!(ctx(5).ratio(1, 2).ac(1).residue, 3);
        assert_eq!(ctx(3).zero().ac(1).residue, 0);
        // -1 in Z_3 is 2 + 2·3 + ..., so ac_2(-1) = 8.
        assert_eq!(ctx(3).int(-1).ac(2).residue, 8);
    }

    #[test]
    fn coset_examples() {
        let c = ctx(3);
        let q12 = CosetSpec::new(c.one(), 1, 2).unwrap();
        assert!(q12.contains(&c.int(36)));
        assert!(!q12.contains(&c.int(3)));
        let zero = CosetSpec::new(c.zero(), 1, 1).unwrap();
        assert!(zero.contains(&c.zero()));
        assert!(!zero.contains(&c.one()));
        assert!(CosetSpec::new(c.one(), 0, 1).is_err());
    }

    #[test]
    fn tuple_norm_examples() {
        let c3 = ctx(3);
        assert_eq!(tuple_norm(&[c3.int(9), c3.ratio(1, 3)]), Ok(Norm::Exp(1)));
        let c5 = ctx(5);
        assert_eq!(tuple_norm(&[c5.zero(), c5.zero()]), Ok(Norm::Zero));
        let c2 = ctx(2);
        assert_eq!(tuple_norm(&[c2.int(12), c2.int(40)]), Ok(Norm::Exp(-2)));
        assert_eq!(tuple_norm(&[]), Err(QpError::EmptyTuple));
    }

    #[test]
    fn valuation_saturates() {
        assert_eq!(Valuation::Finite(2) + Valuation::Finite(3), Valuation::Finite(5));
        assert_eq!(Valuation::Finite(2) + Valuation::PlusInfinity, Valuation::PlusInfinity);
        assert!(Valuation::Finite(i64::MAX) < Valuation::PlusInfinity);
    }

    #[test]
    fn reduce_mod_power_is_canonical() {
        let c = ctx(3);
        assert_eq!(c.int(-1).reduce_mod_power(2), c.int(8));
        assert_eq!(c.int(9).reduce_mod_power(2), c.zero());
        assert_eq!(c.ratio(1, 3).reduce_mod_power(1), c.ratio(1, 3));
        assert_eq!(c.int(4).reduce_mod_power(1), c.int(1));
    }

    #[test]
    fn parse_and_display() {
        let c = ctx(5);
        assert_eq!(c.parse("45/2").unwrap(), c.ratio(45, 2));
        assert_eq!(c.parse(" -3 ").unwrap().to_string(), "-3");
        assert_eq!(c.ratio(6, 4).to_string(), "3/2");
        assert!(c.parse("1/0").is_err());
        assert!(c.parse("x").is_err());
    }
}
