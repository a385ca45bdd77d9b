//! Independent oracles for the integration tests: valuations, angular
//! components and polynomial evaluation computed directly on big rationals,
//! without going through the library.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn strip(mut n: BigInt, p: &BigInt) -> (i64, BigInt) {
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return (v, n);
        }
        n = q;
        v += 1;
    }
}

/// `ord_p(x)`, `None` for zero.
pub fn ord(x: &BigRational, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let (a, _) = strip(x.numer().clone(), &p);
    let (b, _) = strip(x.denom().clone(), &p);
    Some(a - b)
}

/// `ac_m(x)` by brute force: the residue `r` in `[0, p^m)` with
/// `b·r ≡ a (mod p^m)` for the unit part `a/b`, found by search.
pub fn ac(x: &BigRational, p: u64, m: u32) -> u64 {
    if x.is_zero() {
        return 0;
    }
    let pb = BigInt::from(p);
    let (_, a) = strip(x.numer().clone(), &pb);
    let (_, b) = strip(x.denom().clone(), &pb);
    let modulus = p.pow(m);
    let big_mod = BigInt::from(modulus);
    let a: u64 = a.mod_floor(&big_mod).try_into().unwrap();
    let b: u64 = b.mod_floor(&big_mod).try_into().unwrap();
    (0..modulus).find(|r| (b * r) % modulus == a).expect("b is invertible")
}

pub fn pow_p(p: u64, k: i64) -> BigRational {
    let base = BigRational::from_integer(BigInt::from(p));
    if k >= 0 {
        num_traits::pow(base, k as usize)
    } else {
        num_traits::pow(base.recip(), (-k) as usize)
    }
}

/// Horner evaluation of `sum c_i x^i`.
pub fn horner(coeffs: &[BigRational], x: &BigRational) -> BigRational {
    coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

/// A random nonzero rational `p^k·a/b` with `k` in `[-kmax, kmax]`.
pub fn random_rational(rng: &mut impl Rng, p: u64, kmax: i64) -> BigRational {
    let k = rng.gen_range(-kmax..=kmax);
    let mut a: i64 = rng.gen_range(1..1_000_000);
    if rng.gen_bool(0.5) {
        a = -a;
    }
    let b: i64 = rng.gen_range(1..1_000_000);
    pow_p(p, k) * rat(a, b)
}

/// A random integer unit modulo `p^3`, with a random sign.
pub fn random_unit(rng: &mut impl Rng, p: u64) -> i64 {
    let modulus = (p * p * p) as i64;
    loop {
        let u = rng.gen_range(1..modulus);
        if u % p as i64 != 0 {
            return if rng.gen_bool(0.5) { -u } else { u };
        }
    }
}
