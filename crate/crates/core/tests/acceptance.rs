//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! elapsed time checked against each criterion's budget.

mod common;

use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use common::{ac, horner, ord, pow_p, random_rational, random_unit, rat, rng};
use ultralip::cells::Cell;
use ultralip::jacobian::{
    check_ball_correspondence, check_jacobian_on_ball, verify_certificate, FailedCondition, JacobianCertificate,
    JacobianOutcome,
};
use ultralip::lipschitz::{
    certified_cell_constant, check_bounded_derivative_local_lipschitz, counterexample_exloc, counterexample_exloc2,
    empirical_lipschitz, LocalLipschitzOutcome,
};
use ultralip::prepare::{prepare, verify_prepared, FactoredTerm, PreparedPiece};
use ultralip::qp::{CosetSpec, PadicScalar, PrimeContext};
use ultralip::regions::{enumerate, Ball, Window};
use ultralip::terms::{parse_condition, parse_term, Condition, Function, Point, Term};

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ctx(p: u64) -> PrimeContext {
    PrimeContext::new(p).unwrap()
}

fn scalar(p: u64, x: &BigRational) -> PadicScalar {
    PadicScalar::new(ctx(p), x.clone())
}

/// `|x| = p^e` as the exponent `e = -ord(x)`; `None` for zero.
fn norm_exp(x: &BigRational, p: u64) -> Option<i64> {
    ord(x, p).map(|v| -v)
}

// ---------------------------------------------------------------------------
// 1. Ultrametric law suite.

fn criterion_1() -> Check {
    for p in [2u64, 3, 5, 7] {
        let mut r = rng(1000 + p);
        for i in 0..10_000 {
            let x = random_rational(&mut r, p, 6);
            let y = if i % 10 == 0 {
                // Force equal norms and cancellations regularly.
                -x.clone() * rat(1 + p as i64 * r.gen_range(1..50), 1)
            } else {
                random_rational(&mut r, p, 6)
            };
            let (sx, sy) = (scalar(p, &x), scalar(p, &y));
            ensure(sx.ord().finite() == ord(&x, p), || format!("ord mismatch at {x}"))?;
            let nx = norm_exp(&x, p);
            let ny = norm_exp(&y, p);
            let sum = norm_exp(&(&x + &y), p);
            ensure((&sx + &sy).norm().exponent() == sum, || format!("|x+y| mismatch at {x}, {y}"))?;
            let max = nx.max(ny);
            ensure(sum <= max, || format!("|x+y| > max(|x|,|y|) at {x}, {y}"))?;
            if nx != ny {
                ensure(sum == max, || format!("|x+y| != max(|x|,|y|) at {x}, {y}"))?;
            }
            let prod = (&sx * &sy).norm().exponent();
            ensure(prod == Some(nx.unwrap() + ny.unwrap()), || format!("|xy| != |x||y| at {x}, {y}"))?;
            for m in 1..=3u32 {
                let modulus = p.pow(m);
                let lhs = (&sx * &sy).ac(m).residue;
                let rhs = (ac(&x, p, m) * ac(&y, p, m)) % modulus;
                ensure(lhs == rhs, || format!("ac_{m}(xy) mismatch at {x}, {y}"))?;
                ensure(sx.ac(m).residue == ac(&x, p, m), || format!("ac_{m} mismatch at {x}"))?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 2. Ball-of-cell formula equivalence.

fn criterion_2() -> Check {
    let p = 3u64;
    let k = ctx(p);
    let reps = enumerate(&Window::new(-2, 3, 3).unwrap(), k).points;
    let origin = Point::new();
    for center in [rat(0, 1), rat(1, 3), rat(-7, 1)] {
        let c = scalar(p, &center);
        for m in [1u32, 2] {
            for offset in &reps {
                let t = &c + offset;
                let d = offset.value().clone();
                let a = ord(&d, p).unwrap();
                let xi = ac(&d, p, m);
                let lambda = k.int(xi as i64);
                let cell = Cell::over_point(&c, CosetSpec::new(lambda, m, 1).unwrap(), None, None);
                let ball = cell.ball_of(&t, &origin).map_err(|e| e.to_string())?;
                // Construction t + p^m·t·Z_p: center t, radius ord(t - c) + m.
                ensure(ball.radius_ord == a + m as i64, || format!("radius at {t}"))?;
                // Set formula, probed on every class one level finer, on the
                // level itself and on its two neighbours.
                let probe = enumerate(&Window::new(a - 1, a + 1, m as i64 + 1).unwrap(), k).points;
                for w in probe {
                    let point = &c + &w;
                    let in_set = ord(w.value(), p) == Some(a) && ac(w.value(), p, m) == xi;
                    ensure(ball.contains(&point) == in_set, || format!("formula mismatch at t={t}, w={point}"))?;
                    ensure(cell.contains(&point, &origin).unwrap() || !in_set, || format!("cell misses {point}"))?;
                }
                // Maximality: the next larger ball leaves the cell.
                let parent = ball.parent();
                let escapes = parent.representatives(1).iter().any(|w| !cell.contains(w, &origin).unwrap());
                ensure(escapes, || format!("ball at {t} is not maximal"))?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 3. Jacobian certification.

fn criterion_3a() -> Check {
    let k = ctx(3);
    let f = parse_term("x^2").unwrap();
    let ball = Ball::new(k.one(), 1);
    let cert = match check_jacobian_on_ball(&f, &ball, 4).map_err(|e| e.to_string())? {
        JacobianOutcome::Certified(c) => c,
        JacobianOutcome::Violated(v) => return Err(format!("unexpected violation {v}")),
    };
    ensure(cert.jac_ord == 0, || format!("jac_ord {}", cert.jac_ord))?;
    ensure(cert.image == Ball::new(k.one(), 1), || format!("image {}", cert.image))?;
    ensure(cert.verified_depth == 4, || "depth".into())?;
    // Oracle: brute force over 1 + 3·j, j < 3^4.
    let pts: Vec<BigRational> = (0..81).map(|j| rat(1 + 3 * j, 1)).collect();
    for (i, x) in pts.iter().enumerate() {
        ensure(ord(&(x * rat(2, 1)), 3) == Some(0), || "ord f' != 0".into())?;
        for y in &pts[i + 1..] {
            ensure(ord(&(x * x - y * y), 3) == ord(&(x - y), 3), || format!("distance identity at {x}, {y}"))?;
        }
    }
    Ok(())
}

fn criterion_3b() -> Check {
    let k = ctx(3);
    let f = parse_term("x^2").unwrap();
    let v = match check_jacobian_on_ball(&f, &Ball::new(k.zero(), 1), 4).map_err(|e| e.to_string())? {
        JacobianOutcome::Violated(v) => v,
        JacobianOutcome::Certified(c) => return Err(format!("unexpected certificate {c:?}")),
    };
    ensure(v.failed_condition == FailedCondition::ANotInjective, || format!("{v}"))?;
    ensure(v.witness.len() == 2, || "witness is not a pair".into())?;
    let (x, y) = (v.witness[0].value().clone(), v.witness[1].value().clone());
    ensure(x != y && &x * &x == &y * &y, || format!("witness ({x}, {y}) does not re-check"))?;
    ensure(x == rat(3, 1) && y == rat(-3, 1), || format!("witness ({x}, {y})"))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// 4. Norm function: |f(x1) - f(x2)| = |x2|^-1 whenever |x2| < |x1|.

fn criterion_4() -> Check {
    let f = Term::NormVal(Box::new(Term::var("t")));
    for p in [2u64, 3, 5] {
        let k = ctx(p);
        let w = Window::new(0, 4, 2).unwrap();
        let trace = counterexample_exloc(&w, k).map_err(|e| e.to_string())?;
        ensure(trace.failure.is_none(), || format!("p={p}: {:?}", trace.failure))?;
        // Oracle enumeration: p^v·u, 0 <= v <= 4, u a unit below p^2.
        let mut points = Vec::new();
        for v in 0..=4 {
            for u in 1..(p * p) as i64 {
                if u % p as i64 != 0 {
                    points.push(pow_p(p, v) * rat(u, 1));
                }
            }
        }
        let fv: Vec<BigRational> =
            points.iter().map(|x| f.eval_at("t", &scalar(p, x)).unwrap().value().clone()).collect();
        let mut pairs = 0;
        for (i, x1) in points.iter().enumerate() {
            // Constancy on the granularity ball x1 + p^(ord x1 + 2)·Z_p.
            let v1 = ord(x1, p).unwrap();
            for j in 0..p as i64 {
                let y = x1 + pow_p(p, v1 + 2) * rat(j, 1);
                let fy = f.eval_at("t", &scalar(p, &y)).unwrap();
                ensure(*fy.value() == fv[i], || format!("p={p}: f not constant near {x1}"))?;
            }
            for (j, x2) in points.iter().enumerate() {
                let v2 = ord(x2, p).unwrap();
                if v2 <= v1 {
                    continue;
                }
                pairs += 1;
                let lhs = norm_exp(&(&fv[i] - &fv[j]), p);
                ensure(lhs == Some(v2), || format!("p={p}: |f({x1}) - f({x2})| != |x2|^-1"))?;
            }
        }
        ensure(pairs == trace.pairs_checked, || format!("p={p}: pair count {pairs} vs {}", trace.pairs_checked))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 5. The locally constant g with g' = 0 that is not locally Lipschitz.

fn criterion_5() -> Check {
    let p = 3u64;
    let trace = counterexample_exloc2(5, ctx(p)).map_err(|e| e.to_string())?;
    ensure(trace.failure.is_none(), || format!("{:?}", trace.failure))?;
    ensure(trace.entries.len() == 5, || "entry count".into())?;
    // Oracle g: b^2 on the special ball at level n (b ≡ p^n mod p^(3n)), 0 elsewhere.
    let g = |x: &BigRational| -> BigRational {
        let n = ord(x, p).unwrap();
        if ac(x, p, 2 * n as u32) == 1 {
            pow_p(p, 2 * n)
        } else {
            BigRational::zero()
        }
    };
    for (e, n) in trace.entries.iter().zip(1i64..) {
        let (bi, bj) = (e.x1.value().clone(), e.x2.value().clone());
        ensure(bi == pow_p(p, n) && bj == pow_p(p, n) + pow_p(p, 3 * n - 1), || format!("n={n}: pair"))?;
        let dist = norm_exp(&(&bi - &bj), p).unwrap();
        let cube = norm_exp(&(&bi * &bi * &bi), p).unwrap();
        ensure(dist == 1 + cube, || format!("n={n}: |b_i - b_j| != p|b_i^3|"))?;
        let gi = f_g(&e.x1)?;
        let gj = f_g(&e.x2)?;
        ensure(gi == g(&bi) && gj == g(&bj), || format!("n={n}: g values"))?;
        let gd = norm_exp(&(&gi - &gj), p).unwrap();
        ensure(gd == norm_exp(&(&bi * &bi), p).unwrap(), || format!("n={n}: |g(b_i) - g(b_j)| != |b_i^2|"))?;
        ensure(gd - dist == n - 1 && e.ratio_exponent == n - 1, || format!("n={n}: ratio exponent"))?;
    }
    for (n, k) in &trace.derivative_trace {
        let q = g(&pow_p(p, *n)) / pow_p(p, *n);
        ensure(norm_exp(&q, p) == Some(-n) && *k == -n, || format!("n={n}: derivative trace"))?;
    }
    Ok(())
}

fn f_g(x: &PadicScalar) -> Result<BigRational, String> {
    let g = Term::Builtin("exloc2".into(), vec![Term::var("t")]);
    g.eval_at("t", x).map(|v| v.value().clone()).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// 6. Preparation versus a direct evaluation oracle.

struct PreparedCase {
    p: u64,
    f: FactoredTerm,
    /// `(center, exponent)` pairs, kept for the oracle.
    factors: Vec<(BigRational, i64)>,
    unit: BigRational,
    pieces: Vec<PreparedPiece>,
}

fn random_factored(r: &mut impl Rng, p: u64) -> (BigRational, Vec<(BigRational, i64)>) {
    let unit = pow_p(p, r.gen_range(-2..=2)) * rat(random_unit(r, p), 1);
    let mut factors: Vec<(BigRational, i64)> = Vec::new();
    let mut degree = 0;
    let target = r.gen_range(1..=4);
    while degree < target {
        let c = if r.gen_bool(0.15) {
            BigRational::zero()
        } else {
            pow_p(p, r.gen_range(-2..=2)) * rat(random_unit(r, p), 1)
        };
        if factors.iter().any(|(d, _)| *d == c) {
            continue;
        }
        let mut a = r.gen_range(1..=(target - degree).min(2));
        degree += a;
        if r.gen_bool(0.25) {
            a = -a;
        }
        factors.push((c, a));
    }
    (unit, factors)
}

fn prepared_cases() -> Vec<PreparedCase> {
    let mut out = Vec::new();
    for p in [2u64, 3, 5] {
        let mut r = rng(600 + p);
        for _ in 0..50 {
            let (unit, factors) = random_factored(&mut r, p);
            let f = FactoredTerm::new("t", scalar(p, &unit), factors.iter().map(|(c, a)| (scalar(p, c), *a)).collect())
                .unwrap();
            let pieces = prepare(&f, &Window::new(-3, 3, 3).unwrap(), 1).unwrap();
            out.push(PreparedCase { p, f, factors, unit, pieces });
        }
    }
    out
}

fn oracle_ord_f(case: &PreparedCase, t: &BigRational) -> Option<i64> {
    let mut value = case.unit.clone();
    for (c, a) in &case.factors {
        let d = t - c;
        if d.is_zero() {
            return None;
        }
        value *= if *a >= 0 { num_traits::pow(d, *a as usize) } else { num_traits::pow(d.recip(), (-a) as usize) };
    }
    ord(&value, case.p)
}

fn criterion_6(cases: &[PreparedCase]) -> Check {
    let origin = Point::new();
    for (idx, case) in cases.iter().enumerate() {
        let p = case.p;
        for piece in &case.pieces {
            if let Some(t) = verify_prepared(&case.f, piece, 3) {
                return Err(format!("case {idx} (p={p}, f={}): {piece} fails at {t}", case.f));
            }
        }
        let window = Window::new(-3, 3, 3).unwrap();
        let mut points = enumerate(&window, ctx(p)).points;
        points.extend(case.factors.iter().map(|(c, _)| scalar(p, c)));
        for t in points {
            let is_center = case.factors.iter().any(|(c, _)| c == t.value());
            let in_window = ord(t.value(), p).is_some_and(|v| (-3..=3).contains(&v));
            let hits: Vec<&PreparedPiece> =
                case.pieces.iter().filter(|pc| pc.cell.contains(&t, &origin).unwrap()).collect();
            let expected = usize::from(in_window && !is_center);
            ensure(hits.len() == expected, || {
                format!("case {idx} (p={p}, f={}): {t} lies in {} pieces", case.f, hits.len())
            })?;
            if let Some(piece) = hits.first() {
                let d = ord(&(t.value() - piece.center.value()), p).unwrap();
                let predicted = piece.h_exponent + piece.a * d;
                ensure(oracle_ord_f(case, t.value()) == Some(predicted), || {
                    format!("case {idx} (p={p}, f={}): oracle disagrees at {t} on {piece}", case.f)
                })?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 7. Certified constant for x^2 on {t ∈ 1·Q(1,1)}.

fn squaring_pipeline() -> Result<(Cell, ultralip::jacobian::BallCorrespondence), String> {
    let k = ctx(3);
    let cell = Cell::over_point(&k.zero(), CosetSpec::new(k.one(), 1, 1).unwrap(), None, None);
    let f = parse_term("t^2").unwrap();
    let w = Window::new(0, 3, 1).unwrap();
    let corr = check_ball_correspondence(&f, &cell, &Point::new(), &w, 3, &[])
        .map_err(|e| e.to_string())?
        .map_err(|e| e.to_string())?;
    Ok((cell, corr))
}

fn criterion_7() -> Check {
    let p = 3u64;
    let (cell, corr) = squaring_pipeline()?;
    ensure(corr.pairs.len() == 4, || format!("{} ball pairs", corr.pairs.len()))?;
    let image_cell = corr.fitted_image_cell().ok_or("images need more than one cell")?;
    let m = cell.coset.m as i64;
    let m_prime = image_cell.coset.m as i64;
    let epsilon = 0;
    for ((src, img), cert) in corr.pairs.iter().zip(&corr.certificates) {
        let cert = cert.as_ref().ok_or("uncertified ball")?;
        let a = ord(src.center.value(), p).unwrap();
        let b = ord(img.center.value(), p).unwrap();
        // Oracle jac_ord: ord(2t) at the ball center.
        let jac = ord(&(src.center.value() * rat(2, 1)), p).unwrap();
        ensure(jac == cert.jac_ord && jac >= -epsilon, || format!("jac_ord on {src}"))?;
        ensure(m + jac + a == m_prime + b, || format!("ledger identity on {src}: {m}+{jac}+{a} vs {m_prime}+{b}"))?;
    }
    let certified = certified_cell_constant(&cell, &corr, epsilon).map_err(|e| e.to_string())?;
    let expected = epsilon + (m_prime - m).max(0);
    ensure(certified.constant_exponent == Some(expected), || format!("certified {:?}", certified.constant_exponent))?;
    let region = parse_condition("t in 1*Q(1,1)").unwrap();
    let f = Function::Term(parse_term("t^2").unwrap());
    let empirical =
        empirical_lipschitz(&f, None, &region, &Window::new(0, 3, 3).unwrap(), ctx(p), 1).map_err(|e| e.to_string())?;
    let lower = empirical.constant_exponent.ok_or("empirical constant is 0")?;
    ensure(lower <= expected, || format!("empirical p^{lower} exceeds certified p^{expected}"))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// 8. Bounded derivative implies local 1-Lipschitz.

fn criterion_8() -> Check {
    for p in [3u64, 5] {
        let mut r = rng(800 + p);
        let k = ctx(p);
        let w = Window::new(0, 2, 3).unwrap();
        let mut accepted = 0;
        let mut attempts = 0;
        while accepted < 20 {
            attempts += 1;
            ensure(attempts < 5000, || format!("p={p}: could not find 20 admissible polynomials"))?;
            let degree = r.gen_range(1..=4);
            let coeffs: Vec<BigRational> = (0..=degree)
                .map(|_| {
                    if r.gen_bool(0.2) {
                        BigRational::zero()
                    } else {
                        pow_p(p, r.gen_range(-2..=2)) * rat(random_unit(&mut r, p), 1)
                    }
                })
                .collect();
            let term = coeffs.iter().enumerate().fold(Term::int(0), |acc, (i, c)| {
                let c = Term::constant(&scalar(p, c));
                Term::plus(acc, Term::times(c, Term::power(Term::var("t"), i as i64)))
            });
            let deriv: Vec<BigRational> =
                coeffs.iter().enumerate().skip(1).map(|(i, c)| c * rat(i as i64, 1)).collect();
            let outcome =
                check_bounded_derivative_local_lipschitz(&term, &Condition::True, &w, k).map_err(|e| e.to_string())?;
            // Oracle: |f'| <= 1 on the sampled points and the inequality on
            // every pair inside a depth-3 granularity ball.
            let reps = enumerate(&w, k);
            let mut admissible = true;
            let mut violation = None;
            for ball in &reps.balls {
                let pts: Vec<BigRational> = ball.representatives(1).iter().map(|x| x.value().clone()).collect();
                if pts.iter().any(|x| ord(&horner(&deriv, x), p).is_some_and(|v| v < 0)) {
                    admissible = false;
                    break;
                }
                for (i, x) in pts.iter().enumerate() {
                    for y in &pts[i + 1..] {
                        let df = ord(&(horner(&coeffs, x) - horner(&coeffs, y)), p);
                        if df.is_some_and(|v| v < ord(&(x - y), p).unwrap()) {
                            violation.get_or_insert((x.clone(), y.clone()));
                        }
                    }
                }
            }
            match outcome {
                LocalLipschitzOutcome::Skipped { .. } => {
                    ensure(!admissible, || format!("p={p}: skipped an admissible polynomial {term}"))?;
                }
                LocalLipschitzOutcome::Pass { .. } => {
                    ensure(admissible, || format!("p={p}: passed an inadmissible polynomial {term}"))?;
                    ensure(violation.is_none(), || format!("p={p}: oracle found {violation:?} for {term}"))?;
                    accepted += 1;
                }
                LocalLipschitzOutcome::Fail { x, y } => {
                    return Err(format!("p={p}: {term} fails at ({x}, {y})"));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 9. Mutation sensitivity.

fn criterion_9(cases: &[PreparedCase]) -> Check {
    let mut mutants = 0;
    for (idx, case) in cases.iter().enumerate() {
        for piece in &case.pieces {
            for delta in [-1, 1] {
                let bad = PreparedPiece { a: piece.a + delta, ..piece.clone() };
                let t =
                    verify_prepared(&case.f, &bad, 3).ok_or_else(|| format!("case {idx}: mutant {bad} survives"))?;
                let d = ord(&(t.value() - bad.center.value()), case.p).unwrap();
                let claimed = bad.h_exponent + bad.a * d;
                ensure(oracle_ord_f(case, t.value()) != Some(claimed), || {
                    format!("case {idx}: witness {t} does not refute mutant {bad}")
                })?;
                mutants += 1;
            }
        }
    }
    let (_, corr) = squaring_pipeline()?;
    let f = parse_term("t^2").unwrap();
    for cert in corr.certificates.iter().flatten() {
        ensure(verify_certificate(&f, cert).map_err(|e| e.to_string())?.is_none(), || "good cert rejected".into())?;
        for delta in [-1, 1] {
            let bad = JacobianCertificate { jac_ord: cert.jac_ord + delta, ..cert.clone() };
            let v = verify_certificate(&f, &bad)
                .map_err(|e| e.to_string())?
                .ok_or_else(|| format!("mutant certificate on {} survives", bad.ball))?;
            ensure(v.witness.len() == 2, || "certificate witness is not a pair".into())?;
            let (x, y) = (v.witness[0].value(), v.witness[1].value());
            let lhs = ord(&(x * x - y * y), 3);
            let rhs = ord(&(x - y), 3).map(|d| d + bad.jac_ord);
            ensure(lhs != rhs, || format!("witness ({x}, {y}) does not refute jac_ord {}", bad.jac_ord))?;
            mutants += 1;
        }
    }
    ensure(mutants > 0, || "no mutants".into())
}

// ---------------------------------------------------------------------------

fn run(label: &str, budget: Duration, check: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed();
    let verdict = match (&result, elapsed <= budget) {
        (Ok(()), true) => "PASS".to_string(),
        (Ok(()), false) => format!("FAIL (over the {}s budget)", budget.as_secs()),
        (Err(msg), _) => format!("FAIL: {msg}"),
    };
    println!("criterion {label}: {verdict} [{:.2}s]", elapsed.as_secs_f64());
    result.is_ok() && elapsed <= budget
}

fn main() {
    let secs = Duration::from_secs;
    let mut ok = true;
    ok &= run("1 ultrametric law suite", secs(10), criterion_1);
    ok &= run("2 ball-of-cell formula equivalence", secs(10), criterion_2);
    ok &= run("3a jacobian certificate for x^2 on 1+3Z_3", secs(5), criterion_3a);
    ok &= run("3b jacobian violation for x^2 on 3Z_3", secs(5), criterion_3b);
    ok &= run("4 norm function counterexample", secs(30), criterion_4);
    ok &= run("5 zero-derivative counterexample", secs(5), criterion_5);
    let mut cases = Vec::new();
    ok &= run("6 preparation oracle equivalence", secs(60), || {
        cases = prepared_cases();
        criterion_6(&cases)
    });
    ok &= run("7 m=1 certified constant", secs(30), criterion_7);
    ok &= run("8 bounded derivative local Lipschitz", secs(30), criterion_8);
    ok &= run("9 mutation sensitivity", secs(60), || criterion_9(&cases));
    if !ok {
        std::process::exit(1);
    }
}
