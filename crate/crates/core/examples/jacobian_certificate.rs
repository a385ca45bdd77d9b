// Certifying the Jacobian property of a map on a ball, and the witness
// produced when it fails.

use std::fmt::Write;

use ultralip::jacobian::{check_jacobian_on_ball, verify_certificate, JacobianOutcome};
use ultralip::qp::PrimeContext;
use ultralip::regions::Ball;
use ultralip::terms::parse_term;

pub fn run_example() -> String {
    let mut out = String::new();
    let ctx = PrimeContext::new(3).unwrap();
    let f = parse_term("t^2").unwrap();
    for literal in ["1 + 3^1", "3 + 3^2", "0 + 3^1"] {
        let ball = Ball::parse(ctx, literal).unwrap();
        match check_jacobian_on_ball(&f, &ball, 4).unwrap() {
            JacobianOutcome::Certified(cert) => {
                let recheck = verify_certificate(&f, &cert).unwrap();
                writeln!(
                    out,
                    "{ball} -> {}: ord f' = {}, re-verified: {}",
                    cert.image,
                    cert.jac_ord,
                    recheck.is_none()
                )
                .unwrap();
            }
            JacobianOutcome::Violated(v) => {
                writeln!(out, "{ball}: {} at ({}), {}", v.failed_condition, join(&v.witness), v.detail).unwrap();
            }
        }
    }
    out
}

fn join(xs: &[ultralip::qp::PadicScalar]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

#[allow(dead_code)]
fn main() {
    print!("{}", run_example());
}
