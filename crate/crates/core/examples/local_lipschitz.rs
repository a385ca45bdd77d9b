// Checking that a map with `|f'| <= 1` is 1-Lipschitz on small balls.

use std::fmt::Write;

use ultralip::lipschitz::{check_bounded_derivative_local_lipschitz, LocalLipschitzOutcome};
use ultralip::qp::PrimeContext;
use ultralip::regions::Window;
use ultralip::terms::{parse_term, Condition};

pub fn run_example() -> String {
    let mut out = String::new();
    let ctx = PrimeContext::new(5).unwrap();
    let w = Window::new(0, 2, 3).unwrap();
    for f in ["t^4 + 2*t^3 - t", "t^2 / 5 + 7", "t^5 / 25"] {
        let term = parse_term(f).unwrap();
        let outcome = check_bounded_derivative_local_lipschitz(&term, &Condition::True, &w, ctx).unwrap();
        let line = match outcome {
            LocalLipschitzOutcome::Pass { pairs_checked } => format!("1-Lipschitz on {pairs_checked} pairs"),
            LocalLipschitzOutcome::Skipped { point, derivative_ord } => {
                format!("|f'| > 1 at {point} (ord f' = {derivative_ord:?}); check skipped")
            }
            LocalLipschitzOutcome::Fail { x, y } => format!("fails at ({x}, {y})"),
        };
        writeln!(out, "{f}: {line}").unwrap();
    }
    out
}

#[allow(dead_code)]
fn main() {
    print!("{}", run_example());
}
