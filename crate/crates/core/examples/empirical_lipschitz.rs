// Empirical Lipschitz constants: the largest difference ratio over the
// representatives of a region, with the pair attaining it.

use std::fmt::Write;

use ultralip::lipschitz::empirical_lipschitz;
use ultralip::qp::PrimeContext;
use ultralip::regions::Window;
use ultralip::terms::{parse_condition, parse_term, Function};

pub fn run_example() -> String {
    let mut out = String::new();
    let ctx = PrimeContext::new(3).unwrap();
    let w = Window::new(0, 3, 2).unwrap();
    let cases = [("t^2", "true"), ("normval(t)", "true"), ("t^3 - t", "|t| < |1|"), ("3*t + 1", "true")];
    for (f, region) in cases {
        let func = Function::Term(parse_term(f).unwrap());
        let region = parse_condition(region).unwrap();
        let report = empirical_lipschitz(&func, None, &region, &w, ctx, 2).unwrap();
        writeln!(out, "{f} on {region}: {report}").unwrap();
    }
    out
}

#[allow(dead_code)]
fn main() {
    print!("{}", run_example());
}
