// Two locally constant functions that are not locally Lipschitz at 0:
// `t -> |t|` and a function with zero derivative built from the balls
// `b + b^3·Z_p`.

use std::fmt::Write;

use ultralip::lipschitz::{counterexample_exloc, counterexample_exloc2, CounterexampleTrace};
use ultralip::qp::PrimeContext;
use ultralip::regions::Window;

fn render(out: &mut String, title: &str, trace: &CounterexampleTrace) {
    writeln!(out, "{title} (p = {}, {} pairs checked)", trace.p, trace.pairs_checked).unwrap();
    for e in &trace.entries {
        writeln!(out, "  n = {}: x1 = {}, x2 = {}, ratio = p^{}", e.n, e.x1, e.x2, e.ratio_exponent).unwrap();
    }
    if let Some(f) = &trace.failure {
        writeln!(out, "  failure at ({}, {})", f.0, f.1).unwrap();
    }
}

pub fn run_example() -> String {
    let mut out = String::new();
    let ctx = PrimeContext::new(3).unwrap();
    let exloc = counterexample_exloc(&Window::new(0, 4, 2).unwrap(), ctx).unwrap();
    render(&mut out, "|t|", &exloc);
    let exloc2 = counterexample_exloc2(5, ctx).unwrap();
    render(&mut out, "exloc2", &exloc2);
    for (n, ord) in &exloc2.derivative_trace {
        writeln!(out, "  |g(p^{n}) - g(0)| / |p^{n}| = p^{ord}").unwrap();
    }
    out
}

#[allow(dead_code)]
fn main() {
    print!("{}", run_example());
}
