// Splitting the line into cells on which `|f|` is a monomial in the
// distance to a center, for `f` given in factored form.

use std::fmt::Write;

use ultralip::prepare::{coverage_defects, prepare, verify_prepared, FactoredTerm};
use ultralip::qp::PrimeContext;
use ultralip::regions::Window;

pub fn run_example() -> String {
    let mut out = String::new();
    let ctx = PrimeContext::new(3).unwrap();
    let f = FactoredTerm::parse(ctx, "2 * t^2 * (t - 1) * (t - 10)^(-1)").unwrap();
    let w = Window::new(-2, 3, 3).unwrap();
    let pieces = prepare(&f, &w, 1).unwrap();
    writeln!(out, "f = {f}, {} pieces", pieces.len()).unwrap();
    for piece in &pieces {
        let ok = verify_prepared(&f, piece, 3).is_none();
        writeln!(out, "  {piece} [{}]", if ok { "verified" } else { "FAILED" }).unwrap();
    }
    let defects = coverage_defects(&f, &pieces, &w);
    writeln!(out, "uncovered or doubly covered points: {}", defects.len()).unwrap();
    out
}

#[allow(dead_code)]
fn main() {
    print!("{}", run_example());
}
