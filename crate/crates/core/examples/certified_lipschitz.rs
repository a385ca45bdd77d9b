// A certified Lipschitz constant for a map on a cell around 0, obtained
// from per-ball Jacobian certificates and compared with the empirical
// lower bound.

use std::fmt::Write;

use ultralip::cells::Cell;
use ultralip::jacobian::check_ball_correspondence;
use ultralip::lipschitz::{certified_cell_constant, empirical_lipschitz};
use ultralip::qp::PrimeContext;
use ultralip::regions::Window;
use ultralip::terms::{parse_term, Function, Point};

pub fn run_example() -> String {
    let mut out = String::new();
    let ctx = PrimeContext::new(3).unwrap();
    let cell = Cell::parse(ctx, "cell(center=0; coset=1*Q(1,1); ord in [0,3])").unwrap();
    let f = parse_term("t^2").unwrap();
    let w = Window::new(0, 3, 1).unwrap();
    let corr = check_ball_correspondence(&f, &cell, &Point::new(), &w, 3, &[]).unwrap().unwrap();
    let epsilon = corr.certificates.iter().flatten().map(|c| -c.jac_ord).max().unwrap_or(0);
    let certified = certified_cell_constant(&cell, &corr, epsilon).unwrap();
    writeln!(out, "epsilon = 3^{epsilon}").unwrap();
    writeln!(out, "certified: {certified}").unwrap();

    let empirical =
        empirical_lipschitz(&Function::Term(f), None, &cell.region_condition(), &w.with_depth(3), ctx, 1).unwrap();
    writeln!(out, "empirical: {empirical}").unwrap();
    let dominates = match (certified.constant_exponent, empirical.constant_exponent) {
        (Some(c), Some(e)) => e <= c,
        (_, None) => true,
        (None, Some(_)) => false,
    };
    writeln!(out, "certified bound dominates the sample: {dominates}").unwrap();
    out
}

#[allow(dead_code)]
fn main() {
    print!("{}", run_example());
}
