// Cells `{t : ord(t - c) in [lo, hi], t - c in λ·Q_{m,n}}`: membership,
// the maximal ball around a point, enumeration, and fitting cells to a
// family of balls.

use std::fmt::Write;

use ultralip::cells::{fit_cell, Cell};
use ultralip::qp::PrimeContext;
use ultralip::regions::Window;
use ultralip::terms::Point;

pub fn run_example() -> String {
    let mut out = String::new();
    let ctx = PrimeContext::new(3).unwrap();
    let base = Point::new();
    let cell = Cell::parse(ctx, "cell(center=1/3; coset=2*Q(1,2); ord in [-1,3])").unwrap();
    writeln!(out, "{cell}").unwrap();

    for t in ["7/3", "19/3", "55/3", "4/3"] {
        let t = ctx.parse(t).unwrap();
        let inside = cell.contains(&t, &base).unwrap();
        let ball = if inside { cell.ball_of(&t, &base).unwrap().to_string() } else { "-".into() };
        writeln!(out, "  t = {t}: inside = {inside}, ball = {ball}").unwrap();
    }

    let w = Window::new(-1, 3, 1).unwrap();
    let balls = cell.enumerate_balls(&base, &w).unwrap();
    writeln!(out, "balls with levels in [-1, 3]: {}", balls.len()).unwrap();

    // Refitting the balls recovers a description with the same center.
    let fitted = fit_cell(&balls, &[ctx.parse("1/3").unwrap()]).unwrap();
    for c in &fitted {
        writeln!(out, "  refit: {c}").unwrap();
    }
    out
}

#[allow(dead_code)]
fn main() {
    print!("{}", run_example());
}
