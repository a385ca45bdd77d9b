// Balls `c + p^k·Z_p`, their nesting, and the finite representative sets
// that stand in for a valuation window.

use std::fmt::Write;

use ultralip::qp::PrimeContext;
use ultralip::regions::{enumerate, Ball, Window};

pub fn run_example() -> String {
    let mut out = String::new();
    let ctx = PrimeContext::new(2).unwrap();
    let big = Ball::parse(ctx, "1 + 2^1").unwrap();
    let small = Ball::parse(ctx, "5 + 2^3").unwrap();
    let other = Ball::parse(ctx, "2 + 2^2").unwrap();
    writeln!(out, "{big} vs {small}: {:?}", big.relation(&small)).unwrap();
    writeln!(out, "{big} vs {other}: {:?}", big.relation(&other)).unwrap();
    let subs: Vec<String> = big.sub_balls(2).iter().map(|b| b.canonical().to_string()).collect();
    writeln!(out, "sub-balls of {big} at depth 2: {}", subs.join(", ")).unwrap();

    let w = Window::new(-1, 1, 2).unwrap();
    let reps = enumerate(&w, ctx);
    writeln!(out, "window ord in [-1, 1] at depth 2: {} representatives", reps.len()).unwrap();
    for (x, b) in reps.points.iter().zip(&reps.balls) {
        writeln!(out, "  {x} stands for {b}").unwrap();
    }
    out
}

#[allow(dead_code)]
fn main() {
    print!("{}", run_example());
}
