// Valuations, norms, angular components and the cosets `λ·Q_{m,n}` on
// exact rationals.

use std::fmt::Write;

use ultralip::qp::{CosetSpec, PrimeContext};

pub fn run_example() -> String {
    let mut out = String::new();
    let ctx = PrimeContext::new(3).expect("3 is prime");
    for text in ["45/2", "-7/27", "1/3", "0"] {
        let x = ctx.parse(text).expect("rational literal");
        let ac = if x.is_zero() { 0 } else { x.ac(2).residue };
        writeln!(out, "x = {x}: ord = {}, |x| = {}, ac_2 = {ac}", x.ord(), x.norm().render(3)).unwrap();
    }

    // Q_{1,2}: even valuation and unit part 1 mod 3.
    let q = CosetSpec::new(ctx.one(), 1, 2).unwrap();
    let shifted = CosetSpec::new(ctx.int(2), 1, 2).unwrap();
    for x in [ctx.int(9), ctx.int(4), ctx.int(18), ctx.int(3)] {
        writeln!(out, "{x} in {q}: {}, in {shifted}: {}", q.contains(&x), shifted.contains(&x)).unwrap();
    }
    out
}

#[allow(dead_code)]
fn main() {
    print!("{}", run_example());
}
