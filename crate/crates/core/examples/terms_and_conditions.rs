// Parsing, evaluating and differentiating terms, conditions and
// piecewise definitions.

use std::fmt::Write;

use ultralip::qp::PrimeContext;
use ultralip::terms::{parse, parse_condition, parse_piecewise, parse_term, point1, Parsed};

pub fn run_example() -> String {
    let mut out = String::new();
    let ctx = PrimeContext::new(5).unwrap();

    let f = parse_term("t^3 - 2*t/5 + normval(t - 1)").unwrap();
    let df = f.differentiate("t").unwrap();
    let x = ctx.int(6);
    writeln!(out, "f = {f}").unwrap();
    writeln!(out, "f' = {df}").unwrap();
    writeln!(out, "f(6) = {}, f'(6) = {}", f.eval_at("t", &x).unwrap(), df.eval_at("t", &x).unwrap()).unwrap();

    let cond = parse_condition("|t| < |1| && ord(t) % 2 = 1").unwrap();
    for v in [5, 25, 125, 3] {
        let holds = cond.eval_at("t", &ctx.int(v)).unwrap();
        writeln!(out, "{cond} at t = {v}: {holds}").unwrap();
    }

    let pw = parse_piecewise("|t| <= |1| => t^2; |1| < |t| => 1/t", &["t"]).unwrap();
    for v in ["2", "1/5"] {
        let value = pw.evaluate(ctx, &point1("t", ctx.parse(v).unwrap())).unwrap();
        writeln!(out, "piecewise at t = {v}: {value}").unwrap();
    }

    match parse("t in 3*Q(1,2)").unwrap() {
        Parsed::Condition(c) => writeln!(out, "parsed a condition: {c}").unwrap(),
        other => writeln!(out, "unexpected: {other:?}").unwrap(),
    }
    out
}

#[allow(dead_code)]
fn main() {
    print!("{}", run_example());
}
