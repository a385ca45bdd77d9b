// Matching the balls of a cell with the balls of its image under a map,
// and fitting a cell to the images.

use std::fmt::Write;

use ultralip::cells::Cell;
use ultralip::jacobian::check_ball_correspondence;
use ultralip::qp::PrimeContext;
use ultralip::regions::Window;
use ultralip::terms::{parse_term, Point};

pub fn run_example() -> String {
    let mut out = String::new();
    let ctx = PrimeContext::new(5).unwrap();
    let cell = Cell::parse(ctx, "cell(center=0; coset=1*Q(1,1); all)").unwrap();
    let w = Window::new(0, 3, 1).unwrap();

    let cube = parse_term("t^3").unwrap();
    let corr = check_ball_correspondence(&cube, &cell, &Point::new(), &w, 3, &[])
        .unwrap()
        .expect("t^3 is a bijection on this cell");
    for ((src, img), cert) in corr.pairs.iter().zip(&corr.certificates) {
        let jac = cert.as_ref().map(|c| c.jac_ord.to_string()).unwrap_or_else(|| "-".into());
        writeln!(out, "{src} -> {img} (ord f' = {jac})").unwrap();
    }
    for c in &corr.image_cells {
        writeln!(out, "image cell: {c}").unwrap();
    }

    // `(t - 1)^2` identifies `t` and `2 - t`, both in `1 + 5Z_5`.
    let fold = parse_term("(t - 1)^2").unwrap();
    match check_ball_correspondence(&fold, &cell, &Point::new(), &w, 2, &[]).unwrap() {
        Ok(_) => writeln!(out, "(t - 1)^2: matched").unwrap(),
        Err(failure) => writeln!(out, "(t - 1)^2: {failure}").unwrap(),
    }
    out
}

#[allow(dead_code)]
fn main() {
    print!("{}", run_example());
}
