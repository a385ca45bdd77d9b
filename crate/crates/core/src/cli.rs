//! The `ultralip` command line.
//!
//! Exit codes: 0 success, 1 the analysis found a violation or
//! counterexample, 2 bad usage or input.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::cells::Cell;
use crate::jacobian::{
    check_ball_correspondence, check_jacobian_on_ball, map_ball, JacobianOutcome, LipschitzDirection,
};
use crate::lipschitz::{
    certified_cell_constant, counterexample_exloc, counterexample_exloc2, empirical_lipschitz, CounterexampleTrace,
    LipschitzReport,
};
use crate::prepare::{coverage_defects, prepare, verify_prepared, FactoredTerm};
use crate::qp::{PadicScalar, PrimeContext};
use crate::regions::{Ball, Window};
use crate::terms::{parse, parse_condition, parse_term, Function, Parsed, Point};

#[derive(Parser, Debug)]
#[command(name = "ultralip", version, about = "Exact p-adic cell, Jacobian and Lipschitz analysis over Q_p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// The prime p.
    #[arg(short = 'p', long = "prime", default_value_t = 3)]
    prime: u64,
    /// Enumeration depth M.
    #[arg(short = 'M', long = "depth", default_value_t = 3)]
    depth: i64,
    /// Valuation window `a:b`.
    #[arg(long, default_value = "0:3", allow_hyphen_values = true)]
    window: String,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Worker threads for pair scans.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug, Clone)]
struct CellArgs {
    /// Cell literal `cell(center=..; coset=..; ..)`.
    #[arg(long)]
    cell: Option<String>,
    /// Center of a cell with no level bounds (with --coset).
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    /// Coset `l*Q(m,n)` (with --center).
    #[arg(long, allow_hyphen_values = true)]
    coset: Option<String>,
    /// Base point coordinates `name=value`.
    #[arg(long = "base", allow_hyphen_values = true)]
    base: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a term at a point.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'f', long = "function", allow_hyphen_values = true)]
        function: String,
        /// Assignments `name=value`.
        #[arg(long = "at", allow_hyphen_values = true)]
        at: Vec<String>,
    },
    /// The p-adic valuation of a rational.
    Ord {
        #[command(flatten)]
        common: Common,
        #[arg(allow_hyphen_values = true)]
        value: String,
    },
    /// The angular component ac_n of a rational.
    Ac {
        #[command(flatten)]
        common: Common,
        #[arg(allow_hyphen_values = true)]
        value: String,
        #[arg(short = 'n', long, default_value_t = 1)]
        n: u32,
    },
    /// The maximal ball of a cell around a point.
    BallOfCell {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        cell: CellArgs,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// The balls of a cell with levels in the window.
    EnumerateBalls {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        cell: CellArgs,
    },
    /// Certify the Jacobian property on a ball.
    Jacobian {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'f', long = "function", allow_hyphen_values = true)]
        function: String,
        #[arg(long, allow_hyphen_values = true)]
        ball: String,
    },
    /// The image of a ball.
    MapBall {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'f', long = "function", allow_hyphen_values = true)]
        function: String,
        #[arg(long, allow_hyphen_values = true)]
        ball: String,
    },
    /// Match the balls of a cell with the balls of its image.
    Correspondence {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        cell: CellArgs,
        #[arg(short = 'f', long = "function", allow_hyphen_values = true)]
        function: String,
        /// Extra candidate centers for the image cell.
        #[arg(long = "candidate", allow_hyphen_values = true)]
        candidates: Vec<String>,
    },
    /// Empirical Lipschitz constant (a lower bound).
    Lipschitz {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'f', long = "function", allow_hyphen_values = true)]
        function: String,
        #[arg(long, default_value = "true", allow_hyphen_values = true)]
        region: String,
        /// Coordinates for multi-variable scans, comma separated.
        #[arg(long)]
        vars: Option<String>,
    },
    /// Certified Lipschitz constant on a cell centered at 0.
    Certify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        cell: CellArgs,
        #[arg(short = 'f', long = "function", allow_hyphen_values = true)]
        function: String,
        /// `ε = p^e`; defaults to the smallest value the certificates allow.
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Option<i64>,
    },
    /// Prepared cell decomposition of `u * (t - c1)^a1 * ...`.
    Prepare {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'f', long = "function", allow_hyphen_values = true)]
        function: String,
        /// Angular-component depth of the split.
        #[arg(long = "ac-depth", default_value_t = 1)]
        ac_depth: u32,
    },
    /// Reproduce a counterexample family.
    Example {
        #[command(subcommand)]
        which: Example,
    },
}

#[derive(Subcommand, Debug)]
enum Example {
    /// `f(t) = |t|`: locally constant but not locally Lipschitz.
    Exloc {
        #[command(flatten)]
        common: Common,
    },
    /// A locally constant function with zero derivative, not locally
    /// Lipschitz around 0.
    Exloc2 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        levels: i64,
    },
}

struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

type Outcome = Result<(String, i32), Usage>;

/// Runs the command line on `args` (program name first), writing the report
/// to `out` and usage errors to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok((text, code)) => {
            let _ = writeln!(out, "{}", text.trim_end());
            code
        }
        Err(Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

struct Ctx {
    ctx: PrimeContext,
    depth: u32,
    window: Window,
    json: bool,
    jobs: usize,
}

fn setup(c: &Common) -> Result<Ctx, Usage> {
    let ctx = PrimeContext::new(c.prime)?;
    let (a, b) = c.window.split_once(':').ok_or_else(|| Usage(format!("window must be a:b, got `{}`", c.window)))?;
    let parse_level = |s: &str| s.trim().parse::<i64>().map_err(|_| Usage(format!("bad window bound `{s}`")));
    let window = Window::new(parse_level(a)?, parse_level(b)?, c.depth)?;
    Ok(Ctx { ctx, depth: window.depth, window, json: c.json, jobs: c.jobs.max(1) })
}

fn render<T: Serialize>(s: &Ctx, value: &T, text: String) -> Result<String, Usage> {
    if s.json {
        Ok(serde_json::to_string_pretty(value)?)
    } else {
        Ok(text)
    }
}

fn assignments(ctx: PrimeContext, items: &[String]) -> Result<Point, Usage> {
    let mut point = Point::new();
    for item in items {
        let (k, v) = item.split_once('=').ok_or_else(|| Usage(format!("expected name=value, got `{item}`")))?;
        point.insert(k.trim().to_string(), ctx.parse(v)?);
    }
    Ok(point)
}

fn cell_from(ctx: PrimeContext, a: &CellArgs) -> Result<(Cell, Point), Usage> {
    let base = assignments(ctx, &a.base)?;
    let cell = match (&a.cell, &a.center, &a.coset) {
        (Some(lit), None, None) => Cell::parse(ctx, lit)?,
        (None, Some(center), Some(coset)) => Cell::parse(ctx, &format!("cell(center={center}; coset={coset}; all)"))?,
        _ => return Err(Usage("give either --cell or both --center and --coset".into())),
    };
    Ok((cell, base))
}

fn ball_text(b: &Ball) -> String {
    let b = b.canonical();
    format!("{} + {}^{}", b.center, b.p(), b.radius_ord)
}

fn norm_text(k: Option<i64>, p: u64) -> String {
    k.map_or("0".to_string(), |k| format!("{p}^{k}"))
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Eval { common, function, at } => {
            let s = setup(&common)?;
            let point = assignments(s.ctx, &at)?;
            let f = match parse(&function)? {
                Parsed::Term(t) => Function::Term(t),
                Parsed::Piecewise(p) => Function::Piecewise(p),
                Parsed::Condition(c) => {
                    let v = c.evaluate(s.ctx, &point)?;
                    return Ok((render(&s, &json!({ "value": v }), v.to_string())?, 0));
                }
            };
            let v = f.evaluate(s.ctx, &point)?;
            let ord = v.ord_finite();
            let text = format!("{v}\nord = {}\n|x| = {}", v.ord(), norm_text(ord.map(|o| -o), s.ctx.p()));
            Ok((render(&s, &json!({ "value": v, "ord": ord }), text)?, 0))
        }
        Command::Ord { common, value } => {
            let s = setup(&common)?;
            let x = s.ctx.parse(&value)?;
            let ord = x.ord_finite();
            Ok((render(&s, &json!({ "value": x, "ord": ord }), x.ord().to_string())?, 0))
        }
        Command::Ac { common, value, n } => {
            if n == 0 {
                return Err(Usage("n must be positive".into()));
            }
            let s = setup(&common)?;
            let x = s.ctx.parse(&value)?;
            let r = x.ac(n).residue;
            Ok((render(&s, &json!({ "value": x, "n": n, "ac": r }), r.to_string())?, 0))
        }
        Command::BallOfCell { common, cell, at } => {
            let s = setup(&common)?;
            let (cell, base) = cell_from(s.ctx, &cell)?;
            let t = s.ctx.parse(&at)?;
            let ball = cell.ball_of(&t, &base)?;
            Ok((render(&s, &ball.canonical(), ball_text(&ball))?, 0))
        }
        Command::EnumerateBalls { common, cell } => {
            let s = setup(&common)?;
            let (cell, base) = cell_from(s.ctx, &cell)?;
            let balls: Vec<Ball> = cell.enumerate_balls(&base, &s.window)?.iter().map(Ball::canonical).collect();
            let text = balls.iter().map(ball_text).collect::<Vec<_>>().join("\n");
            Ok((render(&s, &balls, text)?, 0))
        }
        Command::Jacobian { common, function, ball } => {
            let s = setup(&common)?;
            let f = parse_term(&function)?;
            let ball = Ball::parse(s.ctx, &ball)?;
            match check_jacobian_on_ball(&f, &ball, s.depth)? {
                JacobianOutcome::Certified(c) => {
                    let text = format!(
                        "certified to depth {}: {} -> {}, jac_ord = {}",
                        c.verified_depth,
                        ball_text(&c.ball),
                        ball_text(&c.image),
                        c.jac_ord
                    );
                    Ok((render(&s, &c, text)?, 0))
                }
                JacobianOutcome::Violated(v) => Ok((render(&s, &v, format!("violation: {v}"))?, 1)),
            }
        }
        Command::MapBall { common, function, ball } => {
            let s = setup(&common)?;
            let f = parse_term(&function)?;
            let ball = Ball::parse(s.ctx, &ball)?;
            match map_ball(&f, &ball, s.depth)? {
                Ok(image) => Ok((render(&s, &image.canonical(), ball_text(&image))?, 0)),
                Err(nb) => {
                    let value = json!({ "not_a_ball": nb.detail, "witness": [nb.witness.0, nb.witness.1] });
                    let text = format!("not a ball: {} (witness {}, {})", nb.detail, nb.witness.0, nb.witness.1);
                    Ok((render(&s, &value, text)?, 1))
                }
            }
        }
        Command::Correspondence { common, cell, function, candidates } => {
            let s = setup(&common)?;
            let (cell, base) = cell_from(s.ctx, &cell)?;
            let f = parse_term(&function)?;
            let extra: Vec<PadicScalar> = candidates.iter().map(|c| s.ctx.parse(c)).collect::<Result<_, _>>()?;
            match check_ball_correspondence(&f, &cell, &base, &s.window, s.depth, &extra)? {
                Ok(corr) => {
                    let pairs: Vec<_> = corr
                        .pairs
                        .iter()
                        .zip(&corr.certificates)
                        .map(|((a, b), c)| {
                            let tag = c.as_ref().map(|c| {
                                if c.jac_ord >= 0 {
                                    LipschitzDirection::Forward1Lip
                                } else {
                                    LipschitzDirection::Inverse1Lip
                                }
                            });
                            json!({
                                "source": a.canonical(),
                                "image": b.canonical(),
                                "jac_ord": c.as_ref().map(|c| c.jac_ord),
                                "direction": tag,
                            })
                        })
                        .collect();
                    let cells: Vec<String> = corr.image_cells.iter().map(|c| c.to_string()).collect();
                    let mut text: Vec<String> =
                        corr.pairs.iter().map(|(a, b)| format!("{} -> {}", ball_text(a), ball_text(b))).collect();
                    text.extend(cells.iter().map(|c| format!("image cell: {c}")));
                    let value = json!({ "pairs": pairs, "image_cells": cells });
                    Ok((render(&s, &value, text.join("\n"))?, 0))
                }
                Err(failure) => {
                    let value = json!({ "failure": failure.to_string() });
                    Ok((render(&s, &value, format!("failure: {failure}"))?, 1))
                }
            }
        }
        Command::Lipschitz { common, function, region, vars } => {
            let s = setup(&common)?;
            let f = match parse(&function)? {
                Parsed::Term(t) => Function::Term(t),
                Parsed::Piecewise(p) => Function::Piecewise(p),
                Parsed::Condition(_) => return Err(Usage("expected a term or piecewise function".into())),
            };
            let region = parse_condition(&region)?;
            let vars: Option<Vec<String>> = vars.map(|v| v.split(',').map(|x| x.trim().to_string()).collect());
            let report = empirical_lipschitz(&f, vars.as_deref(), &region, &s.window, s.ctx, s.jobs)?;
            Ok((render(&s, &report, report_text(&report, s.ctx.p()))?, 0))
        }
        Command::Certify { common, cell, function, epsilon } => {
            let s = setup(&common)?;
            let (cell, _) = cell_from(s.ctx, &cell)?;
            let f = parse_term(&function)?;
            let corr = match check_ball_correspondence(&f, &cell, &Point::new(), &s.window, s.depth, &[])? {
                Ok(c) => c,
                Err(failure) => {
                    let value = json!({ "failure": failure.to_string() });
                    return Ok((render(&s, &value, format!("failure: {failure}"))?, 1));
                }
            };
            let min_jac = corr.certificates.iter().flatten().map(|c| c.jac_ord).min().unwrap_or(0);
            let e = epsilon.unwrap_or(-min_jac);
            let certified = match certified_cell_constant(&cell, &corr, e) {
                Ok(r) => r,
                Err(err) => {
                    let value = json!({ "failure": err.to_string() });
                    return Ok((render(&s, &value, format!("failure: {err}"))?, 1));
                }
            };
            let region = cell.region_condition();
            let empirical = empirical_lipschitz(&Function::Term(f), None, &region, &s.window, s.ctx, s.jobs)?;
            let dominated = match (empirical.constant_exponent, certified.constant_exponent) {
                (Some(lo), Some(hi)) => lo <= hi,
                (None, _) => true,
                (Some(_), None) => false,
            };
            let value = json!({ "certified": certified, "empirical": empirical, "dominates": dominated });
            let text = format!(
                "{}\n{}\ncertified dominates empirical: {dominated}",
                report_text(&certified, s.ctx.p()),
                report_text(&empirical, s.ctx.p())
            );
            Ok((render(&s, &value, text)?, if dominated { 0 } else { 1 }))
        }
        Command::Prepare { common, function, ac_depth } => {
            let s = setup(&common)?;
            let f = FactoredTerm::parse(s.ctx, &function)?;
            let pieces = prepare(&f, &s.window, ac_depth)?;
            let failures: Vec<Option<PadicScalar>> = pieces.iter().map(|p| verify_prepared(&f, p, s.depth)).collect();
            let defects = coverage_defects(&f, &pieces, &s.window);
            let ok = failures.iter().all(Option::is_none) && defects.is_empty();
            let rows: Vec<_> = pieces
                .iter()
                .zip(&failures)
                .map(|(p, fail)| json!({ "piece": p, "verified": fail.is_none(), "witness": fail }))
                .collect();
            let mut text: Vec<String> = pieces
                .iter()
                .zip(&failures)
                .map(|(p, fail)| match fail {
                    None => format!("{p}  [verified to depth {}]", s.depth),
                    Some(t) => format!("{p}  [FAILS at t = {t}]"),
                })
                .collect();
            if !defects.is_empty() {
                text.push(format!("coverage defects at {defects:?}"));
            }
            let value = json!({ "function": f.to_string(), "pieces": rows, "coverage_defects": defects });
            Ok((render(&s, &value, text.join("\n"))?, if ok { 0 } else { 1 }))
        }
        Command::Example { which: Example::Exloc { common } } => {
            let s = setup(&common)?;
            let trace = counterexample_exloc(&s.window, s.ctx)?;
            let code = i32::from(trace.failure.is_some());
            Ok((render(&s, &trace, trace_text(&trace))?, code))
        }
        Command::Example { which: Example::Exloc2 { common, levels } } => {
            if levels < 1 {
                return Err(Usage("--levels must be at least 1".into()));
            }
            let s = setup(&common)?;
            let trace = counterexample_exloc2(levels, s.ctx)?;
            let code = i32::from(trace.failure.is_some());
            Ok((render(&s, &trace, trace_text(&trace))?, code))
        }
    }
}

fn report_text(r: &LipschitzReport, p: u64) -> String {
    let mut s = r.to_string();
    if let Some(k) = r.constant_exponent {
        s = s.replacen(&format!("C = p^{k}"), &format!("C = {p}^{k}"), 1);
    }
    s
}

fn trace_text(t: &CounterexampleTrace) -> String {
    let mut lines = vec![format!("p = {}, levels {}..{}", t.p, t.levels.0, t.levels.1)];
    for e in &t.entries {
        lines.push(format!(
            "n = {}: x1 = {}, x2 = {}, |x1 - x2| = {}, |f(x1) - f(x2)| = {}, ratio = {}",
            e.n,
            e.x1,
            e.x2,
            norm_text(Some(e.distance_exponent), t.p),
            norm_text(Some(e.value_exponent), t.p),
            norm_text(Some(e.ratio_exponent), t.p),
        ));
    }
    for (n, k) in &t.derivative_trace {
        lines.push(format!("n = {n}: |g(p^n) - g(0)| / |p^n| = {}", norm_text(Some(*k), t.p)));
    }
    lines.push(format!("pairs checked: {}", t.pairs_checked));
    match &t.failure {
        None => lines.push("all identities hold".to_string()),
        Some((a, b)) => lines.push(format!("identity fails at ({a}, {b})")),
    }
    lines.join("\n")
}
