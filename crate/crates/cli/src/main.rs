//! `dunklpot`: Dunkl-Laplacian potential theory from the command line.
//!
//! Exit codes: 0 success (and every check passed), 1 a check or numerical
//! run failed, 2 usage or configuration error.

// Guards written as `!(a < b)` reject NaN along with the wrong order.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dunkl_core::config::load_model;
use dunkl_core::dirichlet::{simulate_exits, solve_dirichlet_mc, solve_fd, McConfig};
use dunkl_core::geom::norm;
use dunkl_core::intertwine::dunkl_kernel;
use dunkl_core::means::{harmonicity_test, minimum_principle_check, spherical_mean};
use dunkl_core::operator::dunkl_laplacian_poly;
use dunkl_core::poly::parse_poly;
use dunkl_core::verify;
use dunkl_core::{Domain, DunklModel, Error, KernelContext, Result};

#[derive(Parser)]
#[command(name = "dunklpot", version, about = "Potential theory for Dunkl Laplacians")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the Dunkl kernel E_k(x, y).
    Ek {
        /// Model file (key = value lines: dim, roots, k).
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated coordinates.
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Quadrature order per rank-one factor.
        #[arg(long, default_value_t = 64)]
        order: usize,
    },
    /// Apply Δ_k to a polynomial exactly.
    Apply {
        #[arg(long)]
        model: PathBuf,
        /// Polynomial in x1..xd, e.g. "x1^2 - 2*x1*x2".
        #[arg(long)]
        poly: String,
        /// Evaluate the image at this point instead of printing it.
        #[arg(long)]
        at: Option<String>,
    },
    /// Evaluate the heat kernel p_t(x, y).
    Heat {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Evaluate the Green function G(x, y).
    Green {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Apply the Green operator Gf and evaluate at a point.
    Greenop {
        /// Model file; the rank-one model with k = 1 when omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Function spec: poly:<expr>, indicator:<a>,<b>, or const:<c>.
        #[arg(long)]
        f: String,
        #[arg(long)]
        x: String,
        /// Half-width of the integration box per axis; defaults to the
        /// indicator support and is required for the other specs.
        #[arg(long)]
        half: Option<f64>,
        #[arg(long, default_value_t = 12)]
        levels: usize,
        #[arg(long, default_value_t = 10)]
        order: usize,
    },
    /// Mollified spherical mean M_{x,r}(g) at shell width h.
    Mean {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        g: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        h: f64,
    },
    /// Property checks; exit 0 when the property holds, 1 when flagged.
    Check {
        #[command(subcommand)]
        what: CheckCmd,
    },
    /// Deterministic Dirichlet solve on a finite-difference grid.
    DirichletFd {
        #[arg(long)]
        model: PathBuf,
        /// Domain spec: ball:R, box:h1,..,hd, annulus:r,R, interval:a,b,
        /// or intervals:a,b;c,d;...
        #[arg(long)]
        domain: String,
        /// Boundary data as a function spec.
        #[arg(long)]
        data: String,
        #[arg(long)]
        h: f64,
        /// Report u at this point, repeatable.
        #[arg(long)]
        query: Vec<String>,
        /// Write the grid as CSV (columns x1..xd, u).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo Dirichlet solve from exit clouds of the reflected
    /// jump diffusion.
    DirichletMc {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        domain: String,
        #[arg(long)]
        data: String,
        #[arg(long, default_value_t = 10_000)]
        paths: u64,
        /// Time step of the Euler chain.
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        /// Boundary capture width.
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, required = true)]
        query: Vec<String>,
        /// Write estimates as CSV (columns x1..xd, mean, stdError, paths).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample exit points of the reflected jump diffusion.
    Exits {
        /// Model file; the rank-one model with k = 1 when omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        domain: String,
        /// Start point.
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 1_000)]
        paths: u64,
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the cloud as CSV (columns pathId, x1..xd, exitTime, jumps).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named verification suite, or all of them.
    Verify {
        /// Suite name or "all".
        #[arg(long)]
        suite: String,
        /// Write results as CSV (columns suite, check, passed, measured,
        /// threshold).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Mean-value probe of Δ_k-harmonicity on a group-invariant domain.
    Harmonic {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        g: String,
        #[arg(long)]
        domain: String,
        /// Probe center, repeatable; pairs with --r by position.
        #[arg(long, required = true)]
        x: Vec<String>,
        #[arg(long, required = true)]
        r: Vec<f64>,
        #[arg(long, default_value_t = 5e-3)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum-principle hypotheses and the nonnegativity conclusion.
    Minprinciple {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        f: String,
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 0.25)]
        grid_h: f64,
        #[arg(long, default_value_t = 1e-6)]
        boundary_tol: f64,
        #[arg(long, default_value_t = 5e-3)]
        mean_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// DUNKLPOT_THREADS caps the worker pool; 0 or unset means automatic.
fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("DUNKLPOT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Error::Config(format!("DUNKLPOT_THREADS must be a number, got {raw:?}"))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// Setup problems exit 2; failures inside a run exit 1.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoConvergence(_) | Error::StepBudget { .. } => 1,
        _ => 2,
    }
}

fn dispatch(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Ek { model, x, y, order } => {
            let m = load_model(&model)?;
            let xv = parse_point(&x)?;
            let yv = parse_point(&y)?;
            println!("{}", dunkl_kernel(&m, &xv, &yv, order)?);
            Ok(0)
        }
        Cmd::Apply { model, poly, at } => {
            let m = load_model(&model)?;
            let p = parse_poly(&poly, m.dim())?;
            let image = dunkl_laplacian_poly(&m, &p)?;
            match at {
                Some(pt) => println!("{}", image.to_float().eval(&parse_point(&pt)?)),
                None => println!("{image}"),
            }
            Ok(0)
        }
        Cmd::Heat { model, t, x, y } => {
            let m = load_model(&model)?;
            let ctx = KernelContext::new(&m)?;
            println!("{}", ctx.heat(t, &parse_point(&x)?, &parse_point(&y)?)?);
            Ok(0)
        }
        Cmd::Green { model, x, y } => {
            let m = load_model(&model)?;
            let ctx = KernelContext::new(&m)?;
            println!("{}", ctx.green(&parse_point(&x)?, &parse_point(&y)?)?);
            Ok(0)
        }
        Cmd::Greenop { model, f, x, half, levels, order } => {
            let m = model_or_default(model.as_deref())?;
            let ctx = KernelContext::new(&m)?;
            let half = match half.or_else(|| indicator_reach(&f)) {
                Some(v) if v > 0.0 => v,
                Some(v) => {
                    return Err(Error::InvalidArgument(format!(
                        "--half must be positive, got {v}"
                    )))
                }
                None => {
                    return Err(Error::InvalidArgument(
                        "--half is required unless --f is an indicator".into(),
                    ))
                }
            };
            let fun = parse_fn(&f, m.dim())?;
            let xv = parse_point(&x)?;
            let halves = vec![half; m.dim()];
            println!("{}", ctx.green_apply(&*fun, &xv, &halves, levels, order)?);
            Ok(0)
        }
        Cmd::Mean { model, g, x, r, h } => {
            let m = load_model(&model)?;
            let ctx = KernelContext::new(&m)?;
            let gf = parse_fn(&g, m.dim())?;
            println!("{}", spherical_mean(&ctx, &*gf, &parse_point(&x)?, r, h)?);
            Ok(0)
        }
        Cmd::Check { what } => run_check(what),
        Cmd::DirichletFd { model, domain, data, h, query, out } => {
            let m = load_model(&model)?;
            let v = Domain::parse(m.dim(), &domain)?;
            let dataf = parse_fn(&data, m.dim())?;
            let sol = solve_fd(&m, &v, &*dataf, h)?;
            println!(
                "solved at spacing {} with residual {:.3e}",
                sol.spacing(),
                sol.residual()
            );
            for q in &query {
                let p = parse_point(q)?;
                println!("u({q}) = {}", sol.eval(&p));
            }
            if let Some(path) = out {
                let mut header = coord_header(m.dim());
                header.push("u".into());
                let rows = sol
                    .nodes()
                    .map(|(p, u)| {
                        let mut row: Vec<String> =
                            p.iter().map(|c| c.to_string()).collect();
                        row.push(u.to_string());
                        row
                    })
                    .collect::<Vec<_>>();
                write_csv(&path, &header, &rows)?;
            }
            Ok(0)
        }
        Cmd::DirichletMc { model, domain, data, paths, step, eps, seed, query, out } => {
            let m = load_model(&model)?;
            let v = Domain::parse(m.dim(), &domain)?;
            let dataf = parse_fn(&data, m.dim())?;
            let mut cfg = McConfig::new(paths, step, seed);
            cfg.eps = eps;
            let queries: Result<Vec<Vec<f64>>> =
                query.iter().map(|q| parse_point(q)).collect();
            let queries = queries?;
            let ests = solve_dirichlet_mc(&m, &v, &*dataf, &queries, &cfg)?;
            for (q, e) in queries.iter().zip(&ests) {
                println!(
                    "u({}) = {} (std error {:.3e}, {} paths)",
                    fmt_point(q),
                    e.mean,
                    e.std_error,
                    e.paths
                );
            }
            if let Some(path) = out {
                let mut header = coord_header(m.dim());
                header.extend(["mean".into(), "stdError".into(), "paths".into()]);
                let rows = queries
                    .iter()
                    .zip(&ests)
                    .map(|(q, e)| {
                        let mut row: Vec<String> =
                            q.iter().map(|c| c.to_string()).collect();
                        row.extend([
                            e.mean.to_string(),
                            e.std_error.to_string(),
                            e.paths.to_string(),
                        ]);
                        row
                    })
                    .collect::<Vec<_>>();
                write_csv(&path, &header, &rows)?;
            }
            Ok(0)
        }
        Cmd::Exits { model, domain, x, paths, step, eps, seed, out } => {
            let m = model_or_default(model.as_deref())?;
            let v = Domain::parse(m.dim(), &domain)?;
            let x0 = parse_point(&x)?;
            let mut cfg = McConfig::new(paths, step, seed);
            cfg.eps = eps;
            let exits = simulate_exits(&m, &v, &x0, &cfg)?;
            let mean_time =
                exits.iter().map(|r| r.exit_time).sum::<f64>() / exits.len().max(1) as f64;
            let jumps: u64 = exits.iter().map(|r| r.jumps).sum();
            println!(
                "{} exits, mean exit time {:.6}, {} reflection jumps",
                exits.len(),
                mean_time,
                jumps
            );
            if let Some(path) = out {
                let mut header = vec!["pathId".to_string()];
                header.extend(coord_header(m.dim()));
                header.extend(["exitTime".into(), "jumps".into()]);
                let rows = exits
                    .iter()
                    .map(|r| {
                        let mut row = vec![r.path_id.to_string()];
                        row.extend(r.exit_point.iter().map(|c| c.to_string()));
                        row.extend([r.exit_time.to_string(), r.jumps.to_string()]);
                        row
                    })
                    .collect::<Vec<_>>();
                write_csv(&path, &header, &rows)?;
            }
            Ok(0)
        }
        Cmd::Verify { suite, out } => {
            let results = if suite == "all" {
                verify::run_all()?
            } else {
                verify::run_suite(&suite)?
            };
            for r in &results {
                println!("{}", r.line());
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} checks, {} failed", results.len(), failed);
            if let Some(path) = out {
                let header = ["suite", "check", "passed", "measured", "threshold"];
                let rows = results
                    .iter()
                    .map(|r| {
                        vec![
                            r.suite.to_string(),
                            r.name.to_string(),
                            r.passed.to_string(),
                            r.measured.to_string(),
                            r.threshold.to_string(),
                        ]
                    })
                    .collect::<Vec<_>>();
                write_csv(&path, &header, &rows)?;
            }
            Ok(if failed == 0 { 0 } else { 1 })
        }
    }
}

fn run_check(what: CheckCmd) -> Result<u8> {
    match what {
        CheckCmd::Harmonic { model, g, domain, x, r, tol, out } => {
            let m = load_model(&model)?;
            if x.len() != r.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} centers but {} radii; --x and --r pair by position",
                    x.len(),
                    r.len()
                )));
            }
            let ctx = KernelContext::new(&m)?;
            let v = Domain::parse(m.dim(), &domain)?;
            let gf = parse_fn(&g, m.dim())?;
            let samples: Result<Vec<(Vec<f64>, f64)>> = x
                .iter()
                .zip(&r)
                .map(|(s, &rr)| Ok((parse_point(s)?, rr)))
                .collect();
            let samples = samples?;
            let rep = harmonicity_test(&ctx, &*gf, &v, &samples, tol)?;
            println!(
                "max mean deviation {:.6e} over {} probes (tolerance {:.1e}): {}",
                rep.max_deviation,
                samples.len(),
                tol,
                if rep.consistent { "consistent" } else { "flagged" }
            );
            if let Some(path) = out {
                let rows = vec![
                    vec!["maxDeviation".into(), rep.max_deviation.to_string()],
                    vec!["tolerance".into(), tol.to_string()],
                    vec!["consistent".into(), rep.consistent.to_string()],
                ];
                write_csv(&path, &["name", "value"], &rows)?;
            }
            Ok(if rep.consistent { 0 } else { 1 })
        }
        CheckCmd::Minprinciple {
            model,
            f,
            domain,
            grid_h,
            boundary_tol,
            mean_tol,
            out,
        } => {
            let m = load_model(&model)?;
            let ctx = KernelContext::new(&m)?;
            let omega = Domain::parse(m.dim(), &domain)?;
            let ff = parse_fn(&f, m.dim())?;
            let rep =
                minimum_principle_check(&ctx, &*ff, &omega, grid_h, boundary_tol, mean_tol)?;
            let verdict = match rep.nonnegative {
                Some(true) => "nonnegative",
                Some(false) => "negative interior value",
                None => "hypotheses failed",
            };
            println!(
                "boundary min {:.6e} (ok: {}), max mean excess {:.6e} (ok: {}), \
                 interior min {:.6e}: {verdict}",
                rep.boundary_min,
                rep.boundary_ok,
                rep.max_mean_excess,
                rep.submean_ok,
                rep.interior_min
            );
            if let Some(path) = out {
                let conclusion = match rep.nonnegative {
                    Some(b) => b.to_string(),
                    None => "none".into(),
                };
                let rows = vec![
                    vec!["boundaryMin".into(), rep.boundary_min.to_string()],
                    vec!["boundaryOk".into(), rep.boundary_ok.to_string()],
                    vec!["maxMeanExcess".into(), rep.max_mean_excess.to_string()],
                    vec!["submeanOk".into(), rep.submean_ok.to_string()],
                    vec!["interiorMin".into(), rep.interior_min.to_string()],
                    vec!["nonnegative".into(), conclusion],
                ];
                write_csv(&path, &["name", "value"], &rows)?;
            }
            Ok(if rep.nonnegative == Some(true) { 0 } else { 1 })
        }
    }
}

fn model_or_default(path: Option<&Path>) -> Result<DunklModel> {
    match path {
        Some(p) => load_model(p),
        None => DunklModel::rank_one(1.0),
    }
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|_| Error::Parse {
                offset: 0,
                message: format!("bad coordinate {:?}", t.trim()),
            })
        })
        .collect()
}

fn fmt_point(p: &[f64]) -> String {
    p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

type SampleFn = Box<dyn Fn(&[f64]) -> f64 + Sync>;

/// Builds a sample function from a spec string. `poly:` evaluates a
/// polynomial, `indicator:a,b` is 1 on the interval (a, b) in one dimension
/// and on the shell a < |y| < b otherwise, `const:c` is constant.
fn parse_fn(spec: &str, dim: usize) -> Result<SampleFn> {
    if let Some(rest) = spec.strip_prefix("poly:") {
        let p = parse_poly(rest, dim)?.to_float();
        return Ok(Box::new(move |y: &[f64]| p.eval(y)));
    }
    if let Some(rest) = spec.strip_prefix("indicator:") {
        let v = parse_point(rest)?;
        if v.len() != 2 || !(v[0] < v[1]) {
            return Err(Error::InvalidArgument(format!(
                "indicator takes a,b with a < b, got {rest:?}"
            )));
        }
        let (a, b) = (v[0], v[1]);
        return Ok(Box::new(move |y: &[f64]| {
            let s = if y.len() == 1 { y[0] } else { norm(y) };
            if a < s && s < b {
                1.0
            } else {
                0.0
            }
        }));
    }
    if let Some(rest) = spec.strip_prefix("const:") {
        let c: f64 = rest.trim().parse().map_err(|_| Error::Parse {
            offset: 0,
            message: format!("bad constant {rest:?}"),
        })?;
        return Ok(Box::new(move |_: &[f64]| c));
    }
    Err(Error::InvalidArgument(format!(
        "function spec {spec:?}; expected poly:<expr>, indicator:<a>,<b>, or const:<c>"
    )))
}

/// Integration reach that covers an indicator's support; None for other specs.
fn indicator_reach(spec: &str) -> Option<f64> {
    let rest = spec.strip_prefix("indicator:")?;
    let v = parse_point(rest).ok()?;
    if v.len() == 2 {
        Some(v[0].abs().max(v[1].abs()))
    } else {
        None
    }
}

fn coord_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x{i}")).collect()
}

/// Header first, one row per line, LF endings, '.' decimal point. An empty
/// row set still writes the header line.
fn write_csv<S: AsRef<str>>(path: &Path, header: &[S], rows: &[Vec<String>]) -> Result<()> {
    let mut text = header
        .iter()
        .map(|h| h.as_ref())
        .collect::<Vec<_>>()
        .join(",");
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}
