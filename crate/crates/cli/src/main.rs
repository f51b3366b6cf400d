//! polymer-endpoint: tables and experiments for the endpoint distribution
//! of directed polymers.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 usage or configuration
//! error, 3 numerical non-convergence (partial output is still emitted).

mod envelope;
mod selftest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use envelope::{Cell, Format, OutputEnvelope, Row};
use polymer_endpoint::dist::{self, JointRoute, NumericsConfig, SupPointRoute};
use polymer_endpoint::tails;
use polymer_endpoint::{lpp, Error};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "polymer-endpoint", version, about = "Fredholm-determinant numerics for the directed-polymer endpoint law", max_term_width = 100)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    /// Quadrature node budget per interval.
    #[arg(long, global = true)]
    quad_n: Option<usize>,
    /// Grid-refinement tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Truncation padding.
    #[arg(long, global = true)]
    pad: Option<f64>,
    /// Marginalization window for the max height, as LO:HI.
    #[arg(long, global = true, value_parser = parse_window)]
    m_window: Option<(f64, f64)>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Tracy-Widom distribution tables.
    Tw {
        #[arg(value_enum)]
        kind: TwKind,
        /// Evaluation grid LO:HI:COUNT.
        #[arg(long, value_parser = parse_grid)]
        grid: GridSpec,
    },
    /// Endpoint-law tables: density, tails, moments, joint density.
    Endpoint {
        #[command(subcommand)]
        what: EndpointCmd,
    },
    /// Two-time laws: joint sup/point determinants and the extended kernel.
    Twotime {
        #[command(subcommand)]
        what: TwotimeCmd,
    },
    /// Geometric last passage percolation experiment.
    Lpp(LppArgs),
    /// Run the built-in invariant suites.
    Selftest {
        #[arg(value_enum, default_value_t = SelftestLevel::Quick)]
        level: SelftestLevel,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TwKind {
    Gue,
    Goe,
}

#[derive(Subcommand)]
enum EndpointCmd {
    /// f_end(t) on a grid.
    Density {
        #[arg(long, value_parser = parse_grid)]
        grid: GridSpec,
    },
    /// P(|T| > t) with its analytic envelopes.
    Tail {
        #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
        t: Vec<f64>,
        /// Constant of the upper envelope.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Coefficient of the t^{3/2} correction in the upper envelope.
        #[arg(long, default_value_t = 2.0)]
        c32: f64,
        /// Lower-envelope exponent (must exceed 32/3).
        #[arg(long, default_value_t = 10.7)]
        kappa: f64,
    },
    /// Mass, variance, excess kurtosis and odd moments of f_end.
    Moments {
        #[arg(long, default_value_t = 4.0)]
        t_max: f64,
    },
    /// Joint density f(t, m) on a product grid.
    Joint {
        #[arg(long, value_parser = parse_grid)]
        t_grid: GridSpec,
        #[arg(long, value_parser = parse_grid)]
        m_grid: GridSpec,
    },
}

#[derive(Subcommand)]
enum TwotimeCmd {
    /// P(sup law up to t, point law at t+s) by scalar and/or matrix route.
    SupPoint {
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        /// Barrier levels a = b = beta t^2.
        #[arg(long, conflicts_with_all = ["a", "b"])]
        beta: Option<f64>,
        #[arg(long, default_value_t = 4.0)]
        a: f64,
        #[arg(long, default_value_t = 4.0)]
        b: f64,
        #[arg(long, value_enum, default_value_t = RouteArg::Both)]
        route: RouteArg,
    },
    /// P(A_2(t0) <= x0, A_2(t1) <= x1) via the extended Airy kernel.
    Extended {
        #[arg(long)]
        t0: f64,
        #[arg(long)]
        x0: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        x1: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Scalar,
    Matrix,
    Both,
}

#[derive(Args)]
struct LppArgs {
    /// Path length N.
    #[arg(long, default_value_t = 400)]
    n_steps: usize,
    /// Geometric weight parameter.
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Variance-matching target; "auto" uses the model endpoint variance.
    #[arg(long, default_value = "auto")]
    scale: String,
    /// Dump raw samples as CSV (sample_index, endpoint, passage_time).
    #[arg(long)]
    dump: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SelftestLevel {
    Quick,
    Full,
}

#[derive(Clone, Copy)]
struct GridSpec {
    lo: f64,
    hi: f64,
    count: usize,
}

impl GridSpec {
    fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        (0..self.count)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid must be LO:HI:COUNT, got '{s}'"));
    }
    let lo: f64 = parts[0].parse().map_err(|e| format!("bad grid lo: {e}"))?;
    let hi: f64 = parts[1].parse().map_err(|e| format!("bad grid hi: {e}"))?;
    let count: usize = parts[2].parse().map_err(|e| format!("bad grid count: {e}"))?;
    if count == 0 || hi < lo {
        return Err(format!("grid '{s}' is empty or reversed"));
    }
    Ok(GridSpec { lo, hi, count })
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        return Err(format!("window must be LO:HI, got '{s}'"));
    }
    let lo: f64 = parts[0].parse().map_err(|e| format!("bad lo: {e}"))?;
    let hi: f64 = parts[1].parse().map_err(|e| format!("bad hi: {e}"))?;
    Ok((lo, hi))
}

/// Maps library errors to exit codes: config/domain problems are usage
/// errors (2), numerical failures are non-convergence (3).
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Domain(_) | Error::Calibration(_) | Error::Fit(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("POLYMER_ENDPOINT_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let mut cfg = NumericsConfig::default();
    if let Some(n) = cli.quad_n {
        cfg.quad_n = n;
    }
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    if let Some(p) = cli.pad {
        cfg.trunc_pad = p;
    }
    if let Some(w) = cli.m_window {
        cfg.m_window = w;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };

    let result = run(&cli.command, &cfg);
    let (envelope, code) = match result {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    let rendered = envelope.render(format);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{rendered}"),
    }
    ExitCode::from(code)
}

fn echo_cfg(env: &mut OutputEnvelope, cfg: &NumericsConfig) {
    env.echo("quad_n", cfg.quad_n);
    env.echo("tol", cfg.tol);
    env.echo("trunc_pad", cfg.trunc_pad);
    env.echo("m_window", format!("{}:{}", cfg.m_window.0, cfg.m_window.1));
}

fn run(cmd: &Command, cfg: &NumericsConfig) -> Result<(OutputEnvelope, u8), Error> {
    match cmd {
        Command::Tw { kind, grid } => cmd_tw(*kind, grid, cfg),
        Command::Endpoint { what } => cmd_endpoint(what, cfg),
        Command::Twotime { what } => cmd_twotime(what, cfg),
        Command::Lpp(args) => cmd_lpp(args, cfg),
        Command::Selftest { level } => Ok(selftest::run(*level, cfg)),
    }
}

fn cmd_tw(kind: TwKind, grid: &GridSpec, cfg: &NumericsConfig) -> Result<(OutputEnvelope, u8), Error> {
    let name = match kind {
        TwKind::Gue => "tw gue",
        TwKind::Goe => "tw goe",
    };
    let mut env = OutputEnvelope::new(name);
    echo_cfg(&mut env, cfg);
    env.echo("grid", format!("{}:{}:{}", grid.lo, grid.hi, grid.count));
    let mut all_converged = true;
    for x in grid.points() {
        let det = match kind {
            TwKind::Gue => dist::f_gue(x, cfg)?,
            TwKind::Goe => dist::f_goe(x, cfg)?,
        };
        all_converged &= det.converged;
        env.rows.push(vec![
            ("x", Cell::Num(x)),
            ("f", Cell::Num(det.value)),
            ("converged", Cell::Bool(det.converged)),
            ("delta", Cell::Num(det.delta)),
        ]);
    }
    let code = if all_converged {
        0
    } else {
        env.warnings.push("one or more grid points did not converge".into());
        3
    };
    Ok((env, code))
}

fn cmd_endpoint(what: &EndpointCmd, cfg: &NumericsConfig) -> Result<(OutputEnvelope, u8), Error> {
    match what {
        EndpointCmd::Density { grid } => {
            let mut env = OutputEnvelope::new("endpoint density");
            echo_cfg(&mut env, cfg);
            env.echo("grid", format!("{}:{}:{}", grid.lo, grid.hi, grid.count));
            let table = dist::endpoint_table(&grid.points(), cfg)?;
            for ((&t, &f), &ok) in table
                .t_nodes
                .iter()
                .zip(&table.values)
                .zip(&table.converged)
            {
                env.rows.push(vec![
                    ("t", Cell::Num(t)),
                    ("f_end", Cell::Num(f)),
                    ("converged", Cell::Bool(ok)),
                ]);
            }
            Ok((env, 0))
        }
        EndpointCmd::Tail { t, c, c32, kappa } => {
            let mut env = OutputEnvelope::new("endpoint tail");
            echo_cfg(&mut env, cfg);
            env.echo("c", c);
            env.echo("c32", c32);
            env.echo("kappa", kappa);
            for &ti in t {
                let prob = dist::endpoint_tail(ti, cfg)?;
                let rec = tails::TailRecord::new(ti, prob, *c, *c32, *kappa)?;
                env.rows.push(vec![
                    ("t", Cell::Num(ti)),
                    ("prob", Cell::Num(rec.prob)),
                    ("log_prob", Cell::Num(rec.log_prob)),
                    ("lower_env", Cell::Num(rec.lower_env)),
                    ("upper_env", Cell::Num(rec.upper_env)),
                ]);
            }
            Ok((env, 0))
        }
        EndpointCmd::Moments { t_max } => {
            let mut env = OutputEnvelope::new("endpoint moments");
            echo_cfg(&mut env, cfg);
            env.echo("t_max", t_max);
            let m = dist::endpoint_moments(cfg, *t_max)?;
            env.rows.push(vec![
                ("total_mass", Cell::Num(m.total_mass)),
                ("variance", Cell::Num(m.variance)),
                ("excess_kurtosis", Cell::Num(m.excess_kurtosis)),
                ("odd_moment_1", Cell::Num(m.odd_moment_1)),
                ("odd_moment_3", Cell::Num(m.odd_moment_3)),
            ]);
            Ok((env, 0))
        }
        EndpointCmd::Joint { t_grid, m_grid } => {
            let mut env = OutputEnvelope::new("endpoint joint");
            echo_cfg(&mut env, cfg);
            for t in t_grid.points() {
                for m in m_grid.points() {
                    let f = dist::joint_density(t, m, cfg, JointRoute::Trace)?;
                    env.rows.push(vec![
                        ("t", Cell::Num(t)),
                        ("m", Cell::Num(m)),
                        ("f", Cell::Num(f)),
                    ]);
                }
            }
            Ok((env, 0))
        }
    }
}

fn cmd_twotime(what: &TwotimeCmd, cfg: &NumericsConfig) -> Result<(OutputEnvelope, u8), Error> {
    match what {
        TwotimeCmd::SupPoint {
            t,
            s,
            beta,
            a,
            b,
            route,
        } => {
            let (a, b) = match beta {
                Some(beta) => (beta * t * t, beta * t * t),
                None => (*a, *b),
            };
            let mut env = OutputEnvelope::new("twotime sup-point");
            echo_cfg(&mut env, cfg);
            env.echo("t", t);
            env.echo("s", s);
            env.echo("a", a);
            env.echo("b", b);
            let mut row: Row = vec![
                ("t", Cell::Num(*t)),
                ("s", Cell::Num(*s)),
                ("a", Cell::Num(a)),
                ("b", Cell::Num(b)),
            ];
            let mut all_converged = true;
            let mut scalar = None;
            let mut matrix = None;
            if matches!(route, RouteArg::Scalar | RouteArg::Both) {
                let d = dist::joint_sup_point_cdf(*t, *s, a, b, cfg, SupPointRoute::Scalar)?;
                all_converged &= d.converged;
                row.push(("scalar", Cell::Num(d.value)));
                row.push(("scalar_delta", Cell::Num(d.delta)));
                scalar = Some(d.value);
            }
            if matches!(route, RouteArg::Matrix | RouteArg::Both) {
                let d = dist::joint_sup_point_cdf(*t, *s, a, b, cfg, SupPointRoute::Matrix)?;
                all_converged &= d.converged;
                row.push(("matrix", Cell::Num(d.value)));
                row.push(("matrix_delta", Cell::Num(d.delta)));
                matrix = Some(d.value);
            }
            if let (Some(s1), Some(s2)) = (scalar, matrix) {
                row.push(("route_discrepancy", Cell::Num(s1 - s2)));
            }
            env.rows.push(row);
            Ok((env, if all_converged { 0 } else { 3 }))
        }
        TwotimeCmd::Extended { t0, x0, t1, x1 } => {
            let mut env = OutputEnvelope::new("twotime extended");
            echo_cfg(&mut env, cfg);
            let d = dist::two_time_cdf(*t0, *x0, *t1, *x1, cfg)?;
            env.rows.push(vec![
                ("t0", Cell::Num(*t0)),
                ("x0", Cell::Num(*x0)),
                ("t1", Cell::Num(*t1)),
                ("x1", Cell::Num(*x1)),
                ("prob", Cell::Num(d.value)),
                ("converged", Cell::Bool(d.converged)),
                ("delta", Cell::Num(d.delta)),
            ]);
            Ok((env, if d.converged { 0 } else { 3 }))
        }
    }
}

fn cmd_lpp(args: &LppArgs, cfg: &NumericsConfig) -> Result<(OutputEnvelope, u8), Error> {
    let lcfg = lpp::LppConfig {
        n_steps: args.n_steps,
        q: args.q,
        samples: args.samples,
        seed: args.seed,
    };
    let dist_raw = lpp::simulate(&lcfg)?;
    let mut env = OutputEnvelope::new("lpp");
    echo_cfg(&mut env, cfg);
    env.echo("n_steps", args.n_steps);
    env.echo("q", args.q);
    env.echo("samples", args.samples);
    env.echo("seed", args.seed);
    let scale = match args.scale.as_str() {
        "auto" => {
            let m = dist::endpoint_moments(cfg, 4.0)?;
            lpp::Scale::Auto {
                target_variance: m.variance,
            }
        }
        other => lpp::Scale::Manual(
            other
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad --scale '{other}': {e}")))?,
        ),
    };
    let rescaled = lpp::rescale(&dist_raw, scale)?;
    if let Some(path) = &args.dump {
        let mut csv = String::from("sample_index,endpoint,passage_time\n");
        for (i, (&e, &l)) in dist_raw
            .raw_endpoints
            .iter()
            .zip(&dist_raw.passage_times)
            .enumerate()
        {
            csv.push_str(&format!("{i},{e},{l}\n"));
        }
        std::fs::write(path, csv).map_err(|e| Error::Config(format!("cannot write dump: {e}")))?;
    }
    let reach = rescaled
        .rescaled
        .iter()
        .fold(0.0f64, |a, &b| a.max(b.abs()));
    let table = dist::model_cdf_table(cfg, (reach + 0.5).max(4.0), 0.04)?;
    let ks = lpp::ks_distance(&rescaled, &table)?;
    let n = rescaled.rescaled.len() as f64;
    let mean: f64 = rescaled.rescaled.iter().sum::<f64>() / n;
    let var: f64 = rescaled.rescaled.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    env.rows.push(vec![
        ("n_steps", Cell::Int(args.n_steps as i64)),
        ("q", Cell::Num(args.q)),
        ("samples", Cell::Int(args.samples as i64)),
        ("seed", Cell::Int(args.seed as i64)),
        ("scale_used", Cell::Num(rescaled.scale_used)),
        ("rescaled_variance", Cell::Num(var)),
        ("ks_distance", Cell::Num(ks)),
    ]);
    Ok((env, 0))
}
