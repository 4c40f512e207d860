use std::path::PathBuf;
use std::process::ExitCode;

use bphull::error::{AppError, AppResult};
use bphull::harness::{
    run_suite_with_threads, threads_from_env, SuiteSpec, DEFAULT_SEED, SUITES, THREADS_ENV,
};
use bphull::io::{self, BmRow};
use bphull_core::bm::{bm_exit_functional, BmConfig};
use bphull_core::csbp_sim::{
    default_start_level, simulate_csbp, simulate_reversed_boundary_with, SimConfig,
};
use bphull_core::formulas as f;
use bphull_core::formulas::CsbpParams;
use bphull_core::hull_model::decorate_with;
use bphull_core::planar_maps::growth::sample_map;
use bphull_core::planar_maps::hull::hull_series;
use bphull_core::rng::{stream, Lane};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "bphull",
    version,
    about = "Hull processes of the Brownian plane: closed forms, simulation, verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed-form law.
    Exact(ExactArgs),
    /// Simulate and export paths, hulls, maps or exit functionals.
    Simulate {
        #[command(subcommand)]
        what: Simulate,
    },
    /// Run a verification suite and write its report.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Formula {
    CsbpLaplace,
    ExtinctionCdf,
    ExtinctionDensity,
    ConditionedKernelLaplace,
    BoundaryLaplace,
    BoundaryDensity,
    BoundaryCdf,
    HullLaplace,
    HullLaplaceGivenBoundary,
    ConditionalBoundaryLaplace,
    SnakeMinTail,
    ExitLaplace,
    TruncatedExitLaplace,
    UJoint,
    UInf,
    Theta,
    XiLaplace,
    XiDensity,
    XiCdf,
    LevyDensity,
    Psi,
    WDerivative,
}

#[derive(Args)]
struct ExactArgs {
    formula: Formula,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    ell: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    /// Boundary length at the outer radius.
    #[arg(long, allow_hyphen_values = true)]
    z: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    u: Option<f64>,
    /// Branching coefficient.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Simulate {
    /// Forward CSBP path.
    Csbp {
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        /// Branching coefficient.
        #[arg(long, default_value_t = CsbpParams::canonical().c)]
        c: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Boundary-length path on (0, rmax].
    Boundary {
        #[arg(long, default_value_t = 1.0)]
        rmax: f64,
        /// Start level of the reversed process; 50 rmax^2 when absent.
        #[arg(long)]
        x_start: Option<f64>,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long, default_value_t = 1e-2)]
        eps_rel: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Decorated boundary paths with their hull volumes.
    Hull {
        #[arg(long, default_value_t = 1.0)]
        rmax: f64,
        /// Number of replicates.
        #[arg(long, default_value_t = 1)]
        n: u64,
        /// Radii per replicate in the CSV export.
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long)]
        x_start: Option<f64>,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long, default_value_t = 3e-3)]
        eps_rel: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Random quadrangulation and its hull series.
    Quad {
        #[arg(long, default_value_t = 1000)]
        faces: usize,
        #[arg(long, default_value_t = 10)]
        kmax: u32,
        /// Also write the edge list here.
        #[arg(long)]
        edges_out: Option<PathBuf>,
        /// Also write the face list here.
        #[arg(long)]
        faces_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo estimate of the Brownian exit functional.
    BmFunctional {
        #[arg(long, default_value_t = 2.0)]
        start: f64,
        #[arg(long, default_value_t = 1.0)]
        stop: f64,
        #[arg(long, default_value_t = 6.0)]
        coeff: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 10_000)]
        n: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name; see --list.
    suite: Option<String>,
    /// Print the available suites.
    #[arg(long)]
    list: bool,
    /// Replicates; the suite's reference size when absent.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Directory for `<suite>.report.json` and `<suite>.report.csv`.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    eps_rel: Option<f64>,
    #[arg(long)]
    x_start: Option<f64>,
    #[arg(long)]
    faces: Option<usize>,
    /// Band width of Laplace and mean checks, in standard errors.
    #[arg(long)]
    sigmas: Option<f64>,
    /// Smallest acceptable KS p-value.
    #[arg(long)]
    ks_level: Option<f64>,
}

fn need(v: Option<f64>, flag: &str) -> AppResult<f64> {
    v.ok_or_else(|| AppError::Config(format!("missing --{flag}")))
}

fn exact(a: &ExactArgs) -> AppResult<f64> {
    let params = match a.c {
        Some(c) => CsbpParams::new(c)?,
        None => CsbpParams::canonical(),
    };
    let v = match a.formula {
        Formula::CsbpLaplace => f::csbp_laplace(
            need(a.x, "x")?,
            need(a.t, "t")?,
            need(a.lambda, "lambda")?,
            params,
        ),
        Formula::ExtinctionCdf => f::extinction_cdf(need(a.x, "x")?, need(a.t, "t")?, params),
        Formula::ExtinctionDensity => {
            f::extinction_density(need(a.x, "x")?, need(a.t, "t")?, params)
        }
        Formula::ConditionedKernelLaplace => f::conditioned_kernel_laplace(
            need(a.x, "x")?,
            need(a.s, "s")?,
            need(a.t, "t")?,
            need(a.rho, "rho")?,
            need(a.lambda, "lambda")?,
            params,
        ),
        Formula::BoundaryLaplace => {
            f::boundary_length_laplace(need(a.r, "r")?, need(a.lambda, "lambda")?)
        }
        Formula::BoundaryDensity => {
            f::boundary_length_density(need(a.r, "r")?, need(a.ell, "ell")?)
        }
        Formula::BoundaryCdf => f::boundary_length_cdf(need(a.r, "r")?, need(a.ell, "ell")?),
        Formula::HullLaplace => f::hull_volume_laplace(need(a.r, "r")?, need(a.mu, "mu")?),
        Formula::HullLaplaceGivenBoundary => f::hull_volume_laplace_given_boundary(
            need(a.r, "r")?,
            need(a.ell, "ell")?,
            need(a.mu, "mu")?,
        ),
        Formula::ConditionalBoundaryLaplace => f::conditional_boundary_laplace(
            need(a.a, "a")?,
            need(a.b, "b")?,
            need(a.z, "z")?,
            need(a.lambda, "lambda")?,
        ),
        Formula::SnakeMinTail => f::snake_min_tail(need(a.x, "x")?, need(a.y, "y")?),
        Formula::ExitLaplace => {
            f::exit_laplace(need(a.x, "x")?, need(a.a, "a")?, need(a.mu, "mu")?)
        }
        Formula::TruncatedExitLaplace => {
            f::truncated_exit_laplace(need(a.x, "x")?, need(a.a, "a")?, need(a.lambda, "lambda")?)
        }
        Formula::UJoint => f::u_joint(
            need(a.x, "x")?,
            need(a.lambda, "lambda")?,
            need(a.mu, "mu")?,
        ),
        Formula::UInf => f::u_inf(need(a.x, "x")?, need(a.mu, "mu")?),
        Formula::Theta => f::theta(need(a.mu, "mu")?, need(a.lambda, "lambda")?),
        Formula::XiLaplace => f::xi_laplace(need(a.beta, "beta")?),
        Formula::XiDensity => f::xi_density(need(a.x, "x")?),
        Formula::XiCdf => f::xi_cdf(need(a.x, "x")?),
        Formula::LevyDensity => f::levy_measure_density(need(a.y, "y")?),
        Formula::Psi => f::psi_of(need(a.u, "u")?, params),
        Formula::WDerivative => {
            f::w_derivative_at_zero(need(a.lambda, "lambda")?, need(a.mu, "mu")?)
        }
    }?;
    Ok(v)
}

/// Formats with 15 significant digits, dropping trailing zeros.
fn significant(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.14e}")
    }
}

fn write_output(
    o: &OutputArgs,
    csv: impl FnOnce() -> String,
    json: impl FnOnce() -> AppResult<String>,
) -> AppResult<()> {
    let text = match o.format {
        Format::Csv => csv(),
        Format::Json => json()?,
    };
    io::emit(o.out.as_deref(), &text)
}

fn echo(line: String) {
    eprintln!("bphull {line}");
}

fn out_desc(o: &OutputArgs) -> String {
    let fmt = match o.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let path = o
        .out
        .as_deref()
        .map_or("<stdout>".to_string(), |p| p.display().to_string());
    format!("--seed {} --format {fmt} --out {path}", o.seed)
}

fn simulate(what: &Simulate) -> AppResult<()> {
    match what {
        Simulate::Csbp {
            x0,
            horizon,
            dt,
            eps,
            c,
            out,
        } => {
            echo(format!(
                "simulate csbp --x0 {x0} --horizon {horizon} --dt {dt} --eps {eps} --c {c} {}",
                out_desc(out)
            ));
            let cfg = SimConfig::stable(*dt, *eps);
            let path = simulate_csbp(*x0, CsbpParams::new(*c)?, *horizon, &cfg, out.seed)?;
            write_output(out, || io::csbp_csv(&path), || io::to_json(&path))
        }
        Simulate::Boundary {
            rmax,
            x_start,
            dt,
            eps_rel,
            out,
        } => {
            let x_start = x_start.unwrap_or_else(|| default_start_level(*rmax));
            echo(format!("simulate boundary --rmax {rmax} --x-start {x_start} --dt {dt} --eps-rel {eps_rel} {}", out_desc(out)));
            let cfg = SimConfig::resolved(*dt, 1e-9, *eps_rel);
            let mut path = simulate_reversed_boundary_with(
                &mut stream(out.seed, Lane::Csbp, 0),
                *rmax,
                x_start,
                &cfg,
            )?;
            path.meta.seed = out.seed;
            write_output(out, || io::boundary_csv(&path), || io::to_json(&path))
        }
        Simulate::Hull {
            rmax,
            n,
            points,
            x_start,
            dt,
            eps_rel,
            out,
        } => {
            let x_start = x_start.unwrap_or_else(|| default_start_level(*rmax));
            echo(format!(
                "simulate hull --rmax {rmax} --n {n} --points {points} --x-start {x_start} --dt {dt} --eps-rel {eps_rel} {}",
                out_desc(out)
            ));
            if *points == 0 {
                return Err(AppError::Config("--points must be positive".into()));
            }
            let cfg = SimConfig::resolved(*dt, 1e-9, *eps_rel);
            let seed = out.seed;
            let samples = bphull::harness::ensemble(*n, |i| {
                let mut p = simulate_reversed_boundary_with(
                    &mut stream(seed, Lane::Csbp, i),
                    *rmax,
                    x_start,
                    &cfg,
                )?;
                p.meta.seed = seed;
                p.meta.replicate = i;
                Ok(decorate_with(p, &mut stream(seed, Lane::Marks, i)))
            })?;
            let radii = io::grid(*rmax, *points);
            write_output(
                out,
                || io::hull_csv(&samples, &radii),
                || io::to_json(&samples),
            )
        }
        Simulate::Quad {
            faces,
            kmax,
            edges_out,
            faces_out,
            out,
        } => {
            echo(format!(
                "simulate quad --faces {faces} --kmax {kmax} {}",
                out_desc(out)
            ));
            let (_, q) = sample_map(*faces, out.seed, 0)?;
            let series = hull_series(&q, *kmax)?;
            if let Some(p) = edges_out {
                io::write_atomic(p, io::edges_csv(&q).as_bytes())?;
            }
            if let Some(p) = faces_out {
                io::write_atomic(p, io::faces_csv(&q).as_bytes())?;
            }
            write_output(
                out,
                || io::hull_series_csv(&series),
                || io::to_json(&series),
            )
        }
        Simulate::BmFunctional {
            start,
            stop,
            coeff,
            dt,
            n,
            out,
        } => {
            echo(format!("simulate bm-functional --start {start} --stop {stop} --coeff {coeff} --dt {dt} --n {n} {}", out_desc(out)));
            let estimate =
                bm_exit_functional(*start, *stop, *coeff, &BmConfig::new(*dt), *n, out.seed)?;
            let p = 0.5 * ((1.0 + 8.0 * coeff).sqrt() - 1.0);
            let row = BmRow {
                start: *start,
                stop: *stop,
                coeff: *coeff,
                dt: *dt,
                estimate,
                target: (stop / start).powf(p),
            };
            write_output(out, || io::bm_csv(&row), || io::to_json(&row))
        }
    }
}

/// Runs a suite and writes its report; returns whether it passed.
fn verify(a: &VerifyArgs) -> AppResult<bool> {
    if a.list {
        for (name, desc) in SUITES {
            println!("{name:<20} {desc}");
        }
        return Ok(true);
    }
    let name = a
        .suite
        .as_deref()
        .ok_or_else(|| AppError::Config("missing suite name".into()))?;
    let mut spec = SuiteSpec::reference(name, a.seed)?;
    if let Some(n) = a.n {
        spec.samples = n;
    }
    spec.params.dt = a.dt;
    spec.params.eps_rel = a.eps_rel;
    spec.params.x_start = a.x_start;
    spec.params.n_faces = a.faces;
    if let Some(v) = a.sigmas {
        spec.tolerance.sigmas = v;
    }
    if let Some(v) = a.ks_level {
        spec.tolerance.ks_level = v;
    }
    let threads = a.threads.or_else(threads_from_env);
    echo(format!(
        "verify {} --n {} --seed {} --out {} {}",
        spec.name,
        spec.samples,
        spec.seed,
        a.out.display(),
        params_desc(&spec, threads)
    ));
    let report = run_suite_with_threads(&spec, threads)?;
    io::write_atomic(
        &a.out.join(format!("{}.report.json", spec.name)),
        report.to_json()?.as_bytes(),
    )?;
    io::write_atomic(
        &a.out.join(format!("{}.report.csv", spec.name)),
        report.to_csv()?.as_bytes(),
    )?;
    print!("{}", report.summary());
    Ok(report.pass)
}

fn params_desc(spec: &SuiteSpec, threads: Option<usize>) -> String {
    let p = &spec.params;
    let mut parts = Vec::new();
    if let Some(v) = p.dt {
        parts.push(format!("--dt {v}"));
    }
    if let Some(v) = p.eps_rel {
        parts.push(format!("--eps-rel {v}"));
    }
    if let Some(v) = p.x_start {
        parts.push(format!("--x-start {v}"));
    }
    if let Some(v) = p.n_faces {
        parts.push(format!("--faces {v}"));
    }
    parts.push(format!(
        "--sigmas {} --ks-level {}",
        spec.tolerance.sigmas, spec.tolerance.ks_level
    ));
    if let Some(t) = threads {
        parts.push(format!("--threads {t}"));
    }
    parts.join(" ")
}

fn run(cli: Cli) -> AppResult<ExitCode> {
    match cli.command {
        Command::Exact(a) => {
            println!("{}", significant(exact(&a)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { what } => simulate(&what).map(|()| ExitCode::SUCCESS),
        Command::Verify(a) => Ok(if verify(&a)? {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        }),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(significant(1.0), "1");
        assert_eq!(significant(0.874306), "0.874306");
        assert_eq!(significant(1.0 / 3.0), "0.333333333333333");
        assert_eq!(significant(2.0 / 3.0 * 1e-7), "6.66666666666667e-8");
        assert_eq!(significant(0.0), "0");
    }

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
