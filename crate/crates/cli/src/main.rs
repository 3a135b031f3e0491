//! Command-line front end over collisim-core: regenerates the model's
//! reference curves as CSV files, runs the cross-validation battery, and
//! writes a replayable manifest next to every output.
//!
//! Times are in units of the collision rate (lambda = 1 by default).
//! Exit codes: 0 success, 1 computational failure or failed validation
//! checks, 2 usage error.

mod csvio;
mod manifest;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use collisim_core::analytic::{
    coherence_factor, mi_curve, mixture_time, EnvironmentSetting,
};
use collisim_core::collision::{integrate_gksl, AncillaCount, ModelParams};
use collisim_core::oracle::{mi_bruteforce, FractionSelection, TotalState, MAX_ORACLE_ANCILLAE};
use collisim_core::qcore::{C64, DensityMatrix, QubitLabel};
use collisim_core::stochastic::{estimate_coherence, TrajectorySpec};
use collisim_core::{analysis, validate};

use csvio::{empty, float, int, Csv};
use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "collisim", version, about = "Collision-model dephasing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coherence factor over time: closed form, trajectory sampling, or
    /// master-equation integration.
    Coherence(CoherenceArgs),
    /// System-fragment mutual information against environment fraction.
    Darwinism(DarwinismArgs),
    /// Information back-flow (BLP measure) for finite reservoirs.
    Nonmarkov(NonmarkovArgs),
    /// Cross-validation battery; JSON report, exit 0 only if all green.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Analytic,
    Mc,
    Gksl,
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Mc => "mc",
            Mode::Gksl => "gksl",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SettingArg {
    Ancillae,
    Emitters,
}

#[derive(clap::Args)]
struct CoherenceArgs {
    /// Collision angle: a decimal or pi, pi/2, 3pi/4, -pi/3.
    #[arg(long, default_value = "pi", value_parser = parse::theta, allow_hyphen_values = true)]
    theta: f64,
    /// Collision rate.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Free precession frequency.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    omega: f64,
    /// Reservoir size: a positive integer or "inf".
    #[arg(long, default_value = "inf", value_parser = parse::ancilla_count)]
    n: AncillaCount,
    #[arg(long, value_enum, default_value_t = Mode::Analytic)]
    mode: Mode,
    /// Last grid time; the grid spans [0, t-max].
    #[arg(long = "t-max", default_value_t = 5.0)]
    t_max: f64,
    /// Grid rows, endpoints included.
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// Trajectories per batch (mc mode).
    #[arg(long, default_value_t = 100_000)]
    traj: u64,
    /// RNG seed; defaults to COLLISIM_SEED, then the built-in constant.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "coherence.csv")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct DarwinismArgs {
    #[arg(long, value_enum, default_value_t = SettingArg::Emitters)]
    setting: SettingArg,
    /// Environment size (number of ancillae).
    #[arg(long, default_value_t = 10_000)]
    n: u64,
    /// Collision angle: a decimal or pi, pi/2, 3pi/4, -pi/3.
    #[arg(long, default_value = "pi", value_parser = parse::theta, allow_hyphen_values = true)]
    theta: f64,
    /// Collision rate.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Comma-separated absolute times; defaults to
    /// {0.1, 0.5, 1, 2, 3} times the mixture time.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// Fraction grid size over [0, 1], endpoints included.
    #[arg(long, default_value_t = 200)]
    fractions: usize,
    /// Add an i_f_oracle_bits column from the dense-state construction
    /// (n <= 10).
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value = "darwinism.csv")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct NonmarkovArgs {
    /// Comma-separated reservoir sizes; the infinite reservoir is
    /// rejected (its back-flow is identically zero).
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<String>,
    /// Collision angle: a decimal or pi, pi/2, 3pi/4, -pi/3.
    #[arg(long, default_value = "pi", value_parser = parse::theta, allow_hyphen_values = true)]
    theta: f64,
    /// Collision rate.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Integration horizon; default 16 n / lambda per row.
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    #[arg(long, default_value = "nonmarkov.csv")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct ValidateArgs {
    /// Closed-form and small dense checks only (< 5 s).
    #[arg(long)]
    quick: bool,
    /// RNG seed; defaults to COLLISIM_SEED, then the built-in constant.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "validate_report.json")]
    out: PathBuf,
}

enum CliError {
    Usage(String),
    Compute(String),
}

impl From<collisim_core::Error> for CliError {
    fn from(e: collisim_core::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Compute(format!("io error: {e}"))
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

/// Flag-derived model construction failures are usage errors, not
/// computational ones.
fn params_from_flags(
    theta: f64,
    lambda: f64,
    omega: f64,
    n: AncillaCount,
) -> Result<ModelParams, CliError> {
    ModelParams::new(theta, lambda, omega, n).map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Coherence(args) => cmd_coherence(args),
        Command::Darwinism(args) => cmd_darwinism(args),
        Command::Nonmarkov(args) => cmd_nonmarkov(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn time_grid(t_max: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return usage(format!("t-max must be positive and finite, got {t_max}"));
    }
    if points < 2 {
        return usage("points must be at least 2");
    }
    Ok((0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect())
}

fn cmd_coherence(args: CoherenceArgs) -> Result<(), CliError> {
    let params = params_from_flags(args.theta, args.lambda, args.omega, args.n)?;
    let grid = time_grid(args.t_max, args.points)?;
    let seed = parse::resolve_seed(args.seed).map_err(CliError::Usage)?;

    let mut man = RunManifest::start(
        json!({
            "theta": params.theta(),
            "lambda": params.lambda(),
            "omega": params.omega(),
            "n": match params.n() {
                AncillaCount::Infinite => json!("inf"),
                AncillaCount::Finite(n) => json!(n),
            },
            "mode": args.mode.as_str(),
            "t_max": args.t_max,
            "points": args.points,
            "traj": args.traj,
        }),
        seed,
    );
    if let Ok(tm) = mixture_time(&params) {
        man.insert_metadata("t_m", json!(tm));
    }

    let mut csv = Csv::new(&["t", "c_analytic", "c_mc_mean", "c_mc_stderr", "n_collisions_mean"]);
    match args.mode {
        Mode::Analytic => {
            for &t in &grid {
                let c = coherence_factor(&params, t)?;
                csv.row(&[float(t), float(c), empty(), empty(), empty()]);
            }
        }
        Mode::Mc => {
            if args.traj == 0 {
                return usage("traj must be at least 1");
            }
            // the sampler wants strictly positive spacing from 0; grid[0] = 0
            // is fine, it just reports the exact initial point
            let spec = TrajectorySpec::new(params, grid, args.traj, seed)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let batch = estimate_coherence(&spec)?;
            for p in &batch.points {
                let c = coherence_factor(&params, p.t)?;
                csv.row(&[
                    float(p.t),
                    float(c),
                    float(p.mean_factor),
                    float(p.stderr),
                    float(p.mean_collision_count),
                ]);
            }
        }
        Mode::Gksl => {
            if params.finite_n().is_ok() {
                return usage("gksl mode integrates the unbounded-reservoir master equation; use --n inf");
            }
            let rho0 = DensityMatrix::plus(QubitLabel::System);
            let states = integrate_gksl(&rho0, &params, &grid)?;
            for (&t, st) in grid.iter().zip(&states) {
                // undo the free phase so the column carries the real factor,
                // matching the analytic convention
                let c = 2.0 * (st.data()[(0, 1)] * C64::from_polar(1.0, params.omega() * t)).re;
                csv.row(&[float(t), float(c), empty(), empty(), empty()]);
            }
        }
    }

    man.write_output(&args.out, &csv.into_bytes())?;
    let man_path = man.finish(&args.out)?;
    eprintln!("wrote {} and {}", args.out.display(), man_path.display());
    Ok(())
}

fn cmd_darwinism(args: DarwinismArgs) -> Result<(), CliError> {
    let setting = match args.setting {
        SettingArg::Ancillae => EnvironmentSetting::AncillaeOnly,
        SettingArg::Emitters => EnvironmentSetting::WithEmitters,
    };
    let params = params_from_flags(args.theta, args.lambda, 0.0, AncillaCount::Finite(args.n))?;
    if args.oracle && args.n > MAX_ORACLE_ANCILLAE {
        return usage(format!(
            "the dense-state oracle is capped at {MAX_ORACLE_ANCILLAE} ancillae, got {}",
            args.n
        ));
    }
    if args.fractions < 2 {
        return usage("fractions must be at least 2");
    }

    let times = match &args.times {
        Some(list) => {
            if list.iter().any(|t| !t.is_finite() || *t < 0.0) {
                return usage("times must be finite and nonnegative");
            }
            list.clone()
        }
        None => match mixture_time(&params) {
            Ok(tm) => [0.1, 0.5, 1.0, 2.0, 3.0].iter().map(|m| m * tm).collect(),
            Err(_) => {
                return usage(
                    "default times are multiples of the mixture time, which needs theta = pi; pass --times",
                )
            }
        },
    };
    let fractions: Vec<f64> =
        (0..args.fractions).map(|i| i as f64 / (args.fractions - 1) as f64).collect();

    let mut man = RunManifest::start(
        json!({
            "setting": setting.as_str(),
            "n": args.n,
            "theta": params.theta(),
            "lambda": params.lambda(),
            "times": times,
            "fractions": args.fractions,
            "oracle": args.oracle,
        }),
        validate::DEFAULT_SEED,
    );
    if let Ok(tm) = mixture_time(&params) {
        man.insert_metadata("t_m", json!(tm));
    }

    let base_header = ["setting", "t", "f", "k", "i_f_bits", "h_s_bits", "ratio"];
    let mut header: Vec<&str> = base_header.to_vec();
    if args.oracle {
        header.push("i_f_oracle_bits");
    }
    let mut csv = Csv::new(&header);

    for &t in &times {
        let curve = mi_curve(&params, t, setting, &fractions)?;
        // one dense state per time; fragments reuse it per distinct size
        let oracle_by_kept: Option<Vec<f64>> = if args.oracle {
            let state = TotalState::build(&params, t, setting)?;
            let mut by_kept = Vec::with_capacity(args.n as usize + 1);
            for kept in 0..=args.n as usize {
                by_kept.push(mi_bruteforce(&state, &FractionSelection::first(kept, setting))?);
            }
            Some(by_kept)
        } else {
            None
        };
        for p in &curve.points {
            let ratio = p.i_f / curve.h_system;
            let mut row = vec![
                setting.as_str().to_string(),
                float(t),
                float(p.f),
                int(p.k),
                float(p.i_f),
                float(curve.h_system),
                if ratio.is_finite() { float(ratio) } else { empty() },
            ];
            if let Some(by_kept) = &oracle_by_kept {
                row.push(float(by_kept[(args.n - p.k) as usize]));
            }
            csv.row(&row);
        }
    }

    man.write_output(&args.out, &csv.into_bytes())?;
    let man_path = man.finish(&args.out)?;
    eprintln!("wrote {} and {}", args.out.display(), man_path.display());
    Ok(())
}

fn cmd_nonmarkov(args: NonmarkovArgs) -> Result<(), CliError> {
    let mut sizes = Vec::with_capacity(args.n.len());
    for s in &args.n {
        match parse::ancilla_count(s).map_err(CliError::Usage)? {
            AncillaCount::Infinite => {
                return usage(
                    "the unbounded reservoir dephases monotonically (zero back-flow); finite sizes only",
                )
            }
            AncillaCount::Finite(n) => sizes.push(n),
        }
    }
    sizes.sort_unstable();
    sizes.dedup();

    let mut man = RunManifest::start(
        json!({
            "n": sizes,
            "theta": args.theta,
            "lambda": args.lambda,
            "t_max": args.t_max,
        }),
        validate::DEFAULT_SEED,
    );

    let mut csv = Csv::new(&["n", "theta", "lambda", "t_m", "blp"]);
    for &n in &sizes {
        let params = params_from_flags(args.theta, args.lambda, 0.0, AncillaCount::Finite(n))?;
        let t_max = match args.t_max {
            Some(t) if t.is_finite() && t > 0.0 => t,
            Some(t) => return usage(format!("t-max must be positive and finite, got {t}")),
            None => 16.0 * n as f64 / params.lambda(),
        };
        // spacing at the resolution bound; the mixture time is pushed into
        // the grid so the accumulated increase telescopes exactly
        let step = 1.0 / (100.0 * params.lambda());
        let rows = (t_max / step).ceil() as usize;
        let mut times: Vec<f64> = (0..=rows).map(|i| i as f64 * step).collect();
        let tm = mixture_time(&params).ok();
        if let Some(tm) = tm {
            if tm < t_max {
                times.push(tm);
            }
        }
        times.sort_by(f64::total_cmp);
        times.dedup();
        let coherence: Vec<f64> = times
            .iter()
            .map(|&t| collisim_core::analytic::coherence_finite(&params, t))
            .collect::<Result<_, _>>()?;
        let blp = analysis::blp_measure(params.lambda(), &times, &coherence)?;
        csv.row(&[
            int(n),
            float(params.theta()),
            float(params.lambda()),
            tm.map(float).unwrap_or_default(),
            float(blp),
        ]);
    }

    man.write_output(&args.out, &csv.into_bytes())?;
    let man_path = man.finish(&args.out)?;
    eprintln!("wrote {} and {}", args.out.display(), man_path.display());
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let seed = parse::resolve_seed(args.seed).map_err(CliError::Usage)?;
    let mut man = RunManifest::start(json!({ "quick": args.quick }), seed);

    let checks = validate::run_all(args.quick, seed);
    for c in &checks {
        let tag = if c.passed { "[PASS]" } else { "[FAIL]" };
        println!(
            "{tag} {}: deviation {:.3e} (tolerance {:.3e}, {:.2}s) {}",
            c.name, c.deviation, c.tolerance, c.seconds, c.detail
        );
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();

    let report = json!({
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "quick": args.quick,
        "all_passed": failed.is_empty(),
        "checks": checks,
    });
    let mut body = serde_json::to_string_pretty(&report).expect("report serializes");
    body.push('\n');
    man.write_output(&args.out, body.as_bytes())?;
    let man_path = man.finish(&args.out)?;
    eprintln!("wrote {} and {}", args.out.display(), man_path.display());

    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Compute(format!("failed checks: {}", failed.join(", "))))
    }
}
