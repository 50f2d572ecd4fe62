//! `mkawahara`: build waves, check their spectra and stability index, and
//! run perturbed-wave evolutions. Results land in `--out-dir` as CSV/JSON.
//!
//! Exit status: 0 on success, 1 when `verify` finds a failing check, 2 on
//! invalid arguments or I/O failure.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use mkawahara::evolution::{
    default_dt, evolve, stability_experiment, EvolutionState, ExperimentConfig, Perturbation,
};
use mkawahara::index::{scan_index, stability_index, summarize};
use mkawahara::io::{
    index_table, profile_table, read_initial_condition, time_series_table, write_json, write_table,
    Table,
};
use mkawahara::spectrum::{
    assemble_operator, log_concavity_curve, low_spectrum, refinement_study, symmetric_grid,
    verify_proposition_criterion, zero_mode_residual,
};
use mkawahara::verify::{run_verify, VerifyConfig};
use mkawahara::wave::{sample_profile, Gamma, WaveParams};
use mkawahara::Error;

#[derive(Parser, Debug)]
#[command(
    name = "mkawahara",
    version,
    about = "Periodic dnoidal waves of the modified Kawahara equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Elliptic modulus, in (0, 1). Defaults to 0.5, or √2/2 for logconcavity.
    #[arg(long, global = true)]
    k: Option<f64>,

    /// Spatial period L.
    #[arg(long = "L", global = true, default_value_t = 2.0 * PI)]
    period: f64,

    /// Coefficient of u_xxx: 0 or 1. Defaults to 0; verify runs both unless set.
    #[arg(long, global = true)]
    gamma: Option<u8>,

    /// Grid points (power of two, at least 64).
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Fourier modes kept in the linearized operator.
    #[arg(long = "m-modes", global = true, default_value_t = 32)]
    m_modes: usize,

    /// Final time for evolve and stability.
    #[arg(long = "t-max", global = true, default_value_t = 50.0)]
    t_max: f64,

    /// Time step; defaults to 1e-3·(L/2π)⁵·(256/n)⁵.
    #[arg(long, global = true)]
    dt: Option<f64>,

    /// H² size of the perturbation for stability.
    #[arg(long, global = true, default_value_t = 1e-3)]
    delta: f64,

    /// Seed of the perturbation generator.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Lower end of a k scan.
    #[arg(long = "k-min", global = true, default_value_t = 0.05)]
    k_min: f64,

    /// Upper end of a k scan.
    #[arg(long = "k-max", global = true, default_value_t = 0.95)]
    k_max: f64,

    /// Points in a k scan.
    #[arg(long, global = true, default_value_t = 91)]
    steps: usize,

    /// Directory receiving output files.
    #[arg(
        long = "out-dir",
        global = true,
        env = "MKAWAHARA_OUT_DIR",
        default_value = "."
    )]
    out_dir: PathBuf,

    /// Format of tabular output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Wave profile (x, phi, dphi_dk) and its parameters (a, b, omega, A).
    Wave,
    /// ODE residual and conserved quantities of the sampled wave.
    Residual,
    /// Low eigenvalues of the linearized operator and the hypothesis verdict.
    Spectrum,
    /// Second derivative of log g_k on [-10, 10] and the criterion report.
    Logconcavity,
    /// Stability index along k_min..k_max (γ = 0).
    Index,
    /// Evolve the wave, or a profile CSV given by --init, to t_max.
    Evolve {
        /// Profile CSV with columns x and phi (or u) on the uniform grid.
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// Perturb the wave by delta in H² and track the orbit distance.
    Stability {
        /// Perturb a single cosine mode instead of a random ball sample.
        #[arg(long)]
        mode: Option<usize>,
    },
    /// Run the full check battery; exit 1 if any check fails.
    Verify {
        /// Moduli to check; defaults to 0.2, 0.3, ..., 0.9.
        #[arg(long, value_delimiter = ',')]
        ks: Option<Vec<f64>>,
    },
    /// figure31.csv (x, d2_log_g at k = √2/2) and figure32.csv (k, f).
    Figures,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

impl Cli {
    fn gamma(&self) -> Result<Gamma, Failure> {
        Gamma::try_from(self.gamma.unwrap_or(0)).map_err(Failure::Usage)
    }

    fn k_or(&self, default: f64) -> f64 {
        self.k.unwrap_or(default)
    }

    fn n_or(&self, default: usize) -> Result<usize, Failure> {
        let n = self.n.unwrap_or(default);
        if !n.is_power_of_two() || n < 64 {
            return usage(format!("--n must be a power of two >= 64, got {n}"));
        }
        Ok(n)
    }

    fn params(&self, default_k: f64) -> Result<WaveParams, Failure> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return usage(format!("--L must be positive, got {}", self.period));
        }
        Ok(WaveParams::new(
            self.k_or(default_k),
            self.period,
            self.gamma()?,
        )?)
    }

    fn dt(&self, n: usize) -> Result<f64, Failure> {
        let dt = self.dt.unwrap_or_else(|| default_dt(self.period, n));
        if !(dt > 0.0 && dt.is_finite()) {
            return usage(format!("--dt must be positive, got {dt}"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return usage(format!("--t-max must be positive, got {}", self.t_max));
        }
        Ok(dt)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write_tabular(&self, stem: &str, table: &Table) -> Result<PathBuf, Failure> {
        let path = match self.format {
            Format::Csv => {
                let p = self.path(&format!("{stem}.csv"));
                write_table(&p, table)?;
                p
            }
            Format::Json => {
                let p = self.path(&format!("{stem}.json"));
                let obj: serde_json::Map<String, serde_json::Value> = table
                    .headers
                    .iter()
                    .zip(&table.columns)
                    .map(|(h, c)| (h.clone(), json!(c)))
                    .collect();
                write_json(&p, &obj)?;
                p
            }
        };
        Ok(path)
    }
}

fn announce(paths: &[&Path]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn run(cli: &Cli) -> Outcome {
    if !cli.out_dir.is_dir() {
        std::fs::create_dir_all(&cli.out_dir)
            .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", cli.out_dir.display())))?;
    }
    match &cli.command {
        Command::Wave => cmd_wave(cli),
        Command::Residual => cmd_residual(cli),
        Command::Spectrum => cmd_spectrum(cli),
        Command::Logconcavity => cmd_logconcavity(cli),
        Command::Index => cmd_index(cli),
        Command::Evolve { init } => cmd_evolve(cli, init.as_deref()),
        Command::Stability { mode } => cmd_stability(cli, *mode),
        Command::Verify { ks } => cmd_verify(cli, ks.clone()),
        Command::Figures => cmd_figures(cli),
    }
}

fn cmd_wave(cli: &Cli) -> Outcome {
    let params = cli.params(0.5)?;
    let profile = sample_profile(&params, cli.n_or(512)?)?;
    let table = cli.write_tabular("wave_profile", &profile_table(&profile))?;
    let json_path = cli.path("wave_params.json");
    write_json(&json_path, &params)?;
    announce(&[&table, &json_path]);
    Ok(())
}

fn cmd_residual(cli: &Cli) -> Outcome {
    let params = cli.params(0.5)?;
    let profile = sample_profile(&params, cli.n_or(512)?)?;
    let values = profile.functional_g();
    let report = json!({
        "k": params.k,
        "L": params.period,
        "gamma": params.gamma,
        "n": profile.n(),
        "ode_residual": profile.ode_residual(),
        "min_phi": profile.min_value(),
        "functionals": values,
        "closed_form_M": params.closed_form_m().ok(),
        "closed_form_F": params.closed_form_f().ok(),
    });
    let path = cli.path("residual.json");
    write_json(&path, &report)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("plain values")
    );
    Ok(())
}

fn cmd_spectrum(cli: &Cli) -> Outcome {
    let params = cli.params(0.5)?;
    let profile = sample_profile(&params, cli.n_or(512)?)?;
    let op = assemble_operator(&profile, cli.m_modes)?;
    let report = low_spectrum(&op, 6.min(op.dim()))?;
    let residual = zero_mode_residual(&op, &profile)?;
    let refinement = refinement_study(&profile, cli.m_modes, 6).ok();
    let out = json!({
        "k": params.k,
        "L": params.period,
        "gamma": params.gamma,
        "spectrum": report,
        "zero_mode_residual": residual,
        "refinement": refinement.map(|r| json!({
            "fine_modes": r.fine.modes,
            "max_shift": r.max_shift,
            "verdict_stable": r.verdict_stable,
        })),
    });
    let path = cli.path("spectrum.json");
    write_json(&path, &out)?;
    println!(
        "hypothesis {}: {} negative, {} zero, lowest {:?}",
        if report.hypothesis_ok {
            "holds"
        } else {
            "fails"
        },
        report.n_negative,
        report.n_zero,
        &report.eigenvalues[..report.eigenvalues.len().min(3)]
    );
    announce(&[&path]);
    Ok(())
}

fn cmd_logconcavity(cli: &Cli) -> Outcome {
    let params = cli.params(FRAC_1_SQRT_2)?;
    let grid = symmetric_grid(10.0, cli.steps.max(2001));
    let curve = log_concavity_curve(params.k, &grid)?;
    let table = Table::new(
        &["x", "d2_log_g"],
        vec![
            curve.iter().map(|r| r.0).collect(),
            curve.iter().map(|r| r.1).collect(),
        ],
    )?;
    let table_path = cli.write_tabular("logconcavity", &table)?;
    let profile = sample_profile(&params, cli.n_or(512)?)?;
    let report = verify_proposition_criterion(&profile, &grid);
    let json_path = cli.path("criterion.json");
    write_json(
        &json_path,
        &json!({ "k": params.k, "passed": report.passed(), "report": report }),
    )?;
    announce(&[&table_path, &json_path]);
    Ok(())
}

fn index_rows(cli: &Cli) -> Result<Vec<mkawahara::index::IndexReport>, Failure> {
    if cli.gamma.is_some_and(|g| g != 0) {
        return usage("the stability index is defined on the gamma = 0 curve only");
    }
    if !(cli.period > 0.0 && cli.period.is_finite()) {
        return usage(format!("--L must be positive, got {}", cli.period));
    }
    Ok(scan_index(cli.k_min, cli.k_max, cli.steps, cli.period)?)
}

fn cmd_index(cli: &Cli) -> Outcome {
    if let Some(k) = cli.k {
        let row = stability_index(k, cli.period)?;
        println!(
            "{}",
            serde_json::to_string_pretty(&row).expect("plain values")
        );
        let path = cli.path("index_point.json");
        write_json(&path, &row)?;
        announce(&[&path]);
        return Ok(());
    }
    let rows = index_rows(cli)?;
    let table = cli.write_tabular("index", &index_table(&rows))?;
    let summary_path = cli.path("index_summary.json");
    write_json(&summary_path, &summarize(&rows))?;
    announce(&[&table, &summary_path]);
    Ok(())
}

fn cmd_evolve(cli: &Cli, init: Option<&Path>) -> Outcome {
    let params = cli.params(0.5)?;
    let (initial, n) = match init {
        Some(path) => {
            let u = read_initial_condition(path, params.period)?;
            let n = u.len();
            if cli.n.is_some_and(|m| m != n) {
                return usage(format!(
                    "--n {} disagrees with {} rows in {}",
                    cli.n.unwrap(),
                    n,
                    path.display()
                ));
            }
            (Some(u), n)
        }
        None => (None, cli.n_or(256)?),
    };
    let profile = sample_profile(&params, n)?;
    let initial = initial.unwrap_or_else(|| profile.samples.clone());
    let dt = cli.dt(n)?;
    let sample_every = ((0.1 / dt).round() as usize).max(1);
    let (series, state): (_, EvolutionState) =
        evolve(&initial, &profile, cli.t_max, dt, sample_every)?;
    let series_path = cli.write_tabular("evolve_timeseries", &time_series_table(&series))?;
    let final_table = Table::new(&["x", "u"], vec![profile.points(), state.to_grid()])?;
    let final_path = cli.write_tabular("evolve_final", &final_table)?;
    println!(
        "t = {}: rho {:e}, F drift {:e}, M drift {:e}, P drift {:e}",
        state.t,
        series.rho.last().copied().unwrap_or(f64::NAN),
        series.f_drift(),
        series.m_drift(),
        series.p_drift()
    );
    announce(&[&series_path, &final_path]);
    Ok(())
}

fn cmd_stability(cli: &Cli, mode: Option<usize>) -> Outcome {
    let params = cli.params(0.5)?;
    let n = cli.n_or(256)?;
    if !(cli.delta >= 0.0 && cli.delta.is_finite()) {
        return usage(format!("--delta must be non-negative, got {}", cli.delta));
    }
    let mut config = ExperimentConfig::new(params.k, params.period, cli.delta, cli.t_max);
    config.gamma = params.gamma;
    config.n = n;
    config.dt = cli.dt(n)?;
    config.seed = cli.seed;
    config.sample_every = ((0.1 / config.dt).round() as usize).max(1);
    if let Some(mode) = mode {
        config.perturbation = Perturbation::SingleMode { mode };
    }
    let (report, series) = stability_experiment(&config)?;
    let json_path = cli.path("stability_report.json");
    write_json(&json_path, &report)?;
    let series_path = cli.write_tabular("stability_timeseries", &time_series_table(&series))?;
    println!(
        "rho_max {:e} (amplification {:?}), F drift {:e}, M drift {:e}, P drift {:e}",
        report.rho_max, report.amplification, report.f_drift, report.m_drift, report.p_drift
    );
    announce(&[&json_path, &series_path]);
    Ok(())
}

fn cmd_verify(cli: &Cli, ks: Option<Vec<f64>>) -> Outcome {
    let mut config = VerifyConfig::default();
    if let Some(ks) = ks {
        config.ks = ks;
    } else if let Some(k) = cli.k {
        config.ks = vec![k];
    }
    config.period = cli.period;
    config.n = cli.n_or(config.n)?;
    config.m_modes = cli.m_modes;
    if cli.gamma.is_some() {
        config.gammas = vec![cli.gamma()?];
    }
    let report = run_verify(&config)?;
    let path = cli.path("verify_report.json");
    write_json(&path, &report)?;
    for case in &report.cases {
        let passed = case
            .checks
            .iter()
            .filter(|c| c.status == mkawahara::verify::Status::Pass)
            .count();
        println!(
            "k={} gamma={}: {}/{} checks pass{}",
            case.k,
            case.gamma.value(),
            passed,
            case.checks.len(),
            if case.passed() { "" } else { " (FAIL)" }
        );
    }
    announce(&[&path]);
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verification(report.failures.join(", ")))
    }
}

fn cmd_figures(cli: &Cli) -> Outcome {
    let grid = symmetric_grid(10.0, 2001);
    let curve = log_concavity_curve(FRAC_1_SQRT_2, &grid)?;
    let fig31 = Table::new(
        &["x", "d2_log_g"],
        vec![
            curve.iter().map(|r| r.0).collect(),
            curve.iter().map(|r| r.1).collect(),
        ],
    )?;
    let rows = index_rows(cli)?;
    let fig32 = Table::new(
        &["k", "f"],
        vec![
            rows.iter().map(|r| r.k).collect(),
            rows.iter().map(|r| r.f).collect(),
        ],
    )?;
    let p31 = cli.path("figure31.csv");
    let p32 = cli.path("figure32.csv");
    write_table(&p31, &fig31)?;
    write_table(&p32, &fig32)?;
    announce(&[&p31, &p32]);
    Ok(())
}
