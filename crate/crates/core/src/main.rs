use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use fkdv_core::bloch::{stability_sweep_with, Classification, SweepOptions};
use fkdv_core::reduction::{critical_power, gamma_coefficient, predicted_classification};
use fkdv_core::sweep::{boundary_check, pstar_table, run_sweep, write_diagram_svg, Range, SweepConfig, SweepRecord};
use fkdv_core::validate::{run_validation, Suite, ValidateConfig};
use fkdv_core::wave::{solve_wave_with, ModelParams, WaveOptions, WaveSolution};

const EXIT_SOLVER: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(name = "fkdv", version, about = "Periodic traveling waves of fractional KdV and their spectral stability")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for one periodic wave; writes wave.json and profile.csv.
    Wave(WaveArgs),
    /// Bloch spectrum and verdict for one wave; writes spectrum.csv and verdict.json.
    Stability(StabilityArgs),
    /// Sweep an (alpha, p) grid; writes pstar.csv, region.csv, records.jsonl and diagram.svg.
    Diagram(DiagramArgs),
    /// Run validation suites; writes validate.json.
    Validate(ValidateArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Fourier truncation N.
    #[arg(long, default_value_t = 32)]
    n_modes: usize,
    /// Worker threads; falls back to FKDV_NUM_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct WaveArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    p: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    b: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    wave: WaveArgs,
    #[arg(long, default_value_t = 64)]
    xi_count: usize,
    /// Skip the re-check of the worst xi at a finer truncation.
    #[arg(long)]
    no_convergence_check: bool,
}

#[derive(Args)]
struct DiagramArgs {
    /// min:max:count
    #[arg(long, default_value = "0.6:6:40")]
    alpha_range: Range,
    /// min:max:count
    #[arg(long, default_value = "1:3:40")]
    p_range: Range,
    /// Amplitude; repeat for several.
    #[arg(long = "a", default_values_t = [0.05], allow_negative_numbers = true)]
    amplitudes: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, default_value_t = 64)]
    xi_count: usize,
    /// Uniform xi grid without the points clustered near zero.
    #[arg(long)]
    no_xi_refine: bool,
    /// Re-check every cell at a finer truncation.
    #[arg(long)]
    convergence_check: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ValidateArgs {
    /// expansions, oracle, symmetry, discriminant or constant-state; repeat for several. Default: all.
    #[arg(long)]
    suite: Vec<Suite>,
    /// Replace the default parameter sets (needs --p too).
    #[arg(long, requires = "p")]
    alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    p: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    a: f64,
    /// Periods in the oracle torus; repeat for several. Default: 2 and 3.
    #[arg(long)]
    n_periods: Vec<usize>,
    #[command(flatten)]
    common: Common,
}

/// Errors carry the exit code they map to.
enum Failure {
    Solver(anyhow::Error),
    Validation(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Solver(e)
    }
}

impl From<fkdv_core::Error> for Failure {
    fn from(e: fkdv_core::Error) -> Self {
        Failure::Solver(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Wave(a) => a.common.clone(),
        Command::Stability(a) => a.wave.common.clone(),
        Command::Diagram(a) => a.common.clone(),
        Command::Validate(a) => a.common.clone(),
    };
    let result = thread_pool(common.threads)
        .map_err(Failure::Solver)
        .and_then(|pool| {
            fs::create_dir_all(&common.out)
                .with_context(|| format!("creating {}", common.out.display()))?;
            pool.install(|| match cli.command {
                Command::Wave(a) => cmd_wave(&a),
                Command::Stability(a) => cmd_stability(&a),
                Command::Diagram(a) => cmd_diagram(&a),
                Command::Validate(a) => cmd_validate(&a),
            })
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_SOLVER)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

fn thread_pool(flag: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
    let threads = match flag {
        Some(n) => n,
        None => match std::env::var("FKDV_NUM_THREADS") {
            Ok(v) if !v.trim().is_empty() => v
                .trim()
                .parse()
                .with_context(|| format!("FKDV_NUM_THREADS must be a non-negative integer, got {v:?}"))?,
            _ => 0,
        },
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn solve(args: &WaveArgs) -> Result<WaveSolution, Failure> {
    let params = ModelParams::new(args.alpha, args.p)?;
    let opts = WaveOptions::with_truncation(args.common.n_modes);
    Ok(solve_wave_with(params, args.a, args.b, None, &opts)?)
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> anyhow::Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Mode {
    n: i64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct WaveFile {
    alpha: f64,
    p: f64,
    a: f64,
    b: f64,
    truncation: usize,
    k_alpha: f64,
    wavenumber: f64,
    residual: f64,
    newton_iterations: usize,
    coefficients: Vec<Mode>,
}

fn cmd_wave(args: &WaveArgs) -> Result<(), Failure> {
    let w = solve(args)?;
    let n = w.truncation() as i64;
    let file = WaveFile {
        alpha: args.alpha,
        p: args.p,
        a: w.a,
        b: w.b,
        truncation: w.truncation(),
        k_alpha: w.wavenumber_alpha,
        wavenumber: w.wavenumber(),
        residual: w.residual_norm,
        newton_iterations: w.newton_iterations,
        coefficients: (-n..=n)
            .map(|k| {
                let c = w.profile.coeff(k);
                Mode { n: k, re: c.re, im: c.im }
            })
            .collect(),
    };
    let dir = &args.common.out;
    write_json(dir, "wave.json", &file)?;

    let mut csv = csv::Writer::from_writer(create(dir, "profile.csv")?);
    csv.write_record(["z", "P"]).map_err(anyhow::Error::from)?;
    let m = 256;
    for (j, v) in w.profile.samples(m).into_iter().enumerate() {
        let z = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
        csv.serialize((z, v)).map_err(anyhow::Error::from)?;
    }
    csv.flush().map_err(anyhow::Error::from)?;
    println!(
        "k^alpha = {:.12}  residual = {:.3e}  ({} Newton steps)",
        w.wavenumber_alpha, w.residual_norm, w.newton_iterations
    );
    Ok(())
}

#[derive(Serialize)]
struct VerdictFile {
    #[serde(flatten)]
    record: SweepRecord,
    gamma: f64,
    predicted: Classification,
    truncation: usize,
    xi_points: usize,
    convergence: Option<fkdv_core::bloch::ConvergenceCheck>,
}

fn cmd_stability(args: &StabilityArgs) -> Result<(), Failure> {
    let start = std::time::Instant::now();
    let w = solve(&args.wave)?;
    let n = args.wave.common.n_modes;
    let grid = fkdv_core::bloch::default_xi_grid(args.xi_count);
    let opts = SweepOptions {
        convergence_truncation: (!args.no_convergence_check).then_some(n + 16),
        ..SweepOptions::default()
    };
    let (verdict, slices) = stability_sweep_with(&w, &grid, n, &opts)?;
    let dir = &args.wave.common.out;

    let mut csv = csv::Writer::from_writer(create(dir, "spectrum.csv")?);
    csv.write_record(["xi", "re", "im"]).map_err(anyhow::Error::from)?;
    for s in &slices {
        for l in &s.eigenvalues {
            csv.serialize((s.xi, l.re, l.im)).map_err(anyhow::Error::from)?;
        }
    }
    csv.flush().map_err(anyhow::Error::from)?;

    let (alpha, p) = (args.wave.alpha, args.wave.p);
    let gamma = gamma_coefficient(alpha, p);
    let record = SweepRecord {
        alpha,
        p,
        a: w.a,
        b: w.b,
        k_alpha: w.wavenumber_alpha,
        growth_rate: verdict.growth_rate,
        worst_xi: verdict.worst_xi,
        verdict: verdict.classification,
        gamma_sign: if gamma > 0.0 { 1 } else if gamma < 0.0 { -1 } else { 0 },
        p_star_at_alpha: critical_power(alpha),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    println!(
        "{}  growth rate {:.3e} at xi = {:.4}",
        record.verdict, record.growth_rate, record.worst_xi
    );
    write_json(
        dir,
        "verdict.json",
        &VerdictFile {
            record,
            gamma,
            predicted: predicted_classification(alpha, p),
            truncation: n,
            xi_points: grid.len(),
            convergence: verdict.convergence,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct RegionRow {
    alpha: f64,
    p: f64,
    a: f64,
    verdict: Classification,
    predicted: Classification,
    growth_rate: f64,
    worst_xi: f64,
    k_alpha: f64,
    gamma_sign: i8,
    p_star_at_alpha: f64,
}

fn cmd_diagram(args: &DiagramArgs) -> Result<(), Failure> {
    let config = SweepConfig {
        alpha_range: args.alpha_range,
        p_range: args.p_range,
        amplitudes: args.amplitudes.clone(),
        b: args.b,
        xi_count: args.xi_count,
        xi_refine: !args.no_xi_refine,
        truncation: args.common.n_modes,
        check_convergence: args.convergence_check,
    };
    config.validate()?;
    let dir = &args.common.out;

    let mut pstar = csv::Writer::from_writer(create(dir, "pstar.csv")?);
    pstar.write_record(["alpha", "p_star"]).map_err(anyhow::Error::from)?;
    let lo = (config.alpha_range.min * 100.0).ceil() / 100.0;
    for (alpha, p) in pstar_table(lo, config.alpha_range.max, 0.01) {
        pstar.serialize(((alpha * 100.0).round() / 100.0, p)).map_err(anyhow::Error::from)?;
    }
    pstar.flush().map_err(anyhow::Error::from)?;

    let mut region = csv::Writer::from_writer(create(dir, "region.csv")?);
    let mut records = create(dir, "records.jsonl")?;
    let total = config.cells().len();
    let result = run_sweep(&config, |i, rec| {
        region
            .serialize(RegionRow {
                alpha: rec.alpha,
                p: rec.p,
                a: rec.a,
                verdict: rec.verdict,
                predicted: rec.predicted(),
                growth_rate: rec.growth_rate,
                worst_xi: rec.worst_xi,
                k_alpha: rec.k_alpha,
                gamma_sign: rec.gamma_sign,
                p_star_at_alpha: rec.p_star_at_alpha,
            })
            .map_err(std::io::Error::other)?;
        region.flush()?;
        serde_json::to_writer(&mut records, rec)?;
        writeln!(records)?;
        records.flush()?;
        if (i + 1) % 100 == 0 || i + 1 == total {
            eprintln!("{}/{} cells", i + 1, total);
        }
        Ok(())
    });
    let recs = result?;

    let mut svg = create(dir, "diagram.svg")?;
    write_diagram_svg(&mut svg, &config, &recs).context("writing diagram.svg")?;
    svg.flush().context("writing diagram.svg")?;

    let report = boundary_check(&config, &recs);
    write_json(dir, "boundary.json", &report)?;
    println!(
        "{} cells: {} agree with p*(alpha), {} differ next to the curve, {} differ away from it",
        report.cells,
        report.agreeing,
        report.near_boundary,
        report.offending.len()
    );
    if !report.passed {
        let cells: Vec<String> = report
            .offending
            .iter()
            .map(|(a, p, v)| format!("(alpha={a:.4}, p={p:.4}: {v})"))
            .collect();
        return Err(Failure::Validation(format!(
            "verdict boundary strays more than one cell from p*(alpha): {}",
            cells.join(", ")
        )));
    }
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), Failure> {
    let defaults = ValidateConfig::default();
    let config = ValidateConfig {
        suites: if args.suite.is_empty() { defaults.suites.clone() } else { args.suite.clone() },
        params: args.alpha.zip(args.p),
        a: args.a,
        n_periods: if args.n_periods.is_empty() { defaults.n_periods.clone() } else { args.n_periods.clone() },
        truncation: args.common.n_modes,
        oracle_truncation: defaults.oracle_truncation.min(args.common.n_modes),
    };
    let report = run_validation(&config)?;
    write_json(&args.common.out, "validate.json", &report)?;
    let mut failures = Vec::new();
    for s in &report.suites {
        println!("{:<15} {}", s.suite().as_str(), if s.passed() { "pass" } else { "FAIL" });
        failures.extend(s.failures());
    }
    if !report.passed {
        return Err(Failure::Validation(failures.join("; ")));
    }
    Ok(())
}
