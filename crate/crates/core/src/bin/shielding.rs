use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use shielding::config::RunConfig;
use shielding::engine::{evaluate_field_with, EngineOptions, SystemForm};
use shielding::experiments::{run_drift, run_elliptic, run_fluctuations, run_shielding};
use shielding::sampling::{fekete_points, Sampler};
use shielding::types::{Grid, ScatteringData, C64};
use shielding::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_SOFT_CHECK: u8 = 3;

/// Exact N-soliton solutions of the focusing NLS equation and soliton-gas experiments.
#[derive(Parser)]
#[command(name = "shielding", version, propagate_version = true)]
struct Cli {
    /// Worker threads for grid and trial parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fekete points of the weighted logarithmic energy.
    Fekete {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 200_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Points CSV; the JSON sidecar goes next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Field of the N-soliton solution on a uniform (x, t) grid.
    Evaluate {
        /// CSV rows `re_z,im_z,re_c,im_c`, optional header.
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        xmin: f64,
        #[arg(long, allow_hyphen_values = true)]
        xmax: f64,
        #[arg(long, default_value_t = 1)]
        nx: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        tmin: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        tmax: f64,
        #[arg(long, default_value_t = 1)]
        nt: usize,
        /// full, reduced or adaptive.
        #[arg(long, default_value = "full")]
        form: String,
        /// Output CSV; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence of the gas field to its finite-soliton limit.
    Shield(RunArgs),
    /// Drift of the secondary soliton train with N.
    Drift(RunArgs),
    /// Fluctuations of the random-gas field and their scaling with N.
    Fluctuate(RunArgs),
    /// Period, envelope and decay of the elliptic wave of an ellipse.
    Elliptic(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `section.key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config entry, e.g. `--set run.ns=100,200,400`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Raw data CSV (overrides `output.csv`).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON report (overrides `output.json`); standard output when neither is set.
    #[arg(long)]
    json: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let outcome = match cli.command {
        Command::Fekete { n, tol, max_iter, seed, out } => cmd_fekete(n, tol, max_iter, seed, &out),
        Command::Evaluate { spectrum, xmin, xmax, nx, tmin, tmax, nt, form, out } => {
            cmd_evaluate(&spectrum, (xmin, xmax, nx), (tmin, tmax, nt), &form, out.as_deref())
        }
        Command::Shield(args) => run_command(&args, shield),
        Command::Drift(args) => run_command(&args, drift),
        Command::Fluctuate(args) => run_command(&args, fluctuate),
        Command::Elliptic(args) => run_command(&args, elliptic),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_SOFT_CHECK),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn cmd_fekete(n: usize, tol: f64, max_iter: usize, seed: u64, out: &Path) -> Outcome {
    let result = fekete_points(n, tol, max_iter, seed)?;
    let mut csv = create(out)?;
    result.write_csv(&mut csv)?;
    csv.flush()?;
    let mut side = create(&out.with_extension("json"))?;
    writeln!(side, "{}", serde_json::to_string_pretty(&result.sidecar()).map_err(Error::from)?)?;
    side.flush()?;
    if result.converged {
        Ok(true)
    } else {
        Err(result.ensure_converged().unwrap_err().into())
    }
}

fn read_spectrum(path: &Path) -> Result<ScatteringData, Failure> {
    let file = File::open(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let (mut z, mut c) = (Vec::new(), Vec::new());
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let values: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        match values {
            Some(v) if v.len() == 4 => {
                z.push(C64::new(v[0], v[1]));
                c.push(C64::new(v[2], v[3]));
            }
            None if k == 0 => continue,
            _ => return Err(Failure::Usage(format!("{}:{}: expected re_z,im_z,re_c,im_c", path.display(), k + 1))),
        }
    }
    Ok(ScatteringData::from_pairs(&z, &c)?)
}

fn cmd_evaluate(spectrum: &Path, x: (f64, f64, usize), t: (f64, f64, usize), form: &str, out: Option<&Path>) -> Outcome {
    let form = match form {
        "full" => SystemForm::Full,
        "reduced" => SystemForm::Reduced,
        "adaptive" => SystemForm::Adaptive,
        other => return Err(Failure::Usage(format!("unknown form `{other}`"))),
    };
    let data = read_spectrum(spectrum)?;
    let grid = Grid::uniform(x.0, x.1, x.2, t.0, t.1, t.2)?;
    let field = evaluate_field_with(&data, &grid, &EngineOptions { form, ..EngineOptions::default() })?;
    match out {
        Some(path) => {
            let mut w = create(path)?;
            field.write_csv(&mut w)?;
            w.flush()?;
        }
        None => field.write_csv(std::io::stdout().lock())?,
    }
    Ok(true)
}

/// Report, raw-data writer and named soft checks of one experiment run.
struct Run {
    report: Value,
    write_csv: Box<dyn FnOnce(&mut dyn Write) -> std::io::Result<()>>,
    checks: Vec<(&'static str, bool)>,
}

fn run_command(args: &RunArgs, run: fn(&RunConfig) -> Result<Run, Error>) -> Outcome {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for o in &args.overrides {
        cfg.insert_assignment(o)?;
    }
    if let Some(seed) = args.seed {
        cfg.insert("run.seed", &seed.to_string())?;
    }
    let csv_path = args.csv.clone().or_else(|| cfg.path("output.csv"));
    let json_path = args.json.clone().or_else(|| cfg.path("output.json"));
    let Run { report, write_csv, checks } = run(&cfg)?;
    let passed = checks.iter().all(|(_, ok)| *ok);
    let check_map: serde_json::Map<String, Value> = checks.iter().map(|(k, ok)| (k.to_string(), json!(ok))).collect();
    let doc = json!({ "report": report, "checks": check_map, "passed": passed });
    if let Some(path) = &csv_path {
        let mut w = create(path)?;
        write_csv(&mut w)?;
        w.flush()?;
    }
    let text = serde_json::to_string_pretty(&doc).map_err(Error::from)?;
    match &json_path {
        Some(path) => {
            let mut w = create(path)?;
            writeln!(w, "{text}")?;
            w.flush()?;
        }
        None if csv_path.is_none() => println!("{text}"),
        None => {}
    }
    for (name, ok) in &checks {
        if !ok {
            eprintln!("soft check failed: {name}");
        }
    }
    Ok(passed)
}

fn shield(cfg: &RunConfig) -> Result<Run, Error> {
    let sc = cfg.shielding()?;
    let threshold = cfg.f64_or("check.sup_error", 0.05)?;
    let report = run_shielding(&sc)?;
    let last_ok = report.rows.last().and_then(|r| r.sup_error).is_some_and(|e| e < threshold);
    let checks = vec![("monotone", report.monotone), ("final_sup_error", last_ok)];
    Ok(Run {
        report: serde_json::to_value(&report)?,
        write_csv: Box::new(move |w| report.write_csv(w)),
        checks,
    })
}

fn drift(cfg: &RunConfig) -> Result<Run, Error> {
    let dc = cfg.drift()?;
    let r2 = cfg.f64_or("check.r_squared", 0.9)?;
    let report = run_drift(&dc)?;
    let stable = report.rows.iter().filter(|r| r.n >= 200).all(|r| (r.main_peak_x - report.predicted_x0).abs() < 0.02);
    let checks = vec![
        ("positive_slope", report.fit.slope > 0.0),
        ("log_linear", report.fit.r_squared > r2),
        ("main_peak_stable", stable),
    ];
    Ok(Run {
        report: serde_json::to_value(&report)?,
        write_csv: Box::new(move |w| report.write_csv(w)),
        checks,
    })
}

fn fluctuate(cfg: &RunConfig) -> Result<Run, Error> {
    let fc = cfg.fluctuations()?;
    let (lo, hi) = match fc.sampler {
        Sampler::Ginibre => (0.8, 1.2),
        _ => (0.35, 0.65),
    };
    let (lo, hi) = (cfg.f64_or("check.alpha_min", lo)?, cfg.f64_or("check.alpha_max", hi)?);
    let p_min = cfg.f64_or("check.normality_p", 0.01)?;
    let report = run_fluctuations(&fc)?;
    let alpha_ok = report.fit.is_some_and(|f| (lo..=hi).contains(&f.alpha));
    let normal_ok = report.rows.last().and_then(|r| r.normality_p()).is_some_and(|p| p > p_min);
    let checks = vec![("alpha_band", alpha_ok), ("normality", normal_ok)];
    Ok(Run {
        report: serde_json::to_value(&report)?,
        write_csv: Box::new(move |w| report.write_csv(w)),
        checks,
    })
}

fn elliptic(cfg: &RunConfig) -> Result<Run, Error> {
    let ec = cfg.elliptic()?;
    let period_tol = cfg.f64_or("check.period_tol", 0.05)?;
    let envelope_tol = cfg.f64_or("check.envelope_tol", 0.1)?;
    let report = run_elliptic(&ec)?;
    let checks = vec![
        ("period", report.period_relative_error() <= period_tol),
        ("envelope", report.envelope_relative_error() <= envelope_tol),
        ("decay", report.decay_ok),
    ];
    Ok(Run {
        report: serde_json::to_value(&report)?,
        write_csv: Box::new(move |w| report.write_csv(w)),
        checks,
    })
}
