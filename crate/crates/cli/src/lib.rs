//! Command-line front end for the Gabor lab.

pub mod commands;
pub mod plot;
pub mod reports;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gabor_lab::config::ExperimentConfig;

use commands::{Context, Failure, Output};
use reports::Metadata;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "gabor-lab",
    version,
    about = "Density, measure and localization experiments for Gabor systems on the discrete torus"
)]
pub struct Cli {
    /// `key = value` file; its entries override the flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write payloads, metadata and plots into this directory instead of stdout.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Emit SVG plots (needs --out).
    #[arg(long, global = true)]
    pub plot: bool,
    /// Logarithmic color scale for heatmaps.
    #[arg(long, global = true)]
    pub log_scale: bool,
    /// Cap on worker threads.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Experiment parameters; each maps onto one configuration key.
#[derive(Debug, Default, Args)]
pub struct ExperimentArgs {
    /// Torus length.
    #[arg(long = "L", global = true, value_name = "L")]
    pub l: Option<String>,
    /// gaussian, box:W or cosine_bump.
    #[arg(long, global = true)]
    pub window: Option<String>,
    /// Lattice steps AxB; both must divide L.
    #[arg(long, global = true)]
    pub lattice: Option<String>,
    /// Second lattice joined to the first.
    #[arg(long, global = true)]
    pub union: Option<String>,
    /// Reference lattice for localization and index rounding.
    #[arg(long, global = true)]
    pub reflattice: Option<String>,
    /// Reference window.
    #[arg(long = "ref", global = true, value_name = "WINDOW")]
    pub ref_window: Option<String>,
    /// Uniform jitter amplitude.
    #[arg(long, global = true, value_name = "DELTA")]
    pub jitter: Option<String>,
    /// Seed for jitter, removal and iterative start vectors.
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Localization exponent, a number >= 1 or `inf`.
    #[arg(long, global = true)]
    pub p: Option<String>,
    /// Box sides: `N`, `A..B` or `A..B:S`, comma separated.
    #[arg(long = "N", global = true, value_name = "LIST")]
    pub sides: Option<String>,
    /// Power iteration and conjugate gradient instead of dense eigensolves.
    #[arg(long, global = true)]
    pub iterative: bool,
    /// Point set file, CSV `x,omega` or JSON.
    #[arg(long, global = true, value_name = "FILE")]
    pub points: Option<String>,
    /// Fraction of points removed per cell by `excess`.
    #[arg(long, global = true)]
    pub fraction: Option<String>,
    /// Cell lattice for `excess`.
    #[arg(long, global = true)]
    pub cell: Option<String>,
}

impl ExperimentArgs {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let fields: [(&str, &Option<String>); 13] = [
            ("L", &self.l),
            ("window", &self.window),
            ("lattice", &self.lattice),
            ("union", &self.union),
            ("reflattice", &self.reflattice),
            ("ref_window", &self.ref_window),
            ("jitter", &self.jitter),
            ("seed", &self.seed),
            ("p", &self.p),
            ("N", &self.sides),
            ("points", &self.points),
            ("fraction", &self.fraction),
            ("cell", &self.cell),
        ];
        for (k, val) in fields {
            if let Some(s) = val {
                v.push((k, s.clone()));
            }
        }
        if self.iterative {
            v.push(("iterative", "true".into()));
        }
        v
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower and upper box densities per side N.
    Density,
    /// Frame bounds, densities and the bound sandwich at N = L.
    Framebounds,
    /// Canonical dual frame, with every dual sample in duals.csv.
    Dual,
    /// Column and row tail decay against a reference lattice system.
    Localize,
    /// Relative measure per box side and the reciprocity residuals.
    Measure,
    /// Frame bounds before and after removing a fraction of points per cell.
    Excess,
    /// Constants of a named finite construction.
    Counterexample {
        /// harmonic, no-hap, weak-not-strong, perturbed-basis, column-not-row,
        /// double-index, dual-localized-not-self or infinite-density-bessel.
        name: String,
        #[arg(long)]
        size: Option<usize>,
        /// Also write the JSON report to this path.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Run the acceptance criteria.
    Suite {
        /// Comma-separated criterion ids; all when omitted.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Density => "density",
            Command::Framebounds => "framebounds",
            Command::Dual => "dual",
            Command::Localize => "localize",
            Command::Measure => "measure",
            Command::Excess => "excess",
            Command::Counterexample { .. } => "counterexample",
            Command::Suite { .. } => "suite",
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            }
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

/// Flags first, then the configuration file on top.
pub fn build_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::default();
    for (k, v) in cli.experiment.pairs() {
        cfg.set(k, &v).map_err(|e| format!("--{k}: {e}"))?;
    }
    if let Command::Counterexample { size: Some(s), .. } = &cli.command {
        cfg.size = Some(*s);
    }
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        cfg.apply_file(&text)
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(cfg)
}

pub fn run(cli: Cli) -> i32 {
    let started = Instant::now();
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    if cli.plot && cli.out.is_none() {
        return usage("--plot needs --out DIR");
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return usage("--threads must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            return usage(format!("cannot configure {n} threads: {e}"));
        }
    }
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    let points_text = match &cfg.points {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => Some(t),
            Err(e) => return usage(format!("{path}: {e}")),
        },
        None => None,
    };
    let ctx = Context {
        points_text,
        plot: cli.plot,
        log_scale: cli.log_scale,
    };
    let result = match &cli.command {
        Command::Density => commands::density(&cfg, &ctx),
        Command::Framebounds => commands::framebounds(&cfg, &ctx),
        Command::Dual => commands::dual(&cfg, &ctx),
        Command::Localize => commands::localize(&cfg, &ctx),
        Command::Measure => commands::measure(&cfg, &ctx),
        Command::Excess => commands::excess(&cfg, &ctx),
        Command::Counterexample { name, .. } => commands::counterexample(&cfg, name),
        Command::Suite { criteria } => commands::suite(&cfg, criteria),
    };
    let out = match result {
        Ok(out) => out,
        Err(Failure::Usage(msg)) => return usage(msg),
        Err(Failure::Assertion(msg)) => {
            eprintln!("assertion failed: {msg}");
            return EXIT_ASSERTION;
        }
    };
    let code = if let Some(msg) = &out.failure {
        eprintln!("assertion failed: {msg}");
        EXIT_ASSERTION
    } else {
        EXIT_OK
    };
    if let Command::Counterexample {
        report: Some(path), ..
    } = &cli.command
    {
        if let Err(e) = std::fs::write(path, &out.json) {
            return usage(format!("{}: {e}", path.display()));
        }
    }
    let emitted = match &cli.out {
        Some(dir) => write_outputs(dir, cli.format, &out),
        None => {
            print_primary(cli.format, &out);
            Ok(Vec::new())
        }
    };
    let files = match emitted {
        Ok(f) => f,
        Err(e) => return usage(e),
    };
    if let Some(dir) = &cli.out {
        let meta = Metadata {
            command: cli.command.name().into(),
            version: env!("CARGO_PKG_VERSION").into(),
            started_unix,
            elapsed_seconds: started.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
            files,
            exit_code: code,
        };
        let text = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
        if let Err(e) = std::fs::write(dir.join("metadata.json"), text) {
            return usage(format!("{}: {e}", dir.display()));
        }
    }
    code
}

fn print_primary(format: Format, out: &Output) {
    use std::io::Write;
    let text = match format {
        Format::Json => out.json.as_str(),
        Format::Csv => out.csv.first().map(|(_, t)| t.as_str()).unwrap_or(""),
    };
    let mut stdout = std::io::stdout().lock();
    let _ = stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush());
}

fn write_outputs(dir: &Path, format: Format, out: &Output) -> Result<Vec<String>, String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut files: Vec<(String, &str)> = Vec::new();
    match format {
        Format::Json => files.push((format!("{}.json", out.stem), &out.json)),
        Format::Csv => files.extend(out.csv.iter().map(|(n, t)| (n.clone(), t.as_str()))),
    }
    files.extend(out.extras.iter().map(|(n, t)| (n.clone(), t.as_str())));
    files.extend(out.plots.iter().map(|(n, t)| (n.clone(), t.as_str())));
    for (name, text) in &files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(files.into_iter().map(|(n, _)| n).collect())
}
