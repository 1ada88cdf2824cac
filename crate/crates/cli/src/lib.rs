//! Command-line front end: transcripts in, tidy CSV or JSON tables out.
//!
//! Every command writes its tables under `--out` through a temporary file
//! and a rename, then records a `<command>.manifest.json` with the tool
//! version, the hash of the effective configuration and SHA-256 digests of
//! every input and output. Exit status is 0 on success, 1 when an analysis
//! fails and 2 on usage errors.

mod analysis;
mod concept;
pub mod config;
pub mod output;
mod report;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Format, RunConfig};
use dyad::paraling::Feature;

/// Invalid invocation or configuration; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(
    name = "dyad",
    version,
    about = "Convergence, alignment and concept-map analytics for dyadic transcripts"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// Output table format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0: one per core).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Slice width in seconds.
    #[arg(long, global = true)]
    pub slice_width: Option<f64>,
    /// ADF significance level: 0.01, 0.05 or 0.10.
    #[arg(long, global = true)]
    pub significance: Option<f64>,
    /// ADF lag order p (p − 1 lagged differences).
    #[arg(long, global = true)]
    pub lag_order: Option<usize>,
    /// Granger lag count.
    #[arg(long, global = true)]
    pub lags: Option<usize>,
    /// Lag between partners when differencing features.
    #[arg(long, global = true)]
    pub diff_lag: Option<usize>,
    /// Drop the linear trend from the ADF regression.
    #[arg(long, global = true)]
    pub no_trend: bool,
    /// Require both event series to be matched to their ends in DTW.
    #[arg(long, global = true)]
    pub closed_end: bool,
    /// Generalize numerals to `number` and single letters to `variable`.
    #[arg(long, global = true)]
    pub math: bool,
    /// Directory with replacement lexicon files.
    #[arg(long, global = true)]
    pub lexicon_dir: Option<PathBuf>,
    /// Concept-map window in concept positions.
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Concept-map stop unit in sentences.
    #[arg(long, global = true)]
    pub stop_unit: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-slice features for each speaker.
    Features(Inputs),
    /// ADF test on each feature's partner difference.
    Converge(Inputs),
    /// Composite convergence strength across sessions.
    Strength(Inputs),
    /// Granger tests between rapport and feature differences, both directions.
    Granger {
        #[command(flatten)]
        inputs: Inputs,
        /// Feature whose partner difference is the effect.
        #[arg(long, default_value = "message_density")]
        effect: Feature,
        /// `rapport` or a feature name.
        #[arg(long, default_value = "rapport")]
        cause: String,
    },
    /// DTW alignment of each strategy's event times between partners.
    Dtw {
        #[command(flatten)]
        inputs: Inputs,
        /// Also write every warping path.
        #[arg(long)]
        paths: bool,
    },
    /// Concept maps from transcripts.
    #[command(subcommand)]
    Conceptmap(ConceptCommand),
    /// Correlation between two columns of a table.
    Correlate {
        table: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, value_enum, default_value = "pearson")]
        method: Method,
    },
    /// Synthetic corpus with planted structure.
    Synth {
        #[arg(long, default_value_t = 5)]
        dyads: usize,
        #[arg(long, default_value_t = 1)]
        sessions: u8,
        #[arg(long, default_value_t = 120)]
        slices: usize,
        /// Make every dyad's partner difference a random walk.
        #[arg(long)]
        divergent: bool,
        /// Algebra-tutoring text instead of generic filler.
        #[arg(long)]
        math_text: bool,
        #[arg(long, value_enum, default_value = "tsv")]
        encoding: Encoding,
    },
    /// Per-session summary and long-format tables from earlier outputs.
    Report {
        /// Directory holding earlier outputs (default: --out).
        dir: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConceptCommand {
    /// One map per speaker and session.
    Build(Inputs),
    /// Intersection of two saved maps.
    Intersect {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "intersection")]
        name: String,
    },
    /// Shared-structure statistics between partners, and optionally against a worksheet.
    Stats {
        #[command(flatten)]
        inputs: Inputs,
        /// Plain-text worksheet to compare each speaker with.
        #[arg(long)]
        worksheet: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Transcript files or directories.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Pearson,
    Spearman,
    PointBiserial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Encoding {
    Tsv,
    Json,
}

/// Parses `args` (program name first), runs the command and returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}

pub fn execute(cli: Cli) -> anyhow::Result<()> {
    let cfg = RunConfig::resolve(&cli.global)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()?;
    pool.install(|| match cli.command {
        Command::Features(i) => analysis::features(&cfg, &i.inputs),
        Command::Converge(i) => analysis::converge(&cfg, &i.inputs),
        Command::Strength(i) => analysis::strength(&cfg, &i.inputs),
        Command::Granger {
            inputs,
            effect,
            cause,
        } => analysis::granger(&cfg, &inputs.inputs, effect, &cause),
        Command::Dtw { inputs, paths } => analysis::dtw(&cfg, &inputs.inputs, paths),
        Command::Conceptmap(ConceptCommand::Build(i)) => concept::build(&cfg, &i.inputs),
        Command::Conceptmap(ConceptCommand::Intersect { a, b, name }) => {
            concept::intersect(&cfg, &a, &b, &name)
        }
        Command::Conceptmap(ConceptCommand::Stats { inputs, worksheet }) => {
            concept::stats(&cfg, &inputs.inputs, worksheet.as_deref())
        }
        Command::Correlate {
            table,
            x,
            y,
            method,
        } => report::correlate(&cfg, &table, &x, &y, method),
        Command::Synth {
            dyads,
            sessions,
            slices,
            divergent,
            math_text,
            encoding,
        } => analysis::synth(
            &cfg, dyads, sessions, slices, divergent, math_text, encoding,
        ),
        Command::Report { dir } => report::report(&cfg, dir.as_deref().unwrap_or(&cfg.out)),
    })
}
