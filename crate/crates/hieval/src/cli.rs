//! Command-line interface of the `hieval` binary.
//!
//! Three subcommands: `eval` scores one system, `compare` ranks several
//! systems (or correlates externally supplied rank vectors), and
//! `preprocess-inner-nodes` rewrites inner-node labels onto dummy leaves.
//! Reports go to standard output, warnings to standard error. Exit codes:
//! 0 on success, 2 on malformed input or configuration, 3 on label ids
//! missing from the hierarchy.
//!
//! The `HIEVAL_WORKERS` environment variable fixes the worker-pool size;
//! output is byte-identical for any setting.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::pipeline::{self, EvalConfig, Measure};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Argument definitions
// ---------------------------------------------------------------------------

/// Hierarchical classification evaluation: distance, set, and LCA-graph
/// based measures, plus significance-aware system comparison.
#[derive(Debug, Parser)]
#[command(name = "hieval", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score one system's predictions against the true labels.
    Eval(EvalArgs),
    /// Rank several systems per measure and correlate the rankings.
    Compare(CompareArgs),
    /// Rewrite labels sitting on inner nodes onto fresh dummy leaves.
    PreprocessInnerNodes(PreprocessArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

/// Flags shared by `eval` and `compare`.
#[derive(Debug, Args)]
struct MeasureFlags {
    /// Comma-separated measures to compute (default: all except tie).
    ///
    /// Keys: tie,gie,mgia,ph,rh,fh,sdl,bianchi-fh,desc-fh,plca,rlca,flca.
    #[arg(long)]
    measures: Option<String>,

    /// Cost charged per unmatched label by the pairing measures.
    #[arg(long, default_value_t = 5.0)]
    dmax: f64,

    /// Pairing distance cap: label pairs farther apart than this are
    /// treated as unrelated. A number, or 'off'.
    #[arg(long, default_value = "off")]
    max_dist: String,

    /// Maximum label-to-LCA distance; rewrites each instance's view of the
    /// hierarchy and applies to every measure. A whole number >= 1, or
    /// 'off'.
    #[arg(long, default_value = "off")]
    lca_threshold: String,

    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,

    /// Drop label ids missing from the hierarchy (with a warning) instead
    /// of exiting with code 3.
    #[arg(long)]
    skip_unknown: bool,

    /// Node id excluded from ancestor- and descendant-augmented sets
    /// (a root shared by every label carries no information).
    #[arg(long)]
    virtual_root: Option<i64>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Hierarchy file: one "parent child [weight]" edge per line.
    #[arg(long)]
    hierarchy: PathBuf,

    /// True-label file: one instance per line, whitespace-separated ids.
    #[arg(long = "true")]
    truth: PathBuf,

    /// Predicted-label file, aligned line-by-line with the true labels.
    #[arg(long)]
    pred: PathBuf,

    /// Report every instance's values in addition to the means.
    #[arg(long)]
    per_instance: bool,

    #[command(flatten)]
    common: MeasureFlags,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Hierarchy file: one "parent child [weight]" edge per line.
    #[arg(long, required_unless_present = "ranks_from")]
    hierarchy: Option<PathBuf>,

    /// True-label file shared by all systems.
    #[arg(long = "true", required_unless_present = "ranks_from")]
    truth: Option<PathBuf>,

    /// Predicted-label file of one system; repeat per system (at least
    /// two).
    #[arg(long, required_unless_present = "ranks_from")]
    pred: Vec<PathBuf>,

    /// Skip evaluation: read a TSV of precomputed ranks (header row naming
    /// the measures, one row per system) and report only the rank
    /// correlation between measures.
    #[arg(long, conflicts_with_all = ["hierarchy", "truth", "pred"])]
    ranks_from: Option<PathBuf>,

    /// Significance level for grouping systems onto shared ranks.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    #[command(flatten)]
    common: MeasureFlags,
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    /// Hierarchy file: one "parent child [weight]" edge per line.
    #[arg(long)]
    hierarchy: PathBuf,

    /// Label file whose inner-node labels should move to dummy leaves.
    #[arg(long = "true")]
    truth: PathBuf,

    /// Where to write the hierarchy extended with the dummy leaves.
    #[arg(long)]
    out_hierarchy: PathBuf,

    /// Where to write the rewritten label file.
    #[arg(long)]
    out_labels: PathBuf,
}

// ---------------------------------------------------------------------------
// Flag conversion
// ---------------------------------------------------------------------------

fn parse_off_f64(flag: &str, value: &str) -> Result<Option<f64>> {
    if value.eq_ignore_ascii_case("off") {
        return Ok(None);
    }
    value.parse::<f64>().map(Some).map_err(|_| {
        Error::Invalid(format!("--{flag} expects a number or 'off', got '{value}'"))
    })
}

fn parse_off_usize(flag: &str, value: &str) -> Result<Option<usize>> {
    if value.eq_ignore_ascii_case("off") {
        return Ok(None);
    }
    value.parse::<usize>().map(Some).map_err(|_| {
        Error::Invalid(format!(
            "--{flag} expects a whole number or 'off', got '{value}'"
        ))
    })
}

/// Worker-pool size from `HIEVAL_WORKERS`, if set.
fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var("HIEVAL_WORKERS") {
        Ok(value) => match value.trim().parse::<usize>() {
            Ok(count) if count >= 1 => Ok(Some(count)),
            _ => Err(Error::Invalid(format!(
                "HIEVAL_WORKERS must be a positive integer, got '{value}'"
            ))),
        },
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Invalid(format!("cannot read HIEVAL_WORKERS: {e}"))),
    }
}

impl MeasureFlags {
    fn to_config(&self, per_instance: bool, alpha: f64) -> Result<EvalConfig> {
        let measures = match &self.measures {
            Some(list) => pipeline::parse_measure_list(list)?,
            None => Measure::default_set(),
        };
        if let Some(root) = self.virtual_root {
            if root < 0 {
                return Err(Error::Invalid(
                    "--virtual-root expects a non-negative node id".to_string(),
                ));
            }
        }
        Ok(EvalConfig {
            measures,
            d_max: self.dmax,
            max_dist: parse_off_f64("max-dist", &self.max_dist)?,
            lca_threshold: parse_off_usize("lca-threshold", &self.lca_threshold)?,
            alpha,
            virtual_root: self.virtual_root,
            skip_unknown: self.skip_unknown,
            per_instance,
            workers: workers_from_env()?,
        })
    }
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

fn emit_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content)
        .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))
}

impl Cli {
    /// Execute the parsed command, printing reports to standard output.
    ///
    /// # Errors
    ///
    /// Every failure from argument conversion, input parsing, or
    /// evaluation; the caller maps them to exit codes via
    /// [`Error::exit_code`].
    pub fn run(self) -> Result<()> {
        match self.command {
            Command::Eval(args) => {
                let cfg = args.common.to_config(args.per_instance, 0.05)?;
                let (report, warnings) =
                    pipeline::run_eval(&args.hierarchy, &args.truth, &args.pred, &cfg)?;
                emit_warnings(&warnings);
                match args.common.format {
                    Format::Tsv => print!("{}", report.to_tsv()),
                    Format::Json => print!("{}", report.to_json()),
                }
                Ok(())
            }
            Command::Compare(args) => {
                if let Some(ranks) = &args.ranks_from {
                    let report = pipeline::run_ranks_from(ranks)?;
                    match args.common.format {
                        Format::Tsv => print!("{}", report.to_tsv()),
                        Format::Json => print!("{}", report.to_json()),
                    }
                    return Ok(());
                }
                let cfg = args.common.to_config(false, args.alpha)?;
                let (hierarchy, truth) = (
                    args.hierarchy.as_ref().expect("required by clap"),
                    args.truth.as_ref().expect("required by clap"),
                );
                let (report, warnings) =
                    pipeline::run_compare(hierarchy, truth, &args.pred, &cfg)?;
                emit_warnings(&warnings);
                match args.common.format {
                    Format::Tsv => print!("{}", report.to_tsv()),
                    Format::Json => print!("{}", report.to_json()),
                }
                Ok(())
            }
            Command::PreprocessInnerNodes(args) => {
                let hierarchy_text = std::fs::read_to_string(&args.hierarchy).map_err(|e| {
                    Error::Invalid(format!("cannot read {}: {e}", args.hierarchy.display()))
                })?;
                let labels_text = std::fs::read_to_string(&args.truth).map_err(|e| {
                    Error::Invalid(format!("cannot read {}: {e}", args.truth.display()))
                })?;
                let result = pipeline::preprocess_inner_nodes(&hierarchy_text, &labels_text)?;
                write_file(&args.out_hierarchy, &result.hierarchy_text)?;
                write_file(&args.out_labels, &result.labels_text)?;
                let mut mapping = String::from("inner_node\tdummy_leaf\n");
                for (inner, dummy) in &result.mapping {
                    mapping.push_str(&format!("{inner}\t{dummy}\n"));
                }
                print!("{mapping}");
                Ok(())
            }
        }
    }
}
