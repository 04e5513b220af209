//! The `denat` command line.
//!
//! | command     | reads                         | writes                        |
//! |-------------|-------------------------------|-------------------------------|
//! | `transform` | one source file               | rewritten source on stdout    |
//! | `generate`  | files and directories         | pair JSONL, reject JSONL      |
//! | `split`     | pair JSONL                    | manifest JSON                 |
//! | `evaluate`  | pair JSONL, hypothesis JSONL  | per-rule CSV, score JSONL     |
//! | `check`     | pair JSONL                    | findings on stdout            |
//!
//! Summaries go to stderr. Exit status is 0 on success, 1 on an I/O or
//! other fatal error, 2 when an input does not parse, 3 when `transform`
//! finds no applicable rule, and 4 when `check` finds a divergent pair.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dataflow::build_def_use;
use crate::metrics::CodeBleuWeights;
use crate::pipeline::{self, read_jsonl, write_jsonl, GenerateOptions, Hypothesis, PairRecord, PipelineError, DEFAULT_VALID_FRACTION};
use crate::syntax::SourceUnit;
use crate::transforms::{apply, RuleConfig, RuleId, TransformError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FATAL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NO_RULE: i32 = 3;
pub const EXIT_DIVERGENT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "denat", version, about = "De-naturalizing rewrites and reconstruction metrics for MiniLang")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rewrite one file and print the result.
    Transform {
        file: PathBuf,
        /// Force this rule instead of a seeded choice.
        #[arg(long)]
        rule: Option<RuleId>,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Build a pair dataset from `.mini` files.
    Generate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
        /// Where pairs that failed the equivalence gate go.
        #[arg(long)]
        rejects: Option<PathBuf>,
        #[command(flatten)]
        rules: RuleArgs,
        #[arg(long, default_value_t = 16)]
        trials: usize,
        /// Drop units whose canonical text was already seen.
        #[arg(long)]
        dedup: bool,
        /// Emit a pair for every applicable rule.
        #[arg(long)]
        per_rule: bool,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Hold out a validation split of a dataset.
    Split {
        dataset: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_VALID_FRACTION)]
        valid_fraction: f64,
        #[arg(long, default_value_t = 0)]
        split_seed: u64,
    },
    /// Score hypotheses against a dataset.
    Evaluate {
        dataset: PathBuf,
        hypotheses: PathBuf,
        /// Per-rule CSV.
        #[arg(long, short)]
        out: PathBuf,
        /// Per-pair scores as JSONL.
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Re-check every pair of a dataset for equivalence.
    Check {
        dataset: PathBuf,
        #[arg(long, default_value_t = 16)]
        trials: usize,
    },
}

#[derive(Debug, Args)]
pub struct RuleArgs {
    #[arg(long, env = "DENAT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated rule names; all rules when absent.
    #[arg(long, value_delimiter = ',')]
    pub rules: Vec<RuleId>,
    #[arg(long, default_value_t = 0.5)]
    pub rename_fraction: f64,
}

impl RuleArgs {
    fn config(&self) -> RuleConfig {
        let mut c = RuleConfig {
            rename_fraction: self.rename_fraction,
            ..RuleConfig::default()
        };
        if !self.rules.is_empty() {
            c.rules_enabled = self.rules.iter().copied().collect();
        }
        c
    }
}

/// A failure with the exit status it maps to.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = match e {
            PipelineError::Json { .. } => EXIT_PARSE,
            _ => EXIT_FATAL,
        };
        Failure::new(code, e.to_string())
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::new(EXIT_FATAL, format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| io_failure(path, e))
}

fn read_records<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, Failure> {
    let f = File::open(path).map_err(|e| io_failure(path, e))?;
    read_jsonl(BufReader::new(f)).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn write_records<T: serde::Serialize>(path: &Path, items: &[T]) -> Result<(), Failure> {
    write_jsonl(items, create(path)?).map_err(|e| io_failure(path, e))
}

fn transform(file: &Path, rule: Option<RuleId>, args: &RuleArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let text = std::fs::read_to_string(file).map_err(|e| io_failure(file, e))?;
    let name = file.display().to_string();
    let unit = SourceUnit::parse(&name, &text).map_err(|e| Failure::new(EXIT_PARSE, format!("{name}: {e}")))?;
    build_def_use(&unit.ast).map_err(|e| Failure::new(EXIT_PARSE, format!("{name}: {e}")))?;
    let mut config = args.config();
    if let Some(r) = rule {
        config.rules_enabled = [r].into_iter().collect();
    }
    let outcome = apply(&unit, &config, args.seed).map_err(|e| match e {
        TransformError::NoApplicableRule => Failure::new(EXIT_NO_RULE, format!("{name}: {e}")),
        other => Failure::new(EXIT_FATAL, format!("{name}: {other}")),
    })?;
    let site = outcome.original.ast.node(outcome.site).span;
    writeln!(out, "{}", outcome.transformed.text).map_err(|e| Failure::new(EXIT_FATAL, e.to_string()))?;
    let _ = writeln!(err, "rule: {}", outcome.rule);
    let _ = writeln!(err, "site: {}..{}", site.start, site.end);
    for (k, v) in &outcome.auxiliary {
        let _ = writeln!(err, "{k}: {v}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn generate(
    inputs: &[PathBuf],
    out: &Path,
    rejects: Option<&Path>,
    args: &RuleArgs,
    trials: usize,
    dedup: bool,
    per_rule: bool,
    jobs: Option<usize>,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    let ingested = pipeline::ingest(inputs);
    for (path, e) in &ingested.report.io_errors {
        let _ = writeln!(err, "warning: {}: {e}", path.display());
    }
    for s in &ingested.report.skipped {
        let _ = writeln!(err, "skipped: {}: {}", s.path.display(), s.error);
    }
    let opts = GenerateOptions {
        config: args.config(),
        master_seed: args.seed,
        trials,
        dedup,
        per_rule,
        jobs,
    };
    let output = pipeline::generate_pairs(&ingested.units, &opts)?;
    write_records(out, &output.records)?;
    if let Some(path) = rejects {
        write_records(path, &output.rejects)?;
    }
    let r = &output.report;
    let _ = writeln!(
        err,
        "files {} parsed {} skipped {} | emitted {} no-rule {} quarantined {} duplicates {} failed {} | records {} rejects {} inconclusive {}",
        ingested.report.files,
        ingested.units.len(),
        ingested.report.skipped.len(),
        r.emitted,
        r.no_rule,
        r.quarantined,
        r.duplicates,
        r.failed,
        r.records,
        r.rejects,
        r.inconclusive,
    );
    Ok(())
}

fn split(dataset: &Path, out: &Path, valid_fraction: f64, split_seed: u64, err: &mut dyn Write) -> Result<(), Failure> {
    let records: Vec<PairRecord> = read_records(dataset)?;
    let manifest = pipeline::split(&records, valid_fraction, split_seed)?;
    let mut w = create(out)?;
    serde_json::to_writer_pretty(&mut w, &manifest).map_err(|e| Failure::new(EXIT_FATAL, e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_failure(out, e))?;
    let _ = writeln!(err, "train {} valid {}", manifest.train_ids.len(), manifest.valid_ids.len());
    Ok(())
}

fn evaluate(dataset: &Path, hyps: &Path, out: &Path, scores: Option<&Path>, err: &mut dyn Write) -> Result<(), Failure> {
    let records: Vec<PairRecord> = read_records(dataset)?;
    let hypotheses: Vec<Hypothesis> = read_records(hyps)?;
    let eval = pipeline::evaluate(&records, &hypotheses, &CodeBleuWeights::default())?;
    eval.write_csv(create(out)?).map_err(|e| Failure::new(EXIT_FATAL, e.to_string()))?;
    if let Some(path) = scores {
        write_records(path, &eval.pairs)?;
    }
    let s = &eval.summary;
    let _ = writeln!(
        err,
        "pairs {} | EM {:.4} SM {:.4} DM {:.4} BLEU {:.4} wBLEU {:.4} CodeBLEU {:.4} | copy rate {:.4} median edit distance {}",
        s.count, s.em_rate, s.sm, s.dm, s.bleu, s.weighted_bleu, s.codebleu, s.copy_rate, s.median_edit_distance
    );
    Ok(())
}

fn check(dataset: &Path, trials: usize, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let records: Vec<PairRecord> = read_records(dataset)?;
    let findings = pipeline::audit(&records, trials);
    for f in &findings {
        let line = serde_json::to_string(f).map_err(|e| Failure::new(EXIT_FATAL, e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Failure::new(EXIT_FATAL, e.to_string()))?;
    }
    let divergent = findings.iter().filter(|f| f.witness.is_some()).count();
    let broken = findings.len() - divergent;
    let _ = writeln!(err, "checked {} divergent {divergent} unreadable {broken}", records.len());
    if divergent > 0 {
        Err(Failure::new(EXIT_DIVERGENT, format!("{divergent} divergent pairs")))
    } else if broken > 0 {
        Err(Failure::new(EXIT_PARSE, format!("{broken} pairs could not be checked")))
    } else {
        Ok(())
    }
}

/// Runs one parsed invocation and returns its exit status.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Transform { file, rule, rules } => transform(file, *rule, rules, out, err),
        Command::Generate {
            inputs,
            out: path,
            rejects,
            rules,
            trials,
            dedup,
            per_rule,
            jobs,
        } => generate(inputs, path, rejects.as_deref(), rules, *trials, *dedup, *per_rule, *jobs, err),
        Command::Split {
            dataset,
            out: path,
            valid_fraction,
            split_seed,
        } => split(dataset, path, *valid_fraction, *split_seed, err),
        Command::Evaluate {
            dataset,
            hypotheses,
            out: path,
            scores,
        } => evaluate(dataset, hypotheses, path, scores.as_deref(), err),
        Command::Check { dataset, trials } => check(dataset, *trials, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Parses `args` (program name first) and runs the command. Usage errors
/// print clap's message and return its status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, out, err),
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            e.exit_code()
        }
    }
}
