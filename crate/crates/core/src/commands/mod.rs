//! Command-line front end.
//!
//! Every command that writes files also writes a [`RunManifest`] next to
//! them; `replay --manifest` reruns the recorded command and reproduces the
//! same bytes. Exit codes: 0 success, 1 verification failure, 2 usage or
//! runtime error.

mod report;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    corpus_vocabulary, corrupt_corpus, generate_corpus, read_corpus, write_corpus, CorruptionKind,
    CorruptionSpec, GenConfig,
};
use crate::decode::DecoderBudget;
use crate::error::{Error, Result};
use crate::fsa::to_dot;
use crate::lattice::{build_composed, build_grid, build_temporal_schema, build_unit_schema, LossKind, TargetSequence};
use crate::loss::{LossConfig, PenaltySchedule, SkipTokenMode};
use crate::metrics::{wer, EditCounts};
use crate::serde_log::parse_log_weight;
use crate::toy::train::write_history;
use crate::toy::{evaluate, split_corpus, train, Checkpoint, SynthesisSpec, Synthesizer, TrainConfig};
use crate::verify::{run_checks, CheckConfig, CheckHooks};

pub use report::{build_report, render_csv, render_markdown, ReportRow};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "robust-transducer", version, about = "Transducer losses for noisy transcripts")]
pub struct Cli {
    /// Worker threads (default: all cores); outputs do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", content = "config", rename_all = "kebab-case")]
pub enum Command {
    /// Generate a clean synthetic corpus.
    Gen(GenArgs),
    /// Corrupt the target words of a corpus.
    Corrupt(CorruptArgs),
    /// Train the toy transducer.
    Train(TrainArgs),
    /// Greedy-decode a corpus with a checkpoint and report WER.
    Eval(EvalArgs),
    /// Run the loss self-checks.
    CheckLoss(CheckLossArgs),
    /// Write a lattice or schema as Graphviz DOT.
    ExportDot(ExportDotArgs),
    /// Tabulate training runs with WERD and WERDR.
    Report(ReportArgs),
    /// Rerun the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(long, default_value_t = 20)]
    pub vocab: usize,
    #[arg(long, default_value_t = 2000)]
    pub utterances: usize,
    #[arg(long, default_value_t = 5)]
    pub min_words: usize,
    #[arg(long, default_value_t = 12)]
    pub max_words: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct CorruptArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub kind: CorruptionKind,
    /// Per-word probability for del, sub and ins.
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    /// Fraction of utterances corrupted by mixed.
    #[arg(long, default_value_t = 0.5)]
    pub utt_frac: f64,
    /// Per-word probability of each mixed stage.
    #[arg(long, default_value_t = 0.15)]
    pub per_type_p: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = LossKind::Rnnt)]
    pub loss: LossKind,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true, value_parser = parse_log_weight)]
    #[serde(with = "crate::serde_log")]
    pub skip_frame_weight: f64,
    /// Initial skip-token penalty; decays toward --max-weight.
    #[arg(long, default_value_t = -20.0, allow_hyphen_values = true, value_parser = parse_log_weight)]
    #[serde(with = "crate::serde_log")]
    pub skip_token_penalty: f64,
    #[arg(long, default_value_t = SkipTokenMode::Sumexcl)]
    pub skip_token_mode: SkipTokenMode,
    #[arg(long, default_value_t = 0.9)]
    pub decay: f64,
    #[arg(long, default_value_t = -6.0, allow_hyphen_values = true, value_parser = parse_log_weight)]
    #[serde(with = "crate::serde_log")]
    pub max_weight: f64,
    #[arg(long, default_value_t = 3)]
    pub start_epoch: usize,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long, default_value_t = 16)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 32)]
    pub hidden_dim: usize,
    #[arg(long, default_value_t = 1)]
    pub eval_every: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

impl TrainArgs {
    /// Arguments with every default, training on `corpus` into `out_dir`.
    pub fn new(corpus: impl Into<PathBuf>, loss: LossKind, out_dir: impl Into<PathBuf>) -> Self {
        TrainArgs {
            corpus: corpus.into(),
            loss,
            skip_frame_weight: 0.0,
            skip_token_penalty: -20.0,
            skip_token_mode: SkipTokenMode::Sumexcl,
            decay: 0.9,
            max_weight: -6.0,
            start_epoch: 3,
            epochs: 50,
            learning_rate: 0.05,
            momentum: 0.9,
            batch_size: 16,
            hidden_dim: 32,
            eval_every: 1,
            seed: 1,
            out_dir: out_dir.into(),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            batch_size: self.batch_size,
            hidden_dim: self.hidden_dim,
            loss: LossConfig {
                kind: self.loss,
                skip_frame_weight: self.skip_frame_weight,
                skip_token_penalty: self.skip_token_penalty,
                skip_token_mode: self.skip_token_mode,
                check_normalized: true,
            },
            schedule: PenaltySchedule {
                initial_weight: self.skip_token_penalty,
                decay: self.decay,
                max_weight: self.max_weight,
                start_epoch: self.start_epoch,
            },
            eval_every: self.eval_every,
            clip_norm: None,
            decoder: DecoderBudget::default(),
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Result file (default: the checkpoint path with `.eval.json` appended).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct CheckLossArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 4)]
    pub max_t: usize,
    #[arg(long, default_value_t = 3)]
    pub max_u: usize,
    #[arg(long, default_value_t = 3)]
    pub max_v: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also write the report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flip the sign of analytic gradients to exercise the failure path.
    #[arg(long, hide = true)]
    #[serde(default)]
    pub inject_wrong_sign_gradient: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Repr {
    Grid,
    Unit,
    Temporal,
    Composed,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ExportDotArgs {
    #[arg(long, default_value_t = LossKind::Rnnt)]
    pub loss: LossKind,
    #[arg(long, default_value_t = 3)]
    pub t: usize,
    #[arg(long, default_value_t = 2)]
    pub u: usize,
    /// Vocabulary size (default: max(u, 1)); the target is tokens 0, 1, ...
    #[arg(long)]
    pub vocab: Option<usize>,
    #[arg(long, value_enum, default_value_t = Repr::Grid)]
    pub repr: Repr,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Markdown,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ReportArgs {
    /// Directory whose subdirectories are training runs.
    #[arg(long)]
    pub runs: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Markdown)]
    pub format: ReportFormat,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub command: Command,
    pub seeds: BTreeMap<String, u64>,
    pub outputs: Vec<PathBuf>,
    pub version: String,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// `<file>.manifest.json` next to a single output file.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

fn record(command: &Command, seeds: &[(&str, u64)], outputs: Vec<PathBuf>, at: &Path) -> Result<()> {
    RunManifest {
        command: command.clone(),
        seeds: seeds.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        outputs,
        version: VERSION.to_string(),
    }
    .write(at)
}

/// Result of a command: lines for standard output, and whether a check failed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub verification_failed: bool,
}

impl Outcome {
    fn text(stdout: String) -> Self {
        Outcome {
            stdout,
            verification_failed: false,
        }
    }
}

/// Runs one command in the current thread pool.
pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::Gen(a) => cmd_gen(command, a),
        Command::Corrupt(a) => cmd_corrupt(command, a),
        Command::Train(a) => cmd_train(command, a),
        Command::Eval(a) => cmd_eval(command, a),
        Command::CheckLoss(a) => cmd_check_loss(command, a),
        Command::ExportDot(a) => cmd_export_dot(command, a),
        Command::Report(a) => cmd_report(a),
        Command::Replay(a) => {
            let manifest = RunManifest::load(&a.manifest)?;
            if matches!(manifest.command, Command::Replay(_)) {
                return Err(Error::InvalidConfig("a manifest cannot record a replay".into()));
            }
            execute(&manifest.command)
        }
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        _ => Ok(()),
    }
}

pub fn cmd_gen(command: &Command, a: &GenArgs) -> Result<Outcome> {
    let corpus = generate_corpus(&GenConfig {
        vocab_size: a.vocab,
        utterances: a.utterances,
        min_words: a.min_words,
        max_words: a.max_words,
        seed: a.seed,
    })?;
    ensure_parent(&a.out)?;
    write_corpus(&a.out, &corpus)?;
    record(command, &[("seed", a.seed)], vec![a.out.clone()], &manifest_path_for(&a.out))?;
    Ok(Outcome::text(format!("wrote {} utterances to {}\n", corpus.len(), a.out.display())))
}

pub fn cmd_corrupt(command: &Command, a: &CorruptArgs) -> Result<Outcome> {
    let corpus = read_corpus(&a.input)?;
    let spec = CorruptionSpec {
        kind: a.kind,
        p: a.p,
        utterance_fraction: a.utt_frac,
        per_type_p: a.per_type_p,
        seed: a.seed,
    };
    let vocab = corpus_vocabulary(&corpus);
    let out = corrupt_corpus(&corpus, &spec, &vocab)?;
    ensure_parent(&a.out)?;
    write_corpus(&a.out, &out.corpus)?;
    record(command, &[("seed", a.seed)], vec![a.out.clone()], &manifest_path_for(&a.out))?;
    let before: usize = corpus.iter().map(|u| u.target_words.len()).sum();
    let after: usize = out.corpus.iter().map(|u| u.target_words.len()).sum();
    let selected = out.selected.iter().filter(|&&s| s).count();
    Ok(Outcome::text(format!(
        "{} corruption: {} of {} utterances selected, {before} -> {after} target words\n",
        a.kind,
        selected,
        corpus.len()
    )))
}

/// How a corpus was produced, read from its manifest when there is one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorruptionLabel {
    /// `none`, `del`, `sub`, `ins`, `mixed` or `unknown`.
    pub kind: String,
    /// Per-word rate, or the corrupted utterance share for `mixed`, in percent.
    pub pct: f64,
}

pub fn corruption_label(corpus: &Path) -> CorruptionLabel {
    let unknown = CorruptionLabel {
        kind: "unknown".into(),
        pct: 0.0,
    };
    let Ok(manifest) = RunManifest::load(&manifest_path_for(corpus)) else {
        return unknown;
    };
    match manifest.command {
        Command::Gen(_) => CorruptionLabel {
            kind: "none".into(),
            pct: 0.0,
        },
        Command::Corrupt(c) => CorruptionLabel {
            kind: c.kind.to_string(),
            pct: 100.0 * if c.kind == CorruptionKind::Mixed { c.utt_frac } else { c.p },
        },
        _ => unknown,
    }
}

/// Written to `summary.json` in a training run directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub loss: LossKind,
    pub corruption: CorruptionLabel,
    pub epochs: usize,
    pub best_epoch: usize,
    pub dev_wer: Option<f64>,
    pub test_wer: Option<f64>,
    pub test_counts: Option<EditCounts>,
}

pub const METRICS_FILE: &str = "metrics.csv";
pub const BEST_CHECKPOINT: &str = "model.ckpt";
pub const FINAL_CHECKPOINT: &str = "final.ckpt";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn cmd_train(command: &Command, a: &TrainArgs) -> Result<Outcome> {
    let corpus = read_corpus(&a.corpus)?;
    let synthesis = SynthesisSpec::new(corpus_vocabulary(&corpus), a.seed);
    let synth = Synthesizer::new(synthesis.clone())?;
    let (train_set, dev_set, test_set) = split_corpus(&corpus);
    let config = a.train_config();
    let outcome = train(train_set, dev_set, &synth, &config)?;

    let test_counts = if test_set.is_empty() {
        None
    } else {
        Some(evaluate(&outcome.best_params, test_set, &synth, config.decoder)?)
    };
    let summary = TrainSummary {
        loss: a.loss,
        corruption: corruption_label(&a.corpus),
        epochs: a.epochs,
        best_epoch: outcome.best_epoch,
        dev_wer: outcome.best_dev_wer,
        test_wer: test_counts.as_ref().map(wer).transpose()?,
        test_counts,
    };

    fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let path = |name: &str| a.out_dir.join(name);
    write_history(&path(METRICS_FILE), &outcome.history)?;
    Checkpoint {
        params: outcome.best_params,
        synthesis: synthesis.clone(),
    }
    .save(&path(BEST_CHECKPOINT))?;
    Checkpoint {
        params: outcome.final_params,
        synthesis,
    }
    .save(&path(FINAL_CHECKPOINT))?;
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(path(SUMMARY_FILE), text).map_err(|e| Error::io(path(SUMMARY_FILE), e))?;
    record(
        command,
        &[("seed", a.seed)],
        [METRICS_FILE, BEST_CHECKPOINT, FINAL_CHECKPOINT, SUMMARY_FILE]
            .iter()
            .map(|n| path(n))
            .collect(),
        &path(MANIFEST_FILE),
    )?;

    let fmt = |w: Option<f64>| w.map_or("-".to_string(), |w| format!("{:.2}%", 100.0 * w));
    Ok(Outcome::text(format!(
        "{} on {} ({}): best epoch {}, dev WER {}, test WER {}\n",
        a.loss,
        a.corpus.display(),
        summary.corruption.kind,
        summary.best_epoch,
        fmt(summary.dev_wer),
        fmt(summary.test_wer)
    )))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub utterances: usize,
    pub wer: f64,
    pub counts: EditCounts,
}

pub fn cmd_eval(command: &Command, a: &EvalArgs) -> Result<Outcome> {
    let corpus = read_corpus(&a.corpus)?;
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    let synth = Synthesizer::new(ckpt.synthesis.clone())?;
    let counts = evaluate(&ckpt.params, &corpus, &synth, DecoderBudget::default())?;
    let result = EvalResult {
        utterances: corpus.len(),
        wer: wer(&counts)?,
        counts,
    };
    let out = a.out.clone().unwrap_or_else(|| {
        let mut name = a.checkpoint.file_name().map(OsString::from).unwrap_or_default();
        name.push(".eval.json");
        a.checkpoint.with_file_name(name)
    });
    let mut text = serde_json::to_string_pretty(&result)?;
    text.push('\n');
    ensure_parent(&out)?;
    fs::write(&out, text).map_err(|e| Error::io(&out, e))?;
    record(command, &[], vec![out.clone()], &manifest_path_for(&out))?;
    Ok(Outcome::text(format!(
        "WER {:.2}% (sub {}, ins {}, del {}, {} reference words, {} utterances)\n",
        100.0 * result.wer,
        counts.sub,
        counts.ins,
        counts.del,
        counts.reference_len,
        result.utterances
    )))
}

pub fn cmd_check_loss(command: &Command, a: &CheckLossArgs) -> Result<Outcome> {
    let config = CheckConfig {
        trials: a.trials,
        max_t: a.max_t,
        max_u: a.max_u,
        max_v: a.max_v,
        seed: a.seed,
    };
    let hooks = CheckHooks {
        flip_gradient_sign: a.inject_wrong_sign_gradient,
    };
    let report = run_checks(&config, &hooks)?;
    let mut out = String::new();
    for s in &report.suites {
        out.push_str(&format!(
            "{:<13} {} instances={:<5} max_deviation={:.3e} tolerance={:.0e}\n",
            s.name,
            if s.passed() { "PASS" } else { "FAIL" },
            s.instances,
            s.max_deviation,
            s.tolerance
        ));
        if !s.passed() {
            out.push_str(&format!("  worst case: {}\n", s.worst_case));
        }
    }
    if let Some(path) = &a.out {
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        ensure_parent(path)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
        record(command, &[("seed", a.seed)], vec![path.clone()], &manifest_path_for(path))?;
    }
    Ok(Outcome {
        stdout: out,
        verification_failed: !report.passed(),
    })
}

/// DOT text for the requested graph; the target is tokens `0, 1, ..., u - 1`.
pub fn export_dot(a: &ExportDotArgs) -> Result<String> {
    let vocab = a.vocab.unwrap_or(a.u.max(1));
    let units = (0..a.u).map(|i| (i % vocab) as u32).collect();
    let target = TargetSequence::new(units, vocab)?;
    let graph = match a.repr {
        Repr::Grid => build_grid(&target, a.t, a.loss)?,
        Repr::Unit => build_unit_schema(&target, a.loss),
        Repr::Temporal => build_temporal_schema(a.t, vocab, a.loss)?,
        Repr::Composed => build_composed(&target, a.t, a.loss)?,
    };
    Ok(to_dot(&graph))
}

pub fn cmd_export_dot(command: &Command, a: &ExportDotArgs) -> Result<Outcome> {
    let dot = export_dot(a)?;
    ensure_parent(&a.out)?;
    fs::write(&a.out, dot).map_err(|e| Error::io(&a.out, e))?;
    record(command, &[], vec![a.out.clone()], &manifest_path_for(&a.out))?;
    Ok(Outcome::text(format!("wrote {}\n", a.out.display())))
}

pub fn cmd_report(a: &ReportArgs) -> Result<Outcome> {
    let (rows, warnings) = build_report(&a.runs)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let table = match a.format {
        ReportFormat::Csv => render_csv(&rows)?,
        ReportFormat::Markdown => render_markdown(&rows),
    };
    match &a.out {
        Some(path) => {
            ensure_parent(path)?;
            fs::write(path, &table).map_err(|e| Error::io(path, e))?;
            record(
                &Command::Report(a.clone()),
                &[],
                vec![path.clone()],
                &manifest_path_for(path),
            )?;
            Ok(Outcome::text(format!("wrote {}\n", path.display())))
        }
        None => Ok(Outcome::text(table)),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    match pool.install(|| execute(&cli.command)) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            if outcome.verification_failed {
                EXIT_VERIFICATION
            } else {
                EXIT_OK
            }
        }
        Err(e @ Error::Verification(_)) => {
            eprintln!("error: {e}");
            EXIT_VERIFICATION
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
