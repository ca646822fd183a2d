//! Command-line front end: `train`, `label`, `evaluate`, `baseline`,
//! `synth` and `inspect`.
//!
//! Logs go to standard error; data goes to files or standard output.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use roleinduce::corpus::{parse_conll, write_conll, ExtractOptions, Format, Sentence, SyntaxColumns};
use roleinduce::decoder::MeanField;
use roleinduce::evaluation::{
    evaluate_clustering, format_csv, format_table, generate_synthetic, syntf_baseline,
    ClusterEvaluation, SyntheticSpec,
};
use roleinduce::pipeline::{evaluate_files, fit, labeled_output};
use roleinduce::training::{
    effective_roles, load_model, read_header, save_model, write_loss_trace, TrainConfig,
};

/// Exit status for bad input data, unreadable files or model errors.
pub const EXIT_DATA: i32 = 2;
/// Exit status for command-line misuse.
pub const EXIT_USAGE: i32 = 1;

#[derive(Parser, Debug)]
#[command(name = "roleinduce", version, about = "Unsupervised semantic role induction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a model on a CoNLL corpus.
    Train(TrainArgs),
    /// Append induced role columns to a CoNLL corpus.
    Label(LabelArgs),
    /// Score a labeled file against gold roles.
    Evaluate(EvaluateArgs),
    /// Score the syntactic-function baseline on a gold corpus.
    Baseline(BaselineArgs),
    /// Write a synthetic corpus with known roles.
    Synth(SynthArgs),
    /// Print a model's header, vocabulary sizes and role usage.
    Inspect(InspectArgs),
}

#[derive(Args, Debug)]
struct CorpusArgs {
    /// CoNLL input file.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "conll2008")]
    format: Format,
    /// Syntax columns to read: gold or predicted.
    #[arg(long, default_value = "gold")]
    syntax: SyntaxColumns,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    input: CorpusArgs,
    /// Where to write the model.
    #[arg(long)]
    model: PathBuf,
    /// Optional per-epoch loss CSV.
    #[arg(long)]
    loss_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    roles: usize,
    #[arg(long, default_value_t = 30)]
    dim_d: usize,
    #[arg(long, default_value_t = 15)]
    dim_k: usize,
    #[arg(long, default_value_t = 20)]
    negatives: usize,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 0.01)]
    init_scale: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Serial, seed-reproducible training.
    #[arg(long)]
    deterministic: bool,
    #[arg(long, default_value_t = 20)]
    min_lemma_freq: u64,
    /// Predicates seen at least this often get their own matrices.
    #[arg(long, default_value_t = 50)]
    pred_min_freq: u64,
    #[arg(long, default_value_t = 1)]
    batch_size: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Per-instance gradient norm cap; 0 disables.
    #[arg(long, default_value_t = 5.0)]
    clip_norm: f64,
    #[arg(long, default_value_t = 0.0)]
    weight_decay: f64,
    /// score or own-role-expected.
    #[arg(long, default_value = "score")]
    mean_field: MeanField,
}

impl TrainArgs {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            num_roles: self.roles,
            dim_d: self.dim_d,
            dim_k: self.dim_k,
            negatives: self.negatives,
            epochs: self.epochs,
            learning_rate: self.lr,
            init_scale: self.init_scale,
            min_lemma_freq: self.min_lemma_freq,
            pred_min_freq: self.pred_min_freq,
            seed: self.seed,
            deterministic: self.deterministic,
            batch_size: self.batch_size,
            clip_norm: self.clip_norm,
            weight_decay: self.weight_decay,
            threads: self.threads,
            mean_field: self.mean_field,
            ..TrainConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct LabelArgs {
    #[command(flatten)]
    input: CorpusArgs,
    #[arg(long)]
    model: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Labeled file written by `label`.
    #[arg(long)]
    pred: PathBuf,
    /// Gold file the labels were produced from.
    #[arg(long)]
    gold: PathBuf,
    #[arg(long, default_value = "conll2008")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write CSV instead of a table.
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[command(flatten)]
    input: CorpusArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5000)]
    instances: usize,
    #[arg(long, default_value_t = 3)]
    roles: usize,
    #[arg(long, default_value_t = 30)]
    predicates: usize,
    #[arg(long, default_value_t = 20)]
    lemmas_per_role: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0.9)]
    cue_reliability: f64,
    #[arg(long, default_value_t = 0.3)]
    passive_rate: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Keep the first N sentences in `--out` and write the rest to
    /// `--heldout-out`.
    #[arg(long, requires = "heldout_out")]
    split: Option<usize>,
    #[arg(long, requires = "split")]
    heldout_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InspectArgs {
    #[arg(long)]
    model: PathBuf,
}

fn read_corpus(path: &Path, format: Format, syntax: SyntaxColumns) -> Result<Vec<Sentence>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let sentences = parse_conll(BufReader::new(file), format, syntax)
        .with_context(|| format!("cannot parse {} as {}", path.display(), format))?;
    info!("read {} sentences from {}", sentences.len(), path.display());
    Ok(sentences)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_sentences(sentences: &[Sentence], path: Option<&Path>) -> Result<()> {
    let mut out = output(path)?;
    write_conll(sentences, &mut out)?;
    out.flush()?;
    Ok(())
}

fn write_report(name: &str, eval: &ClusterEvaluation, csv: bool, path: Option<&Path>) -> Result<()> {
    let rows = [(name, eval)];
    let text = if csv { format_csv(&rows) } else { format_table(&rows) };
    let mut out = output(path)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let sentences = read_corpus(&args.input.corpus, args.input.format, args.input.syntax)?;
    let fitted = fit(&sentences, &args.config(), &ExtractOptions::default())?;
    save_model(&fitted.model, &args.model)
        .with_context(|| format!("cannot write model to {}", args.model.display()))?;
    if let Some(path) = &args.loss_csv {
        let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        write_loss_trace(&fitted.trace, BufWriter::new(file))?;
    }
    info!(
        "model written to {}; {} roles in use",
        args.model.display(),
        effective_roles(&fitted.model.role_usage)
    );
    Ok(())
}

fn label(args: LabelArgs) -> Result<()> {
    let model = load_model(&args.model)
        .with_context(|| format!("cannot load model {}", args.model.display()))?;
    let sentences = read_corpus(&args.input.corpus, args.input.format, args.input.syntax)?;
    write_sentences(&labeled_output(&model, &sentences), args.out.as_deref())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let gold = read_corpus(&args.gold, args.format, SyntaxColumns::Gold)?;
    let predicted = read_corpus(&args.pred, args.format, SyntaxColumns::Gold)?;
    let eval = evaluate_files(&gold, &predicted)?;
    write_report("model", &eval, args.csv, args.out.as_deref())
}

fn baseline(args: BaselineArgs) -> Result<()> {
    let sentences = read_corpus(&args.input.corpus, args.input.format, args.input.syntax)?;
    let drafts = roleinduce::draft_instances(&sentences, &ExtractOptions::default());
    let vocab = roleinduce::build_vocabulary(&drafts, 1);
    let instances: Vec<_> = drafts
        .iter()
        .map(|d| roleinduce::corpus::index_draft(d, &vocab))
        .collect();
    let clusters = syntf_baseline(&instances, &vocab.deprels);
    let eval = evaluate_clustering(&instances, &clusters)?;
    write_report("SyntF", &eval, args.csv, args.out.as_deref())
}

fn synth(args: SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        num_roles: args.roles,
        num_predicates: args.predicates,
        lemmas_per_role: args.lemmas_per_role,
        noise_rate: args.noise,
        instances: args.instances,
        seed: args.seed,
        cue_reliability: args.cue_reliability,
        passive_rate: args.passive_rate,
    };
    spec.validate().map_err(UsageError)?;
    let sentences = generate_synthetic(&spec);
    match (args.split, &args.heldout_out) {
        (Some(n), Some(heldout)) => {
            if n > sentences.len() {
                return Err(UsageError(format!(
                    "--split {} exceeds the {} generated instances",
                    n,
                    sentences.len()
                ))
                .into());
            }
            let (head, tail) = sentences.split_at(n);
            write_sentences(head, Some(&args.out))?;
            write_sentences(tail, Some(heldout))
        }
        _ => write_sentences(&sentences, Some(&args.out)),
    }
}

fn inspect(args: InspectArgs) -> Result<()> {
    let bytes = std::fs::read(&args.model)
        .with_context(|| format!("cannot read {}", args.model.display()))?;
    let header = read_header(&bytes)
        .with_context(|| format!("cannot load model {}", args.model.display()))?;
    let mut out = io::stdout().lock();
    writeln!(out, "roles            {}", header.num_roles)?;
    writeln!(out, "d / k            {} / {}", header.dim_d, header.dim_k)?;
    writeln!(out, "argument lemmas  {}", header.num_lemmas)?;
    writeln!(out, "features         {}", header.num_features)?;
    writeln!(out, "predicates       {} ({} with own matrices)", header.num_predicates, header.specific_predicates)?;
    writeln!(out, "relations        {}", header.num_deprels)?;
    writeln!(out, "templates        {}", header.templates.join(" "))?;
    writeln!(out, "role usage       {:?}", header.role_usage)?;
    writeln!(out, "roles in use     {}", effective_roles(&header.role_usage))?;
    writeln!(out, "config           {}", serde_json::to_string(&header.config)?)?;
    Ok(())
}

/// An input problem detected after argument parsing that is still the
/// caller's to fix on the command line.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn is_usage(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<UsageError>().is_some()
            || matches!(
                e.downcast_ref::<roleinduce::TrainError>(),
                Some(roleinduce::TrainError::Config(_))
            )
    })
}

/// Parses `argv` (including the program name) and runs the command,
/// returning the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Label(a) => label(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Baseline(a) => baseline(a),
        Command::Synth(a) => synth(a),
        Command::Inspect(a) => inspect(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {:#}", e);
            if is_usage(&e) {
                EXIT_USAGE
            } else {
                EXIT_DATA
            }
        }
    }
}
