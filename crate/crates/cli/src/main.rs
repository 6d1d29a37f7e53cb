use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;
use serde_json::Value;

use sdpforge::conllu::{parse_conllu_with_domain, serialize_conllu, ParsedSentence};
use sdpforge::corpus::{align, dataset_stats, load_corpus, load_corpus_dir, Adapter, CorpusRecord, CrossReMapping};
use sdpforge::instance::{read_instances, write_instances, InstanceRecord};
use sdpforge::silver::{build_manifest, generate, sweep_grid, GenConfig, Manifest, PoolSentence, SentencePool};
use sdpforge::stats::{label_distribution, length_histogram, GroupBy, LabelCounting};
use sdpforge::trainer::synthetic::{self, SyntheticConfig};
use sdpforge::trainer::{run_protocol, sweep, Averaging, ProtocolData, TrainConfig};
use sdpforge::tree::propagate_conj;

/// Bad flags or config values. Exits with status 1; everything else exits 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

#[derive(Parser, Debug)]
#[command(name = "sdpforge", version, about = "Silver syntactic pre-training data for relation extraction")]
struct Cli {
    /// Seed for sampling (gen, synth) or a single training seed (train, sweep).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON file with default values; explicit flags win. A top-level key named
    /// after the subcommand selects a section.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "warn")]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check CoNLL-U files; prints one line per problem.
    Validate(ValidateArgs),
    /// Reattach conjuncts to the external governor of their list.
    ConjRewrite(ConjArgs),
    /// Path label, path length, or dataset size tables.
    Stats {
        #[command(subcommand)]
        table: StatsCommand,
    },
    /// Generate silver pre-training instances.
    Gen(GenArgs),
    /// Run the training protocol and write a report.
    Train(TrainArgs),
    /// Run the protocol once per manifest entry.
    Sweep(SweepArgs),
    /// Write the bundled synthetic task as instance files.
    Synth(SynthArgs),
}

#[derive(Args, Debug, Serialize)]
struct ValidateArgs {
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ConjArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum StatsCommand {
    Labels(PathStatsArgs),
    Lengths(PathStatsArgs),
    Dataset(DatasetArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Tsv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum AdapterName {
    Canonical,
    Crossre,
}

#[derive(Args, Debug, Serialize)]
struct CorpusArgs {
    /// Corpus file, or a directory of corpus files.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum, default_value = "canonical")]
    adapter: AdapterName,
    /// Field mapping for the crossre adapter (JSON).
    #[arg(long)]
    mapping: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct PathStatsArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Parses aligned one-to-one with the corpus records, in order.
    #[arg(long, num_args = 1..)]
    conllu: Vec<PathBuf>,
    /// domain, relation, or all
    #[arg(long, default_value = "domain")]
    group_by: String,
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
    /// Count a label once per path instead of once per edge.
    #[arg(long)]
    once_per_path: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct DatasetArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    /// CoNLL-U file or directory, optionally as DOMAIN=PATH. A directory is one
    /// domain named after it; a bare file takes domains from `# domain =`
    /// comments, falling back to the file stem.
    #[arg(long, required = true, num_args = 1..)]
    conllu: Vec<String>,
    /// Comma-separated relation whitelist.
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<String>>,
    #[arg(long)]
    max_per_sentence: Option<usize>,
    #[arg(long)]
    per_domain: Option<usize>,
    #[arg(long)]
    holdout: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Holdout instances; defaults to OUT with a `.holdout.jsonl` suffix.
    #[arg(long)]
    holdout_out: Option<PathBuf>,
    /// Nested prefix sizes for a pre-training sweep.
    #[arg(long, value_delimiter = ',')]
    sweep_sizes: Option<Vec<usize>>,
    /// START:STOP:STEP, an alternative to --sweep-sizes.
    #[arg(long, conflicts_with = "sweep_sizes")]
    sweep_grid: Option<String>,
    /// Manifest directory; defaults to `manifest` next to OUT.
    #[arg(long)]
    manifest_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Precision {
    F32,
    F64,
}

#[derive(Args, Debug, Serialize)]
struct HyperArgs {
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    vocab_cap: Option<usize>,
    #[arg(long)]
    lr_pretrain: Option<f64>,
    #[arg(long)]
    lr_finetune: Option<f64>,
    #[arg(long)]
    batch_pretrain: Option<usize>,
    #[arg(long)]
    batch_finetune: Option<usize>,
    #[arg(long)]
    epochs_pretrain: Option<usize>,
    #[arg(long)]
    epochs_finetune: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    max_instances: Option<usize>,
    /// exclude-no-relation, all-classes, or gold-present
    #[arg(long)]
    averaging: Option<String>,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
}

#[derive(Args, Debug, Serialize)]
struct FinetuneFiles {
    /// Silver holdout used to select the pre-training epoch.
    #[arg(long)]
    pretrain_dev: Option<PathBuf>,
    #[arg(long, required = true, num_args = 1..)]
    train: Vec<PathBuf>,
    #[arg(long, num_args = 1..)]
    dev: Vec<PathBuf>,
    #[arg(long, required = true, num_args = 1..)]
    test: Vec<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct TrainArgs {
    /// Silver pre-training instances; omit for the baseline.
    #[arg(long)]
    pretrain: Option<PathBuf>,
    #[command(flatten)]
    files: FinetuneFiles,
    #[command(flatten)]
    hyper: HyperArgs,
    #[arg(long)]
    report: PathBuf,
    /// Per-seed score table; defaults to REPORT with a `.tsv` extension.
    #[arg(long)]
    tsv: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    files: FinetuneFiles,
    #[command(flatten)]
    hyper: HyperArgs,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    tsv: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    pretrain: Option<usize>,
    #[arg(long)]
    train: Option<usize>,
    #[arg(long)]
    test: Option<usize>,
}

/// Reproduction record written next to every output.
#[derive(Serialize)]
struct RunEcho<'a, A: Serialize, C: Serialize> {
    tool_version: &'static str,
    command: &'a str,
    seed: Option<u64>,
    args: &'a A,
    resolved: &'a C,
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

fn write_echo<A: Serialize, C: Serialize>(cli: &Cli, command: &str, out: &Path, args: &A, resolved: &C) -> Result<()> {
    let echo = RunEcho {
        tool_version: env!("CARGO_PKG_VERSION"),
        command,
        seed: cli.seed,
        args,
        resolved,
    };
    let path = sidecar(out, ".run.json");
    fs::write(&path, serde_json::to_string_pretty(&echo)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// The config file's section for `command`, or the whole object.
fn config_section(cli: &Cli, command: &str) -> Result<Option<Value>> {
    let Some(path) = &cli.config else { return Ok(None) };
    let text = read(path)?;
    let value: Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => return usage(format!("config {}: {e}", path.display())),
    };
    Ok(Some(value.get(command).cloned().unwrap_or(value)))
}

fn from_config<T: serde::de::DeserializeOwned + Default>(cli: &Cli, command: &str) -> Result<T> {
    match config_section(cli, command)? {
        None => Ok(T::default()),
        Some(v) => match serde_json::from_value(v) {
            Ok(c) => Ok(c),
            Err(e) => usage(format!("config: {e}")),
        },
    }
}

fn cmd_validate(args: &ValidateArgs) -> Result<u8> {
    let mut problems = 0;
    let mut sentences = 0;
    for path in &args.input {
        let outcome = parse_conllu_with_domain(&read(path)?, "unknown");
        sentences += outcome.sentences.len();
        for e in &outcome.errors {
            println!("{}:{}\t{}\t{}\t{}", path.display(), e.line, e.sent_id, e.kind, e.detail);
            problems += 1;
        }
    }
    info!("{sentences} valid sentences, {problems} problems");
    Ok(if problems == 0 { 0 } else { 2 })
}

fn parse_strict(path: &Path, default_domain: &str) -> Result<Vec<ParsedSentence>> {
    let outcome = parse_conllu_with_domain(&read(path)?, default_domain);
    if let Some(e) = outcome.errors.first() {
        bail!("{}:{}: {} ({} problems in file)", path.display(), e.line, e, outcome.errors.len());
    }
    Ok(outcome.sentences)
}

fn cmd_conj(args: &ConjArgs) -> Result<u8> {
    let sentences = parse_strict(&args.input, "unknown")?;
    let rewritten = sentences
        .iter()
        .map(propagate_conj)
        .collect::<Result<Vec<_>, _>>()?;
    emit(args.output.as_deref(), &serialize_conllu(&rewritten))?;
    Ok(0)
}

fn load_records(args: &CorpusArgs) -> Result<Vec<CorpusRecord>> {
    let adapter = match (args.adapter, &args.mapping) {
        (AdapterName::Canonical, None) => Adapter::Canonical,
        (AdapterName::Canonical, Some(_)) => return usage("--mapping only applies to --adapter crossre"),
        (AdapterName::Crossre, None) => Adapter::from_name("crossre")?,
        (AdapterName::Crossre, Some(m)) => {
            let mapping: CrossReMapping = serde_json::from_str(&read(m)?).with_context(|| format!("mapping {}", m.display()))?;
            Adapter::CrossRe(mapping)
        }
    };
    let records = if args.corpus.is_dir() {
        load_corpus_dir(&args.corpus, &adapter)?
    } else {
        load_corpus(&args.corpus, &adapter)?
    };
    Ok(records)
}

fn cmd_path_stats(cli: &Cli, args: &PathStatsArgs, lengths: bool) -> Result<u8> {
    let group_by: GroupBy = match args.group_by.parse() {
        Ok(g) => g,
        Err(e) => return usage(e),
    };
    let records = load_records(&args.corpus)?;
    let mut parses = Vec::new();
    for p in &args.conllu {
        for s in parse_strict(p, "unknown")? {
            parses.push(propagate_conj(&s)?);
        }
    }
    let aligned = align(records, parses)?;
    let table = if lengths {
        length_histogram(&aligned, group_by)?
    } else {
        let counting = LabelCounting {
            multiplicity: !args.once_per_path,
        };
        label_distribution(&aligned, group_by, counting)?
    };
    let text = match args.format {
        Format::Tsv => table.to_tsv(),
        Format::Json => serde_json::to_string_pretty(&table)? + "\n",
    };
    emit(args.output.as_deref(), &text)?;
    if let Some(out) = &args.output {
        let command = if lengths { "stats lengths" } else { "stats labels" };
        write_echo(cli, command, out, args, &table.total_pairs)?;
    }
    Ok(0)
}

fn cmd_dataset(cli: &Cli, args: &DatasetArgs) -> Result<u8> {
    let stats = dataset_stats(&load_records(&args.corpus)?);
    let text = match args.format {
        Format::Tsv => stats.to_tsv(),
        Format::Json => serde_json::to_string_pretty(&stats.to_json())? + "\n",
    };
    emit(args.output.as_deref(), &text)?;
    if let Some(out) = &args.output {
        write_echo(cli, "stats dataset", out, args, &stats.total())?;
    }
    Ok(0)
}

fn conllu_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "conllu"));
    files.sort();
    Ok(files)
}

fn build_pool(specs: &[String]) -> Result<SentencePool> {
    let mut pool = SentencePool::new();
    for spec in specs {
        let (forced, path) = match spec.split_once('=') {
            Some((d, p)) if !d.is_empty() && !Path::new(spec).exists() => (Some(d.to_owned()), PathBuf::from(p)),
            _ => (None, PathBuf::from(spec)),
        };
        let dir_domain = path.is_dir().then(|| {
            path.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "unknown".to_owned())
        });
        let domain = forced.or(dir_domain);
        let files = if path.is_dir() { conllu_files(&path)? } else { vec![path.clone()] };
        for f in files {
            let name = f.file_name().unwrap_or_default().to_string_lossy().into_owned();
            let stem = f.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let label = match &domain {
                Some(d) => format!("{d}/{name}"),
                None => name,
            };
            for mut s in parse_strict(&f, domain.as_deref().unwrap_or(&stem))? {
                if let Some(d) = &domain {
                    s.domain = d.clone();
                }
                pool.entry(s.domain.clone()).or_default().push(PoolSentence {
                    file: label.clone(),
                    sentence: s,
                });
            }
        }
    }
    Ok(pool)
}

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Result<u8> {
    let mut cfg: GenConfig = from_config(cli, "gen")?;
    if let Some(l) = &args.labels {
        cfg.labels = l.iter().map(|s| s.trim().to_lowercase()).filter(|s| !s.is_empty()).collect();
    }
    if let Some(n) = args.max_per_sentence {
        cfg.max_per_sentence = n;
    }
    if let Some(n) = args.per_domain {
        cfg.per_domain = n;
    }
    if let Some(n) = args.holdout {
        cfg.holdout = n;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cfg.labels.is_empty() {
        return usage("--labels is empty");
    }
    let sizes = match (&args.sweep_sizes, &args.sweep_grid) {
        (Some(s), _) => Some(s.clone()),
        (None, Some(g)) => {
            let parts: Vec<usize> = g.split(':').map(str::parse).collect::<Result<_, _>>().or_else(|_| usage("--sweep-grid expects START:STOP:STEP"))?;
            match parts[..] {
                [a, b, step] if step > 0 && a <= b => Some(sweep_grid(a, b, step)),
                _ => return usage("--sweep-grid expects START:STOP:STEP with STEP > 0"),
            }
        }
        (None, None) => None,
    };
    if let Some(s) = &sizes {
        if s.windows(2).any(|w| w[0] > w[1]) {
            return usage("sweep sizes must be ascending");
        }
    }

    let pool = build_pool(&args.conllu)?;
    info!("pool: {:?}", pool.iter().map(|(d, s)| (d, s.len())).collect::<BTreeMap<_, _>>());
    let out = generate(&pool, &cfg)?;
    fs::write(&args.out, write_instances(&out.train)).with_context(|| format!("writing {}", args.out.display()))?;
    let holdout_path = args
        .holdout_out
        .clone()
        .unwrap_or_else(|| args.out.with_extension("holdout.jsonl"));
    fs::write(&holdout_path, write_instances(&out.holdout))?;
    let mut manifest = None;
    if let Some(sizes) = &sizes {
        let dir = args
            .manifest_dir
            .clone()
            .unwrap_or_else(|| args.out.parent().unwrap_or(Path::new(".")).join("manifest"));
        manifest = Some(build_manifest(&out.train, sizes, cfg.seed, &dir)?);
    }
    #[derive(Serialize)]
    struct GenEcho<'a> {
        config: &'a GenConfig,
        summary: &'a BTreeMap<String, sdpforge::silver::DomainSummary>,
        holdout_out: &'a Path,
        manifest: Option<Manifest>,
    }
    let resolved = GenEcho {
        config: &cfg,
        summary: &out.summary,
        holdout_out: &holdout_path,
        manifest,
    };
    write_echo(cli, "gen", &args.out, args, &resolved)?;
    info!("{} instances, {} holdout", out.train.len(), out.holdout.len());
    Ok(0)
}

fn resolve_train_config(cli: &Cli, command: &str, h: &HyperArgs) -> Result<TrainConfig> {
    let mut cfg: TrainConfig = from_config(cli, command)?;
    macro_rules! take {
        ($($f:ident),*) => { $( if let Some(v) = h.$f { cfg.$f = v; } )* };
    }
    take!(dim, hidden, vocab_cap, lr_pretrain, lr_finetune, batch_pretrain, batch_finetune, epochs_pretrain, epochs_finetune, patience);
    if let Some(m) = h.max_instances {
        cfg.max_instances = Some(m);
    }
    if let Some(a) = &h.averaging {
        cfg.averaging = match a.parse::<Averaging>() {
            Ok(a) => a,
            Err(e) => return usage(e),
        };
    }
    match (&h.seeds, cli.seed) {
        (Some(s), _) => cfg.seeds = s.clone(),
        (None, Some(s)) => cfg.seeds = vec![s],
        (None, None) => {}
    }
    if let Err(e) = cfg.validate() {
        return usage(e.to_string());
    }
    Ok(cfg)
}

fn read_records(paths: &[PathBuf]) -> Result<Vec<InstanceRecord>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(read_instances(&read(p)?).with_context(|| format!("{}", p.display()))?);
    }
    Ok(out)
}

fn finetune_data(files: &FinetuneFiles, pretrain: Vec<InstanceRecord>) -> Result<ProtocolData> {
    let pretrain_dev = match &files.pretrain_dev {
        Some(p) => read_records(std::slice::from_ref(p))?,
        None => Vec::new(),
    };
    Ok(ProtocolData::from_splits(
        pretrain,
        pretrain_dev,
        read_records(&files.train)?,
        read_records(&files.dev)?,
        read_records(&files.test)?,
    ))
}

fn cmd_train(cli: &Cli, args: &TrainArgs) -> Result<u8> {
    let cfg = resolve_train_config(cli, "train", &args.hyper)?;
    let pretrain = match &args.pretrain {
        Some(p) => read_records(std::slice::from_ref(p))?,
        None => Vec::new(),
    };
    let data = finetune_data(&args.files, pretrain)?;
    let report = match args.hyper.precision {
        Precision::F64 => run_protocol::<f64>(&data, &cfg)?,
        Precision::F32 => run_protocol::<f32>(&data, &cfg)?,
    };
    fs::write(&args.report, report.to_json()).with_context(|| format!("writing {}", args.report.display()))?;
    let tsv = args.tsv.clone().unwrap_or_else(|| args.report.with_extension("tsv"));
    fs::write(&tsv, report.to_tsv())?;
    write_echo(cli, "train", &args.report, args, &cfg)?;
    info!("mean Macro-F1 {:.4}", report.mean_macro_f1);
    Ok(0)
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<u8> {
    let cfg = resolve_train_config(cli, "sweep", &args.hyper)?;
    let (manifest, base) = Manifest::load(&args.manifest).with_context(|| format!("manifest {}", args.manifest.display()))?;
    let mut sets = Vec::new();
    for e in &manifest.entries {
        let records = read_records(&[base.join(&e.file)])?;
        if records.len() != e.instances {
            bail!("{}: manifest says {} instances, file has {}", e.file, e.instances, records.len());
        }
        sets.push(records);
    }
    let data = finetune_data(&args.files, Vec::new())?;
    let (curve, _) = match args.hyper.precision {
        Precision::F64 => sweep::<f64>(&sets, &data, &cfg)?,
        Precision::F32 => sweep::<f32>(&sets, &data, &cfg)?,
    };
    fs::write(&args.report, curve.to_json())?;
    let tsv = args.tsv.clone().unwrap_or_else(|| args.report.with_extension("tsv"));
    fs::write(&tsv, curve.to_tsv())?;
    write_echo(cli, "sweep", &args.report, args, &cfg)?;
    Ok(0)
}

fn cmd_synth(cli: &Cli, args: &SynthArgs) -> Result<u8> {
    let mut cfg: SyntheticConfig = from_config(cli, "synth")?;
    if let Some(n) = args.pretrain {
        cfg.pretrain = n;
    }
    if let Some(n) = args.train {
        cfg.train = n;
    }
    if let Some(n) = args.test {
        cfg.test = n;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let data = synthetic::generate(&cfg);
    let dir = &args.out_dir;
    fs::create_dir_all(dir)?;
    let split = &data.finetune[synthetic::SYNTHETIC_DOMAIN];
    for (name, recs) in [
        ("pretrain.jsonl", &data.pretrain),
        ("pretrain-dev.jsonl", &data.pretrain_dev),
        ("train.jsonl", &split.train),
        ("dev.jsonl", &split.dev),
        ("test.jsonl", &split.test),
    ] {
        fs::write(dir.join(name), write_instances(recs))?;
    }
    let train_cfg = serde_json::to_string_pretty(&synthetic::train_config())? + "\n";
    fs::write(dir.join("train-config.json"), train_cfg)?;
    write_echo(cli, "synth", &dir.join("synthetic"), args, &cfg)?;
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::ConjRewrite(a) => cmd_conj(a),
        Command::Stats { table } => match table {
            StatsCommand::Labels(a) => cmd_path_stats(cli, a, false),
            StatsCommand::Lengths(a) => cmd_path_stats(cli, a, true),
            StatsCommand::Dataset(a) => cmd_dataset(cli, a),
        },
        Command::Gen(a) => cmd_gen(cli, a),
        Command::Train(a) => cmd_train(cli, a),
        Command::Sweep(a) => cmd_sweep(cli, a),
        Command::Synth(a) => cmd_synth(cli, a),
    }
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("SDPFORGE_THREADS") else { return Ok(()) };
    let n: usize = match v.parse() {
        Ok(n) if n > 0 => n,
        _ => return usage(format!("SDPFORGE_THREADS must be a positive integer, got {v:?}")),
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    env_logger::Builder::new().filter_level(cli.log_level).init();
    let result = init_threads().and_then(|()| run(&cli));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.downcast_ref::<UsageError>().is_some() { 1 } else { 2 })
        }
    }
}
