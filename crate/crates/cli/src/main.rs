mod manifest;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use speqwl::bench::time_refinement;
use speqwl::kernel::{feature_maps, gram_from_features, round_histograms, write_features, write_gram};
use speqwl::{
    ab_pair, cfi_pair, cycle, cycle_pair, distinguish, load_tudataset, padded_colored_pair, write_tudataset, Algorithm,
    GramFormat, GraphCollection, Iterations, LabeledGraph, RefinementConfig,
};

use manifest::RunManifest;

/// Exit codes: 0 success (for `distinguish`: distinguished), 1 I/O or data
/// error, 2 invalid flags, 3 not distinguished.
const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NOT_DISTINGUISHED: u8 = 3;

#[derive(Parser, Serialize)]
#[command(
    name = "speqwl",
    version,
    about = "Sparse higher-order Weisfeiler-Leman refinement and graph kernels"
)]
struct Cli {
    /// Worker threads for Gram matrices (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Recorded in the run manifest; every subcommand is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Where to write the run manifest (overrides the per-subcommand default).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
enum Command {
    /// Write per-graph, per-round color histograms of a dataset.
    Refine(RefineArgs),
    /// Decide whether an algorithm separates two graphs.
    Distinguish(DistinguishArgs),
    /// Compute the kernel Gram matrix of a dataset.
    #[command(alias = "kernel")]
    Gram(GramArgs),
    /// Generate a graph family in TUDataset format.
    Family(FamilyArgs),
    /// Time preprocessing and refinement of several algorithms.
    Bench(BenchArgs),
}

#[derive(Args, Serialize, Clone)]
struct DatasetArgs {
    /// TUDataset directory.
    #[arg(long)]
    input: PathBuf,
    /// Dataset name (file prefix); defaults to the directory name.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args, Serialize, Clone)]
struct AlgorithmArgs {
    /// One of 1-wl, edge-1-wl, k-wl, k-fwl, delta-k-lwl, delta-k-lwl-plus, ks-lwl, ks-lwl-plus.
    #[arg(long, default_value = "ks-lwl", value_parser = parse_algorithm)]
    algorithm: String,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Component bound for ks-lwl variants (default 1).
    #[arg(long)]
    s: Option<usize>,
    /// Number of rounds, or `stable`.
    #[arg(long, default_value = "5", value_parser = parse_iterations)]
    iterations: String,
    /// Use the "+" counts only in the last round.
    #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
    plus_last_only: bool,
}

#[derive(Args, Serialize)]
struct RefineArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[command(flatten)]
    algorithm: AlgorithmArgs,
    /// Output directory; one `graph_<i>.hist` file per graph.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Serialize)]
struct DistinguishArgs {
    /// One dataset (graphs 0 and 1 are compared) or two (graph 0 of each).
    #[arg(required = true, num_args = 1..=2)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    algorithm: AlgorithmArgs,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Normalize {
    None,
    Cosine,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Csv,
    Libsvm,
}

#[derive(Args, Serialize)]
struct GramArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[command(flatten)]
    algorithm: AlgorithmArgs,
    #[arg(long, value_enum, default_value_t = Normalize::None)]
    normalize: Normalize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    output: PathBuf,
    /// Also write the sparse feature vectors (`id:count` per line).
    #[arg(long)]
    features: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FamilyKind {
    Cycle,
    CyclePair,
    AbPair,
    Cfi,
    PaddedCfi,
}

#[derive(Args, Serialize)]
struct FamilyArgs {
    #[arg(value_enum)]
    family: FamilyKind,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Cycle length for `cycle`.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Path length parameter for `padded-cfi` (default 3k+1).
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long)]
    output: PathBuf,
    /// Dataset name; defaults to the directory name.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args, Serialize)]
struct BenchArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Comma-separated `id[:k[:s]]` entries, e.g. `ks-lwl:2:1,delta-k-lwl:2`.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_bench_entry)]
    algorithms: Vec<String>,
    #[arg(long, default_value = "5", value_parser = parse_iterations)]
    iterations: String,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_algorithm(s: &str) -> Result<String, String> {
    Algorithm::from_id(s).map(|_| s.to_string()).ok_or_else(|| {
        let ids: Vec<&str> = Algorithm::ALL.iter().map(|a| a.id()).collect();
        format!("unknown algorithm `{s}`; expected one of {}", ids.join(", "))
    })
}

fn parse_iterations(s: &str) -> Result<String, String> {
    if s == "stable" || s.parse::<usize>().is_ok() {
        Ok(s.to_string())
    } else {
        Err(format!("expected a round count or `stable`, got `{s}`"))
    }
}

fn parse_bench_entry(s: &str) -> Result<String, String> {
    let mut parts = s.split(':');
    parse_algorithm(parts.next().unwrap_or_default())?;
    for p in parts.by_ref().take(2) {
        p.parse::<usize>().map_err(|_| format!("bad number `{p}` in `{s}`"))?;
    }
    match parts.next() {
        Some(_) => Err(format!("expected `id[:k[:s]]`, got `{s}`")),
        None => Ok(s.to_string()),
    }
}

fn iterations(s: &str) -> Iterations {
    match s {
        "stable" => Iterations::UntilStable,
        n => Iterations::Fixed(n.parse().expect("validated by the parser")),
    }
}

fn make_config(algorithm: Algorithm, k: usize, s: Option<usize>, rounds: &str) -> RefinementConfig {
    let s = s.unwrap_or(if algorithm.uses_s() { 1 } else { k });
    RefinementConfig::new(algorithm, k, s).with_iterations(iterations(rounds))
}

impl AlgorithmArgs {
    fn config(&self) -> Result<RefinementConfig, Failure> {
        let algorithm = Algorithm::from_id(&self.algorithm).expect("validated by the parser");
        let mut config = make_config(algorithm, self.k, self.s, &self.iterations);
        config.plus_counts_last_iteration_only = self.plus_last_only;
        config.validate()?;
        Ok(config)
    }
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<speqwl::error::Error> for Failure {
    fn from(e: speqwl::error::Error) -> Self {
        match e {
            speqwl::error::Error::InvalidArgument(m) => Failure::Usage(m),
            other => Failure::Io(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn io_at(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn dataset_name(dir: &Path, name: Option<&str>) -> String {
    name.map(str::to_string)
        .or_else(|| dir.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_default()
}

fn load(args: &DatasetArgs, manifest: &mut RunManifest) -> Result<GraphCollection, Failure> {
    let start = Instant::now();
    let collection = load_tudataset(&args.input, &dataset_name(&args.input, args.name.as_deref()))?;
    if collection.is_empty() {
        return Err(Failure::Io(format!("{}: dataset has no graphs", args.input.display())));
    }
    manifest.inputs.push(args.input.clone());
    manifest.time("load", start.elapsed());
    Ok(collection)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_refine(args: &RefineArgs, manifest: &mut RunManifest) -> Result<u8, Failure> {
    let config = args.algorithm.config()?;
    let collection = load(&args.dataset, manifest)?;
    let start = Instant::now();
    let (histograms, _) = round_histograms(&collection.graphs, &config)?;
    manifest.time("refinement", start.elapsed());
    let start = Instant::now();
    fs::create_dir_all(&args.output).map_err(io_at(&args.output))?;
    for (i, rounds) in histograms.iter().enumerate() {
        let path = args.output.join(format!("graph_{i}.hist"));
        let mut out = BufWriter::new(fs::File::create(&path).map_err(io_at(&path))?);
        for (round, h) in rounds.iter().enumerate() {
            for (color, count) in h {
                writeln!(out, "{round} {color} {count}").map_err(io_at(&path))?;
            }
        }
        out.flush().map_err(io_at(&path))?;
    }
    manifest.outputs.push(args.output.clone());
    manifest.time("write", start.elapsed());
    Ok(0)
}

fn first_graphs(inputs: &[PathBuf], manifest: &mut RunManifest) -> Result<(LabeledGraph, LabeledGraph), Failure> {
    let mut graphs = Vec::new();
    for input in inputs {
        let args = DatasetArgs {
            input: input.clone(),
            name: None,
        };
        let mut collection = load(&args, manifest)?;
        let take = if inputs.len() == 1 { 2 } else { 1 };
        if collection.len() < take {
            return Err(Failure::Usage(format!(
                "{} needs at least {take} graphs",
                input.display()
            )));
        }
        graphs.extend(collection.graphs.drain(..take));
    }
    let h = graphs.pop().expect("two graphs");
    Ok((graphs.pop().expect("two graphs"), h))
}

fn cmd_distinguish(args: &DistinguishArgs, manifest: &mut RunManifest) -> Result<u8, Failure> {
    let config = args.algorithm.config()?;
    let (g, h) = first_graphs(&args.inputs, manifest)?;
    let start = Instant::now();
    let result = distinguish(&g, &h, &config)?;
    manifest.time("refinement", start.elapsed());
    let round = result.round.map_or("-".to_string(), |r| r.to_string());
    println!("distinguished={} round={round}", result.distinguished);
    Ok(if result.distinguished {
        0
    } else {
        EXIT_NOT_DISTINGUISHED
    })
}

fn cmd_gram(args: &GramArgs, manifest: &mut RunManifest) -> Result<u8, Failure> {
    let config = args.algorithm.config()?;
    let collection = load(&args.dataset, manifest)?;
    let start = Instant::now();
    let maps = feature_maps(&collection.graphs, &config)?;
    manifest.time("refinement", start.elapsed());
    let start = Instant::now();
    let gram = gram_from_features(&maps.vectors, matches!(args.normalize, Normalize::Cosine));
    manifest.time("gram", start.elapsed());
    let start = Instant::now();
    let labels: Vec<String> = (0..collection.len())
        .map(|i| collection.targets.as_ref().map_or("0".to_string(), |t| t.label_text(i)))
        .collect();
    let format = match args.format {
        Format::Csv => GramFormat::Csv,
        Format::Libsvm => GramFormat::LibsvmPrecomputed,
    };
    write_gram(&gram, &args.output, format, Some(&labels))?;
    manifest.outputs.push(args.output.clone());
    if let Some(path) = &args.features {
        let mut out = BufWriter::new(fs::File::create(path).map_err(io_at(path))?);
        write_features(&maps.vectors, &mut out).map_err(io_at(path))?;
        out.flush().map_err(io_at(path))?;
        manifest.outputs.push(path.clone());
    }
    manifest.time("write", start.elapsed());
    Ok(0)
}

fn cmd_family(args: &FamilyArgs, manifest: &mut RunManifest) -> Result<u8, Failure> {
    let pair = |p: (LabeledGraph, LabeledGraph)| vec![p.0, p.1];
    let graphs = match args.family {
        FamilyKind::Cycle => vec![cycle(args.n)?],
        FamilyKind::CyclePair => pair(cycle_pair(args.k)?),
        FamilyKind::AbPair => pair(ab_pair(args.k)?),
        FamilyKind::Cfi => pair(cfi_pair(args.k)?),
        FamilyKind::PaddedCfi => pair(padded_colored_pair(args.k, args.delta.unwrap_or(3 * args.k + 1))?),
    };
    let start = Instant::now();
    let name = dataset_name(&args.output, args.name.as_deref());
    write_tudataset(&GraphCollection::new(graphs), &args.output, &name)?;
    manifest.outputs.push(args.output.clone());
    manifest.time("write", start.elapsed());
    Ok(0)
}

fn cmd_bench(args: &BenchArgs, manifest: &mut RunManifest) -> Result<u8, Failure> {
    let mut configs = Vec::new();
    for entry in &args.algorithms {
        let mut parts = entry.split(':');
        let algorithm = Algorithm::from_id(parts.next().unwrap_or_default()).expect("validated by the parser");
        let mut numbers = parts.map(|p| p.parse::<usize>().expect("validated by the parser"));
        let k = numbers.next().unwrap_or(if algorithm.is_node_level() { 1 } else { 2 });
        let config = make_config(algorithm, k, numbers.next(), &args.iterations);
        config.validate()?;
        configs.push((entry, config));
    }
    if args.repetitions == 0 {
        return Err(Failure::Usage("--repetitions must be at least 1".into()));
    }
    let collection = load(&args.dataset, manifest)?;
    let dataset = dataset_name(&args.dataset.input, args.dataset.name.as_deref());
    let mut csv = String::from("dataset,algorithm,repetitions,preprocessing_s,refinement_s,total_s\n");
    for (entry, config) in configs {
        let (mut pre, mut refine) = (0.0, 0.0);
        for _ in 0..args.repetitions {
            let t = time_refinement(&collection.graphs, &config)?;
            pre += t.preprocessing.as_secs_f64();
            refine += t.refinement.as_secs_f64();
        }
        let r = args.repetitions as f64;
        let (pre, refine) = (pre / r, refine / r);
        csv.push_str(&format!(
            "{dataset},{entry},{},{pre:.6},{refine:.6},{:.6}\n",
            args.repetitions,
            pre + refine
        ));
        manifest.time(
            &format!("{entry}/preprocessing"),
            std::time::Duration::from_secs_f64(pre),
        );
        manifest.time(
            &format!("{entry}/refinement"),
            std::time::Duration::from_secs_f64(refine),
        );
    }
    match &args.output {
        Some(path) => {
            fs::write(path, csv).map_err(io_at(path))?;
            manifest.outputs.push(path.clone());
        }
        None => print!("{csv}"),
    }
    Ok(0)
}

/// Default manifest location for a subcommand, if it has one.
fn manifest_path(command: &Command) -> Option<PathBuf> {
    match command {
        Command::Refine(a) => Some(a.output.join("manifest.json")),
        Command::Family(a) => Some(a.output.join("manifest.json")),
        Command::Gram(a) => Some(with_suffix(&a.output, ".manifest.json")),
        Command::Bench(a) => a.output.as_ref().map(|p| with_suffix(p, ".manifest.json")),
        Command::Distinguish(_) => None,
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Io(e.to_string()))?;
    }
    let (name, flags) = match &cli.command {
        Command::Refine(a) => ("refine", serde_json::to_value(a)),
        Command::Distinguish(a) => ("distinguish", serde_json::to_value(a)),
        Command::Gram(a) => ("gram", serde_json::to_value(a)),
        Command::Family(a) => ("family", serde_json::to_value(a)),
        Command::Bench(a) => ("bench", serde_json::to_value(a)),
    };
    let mut manifest = RunManifest::new(name, flags.ok(), cli.seed, rayon::current_num_threads());
    let start = Instant::now();
    let code = match &cli.command {
        Command::Refine(a) => cmd_refine(a, &mut manifest),
        Command::Distinguish(a) => cmd_distinguish(a, &mut manifest),
        Command::Gram(a) => cmd_gram(a, &mut manifest),
        Command::Family(a) => cmd_family(a, &mut manifest),
        Command::Bench(a) => cmd_bench(a, &mut manifest),
    }?;
    manifest.time("total", start.elapsed());
    if let Some(path) = cli.manifest.clone().or_else(|| manifest_path(&cli.command)) {
        manifest.write(&path).map_err(io_at(&path))?;
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            let _ = Cli::command().error(ErrorKind::ValueValidation, msg).print();
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
