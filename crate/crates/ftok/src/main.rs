use std::fmt;
use std::io::{self, BufRead, BufWriter, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use ftok::core::cluster::{agglomerate, similarity_matrix, symbol_vectors, Similarity};
use ftok::core::eval::{evaluate, evaluate_spaceless, lexicon_hits, EvalResult, TokenBag};
use ftok::core::text::strip_spaces;
use ftok::core::tokenize::{DelimiterTokenizer, FreedomTokenizer, LexiconTokenizer, Pretokenized, SortMode};
use ftok::core::{Lexicon, MetricPair, Mode, NGramModel, Tokenizer, TokenizerConfig};
use ftok::{corpus, grid, model_io, reference};

/// Errors caused by invalid invocations rather than by data; they exit with status 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

#[derive(Parser, Debug)]
#[command(name = "ftok", version, about = "Unsupervised tokenization from N-gram transition statistics")]
struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a model on text corpora.
    Train(TrainArgs),
    /// Prune low-frequency grams and transitions from a model.
    Compress(CompressArgs),
    /// Tokenize lines with a model.
    Tokenize(TokenizeArgs),
    /// Score a tokenizer against a reference.
    Evaluate(EvaluateArgs),
    /// Run a hyperparameter grid search.
    Grid(GridArgs),
    /// Cluster symbols by their transition vectors.
    Cluster(ClusterArgs),
}

#[derive(clap::Args, Debug)]
struct TrainArgs {
    /// Corpus files, read line by line (`.gz` allowed).
    #[arg(long, num_args = 1.., required = true)]
    corpus: Vec<PathBuf>,
    /// Highest gram length counted.
    #[arg(long, default_value_t = 7, value_parser = clap::value_parser!(u64).range(1..))]
    max_n: u64,
    /// `chars` steps one character; `grams` steps a whole gram.
    #[arg(long, default_value = "chars", value_parser = parse_mode)]
    mode: Mode,
    /// Treat each line as a JSON object and train on these fields.
    #[arg(long, value_delimiter = ',')]
    json_fields: Vec<String>,
    /// Model file; `.gz` compresses it.
    #[arg(long)]
    out: PathBuf,
    /// Number of models trained in parallel and merged at the end.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    shards: u64,
    /// Abort when the estimated model size exceeds this many GiB.
    #[arg(long)]
    max_mem_gb: Option<f64>,
}

#[derive(clap::Args, Debug)]
struct CompressArgs {
    /// Model file to compress.
    #[arg(long)]
    model: PathBuf,
    /// Drop counts below this fraction of the largest count in their rank or transition map, in [0, 1].
    #[arg(long, value_parser = parse_unit_interval)]
    threshold: f64,
    /// Compressed model file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args, Debug, Clone)]
struct FreedomArgs {
    /// Backward and forward metric mnemonics.
    #[arg(long, default_value = "dvf-,dvf+", value_parser = parse_metrics)]
    metrics: MetricPair,
    /// Rank set, e.g. `1` or `1+2`.
    #[arg(long, default_value = "1", value_parser = parse_n_set)]
    n: RankSet,
    /// Cut where the gap score is strictly above this value.
    #[arg(long, default_value_t = 0.4, value_parser = parse_non_negative)]
    threshold: f64,
    /// Model compression applied before tokenizing.
    #[arg(long, default_value_t = 0.0, value_parser = parse_unit_interval)]
    compression: f64,
}

impl FreedomArgs {
    fn config(&self) -> anyhow::Result<TokenizerConfig> {
        TokenizerConfig::new(self.metrics, self.n.clone(), self.threshold, self.compression)
            .map_err(|e| usage(e.to_string()))
    }
}

#[derive(clap::Args, Debug)]
struct TokenizeArgs {
    /// Model file.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    freedom: FreedomArgs,
    /// Remove all whitespace from each line first.
    #[arg(long)]
    strip_spaces: bool,
    /// Input file (default: standard input).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Separate tokens with `|` and show spaces as `␣`.
    #[arg(long)]
    pretty: bool,
}

#[derive(Clone, Debug, PartialEq)]
enum TokenizerSpec {
    Freedom,
    Delimiter,
    Lexicon(PathBuf),
    File(PathBuf),
}

impl FromStr for TokenizerSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            _ if s == "freedom" => Ok(TokenizerSpec::Freedom),
            _ if s == "delimiter" => Ok(TokenizerSpec::Delimiter),
            Some(("lexicon", p)) if !p.is_empty() => Ok(TokenizerSpec::Lexicon(p.into())),
            Some(("file", p)) if !p.is_empty() => Ok(TokenizerSpec::File(p.into())),
            _ => Err(format!(
                "unknown tokenizer {s:?}; expected freedom, delimiter, lexicon:<path> or file:<path>"
            )),
        }
    }
}

#[derive(clap::Args, Debug)]
struct TestSetArgs {
    /// Test corpus: a TSV with a header row when --column is given, plain lines otherwise.
    #[arg(long)]
    test: PathBuf,
    /// TSV column holding the test texts.
    #[arg(long)]
    column: Option<String>,
    /// Reference tokenizer: `delimiter`, `freedom`, `lexicon:<file>` or `file:<file>`.
    #[arg(long, default_value = "delimiter")]
    reference: TokenizerSpec,
    /// Greedy key of lexicon tokenizers.
    #[arg(long, default_value = "length", value_parser = parse_sortmode)]
    sortmode: SortMode,
    /// Match lexicon entries case-sensitively.
    #[arg(long)]
    cased: bool,
}

#[derive(clap::Args, Debug)]
struct EvaluateArgs {
    /// Model for the freedom tokenizer.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    test: TestSetArgs,
    /// Tokenizer under test, same forms as --reference.
    #[arg(long, default_value = "freedom")]
    candidate: TokenizerSpec,
    #[command(flatten)]
    freedom: FreedomArgs,
    /// Also report the share of candidate tokens found in this lexicon.
    #[arg(long)]
    lexicon_precision: Option<PathBuf>,
    /// Strip whitespace from the candidate's input; the reference still sees the original text.
    #[arg(long)]
    strip_spaces: bool,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Split {
    All,
    Half1,
    Half2,
}

#[derive(clap::Args, Debug)]
struct GridArgs {
    /// Model file.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    test: TestSetArgs,
    /// Grid file with metrics=, n_sets=, compressions= and thresholds= lines.
    #[arg(long)]
    grid: PathBuf,
    /// Output directory for grid.csv, heatmaps and summary.txt.
    #[arg(long)]
    out: PathBuf,
    /// Evaluate on the whole test set or one half of it.
    #[arg(long, value_enum, default_value_t = Split::All)]
    split: Split,
    /// Compress each level from the previous level instead of from the original model.
    #[arg(long)]
    cumulative_compression: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SimilarityArg {
    Cosine,
    Jaccard,
}

#[derive(clap::Args, Debug)]
struct ClusterArgs {
    /// Model file.
    #[arg(long)]
    model: PathBuf,
    /// Similarity of transition vectors.
    #[arg(long, value_enum, default_value_t = SimilarityArg::Jaccard)]
    similarity: SimilarityArg,
    /// Ignore symbols seen fewer times than this.
    #[arg(long, default_value_t = 2)]
    min_count: u64,
    /// Newick output file.
    #[arg(long)]
    out: PathBuf,
    /// Also write the pairwise similarity matrix as TSV.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

/// Alias so that clap treats the rank set as one value rather than a repeated flag.
type RankSet = Vec<usize>;

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: ftok::core::Error| e.to_string())
}

fn parse_metrics(s: &str) -> Result<MetricPair, String> {
    s.parse().map_err(|e: ftok::core::Error| e.to_string())
}

fn parse_sortmode(s: &str) -> Result<SortMode, String> {
    s.parse().map_err(|e: ftok::core::Error| e.to_string())
}

fn parse_n_set(s: &str) -> Result<Vec<usize>, String> {
    let set = grid::parse_n_set(&s.replace(',', "+"))?;
    if set.contains(&0) {
        return Err("ranks start at 1".into());
    }
    Ok(set)
}

fn parse_unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("invalid number {s:?}"))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(format!("{v} is outside [0, 1]"));
    }
    Ok(v)
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("invalid number {s:?}"))?;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(format!("{v} must be a non-negative number"));
    }
    Ok(v)
}

/// Records the effective arguments next to an output.
fn write_sidecar(out: &Path, args: &impl fmt::Debug) -> anyhow::Result<()> {
    let mut name = out.as_os_str().to_owned();
    name.push(".config");
    grid::write_text(PathBuf::from(name), &format!("{args:#?}\n"))?;
    Ok(())
}

fn load_model(path: &Path) -> anyhow::Result<NGramModel> {
    log::info!("loading model {}", path.display());
    Ok(model_io::load(path)?)
}

fn cmd_train(args: &TrainArgs) -> anyhow::Result<()> {
    const BATCH: usize = 1 << 14;
    let max_n = args.max_n as usize;
    let shards = args.shards as usize;
    let limit = args.max_mem_gb.map(|gb| (gb * (1u64 << 30) as f64) as u64);
    let mut models = vec![NGramModel::new(args.mode, max_n)?; shards];
    let mut malformed = 0usize;
    let mut batch: Vec<String> = Vec::with_capacity(BATCH);

    let flush = |batch: &mut Vec<String>, models: &mut Vec<NGramModel>| -> anyhow::Result<()> {
        let chunk = batch.len().div_ceil(shards).max(1);
        models.par_iter_mut().zip(batch.par_chunks(chunk)).for_each(|(m, lines)| m.train(lines));
        batch.clear();
        if let Some(limit) = limit {
            let used: u64 = models.iter().map(NGramModel::estimated_bytes).sum();
            if used > limit {
                bail!(
                    "estimated model size {:.2} GiB exceeds --max-mem-gb {}; use a smaller --max-n or a smaller corpus",
                    used as f64 / (1u64 << 30) as f64,
                    args.max_mem_gb.unwrap_or_default()
                );
            }
        }
        Ok(())
    };

    for path in &args.corpus {
        log::info!("training on {}", path.display());
        for line in corpus::read_lines(path)? {
            let line = line?;
            if args.json_fields.is_empty() {
                batch.push(line);
            } else {
                match corpus::extract_fields(&line, &args.json_fields) {
                    Some(values) => batch.extend(values),
                    None => malformed += 1,
                }
            }
            if batch.len() >= BATCH {
                flush(&mut batch, &mut models)?;
            }
        }
    }
    flush(&mut batch, &mut models)?;
    if malformed > 0 {
        log::warn!("skipped {malformed} malformed JSON lines");
    }

    let mut model = models.swap_remove(0);
    for other in &models {
        model.merge(other)?;
    }
    model_io::save(&model, &args.out)?;
    write_sidecar(&args.out, args)?;
    println!("params: {}", model.count_params());
    Ok(())
}

fn cmd_compress(args: &CompressArgs) -> anyhow::Result<()> {
    let model = load_model(&args.model)?;
    let compressed = model.compress(args.threshold)?;
    model_io::save(&compressed, &args.out)?;
    write_sidecar(&args.out, args)?;
    println!("params before: {}", model.count_params());
    println!("params after: {}", compressed.count_params());
    Ok(())
}

fn cmd_tokenize(args: &TokenizeArgs) -> anyhow::Result<()> {
    let config = args.freedom.config()?;
    let model = load_model(&args.model)?;
    let tokenizer = FreedomTokenizer::new(&model, config)?;
    let input: Box<dyn BufRead> = match &args.input {
        Some(path) => Box::new(io::BufReader::new(
            std::fs::File::open(path).with_context(|| format!("{}", path.display()))?,
        )),
        None => Box::new(io::stdin().lock()),
    };
    let out: Box<dyn Write> = match &args.out {
        Some(path) => {
            write_sidecar(path, args)?;
            Box::new(std::fs::File::create(path).with_context(|| format!("{}", path.display()))?)
        }
        None => Box::new(io::stdout().lock()),
    };
    let mut out = BufWriter::new(out);
    for line in input.split(b'\n') {
        let mut bytes = line.context("reading input")?;
        if bytes.last() == Some(&b'\r') {
            bytes.pop();
        }
        let mut line = String::from_utf8_lossy(&bytes).into_owned();
        if args.strip_spaces {
            line = strip_spaces(&line);
        }
        let tokens = tokenizer.tokenize(&line);
        writeln!(out, "{}", reference::format_tokens(&tokens, args.pretty))?;
    }
    out.flush()?;
    Ok(())
}

fn read_test_lines(args: &TestSetArgs) -> anyhow::Result<Vec<String>> {
    let lines = match &args.column {
        Some(column) => corpus::read_parallel_tsv(&args.test, column)?,
        None => corpus::read_all_lines(&args.test)?,
    };
    Ok(lines)
}

fn read_lexicon_with_delimiters(path: &Path) -> anyhow::Result<Lexicon> {
    let mut lexicon = corpus::read_lexicon(path)?;
    if lexicon.is_empty() {
        bail!("{}: lexicon is empty", path.display());
    }
    lexicon.add_delimiters();
    Ok(lexicon)
}

/// Builds a tokenizer for the lines in `range` of the test set; `lines` are
/// the texts the tokenizer will actually see.
fn build_tokenizer<'m>(
    spec: &TokenizerSpec,
    test: &TestSetArgs,
    model: Option<&'m NGramModel>,
    freedom: Option<&FreedomArgs>,
    lines: &[String],
    range: Range<usize>,
) -> anyhow::Result<Box<dyn Tokenizer + 'm>> {
    Ok(match spec {
        TokenizerSpec::Delimiter => Box::new(DelimiterTokenizer),
        TokenizerSpec::Lexicon(path) => {
            Box::new(LexiconTokenizer::new(read_lexicon_with_delimiters(path)?, test.sortmode, test.cased))
        }
        TokenizerSpec::File(path) => {
            let records = reference::read_reference_file(path)?;
            if records.len() < range.end {
                return Err(ftok::core::Error::CoverageMismatch { line: records.len() + 1 })
                    .with_context(|| format!("{}", path.display()));
            }
            let records = records[range].to_vec();
            Box::new(Pretokenized::new(records, lines).with_context(|| format!("{}", path.display()))?)
        }
        TokenizerSpec::Freedom => {
            let (Some(model), Some(freedom)) = (model, freedom) else {
                return Err(usage("the freedom tokenizer needs --model"));
            };
            Box::new(FreedomTokenizer::new(model, freedom.config()?)?)
        }
    })
}

fn format_report(result: &EvalResult, lexicon: Option<(&Lexicon, &TokenBag)>) -> anyhow::Result<String> {
    let mut out = String::from("text\tprecision\trecall\tf1\n");
    for (i, prf) in result.per_text.iter().enumerate() {
        out.push_str(&format!("{}\t{:.6}\t{:.6}\t{:.6}\n", i + 1, prf.precision, prf.recall, prf.f1));
    }
    out.push_str(&format!("mean_f1\t{:.6}\n", result.mean_f1));
    if let Some((lexicon, actual)) = lexicon {
        let hits = lexicon_hits(actual, lexicon)?;
        out.push_str(&format!("lexicon_relevant\t{}\n", hits.relevant));
        out.push_str(&format!("lexicon_irrelevant\t{}\n", hits.irrelevant));
        out.push_str(&format!("lexicon_precision\t{:.6}\n", hits.precision()));
    }
    Ok(out)
}

fn cmd_evaluate(args: &EvaluateArgs) -> anyhow::Result<()> {
    let texts = read_test_lines(&args.test)?;
    let model = args.model.as_deref().map(load_model).transpose()?;
    let all = 0..texts.len();
    let reference = build_tokenizer(&args.test.reference, &args.test, model.as_ref(), Some(&args.freedom), &texts, all.clone())?;
    let result = if args.strip_spaces {
        let stripped: Vec<String> = texts.iter().map(|t| strip_spaces(t)).collect();
        let candidate =
            build_tokenizer(&args.candidate, &args.test, model.as_ref(), Some(&args.freedom), &stripped, all)?;
        evaluate_spaceless(&texts, &*reference, &*candidate)
    } else {
        let candidate = build_tokenizer(&args.candidate, &args.test, model.as_ref(), Some(&args.freedom), &texts, all)?;
        evaluate(&texts, &*reference, &*candidate)
    };
    let lexicon = args.lexicon_precision.as_deref().map(read_lexicon_with_delimiters).transpose()?;
    let report = format_report(&result, lexicon.as_ref().map(|l| (l, &result.actual_tokens)))?;
    print!("{report}");
    if let Some(out) = &args.out {
        grid::write_text(out, &report)?;
        write_sidecar(out, args)?;
    }
    Ok(())
}

fn cmd_grid(args: &GridArgs) -> anyhow::Result<()> {
    let spec = grid::read_grid(&args.grid).map_err(|e| usage(e.to_string()))?;
    let texts = read_test_lines(&args.test)?;
    let half = texts.len() / 2;
    let range = match args.split {
        Split::All => 0..texts.len(),
        Split::Half1 => 0..half,
        Split::Half2 => half..texts.len(),
    };
    let texts = texts[range.clone()].to_vec();
    let model = load_model(&args.model)?;
    let reference = build_tokenizer(&args.test.reference, &args.test, Some(&model), None, &texts, range)?;
    log::info!("evaluating {} cells on {} texts", spec.cell_count(), texts.len());
    let report = grid::par_grid_search(&model, &texts, &*reference, &spec, args.cumulative_compression)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("{}", args.out.display()))?;
    grid::write_grid_csv(&report, args.out.join("grid.csv"))?;
    grid::write_heatmaps(&report, &spec, &args.out)?;
    let summary = grid::summary(&report, &spec);
    grid::write_text(args.out.join("summary.txt"), &summary)?;
    write_sidecar(&args.out, args)?;
    print!("{summary}");
    Ok(())
}

fn cmd_cluster(args: &ClusterArgs) -> anyhow::Result<()> {
    let model = load_model(&args.model)?;
    let similarity = match args.similarity {
        SimilarityArg::Cosine => Similarity::Cosine,
        SimilarityArg::Jaccard => Similarity::Jaccard,
    };
    let vectors = symbol_vectors(&model, args.min_count)?;
    let tree = agglomerate(&vectors, similarity)?;
    grid::write_text(&args.out, &format!("{}\n", tree.to_newick()))?;
    if let Some(path) = &args.matrix {
        let matrix = similarity_matrix(&vectors, similarity)?;
        let mut text = String::from("symbol_a\tsymbol_b\tsimilarity\n");
        for (i, row) in matrix.iter().enumerate() {
            for (j, s) in row.iter().enumerate() {
                let (a, b) = (vectors[i].symbol, vectors[j].symbol);
                text.push_str(&format!("{}\t{}\t{s}\n", model_io::escape(&a.to_string()), model_io::escape(&b.to_string())));
            }
        }
        grid::write_text(path, &text)?;
    }
    write_sidecar(&args.out, args)?;
    println!("{} leaves", tree.leaves().len());
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Compress(a) => cmd_compress(a),
        Command::Tokenize(a) => cmd_tokenize(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Cluster(a) => cmd_cluster(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
