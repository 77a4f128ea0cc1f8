mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::builder::TypedValueParser;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use embias::cooccur::{self, CooccurOptions, CooccurrenceMatrix, Vocabulary, Weighting};
use embias::corpus::CorpusSource;
use embias::glove::{self, Combine, TrainConfig};
use embias::report::{self, Report};
use embias::stats::{self, ContingencyTable};
use embias::vectors::WordVectors;
use embias::weat::{self, MissingPolicy, PermutationOptions, ResolveOptions, StdDev, Tail, WeatOptions, WeatResult, WordSets};
use embias::wordlists::{self, ListId};
use log::info;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "embias", version, about = "Train word embeddings on a corpus and audit them for gender bias")]
struct Cli {
    /// Read defaults from a key=value file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Count word frequencies and write the vocabulary
    Vocab(VocabArgs),
    /// Count windowed co-occurrences into a binary matrix
    Cooccur(CooccurArgs),
    /// Train GloVe vectors from a co-occurrence matrix
    Train(TrainArgs),
    /// Run bias tests for word sets read from a JSON file
    Weat(WeatArgs),
    /// Run the flowers/insects sanity check
    Validate(ValidateArgs),
    /// Run the sanity check and the four standard comparisons
    Audit(AuditArgs),
    /// Contingency table tests
    Stats {
        #[command(subcommand)]
        command: StatsCmd,
    },
    /// Inspect or export the built-in word lists
    Lists {
        #[command(subcommand)]
        command: ListsCmd,
    },
    /// Combine result files into a JSON and Markdown report
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Plain,
    Jsonl,
    Csv,
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus file (gzip is detected from the `.gz` extension)
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "plain")]
    format: InputFormat,
    /// JSON field holding the text (jsonl input)
    #[arg(long, default_value = "text")]
    text_field: String,
    /// Column holding the text (csv input)
    #[arg(long, default_value = "text")]
    text_column: String,
}

impl CorpusArgs {
    fn source(&self) -> CorpusSource {
        match self.format {
            InputFormat::Plain => CorpusSource::plain(&self.input),
            InputFormat::Jsonl => CorpusSource::jsonl(&self.input, &self.text_field),
            InputFormat::Csv => CorpusSource::csv(&self.input, &self.text_column),
        }
    }
}

#[derive(Args)]
struct VocabArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, default_value_t = cooccur::DEFAULT_MIN_COUNT, value_parser = clap::value_parser!(u64).range(1..))]
    min_count: u64,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct CooccurArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Vocabulary file written by `vocab`
    #[arg(long, value_name = "FILE")]
    vocab: PathBuf,
    #[arg(long, default_value_t = cooccur::DEFAULT_WINDOW, value_parser = clap::value_parser!(u16).range(1..).map(usize::from))]
    window: usize,
    /// `inverse` (1/k per pair at distance k) or `uniform`
    #[arg(long, default_value = "inverse")]
    weighting: Weighting,
    #[arg(long, default_value_t = embias::default_threads())]
    threads: usize,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Matrix file written by `cooccur`
    #[arg(long, value_name = "FILE")]
    cooccur: PathBuf,
    /// Vocabulary the matrix was counted with
    #[arg(long, value_name = "FILE")]
    vocab: PathBuf,
    #[arg(long, default_value_t = 200)]
    dim: usize,
    #[arg(long, default_value_t = 15)]
    epochs: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    learning_rate: f64,
    #[arg(long, default_value_t = 100.0)]
    x_max: f64,
    #[arg(long, default_value_t = 0.75)]
    alpha: f64,
    /// Single-threaded fixed-order updates; output is reproducible
    #[arg(long)]
    deterministic: bool,
    /// Write the main vectors only instead of main plus context
    #[arg(long)]
    main_only: bool,
    #[arg(long, default_value_t = embias::default_threads())]
    threads: usize,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TailArg {
    TwoSided,
    Upper,
}

#[derive(Clone, Copy, ValueEnum)]
enum StdDevArg {
    Sample,
    Population,
}

#[derive(Args)]
struct TestArgs {
    /// Embedding text file, one `word v1 ... vd` line per word
    #[arg(long, value_name = "FILE")]
    vectors: PathBuf,
    /// Random partitions drawn when exact enumeration is too large
    #[arg(long, default_value_t = weat::DEFAULT_SHUFFLES)]
    shuffles: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Enumerate every partition up to this many
    #[arg(long, default_value_t = weat::DEFAULT_EXACT_THRESHOLD)]
    exact_threshold: u64,
    #[arg(long, value_enum, default_value = "two-sided")]
    tail: TailArg,
    #[arg(long, value_enum, default_value = "sample")]
    stddev: StdDevArg,
    /// Fail on any word missing from the vectors
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value_t = embias::default_threads())]
    threads: usize,
}

impl TestArgs {
    fn options(&self) -> WeatOptions {
        WeatOptions {
            permutation: PermutationOptions {
                n_shuffles: self.shuffles,
                seed: self.seed,
                exact_threshold: self.exact_threshold,
                tail: match self.tail {
                    TailArg::TwoSided => Tail::TwoSided,
                    TailArg::Upper => Tail::Upper,
                },
            },
            stddev: match self.stddev {
                StdDevArg::Sample => StdDev::Sample,
                StdDevArg::Population => StdDev::Population,
            },
            resolve: ResolveOptions {
                policy: if self.strict {
                    MissingPolicy::Strict
                } else {
                    MissingPolicy::Lenient
                },
                ..ResolveOptions::default()
            },
        }
    }
}

#[derive(Args)]
struct WeatArgs {
    #[command(flatten)]
    test: TestArgs,
    /// Word sets JSON (one object or an array)
    #[arg(long, value_name = "FILE")]
    sets: PathBuf,
    /// Output file (single comparison only); default is standard output
    #[arg(long, value_name = "FILE", conflicts_with = "out_dir")]
    out: Option<PathBuf>,
    /// Write one `<name>.json` per comparison
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    test: TestArgs,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    test: TestArgs,
    #[arg(long, value_name = "DIR", default_value = "results")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum StatsCmd {
    /// Chi-square and G tests of independence with residuals
    Chisq {
        /// CSV with a header of column labels and one labeled row per line
        #[arg(long, value_name = "FILE")]
        table: PathBuf,
    },
}

#[derive(Subcommand)]
enum ListsCmd {
    /// Write every built-in comparison as word sets JSON
    Export {
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Print a built-in list, or the list ids when none is given
    Show { id: Option<String> },
}

#[derive(Args)]
struct ReportArgs {
    /// Result JSON files
    #[arg(long = "in", value_name = "FILE", num_args = 1.., required = true)]
    inputs: Vec<PathBuf>,
    /// Markdown output
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// JSON output; defaults to the Markdown path with a `.json` extension
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
    /// Extra metadata entry, `key=value`
    #[arg(long, value_name = "KEY=VALUE")]
    meta: Vec<String>,
}

type CliResult<T = ()> = Result<T, Failure>;

enum Failure {
    Data(String),
}

impl From<embias::Error> for Failure {
    fn from(e: embias::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn data<T>(r: io::Result<T>, path: &Path) -> CliResult<T> {
    r.map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        data(fs::create_dir_all(dir), dir)?;
    }
    data(fs::write(path, contents), path)
}

fn stdout(text: &str) -> CliResult {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn thread_pool(threads: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Failure::Data(e.to_string()))
}

fn vocab(a: &VocabArgs) -> CliResult {
    let t = Instant::now();
    let v = cooccur::build_vocab(&a.corpus.source(), a.min_count)?;
    v.save(&a.out)?;
    info!("{} words with count >= {} in {:.1?}", v.len(), a.min_count, t.elapsed());
    Ok(())
}

fn cooccur_cmd(a: &CooccurArgs) -> CliResult {
    let t = Instant::now();
    let v = Vocabulary::load(&a.vocab)?;
    let opts = CooccurOptions {
        window: a.window,
        weighting: a.weighting,
        threads: a.threads.max(1),
    };
    let m = cooccur::count_cooccurrences(&a.corpus.source(), &v, &opts)?;
    m.save(&a.out)?;
    info!("{} nonzero entries in {:.1?}", m.nnz(), t.elapsed());
    Ok(())
}

fn train(a: &TrainArgs) -> CliResult {
    let t = Instant::now();
    let v = Vocabulary::load(&a.vocab)?;
    let m = CooccurrenceMatrix::load(&a.cooccur)?;
    let cfg = TrainConfig {
        dim: a.dim,
        x_max: a.x_max,
        alpha: a.alpha,
        learning_rate: a.learning_rate,
        epochs: a.epochs,
        seed: a.seed,
        deterministic: a.deterministic,
        threads: a.threads.max(1),
    };
    let out = glove::train(&m, &cfg)?;
    let combine = if a.main_only { Combine::MainOnly } else { Combine::Sum };
    let wv = out.embeddings.to_word_vectors(&v, combine)?;
    wv.save(&a.out)?;
    if let Some(last) = out.epoch_loss.last() {
        info!("final loss {last:.6} after {} epochs, {:.1?}", out.epoch_loss.len(), t.elapsed());
    }
    Ok(())
}

fn load_vectors(path: &Path) -> CliResult<WordVectors> {
    let t = Instant::now();
    let wv = WordVectors::load(path)?;
    info!("{} vectors of dimension {} in {:.1?}", wv.len(), wv.dim(), t.elapsed());
    Ok(wv)
}

fn summary(r: &WeatResult) {
    info!(
        "{}: S = {:.4}, d = {:.3}, p = {:.4} ({} / {} words)",
        r.name,
        r.statistic,
        r.effect_size,
        r.p_value,
        r.sets.x.len(),
        r.sets.a.len() + r.sets.b.len()
    );
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn weat_cmd(a: &WeatArgs) -> CliResult {
    let sets = WordSets::load(&a.sets)?;
    let wv = load_vectors(&a.test.vectors)?;
    let opts = a.test.options();
    let pool = thread_pool(a.test.threads)?;
    let results = pool.install(|| sets.iter().map(|s| weat::run_sets(s, &wv, &opts)).collect::<Result<Vec<_>, _>>())?;
    results.iter().for_each(summary);
    if let Some(dir) = &a.out_dir {
        for r in &results {
            write_file(&dir.join(format!("{}.json", file_stem(&r.name))), &r.to_json()?)?;
        }
    } else if let Some(path) = &a.out {
        let [r] = results.as_slice() else {
            return Err(Failure::Data(format!("{} comparisons need --out-dir", results.len())));
        };
        write_file(path, &r.to_json()?)?;
    } else if let [r] = results.as_slice() {
        stdout(&r.to_json()?)?;
    } else {
        let mut text = serde_json::to_string_pretty(&results).map_err(embias::Error::from)?;
        text.push('\n');
        stdout(&text)?;
    }
    Ok(())
}

fn validate(a: &ValidateArgs) -> CliResult {
    let wv = load_vectors(&a.test.vectors)?;
    let opts = a.test.options();
    let r = thread_pool(a.test.threads)?.install(|| weat::validation_test(&wv, &opts))?;
    summary(&r);
    match &a.out {
        Some(path) => write_file(path, &r.to_json()?),
        None => stdout(&r.to_json()?),
    }
}

fn audit(a: &AuditArgs) -> CliResult {
    let wv = load_vectors(&a.test.vectors)?;
    let opts = a.test.options();
    let pool = thread_pool(a.test.threads)?;
    let results = pool.install(|| -> embias::Result<Vec<WeatResult>> {
        let mut out = vec![weat::validation_test(&wv, &opts)?];
        for sets in wordlists::standard_audits() {
            out.push(weat::run_sets(&sets, &wv, &opts)?);
        }
        Ok(out)
    })?;
    let mut table = String::from("comparison\tS\td\tp\tseed\tfile\n");
    for (i, r) in results.iter().enumerate() {
        summary(r);
        let path = a.out_dir.join(format!("{}-{}.json", i, file_stem(&r.name)));
        write_file(&path, &r.to_json()?)?;
        table.push_str(&format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\n",
            r.name,
            r.statistic,
            r.effect_size,
            r.p_value,
            r.seed,
            path.display()
        ));
    }
    stdout(&table)
}

fn chisq(table: &Path) -> CliResult {
    let t = ContingencyTable::load(table)?;
    let doc = json!({
        "rows": t.rows(),
        "cols": t.cols(),
        "total": t.total(),
        "chi_square": stats::chi_square(&t),
        "g_test": stats::g_test(&t),
        "expected": t.expected(),
        "adjusted_residuals": stats::standardized_residuals(&t),
        "pearson_residuals": stats::pearson_residuals(&t),
    });
    let mut text = serde_json::to_string_pretty(&doc).map_err(embias::Error::from)?;
    text.push('\n');
    stdout(&text)
}

fn lists(cmd: &ListsCmd) -> CliResult {
    match cmd {
        ListsCmd::Export { out } => write_file(out, &wordlists::export_json()?),
        ListsCmd::Show { id: None } => {
            let mut text = String::new();
            for id in ListId::ALL {
                text.push_str(&format!("{}\t{}\t{}\n", id, wordlists::builtin(id).len(), id.label()));
            }
            stdout(&text)
        }
        ListsCmd::Show { id: Some(name) } => {
            let words = wordlists::builtin_by_name(name)?;
            stdout(&(words.join("\n") + "\n"))
        }
    }
}

fn report_cmd(a: &ReportArgs) -> CliResult {
    let mut results = Vec::with_capacity(a.inputs.len());
    for path in &a.inputs {
        let text = data(fs::read_to_string(path), path)?;
        let r = WeatResult::from_json(&text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        results.push(r);
    }
    let mut metadata: BTreeMap<String, Value> = BTreeMap::new();
    let inputs: Vec<String> = a
        .inputs
        .iter()
        .map(|p| p.file_name().unwrap_or(p.as_os_str()).to_string_lossy().into_owned())
        .collect();
    metadata.insert("inputs".into(), json!(inputs));
    for m in &a.meta {
        let Some((k, v)) = m.split_once('=') else {
            return Err(Failure::Data(format!("--meta expects key=value, got '{m}'")));
        };
        metadata.insert(k.trim().to_string(), Value::String(v.trim().to_string()));
    }
    let doc: Report = report::compose_report(&results, metadata)?;
    let json_path = a.json.clone().unwrap_or_else(|| a.out.with_extension("json"));
    write_file(&json_path, &doc.to_json()?)?;
    write_file(&a.out, &doc.to_markdown())?;
    info!("{} comparisons written to {} and {}", results.len(), a.out.display(), json_path.display());
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Cmd::Vocab(a) => vocab(a),
        Cmd::Cooccur(a) => cooccur_cmd(a),
        Cmd::Train(a) => train(a),
        Cmd::Weat(a) => weat_cmd(a),
        Cmd::Validate(a) => validate(a),
        Cmd::Audit(a) => audit(a),
        Cmd::Stats {
            command: StatsCmd::Chisq { table },
        } => chisq(table),
        Cmd::Lists { command } => lists(command),
        Cmd::Report(a) => report_cmd(a),
    }
}

fn parse(args: Vec<OsString>) -> Result<Cli, ExitCode> {
    let args = config::load_and_merge(&Cli::command(), args).map_err(|e| {
        eprintln!("error: {e}\n\n{}", Cli::command().render_usage());
        ExitCode::from(1)
    })?;
    Cli::try_parse_from(args).map_err(|e| {
        let _ = e.print();
        if e.use_stderr() {
            ExitCode::from(1)
        } else {
            ExitCode::SUCCESS
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp_secs()
        .init();
    let cli = match parse(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
