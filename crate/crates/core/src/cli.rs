//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 internal invariant violation.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::asg::{assert_acyclic, build_asg, AsgOptions, DEFAULT_MAX_STRUCTURES};
use crate::dataset::{self, Ratios, SplitMode, SplitSpec, DEFAULT_TIMEOUT};
use crate::graph::{read_graph, write_graph, Format, TypedDigraph};
use crate::pddl::{parse_pddl, to_abstract_structure};
use crate::pdg::{build_pdg, find_illegal_edge, pdg_node_count};
use crate::sas::parse_sas;
use crate::stats::{self, StatsError, DEFAULT_DIAMETER_CAP};

pub const OUT_DIR_ENV: &str = "IPCGRAPH_OUT_DIR";

#[derive(Debug)]
enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Internal(m) => m,
        }
    }
}

fn input(msg: impl std::fmt::Display) -> CliError {
    CliError::Input(msg.to_string())
}

fn at_file(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: error: {msg}", path.display()))
}

#[derive(Parser)]
#[command(
    name = "ipcgraph",
    version,
    about = "Compile planning tasks into graphs and manage graph datasets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    #[value(name = "edge_csv")]
    EdgeCsv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::EdgeCsv => Format::EdgeCsv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Domain,
    Random,
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Subcommand)]
enum Command {
    /// Build one problem description graph per SAS+ file
    CompileGrounded {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
        /// Worker threads (default: available parallelism)
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Build the abstract structure graph of a PDDL domain/problem pair
    CompileLifted {
        domain: PathBuf,
        problem: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        /// Share only symbols, not structurally equal sets and tuples
        #[arg(long)]
        no_sharing: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_STRUCTURES)]
        max_structures: usize,
    },
    /// Per-graph and corpus statistics
    Stats {
        graphs: Vec<PathBuf>,
        #[arg(long, default_value = "stats.csv")]
        out: PathBuf,
        #[arg(long, default_value = "summary.json")]
        summary: PathBuf,
        /// Skip the diameter of graphs with more nodes than this
        #[arg(long, default_value_t = DEFAULT_DIAMETER_CAP)]
        diameter_cap: usize,
        /// Also write box-plot size quartiles
        #[arg(long, num_args = 0..=1, default_missing_value = "distribution.csv")]
        distribution: Option<PathBuf>,
        /// Include sample standard deviations in the summary
        #[arg(long)]
        verbose: bool,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Label operations
    #[command(subcommand)]
    Labels(LabelsCommand),
    /// Re-split train/validation around a fixed test set
    Split {
        #[arg(long)]
        targets: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        seed: u64,
        /// Train and validation ratios
        #[arg(long, default_value = "0.8,0.2")]
        ratios: Ratios,
        /// JSON array of test task ids
        #[arg(long)]
        test_ids: PathBuf,
        #[arg(long, default_value = "split.json")]
        out: PathBuf,
    },
    /// Solved fraction of the test set under predicted failure probabilities
    EvalSelect {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        targets: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TIMEOUT)]
        timeout: f64,
    },
}

#[derive(Subcommand)]
enum LabelsCommand {
    /// Convert runtimes to 0/1 failure labels
    Binarize {
        #[arg(long)]
        targets: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TIMEOUT)]
        timeout: f64,
        #[arg(long, default_value = "labels.csv")]
        out: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(errors) => {
            for e in &errors {
                eprintln!("{}", e.message());
            }
            errors.iter().map(CliError::exit_code).max().unwrap_or(1)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Vec<CliError>> {
    let one = |r: Result<(), CliError>| r.map_err(|e| vec![e]);
    match command {
        Command::CompileGrounded { inputs, output, jobs } => compile_grounded(&inputs, &output, jobs),
        Command::CompileLifted {
            domain,
            problem,
            output,
            no_sharing,
            max_structures,
        } => one(compile_lifted(&domain, &problem, &output, no_sharing, max_structures)),
        Command::Stats {
            graphs,
            out,
            summary,
            diameter_cap,
            distribution,
            verbose,
            jobs,
        } => one(run_stats(
            &graphs,
            &out,
            &summary,
            diameter_cap,
            distribution.as_deref(),
            verbose,
            jobs,
        )),
        Command::Labels(LabelsCommand::Binarize { targets, timeout, out }) => one(binarize(&targets, timeout, &out)),
        Command::Split {
            targets,
            mode,
            seed,
            ratios,
            test_ids,
            out,
        } => one(split(&targets, mode, seed, ratios, &test_ids, &out)),
        Command::EvalSelect {
            predictions,
            targets,
            split,
            timeout,
        } => one(eval_select(&predictions, &targets, &split, timeout)),
    }
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(input("--jobs must be at least 1"));
        }
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| CliError::Internal(format!("cannot start worker pool: {e}")))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| at_file(path, e))
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| at_file(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| at_file(path, e))
}

/// File name without its final extension.
fn stem(path: &Path) -> Result<String, CliError> {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .ok_or_else(|| at_file(path, "not a file name"))
}

fn prepare_out_dir(output: &OutputArgs) -> Result<(), CliError> {
    fs::create_dir_all(&output.out_dir).map_err(|e| at_file(&output.out_dir, e))
}

fn write_output(g: &TypedDigraph, output: &OutputArgs, stem: &str) -> Result<(), CliError> {
    write_graph(g, &output.out_dir, stem, output.format.into()).map_err(input)?;
    Ok(())
}

fn compile_one_sas(path: &Path, output: &OutputArgs, stem: &str) -> Result<(), CliError> {
    let task = parse_sas(&read_text(path)?)
        .map_err(|e| CliError::Input(format!("{}:{}: error: {e}", path.display(), e.line())))?;
    let g = build_pdg(&task);
    if g.num_nodes() != pdg_node_count(&task) {
        return Err(CliError::Internal(format!(
            "{}: internal error: built {} nodes, expected {}",
            path.display(),
            g.num_nodes(),
            pdg_node_count(&task)
        )));
    }
    if let Some((s, d)) = find_illegal_edge(&g) {
        return Err(CliError::Internal(format!(
            "{}: internal error: illegal edge {s} -> {d} ({} -> {})",
            path.display(),
            g.kind(s),
            g.kind(d)
        )));
    }
    write_output(&g, output, stem)
}

fn compile_grounded(inputs: &[PathBuf], output: &OutputArgs, jobs: Option<usize>) -> Result<(), Vec<CliError>> {
    let stems = inputs
        .iter()
        .map(|p| stem(p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| vec![e])?;
    let mut sorted = stems.clone();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(vec![input(format!("two inputs share the output name `{}`", w[0]))]);
    }
    prepare_out_dir(output).map_err(|e| vec![e])?;
    let pool = pool(jobs).map_err(|e| vec![e])?;
    let results: Vec<Result<(), CliError>> = pool.install(|| {
        inputs
            .par_iter()
            .zip(&stems)
            .map(|(path, stem)| compile_one_sas(path, output, stem))
            .collect()
    });
    let errors: Vec<CliError> = results.into_iter().filter_map(Result::err).collect();
    if errors.is_empty() {
        eprintln!("compiled {} task(s) into {}", inputs.len(), output.out_dir.display());
        Ok(())
    } else {
        Err(errors)
    }
}

fn compile_lifted(
    domain: &Path,
    problem: &Path,
    output: &OutputArgs,
    no_sharing: bool,
    max_structures: usize,
) -> Result<(), CliError> {
    let doc = parse_pddl(&read_text(domain)?, &read_text(problem)?)
        .map_err(|e| CliError::Input(e.diagnostic(&domain.display().to_string(), &problem.display().to_string())))?;
    let options = AsgOptions {
        sharing: !no_sharing,
        max_structures,
    };
    let g = build_asg(&to_abstract_structure(&doc), &options).map_err(|e| at_file(problem, e))?;
    assert_acyclic(&g).map_err(|e| CliError::Internal(format!("{}: internal error: {e}", problem.display())))?;
    prepare_out_dir(output)?;
    write_output(&g, output, &stem(problem)?)
}

fn run_stats(
    graphs: &[PathBuf],
    out: &Path,
    summary: &Path,
    diameter_cap: usize,
    distribution: Option<&Path>,
    verbose: bool,
    jobs: Option<usize>,
) -> Result<(), CliError> {
    if graphs.is_empty() {
        return Err(input(format!("error: {}", StatsError::EmptyCorpus)));
    }
    let pool = pool(jobs)?;
    let records = pool.install(|| {
        graphs
            .par_iter()
            .map(|p| {
                let g = read_graph(p).map_err(|e| input(format!("error: {e}")))?;
                Ok(stats::graph_stats(p.display().to_string(), &g, diameter_cap))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let corpus = stats::corpus_stats(&records).map_err(|e| input(format!("error: {e}")))?;
    let corpus = if verbose { corpus } else { corpus.population_only() };

    stats::write_stats_csv(&records, create(out)?).map_err(|e| at_file(out, e))?;
    let mut json = serde_json::to_vec_pretty(&corpus).map_err(|e| CliError::Internal(e.to_string()))?;
    json.push(b'\n');
    fs::write(summary, json).map_err(|e| at_file(summary, e))?;
    if let Some(path) = distribution {
        stats::write_distribution_csv(&records, create(path)?).map_err(|e| at_file(path, e))?;
    }
    eprintln!("summarized {} graph(s)", records.len());
    Ok(())
}

fn load_targets(path: &Path, timeout: f64) -> Result<dataset::TargetTable, CliError> {
    if !(timeout.is_finite() && timeout >= 0.0) {
        return Err(input(format!(
            "error: timeout must be a nonnegative number, got {timeout}"
        )));
    }
    dataset::load_targets(open(path)?, timeout).map_err(|e| at_file(path, e))
}

fn binarize(targets: &Path, timeout: f64, out: &Path) -> Result<(), CliError> {
    let table = load_targets(targets, timeout)?;
    dataset::write_labels_csv(&table, create(out)?).map_err(|e| at_file(out, e))
}

fn split(
    targets: &Path,
    mode: ModeArg,
    seed: u64,
    ratios: Ratios,
    test_ids: &Path,
    out: &Path,
) -> Result<(), CliError> {
    let table = load_targets(targets, DEFAULT_TIMEOUT)?;
    let test = dataset::load_test_ids(open(test_ids)?).map_err(|e| at_file(test_ids, e))?;
    let mode = match mode {
        ModeArg::Domain => SplitMode::Domain,
        ModeArg::Random => SplitMode::Random,
    };
    let spec = dataset::resplit(&table, &test, mode, seed, ratios).map_err(|e| at_file(targets, e))?;
    spec.validate(&table)
        .map_err(|e| CliError::Internal(format!("internal error: generated split is invalid: {e}")))?;
    let mut json = serde_json::to_vec_pretty(&spec).map_err(|e| CliError::Internal(e.to_string()))?;
    json.push(b'\n');
    fs::write(out, json).map_err(|e| at_file(out, e))
}

fn eval_select(predictions: &Path, targets: &Path, split: &Path, timeout: f64) -> Result<(), CliError> {
    let table = load_targets(targets, timeout)?;
    let preds = dataset::load_predictions(open(predictions)?).map_err(|e| at_file(predictions, e))?;
    let spec: SplitSpec = serde_json::from_reader(open(split)?).map_err(|e| at_file(split, e))?;
    spec.validate(&table).map_err(|e| at_file(split, e))?;
    let fraction = dataset::evaluate_selection(&preds, &table, &spec).map_err(|e| at_file(predictions, e))?;
    println!("{fraction}");
    Ok(())
}
