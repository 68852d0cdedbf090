//! `afevo` — evolve, evaluate, and inspect piecewise activation functions.
//!
//! Subcommands:
//! * `evolve`  — run the genetic algorithm, writing `runlog.jsonl` and
//!   `best.genome` plus a per-generation fitness table on stdout;
//! * `eval-af` — tabulate a genome's value and derivative over a grid
//!   as `x,value,derivative` CSV;
//! * `parse`   — parse-check an expression or genome and print its
//!   canonical form and size;
//! * `train`   — train one genome and print its fitness report as JSON.
//!
//! Exit codes: 0 success, 2 usage/config errors, 3 dataset errors.

mod manifest;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use afevo_core::{evaluate_genome, parse_genome, Engine, TrainerEvaluator};

use manifest::ConfigFlags;

#[derive(Debug)]
pub enum CliError {
    /// Usage or configuration problem (exit 2).
    Config(String),
    /// Dataset problem (exit 3).
    Data(String),
    /// Runtime failure (exit 1).
    Run(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Data(msg) | CliError::Run(msg) => f.write_str(msg),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Run(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "afevo", version, about = "Evolve piecewise activation functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an evolution experiment
    Evolve(EvolveArgs),
    /// Tabulate an activation function over a grid
    EvalAf(EvalAfArgs),
    /// Parse-check an expression or a left|right genome
    Parse(ParseArgs),
    /// Train a single genome and print its fitness report
    Train(TrainArgs),
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    cfg: ConfigFlags,
    /// Evaluation worker threads (0 = one per core); never changes results
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output directory for runlog.jsonl and best.genome
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct EvalAfArgs {
    /// Genome in left|right form, e.g. 'ELiSH|ELiSH'
    genome: String,
    #[arg(long, allow_hyphen_values = true, default_value_t = -5.0)]
    xmin: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 5.0)]
    xmax: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.1)]
    step: f64,
    /// Also write the table to DIR/af.csv
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ParseArgs {
    /// Expression or left|right genome text
    text: String,
}

#[derive(Args)]
struct TrainArgs {
    /// Genome in left|right form
    genome: String,
    #[command(flatten)]
    cfg: ConfigFlags,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evolve(args) => cmd_evolve(args),
        Command::EvalAf(args) => cmd_eval_af(args),
        Command::Parse(args) => cmd_parse(args),
        Command::Train(args) => cmd_train(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn cmd_evolve(args: EvolveArgs) -> Result<(), CliError> {
    let manifest = args.cfg.resolve()?;
    let data = manifest.load_dataset()?;

    let evaluator = TrainerEvaluator {
        data: &data,
        cfg: manifest.mlp_config(),
    };
    let mut engine = Engine::new(manifest.ga_config(), &evaluator, args.workers)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let log = engine.run().map_err(|e| CliError::Run(e.to_string()))?;

    println!("{:>4}  {:>10}  {:>10}  best genome", "gen", "best", "mean");
    for record in &log.generations {
        println!(
            "{:>4}  {:>10.6}  {:>10.6}  {}",
            record.generation, record.best_fitness, record.mean_fitness, record.best_genome
        );
    }
    println!(
        "evaluations: {}  cache hits: {}",
        log.total_evaluations, log.cache_hits
    );

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Run(format!("cannot create {}: {e}", args.out.display())))?;
    let runlog_path = args.out.join("runlog.jsonl");
    let mut runlog = manifest.to_json();
    runlog.push('\n');
    runlog.push_str(&log.to_jsonl());
    std::fs::write(&runlog_path, runlog)
        .map_err(|e| CliError::Run(format!("cannot write {}: {e}", runlog_path.display())))?;
    let best_path = args.out.join("best.genome");
    std::fs::write(&best_path, format!("{}\n", log.best_genome()))
        .map_err(|e| CliError::Run(format!("cannot write {}: {e}", best_path.display())))?;
    println!("wrote {} and {}", runlog_path.display(), best_path.display());
    Ok(())
}

fn cmd_eval_af(args: EvalAfArgs) -> Result<(), CliError> {
    let genome = parse_genome(&args.genome).map_err(|e| CliError::Config(e.to_string()))?;
    if !(args.xmin.is_finite() && args.xmax.is_finite() && args.xmin < args.xmax) {
        return Err(CliError::Config("xmin must be less than xmax".into()));
    }
    if !(args.step.is_finite() && args.step > 0.0) {
        return Err(CliError::Config("step must be positive".into()));
    }

    let mut table = String::from("x,value,derivative\n");
    let mut k = 0usize;
    loop {
        let x = args.xmin + k as f64 * args.step;
        if x > args.xmax + 1e-12 {
            break;
        }
        let dual = genome.eval_dual(x);
        table.push_str(&format!("{x},{},{}\n", dual.value, dual.deriv));
        k += 1;
    }
    print!("{table}");

    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Run(format!("cannot create {}: {e}", dir.display())))?;
        let path = dir.join("af.csv");
        let provenance = format!(
            "# {{\"tool_version\":\"{}\",\"genome\":\"{}\",\"xmin\":{},\"xmax\":{},\"step\":{}}}\n",
            env!("CARGO_PKG_VERSION"),
            genome,
            args.xmin,
            args.xmax,
            args.step
        );
        std::fs::write(&path, format!("{provenance}{table}"))
            .map_err(|e| CliError::Run(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_parse(args: ParseArgs) -> Result<(), CliError> {
    if args.text.contains('|') {
        let genome = parse_genome(&args.text).map_err(|e| CliError::Config(e.to_string()))?;
        let canonical = genome.key();
        let reparsed = parse_genome(&canonical).map_err(|e| CliError::Run(e.to_string()))?;
        if reparsed != genome {
            return Err(CliError::Run("round-trip mismatch".into()));
        }
        println!("canonical: {canonical}");
        println!("nodes: {}+{}", genome.left.node_count(), genome.right.node_count());
        println!("depth: {}", genome.max_gene_depth());
    } else {
        let expr = afevo_core::parse(&args.text).map_err(|e| CliError::Config(e.to_string()))?;
        let canonical = expr.to_string();
        let reparsed = afevo_core::parse(&canonical).map_err(|e| CliError::Run(e.to_string()))?;
        if reparsed != expr {
            return Err(CliError::Run("round-trip mismatch".into()));
        }
        println!("canonical: {canonical}");
        println!("nodes: {}", expr.node_count());
        println!("depth: {}", expr.depth());
    }
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let genome = parse_genome(&args.genome).map_err(|e| CliError::Config(e.to_string()))?;
    let manifest = args.cfg.resolve()?;
    let data = manifest.load_dataset()?;
    let report = evaluate_genome(&genome, &data, &manifest.mlp_config(), manifest.seed);
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(())
}
