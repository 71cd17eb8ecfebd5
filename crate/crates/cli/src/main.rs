//! `geotemplate`: batch pipeline from tagged where-questions to evaluated
//! generic answer templates and SPARQL queries.

mod commands;
mod config;
mod marco;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use geotemplate::gazetteer::GazetteerIndex;
use geotemplate::model::TypeSchema;
use geotemplate::predictor::Method;

use commands::Ctx;
use config::PipelineConfig;
use output::{Artifacts, Meta};

/// Bad input data or a missing artifact. Exit code 2.
#[derive(Debug)]
pub struct DataError(pub String);

/// Bad invocation. Exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DataError {}
impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "geotemplate", version, about = "Generic answer templates for geographic where-questions")]
struct Cli {
    /// Pipeline config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// More log output; repeat for debug.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Resolve tagged toponyms against the gazetteer.
    Ingest,
    /// Fit prominence breaks and encode the resolved corpus per class.
    Encode,
    /// Mine association rules per class and question class.
    Mine {
        #[arg(long)]
        min_support: Option<f64>,
        #[arg(long)]
        min_confidence: Option<f64>,
        #[arg(long)]
        max_items: Option<usize>,
    },
    /// Train prediction models on the full encoded corpus.
    Train {
        /// Comma-separated method names; defaults to the config list.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
    },
    /// Cross-validated evaluation of every method and scenario.
    Eval,
    /// Build SPARQL queries from predicted answer types.
    Sparql {
        /// Build the query for one JSON query plan and print it.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Class map for --plan when no config is given.
        #[arg(long)]
        class_map: Option<PathBuf>,
        /// Run the queries (against fixtures when configured).
        #[arg(long)]
        execute: bool,
    },
    /// Extract location-typed where-questions from an MS MARCO dump.
    MarcoExtract {
        #[arg(long)]
        input: PathBuf,
    },
}

fn load_config(cli: &Cli, required: bool) -> Result<Option<PipelineConfig>> {
    let Some(path) = &cli.config else {
        if required {
            return Err(UsageError("this command needs --config <path>".into()).into());
        }
        return Ok(None);
    };
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.paths.out = out.clone();
    }
    if let Command::Mine {
        min_support,
        min_confidence,
        max_items,
    } = &cli.command
    {
        let m = &mut cfg.mining;
        m.min_support = min_support.unwrap_or(m.min_support);
        m.min_confidence = min_confidence.unwrap_or(m.min_confidence);
        m.max_items = max_items.unwrap_or(m.max_items);
    }
    if let Command::Train { methods: Some(m) } = &cli.command {
        cfg.predictor.methods = m.clone();
    }
    cfg.validate()?;
    Ok(Some(cfg))
}

fn marco_extract(cli: &Cli, input: &std::path::Path) -> Result<()> {
    let cfg = load_config(cli, false)?;
    let settings = cfg.as_ref().map(|c| c.marco.clone()).unwrap_or_default();
    let gazetteer = match &cfg {
        Some(c) => Some(GazetteerIndex::load(&c.paths.gazetteer, &TypeSchema::load(&c.paths.type_schema)?)?),
        None => None,
    };
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.as_ref().map(|c| c.paths.out.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let rows = marco::read(input)?;
    let (records, counts) = marco::extract(&rows, &settings, gazetteer.as_ref());
    let meta = Meta {
        config_hash: cfg.as_ref().map(|c| c.hash()).unwrap_or_else(|| "none".into()),
        seed: cfg.as_ref().map_or(cli.seed.unwrap_or(0), |c| c.seed),
        stage: "marco-extract".into(),
    };
    let art = Artifacts::new(out);
    art.write_jsonl("marco/where_questions.jsonl", &meta, &records)?;
    art.write_json(
        "marco/report.json",
        &meta,
        "counts",
        &serde_json::json!({ "filter": counts, "by_query_type": marco::counts_by_type(&rows) }),
    )?;
    println!(
        "marco-extract: {} rows, {} {}, {} where-questions, {} written",
        counts.total, counts.type_matched, settings.query_type, counts.where_matched, counts.written
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::MarcoExtract { input } => return marco_extract(cli, input),
        Command::Sparql { plan: Some(plan), class_map, .. } => {
            let cfg = load_config(cli, class_map.is_none())?;
            return commands::sparql_plan(cfg.as_ref(), plan, class_map.as_deref());
        }
        _ => {}
    }
    let ctx = Ctx::new(load_config(cli, true)?.expect("required config"));
    match &cli.command {
        Command::Ingest => commands::ingest(&ctx),
        Command::Encode => commands::encode(&ctx),
        Command::Mine { .. } => commands::mine(&ctx),
        Command::Train { .. } => commands::train_models(&ctx),
        Command::Eval => commands::eval(&ctx),
        Command::Sparql { execute, .. } => commands::sparql(&ctx, *execute),
        Command::MarcoExtract { .. } => unreachable!(),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 1;
        }
        if cause.is::<DataError>() || cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<geotemplate::Error>() {
            return match e {
                geotemplate::Error::MissingCells(_) => 3,
                _ => 2,
            };
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(3),
    }
}
