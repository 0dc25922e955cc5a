use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde_json::json;

use planwatch_core::collector::CardinalityCache;
use planwatch_core::harness::{
    build_dataset, eval_offline, eval_online, label_query, label_workload, load_catalog, load_workload, read_json,
    simulate_stream, train_baseline, train_model, write_json, Dataset, ExperimentSpec, BASELINE_FILE,
    CACHE_FILE, CHECKPOINT_FILE, DATASET_DIR, DOMAINS_FILE, HISTORY_FILE, WORKLOAD_FILE,
};
use planwatch_core::l1error::{l1_report, query_position_vectors};
use planwatch_core::model::{load_checkpoint, save_checkpoint, DecisionTree};
use planwatch_core::planspace::{write_workload, SubOptConfig};
use planwatch_core::workloadgen::DomainStore;
use planwatch_core::{collector::Estimator, generate_catalog, Error, Result, SchemaSpec};

#[derive(Parser)]
#[command(name = "planwatch", version, about = "Detect sub-optimal join plans from cardinality orderings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the catalog and write its schema and column summary.
    GenCatalog(Common),
    /// Scale templates into a validated workload.
    GenWorkload(Common),
    /// Label the workload and write the train/test dataset.
    BuildDataset(Common),
    /// Train the transformer on the dataset.
    Train(Common),
    /// Train the L1-only decision tree.
    TrainBaseline(Common),
    /// Evaluate model and baseline on the test split.
    EvalOffline(Common),
    /// Evaluate with surrogate/true mixes.
    EvalOnline(Common),
    /// Replay the workload through the cardinality cache.
    SimulateStream {
        #[command(flatten)]
        common: Common,
        /// Start from an empty cache even if one exists.
        #[arg(long)]
        fresh: bool,
    },
    /// L1 report of one query.
    L1 {
        #[command(flatten)]
        common: Common,
        /// Query id; defaults to the first query.
        #[arg(long)]
        query: Option<String>,
    },
}

fn load_spec(c: &Common) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::load(&c.config)?;
    if let Some(seed) = c.seed {
        spec.seed = seed;
    }
    if let Some(out) = &c.out {
        spec.output = std::path::absolute(out)?;
    }
    std::fs::create_dir_all(spec.output_dir())?;
    Ok(spec)
}

fn ckpt_path(out: &Path) -> PathBuf {
    out.join(CHECKPOINT_FILE)
}

fn gen_catalog(c: &Common) -> Result<()> {
    let spec = load_spec(c)?;
    let mut schema = SchemaSpec::from_json(&std::fs::read_to_string(spec.resolve(&spec.catalog))?)?;
    if let Some(seed) = c.seed {
        schema.seed = seed;
    }
    let catalog = generate_catalog(&schema)?;
    let out = spec.output_dir();
    std::fs::write(out.join("schema.json"), schema.to_json())?;
    let tables: Vec<_> = schema
        .tables
        .iter()
        .enumerate()
        .map(|(t, table)| {
            let columns: Vec<_> = table
                .columns
                .iter()
                .enumerate()
                .map(|(ci, col)| {
                    let values = &catalog.table(t).columns[ci];
                    let distinct = values.iter().collect::<std::collections::BTreeSet<_>>().len();
                    json!({
                        "name": col.name,
                        "min": values.iter().min(),
                        "max": values.iter().max(),
                        "distinct": distinct,
                    })
                })
                .collect();
            json!({"name": table.name, "rows": catalog.row_count(t), "columns": columns})
        })
        .collect();
    write_json(&out.join("catalog_summary.json"), &json!({ "tables": tables }))?;
    info!("catalog with {} tables written to {}", schema.table_count(), out.display());
    Ok(())
}

fn gen_workload(c: &Common) -> Result<()> {
    let spec = load_spec(c)?;
    let out = spec.output_dir();
    let catalog = load_catalog(&spec)?;
    let domains = out.join(DOMAINS_FILE);
    let mut store = if domains.exists() {
        DomainStore::load(&domains)?
    } else {
        DomainStore::new()
    };
    let (queries, scaled) = load_workload(&spec, &catalog, &mut store)?;
    std::fs::write(out.join(WORKLOAD_FILE), write_workload(&queries))?;
    store.save(&domains)?;
    info!("{} queries written to {}", queries.len(), out.join(WORKLOAD_FILE).display());
    if let Some(s) = scaled {
        write_json(
            &out.join("workload_summary.json"),
            &json!({
                "queries": s.queries.len(),
                "target": s.target,
                "attempts": s.attempts,
                "rejected": s.rejected,
                "per_template": s.per_template,
                "exhausted": s.exhausted,
                "warnings": s.warnings,
            }),
        )?;
        if s.exhausted {
            return Err(Error::BudgetExhausted {
                attempts: s.attempts,
                accepted: s.queries.len(),
                target: s.target,
            });
        }
    }
    Ok(())
}

fn dataset(c: &Common) -> Result<()> {
    let spec = load_spec(c)?;
    let ds = build_dataset(&spec)?;
    let dir = spec.output_dir().join(DATASET_DIR);
    ds.write(&dir)?;
    let s = &ds.meta.stats;
    info!(
        "{} queries ({} train / {} test), {} sub-optimal ({:.1}%)",
        s.queries,
        s.train_queries,
        s.test_queries,
        s.suboptimal,
        100.0 * s.suboptimal_fraction
    );
    for w in &s.warnings {
        warn!("{w}");
    }
    Ok(())
}

fn read_dataset(spec: &ExperimentSpec) -> Result<Dataset> {
    Dataset::read(&spec.output_dir().join(DATASET_DIR))
}

fn train(c: &Common) -> Result<()> {
    let spec = load_spec(c)?;
    let ds = read_dataset(&spec)?;
    let (ckpt, history) = train_model(&spec, &ds)?;
    let out = spec.output_dir();
    save_checkpoint(&ckpt_path(&out), &ckpt)?;
    write_json(&out.join(HISTORY_FILE), &history)?;
    info!(
        "best epoch {} with held-out accuracy {:.4}",
        history.best_epoch, history.best_heldout_accuracy
    );
    Ok(())
}

fn baseline(c: &Common) -> Result<()> {
    let spec = load_spec(c)?;
    let tree = train_baseline(&spec, &read_dataset(&spec)?)?;
    write_json(&spec.output_dir().join(BASELINE_FILE), &tree)?;
    info!("decision tree depth {} (cv accuracy {:.4})", tree.depth(), tree.cv_accuracy);
    Ok(())
}

fn offline(c: &Common) -> Result<()> {
    let spec = load_spec(c)?;
    let out = spec.output_dir();
    let ckpt = load_checkpoint(&ckpt_path(&out))?;
    let tree_path = out.join(BASELINE_FILE);
    let tree: Option<DecisionTree> = if tree_path.exists() {
        Some(read_json(&tree_path)?)
    } else {
        None
    };
    let report = eval_offline(&spec, &ckpt, tree.as_ref(), &read_dataset(&spec)?)?;
    report.write(&out)?;
    print!("{}", report.render_text());
    Ok(())
}

fn online(c: &Common) -> Result<()> {
    let spec = load_spec(c)?;
    let out = spec.output_dir();
    let ckpt = load_checkpoint(&ckpt_path(&out))?;
    let catalog = load_catalog(&spec)?;
    let (queries, _) = load_workload(&spec, &catalog, &mut DomainStore::new())?;
    let labeled = label_workload(&spec, &catalog, &queries)?;
    let report = eval_online(&spec, &ckpt, &catalog, &labeled)?;
    report.write(&out)?;
    print!("{}", report.render_text());
    Ok(())
}

fn stream(c: &Common, fresh: bool) -> Result<()> {
    let spec = load_spec(c)?;
    let out = spec.output_dir();
    let ckpt = load_checkpoint(&ckpt_path(&out))?;
    let catalog = load_catalog(&spec)?;
    let (queries, _) = load_workload(&spec, &catalog, &mut DomainStore::new())?;
    let labeled = label_workload(&spec, &catalog, &queries)?;
    let cache_path = out.join(CACHE_FILE);
    let cache = if !fresh && cache_path.exists() {
        CardinalityCache::load(&cache_path, spec.recency)?
    } else {
        CardinalityCache::new(spec.recency)
    };
    let outcome = simulate_stream(&spec, &ckpt, &catalog, &labeled, cache)?;
    outcome.report.write(&out)?;
    outcome.cache.save(&cache_path)?;
    print!("{}", outcome.report.render_text());
    Ok(())
}

fn l1(c: &Common, query: Option<&str>) -> Result<()> {
    let spec = load_spec(c)?;
    let catalog = load_catalog(&spec)?;
    let (queries, _) = load_workload(&spec, &catalog, &mut DomainStore::new())?;
    let q = match query {
        Some(id) => queries
            .iter()
            .find(|q| q.id == id)
            .ok_or_else(|| Error::Input(format!("no query `{id}` in the workload")))?,
        None => queries.first().ok_or_else(|| Error::Input("empty workload".into()))?,
    };
    let estimator = Estimator::new(spec.default_estimator, &catalog);
    let lq = label_query(&catalog, q, &estimator, &SubOptConfig::new(spec.c)?)?;
    let pairs = query_position_vectors(&lq.space, &lq.truth, &lq.est)?;
    let report = l1_report(&pairs, &spec.l1_weights);
    let path = spec.output_dir().join(format!("l1_{}.json", q.id));
    write_json(
        &path,
        &json!({
            "query_id": q.id,
            "label": lq.label,
            "p_error": lq.p_error,
            "report": report,
            "normalized": report.normalized(),
            "pairs": pairs,
        }),
    )?;
    println!("query {} ({:?}, p_error {:.6})", q.id, lq.label, lq.p_error);
    for (k, v) in &report.per_k {
        println!("  k={k}: L1 {v} over {} subplans", report.sizes.get(k).copied().unwrap_or(0));
    }
    println!("  aggregate {} (normalized {:.4})", report.aggregate, report.normalized());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::GenCatalog(c) => gen_catalog(c),
        Command::GenWorkload(c) => gen_workload(c),
        Command::BuildDataset(c) => dataset(c),
        Command::Train(c) => train(c),
        Command::TrainBaseline(c) => baseline(c),
        Command::EvalOffline(c) => offline(c),
        Command::EvalOnline(c) => online(c),
        Command::SimulateStream { common, fresh } => stream(common, *fresh),
        Command::L1 { common, query } => l1(common, query.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
