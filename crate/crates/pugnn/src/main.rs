use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pugnn::config::RunConfig;
use pugnn::harness::{self, Method, MAIN_RATIOS};
use pugnn::io::{write_jsonl, RawDataset};
use pugnn::manifest::{DatasetManifest, Expected, LoadedDataset, Source};
use pugnn::{checkpoint, trainlog, Error, Result, DATA_DIR_ENV};
use pugnn_core::gcn::gcn_forward;
use pugnn_core::graph::{generate_sbm, partition_unlabeled, topic_features, SbmParams};
use pugnn_core::metrics::macro_f1;
use pugnn_core::train::train;
use serde_json::json;

/// Positive-unlabeled node classification with a distance-aware PU loss
/// and a structural regularizer on a two-layer GCN.
#[derive(Parser)]
#[command(name = "pugnn", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run config (JSON); defaults apply to every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for the PU mask and the model (train, partition, eval).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Set a config value by dotted path, e.g. loss.alpha=0. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Directory holding the builtin datasets.
    #[arg(long, global = true, env = DATA_DIR_ENV, default_value = "data")]
    data_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model; writes config, log, checkpoint and result.
    Train,
    /// Run a grid: main, ablation, prior or delta.
    Sweep(SweepArgs),
    /// Print labeled/near/far sizes and the distance histogram per delta.
    Partition(PartitionArgs),
    /// Write a two-block SBM dataset as JSON lines plus a manifest.
    GenSynth(SynthArgs),
    /// Re-score a checkpoint on the test split.
    Eval(EvalArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// main, ablation, prior or delta.
    name: String,
    /// Datasets (builtin names or manifest paths); defaults to the config's.
    #[arg(long = "dataset")]
    datasets: Vec<String>,
    /// Number of seeds; seeds 0..N.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// Label ratios; main and ablation default to 0.001,0.002,0.005,0.01,
    /// prior and delta to 0.002.
    #[arg(long, value_delimiter = ',')]
    ratios: Vec<f64>,
}

#[derive(Args)]
struct PartitionArgs {
    /// Labeled node ids; when absent, drawn from the config's label ratio
    /// and seed.
    #[arg(long, value_delimiter = ',')]
    labeled: Vec<String>,
    /// Thresholds to report.
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3, 4, 5, 6])]
    delta: Vec<u32>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    n_pos: usize,
    #[arg(long, default_value_t = 200)]
    n_neg: usize,
    #[arg(long, default_value_t = 0.05)]
    p_intra: f64,
    #[arg(long, default_value_t = 0.005)]
    p_inter: f64,
    /// Bag-of-words dimension; half the words belong to each block.
    #[arg(long, default_value_t = 32)]
    feature_dim: usize,
    /// Rate of a node's own-block words.
    #[arg(long, default_value_t = 0.3)]
    p_topic: f64,
    /// Rate of the other block's words.
    #[arg(long, default_value_t = 0.05)]
    p_noise: f64,
    /// File stem for the outputs.
    #[arg(long, default_value = "synth")]
    name: String,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let result = match &cli.command {
        Command::Train => cmd_train(&cli.common),
        Command::Sweep(a) => cmd_sweep(&cli.common, a),
        Command::Partition(a) => cmd_partition(&cli.common, a),
        Command::GenSynth(a) => cmd_gen_synth(&cli.common, a),
        Command::Eval(a) => cmd_eval(&cli.common, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let reason = e.to_string().replace('\n', " ");
            eprintln!("error={} exit={} reason={reason}", e.kind(), e.exit_code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(c.config.as_deref(), &c.overrides)?;
    if let Some(s) = c.seed {
        cfg.train.seed = s;
    }
    Ok(cfg)
}

fn load_dataset(spec: &str, data_dir: &Path) -> Result<LoadedDataset> {
    let (manifest, base) = DatasetManifest::resolve(spec, data_dir)?;
    let data = manifest.load(&base)?;
    for w in &data.warnings {
        log::warn!("{w}");
    }
    Ok(data)
}

fn create_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value).expect("json serializes") + "\n"))
}

/// Records the resolved config before anything is computed.
fn write_run_manifest(c: &Common, command: &str, cfg: &RunConfig) -> Result<()> {
    create_dir(&c.out)?;
    write_text(&c.out.join("config.json"), &(cfg.to_json() + "\n"))?;
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    write_json(
        &c.out.join("run.json"),
        &json!({
            "command": command,
            "config_path": c.config,
            "overrides": c.overrides,
            "out": c.out,
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp": timestamp,
        }),
    )
}

fn cmd_train(c: &Common) -> Result<()> {
    let cfg = run_config(c)?;
    write_run_manifest(c, "train", &cfg)?;
    let data = load_dataset(&cfg.dataset, &c.data_dir)?;
    let ds = data.pu_dataset(cfg.label_ratio, cfg.train.seed, cfg.train.loss.delta)?;
    let start = std::time::Instant::now();
    let ckpt = c.out.join("checkpoint.bin");
    let log_path = c.out.join("train_log.jsonl");
    let out = match train(&ds, &cfg.train) {
        Ok(o) => o,
        Err(f) => {
            trainlog::write(&log_path, &f.log)?;
            if let Some(p) = &f.last_good {
                checkpoint::write(&ckpt, p, f.epoch.map_or(0, |e| e - 1), false)?;
            }
            return Err(f.into());
        }
    };
    let wall_time = start.elapsed().as_secs_f64();
    trainlog::write(&log_path, &out.log)?;
    checkpoint::write(&ckpt, &out.params, cfg.train.epochs, true)?;
    let scores = macro_f1(&out.y_hat, &ds.true_label, &ds.test_mask)?;
    log::info!("{} test macro F1 {:.2}", data.name, scores.macro_f1);
    write_json(
        &c.out.join("result.json"),
        &json!({
            "dataset": data.name,
            "method": cfg.train.loss.kind.name(),
            "ratio": cfg.label_ratio,
            "seed": cfg.train.seed,
            "config": cfg.train,
            "labeled": ds.partition.labeled.len(),
            "macro_f1": scores.macro_f1,
            "f1_pos": scores.f1_pos,
            "f1_neg": scores.f1_neg,
            "confusion": scores.confusion,
            "wall_time": wall_time,
        }),
    )
}

fn cmd_sweep(c: &Common, a: &SweepArgs) -> Result<()> {
    let cfg = run_config(c)?;
    let specs = if a.datasets.is_empty() {
        vec![cfg.dataset.clone()]
    } else {
        a.datasets.clone()
    };
    let default_ratios: Vec<f64> = match a.name.as_str() {
        "main" | "ablation" => MAIN_RATIOS.to_vec(),
        "prior" | "delta" => vec![0.002],
        other => {
            return Err(Error::Config(format!(
                "unknown sweep {other:?}: expected main, ablation, prior or delta"
            )))
        }
    };
    let ratios = if a.ratios.is_empty() { default_ratios } else { a.ratios.clone() };
    if a.seeds == 0 {
        return Err(Error::Config("--seeds must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..a.seeds).collect();
    write_run_manifest(c, &format!("sweep {}", a.name), &cfg)?;
    let datasets = specs
        .iter()
        .map(|s| load_dataset(s, &c.data_dir))
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    for d in &datasets {
        cells.extend(match a.name.as_str() {
            "main" => harness::grid_cells(&d.name, &Method::MAIN, &ratios, &seeds, &cfg.train),
            "ablation" => harness::grid_cells(&d.name, &Method::ABLATION, &ratios, &seeds, &cfg.train),
            "prior" => ratios
                .iter()
                .flat_map(|&r| harness::prior_cells(&d.name, r, &seeds, &cfg.train))
                .collect(),
            _ => ratios
                .iter()
                .flat_map(|&r| harness::delta_cells(&d.name, r, &seeds, &cfg.train))
                .collect(),
        });
    }
    log::info!("sweep {}: {} runs on {} workers", a.name, cells.len(), c.jobs);
    let results = harness::run_cells(&datasets, &cells, c.jobs)?;
    let mut rows = harness::aggregate(&results);
    if a.name == "main" {
        let names: Vec<&str> = datasets.iter().map(|d| d.name.as_str()).collect();
        rows = harness::with_published(rows, &names, &ratios);
    }
    harness::write_results_csv(&c.out.join("results.csv"), &results)?;
    harness::write_aggregate_json(&c.out.join("aggregate.json"), &a.name, &rows)?;
    for r in &rows {
        let cell = match (r.mean, r.std) {
            (Some(m), Some(s)) => format!("{m:.1} ± {s:.1}"),
            _ => "failed".into(),
        };
        let tag = if r.external { " (external)" } else { "" };
        println!("{}\t{}\t{}\t{cell}{tag}", r.dataset, r.method, r.ratio);
    }
    let failed = results.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} runs failed; see results.csv", results.len());
    }
    Ok(())
}

fn cmd_partition(c: &Common, a: &PartitionArgs) -> Result<()> {
    let cfg = run_config(c)?;
    if let Some(&d) = a.delta.iter().find(|&&d| d < 1) {
        return Err(Error::Config(format!("delta must be at least 1, got {d}")));
    }
    let data = load_dataset(&cfg.dataset, &c.data_dir)?;
    let labeled: Vec<usize> = if a.labeled.is_empty() {
        data.pu_dataset(cfg.label_ratio, cfg.train.seed, 1)?.partition.labeled
    } else {
        a.labeled
            .iter()
            .map(|id| {
                data.raw
                    .ids
                    .iter()
                    .position(|x| x == id)
                    .ok_or_else(|| Error::Data(format!("unknown node id {id}")))
            })
            .collect::<Result<_>>()?
    };
    for &d in &a.delta {
        let p = partition_unlabeled(&data.raw.graph, &labeled, d)?;
        let (hist, unreachable) = p.distance_histogram();
        println!(
            "{}",
            json!({
                "delta": d,
                "labeled": p.labeled.len(),
                "near": p.near.len(),
                "far": p.far.len(),
                "histogram": hist,
                "unreachable": unreachable,
            })
        );
    }
    Ok(())
}

fn cmd_gen_synth(c: &Common, a: &SynthArgs) -> Result<()> {
    let params = SbmParams {
        n_pos: a.n_pos,
        n_neg: a.n_neg,
        p_intra: a.p_intra,
        p_inter: a.p_inter,
    };
    params.validate().map_err(|e| Error::Config(e.to_string()))?;
    let seed = c.seed.unwrap_or(0);
    let (graph, labels) = generate_sbm(&params, seed)?;
    let features = topic_features(&labels, a.feature_dim, a.p_topic, a.p_noise, seed.wrapping_add(1))
        .map_err(|e| Error::Config(e.to_string()))?;
    let n = graph.num_nodes();
    let data = RawDataset {
        ids: (0..n).map(|v| format!("n{v}")).collect(),
        graph,
        features,
        class_names: vec!["neg".into(), "pos".into()],
        labels: labels.iter().map(|&l| l as u32).collect(),
    };
    create_dir(&c.out)?;
    let file = format!("{}.jsonl", a.name);
    write_jsonl(&c.out.join(&file), &data)?;
    let manifest = DatasetManifest {
        name: a.name.clone(),
        source: Source::Jsonl { path: file },
        positive_classes: vec!["pos".into()],
        normalize_features: true,
        train_count: Some(n / 2),
        split_seed: seed,
        expected: Some(Expected {
            nodes: n,
            positive: a.n_pos,
        }),
    };
    let path = c.out.join(format!("{}.manifest.json", a.name));
    write_json(&path, &serde_json::to_value(&manifest).expect("manifest serializes"))?;
    println!("{}", path.display());
    Ok(())
}

fn cmd_eval(c: &Common, a: &EvalArgs) -> Result<()> {
    // Without --config, the run's own config.json beside the checkpoint.
    let sibling = a.checkpoint.with_file_name("config.json");
    let cfg = if c.config.is_none() && sibling.exists() {
        let mut cfg = RunConfig::load(Some(&sibling), &c.overrides)?;
        if let Some(s) = c.seed {
            cfg.train.seed = s;
        }
        cfg
    } else {
        run_config(c)?
    };
    let (header, params) = checkpoint::read(&a.checkpoint)?;
    let data = load_dataset(&cfg.dataset, &c.data_dir)?;
    let ds = data.pu_dataset(cfg.label_ratio, cfg.train.seed, cfg.train.loss.delta)?;
    if params.feature_dim() != ds.feature_dim() {
        return Err(Error::Data(format!(
            "checkpoint expects {} features, dataset has {}",
            params.feature_dim(),
            ds.feature_dim()
        )));
    }
    let cache = gcn_forward(&ds.adjacency, &ds.features, &params)?;
    let s = macro_f1(&cache.y_hat, &ds.true_label, &ds.test_mask)?;
    let out = json!({
        "dataset": data.name,
        "checkpoint": a.checkpoint,
        "epoch": header.epoch,
        "complete": header.complete,
        "macro_f1": s.macro_f1,
        "f1_pos": s.f1_pos,
        "f1_neg": s.f1_neg,
        "confusion": s.confusion,
    });
    println!("{out}");
    create_dir(&c.out)?;
    write_json(&c.out.join("eval.json"), &out)
}
