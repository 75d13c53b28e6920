use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use nspdpp_core::datagen::{generate_with, DataFactors, GeneratorMetadata, GeneratorSettings};
use nspdpp_core::format::{
    format_pattern_subset, read_database, read_patterns, write_collection, write_database,
};
use nspdpp_core::implicit::ImplicitConfig;
use nspdpp_core::miner::{mine_nsp_with, MinerConfig, PatternCollection};
use nspdpp_core::pipeline::{
    metrics_csv, run_pipeline, sweep_factors, Manifest, MetricsRow, Models, PipelineConfig,
    Selector, SweepConfig,
};
use nspdpp_core::{Error, Result, SequenceDatabase};

#[derive(Parser)]
#[command(name = "nspdpp", version, about = "Negative sequential pattern mining and DPP subset selection")]
struct Cli {
    /// Worker threads.
    #[arg(long, global = true, env = "NSPDPP_JOBS", default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic sequence database.
    Gen(GenArgs),
    /// Mine the NSP collection of a sequence file.
    Mine(MineArgs),
    /// Select k patterns from a mined collection.
    Select(SelectArgs),
    /// Evaluate selected pattern files.
    Eval(EvalArgs),
    /// Run generate/ingest, mine, select and evaluate end to end.
    Pipeline(PipelineArgs),
    /// Run a one-factor-at-a-time data factor sweep.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(short = 'C', default_value_t = 10.0)]
    c: f64,
    #[arg(short = 'T', default_value_t = 6.0)]
    t: f64,
    #[arg(short = 'S', default_value_t = 8.0)]
    s: f64,
    #[arg(short = 'I', default_value_t = 8.0)]
    i: f64,
    #[arg(long, default_value_t = 1000)]
    db: usize,
    #[arg(short = 'N', default_value_t = 100)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    zipf: Option<f64>,
    #[arg(long)]
    corruption: Option<f64>,
    /// Sequence file to write; metadata goes to `<out>.meta.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    universe: Option<u32>,
    #[arg(long, default_value_t = 0.30)]
    min_sup: f64,
    #[arg(long, default_value_t = 8)]
    max_len: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    /// Mined pattern collection.
    #[arg(long)]
    patterns: PathBuf,
    /// Sequence file the collection was mined from.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    universe: Option<u32>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    epsilon: f64,
    #[arg(long)]
    min_link_sup: Option<f64>,
    #[arg(long, default_value_t = 2)]
    max_link_size: usize,
}

impl ModelArgs {
    fn load(&self) -> Result<(PatternCollection, SequenceDatabase, ImplicitConfig)> {
        let coll = read_patterns(&self.patterns)?.into_collection()?;
        let db = read_database(&self.input, self.universe)?;
        let cfg = ImplicitConfig {
            epsilon: self.epsilon,
            min_link_sup: self.min_link_sup,
            max_link_size: self.max_link_size,
            ..Default::default()
        };
        Ok((coll, db, cfg))
    }
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// einsp, exact, ksdpp, kmeans, sapnsp or topk.
    #[arg(long, default_value = "einsp")]
    mode: String,
    /// Selected pattern file; diagnostics go to `<out>.json`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    dump_kernel: Option<PathBuf>,
    #[arg(long)]
    dump_implicit: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Selected pattern files; each row is labelled with the file stem.
    #[arg(long, required = true, num_args = 1..)]
    selected: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Metrics CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// JSON pipeline config.
    #[arg(long, conflicts_with = "manifest")]
    config: Option<PathBuf>,
    /// Manifest of an earlier run to reproduce.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    min_sup: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    /// Comma-separated selectors, or `all`.
    #[arg(long)]
    modes: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn write(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn gen(a: &GenArgs) -> Result<()> {
    let factors = DataFactors {
        c: a.c,
        t: a.t,
        s: a.s,
        i: a.i,
        db: a.db,
        n: a.n,
        seed: a.seed,
    };
    let mut settings = GeneratorSettings::default();
    if let Some(z) = a.zipf {
        settings.zipf_exponent = z;
    }
    if let Some(c) = a.corruption {
        settings.corruption = c;
    }
    let db = generate_with(&factors, &settings)?;
    write_database(&a.out, &db)?;
    let meta = GeneratorMetadata::new(&factors, &settings);
    write(&sidecar(&a.out, ".meta.json"), &serde_json::to_string_pretty(&meta)?)?;
    eprintln!("wrote {} sequences to {}", db.len(), a.out.display());
    Ok(())
}

fn mine(a: &MineArgs) -> Result<()> {
    let db = read_database(&a.input, a.universe)?;
    let cfg = MinerConfig {
        min_sup: a.min_sup,
        max_len: a.max_len,
    };
    let coll = mine_nsp_with(&db, &cfg)?;
    write_collection(&a.out, &coll)?;
    eprintln!("wrote {} patterns to {}", coll.len(), a.out.display());
    Ok(())
}

fn select(a: &SelectArgs) -> Result<()> {
    let selector = Selector::parse(&a.mode)?;
    let (coll, db, cfg) = a.model.load()?;
    let models = Models::build(&coll, &db, &cfg)?;
    let start = Instant::now();
    let result = models.select(selector, a.k, a.seed)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let diagnostics = json!({
        "selection": result,
        "weights": models.weights,
        "explicit_rank": models.explicit.kernel.rank(),
        "implicit_rank": models.implicit_kernel.rank(),
        "explicit_dim": models.explicit.kernel.dim(),
        "implicit_dim": models.implicit_kernel.dim(),
        "wall_ms": wall_ms,
    });
    if let Some(p) = &a.dump_kernel {
        write(p, &models.explicit.kernel_csv())?;
    }
    if let Some(p) = &a.dump_implicit {
        write(p, &models.implicit.dump_csv())?;
    }
    write(&a.out, &format_pattern_subset(&coll, result.chosen.iter().copied()))?;
    write(&sidecar(&a.out, ".json"), &serde_json::to_string_pretty(&diagnostics)?)?;
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<()> {
    let (coll, db, cfg) = a.model.load()?;
    let models = Models::build(&coll, &db, &cfg)?;
    let mut rows = Vec::new();
    for path in &a.selected {
        let file = read_patterns(path)?;
        let ids = file
            .entries
            .iter()
            .map(|(p, _)| {
                coll.id_of(p)
                    .ok_or_else(|| Error::Config(format!("{} contains {p}, which is not in the collection", path.display())))
            })
            .collect::<Result<Vec<_>>>()?;
        let start = Instant::now();
        let metrics = models.evaluate(&ids)?;
        rows.push(MetricsRow {
            selector: path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned()),
            k: ids.len(),
            seed: a.seed,
            metrics,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    let csv = metrics_csv(&rows);
    match &a.out {
        Some(p) => write(p, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn pipeline(a: &PipelineArgs) -> Result<()> {
    let mut config = match (&a.config, &a.manifest) {
        (Some(p), _) => PipelineConfig::read(p)?,
        (None, Some(p)) => Manifest::read(p)?.config,
        (None, None) => PipelineConfig::default(),
    };
    if let Some(k) = a.k {
        config.k = k;
    }
    if let Some(s) = a.seed {
        config.seed = Some(s);
    }
    if let Some(m) = a.min_sup {
        config.miner.min_sup = m;
    }
    if let Some(e) = a.epsilon {
        config.implicit.epsilon = e;
    }
    if let Some(modes) = &a.modes {
        config.selectors = if modes == "all" {
            Selector::ALL.to_vec()
        } else {
            modes.split(',').map(|m| Selector::parse(m.trim())).collect::<Result<_>>()?
        };
    }
    let report = run_pipeline(&config, &a.out)?;
    for (stage, secs) in &report.stage_seconds {
        eprintln!("{stage}: {secs:.2}s");
    }
    print!("{}", metrics_csv(&report.rows));
    Ok(())
}

fn sweep(a: &SweepArgs, jobs: usize) -> Result<()> {
    let config = SweepConfig::read(&a.config)?;
    print!("{}", sweep_factors(&config, &a.out, jobs)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if cli.jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    // Ignored when a pool already exists, e.g. under a test harness.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Mine(a) => mine(a),
        Command::Select(a) => select(a),
        Command::Eval(a) => eval(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Sweep(a) => sweep(a, cli.jobs),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
