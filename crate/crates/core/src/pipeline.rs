//! End-to-end experiment runs: generate or ingest, mine, select, evaluate.
//!
//! All outputs of a run are computed in memory first and written only once
//! every selector has succeeded, so a failed run leaves no partial files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{kmeans_select, ksdpp_select, sapnsp_select, top_k};
use crate::datagen::{generate_with, DataFactors, GeneratorMetadata, GeneratorSettings};
use crate::error::{Error, Result};
use crate::explicit::ExplicitModel;
use crate::format::{format_collection, format_database, format_pattern_subset, read_database};
use crate::implicit::{ImplicitConfig, ImplicitModel};
use crate::metrics::{evaluate, SubsetMetrics};
use crate::miner::{mine_nsp_with, MinerConfig, PatternCollection};
use crate::rng::{sub_seed, RNG_ALGORITHM};
use crate::sampler::{mix_weights, select_subset, MixWeights, SelectionMode, SelectionResult};
use crate::seq::{Pattern, SequenceDatabase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    Einsp,
    Ksdpp,
    Kmeans,
    Sapnsp,
    Topk,
    /// Exact-mixture sampling of the EINSP kernels.
    Exact,
}

impl Selector {
    /// The five compared selectors, in reporting order.
    pub const ALL: [Selector; 5] = [
        Selector::Einsp,
        Selector::Ksdpp,
        Selector::Kmeans,
        Selector::Sapnsp,
        Selector::Topk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Selector::Einsp => "einsp",
            Selector::Ksdpp => "ksdpp",
            Selector::Kmeans => "kmeans",
            Selector::Sapnsp => "sapnsp",
            Selector::Topk => "topk",
            Selector::Exact => "exact",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "einsp" => Ok(Selector::Einsp),
            "ksdpp" => Ok(Selector::Ksdpp),
            "kmeans" => Ok(Selector::Kmeans),
            "sapnsp" => Ok(Selector::Sapnsp),
            "topk" => Ok(Selector::Topk),
            "exact" => Ok(Selector::Exact),
            other => Err(Error::Config(format!("unknown selector {other:?}"))),
        }
    }

    fn stream(self) -> u64 {
        self as u64
    }
}

/// Kernels and weights shared by all selectors over one collection.
pub struct Models<'a> {
    pub coll: &'a PatternCollection,
    pub db: &'a SequenceDatabase,
    pub explicit: ExplicitModel,
    pub implicit: ImplicitModel,
    pub implicit_kernel: crate::dpp::DualKernel,
    pub weights: MixWeights,
}

impl<'a> Models<'a> {
    pub fn build(coll: &'a PatternCollection, db: &'a SequenceDatabase, implicit: &ImplicitConfig) -> Result<Self> {
        let explicit = ExplicitModel::build(coll, db)?;
        let implicit = ImplicitModel::build(coll, db, implicit)?;
        let implicit_kernel = implicit.kernel();
        let weights = mix_weights(coll, &implicit)?;
        Ok(Models {
            coll,
            db,
            explicit,
            implicit,
            implicit_kernel,
            weights,
        })
    }

    /// Runs `selector`; the seed is split per selector so that runs are independent.
    pub fn select(&self, selector: Selector, k: usize, seed: u64) -> Result<SelectionResult> {
        let s = sub_seed(seed, selector.stream());
        let mut result = match selector {
            Selector::Einsp | Selector::Exact => {
                let mode = if selector == Selector::Einsp {
                    SelectionMode::Algorithm1
                } else {
                    SelectionMode::ExactMixture
                };
                select_subset(&self.explicit.kernel, &self.implicit_kernel, self.weights, k, s, mode)?
            }
            Selector::Ksdpp => ksdpp_select(&self.explicit.kernel, k, s)?,
            Selector::Kmeans => kmeans_select(self.coll, &self.explicit.diversity_matrix(), k, s)?,
            Selector::Sapnsp => sapnsp_select(self.coll, self.db, k)?,
            Selector::Topk => top_k(self.coll, k)?,
        };
        result.selector = selector.name().to_string();
        Ok(result)
    }

    pub fn evaluate(&self, ids: &[usize]) -> Result<SubsetMetrics> {
        let patterns: Vec<&Pattern> = ids.iter().map(|&i| self.coll.pattern(i)).collect();
        evaluate(&patterns, self.db, &self.implicit)
    }
}

fn default_k() -> usize {
    30
}

fn default_selectors() -> Vec<Selector> {
    Selector::ALL.to_vec()
}

/// A complete, reproducible experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Sequence file to ingest; when absent, `factors` drive the generator.
    #[serde(default)]
    pub input: Option<PathBuf>,
    /// Item universe size for ingested data; defaults to the largest item.
    #[serde(default)]
    pub universe: Option<u32>,
    #[serde(default)]
    pub factors: Option<DataFactors>,
    #[serde(default)]
    pub generator: GeneratorSettings,
    #[serde(default)]
    pub miner: MinerConfig,
    #[serde(default)]
    pub implicit: ImplicitConfig,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Selection seed; defaults to the data seed.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_selectors")]
    pub selectors: Vec<Selector>,
    #[serde(default)]
    pub dump_kernel: bool,
    #[serde(default)]
    pub dump_implicit: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: None,
            universe: None,
            factors: Some(DataFactors::base(1)),
            generator: GeneratorSettings::default(),
            miner: MinerConfig::default(),
            implicit: ImplicitConfig::default(),
            k: default_k(),
            seed: None,
            selectors: default_selectors(),
            dump_kernel: false,
            dump_implicit: false,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.input, &self.factors) {
            (Some(p), _) if !p.exists() => {
                return Err(Error::Config(format!("input {} does not exist", p.display())))
            }
            (None, None) => return Err(Error::Config("either input or factors is required".into())),
            (None, Some(f)) => f.validate().map_err(|e| Error::Config(e.to_string()))?,
            _ => {}
        }
        if self.k < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.selectors.is_empty() {
            return Err(Error::Config("no selectors requested".into()));
        }
        self.miner.validate()?;
        self.implicit.validate()
    }

    pub fn selection_seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| self.factors.as_ref().map_or(0, |f| f.seed))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub selector: String,
    pub k: usize,
    pub seed: u64,
    pub metrics: SubsetMetrics,
    pub wall_ms: f64,
}

pub const METRICS_HEADER: &str = "selector,k,seed,SC,IC,AF,avg_size,avg_IRS";

impl MetricsRow {
    pub fn csv(&self) -> String {
        let m = &self.metrics;
        format!(
            "{},{},{},{},{},{},{},{}",
            self.selector, self.k, self.seed, m.sc, m.ic, m.af, m.avg_size, m.avg_irs
        )
    }
}

/// Metrics CSV. Wall times go to a separate file so reruns compare byte-exactly.
pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = format!("{METRICS_HEADER}\n");
    for r in rows {
        writeln!(out, "{}", r.csv()).unwrap();
    }
    out
}

pub fn timings_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from("selector,k,seed,wall_ms\n");
    for r in rows {
        writeln!(out, "{},{},{},{:.3}", r.selector, r.k, r.seed, r.wall_ms).unwrap();
    }
    out
}

/// Provenance written next to every run's outputs; `config` alone reproduces the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: PipelineConfig,
    pub version: String,
    pub rng: String,
    pub generator: Option<GeneratorMetadata>,
    pub n_sequences: usize,
    pub n_patterns: usize,
    pub weights: MixWeights,
    pub explicit_rank: usize,
    pub implicit_rank: usize,
    pub link_universe_size: usize,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid manifest: {e}")))
    }
}

#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub rows: Vec<MetricsRow>,
    pub selections: Vec<SelectionResult>,
    pub manifest: Manifest,
    /// Seconds per stage: data, mining, models, selection.
    pub stage_seconds: BTreeMap<String, f64>,
}

/// Loads or generates the database described by `config`.
pub fn load_database(config: &PipelineConfig) -> Result<(SequenceDatabase, Option<GeneratorMetadata>)> {
    match (&config.input, &config.factors) {
        (Some(path), _) => Ok((read_database(path, config.universe)?, None)),
        (None, Some(f)) => Ok((
            generate_with(f, &config.generator)?,
            Some(GeneratorMetadata::new(f, &config.generator)),
        )),
        (None, None) => Err(Error::Config("either input or factors is required".into())),
    }
}

/// Runs every stage and returns the report without touching the filesystem.
pub fn run_in_memory(config: &PipelineConfig) -> Result<(PipelineReport, BTreeMap<String, String>)> {
    config.validate()?;
    let mut stages = BTreeMap::new();
    let t = Instant::now();
    let (db, generator) = load_database(config)?;
    stages.insert("data".to_string(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    let coll = mine_nsp_with(&db, &config.miner)?;
    stages.insert("mining".to_string(), t.elapsed().as_secs_f64());
    if config.k > coll.len() {
        return Err(Error::InfeasibleK {
            k: config.k,
            available: coll.len(),
        });
    }

    let t = Instant::now();
    let models = Models::build(&coll, &db, &config.implicit)?;
    stages.insert("models".to_string(), t.elapsed().as_secs_f64());

    let seed = config.selection_seed();
    let t = Instant::now();
    let mut rows = Vec::new();
    let mut selections = Vec::new();
    let mut files = BTreeMap::new();
    for &sel in &config.selectors {
        let start = Instant::now();
        let result = models.select(sel, config.k, seed)?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let metrics = models.evaluate(&result.chosen)?;
        files.insert(
            format!("{}.txt", sel.name()),
            format_pattern_subset(&coll, result.chosen.iter().copied()),
        );
        rows.push(MetricsRow {
            selector: sel.name().to_string(),
            k: config.k,
            seed,
            metrics,
            wall_ms,
        });
        selections.push(result);
    }
    stages.insert("selection".to_string(), t.elapsed().as_secs_f64());

    files.insert("sequences.txt".into(), format_database(&db));
    files.insert("patterns.txt".into(), format_collection(&coll));
    files.insert("metrics.csv".into(), metrics_csv(&rows));
    files.insert("timings.csv".into(), timings_csv(&rows));
    files.insert("selections.json".into(), serde_json::to_string_pretty(&selections)?);
    if let Some(g) = &generator {
        files.insert("generator.json".into(), serde_json::to_string_pretty(g)?);
    }
    if config.dump_kernel {
        files.insert("kernel.csv".into(), models.explicit.kernel_csv());
    }
    if config.dump_implicit {
        files.insert("implicit.csv".into(), models.implicit.dump_csv());
    }
    let mut outputs: Vec<String> = files.keys().cloned().collect();
    outputs.push("manifest.json".into());
    outputs.sort();
    let manifest = Manifest {
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng: RNG_ALGORITHM.to_string(),
        generator,
        n_sequences: db.len(),
        n_patterns: coll.len(),
        weights: models.weights,
        explicit_rank: models.explicit.kernel.rank(),
        implicit_rank: models.implicit_kernel.rank(),
        link_universe_size: models.implicit.link_universe().len(),
        outputs,
    };
    files.insert("manifest.json".into(), serde_json::to_string_pretty(&manifest)?);
    Ok((
        PipelineReport {
            rows,
            selections,
            manifest,
            stage_seconds: stages,
        },
        files,
    ))
}

fn write_files(dir: &Path, files: &BTreeMap<String, String>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Runs the pipeline and writes all outputs under `out_dir`.
pub fn run_pipeline(config: &PipelineConfig, out_dir: &Path) -> Result<PipelineReport> {
    let (report, files) = run_in_memory(config)?;
    write_files(out_dir, &files)?;
    Ok(report)
}

/// One-factor-at-a-time sweep around a base configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: PipelineConfig,
    /// Factor name (`C`, `T`, `S`, `I`, `DB`, `N`) to the values it takes.
    pub factors: BTreeMap<String, Vec<f64>>,
    pub seeds: Vec<u64>,
}

impl SweepConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid sweep config: {e}")))
    }

    /// Every `(factor, value, seed)` cell with its pipeline configuration.
    pub fn cells(&self) -> Result<Vec<SweepCell>> {
        if self.factors.values().all(|v| v.is_empty()) || self.seeds.is_empty() {
            return Err(Error::Config("sweep needs at least one factor value and one seed".into()));
        }
        let base = self
            .base
            .factors
            .clone()
            .ok_or_else(|| Error::Config("sweeps need base factors".into()))?;
        let mut cells = Vec::new();
        for (name, values) in &self.factors {
            for &value in values {
                for &seed in &self.seeds {
                    let mut f = base.clone();
                    f.seed = seed;
                    set_factor(&mut f, name, value)?;
                    let mut config = self.base.clone();
                    config.input = None;
                    config.factors = Some(f);
                    config.seed = Some(seed);
                    cells.push(SweepCell {
                        factor: name.clone(),
                        value,
                        seed,
                        config,
                    });
                }
            }
        }
        Ok(cells)
    }
}

fn set_factor(f: &mut DataFactors, name: &str, value: f64) -> Result<()> {
    let as_count = |v: f64| -> Result<u64> {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as u64)
        } else {
            Err(Error::Config(format!("{name} must be a positive integer, got {v}")))
        }
    };
    match name {
        "C" => f.c = value,
        "T" => f.t = value,
        "S" => f.s = value,
        "I" => f.i = value,
        "DB" => f.db = as_count(value)? as usize,
        "N" => f.n = as_count(value)? as u32,
        other => return Err(Error::Config(format!("unknown factor {other:?}"))),
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SweepCell {
    pub factor: String,
    pub value: f64,
    pub seed: u64,
    pub config: PipelineConfig,
}

impl SweepCell {
    pub fn dir_name(&self) -> String {
        format!("{}_{}_seed{}", self.factor, self.value, self.seed)
    }
}

pub const SWEEP_HEADER: &str = "factor,value,seed,selector,k,SC,IC,AF,avg_size,avg_IRS";

/// Runs all cells on at most `jobs` threads; each cell writes to its own subdirectory.
pub fn sweep_factors(sweep: &SweepConfig, out_dir: &Path, jobs: usize) -> Result<String> {
    let cells = sweep.cells()?;
    for c in &cells {
        c.config.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<PipelineReport>> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| run_pipeline(&c.config, &out_dir.join(c.dir_name())))
            .collect()
    });
    let mut out = format!("{SWEEP_HEADER}\n");
    for (cell, report) in cells.iter().zip(results) {
        for row in report?.rows {
            let m = row.metrics;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                cell.factor, cell.value, cell.seed, row.selector, row.k, m.sc, m.ic, m.af, m.avg_size, m.avg_irs
            )
            .unwrap();
        }
    }
    let path = out_dir.join("sweep.csv");
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    fs::write(&path, &out).map_err(|e| Error::io(&path, e))?;
    Ok(out)
}

/// Parses a metrics CSV written by [`metrics_csv`].
pub fn parse_metrics_csv(text: &str) -> Result<Vec<(String, SubsetMetrics)>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let num = |i: usize| -> Result<f64> {
            f.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: format!("bad metrics row {line:?}"),
            })
        };
        rows.push((
            f[0].to_string(),
            SubsetMetrics {
                sc: num(3)?,
                ic: num(4)?,
                af: num(5)?,
                avg_size: num(6)?,
                avg_irs: num(7)?,
            },
        ));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> PipelineConfig {
        PipelineConfig {
            factors: Some(DataFactors {
                c: 4.0,
                t: 2.0,
                s: 4.0,
                i: 2.0,
                db: 60,
                n: 12,
                seed: 3,
            }),
            miner: MinerConfig {
                min_sup: 0.3,
                max_len: 3,
            },
            k: 4,
            ..Default::default()
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = tiny();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(PipelineConfig::from_json(&text).unwrap(), c);
        let minimal = PipelineConfig::from_json(r#"{"factors":{"C":10,"T":6,"S":8,"I":8,"DB":100,"N":100,"seed":1}}"#)
            .unwrap();
        assert_eq!(minimal.k, 30);
        assert_eq!(minimal.selectors.len(), 5);
        assert!(PipelineConfig::from_json(r#"{"kk": 3}"#).is_err());
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut c = tiny();
        c.k = 0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = tiny();
        c.factors = None;
        assert!(c.validate().is_err());
        let mut c = tiny();
        c.input = Some("/nonexistent/file".into());
        assert!(c.validate().is_err());
        let mut c = tiny();
        c.selectors.clear();
        assert!(c.validate().is_err());
    }

    #[test]
    fn in_memory_run_has_one_row_per_selector() {
        let (report, files) = run_in_memory(&tiny()).unwrap();
        assert_eq!(report.rows.len(), 5);
        for r in &report.selections {
            assert_eq!(r.chosen.len(), 4);
        }
        assert!(files.contains_key("manifest.json"));
        assert_eq!(files["metrics.csv"].lines().count(), 6);
        let (_, again) = run_in_memory(&tiny()).unwrap();
        assert_eq!(files["metrics.csv"], again["metrics.csv"]);
    }

    #[test]
    fn infeasible_k() {
        let mut c = tiny();
        c.k = 100_000;
        assert!(matches!(run_in_memory(&c), Err(Error::InfeasibleK { .. })));
    }

    #[test]
    fn sweep_cells() {
        let sweep = SweepConfig {
            base: tiny(),
            factors: BTreeMap::from([("C".to_string(), vec![3.0, 4.0]), ("DB".to_string(), vec![50.0])]),
            seeds: vec![1, 2],
        };
        let cells = sweep.cells().unwrap();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[0].config.factors.as_ref().unwrap().c, 3.0);
        let empty = SweepConfig {
            factors: BTreeMap::new(),
            ..sweep.clone()
        };
        assert!(matches!(empty.cells(), Err(Error::Config(_))));
        let bad = SweepConfig {
            factors: BTreeMap::from([("DB".to_string(), vec![1.5])]),
            ..sweep
        };
        assert!(bad.cells().is_err());
    }

    #[test]
    fn metrics_csv_round_trip() {
        let row = MetricsRow {
            selector: "topk".into(),
            k: 3,
            seed: 1,
            metrics: SubsetMetrics {
                sc: 0.5,
                ic: 0.25,
                af: 0.4,
                avg_size: 2.0,
                avg_irs: 0.1,
            },
            wall_ms: 1.0,
        };
        let parsed = parse_metrics_csv(&metrics_csv(&[row.clone()])).unwrap();
        assert_eq!(parsed, vec![("topk".to_string(), row.metrics)]);
    }
}
