//! IBM Quest style synthetic sequence generator.
//!
//! A small pool of "potential" sequences is drawn first (Poisson lengths,
//! Poisson element widths, Zipf-weighted items). Each output sequence is
//! then assembled by splicing pool members chosen with exponential weights,
//! corrupting items, and resizing every element to a Poisson target width.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derived, RNG_ALGORITHM};
use crate::seq::{DataSequence, Item, SequenceDatabase};

/// Generator data factors, named as in the C10_T6_S8_I8_DB10k_N0.1k convention.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataFactors {
    /// Average elements per sequence.
    #[serde(rename = "C")]
    pub c: f64,
    /// Average items per element.
    #[serde(rename = "T")]
    pub t: f64,
    /// Average length of potential sequences.
    #[serde(rename = "S")]
    pub s: f64,
    /// Average items per element in potential sequences.
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "DB")]
    pub db: usize,
    #[serde(rename = "N")]
    pub n: u32,
    pub seed: u64,
}

impl DataFactors {
    /// The scaled base dataset C10_T6_S8_I8_DB1k_N0.1k.
    pub fn base(seed: u64) -> Self {
        DataFactors {
            c: 10.0,
            t: 6.0,
            s: 8.0,
            i: 8.0,
            db: 1000,
            n: 100,
            seed,
        }
    }

    pub fn name(&self) -> String {
        format!(
            "C{}_T{}_S{}_I{}_DB{}_N{}",
            self.c, self.t, self.s, self.i, self.db, self.n
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("C", self.c), ("T", self.t), ("S", self.s), ("I", self.i)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidFactors(format!("{name} must be positive, got {v}")));
            }
        }
        if self.db < 1 {
            return Err(Error::InvalidFactors("DB must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidFactors("N must be at least 2".into()));
        }
        if self.t > self.n as f64 {
            return Err(Error::InvalidFactors(format!(
                "T={} exceeds the item universe N={}",
                self.t, self.n
            )));
        }
        Ok(())
    }
}

/// Knobs not covered by the data factors; recorded in generator metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSettings {
    /// Per-item probability of replacing a potential-sequence item by noise.
    pub corruption: f64,
    pub zipf_exponent: f64,
    /// Potential sequence pool size; `None` means `max(1, round(N/10))`.
    pub pool_size: Option<usize>,
}

impl Default for GeneratorSettings {
    fn default() -> Self {
        GeneratorSettings {
            corruption: 0.25,
            zipf_exponent: 1.0,
            pool_size: None,
        }
    }
}

impl GeneratorSettings {
    pub fn resolved_pool_size(&self, n: u32) -> usize {
        self.pool_size
            .unwrap_or_else(|| ((n as f64 / 10.0).round() as usize).max(1))
    }
}

/// Sidecar metadata written next to generated sequence files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMetadata {
    pub name: String,
    pub factors: DataFactors,
    pub settings: GeneratorSettings,
    pub pool_size: usize,
    pub rng: String,
    pub generator_version: String,
}

impl GeneratorMetadata {
    pub fn new(factors: &DataFactors, settings: &GeneratorSettings) -> Self {
        GeneratorMetadata {
            name: factors.name(),
            factors: factors.clone(),
            settings: settings.clone(),
            pool_size: settings.resolved_pool_size(factors.n),
            rng: RNG_ALGORITHM.to_string(),
            generator_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

struct ItemSampler {
    zipf: Zipf<f64>,
    /// rank (0-based) -> item id
    ranked: Vec<Item>,
}

impl ItemSampler {
    fn new<R: Rng>(n: u32, exponent: f64, rng: &mut R) -> Result<Self> {
        let zipf = Zipf::new(n as f64, exponent)
            .map_err(|e| Error::InvalidFactors(format!("zipf: {e}")))?;
        let mut ranked: Vec<Item> = (1..=n).collect();
        ranked.shuffle(rng);
        Ok(ItemSampler { zipf, ranked })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Item {
        let rank = self.zipf.sample(rng) as usize;
        self.ranked[rank.clamp(1, self.ranked.len()) - 1]
    }

    /// Fills `items` up to `size` distinct items.
    fn fill<R: Rng>(&self, items: &mut Vec<Item>, size: usize, rng: &mut R) {
        let mut attempts = 0;
        while items.len() < size {
            let item = if attempts < 16 * size {
                self.draw(rng)
            } else {
                // heavy-tailed draws stall near saturation; fall back to uniform
                *self.ranked.choose(rng).unwrap()
            };
            attempts += 1;
            if !items.contains(&item) {
                items.push(item);
            }
        }
    }
}

fn poisson_at_least_one<R: Rng>(mean: f64, rng: &mut R) -> usize {
    let p = Poisson::new(mean).expect("positive mean");
    (p.sample(rng) as usize).max(1)
}

/// Generates a database with the default generator settings.
pub fn generate(f: &DataFactors) -> Result<SequenceDatabase> {
    generate_with(f, &GeneratorSettings::default())
}

pub fn generate_with(f: &DataFactors, settings: &GeneratorSettings) -> Result<SequenceDatabase> {
    f.validate()?;
    if !(0.0..=1.0).contains(&settings.corruption) {
        return Err(Error::InvalidFactors("corruption must lie in [0, 1]".into()));
    }
    let n = f.n as usize;

    let mut pool_rng = derived(f.seed, 0);
    let items = ItemSampler::new(f.n, settings.zipf_exponent, &mut pool_rng)?;
    let pool_size = settings.resolved_pool_size(f.n);
    let pool: Vec<Vec<Vec<Item>>> = (0..pool_size)
        .map(|_| {
            let len = poisson_at_least_one(f.s, &mut pool_rng);
            (0..len)
                .map(|_| {
                    let width = poisson_at_least_one(f.i, &mut pool_rng).min(n);
                    let mut e = Vec::with_capacity(width);
                    items.fill(&mut e, width, &mut pool_rng);
                    e
                })
                .collect()
        })
        .collect();
    let weights: Vec<f64> = (0..pool_size)
        .map(|_| Exp1.sample(&mut pool_rng))
        .collect();
    let total: f64 = weights.iter().sum();

    let pick = |rng: &mut crate::rng::NspRng| {
        let mut u = rng.random::<f64>() * total;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                return i;
            }
            u -= w;
        }
        pool_size - 1
    };

    let mut sequences = Vec::with_capacity(f.db);
    for sid in 0..f.db {
        let mut rng = derived(f.seed, sid as u64 + 1);
        let target_len = poisson_at_least_one(f.c, &mut rng);
        let mut elements: Vec<Vec<Item>> = Vec::with_capacity(target_len);
        let mut source = &pool[pick(&mut rng)];
        let mut cursor = 0;
        while elements.len() < target_len {
            if cursor == source.len() {
                source = &pool[pick(&mut rng)];
                cursor = 0;
            }
            let mut e: Vec<Item> = Vec::new();
            for &item in &source[cursor] {
                let item = if rng.random::<f64>() < settings.corruption {
                    items.draw(&mut rng)
                } else {
                    item
                };
                if !e.contains(&item) {
                    e.push(item);
                }
            }
            cursor += 1;
            let width = poisson_at_least_one(f.t, &mut rng).min(n);
            if e.len() > width {
                e.shuffle(&mut rng);
                e.truncate(width);
            } else {
                items.fill(&mut e, width, &mut rng);
            }
            elements.push(e);
        }
        sequences.push(DataSequence::new(elements)?);
    }
    SequenceDatabase::new(sequences, f.n)
}
