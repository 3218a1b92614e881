//! Fair augmentation: materialize the similar sub-population of each record,
//! i.e. every individual that shares its non-sensitive features and differs
//! only in sensitive attributes.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Record};
use super::schema::SchemaConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AugmentMode {
    /// Cartesian product of every sensitive domain.
    Full,
    /// Cartesian product of `{min, max}` of every sensitive domain.
    Extremes,
    /// Caller-supplied sensitive index vectors.
    Explicit(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationStrategy {
    pub mode: AugmentMode,
    /// Upper bound on members per sub-population (origin included).
    pub cap: Option<usize>,
    pub seed: u64,
}

impl AugmentationStrategy {
    pub fn full() -> Self {
        Self {
            mode: AugmentMode::Full,
            cap: None,
            seed: 0,
        }
    }

    pub fn extremes() -> Self {
        Self {
            mode: AugmentMode::Extremes,
            cap: None,
            seed: 0,
        }
    }

    pub fn with_cap(mut self, cap: usize, seed: u64) -> Self {
        self.cap = Some(cap);
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.cap {
            Some(c) if c < 2 => Err(Error::config(format!(
                "augmentation cap must be >= 2, got {c}"
            ))),
            _ => Ok(()),
        }
    }
}

/// A record together with its similar counterparts; `members[0]` is the
/// origin and every member carries the origin's label.
#[derive(Debug, Clone, PartialEq)]
pub struct SubPopulation {
    pub members: Vec<Record>,
}

impl SubPopulation {
    pub fn origin(&self) -> &Record {
        &self.members[0]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The degenerate sub-population holding only the record itself.
    pub fn singleton(record: &Record) -> Self {
        Self {
            members: vec![record.clone()],
        }
    }
}

fn cartesian(choices: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(choices.len())];
    for col in choices {
        let mut next = Vec::with_capacity(out.len() * col.len());
        for prefix in &out {
            for &c in col {
                let mut p = prefix.clone();
                p.push(c);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn record_seed(record: &Record, seed: u64) -> u64 {
    // splitmix64 over the record's bit patterns
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for v in record.x.iter().chain(&record.a) {
        h ^= v.to_bits();
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h ^= h >> 31;
    }
    h
}

pub fn enumerate_subpopulation(
    record: &Record,
    schema: &SchemaConfig,
    strategy: &AugmentationStrategy,
) -> Result<SubPopulation> {
    strategy.validate()?;
    let domains = schema.sensitive();
    let origin_idx = record.sensitive_indices(schema);

    let candidates = match &strategy.mode {
        AugmentMode::Full => cartesian(
            &domains
                .iter()
                .map(|d| (0..d.arity()).collect())
                .collect::<Vec<_>>(),
        ),
        AugmentMode::Extremes => cartesian(
            &domains
                .iter()
                .map(|d| {
                    let mut v = vec![0, d.arity() - 1];
                    v.dedup();
                    v
                })
                .collect::<Vec<_>>(),
        ),
        AugmentMode::Explicit(list) => {
            for v in list {
                if v.len() != domains.len() || v.iter().zip(domains).any(|(&i, d)| i >= d.arity()) {
                    return Err(Error::config(format!(
                        "explicit sensitive vector {v:?} out of domain"
                    )));
                }
            }
            list.clone()
        }
    };

    let mut seen = std::collections::HashSet::new();
    seen.insert(origin_idx.clone());
    let mut others: Vec<Vec<usize>> = candidates
        .into_iter()
        .filter(|c| seen.insert(c.clone()))
        .collect();

    if let Some(cap) = strategy.cap {
        if others.len() + 1 > cap {
            let mut rng = ChaCha8Rng::seed_from_u64(record_seed(record, strategy.seed));
            let mut keep = sample(&mut rng, others.len(), cap - 1).into_vec();
            keep.sort_unstable();
            others = keep.into_iter().map(|i| others[i].clone()).collect();
        }
    }

    let mut members = Vec::with_capacity(others.len() + 1);
    members.push(record.clone());
    for idx in others {
        members.push(Record {
            x: record.x.clone(),
            a: idx.iter().zip(domains).map(|(&i, d)| d.encode(i)).collect(),
            y: record.y,
        });
    }
    Ok(SubPopulation { members })
}

/// One sub-population per record, in dataset order.
pub fn augment(dataset: &Dataset, strategy: &AugmentationStrategy) -> Result<Vec<SubPopulation>> {
    dataset
        .records
        .iter()
        .map(|r| enumerate_subpopulation(r, &dataset.schema, strategy))
        .collect()
}
