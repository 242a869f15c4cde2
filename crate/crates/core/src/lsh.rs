use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded_rng;
use crate::scalar::Scalar;
use crate::vector::{random_unit_vector, FeatureVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LshParams {
    pub num_tables: usize,
    /// Bits per signature; at most 64 so a signature packs into one word.
    pub signature_bits: u32,
    pub dimension: usize,
    /// Reported in audit output only; no asymptotic bound is enforced.
    pub rho: f64,
    /// Derived per trial by the engine; set it directly for library use.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for LshParams {
    fn default() -> Self {
        LshParams {
            num_tables: 8,
            signature_bits: 10,
            dimension: 64,
            rho: 0.5,
            seed: 0,
        }
    }
}

impl LshParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_tables < 1 {
            return Err(Error::Config("lsh_params.num_tables must be >= 1".into()));
        }
        if self.signature_bits < 1 || self.signature_bits > 64 {
            return Err(Error::Config(format!(
                "lsh_params.signature_bits must lie in [1, 64] (got {})",
                self.signature_bits
            )));
        }
        if self.dimension < 2 {
            return Err(Error::Config("lsh_params.dimension must be >= 2".into()));
        }
        if !self.rho.is_finite() || self.rho <= 0.0 || self.rho >= 1.0 {
            return Err(Error::Config(format!(
                "lsh_params.rho must lie in (0, 1) (got {})",
                self.rho
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub table_index: usize,
    pub bits: u64,
}

/// Random-hyperplane LSH index: l tables of k-bit sign signatures.
///
/// Bit j of table t is 1 iff dot(v, hyperplane[t][j]) >= 0, so equal
/// vectors always share every bucket and near vectors collide with
/// probability (1 - angle/pi) per bit.
#[derive(Debug, Clone)]
pub struct LshIndex<S> {
    params: LshParams,
    hyperplanes: Vec<Vec<FeatureVector<S>>>,
    tables: Vec<HashMap<u64, Vec<u64>>>,
    insertion_seq: HashMap<u64, u64>,
    next_seq: u64,
}

/// Empty index with hyperplanes drawn deterministically from params.seed.
pub fn build_index<S: Scalar>(params: LshParams) -> Result<LshIndex<S>> {
    params.validate()?;
    let mut rng = seeded_rng(params.seed);
    let hyperplanes = (0..params.num_tables)
        .map(|_| {
            (0..params.signature_bits)
                .map(|_| random_unit_vector(params.dimension, &mut rng))
                .collect()
        })
        .collect();
    Ok(LshIndex {
        params,
        hyperplanes,
        tables: vec![HashMap::new(); params.num_tables],
        insertion_seq: HashMap::new(),
        next_seq: 0,
    })
}

impl<S: Scalar> LshIndex<S> {
    pub fn params(&self) -> &LshParams {
        &self.params
    }

    pub fn hyperplanes(&self) -> &[Vec<FeatureVector<S>>] {
        &self.hyperplanes
    }

    pub fn len(&self) -> usize {
        self.insertion_seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.insertion_seq.is_empty()
    }

    pub fn contains(&self, entry_id: u64) -> bool {
        self.insertion_seq.contains_key(&entry_id)
    }

    /// One signature per table; a pure function of the vector.
    pub fn hash_signature(&self, v: &FeatureVector<S>) -> Result<Vec<Signature>> {
        if v.dim() != self.params.dimension {
            return Err(Error::Usage(format!(
                "vector dimension {} does not match index dimension {}",
                v.dim(),
                self.params.dimension
            )));
        }
        Ok(self
            .hyperplanes
            .iter()
            .enumerate()
            .map(|(table_index, planes)| {
                let mut bits = 0u64;
                for (j, h) in planes.iter().enumerate() {
                    if v.dot(h) >= S::zero() {
                        bits |= 1 << j;
                    }
                }
                Signature { table_index, bits }
            })
            .collect())
    }

    pub fn insert(&mut self, v: &FeatureVector<S>, entry_id: u64) -> Result<()> {
        if self.insertion_seq.contains_key(&entry_id) {
            return Err(Error::Usage(format!(
                "entry id {entry_id} is already in the index"
            )));
        }
        let signatures = self.hash_signature(v)?;
        for sig in signatures {
            self.tables[sig.table_index]
                .entry(sig.bits)
                .or_default()
                .push(entry_id);
        }
        self.insertion_seq.insert(entry_id, self.next_seq);
        self.next_seq += 1;
        Ok(())
    }

    /// Removes an entry; `v` must be the vector it was inserted with.
    pub fn remove(&mut self, v: &FeatureVector<S>, entry_id: u64) -> Result<()> {
        if !self.insertion_seq.contains_key(&entry_id) {
            return Err(Error::Usage(format!(
                "entry id {entry_id} is not in the index"
            )));
        }
        let signatures = self.hash_signature(v)?;
        // Verify first so a wrong vector cannot leave the index half edited.
        for sig in &signatures {
            let present = self.tables[sig.table_index]
                .get(&sig.bits)
                .is_some_and(|bucket| bucket.contains(&entry_id));
            if !present {
                return Err(Error::Usage(format!(
                    "entry id {entry_id} was inserted with a different vector"
                )));
            }
        }
        for sig in signatures {
            let table = &mut self.tables[sig.table_index];
            let bucket = table.get_mut(&sig.bits).unwrap();
            bucket.retain(|id| *id != entry_id);
            if bucket.is_empty() {
                table.remove(&sig.bits);
            }
        }
        self.insertion_seq.remove(&entry_id);
        Ok(())
    }

    /// Union of the buckets matching `v` across all tables, deduplicated,
    /// ordered oldest insertion first, truncated to `max_candidates`.
    pub fn query(&self, v: &FeatureVector<S>, max_candidates: usize) -> Result<Vec<u64>> {
        let signatures = self.hash_signature(v)?;
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for sig in signatures {
            if let Some(bucket) = self.tables[sig.table_index].get(&sig.bits) {
                for id in bucket {
                    if seen.insert(*id) {
                        out.push(*id);
                    }
                }
            }
        }
        out.sort_by_key(|id| self.insertion_seq[id]);
        out.truncate(max_candidates);
        Ok(out)
    }
}
