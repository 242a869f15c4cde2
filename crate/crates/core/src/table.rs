use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsh::{build_index, LshIndex, LshParams};
use crate::scalar::Scalar;
use crate::vector::{cosine_distance, FeatureVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuseEntry<S> {
    pub entry_id: u64,
    pub features: FeatureVector<S>,
    pub output_label: u32,
    /// 1 at store time, +1 for every lookup this entry satisfies.
    pub frequency: u64,
    pub insert_seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LookupOutcome {
    Hit,
    Miss,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LookupResult {
    pub outcome: LookupOutcome,
    pub matched_entry: Option<u64>,
    pub distance: Option<f64>,
}

/// Capacity-bounded store of executed (input, output) pairs, searched
/// through an LSH index and evicted least-frequently-used first.
#[derive(Debug, Clone)]
pub struct ReuseTable<S> {
    capacity: usize,
    similarity_threshold: f64,
    entries: HashMap<u64, ReuseEntry<S>>,
    index: LshIndex<S>,
    next_entry_id: u64,
    next_insert_seq: u64,
    store_count: u64,
    eviction_count: u64,
    lookup_count: u64,
    candidates_scanned: u64,
}

impl<S: Scalar> ReuseTable<S> {
    pub fn new(capacity: usize, lsh_params: LshParams, similarity_threshold: f64) -> Result<Self> {
        if capacity < 1 {
            return Err(Error::Config("table_capacity must be >= 1".into()));
        }
        if !(0.0..=2.0).contains(&similarity_threshold) {
            return Err(Error::Config(format!(
                "similarity_threshold must lie in [0, 2] (got {similarity_threshold})"
            )));
        }
        Ok(ReuseTable {
            capacity,
            similarity_threshold,
            entries: HashMap::new(),
            index: build_index(lsh_params)?,
            next_entry_id: 0,
            next_insert_seq: 0,
            store_count: 0,
            eviction_count: 0,
            lookup_count: 0,
            candidates_scanned: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn similarity_threshold(&self) -> f64 {
        self.similarity_threshold
    }

    /// Total stores ever performed (equals total misses in a reuse run).
    pub fn store_count(&self) -> u64 {
        self.store_count
    }

    pub fn eviction_count(&self) -> u64 {
        self.eviction_count
    }

    pub fn lookup_count(&self) -> u64 {
        self.lookup_count
    }

    /// Total LSH candidates examined across all lookups. Divide by
    /// lookup_count to chart query cost against table size.
    pub fn candidates_scanned(&self) -> u64 {
        self.candidates_scanned
    }

    pub fn entry(&self, entry_id: u64) -> Option<&ReuseEntry<S>> {
        self.entries.get(&entry_id)
    }

    pub fn index(&self) -> &LshIndex<S> {
        &self.index
    }

    /// Returns the closest LSH candidate within the similarity threshold,
    /// bumping its frequency; distance ties go to the earliest insertion.
    /// A miss changes nothing.
    pub fn lookup(&mut self, features: &FeatureVector<S>) -> Result<LookupResult> {
        let candidates = self.index.query(features, self.capacity)?;
        self.lookup_count += 1;
        self.candidates_scanned += candidates.len() as u64;
        // Candidates arrive oldest first, so strict < keeps the earliest
        // insertion on exact distance ties; distance 0 cannot be beaten.
        let mut best: Option<(f64, u64)> = None;
        for id in candidates {
            let entry = &self.entries[&id];
            let d = cosine_distance(features, &entry.features)?.to_f64().unwrap();
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, id));
                if d == 0.0 {
                    break;
                }
            }
        }
        match best {
            Some((distance, id)) if distance <= self.similarity_threshold => {
                self.entries.get_mut(&id).unwrap().frequency += 1;
                Ok(LookupResult {
                    outcome: LookupOutcome::Hit,
                    matched_entry: Some(id),
                    distance: Some(distance),
                })
            }
            _ => Ok(LookupResult {
                outcome: LookupOutcome::Miss,
                matched_entry: None,
                distance: None,
            }),
        }
    }

    /// Inserts a fresh entry with frequency 1, evicting first when full,
    /// and returns the new entry id.
    pub fn store(&mut self, features: &FeatureVector<S>, output_label: u32) -> Result<u64> {
        if self.entries.len() == self.capacity {
            self.evict_lfu()?;
        }
        let entry_id = self.next_entry_id;
        self.next_entry_id += 1;
        let insert_seq = self.next_insert_seq;
        self.next_insert_seq += 1;
        self.index.insert(features, entry_id)?;
        self.entries.insert(
            entry_id,
            ReuseEntry {
                entry_id,
                features: features.clone(),
                output_label,
                frequency: 1,
                insert_seq,
            },
        );
        self.store_count += 1;
        Ok(entry_id)
    }

    /// Removes the minimum-frequency entry, oldest first on ties, and
    /// returns its id.
    pub fn evict_lfu(&mut self) -> Result<u64> {
        let victim = self
            .entries
            .values()
            .min_by_key(|e| (e.frequency, e.insert_seq))
            .ok_or_else(|| Error::Usage("evict_lfu called on an empty table".into()))?;
        let id = victim.entry_id;
        let features = victim.features.clone();
        self.index.remove(&features, id)?;
        self.entries.remove(&id);
        self.eviction_count += 1;
        Ok(id)
    }

    /// Entries sorted by id, for audit dumps and shadow-model comparison.
    pub fn snapshot(&self) -> Vec<ReuseEntry<S>> {
        let mut entries: Vec<ReuseEntry<S>> = self.entries.values().cloned().collect();
        entries.sort_by_key(|e| e.entry_id);
        entries
    }
}
