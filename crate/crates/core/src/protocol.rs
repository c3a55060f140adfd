//! Low-resource splits and pre-training fraction sampling.
//!
//! Both draw a single seeded permutation of the training ids and take a
//! prefix, so with a fixed seed smaller selections are subsets of larger ones.
//! Selected ids are returned in dataset order; manifests list them sorted.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Dataset, Split};
use crate::mask::{entry_seed, PRNG_NAME};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("dataset has no training entries")]
    EmptyTrain,
    #[error("k_percent must lie in (0, 100], got {0}")]
    InvalidPercent(f64),
    #[error("fraction must lie in (0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("selecting {fraction} of {train} training entries yields nothing")]
    EmptySelection { fraction: f64, train: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// Pre-train and fine-tune on the same k% subset.
    Same,
    /// Pre-train on the remaining (100 - k)%.
    Complement,
    /// Pre-train on all training entries.
    Full,
}

impl FromStr for SplitMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "same" => Ok(SplitMode::Same),
            "complement" => Ok(SplitMode::Complement),
            "full" => Ok(SplitMode::Full),
            other => Err(format!(
                "unknown mode {other:?} (expected same, complement or full)"
            )),
        }
    }
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitMode::Same => "same",
            SplitMode::Complement => "complement",
            SplitMode::Full => "full",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub k_percent: f64,
    pub mode: SplitMode,
    pub seed: u64,
    /// Sample within each category separately.
    #[serde(default)]
    pub stratified: bool,
}

impl SplitPlan {
    pub fn new(k_percent: f64, mode: SplitMode, seed: u64) -> Result<Self, ProtocolError> {
        if !(k_percent > 0.0 && k_percent <= 100.0) {
            return Err(ProtocolError::InvalidPercent(k_percent));
        }
        Ok(Self {
            k_percent,
            mode,
            seed,
            stratified: false,
        })
    }
}

/// `floor(fraction * n)`, computed so that products that are integers in exact
/// arithmetic (e.g. 0.29 * 100) are not rounded down by binary error.
pub fn selection_size(fraction: f64, n: usize) -> usize {
    let x = fraction * n as f64;
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        x.floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub k_percent: f64,
    pub mode: SplitMode,
    pub seed: u64,
    pub stratified: bool,
    pub prng: String,
    pub train_size: usize,
    pub finetune_count: usize,
    pub pretrain_count: usize,
    pub finetune_ids: Vec<String>,
    pub pretrain_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowResourceSplit {
    pub pretrain_ids: Vec<String>,
    pub finetune_ids: Vec<String>,
    pub manifest: SplitManifest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleManifest {
    pub fraction: f64,
    pub seed: u64,
    pub prng: String,
    pub train_size: usize,
    pub count: usize,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionSample {
    pub ids: Vec<String>,
    pub manifest: SampleManifest,
}

fn train_ids(dataset: &Dataset) -> Result<Vec<&str>, ProtocolError> {
    let ids: Vec<&str> = dataset
        .split(Split::Train)
        .map(|e| e.entry_id.as_str())
        .collect();
    if ids.is_empty() {
        return Err(ProtocolError::EmptyTrain);
    }
    Ok(ids)
}

fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

/// Marks the first `selection_size(fraction, n)` positions of the seeded
/// permutation as selected.
fn select(n: usize, fraction: f64, seed: u64) -> Vec<bool> {
    let mut chosen = vec![false; n];
    for &i in permutation(n, seed).iter().take(selection_size(fraction, n)) {
        chosen[i] = true;
    }
    chosen
}

/// Per-category selection. Quotas are floors of each category's share with the
/// leftover handed out by largest remainder, so the total matches the
/// unstratified count.
fn select_stratified(dataset: &Dataset, fraction: f64, seed: u64) -> Vec<bool> {
    let mut by_category: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, e) in dataset.split(Split::Train).enumerate() {
        by_category
            .entry(e.category.as_deref().unwrap_or(""))
            .or_default()
            .push(i);
    }
    let n: usize = by_category.values().map(Vec::len).sum();
    let total = selection_size(fraction, n);

    let mut quotas: Vec<(usize, f64)> = by_category
        .values()
        .map(|members| {
            let exact = fraction * members.len() as f64;
            let q = selection_size(fraction, members.len());
            (q, exact - q as f64)
        })
        .collect();
    let mut leftover = total.saturating_sub(quotas.iter().map(|q| q.0).sum());
    let mut by_remainder: Vec<usize> = (0..quotas.len()).collect();
    by_remainder.sort_by(|&a, &b| quotas[b].1.total_cmp(&quotas[a].1).then(a.cmp(&b)));
    for k in by_remainder {
        if leftover == 0 {
            break;
        }
        quotas[k].0 += 1;
        leftover -= 1;
    }

    let mut chosen = vec![false; n];
    for ((category, members), (quota, _)) in by_category.iter().zip(quotas) {
        let order = permutation(members.len(), entry_seed(seed, category));
        for &j in order.iter().take(quota) {
            chosen[members[j]] = true;
        }
    }
    chosen
}

fn sorted(ids: &[String]) -> Vec<String> {
    let mut out = ids.to_vec();
    out.sort();
    out
}

pub fn split_low_resource(
    dataset: &Dataset,
    plan: &SplitPlan,
) -> Result<LowResourceSplit, ProtocolError> {
    if !(plan.k_percent > 0.0 && plan.k_percent <= 100.0) {
        return Err(ProtocolError::InvalidPercent(plan.k_percent));
    }
    let ids = train_ids(dataset)?;
    let fraction = plan.k_percent / 100.0;
    let chosen = if plan.stratified {
        select_stratified(dataset, fraction, plan.seed)
    } else {
        select(ids.len(), fraction, plan.seed)
    };

    let pick = |want: bool| -> Vec<String> {
        ids.iter()
            .zip(&chosen)
            .filter(|(_, &c)| c == want)
            .map(|(id, _)| id.to_string())
            .collect()
    };
    let finetune_ids = pick(true);
    if finetune_ids.is_empty() {
        return Err(ProtocolError::EmptySelection {
            fraction,
            train: ids.len(),
        });
    }
    let pretrain_ids = match plan.mode {
        SplitMode::Same => finetune_ids.clone(),
        SplitMode::Complement => pick(false),
        SplitMode::Full => ids.iter().map(|s| s.to_string()).collect(),
    };
    let manifest = SplitManifest {
        k_percent: plan.k_percent,
        mode: plan.mode,
        seed: plan.seed,
        stratified: plan.stratified,
        prng: PRNG_NAME.to_string(),
        train_size: ids.len(),
        finetune_count: finetune_ids.len(),
        pretrain_count: pretrain_ids.len(),
        finetune_ids: sorted(&finetune_ids),
        pretrain_ids: sorted(&pretrain_ids),
    };
    Ok(LowResourceSplit {
        pretrain_ids,
        finetune_ids,
        manifest,
    })
}

pub fn sample_fraction(
    dataset: &Dataset,
    fraction: f64,
    seed: u64,
) -> Result<FractionSample, ProtocolError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(ProtocolError::InvalidFraction(fraction));
    }
    let all = train_ids(dataset)?;
    let ids: Vec<String> = all
        .iter()
        .zip(select(all.len(), fraction, seed))
        .filter(|(_, c)| *c)
        .map(|(id, _)| id.to_string())
        .collect();
    if ids.is_empty() {
        return Err(ProtocolError::EmptySelection {
            fraction,
            train: all.len(),
        });
    }
    let manifest = SampleManifest {
        fraction,
        seed,
        prng: PRNG_NAME.to_string(),
        train_size: all.len(),
        count: ids.len(),
        ids: sorted(&ids),
    };
    Ok(FractionSample { ids, manifest })
}

#[cfg(test)]
pub(crate) mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::graph::{build_graph, Triple};
    use crate::ingest::DatasetEntry;

    pub(crate) fn synthetic_train(n: usize, categories: usize) -> Dataset {
        let graph = build_graph(vec![Triple::new("A", "r", "B").unwrap()]).unwrap();
        let entries = (0..n)
            .map(|i| DatasetEntry {
                entry_id: format!("id{i:06}"),
                graph: graph.clone(),
                references: vec!["A r B.".into()],
                split: Split::Train,
                category: (categories > 0).then(|| format!("cat{}", i % categories)),
            })
            .collect();
        Dataset::new("synthetic", entries).unwrap()
    }

    #[test]
    fn selection_size_floors() {
        assert_eq!(selection_size(0.05, 35_426), 1_771);
        assert_eq!(selection_size(0.10, 35_426), 3_542);
        assert_eq!(selection_size(0.25, 35_426), 8_856);
        assert_eq!(selection_size(0.29, 100), 29);
        assert_eq!(selection_size(1.0, 7), 7);
        assert_eq!(selection_size(0.5, 3), 1);
    }

    #[test]
    fn identity_cases() {
        let d = synthetic_train(50, 0);
        let all: Vec<String> = d.entries().iter().map(|e| e.entry_id.clone()).collect();
        let s = split_low_resource(&d, &SplitPlan::new(100.0, SplitMode::Same, 1).unwrap()).unwrap();
        assert_eq!(s.finetune_ids, all);
        assert_eq!(s.pretrain_ids, all);
        assert_eq!(sample_fraction(&d, 1.0, 9).unwrap().ids, all);
    }

    #[test]
    fn complement_and_full() {
        let d = synthetic_train(200, 0);
        let c = split_low_resource(&d, &SplitPlan::new(5.0, SplitMode::Complement, 3).unwrap()).unwrap();
        assert_eq!(c.finetune_ids.len(), 10);
        assert_eq!(c.pretrain_ids.len(), 190);
        let f: HashSet<_> = c.finetune_ids.iter().collect();
        assert!(c.pretrain_ids.iter().all(|id| !f.contains(id)));
        let full = split_low_resource(&d, &SplitPlan::new(5.0, SplitMode::Full, 3).unwrap()).unwrap();
        assert_eq!(full.pretrain_ids.len(), 200);
        assert_eq!(full.finetune_ids, c.finetune_ids);
    }

    #[test]
    fn errors() {
        let d = synthetic_train(10, 0);
        assert_eq!(
            split_low_resource(&d, &SplitPlan::new(5.0, SplitMode::Same, 0).unwrap()),
            Err(ProtocolError::EmptySelection {
                fraction: 0.05,
                train: 10
            })
        );
        assert!(SplitPlan::new(0.0, SplitMode::Same, 0).is_err());
        assert!(SplitPlan::new(100.5, SplitMode::Same, 0).is_err());
        assert_eq!(
            sample_fraction(&d, 0.0, 0),
            Err(ProtocolError::InvalidFraction(0.0))
        );
        assert_eq!(
            sample_fraction(&Dataset::default(), 0.5, 0),
            Err(ProtocolError::EmptyTrain)
        );
    }

    #[test]
    fn ids_in_dataset_order_and_deterministic() {
        let d = synthetic_train(1000, 0);
        let a = sample_fraction(&d, 0.25, 11).unwrap();
        let b = sample_fraction(&d, 0.25, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.ids.len(), 250);
        assert!(a.ids.windows(2).all(|w| w[0] < w[1]));
        assert_ne!(a.ids, sample_fraction(&d, 0.25, 12).unwrap().ids);
    }

    #[test]
    fn stratified_counts() {
        let d = synthetic_train(1003, 7);
        let mut plan = SplitPlan::new(10.0, SplitMode::Same, 5).unwrap();
        plan.stratified = true;
        let s = split_low_resource(&d, &plan).unwrap();
        assert_eq!(s.finetune_ids.len(), 100);
        let mut per_cat: BTreeMap<String, usize> = BTreeMap::new();
        for e in d.entries().iter().filter(|e| s.finetune_ids.contains(&e.entry_id)) {
            *per_cat.entry(e.category.clone().unwrap()).or_default() += 1;
        }
        assert_eq!(per_cat.len(), 7);
        assert!(per_cat.values().all(|&c| (14..=15).contains(&c)), "{per_cat:?}");
    }
}
