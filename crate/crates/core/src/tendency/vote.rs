use std::collections::{BTreeMap, BTreeSet};

use ndarray::ArrayView2;
use rayon::prelude::*;

use super::indices::{hartigan, index_with, DistanceMatrix, IndexKind, Preference};
use crate::error::{Error, Result};
use crate::kmeans::{kmeans_fit, ClusterModel, Init, KMeansConfig};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct KVoteConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub indices: BTreeSet<IndexKind>,
    pub seed: u64,
    pub max_iter: usize,
    pub n_starts: usize,
    pub init: Init,
}

impl Default for KVoteConfig {
    fn default() -> Self {
        let km = KMeansConfig::default();
        KVoteConfig {
            k_min: 15,
            k_max: 20,
            indices: IndexKind::ALL.into_iter().collect(),
            seed: 0,
            max_iter: km.max_iter,
            n_starts: km.n_starts,
            init: km.init,
        }
    }
}

impl KVoteConfig {
    pub fn range(k_min: usize, k_max: usize) -> Self {
        KVoteConfig {
            k_min,
            k_max,
            ..Default::default()
        }
    }

    /// Seed used for the k-means fit at a given k.
    pub fn fit_seed(&self, k: usize) -> u64 {
        rng::derive_seed(self.seed, k as u64)
    }

    pub fn kmeans_config(&self, k: usize) -> KMeansConfig {
        KMeansConfig {
            k,
            max_iter: self.max_iter,
            n_starts: self.n_starts,
            seed: self.fit_seed(k),
            init: self.init,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoteOutcome {
    pub k_best: usize,
    /// Number of indices voting for each k in range (zero counts included).
    pub votes: BTreeMap<usize, usize>,
    pub per_index: BTreeMap<IndexKind, usize>,
    /// Index values per k; for Hartigan, the drop `H(k-1) - H(k)`.
    pub scores: BTreeMap<IndexKind, BTreeMap<usize, f64>>,
    /// Indices that were undefined for every k and did not vote.
    pub abstained: Vec<IndexKind>,
    /// Models fitted for each k in range.
    pub models: BTreeMap<usize, ClusterModel>,
}

/// Fit k-means for every k in range and let each index vote for its
/// preferred k. The most voted k wins; ties go to the smallest k.
pub fn vote_k(data: ArrayView2<'_, f64>, cfg: &KVoteConfig) -> Result<VoteOutcome> {
    let n = data.nrows();
    if cfg.k_min < 2 || cfg.k_min > cfg.k_max || cfg.k_max >= n {
        return Err(Error::domain(format!(
            "k range [{}, {}] must satisfy 2 <= k_min <= k_max < n = {n}",
            cfg.k_min, cfg.k_max
        )));
    }
    if cfg.indices.is_empty() {
        return Err(Error::domain("no validity indices selected"));
    }

    let needs_neighbours = cfg.indices.contains(&IndexKind::Hartigan);
    let (lo, hi) = if needs_neighbours {
        (cfg.k_min - 1, cfg.k_max + 1)
    } else {
        (cfg.k_min, cfg.k_max)
    };
    let fits: Vec<(usize, Result<ClusterModel>)> = (lo..=hi)
        .into_par_iter()
        .map(|k| (k, kmeans_fit(data, &cfg.kmeans_config(k))))
        .collect();
    let mut models = BTreeMap::new();
    for (k, fit) in fits {
        models.insert(k, fit?);
    }

    let dist = DistanceMatrix::new(data);
    let range = cfg.k_min..=cfg.k_max;
    let mut scores: BTreeMap<IndexKind, BTreeMap<usize, f64>> = BTreeMap::new();
    for &kind in &cfg.indices {
        let mut per_k = BTreeMap::new();
        for k in range.clone() {
            let value = if kind == IndexKind::Hartigan {
                let h_prev = hartigan(&models[&(k - 1)], &models[&k]);
                let h_here = hartigan(&models[&k], &models[&(k + 1)]);
                match (h_prev, h_here) {
                    (Ok(a), Ok(b)) => Ok(a - b),
                    (Err(e), _) | (_, Err(e)) => Err(e),
                }
            } else {
                index_with(data, &dist, &models[&k], kind)
            };
            match value {
                Ok(v) if v.is_finite() => {
                    per_k.insert(k, v);
                }
                Ok(_) | Err(Error::IndexUndefined { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        scores.insert(kind, per_k);
    }

    let mut per_index = BTreeMap::new();
    let mut abstained = Vec::new();
    for (&kind, per_k) in &scores {
        let better = |a: f64, b: f64| match kind.preference() {
            Preference::Maximize | Preference::Elbow => a > b,
            Preference::Minimize => a < b,
        };
        let choice = per_k
            .iter()
            .fold(None, |best: Option<(usize, f64)>, (&k, &v)| match best {
                Some((_, bv)) if !better(v, bv) => best,
                _ => Some((k, v)),
            });
        match choice {
            Some((k, _)) => {
                per_index.insert(kind, k);
            }
            None => abstained.push(kind),
        }
    }
    if per_index.is_empty() {
        return Err(Error::Vote(
            "every index is undefined for every k in range".into(),
        ));
    }

    let mut votes: BTreeMap<usize, usize> = range.clone().map(|k| (k, 0)).collect();
    for &k in per_index.values() {
        *votes.get_mut(&k).expect("vote inside range") += 1;
    }
    let top = votes.values().copied().max().unwrap_or(0);
    let k_best = votes
        .iter()
        .find(|(_, &c)| c == top)
        .map(|(&k, _)| k)
        .expect("non-empty range");

    models.retain(|k, _| range.contains(k));
    Ok(VoteOutcome {
        k_best,
        votes,
        per_index,
        scores,
        abstained,
        models,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn inverted_range_is_rejected() {
        let data = array![[0.0], [1.0], [2.0], [3.0], [4.0], [5.0]];
        assert!(vote_k(data.view(), &KVoteConfig::range(4, 3)).is_err());
        assert!(vote_k(data.view(), &KVoteConfig::range(2, 6)).is_err());
        assert!(vote_k(data.view(), &KVoteConfig::range(1, 3)).is_err());
    }

    #[test]
    fn three_groups_on_a_line() {
        let data = array![
            [0.0], [0.1], [0.2], [0.15],
            [5.0], [5.1], [5.2], [4.95],
            [10.0], [10.1], [10.2], [9.9]
        ];
        let cfg = KVoteConfig { seed: 3, ..KVoteConfig::range(2, 5) };
        let out = vote_k(data.view(), &cfg).unwrap();
        assert_eq!(out.k_best, 3);
        assert_eq!(out.votes.values().sum::<usize>(), out.per_index.len());
        assert_eq!(out.models.keys().copied().collect::<Vec<_>>(), vec![2, 3, 4, 5]);
        let again = vote_k(data.view(), &cfg).unwrap();
        assert_eq!(out, again);
    }
}
