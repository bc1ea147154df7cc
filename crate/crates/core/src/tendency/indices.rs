//! Internal validity indices: judge a partition from the data alone.

use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::kmeans::{sq_dist, ClusterModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndexKind {
    CalinskiHarabasz,
    DaviesBouldin,
    Silhouette,
    Dunn,
    Hartigan,
}

/// How an index expresses its preferred number of clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    Maximize,
    Minimize,
    /// Largest drop of the index between consecutive k.
    Elbow,
}

impl IndexKind {
    pub const ALL: [IndexKind; 5] = [
        IndexKind::CalinskiHarabasz,
        IndexKind::DaviesBouldin,
        IndexKind::Silhouette,
        IndexKind::Dunn,
        IndexKind::Hartigan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IndexKind::CalinskiHarabasz => "calinski_harabasz",
            IndexKind::DaviesBouldin => "davies_bouldin",
            IndexKind::Silhouette => "silhouette",
            IndexKind::Dunn => "dunn",
            IndexKind::Hartigan => "hartigan",
        }
    }

    pub fn preference(self) -> Preference {
        match self {
            IndexKind::CalinskiHarabasz | IndexKind::Silhouette | IndexKind::Dunn => {
                Preference::Maximize
            }
            IndexKind::DaviesBouldin => Preference::Minimize,
            IndexKind::Hartigan => Preference::Elbow,
        }
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IndexKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| Error::domain(format!("unknown validity index `{}`", s.trim())))
    }
}

/// Dense symmetric matrix of Euclidean distances between rows.
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(data: ArrayView2<'_, f64>) -> Self {
        let n = data.nrows();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = sq_dist(data.row(i), data.row(j)).sqrt();
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        DistanceMatrix { n, d }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

fn undefined(index: IndexKind, reason: impl Into<String>) -> Error {
    Error::IndexUndefined {
        index: index.as_str(),
        reason: reason.into(),
    }
}

fn check_model(data: ArrayView2<'_, f64>, model: &ClusterModel) -> Result<()> {
    if model.assignment.len() != data.nrows() || model.centroids.ncols() != data.ncols() {
        return Err(Error::domain("model was not fitted on this matrix"));
    }
    if model.sizes.contains(&0) {
        return Err(Error::domain("model has an empty cluster"));
    }
    Ok(())
}

/// Score a fitted partition with one of the pointwise indices.
///
/// Hartigan compares the fits at k and k+1 and is computed by [`hartigan`].
pub fn validity_index(data: ArrayView2<'_, f64>, model: &ClusterModel, kind: IndexKind) -> Result<f64> {
    check_model(data, model)?;
    let dist = DistanceMatrix::new(data);
    index_with(data, &dist, model, kind)
}

pub(crate) fn index_with(
    data: ArrayView2<'_, f64>,
    dist: &DistanceMatrix,
    model: &ClusterModel,
    kind: IndexKind,
) -> Result<f64> {
    let (n, k) = (data.nrows(), model.k);
    if k < 2 {
        return Err(undefined(kind, "needs at least two clusters"));
    }
    match kind {
        IndexKind::CalinskiHarabasz => {
            if k >= n || model.within_ss <= 0.0 {
                return Err(undefined(kind, "zero within-cluster dispersion"));
            }
            Ok((model.between_ss / (k - 1) as f64) / (model.within_ss / (n - k) as f64))
        }
        IndexKind::DaviesBouldin => {
            let mut scatter = vec![0.0; k];
            for (row, &c) in data.rows().into_iter().zip(&model.assignment) {
                scatter[c] += sq_dist(row, model.centroids.row(c)).sqrt();
            }
            for (s, &size) in scatter.iter_mut().zip(&model.sizes) {
                *s /= size as f64;
            }
            let mut total = 0.0;
            for i in 0..k {
                let mut worst = f64::NEG_INFINITY;
                for j in 0..k {
                    if i == j {
                        continue;
                    }
                    let sep = sq_dist(model.centroids.row(i), model.centroids.row(j)).sqrt();
                    if sep <= 0.0 {
                        return Err(undefined(kind, "two centroids coincide"));
                    }
                    worst = worst.max((scatter[i] + scatter[j]) / sep);
                }
                total += worst;
            }
            Ok(total / k as f64)
        }
        IndexKind::Silhouette => {
            if k >= n {
                return Err(undefined(kind, "every point is its own cluster"));
            }
            let mut mean_to = vec![0.0; k];
            let mut total = 0.0;
            for i in 0..n {
                mean_to.iter_mut().for_each(|v| *v = 0.0);
                for j in 0..n {
                    mean_to[model.assignment[j]] += dist.get(i, j);
                }
                let own = model.assignment[i];
                if model.sizes[own] == 1 {
                    continue;
                }
                let a = mean_to[own] / (model.sizes[own] - 1) as f64;
                let b = (0..k)
                    .filter(|&c| c != own)
                    .map(|c| mean_to[c] / model.sizes[c] as f64)
                    .fold(f64::INFINITY, f64::min);
                let m = a.max(b);
                if m > 0.0 {
                    total += (b - a) / m;
                }
            }
            Ok(total / n as f64)
        }
        IndexKind::Dunn => {
            let mut min_sep = f64::INFINITY;
            let mut max_diam: f64 = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    let v = dist.get(i, j);
                    if model.assignment[i] == model.assignment[j] {
                        max_diam = max_diam.max(v);
                    } else {
                        min_sep = min_sep.min(v);
                    }
                }
            }
            if max_diam <= 0.0 {
                return Err(undefined(kind, "all clusters have zero diameter"));
            }
            Ok(min_sep / max_diam)
        }
        IndexKind::Hartigan => Err(undefined(
            kind,
            "compares fits at k and k+1; use `hartigan`",
        )),
    }
}

/// Hartigan's statistic `(W_k / W_{k+1} - 1) (n - k - 1)`.
pub fn hartigan(model_k: &ClusterModel, model_next: &ClusterModel) -> Result<f64> {
    let n = model_k.assignment.len();
    let k = model_k.k;
    if model_next.k != k + 1 || model_next.assignment.len() != n {
        return Err(Error::domain("Hartigan needs fits at k and k+1 on the same data"));
    }
    if model_next.within_ss <= 0.0 || k + 1 >= n {
        return Err(undefined(IndexKind::Hartigan, "zero dispersion at k+1"));
    }
    Ok((model_k.within_ss / model_next.within_ss - 1.0) * (n - k - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn model(data: ArrayView2<'_, f64>, assignment: Vec<usize>, k: usize) -> ClusterModel {
        ClusterModel::from_assignment(data, assignment, k).unwrap()
    }

    #[test]
    fn silhouette_of_two_tight_pairs() {
        let data = array![[0.0, 0.0], [0.0, 0.1], [10.0, 10.0], [10.0, 10.1]];
        let m = model(data.view(), vec![0, 0, 1, 1], 2);
        let s = validity_index(data.view(), &m, IndexKind::Silhouette).unwrap();
        // Hand oracle: a = 0.1; b is the mean of the distances to the other pair.
        let d = |p: (f64, f64), q: (f64, f64)| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
        let b = (d((0.0, 0.0), (10.0, 10.0)) + d((0.0, 0.0), (10.0, 10.1))) / 2.0;
        let b2 = (d((0.0, 0.1), (10.0, 10.0)) + d((0.0, 0.1), (10.0, 10.1))) / 2.0;
        let expect = ((b - 0.1) / b + (b2 - 0.1) / b2) / 2.0;
        assert!((s - expect).abs() < 1e-12);
        assert!(s > 0.95);
    }

    #[test]
    fn single_cluster_is_undefined() {
        let data = array![[0.0], [1.0], [2.0]];
        let m = model(data.view(), vec![0, 0, 0], 1);
        for kind in IndexKind::ALL {
            assert!(matches!(
                validity_index(data.view(), &m, kind),
                Err(Error::IndexUndefined { .. })
            ));
        }
    }

    #[test]
    fn hand_checked_values() {
        // Clusters {0, 2} and {10, 12}.
        let data = array![[0.0], [2.0], [10.0], [12.0]];
        let m = model(data.view(), vec![0, 0, 1, 1], 2);
        // W = 4, B = 100, CH = (100/1)/(4/2) = 50.
        let ch = validity_index(data.view(), &m, IndexKind::CalinskiHarabasz).unwrap();
        assert!((ch - 50.0).abs() < 1e-12);
        // Scatter 1 each, centroid gap 10: DB = 0.2.
        let db = validity_index(data.view(), &m, IndexKind::DaviesBouldin).unwrap();
        assert!((db - 0.2).abs() < 1e-12);
        // Min separation 8, max diameter 2.
        let dunn = validity_index(data.view(), &m, IndexKind::Dunn).unwrap();
        assert!((dunn - 4.0).abs() < 1e-12);
    }

    #[test]
    fn hartigan_formula() {
        let data = array![[0.0], [2.0], [10.0], [12.0], [30.0]];
        let m2 = model(data.view(), vec![0, 0, 0, 0, 1], 2);
        let m3 = model(data.view(), vec![0, 0, 1, 1, 2], 3);
        let h = hartigan(&m2, &m3).unwrap();
        let expect = (m2.within_ss / m3.within_ss - 1.0) * (5 - 2 - 1) as f64;
        assert_eq!(h, expect);
        assert!(hartigan(&m3, &m2).is_err());
    }

    #[test]
    fn names_round_trip() {
        for k in IndexKind::ALL {
            assert_eq!(k.as_str().parse::<IndexKind>().unwrap(), k);
        }
        assert!("gap".parse::<IndexKind>().is_err());
    }
}
