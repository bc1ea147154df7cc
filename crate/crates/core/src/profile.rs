//! Reading a fitted model: seven-level qualitative profiles of the centroids,
//! a complete-linkage tree over centroids with a heatmap-ready matrix, and
//! cluster composition of macro-regions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::kmeans::{sq_dist, ClusterModel};
use crate::model::{RegionSet, TerritoryId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QualLevel {
    VeryLow,
    Low,
    MediumLow,
    Medium,
    MediumHigh,
    High,
    VeryHigh,
}

impl QualLevel {
    pub const ALL: [QualLevel; 7] = [
        QualLevel::VeryLow,
        QualLevel::Low,
        QualLevel::MediumLow,
        QualLevel::Medium,
        QualLevel::MediumHigh,
        QualLevel::High,
        QualLevel::VeryHigh,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QualLevel::VeryLow => "very_low",
            QualLevel::Low => "low",
            QualLevel::MediumLow => "medium_low",
            QualLevel::Medium => "medium",
            QualLevel::MediumHigh => "medium_high",
            QualLevel::High => "high",
            QualLevel::VeryHigh => "very_high",
        }
    }
}

impl fmt::Display for QualLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QualLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        QualLevel::ALL
            .into_iter()
            .find(|l| l.as_str() == s.trim())
            .ok_or_else(|| Error::domain(format!("unknown qualitative level `{}`", s.trim())))
    }
}

/// Symmetric cut points on the standardized scale. Intervals are closed
/// below and open above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Binning {
    pub inner: f64,
    pub middle: f64,
    pub outer: f64,
}

impl Default for Binning {
    fn default() -> Self {
        Binning {
            inner: 0.25,
            middle: 0.75,
            outer: 1.5,
        }
    }
}

impl Binning {
    pub fn new(inner: f64, middle: f64, outer: f64) -> Result<Self> {
        if !(0.0 < inner && inner < middle && middle < outer && outer.is_finite()) {
            return Err(Error::domain(
                "binning cut points must satisfy 0 < inner < middle < outer",
            ));
        }
        Ok(Binning { inner, middle, outer })
    }

    pub fn level(&self, v: f64) -> QualLevel {
        let cuts = [
            -self.outer,
            -self.middle,
            -self.inner,
            self.inner,
            self.middle,
            self.outer,
        ];
        let idx = cuts.iter().take_while(|&&c| v >= c).count();
        QualLevel::ALL[idx]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualitativeProfile {
    pub cluster: usize,
    /// One level per indicator, in matrix column order.
    pub levels: Vec<(String, QualLevel)>,
}

impl QualitativeProfile {
    pub fn level(&self, indicator: &str) -> Option<QualLevel> {
        self.levels
            .iter()
            .find(|(id, _)| id == indicator)
            .map(|(_, l)| *l)
    }
}

pub fn bin_centroids(model: &ClusterModel, indicators: &[String]) -> Result<Vec<QualitativeProfile>> {
    bin_centroids_with(model, indicators, &Binning::default())
}

pub fn bin_centroids_with(
    model: &ClusterModel,
    indicators: &[String],
    binning: &Binning,
) -> Result<Vec<QualitativeProfile>> {
    if indicators.len() != model.centroids.ncols() {
        return Err(Error::domain(format!(
            "{} indicator names for {} centroid columns",
            indicators.len(),
            model.centroids.ncols()
        )));
    }
    Ok(model
        .centroids
        .rows()
        .into_iter()
        .enumerate()
        .map(|(cluster, row)| QualitativeProfile {
            cluster,
            levels: indicators
                .iter()
                .cloned()
                .zip(row.iter().map(|&v| binning.level(v)))
                .collect(),
        })
        .collect())
}

/// One agglomeration step. Nodes `0..k` are leaves; merge `i` creates node `k + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentroidTree {
    pub k: usize,
    pub merges: Vec<Merge>,
}

impl CentroidTree {
    /// Leaves left to right.
    pub fn leaf_order(&self) -> Vec<usize> {
        if self.merges.is_empty() {
            return (0..self.k).collect();
        }
        let mut out = Vec::with_capacity(self.k);
        let mut stack = vec![self.k + self.merges.len() - 1];
        while let Some(node) = stack.pop() {
            if node < self.k {
                out.push(node);
            } else {
                let m = &self.merges[node - self.k];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        out
    }
}

/// Complete-linkage agglomeration of the rows of `points`. Ties go to the
/// pair whose smallest member ids are lexicographically smallest.
pub fn complete_linkage(points: ArrayView2<'_, f64>) -> Result<CentroidTree> {
    let k = points.nrows();
    if k < 2 {
        return Err(Error::domain(format!("dendrogram needs at least 2 centroids, got {k}")));
    }
    struct Group {
        node: usize,
        key: usize,
        size: usize,
    }
    let mut groups: Vec<Group> = (0..k).map(|i| Group { node: i, key: i, size: 1 }).collect();
    let mut dist: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| sq_dist(points.row(i), points.row(j)).sqrt()).collect())
        .collect();

    let mut merges = Vec::with_capacity(k - 1);
    while groups.len() > 1 {
        let mut best: Option<(usize, usize)> = None;
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                let pair_key = |(x, y): (usize, usize)| {
                    let (p, q) = (groups[x].key, groups[y].key);
                    (p.min(q), p.max(q))
                };
                best = match best {
                    None => Some((a, b)),
                    Some(cur) => {
                        let (d_new, d_cur) = (dist[a][b], dist[cur.0][cur.1]);
                        if d_new < d_cur || (d_new == d_cur && pair_key((a, b)) < pair_key(cur)) {
                            Some((a, b))
                        } else {
                            Some(cur)
                        }
                    }
                };
            }
        }
        let (a, b) = best.expect("two or more groups");
        let (first, second) = if groups[a].key < groups[b].key { (a, b) } else { (b, a) };
        let height = dist[a][b];
        let size = groups[a].size + groups[b].size;
        merges.push(Merge {
            left: groups[first].node,
            right: groups[second].node,
            height,
            size,
        });

        // Lance-Williams update for complete linkage, merged group kept at `a`.
        for x in 0..groups.len() {
            let v = dist[a][x].max(dist[b][x]);
            dist[a][x] = v;
            dist[x][a] = v;
        }
        dist[a][a] = 0.0;
        groups[a] = Group {
            node: k + merges.len() - 1,
            key: groups[a].key.min(groups[b].key),
            size,
        };
        groups.remove(b);
        dist.remove(b);
        for row in dist.iter_mut() {
            row.remove(b);
        }
    }
    Ok(CentroidTree { k, merges })
}

pub fn centroid_dendrogram(model: &ClusterModel) -> Result<CentroidTree> {
    complete_linkage(model.centroids.view())
}

/// Centroid matrix with rows in dendrogram leaf order.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub row_order: Vec<usize>,
    pub col_order: Vec<usize>,
    /// `values[i]` is the centroid of cluster `row_order[i]`.
    pub values: Array2<f64>,
}

pub fn heatmap_matrix(model: &ClusterModel) -> Heatmap {
    let row_order = if model.k >= 2 {
        centroid_dendrogram(model)
            .map(|t| t.leaf_order())
            .unwrap_or_else(|_| (0..model.k).collect())
    } else {
        (0..model.k).collect()
    };
    let col_order: Vec<usize> = (0..model.centroids.ncols()).collect();
    let values = model.centroids.select(ndarray::Axis(0), &row_order);
    Heatmap {
        row_order,
        col_order,
        values,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub region: String,
    pub size: usize,
    pub n_clusters_present: usize,
    pub cluster_frequencies: BTreeMap<usize, usize>,
    /// Lowest and highest level of each indicator across the clusters present.
    pub indicator_spread: Vec<(String, QualLevel, QualLevel)>,
}

/// Cluster composition of a macro-region.
pub fn macro_region_report(
    assignment: &BTreeMap<TerritoryId, usize>,
    profiles: &[QualitativeProfile],
    region: &RegionSet,
) -> Result<RegionReport> {
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for member in &region.members {
        let c = assignment
            .get(member)
            .ok_or_else(|| Error::MissingAssignment(member.to_string()))?;
        *freq.entry(*c).or_default() += 1;
    }
    let present: BTreeSet<usize> = freq.keys().copied().collect();
    let profile_of = |c: usize| profiles.iter().find(|p| p.cluster == c);
    let indicators: Vec<String> = profiles
        .first()
        .map(|p| p.levels.iter().map(|(id, _)| id.clone()).collect())
        .unwrap_or_default();

    let mut spread = Vec::with_capacity(indicators.len());
    for id in indicators {
        let levels: Vec<QualLevel> = present
            .iter()
            .filter_map(|&c| profile_of(c).and_then(|p| p.level(&id)))
            .collect();
        if let (Some(lo), Some(hi)) = (levels.iter().min(), levels.iter().max()) {
            spread.push((id, *lo, *hi));
        }
    }
    for c in &present {
        if profile_of(*c).is_none() {
            return Err(Error::domain(format!("no profile for cluster {c}")));
        }
    }

    Ok(RegionReport {
        region: region.name.clone(),
        size: region.members.len(),
        n_clusters_present: present.len(),
        cluster_frequencies: freq,
        indicator_spread: spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn binning_examples() {
        let b = Binning::default();
        assert_eq!(b.level(0.0), QualLevel::Medium);
        assert_eq!(b.level(1.6), QualLevel::VeryHigh);
        // Intervals are closed below: -0.75 opens the medium_low band.
        assert_eq!(b.level(-0.75), QualLevel::MediumLow);
        assert_eq!(b.level(-0.7500001), QualLevel::Low);
        assert_eq!(b.level(-0.7499999), QualLevel::MediumLow);
        assert_eq!(b.level(1.5), QualLevel::VeryHigh);
        assert_eq!(b.level(-1.5), QualLevel::Low);
        assert_eq!(b.level(-1.5000001), QualLevel::VeryLow);
        assert_eq!(b.level(0.25), QualLevel::MediumHigh);
        assert_eq!(b.level(-0.25), QualLevel::Medium);
        assert_eq!(b.level(f64::INFINITY), QualLevel::VeryHigh);
        assert_eq!(b.level(f64::NEG_INFINITY), QualLevel::VeryLow);
    }

    #[test]
    fn collinear_centroids() {
        let t = complete_linkage(array![[0.0], [1.0], [5.0]].view()).unwrap();
        assert_eq!(t.merges[0], Merge { left: 0, right: 1, height: 1.0, size: 2 });
        assert_eq!(t.merges[1], Merge { left: 3, right: 2, height: 5.0, size: 3 });
        assert_eq!(t.leaf_order(), vec![0, 1, 2]);
    }

    #[test]
    fn two_centroids() {
        let t = complete_linkage(array![[0.0, 0.0], [3.0, 4.0]].view()).unwrap();
        assert_eq!(t.merges.len(), 1);
        assert_eq!(t.merges[0].height, 5.0);
    }

    #[test]
    fn unit_square_corners() {
        let side = 2.0;
        let pts = array![[0.0, 0.0], [side, 0.0], [0.0, side], [side, side]];
        let t = complete_linkage(pts.view()).unwrap();
        assert_eq!((t.merges[0].left, t.merges[0].right, t.merges[0].height), (0, 1, side));
        assert_eq!((t.merges[1].left, t.merges[1].right, t.merges[1].height), (2, 3, side));
        assert!((t.merges[2].height - side * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_centroid_rejected() {
        assert!(complete_linkage(array![[1.0, 2.0]].view()).is_err());
    }

    #[test]
    fn duplicates_are_adjacent_in_heatmap() {
        let data = array![[0.0, 0.0], [5.0, 5.0], [0.1, 0.0], [5.0, 5.0], [9.0, 0.0], [9.1, 0.0]];
        let m = ClusterModel::from_assignment(data.view(), vec![0, 1, 0, 3, 2, 2], 4).unwrap();
        let h = heatmap_matrix(&m);
        let pos = |c: usize| h.row_order.iter().position(|&x| x == c).unwrap();
        assert_eq!((pos(1) as i64 - pos(3) as i64).abs(), 1);
        assert_eq!(h.values.dim(), (4, 2));
        let mut sorted = h.row_order.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
    }

    fn tid(s: &str) -> TerritoryId {
        TerritoryId::parse(s).unwrap()
    }

    fn profiles(levels: &[QualLevel]) -> Vec<QualitativeProfile> {
        levels
            .iter()
            .enumerate()
            .map(|(c, &l)| QualitativeProfile {
                cluster: c,
                levels: vec![("p_sun".into(), l)],
            })
            .collect()
    }

    #[test]
    fn region_counts() {
        let assignment: BTreeMap<TerritoryId, usize> =
            [(tid("ATA01"), 1), (tid("ATA02"), 1), (tid("ATA03"), 7)].into_iter().collect();
        let region = RegionSet {
            name: "Alpine".into(),
            members: assignment.keys().cloned().collect(),
        };
        let mut levels = vec![QualLevel::Medium; 8];
        levels[1] = QualLevel::Low;
        levels[7] = QualLevel::VeryHigh;
        let r = macro_region_report(&assignment, &profiles(&levels), &region).unwrap();
        assert_eq!(r.n_clusters_present, 2);
        assert_eq!(r.cluster_frequencies, [(1, 2), (7, 1)].into_iter().collect());
        assert_eq!(r.indicator_spread, vec![("p_sun".into(), QualLevel::Low, QualLevel::VeryHigh)]);

        let single = RegionSet { name: "x".into(), members: [tid("ATA03")].into_iter().collect() };
        assert_eq!(macro_region_report(&assignment, &profiles(&levels), &single).unwrap().n_clusters_present, 1);

        let flat = macro_region_report(&assignment, &profiles(&[QualLevel::Medium; 8]), &region).unwrap();
        assert_eq!(flat.indicator_spread[0].1, QualLevel::Medium);
        assert_eq!(flat.indicator_spread[0].2, QualLevel::Medium);
    }

    #[test]
    fn unassigned_member_is_named() {
        let region = RegionSet { name: "r".into(), members: [tid("ATA09")].into_iter().collect() };
        let err = macro_region_report(&BTreeMap::new(), &[], &region).unwrap_err();
        assert!(matches!(err, Error::MissingAssignment(ref t) if t == "ATA09"));
    }
}
