//! Multi-start Lloyd k-means.
//!
//! Each start seeds its centroids from a private random stream, then
//! alternates nearest-centroid assignment and mean updates until no point
//! changes cluster or the iteration cap is hit. The start with the lowest
//! within-cluster sum of squares wins; ties go to the earliest start.

use std::str::FromStr;

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Init {
    /// First seed at random, then repeatedly the point farthest from all chosen seeds.
    Maximin,
    /// Seeds sampled with probability proportional to squared distance (k-means++).
    DsqWeighted,
}

impl Init {
    pub fn as_str(self) -> &'static str {
        match self {
            Init::Maximin => "maximin",
            Init::DsqWeighted => "dsq_weighted",
        }
    }
}

impl FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "maximin" => Ok(Init::Maximin),
            "dsq_weighted" => Ok(Init::DsqWeighted),
            other => Err(Error::domain(format!("unknown seeding rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iter: usize,
    pub n_starts: usize,
    pub seed: u64,
    pub init: Init,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            k: 17,
            max_iter: 50,
            n_starts: 10,
            seed: 0,
            init: Init::DsqWeighted,
        }
    }
}

impl KMeansConfig {
    pub fn with_k(k: usize) -> Self {
        KMeansConfig {
            k,
            ..Default::default()
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.max_iter == 0 || self.n_starts == 0 {
            return Err(Error::domain(format!(
                "k ({}), max_iter ({}) and n_starts ({}) must be positive",
                self.k, self.max_iter, self.n_starts
            )));
        }
        if n < self.k {
            return Err(Error::domain(format!(
                "cannot form {} clusters from {n} points",
                self.k
            )));
        }
        Ok(())
    }
}

/// A fitted partition in the space of the input matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub k: usize,
    /// k × d cluster means.
    pub centroids: Array2<f64>,
    /// Cluster id in `0..k` for every row.
    pub assignment: Vec<usize>,
    pub sizes: Vec<usize>,
    pub within_ss: f64,
    pub between_ss: f64,
    pub total_ss: f64,
    /// `1 - within_ss / total_ss`; zero when the data has no spread.
    pub between_ratio: f64,
    pub iterations_run: usize,
    /// Whether the last assignment pass changed nothing.
    pub converged: bool,
}

impl ClusterModel {
    /// Build the model implied by an assignment: centroids are cluster means.
    pub fn from_assignment(data: ArrayView2<'_, f64>, assignment: Vec<usize>, k: usize) -> Result<Self> {
        let (n, d) = data.dim();
        if assignment.len() != n {
            return Err(Error::domain("assignment length differs from row count"));
        }
        let mut sums = Array2::<f64>::zeros((k, d));
        let mut sizes = vec![0usize; k];
        for (row, &c) in data.rows().into_iter().zip(&assignment) {
            if c >= k {
                return Err(Error::domain(format!("cluster id {c} out of range for k = {k}")));
            }
            sizes[c] += 1;
            let mut acc = sums.row_mut(c);
            acc += &row;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::domain(format!("cluster {empty} is empty")));
        }
        for (mut row, &size) in sums.rows_mut().into_iter().zip(&sizes) {
            row /= size as f64;
        }
        Ok(finish(data, sums, assignment, sizes, 0, true))
    }
}

fn finish(
    data: ArrayView2<'_, f64>,
    centroids: Array2<f64>,
    assignment: Vec<usize>,
    sizes: Vec<usize>,
    iterations_run: usize,
    converged: bool,
) -> ClusterModel {
    let grand = grand_mean(data);
    let within_ss = within_ss(data, &centroids, &assignment);
    let total_ss: f64 = data.rows().into_iter().map(|r| sq_dist(r, grand.view())).sum();
    let between_ss: f64 = centroids
        .rows()
        .into_iter()
        .zip(&sizes)
        .map(|(c, &s)| s as f64 * sq_dist(c, grand.view()))
        .sum();
    let between_ratio = if total_ss > 0.0 {
        (1.0 - within_ss / total_ss).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ClusterModel {
        k: centroids.nrows(),
        centroids,
        assignment,
        sizes,
        within_ss,
        between_ss,
        total_ss,
        between_ratio,
        iterations_run,
        converged,
    }
}

/// Column means accumulated row by row, the same way cluster means are.
fn grand_mean(data: ArrayView2<'_, f64>) -> ndarray::Array1<f64> {
    let mut acc = ndarray::Array1::<f64>::zeros(data.ncols());
    for row in data.rows() {
        acc += &row;
    }
    acc / data.nrows().max(1) as f64
}

pub(crate) fn sq_dist(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Euclidean distance between two equal-length vectors.
pub fn euclidean_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::domain(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

fn within_ss(data: ArrayView2<'_, f64>, centroids: &Array2<f64>, assignment: &[usize]) -> f64 {
    data.rows()
        .into_iter()
        .zip(assignment)
        .map(|(r, &c)| sq_dist(r, centroids.row(c)))
        .sum()
}

fn nearest(point: ArrayView1<'_, f64>, centroids: &Array2<f64>) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.rows().into_iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

/// Maximin seeding from a fixed first point. Returns row indices.
pub fn maximin_from(data: ArrayView2<'_, f64>, k: usize, first: usize) -> Result<Vec<usize>> {
    let n = data.nrows();
    if k == 0 || k > n || first >= n {
        return Err(Error::domain(format!("cannot pick {k} seeds from {n} points")));
    }
    let mut chosen = vec![first];
    let mut dmin: Vec<f64> = data.rows().into_iter().map(|r| sq_dist(r, data.row(first))).collect();
    while chosen.len() < k {
        let (idx, &far) = dmin
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        if far <= 0.0 {
            return Err(Error::Seeding {
                k,
                distinct: chosen.len(),
            });
        }
        chosen.push(idx);
        for (i, r) in data.rows().into_iter().enumerate() {
            dmin[i] = dmin[i].min(sq_dist(r, data.row(idx)));
        }
    }
    Ok(chosen)
}

fn dsq_weighted<R: Rng + ?Sized>(data: ArrayView2<'_, f64>, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let n = data.nrows();
    let first = rng.random_range(0..n);
    let mut chosen = vec![first];
    let mut dmin: Vec<f64> = data.rows().into_iter().map(|r| sq_dist(r, data.row(first))).collect();
    while chosen.len() < k {
        let total: f64 = dmin.iter().sum();
        if total <= 0.0 {
            return Err(Error::Seeding {
                k,
                distinct: chosen.len(),
            });
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &d) in dmin.iter().enumerate() {
            if d <= 0.0 {
                continue;
            }
            acc += d;
            pick = Some(i);
            if acc > target {
                break;
            }
        }
        let idx = pick.expect("positive total implies a candidate");
        chosen.push(idx);
        for (i, r) in data.rows().into_iter().enumerate() {
            dmin[i] = dmin[i].min(sq_dist(r, data.row(idx)));
        }
    }
    Ok(chosen)
}

/// Pick `k` distinct data points as initial centroids.
pub fn seed_centroids<R: Rng + ?Sized>(
    data: ArrayView2<'_, f64>,
    k: usize,
    init: Init,
    rng: &mut R,
) -> Result<Array2<f64>> {
    let n = data.nrows();
    if k == 0 || k > n {
        return Err(Error::domain(format!("cannot pick {k} seeds from {n} points")));
    }
    let idx = match init {
        Init::Maximin => {
            let first = rng.random_range(0..n);
            maximin_from(data, k, first)?
        }
        Init::DsqWeighted => dsq_weighted(data, k, rng)?,
    };
    Ok(data.select(ndarray::Axis(0), &idx))
}

/// One Lloyd run plus the within-cluster sum of squares after every update.
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub model: ClusterModel,
    pub ss_trace: Vec<f64>,
}

/// Move the point farthest from its centroid into each empty cluster.
fn repair_empty(
    data: ArrayView2<'_, f64>,
    centroids: &mut Array2<f64>,
    assignment: &mut [usize],
    sizes: &mut [usize],
) {
    for j in 0..sizes.len() {
        if sizes[j] > 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = f64::NEG_INFINITY;
        for (i, r) in data.rows().into_iter().enumerate() {
            let c = assignment[i];
            if sizes[c] < 2 {
                continue;
            }
            let d = sq_dist(r, centroids.row(c));
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        let i = far.expect("n >= k leaves a cluster with two or more points");
        sizes[assignment[i]] -= 1;
        assignment[i] = j;
        sizes[j] = 1;
        centroids.row_mut(j).assign(&data.row(i));
    }
}

/// Lloyd iterations from given initial centroids.
pub fn lloyd(data: ArrayView2<'_, f64>, initial: Array2<f64>, max_iter: usize) -> LloydRun {
    let n = data.nrows();
    let k = initial.nrows();
    let d = data.ncols();
    let mut centroids = initial;
    let mut assignment = vec![usize::MAX; n];
    let mut sizes = vec![0usize; k];
    let mut ss_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        let mut changes = 0;
        for (i, r) in data.rows().into_iter().enumerate() {
            let c = nearest(r, &centroids);
            if assignment[i] != c {
                assignment[i] = c;
                changes += 1;
            }
        }
        if changes == 0 {
            converged = true;
            break;
        }
        iterations += 1;

        sizes.iter_mut().for_each(|s| *s = 0);
        for &c in &assignment {
            sizes[c] += 1;
        }
        repair_empty(data, &mut centroids, &mut assignment, &mut sizes);

        let mut sums = Array2::<f64>::zeros((k, d));
        for (r, &c) in data.rows().into_iter().zip(&assignment) {
            let mut acc = sums.row_mut(c);
            acc += &r;
        }
        for (mut row, &size) in sums.rows_mut().into_iter().zip(&sizes) {
            row /= size as f64;
        }
        centroids = sums;
        ss_trace.push(within_ss(data, &centroids, &assignment));
    }
    if !converged {
        converged = data
            .rows()
            .into_iter()
            .zip(&assignment)
            .all(|(r, &c)| nearest(r, &centroids) == c);
    }

    LloydRun {
        model: finish(data, centroids, assignment, sizes, iterations, converged),
        ss_trace,
    }
}

/// Result of every start, for auditing the multi-start reduction.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub best: ClusterModel,
    pub best_start: usize,
    pub start_within_ss: Vec<f64>,
}

pub fn kmeans_fit_detailed(data: ArrayView2<'_, f64>, cfg: &KMeansConfig) -> Result<FitOutcome> {
    cfg.check(data.nrows())?;
    let runs: Vec<Result<ClusterModel>> = (0..cfg.n_starts)
        .into_par_iter()
        .map(|s| {
            let mut stream = rng::stream(cfg.seed, s as u64);
            let seeds = seed_centroids(data, cfg.k, cfg.init, &mut stream)?;
            Ok(lloyd(data, seeds, cfg.max_iter).model)
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let start_within_ss: Vec<f64> = runs.iter().map(|m| m.within_ss).collect();
    let best_start = start_within_ss
        .iter()
        .enumerate()
        .fold(0, |best, (i, &w)| if w < start_within_ss[best] { i } else { best });
    let best = runs.into_iter().nth(best_start).expect("n_starts >= 1");
    Ok(FitOutcome {
        best,
        best_start,
        start_within_ss,
    })
}

/// Fit k-means with `cfg.n_starts` seeded restarts and keep the best.
pub fn kmeans_fit(data: ArrayView2<'_, f64>, cfg: &KMeansConfig) -> Result<ClusterModel> {
    kmeans_fit_detailed(data, cfg).map(|o| o.best)
}

/// Share of total variance carried by the separation between clusters.
pub fn explained_variance(model: &ClusterModel) -> Result<f64> {
    if !(model.total_ss > 0.0) {
        return Err(Error::DegenerateData(
            "all points coincide; total sum of squares is zero".into(),
        ));
    }
    Ok(model.between_ratio)
}
