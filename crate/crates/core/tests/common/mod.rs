//! Shared generators and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bundled_fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("fixture")
}

pub fn uniform_data(n: usize, d: usize, seed: u64) -> Array2<f64> {
    let mut r = rng(seed);
    Array2::from_shape_fn((n, d), |_| r.random::<f64>())
}

/// `k` Gaussian blobs of `per` points with centers at least `min_sep` apart.
pub fn blobs(k: usize, per: usize, d: usize, sigma: f64, min_sep: f64, seed: u64) -> (Array2<f64>, Vec<usize>) {
    let mut r = rng(seed);
    let side = min_sep * 2.0 * (k as f64).powf(1.0 / d as f64);
    let mut centers: Vec<Vec<f64>> = Vec::new();
    while centers.len() < k {
        let c: Vec<f64> = (0..d).map(|_| r.random_range(0.0..side)).collect();
        if centers.iter().all(|o| dist(o, &c) >= min_sep) {
            centers.push(c);
        }
    }
    let normal = Normal::new(0.0, sigma).unwrap();
    let mut labels = Vec::with_capacity(k * per);
    let data = Array2::from_shape_fn((k * per, d), |(i, j)| centers[i / per][j] + normal.sample(&mut r));
    for i in 0..k * per {
        labels.push(i / per);
    }
    (data, labels)
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Within-cluster sum of squares of a labelling, straight from the definition.
pub fn within_ss(data: &Array2<f64>, labels: &[usize], k: usize) -> f64 {
    let d = data.ncols();
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        for j in 0..d {
            let mean = members.iter().map(|&i| data[[i, j]]).sum::<f64>() / members.len() as f64;
            total += members.iter().map(|&i| (data[[i, j]] - mean).powi(2)).sum::<f64>();
        }
    }
    total
}

/// Minimum within-cluster sum of squares over every partition of the rows
/// into exactly `k` non-empty groups (restricted growth strings).
pub fn brute_force_optimum(data: &Array2<f64>, k: usize) -> f64 {
    fn go(i: usize, used: usize, labels: &mut Vec<usize>, data: &Array2<f64>, k: usize, best: &mut f64) {
        let n = labels.len();
        if n - i < k - used {
            return;
        }
        if i == n {
            let w = within_ss(data, labels, k);
            if w < *best {
                *best = w;
            }
            return;
        }
        for c in 0..(used + 1).min(k) {
            labels[i] = c;
            go(i + 1, used.max(c + 1), labels, data, k, best);
        }
    }
    let mut labels = vec![0; data.nrows()];
    let mut best = f64::INFINITY;
    go(0, 0, &mut labels, data, k, &mut best);
    best
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Adjusted Rand index from the pair-counting definition.
pub fn ari(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut same_both, mut same_a, mut same_b) = (0u64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            same_a += sa as u64;
            same_b += sb as u64;
            same_both += (sa && sb) as u64;
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let expected = same_a as f64 * same_b as f64 / pairs;
    let max = (same_a + same_b) as f64 / 2.0;
    if max == expected {
        return 1.0;
    }
    (same_both as f64 - expected) / (max - expected)
}

/// Every file in `dir`, keyed by name.
pub fn read_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

/// Parse `key = value` lines.
pub fn key_values(text: &str) -> HashMap<String, String> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
