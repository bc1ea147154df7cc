use ndarray::ArrayView2;
use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kmeans::sq_dist;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopkinsConfig {
    /// Number of sampled real points (and of uniform reference points).
    pub sample_size: usize,
    pub seed: u64,
    pub n_repeats: usize,
}

impl HopkinsConfig {
    /// Default sample size `max(10, n/10)`, capped at `n - 1`.
    pub fn for_rows(n: usize, seed: u64) -> Self {
        HopkinsConfig {
            sample_size: default_sample_size(n),
            seed,
            n_repeats: 10,
        }
    }
}

pub fn default_sample_size(n: usize) -> usize {
    (n / 10).max(10).min(n.saturating_sub(1)).max(1)
}

/// Hopkins statistic oriented so that values near 0 mean clusterable data
/// and values near 0.5 mean spatial randomness.
///
/// Each repeat draws `m` distinct rows and `m` uniform points in the
/// bounding box of the data; `w` are nearest-neighbour distances of the
/// sampled rows to the other rows, `u` those of the uniform points to the
/// data, and the repeat contributes `Σw / (Σu + Σw)`.
pub fn hopkins(data: ArrayView2<'_, f64>, cfg: &HopkinsConfig) -> Result<f64> {
    let (n, d) = data.dim();
    if n < 3 || d == 0 {
        return Err(Error::domain(format!(
            "Hopkins statistic needs at least 3 rows and 1 column, got {n} x {d}"
        )));
    }
    let m = cfg.sample_size;
    if m == 0 || m > n - 1 || cfg.n_repeats == 0 {
        return Err(Error::domain(format!(
            "Hopkins sample size must lie in [1, {}] and repeats be positive, got m = {m}, repeats = {}",
            n - 1,
            cfg.n_repeats
        )));
    }

    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for row in data.rows() {
        for (j, &v) in row.iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    if lo.iter().zip(&hi).all(|(a, b)| a == b) {
        return Err(Error::DegenerateData("all points are identical".into()));
    }

    let nn_to_data = |p: ndarray::ArrayView1<'_, f64>, skip: Option<usize>| -> f64 {
        data.rows()
            .into_iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(_, r)| sq_dist(p, r))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    };

    let mut total = 0.0;
    for rep in 0..cfg.n_repeats {
        let mut stream = rng::stream(cfg.seed, rep as u64);
        let sampled = index::sample(&mut stream, n, m);
        let w: f64 = sampled
            .iter()
            .map(|i| nn_to_data(data.row(i), Some(i)))
            .sum();
        let mut probe = ndarray::Array1::<f64>::zeros(d);
        let mut u = 0.0;
        for _ in 0..m {
            for j in 0..d {
                probe[j] = if hi[j] > lo[j] {
                    stream.random_range(lo[j]..hi[j])
                } else {
                    lo[j]
                };
            }
            u += nn_to_data(probe.view(), None);
        }
        total += if u + w > 0.0 { w / (u + w) } else { 0.5 };
    }
    Ok(total / cfg.n_repeats as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn too_few_rows() {
        let data = array![[0.0, 1.0], [1.0, 0.0]];
        assert!(hopkins(data.view(), &HopkinsConfig { sample_size: 1, seed: 0, n_repeats: 1 }).is_err());
    }

    #[test]
    fn identical_points_are_degenerate() {
        let data = Array2::<f64>::ones((5, 2));
        let err = hopkins(data.view(), &HopkinsConfig::for_rows(5, 0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateData(_)));
    }

    #[test]
    fn sample_size_bounds() {
        assert_eq!(default_sample_size(1000), 100);
        assert_eq!(default_sample_size(50), 10);
        assert_eq!(default_sample_size(5), 4);
        let data = array![[0.0], [1.0], [3.0]];
        let cfg = HopkinsConfig { sample_size: 3, seed: 0, n_repeats: 1 };
        assert!(hopkins(data.view(), &cfg).is_err());
    }

    #[test]
    fn fixed_seed_is_deterministic_and_bounded() {
        let data = array![[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0], [0.0, 5.0], [2.0, 2.5]];
        let cfg = HopkinsConfig { sample_size: 3, seed: 9, n_repeats: 4 };
        let a = hopkins(data.view(), &cfg).unwrap();
        let b = hopkins(data.view(), &cfg).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a));
    }
}
