//! Hopkins statistic on structureless and on clustered data. Values near
//! 0.5 mean randomness, values near 0 mean strong cluster structure.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use terraclass::rng::stream;
use terraclass::tendency::{hopkins, HopkinsConfig};

fn main() -> terraclass::Result<()> {
    let mut rng = stream(1, 0);
    let uniform = Array2::from_shape_fn((1000, 5), |_| rng.random::<f64>());

    let noise = Normal::new(0.0, 0.05).expect("valid sigma");
    let centers: Vec<[f64; 5]> = (0..6).map(|_| std::array::from_fn(|_| rng.random_range(0.0..4.0))).collect();
    let clustered = Array2::from_shape_fn((600, 5), |(i, j)| centers[i % 6][j] + noise.sample(&mut rng));

    for (name, data) in [("uniform", &uniform), ("six blobs", &clustered)] {
        let cfg = HopkinsConfig::for_rows(data.nrows(), 42);
        let h = hopkins(data.view(), &cfg)?;
        println!("{name:<10} H = {h:.4} (m = {}, {} repeats)", cfg.sample_size, cfg.n_repeats);
    }
    Ok(())
}
