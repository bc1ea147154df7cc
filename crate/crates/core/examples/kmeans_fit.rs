//! Multi-start k-means and the variance decomposition of its result.

use ndarray::Array2;
use rand_distr::{Distribution, Normal};

use terraclass::kmeans::{explained_variance, kmeans_fit_detailed, Init, KMeansConfig};
use terraclass::rng::stream;

fn main() -> terraclass::Result<()> {
    let mut rng = stream(5, 0);
    let noise = Normal::new(0.0, 0.4).expect("valid sigma");
    let centers = [[0.0, 0.0], [5.0, 0.0], [0.0, 5.0], [5.0, 5.0]];
    let data = Array2::from_shape_fn((200, 2), |(i, j)| centers[i % 4][j] + noise.sample(&mut rng));

    for init in [Init::DsqWeighted, Init::Maximin] {
        let cfg = KMeansConfig { k: 4, seed: 9, init, ..KMeansConfig::default() };
        let fit = kmeans_fit_detailed(data.view(), &cfg)?;
        let m = &fit.best;
        println!(
            "{:<13} best start {} of {}, within {:.3}, between {:.3}, explained {:.4}, converged {} after {} iterations",
            init.as_str(),
            fit.best_start,
            fit.start_within_ss.len(),
            m.within_ss,
            m.between_ss,
            explained_variance(m)?,
            m.converged,
            m.iterations_run,
        );
        println!("              sizes {:?}", m.sizes);
    }
    Ok(())
}
