mod common;

use ndarray::Array2;
use proptest::prelude::*;

use terraclass::kmeans::{
    euclidean_distance, kmeans_fit, kmeans_fit_detailed, lloyd, seed_centroids, Init, KMeansConfig,
};
use terraclass::rng::stream;

fn matrix() -> impl Strategy<Value = Array2<f64>> {
    (3usize..40, 1usize..5).prop_flat_map(|(n, d)| {
        prop::collection::vec(-10.0f64..10.0, n * d)
            .prop_map(move |v| Array2::from_shape_vec((n, d), v).unwrap())
    })
}

fn init() -> impl Strategy<Value = Init> {
    prop_oneof![Just(Init::DsqWeighted), Just(Init::Maximin)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lloyd_never_increases_within_ss(data in matrix(), k in 1usize..5, seed in any::<u64>(), init in init()) {
        let k = k.min(data.nrows());
        let mut rng = stream(seed, 0);
        let Ok(start) = seed_centroids(data.view(), k, init, &mut rng) else { return Ok(()) };
        let run = lloyd(data.view(), start, 50);
        for w in run.ss_trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "trace {:?}", run.ss_trace);
        }
    }

    #[test]
    fn best_start_beats_every_start(data in matrix(), k in 1usize..5, seed in any::<u64>(), init in init()) {
        let k = k.min(data.nrows());
        let cfg = KMeansConfig { k, seed, init, n_starts: 6, ..KMeansConfig::default() };
        let Ok(fit) = kmeans_fit_detailed(data.view(), &cfg) else { return Ok(()) };
        prop_assert!(fit.start_within_ss.iter().all(|&w| fit.best.within_ss <= w));
        prop_assert_eq!(fit.best.within_ss, fit.start_within_ss[fit.best_start]);
        // Earliest start wins ties.
        prop_assert!(fit.start_within_ss[..fit.best_start].iter().all(|&w| w > fit.best.within_ss));
    }

    #[test]
    fn fitted_model_is_consistent(data in matrix(), k in 1usize..5, seed in any::<u64>()) {
        let k = k.min(data.nrows());
        let Ok(m) = kmeans_fit(data.view(), &KMeansConfig { k, seed, ..KMeansConfig::default() }) else { return Ok(()) };
        prop_assert_eq!(m.sizes.iter().sum::<usize>(), data.nrows());
        prop_assert!(m.sizes.iter().all(|&s| s > 0));
        prop_assert!((m.within_ss + m.between_ss - m.total_ss).abs() <= 1e-9 * m.total_ss.max(1.0));
        prop_assert!((m.within_ss - common::within_ss(&data, &m.assignment, k)).abs() <= 1e-9 * m.total_ss.max(1.0));
        if m.converged {
            // Every point sits with a nearest centroid.
            for (i, row) in data.rows().into_iter().enumerate() {
                let own = euclidean_distance(row.as_slice().unwrap(), m.centroids.row(m.assignment[i]).as_slice().unwrap()).unwrap();
                for c in m.centroids.rows() {
                    let other = euclidean_distance(row.as_slice().unwrap(), c.as_slice().unwrap()).unwrap();
                    prop_assert!(own <= other + 1e-9);
                }
            }
        }
    }

    #[test]
    fn fit_is_deterministic_and_schedule_free(data in matrix(), k in 1usize..5, seed in any::<u64>()) {
        let k = k.min(data.nrows());
        let cfg = KMeansConfig { k, seed, ..KMeansConfig::default() };
        let a = kmeans_fit(data.view(), &cfg);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| kmeans_fit(data.view(), &cfg));
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "outcome depends on scheduling"),
        }
    }
}

#[test]
fn between_ratio_grows_with_k_on_blobs() {
    for seed in 0..10 {
        let (data, _) = common::blobs(6, 15, 3, 0.5, 4.0, seed);
        let mut prev: Option<(f64, bool)> = None;
        for k in 2..=10 {
            let m = kmeans_fit(data.view(), &KMeansConfig { k, seed, ..KMeansConfig::default() }).unwrap();
            if let Some((ratio, _)) = prev {
                assert!(
                    m.between_ratio >= ratio - 1e-12 || !m.converged,
                    "seed {seed}, k {k}: {} < {ratio}",
                    m.between_ratio
                );
            }
            prev = Some((m.between_ratio, m.converged));
        }
    }
}

#[test]
fn seeds_are_distinct_data_points() {
    let data = common::uniform_data(30, 2, 9);
    for init in [Init::DsqWeighted, Init::Maximin] {
        for seed in 0..20 {
            let c = seed_centroids(data.view(), 30, init, &mut stream(seed, 1)).unwrap();
            let mut rows: Vec<Vec<u64>> = c.rows().into_iter().map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
            rows.sort();
            rows.dedup();
            assert_eq!(rows.len(), 30);
        }
    }
}

#[test]
fn too_few_distinct_points_is_a_seeding_error() {
    let data = Array2::from_shape_vec((4, 1), vec![1.0, 1.0, 2.0, 2.0]).unwrap();
    let err = kmeans_fit(data.view(), &KMeansConfig { k: 3, ..KMeansConfig::default() }).unwrap_err();
    assert!(matches!(err, terraclass::Error::Seeding { k: 3, distinct: 2 }), "{err}");
}
