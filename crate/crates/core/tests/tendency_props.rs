mod common;

use proptest::prelude::*;

use terraclass::fixture::{generate_fixture, FixtureSpec};
use terraclass::harmonize::harmonize_dataset;
use terraclass::kmeans::{kmeans_fit, KMeansConfig};
use terraclass::preprocess::standardize;
use terraclass::tendency::{
    hopkins, project_2d, validity_index, vote_k, HopkinsConfig, IndexKind, KVoteConfig, Preference,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hopkins_is_a_deterministic_fraction(n in 12usize..80, d in 1usize..4, seed in any::<u64>()) {
        let data = common::uniform_data(n, d, seed);
        let cfg = HopkinsConfig::for_rows(n, seed);
        let a = hopkins(data.view(), &cfg).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(a, hopkins(data.view(), &cfg).unwrap());
    }

    #[test]
    fn projection_orders_variance(n in 5usize..60, d in 2usize..5, seed in any::<u64>()) {
        let data = common::uniform_data(n, d, seed);
        let p = project_2d(data.view()).unwrap();
        let var = |f: &dyn Fn(&(f64, f64)) -> f64| {
            let m = p.iter().map(f).sum::<f64>() / n as f64;
            p.iter().map(|q| (f(q) - m).powi(2)).sum::<f64>()
        };
        prop_assert!(var(&|q| q.0) + 1e-9 >= var(&|q| q.1));
    }
}

#[test]
fn maximize_indices_peak_at_true_k() {
    let maximize: Vec<IndexKind> = IndexKind::ALL.into_iter().filter(|k| k.preference() == Preference::Maximize).collect();
    for kind in maximize {
        let mut wins = 0;
        for seed in 0..10 {
            let (data, _) = common::blobs(5, 20, 3, 0.3, 4.0, 800 + seed);
            let score = |k: usize| {
                let m = kmeans_fit(data.view(), &KMeansConfig { k, seed, ..KMeansConfig::default() }).unwrap();
                validity_index(data.view(), &m, kind).unwrap()
            };
            let at = score(5);
            wins += (at > score(3) && at > score(7)) as usize;
        }
        assert!(wins >= 8, "{kind}: true k preferred in {wins}/10 seeds");
    }
}

#[test]
fn calinski_harabasz_prefers_blobs_to_noise() {
    let uniform = common::uniform_data(60, 2, 1);
    let (blobs, _) = common::blobs(2, 30, 2, 0.05, 1.0, 1);
    let ch = |d: &ndarray::Array2<f64>| {
        let m = kmeans_fit(d.view(), &KMeansConfig { k: 2, ..KMeansConfig::default() }).unwrap();
        validity_index(d.view(), &m, IndexKind::CalinskiHarabasz).unwrap()
    };
    assert!(ch(&blobs) > ch(&uniform));
}

#[test]
fn vote_is_deterministic_and_schedule_free() {
    let (data, _) = common::blobs(4, 15, 2, 0.2, 3.0, 3);
    let cfg = KVoteConfig { seed: 5, n_starts: 3, ..KVoteConfig::range(2, 6) };
    let a = vote_k(data.view(), &cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| vote_k(data.view(), &cfg).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.k_best, 4);
    assert_eq!(a.votes.values().sum::<usize>() + a.abstained.len(), cfg.indices.len());
}

/// Widely separated fixtures: the vote should find the planted count.
#[test]
fn vote_recovers_planted_k_on_wide_blobs() {
    let mut hits = 0;
    for seed in 0..10u64 {
        let spec = FixtureSpec { n_territories: 340, n_blobs: 17, separation: 10.0, seed: 100 + seed, ..Default::default() };
        let f = generate_fixture(&spec).unwrap();
        let z = standardize(&harmonize_dataset(&f.dataset, None).unwrap().table).unwrap();
        let v = vote_k(z.view(), &KVoteConfig { seed, ..KVoteConfig::default() }).unwrap();
        hits += (v.k_best == 17) as usize;
    }
    assert!(hits >= 8, "k = 17 voted in {hits}/10 seeds");
}

#[test]
fn single_uniform_blob_looks_random() {
    let spec = FixtureSpec { n_territories: 400, n_blobs: 1, noise: terraclass::fixture::Noise::Uniform, seed: 4, ..Default::default() };
    let f = generate_fixture(&spec).unwrap();
    let z = standardize(&harmonize_dataset(&f.dataset, None).unwrap().table).unwrap();
    let h = hopkins(z.view(), &HopkinsConfig::for_rows(z.n_rows(), 1)).unwrap();
    assert!((h - 0.5).abs() < 0.05, "H = {h}");
}
