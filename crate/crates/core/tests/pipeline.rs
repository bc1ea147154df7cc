mod common;

use proptest::prelude::*;

use terraclass::config::RunConfig;
use terraclass::fixture::{generate_fixture, write_fixture, FixtureSpec, Noise};
use terraclass::io::{load_dataset, read_assignments, DatasetPaths};
use terraclass::pipeline::{run_dataset, run_pipeline, Stage, OUTPUT_FILES};

fn small_config() -> RunConfig {
    RunConfig { k_min: 2, k_max: 4, n_starts: 3, ..RunConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Any well-formed synthetic dataset runs to completion.
    #[test]
    fn random_datasets_complete(
        blobs in 1usize..4,
        extra in 0usize..30,
        d_energy in 0usize..8,
        d_socio in 1usize..4,
        countries in 1usize..6,
        sparse in prop::option::of(0.0f64..0.4),
        uniform in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let n = 3 * blobs + 6 + extra;
        let spec = FixtureSpec {
            n_territories: n,
            n_blobs: blobs,
            d_energy,
            d_socio,
            seed,
            separation: 6.0,
            n_countries: countries.min(n),
            noise: if uniform { Noise::Uniform } else { Noise::Gaussian },
            sparse_fraction: sparse,
        };
        let f = generate_fixture(&spec).unwrap();
        let out = run_dataset(&small_config(), &f.dataset, Some(f.geometry.clone())).unwrap();
        prop_assert_eq!(out.model.assignment.len(), n);
        prop_assert!((2..=4).contains(&out.report.k));
        prop_assert_eq!(out.report.cluster_sizes.iter().sum::<usize>(), n);
        let total_regions: usize = out.region_reports.iter().map(|r| r.cluster_frequencies.values().sum::<usize>()).sum();
        prop_assert_eq!(total_regions, out.region_reports.iter().map(|r| r.size).sum::<usize>());
        if let Some(fr) = sparse {
            let dropped = out.report.dropped.contains(&"sparse".to_string());
            let missing = (fr * n as f64).round() / n as f64;
            prop_assert_eq!(dropped, missing > 0.18);
        }
    }
}

#[test]
fn bundled_fixture_recovers_planted_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::from_file(&common::bundled_fixture().join("config.txt")).unwrap();
    assert_eq!(cfg.seed, 42);
    cfg.out = dir.path().to_path_buf();
    let report = run_pipeline(&cfg).unwrap();
    assert_eq!(report.k, 17);
    for name in OUTPUT_FILES.iter().chain(&["map.geojson"]) {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }

    // planted_key.csv has a `blob` column rather than `cluster`.
    let text = std::fs::read_to_string(common::bundled_fixture().join("planted_key.csv")).unwrap();
    let planted: std::collections::BTreeMap<String, usize> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (t, b) = l.split_once(',').unwrap();
            (t.to_string(), b.parse().unwrap())
        })
        .collect();
    let found = read_assignments(&dir.path().join("assignments.csv")).unwrap();
    let a: Vec<usize> = found.keys().map(|t| planted[t.code()]).collect();
    let b: Vec<usize> = found.values().copied().collect();
    assert!(common::ari(&a, &b) >= 0.9);

    let geo: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("map.geojson")).unwrap()).unwrap();
    let feature = &geo["features"][0];
    assert!(feature["properties"]["cluster"].is_u64());
    assert!(feature["properties"]["cluster_levels"].is_object());
}

#[test]
fn fixture_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = FixtureSpec { n_territories: 90, n_blobs: 3, seed: 12, ..Default::default() };
    let f = generate_fixture(&spec).unwrap();
    write_fixture(&f, dir.path()).unwrap();
    let loaded = load_dataset(&DatasetPaths::in_dir(dir.path())).unwrap();
    assert_eq!(loaded.territories, f.dataset.territories);
    assert_eq!(loaded.coarse.keys().collect::<Vec<_>>(), f.dataset.coarse.keys().collect::<Vec<_>>());
    assert_eq!(loaded.regions, f.dataset.regions);

    let again = tempfile::tempdir().unwrap();
    write_fixture(&generate_fixture(&spec).unwrap(), again.path()).unwrap();
    assert_eq!(common::read_files(dir.path()), common::read_files(again.path()));
}

#[test]
fn quarter_missing_indicator_is_reported_as_dropped() {
    let spec = FixtureSpec { n_territories: 80, n_blobs: 4, sparse_fraction: Some(0.25), seed: 2, ..Default::default() };
    let f = generate_fixture(&spec).unwrap();
    let out = run_dataset(&small_config(), &f.dataset, None).unwrap();
    assert_eq!(out.report.dropped, ["sparse"]);
    assert!(out.report.to_text().contains("preprocess.dropped = sparse\n"));
}

#[test]
fn missing_input_is_an_ingestion_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::for_data_dir(dir.path());
    cfg.out = dir.path().join("out");
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.stage, Stage::Ingest);
}

#[test]
fn too_few_territories_for_the_vote_fails_in_tendency() {
    let spec = FixtureSpec { n_territories: 12, n_blobs: 2, seed: 1, ..Default::default() };
    let f = generate_fixture(&spec).unwrap();
    let cfg = RunConfig { k_min: 5, k_max: 20, ..RunConfig::default() };
    let err = run_dataset(&cfg, &f.dataset, None).unwrap_err();
    assert_eq!(err.stage, Stage::Tendency);
}
