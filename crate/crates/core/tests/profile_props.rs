mod common;

use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array2;
use proptest::prelude::*;

use terraclass::kmeans::ClusterModel;
use terraclass::model::{RegionSet, TerritoryId};
use terraclass::profile::{bin_centroids, complete_linkage, heatmap_matrix, macro_region_report, Binning, QualLevel};

/// Naive complete linkage: recompute every cluster distance from the points.
fn naive_heights(points: &Array2<f64>) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = points.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut clusters: Vec<Vec<usize>> = (0..rows.len()).map(|i| vec![i]).collect();
    let mut heights = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let d = clusters[a]
                    .iter()
                    .flat_map(|&i| clusters[b].iter().map(move |&j| (i, j)))
                    .map(|(i, j)| common::dist(&rows[i], &rows[j]))
                    .fold(0.0, f64::max);
                if d < best.0 {
                    best = (d, a, b);
                }
            }
        }
        let (h, a, b) = best;
        let merged = clusters.remove(b);
        clusters[a].extend(merged);
        heights.push(h);
    }
    heights
}

fn centroid_sets() -> impl Strategy<Value = Array2<f64>> {
    (2usize..12, 1usize..4).prop_flat_map(|(k, d)| {
        prop::collection::vec(-3.0f64..3.0, k * d).prop_map(move |v| Array2::from_shape_vec((k, d), v).unwrap())
    })
}

proptest! {
    #[test]
    fn binning_is_total_and_monotone(a in -1e9f64..1e9, b in -1e9f64..1e9) {
        let bin = Binning::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(bin.level(lo) <= bin.level(hi));
        prop_assert_eq!(QualLevel::ALL.iter().filter(|l| **l == bin.level(a)).count(), 1);
    }

    #[test]
    fn binning_is_symmetric_off_the_cut_points(v in 0.0f64..5.0) {
        let bin = Binning::default();
        let cuts = [0.25, 0.75, 1.5];
        prop_assume!(!cuts.contains(&v) && v != 0.0);
        let up = QualLevel::ALL.iter().position(|l| *l == bin.level(v)).unwrap();
        let down = QualLevel::ALL.iter().position(|l| *l == bin.level(-v)).unwrap();
        prop_assert_eq!(up + down, 6);
    }

    #[test]
    fn complete_linkage_matches_naive_heights(points in centroid_sets()) {
        let tree = complete_linkage(points.view()).unwrap();
        let naive = naive_heights(&points);
        prop_assert_eq!(tree.merges.len(), naive.len());
        for (m, h) in tree.merges.iter().zip(&naive) {
            prop_assert!((m.height - h).abs() < 1e-9, "{} vs {}", m.height, h);
        }
        prop_assert_eq!(tree.merges.last().unwrap().size, points.nrows());
        let leaves = tree.leaf_order();
        prop_assert_eq!(leaves.iter().copied().collect::<BTreeSet<_>>().len(), points.nrows());
    }

    #[test]
    fn heatmap_rows_follow_leaf_order(points in centroid_sets()) {
        let k = points.nrows();
        let assignment: Vec<usize> = (0..k).collect();
        let model = ClusterModel::from_assignment(points.view(), assignment, k).unwrap();
        let heat = heatmap_matrix(&model);
        prop_assert_eq!(&heat.row_order, &complete_linkage(points.view()).unwrap().leaf_order());
        for (i, &c) in heat.row_order.iter().enumerate() {
            prop_assert_eq!(heat.values.row(i), model.centroids.row(c));
        }
    }

    #[test]
    fn region_frequencies_sum_to_size(labels in prop::collection::vec(0usize..6, 1..80), mask in prop::collection::vec(any::<bool>(), 80)) {
        let ids: Vec<TerritoryId> = (0..labels.len()).map(|i| TerritoryId::parse(&format!("SK{i:03}")).unwrap()).collect();
        let assignment: BTreeMap<TerritoryId, usize> = ids.iter().cloned().zip(labels.iter().copied()).collect();
        let centroids = Array2::from_shape_fn((6, 2), |(c, j)| c as f64 - 2.5 + j as f64);
        let model = ClusterModel { k: 6, centroids, assignment: vec![], sizes: vec![], within_ss: 0.0, between_ss: 0.0, total_ss: 0.0, between_ratio: 0.0, iterations_run: 0, converged: true };
        let profiles = bin_centroids(&model, &["a".into(), "b".into()]).unwrap();
        let members: BTreeSet<TerritoryId> = ids.iter().zip(&mask).filter(|(_, m)| **m).map(|(t, _)| t.clone()).collect();
        let region = RegionSet { name: "r".into(), members: members.clone() };
        let r = macro_region_report(&assignment, &profiles, &region).unwrap();
        prop_assert_eq!(r.size, members.len());
        prop_assert_eq!(r.cluster_frequencies.values().sum::<usize>(), members.len());
        prop_assert_eq!(r.n_clusters_present, r.cluster_frequencies.len());
        for (_, lo, hi) in &r.indicator_spread {
            prop_assert!(lo <= hi);
        }
    }
}

#[test]
fn region_member_without_assignment_is_an_error() {
    let t = TerritoryId::parse("SK001").unwrap();
    let region = RegionSet { name: "r".into(), members: [t].into_iter().collect() };
    let err = macro_region_report(&BTreeMap::new(), &[], &region).unwrap_err();
    assert!(matches!(err, terraclass::Error::MissingAssignment(_)));
}
