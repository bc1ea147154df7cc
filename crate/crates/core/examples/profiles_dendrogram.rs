//! Qualitative centroid profiles, the centroid dendrogram and a macro-region
//! summary.

use std::collections::BTreeMap;

use terraclass::fixture::{generate_fixture, FixtureSpec};
use terraclass::harmonize::harmonize_dataset;
use terraclass::kmeans::{kmeans_fit, KMeansConfig};
use terraclass::model::TerritoryId;
use terraclass::preprocess::standardize;
use terraclass::profile::{bin_centroids, centroid_dendrogram, macro_region_report};

fn main() -> terraclass::Result<()> {
    let spec = FixtureSpec { n_territories: 120, n_blobs: 5, d_energy: 3, d_socio: 2, seed: 2, ..Default::default() };
    let fixture = generate_fixture(&spec)?;
    let table = harmonize_dataset(&fixture.dataset, None)?.table;
    let z = standardize(&table)?;
    let model = kmeans_fit(z.view(), &KMeansConfig { k: 5, ..KMeansConfig::default() })?;

    for p in bin_centroids(&model, &z.cols)? {
        let levels: Vec<String> = p.levels.iter().map(|(id, l)| format!("{id}={l}")).collect();
        println!("cluster {} ({} territories): {}", p.cluster, model.sizes[p.cluster], levels.join(" "));
    }

    let tree = centroid_dendrogram(&model)?;
    for (i, m) in tree.merges.iter().enumerate() {
        println!("node {}: {} + {} at height {:.3}", tree.k + i, m.left, m.right, m.height);
    }
    println!("leaf order {:?}", tree.leaf_order());

    let assignment: BTreeMap<TerritoryId, usize> = z.rows.iter().cloned().zip(model.assignment.iter().copied()).collect();
    let profiles = bin_centroids(&model, &z.cols)?;
    for region in &fixture.dataset.regions {
        let r = macro_region_report(&assignment, &profiles, region)?;
        println!("{}: {} territories, {} clusters, frequencies {:?}", r.region, r.size, r.n_clusters_present, r.cluster_frequencies);
    }
    Ok(())
}
