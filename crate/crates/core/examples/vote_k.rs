//! Pick the number of clusters by majority vote of validity indices.

use terraclass::fixture::{generate_fixture, FixtureSpec};
use terraclass::harmonize::harmonize_dataset;
use terraclass::preprocess::{standardize, PreprocessConfig, apply_missing_policy};
use terraclass::tendency::{vote_k, KVoteConfig};

fn main() -> terraclass::Result<()> {
    let spec = FixtureSpec { n_territories: 200, n_blobs: 8, seed: 11, ..Default::default() };
    let fixture = generate_fixture(&spec)?;
    let harmonized = harmonize_dataset(&fixture.dataset, None)?;
    let table = apply_missing_policy(&harmonized.table, &PreprocessConfig::default())?.table;
    let z = standardize(&table)?;

    let cfg = KVoteConfig { seed: 3, ..KVoteConfig::range(5, 12) };
    let vote = vote_k(z.view(), &cfg)?;
    for (index, k) in &vote.per_index {
        println!("{index:<18} votes for k = {k}");
    }
    println!("votes per k: {:?}", vote.votes);
    println!("chosen k = {} (planted {})", vote.k_best, spec.n_blobs);
    Ok(())
}
