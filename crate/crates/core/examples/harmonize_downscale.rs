//! Spread national totals over territories by proxy weight, then express
//! them per km².

use std::collections::BTreeMap;

use terraclass::harmonize::{compute_centroid, downscale_by_proxy, normalize_indicator};
use terraclass::model::{CoarseValue, ProxyTable, TerritoryId};

fn main() -> terraclass::Result<()> {
    let ids: Vec<TerritoryId> = ["AT111", "AT112", "AT113", "DE111", "DE112"]
        .iter()
        .map(|c| TerritoryId::parse(c))
        .collect::<terraclass::Result<_>>()?;

    // Agricultural land area per territory serves as the proxy.
    let weights: BTreeMap<TerritoryId, f64> =
        ids.iter().cloned().zip([120.0, 60.0, 20.0, 300.0, 100.0]).collect();
    let proxy = ProxyTable { indicator_id: "p_agr".into(), weights };
    let national = vec![
        CoarseValue { country: "AT".into(), value: 1.0e6 },
        CoarseValue { country: "DE".into(), value: 4.0e6 },
    ];
    let fine = downscale_by_proxy(&national, &proxy, &ids)?;

    let area: BTreeMap<TerritoryId, f64> =
        ids.iter().cloned().zip([400.0, 250.0, 90.0, 1200.0, 800.0]).collect();
    let per_km2 = normalize_indicator(&fine, &area)?;

    println!("{:<8}{:>14}{:>14}", "nuts3", "MJ", "MJ/km2");
    for t in &ids {
        println!("{:<8}{:>14.1}{:>14.2}", t, fine[t], per_km2[t]);
    }

    // Territories without coordinates get the centroid of their outline.
    let l_shape = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 3.0), (0.0, 3.0)];
    let (x, y) = compute_centroid(&l_shape)?;
    println!("centroid of an L-shaped outline: ({x:.4}, {y:.4})");
    Ok(())
}
