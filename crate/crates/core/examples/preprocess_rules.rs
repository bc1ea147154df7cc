//! Missing-value policy, correlation pruning and z-scoring on a small table.

use terraclass::model::{IndicatorDef, IndicatorKind, IndicatorTable, NormalizationBasis, TerritoryId};
use terraclass::preprocess::{apply_missing_policy, prune_correlated, standardize, PreprocessConfig};

fn main() -> terraclass::Result<()> {
    let n = 50;
    let ids: Vec<TerritoryId> = (0..n)
        .map(|i| TerritoryId::parse(&format!("PL{i:03}")))
        .collect::<terraclass::Result<_>>()?;
    let def = |id: &str| IndicatorDef::new(id, IndicatorKind::NonEnergy, "-", NormalizationBasis::None);
    let mut table = IndicatorTable::empty(ids, vec![def("gdp"), def("income"), def("r_edu"), def("hdd")]);
    for i in 0..n {
        let x = i as f64;
        table.set(i, 0, Some(10.0 + x));
        // Income tracks GDP almost exactly, so one of the two goes.
        table.set(i, 1, Some(2.0 * x + (x * 1.7).sin()));
        // 8% missing: imputed with the column mean.
        table.set(i, 2, (i % 12 != 0).then(|| (x * 0.9).cos()));
        // 20% missing: dropped.
        table.set(i, 3, (i % 5 != 0).then_some(3000.0 - 10.0 * x));
    }

    let cfg = PreprocessConfig::default();
    let missing = apply_missing_policy(&table, &cfg)?;
    println!("dropped for missingness: {:?}", missing.dropped);
    println!("imputed cells: {}", missing.imputed.len());

    let pruned = prune_correlated(&missing.table, &cfg)?;
    for p in &pruned.pairs {
        println!("pruned {} (kept {}, r = {:.4})", p.dropped, p.kept, p.r);
    }

    let z = standardize(&pruned.table)?;
    println!("standardized columns: {:?}", z.cols);
    for (c, (m, s)) in z.cols.iter().zip(z.col_means.iter().zip(&z.col_stds)) {
        println!("  {c}: mean {m:.3}, sd {s:.3}");
    }
    Ok(())
}
