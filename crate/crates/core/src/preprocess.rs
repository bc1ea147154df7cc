//! Data cleaning ahead of clustering: missing-value policy with mean
//! imputation, pruning of strongly correlated indicators, and z-scores.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::model::{IndicatorTable, TerritoryId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessConfig {
    /// Indicators missing in strictly more than this fraction of territories are dropped.
    pub missing_threshold: f64,
    /// Pairs with |r| strictly above this are pruned.
    pub corr_threshold: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            missing_threshold: 0.18,
            corr_threshold: 0.85,
        }
    }
}

impl PreprocessConfig {
    pub fn new(missing_threshold: f64, corr_threshold: f64) -> Result<Self> {
        let cfg = PreprocessConfig {
            missing_threshold,
            corr_threshold,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.missing_threshold) || !open_unit(self.corr_threshold) {
            return Err(Error::domain(format!(
                "thresholds must lie in (0, 1): missing {}, correlation {}",
                self.missing_threshold, self.corr_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissingOutcome {
    pub table: IndicatorTable,
    pub dropped: Vec<String>,
    pub imputed: Vec<(TerritoryId, String)>,
}

/// Drop indicators whose missing fraction exceeds the threshold and fill the
/// remaining gaps with the column mean of observed cells.
pub fn apply_missing_policy(table: &IndicatorTable, cfg: &PreprocessConfig) -> Result<MissingOutcome> {
    cfg.check()?;
    let n = table.n_rows();
    if n == 0 {
        return Err(Error::Preprocess("indicator table has no territories".into()));
    }
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for col in 0..table.n_cols() {
        let fraction = table.missing_count(col) as f64 / n as f64;
        if fraction > cfg.missing_threshold {
            dropped.push(table.indicators()[col].id.clone());
        } else {
            keep.push(col);
        }
    }

    let mut out = table.select_columns(&keep);
    let mut imputed = Vec::new();
    for col in 0..out.n_cols() {
        let observed: Vec<f64> = out.column(col).into_iter().flatten().collect();
        if observed.is_empty() {
            return Err(Error::Preprocess(format!(
                "indicator `{}` has no observed values",
                out.indicators()[col].id
            )));
        }
        let mean = observed.iter().sum::<f64>() / observed.len() as f64;
        for row in 0..n {
            if out.get(row, col).is_none() {
                out.set(row, col, Some(mean));
                imputed.push((out.territories()[row].clone(), out.indicators()[col].id.clone()));
            }
        }
    }
    Ok(MissingOutcome {
        table: out,
        dropped,
        imputed,
    })
}

fn mean_and_ss(x: &[f64]) -> (f64, f64) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let ss = x.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, ss)
}

/// True when a column carries no variation beyond rounding noise.
fn is_constant(x: &[f64]) -> bool {
    let (mean, ss) = mean_and_ss(x);
    let scale = x.iter().fold(mean.abs(), |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    (ss / x.len() as f64).sqrt() <= 1e-12 * scale
}

/// Pearson correlation; `None` when either column is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 || is_constant(a) || is_constant(b) {
        return None;
    }
    let (ma, ssa) = mean_and_ss(a);
    let (mb, ssb) = mean_and_ss(b);
    let cross: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    Some((cross / (ssa * ssb).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrunedPair {
    pub kept: String,
    pub dropped: String,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneOutcome {
    pub table: IndicatorTable,
    pub pairs: Vec<PrunedPair>,
    /// Columns removed because correlation is undefined for them.
    pub zero_variance: Vec<String>,
}

/// Repeatedly drop the later indicator of the first pair (in column order)
/// whose absolute correlation exceeds the threshold.
pub fn prune_correlated(table: &IndicatorTable, cfg: &PreprocessConfig) -> Result<PruneOutcome> {
    cfg.check()?;
    if table.total_missing() > 0 {
        return Err(Error::Preprocess(
            "correlation pruning needs a table without missing cells".into(),
        ));
    }
    let columns: Vec<Vec<f64>> = (0..table.n_cols()).map(|c| table.dense_column(c)).collect();
    let ids = table.indicator_ids();

    let mut zero_variance = Vec::new();
    let mut alive: Vec<usize> = Vec::new();
    for (c, col) in columns.iter().enumerate() {
        if col.len() < 2 || is_constant(col) {
            zero_variance.push(ids[c].clone());
        } else {
            alive.push(c);
        }
    }

    let n = columns.len();
    let mut r = vec![0.0; n * n];
    for (ai, &i) in alive.iter().enumerate() {
        for &j in &alive[ai + 1..] {
            let v = pearson(&columns[i], &columns[j]).unwrap_or(0.0);
            r[i * n + j] = v;
            r[j * n + i] = v;
        }
    }

    let mut pairs = Vec::new();
    'scan: loop {
        for (ai, &i) in alive.iter().enumerate() {
            for (aj, &j) in alive.iter().enumerate().skip(ai + 1) {
                let rij = r[i * n + j];
                if rij.abs() > cfg.corr_threshold {
                    pairs.push(PrunedPair {
                        kept: ids[i].clone(),
                        dropped: ids[j].clone(),
                        r: rij,
                    });
                    alive.remove(aj);
                    continue 'scan;
                }
            }
        }
        break;
    }

    Ok(PruneOutcome {
        table: table.select_columns(&alive),
        pairs,
        zero_variance,
    })
}

/// Z-scored indicator matrix; rows are territories, columns indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedMatrix {
    pub rows: Vec<TerritoryId>,
    pub cols: Vec<String>,
    pub data: Array2<f64>,
    pub col_means: Vec<f64>,
    pub col_stds: Vec<f64>,
}

impl StandardizedMatrix {
    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.data.ncols()
    }

    /// Map standardized values back to original units.
    pub fn inverse(&self) -> Array2<f64> {
        let mut out = self.data.clone();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|z| z * self.col_stds[j] + self.col_means[j]);
        }
        out
    }

    /// Map a matrix with the same columns (e.g. centroids) back to original units.
    pub fn inverse_rows(&self, m: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = m.to_owned();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|z| z * self.col_stds[j] + self.col_means[j]);
        }
        out
    }
}

/// Subtract column means and divide by sample standard deviations.
pub fn standardize(table: &IndicatorTable) -> Result<StandardizedMatrix> {
    if table.total_missing() > 0 {
        return Err(Error::Preprocess(
            "standardization needs a table without missing cells".into(),
        ));
    }
    let (n, d) = (table.n_rows(), table.n_cols());
    if n < 2 {
        return Err(Error::Preprocess(
            "standardization needs at least two territories".into(),
        ));
    }
    let mut data = Array2::zeros((n, d));
    let mut col_means = Vec::with_capacity(d);
    let mut col_stds = Vec::with_capacity(d);
    for c in 0..d {
        let x = table.dense_column(c);
        if is_constant(&x) {
            return Err(Error::ZeroVariance(table.indicators()[c].id.clone()));
        }
        let (mean, ss) = mean_and_ss(&x);
        let std = (ss / (n - 1) as f64).sqrt();
        for (r, v) in x.iter().enumerate() {
            data[[r, c]] = (v - mean) / std;
        }
        col_means.push(mean);
        col_stds.push(std);
    }
    Ok(StandardizedMatrix {
        rows: table.territories().to_vec(),
        cols: table.indicator_ids(),
        data,
        col_means,
        col_stds,
    })
}
