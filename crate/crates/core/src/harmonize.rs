//! Bringing heterogeneous-resolution sources to one value per finest-level
//! territory.
//!
//! Country totals are spread over territories proportionally to a proxy
//! weight, raw totals are divided by area or population, monthly degree
//! days are accumulated to an annual figure, and territory polygons yield
//! the centroid coordinates used as closeness indicators.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{CoarseValue, Dataset, IndicatorTable, NormalizationBasis, ProxyTable, TerritoryId};

/// Indicator ids filled from territory centroids when left unobserved.
pub const LATITUDE_IDS: [&str; 1] = ["lat"];
pub const LONGITUDE_IDS: [&str; 2] = ["long", "lon"];

/// Parameters of the municipal solid waste energy conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MswParams {
    /// MJ per kg.
    pub lower_heating_value: f64,
    pub equivalence_ratio: f64,
}

impl Default for MswParams {
    fn default() -> Self {
        MswParams {
            lower_heating_value: 13.8,
            equivalence_ratio: 0.3,
        }
    }
}

impl MswParams {
    pub fn new(lower_heating_value: f64, equivalence_ratio: f64) -> Result<Self> {
        if !(lower_heating_value > 0.0 && equivalence_ratio > 0.0) {
            return Err(Error::domain(
                "heating value and equivalence ratio must both be positive",
            ));
        }
        Ok(MswParams {
            lower_heating_value,
            equivalence_ratio,
        })
    }
}

/// Distribute country values over the country's territories proportionally
/// to the proxy weights. Territories absent from the proxy weigh zero.
///
/// Only countries listed in `coarse` appear in the output.
pub fn downscale_by_proxy(
    coarse: &[CoarseValue],
    proxy: &ProxyTable,
    territories: &[TerritoryId],
) -> Result<BTreeMap<TerritoryId, f64>> {
    let mut by_country: BTreeMap<&str, Vec<&TerritoryId>> = BTreeMap::new();
    for t in territories {
        by_country.entry(t.country()).or_default().push(t);
    }

    let mut out = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for cv in coarse {
        if !seen.insert(cv.country.as_str()) {
            return Err(Error::domain(format!(
                "duplicate coarse value for country {} of `{}`",
                cv.country, proxy.indicator_id
            )));
        }
        if !cv.value.is_finite() {
            return Err(Error::domain(format!(
                "non-finite coarse value for country {}",
                cv.country
            )));
        }
        let members = by_country.get(cv.country.as_str()).cloned().unwrap_or_default();
        let weight = |t: &TerritoryId| proxy.weights.get(t).copied().unwrap_or(0.0);
        let mut mass = 0.0;
        for t in &members {
            let w = weight(t);
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::domain(format!(
                    "proxy `{}` has invalid weight {w} for {t}",
                    proxy.indicator_id
                )));
            }
            mass += w;
        }
        if cv.value == 0.0 {
            out.extend(members.into_iter().map(|t| (t.clone(), 0.0)));
            continue;
        }
        if mass <= 0.0 {
            return Err(Error::Downscale {
                indicator: proxy.indicator_id.clone(),
                country: cv.country.clone(),
            });
        }
        for t in members {
            out.insert(t.clone(), cv.value * weight(t) / mass);
        }
    }
    Ok(out)
}

/// Energy recoverable from a mass of municipal solid waste, in MJ.
pub fn msw_potential(quantity_kg: f64, params: &MswParams) -> Result<f64> {
    if !(quantity_kg >= 0.0) {
        return Err(Error::domain(format!(
            "waste quantity must be nonnegative, got {quantity_kg}"
        )));
    }
    Ok(quantity_kg * params.lower_heating_value * params.equivalence_ratio)
}

/// Divide each value by its territory's denominator (area or population).
pub fn normalize_indicator(
    values: &BTreeMap<TerritoryId, f64>,
    denominators: &BTreeMap<TerritoryId, f64>,
) -> Result<BTreeMap<TerritoryId, f64>> {
    values
        .iter()
        .map(|(t, &v)| {
            let d = denominators.get(t).copied().unwrap_or(f64::NAN);
            if !(d > 0.0) {
                return Err(Error::Normalize {
                    territory: t.to_string(),
                    value: d,
                });
            }
            Ok((t.clone(), v / d))
        })
        .collect()
}

/// Annual degree days from twelve monthly values.
pub fn annualize_degree_days(monthly: &[f64]) -> Result<f64> {
    if monthly.len() != 12 {
        return Err(Error::domain(format!(
            "expected 12 monthly degree-day values, got {}",
            monthly.len()
        )));
    }
    if let Some(bad) = monthly.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::domain(format!(
            "monthly degree days must be finite and nonnegative, got {bad}"
        )));
    }
    Ok(monthly.iter().sum())
}

/// Signed area and first moments of a ring, with the closing vertex optional.
fn ring_moments(ring: &[(f64, f64)]) -> (f64, f64, f64) {
    let pts = match (ring.first(), ring.last()) {
        (Some(a), Some(b)) if ring.len() > 1 && a == b => &ring[..ring.len() - 1],
        _ => ring,
    };
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..pts.len() {
        let (x0, y0) = pts[i];
        let (x1, y1) = pts[(i + 1) % pts.len()];
        let cross = x0 * y1 - x1 * y0;
        a2 += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
    }
    // area, Σ x·dA, Σ y·dA
    (a2 / 2.0, cx / 6.0, cy / 6.0)
}

fn open_len(ring: &[(f64, f64)]) -> usize {
    match (ring.first(), ring.last()) {
        (Some(a), Some(b)) if ring.len() > 1 && a == b => ring.len() - 1,
        _ => ring.len(),
    }
}

/// Area-weighted planar centroid of a simple ring of `(lon, lat)` vertices.
pub fn compute_centroid(ring: &[(f64, f64)]) -> Result<(f64, f64)> {
    if open_len(ring) < 3 {
        return Err(Error::Geometry(format!(
            "ring has {} distinct vertices, need at least 3",
            open_len(ring)
        )));
    }
    let (area, mx, my) = ring_moments(ring);
    if area == 0.0 || !area.is_finite() {
        return Err(Error::Geometry("ring has zero area".into()));
    }
    Ok((mx / area, my / area))
}

/// Centroid of a set of polygons, each given as an outer ring followed by holes.
pub fn polygons_centroid(polygons: &[Vec<Vec<(f64, f64)>>]) -> Result<(f64, f64)> {
    let mut area = 0.0;
    let mut mx = 0.0;
    let mut my = 0.0;
    for rings in polygons {
        for (i, ring) in rings.iter().enumerate() {
            if open_len(ring) < 3 {
                return Err(Error::Geometry("ring with fewer than 3 vertices".into()));
            }
            let (a, x, y) = ring_moments(ring);
            // Orientation-independent: outer rings add, holes subtract.
            let sign = if (i == 0) == (a >= 0.0) { 1.0 } else { -1.0 };
            area += sign * a;
            mx += sign * x;
            my += sign * y;
        }
    }
    if area == 0.0 || !area.is_finite() {
        return Err(Error::Geometry("geometry has zero area".into()));
    }
    Ok((mx / area, my / area))
}

/// What harmonization did to each indicator.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HarmonizeLog {
    pub downscaled: Vec<String>,
    pub normalized: Vec<(String, NormalizationBasis)>,
    pub from_centroids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Harmonized {
    pub table: IndicatorTable,
    pub log: HarmonizeLog,
}

/// Produce the per-territory indicator table for a validated dataset.
///
/// Indicators with coarse values are downscaled through their proxy table;
/// `per_area` and `per_capita` columns are divided by area or population;
/// unobserved `lat`/`long` columns are filled from territory centroids
/// (`centroids` overrides the coordinates stored on the territories).
pub fn harmonize_dataset(
    dataset: &Dataset,
    centroids: Option<&BTreeMap<TerritoryId, (f64, f64)>>,
) -> Result<Harmonized> {
    let mut table = dataset.table.clone();
    let mut log = HarmonizeLog::default();
    let ids: Vec<TerritoryId> = table.territories().to_vec();

    for (indicator, coarse) in &dataset.coarse {
        let col = table
            .column_index(indicator)
            .ok_or_else(|| Error::domain(format!("coarse values for unknown indicator `{indicator}`")))?;
        let proxy = dataset
            .proxies
            .iter()
            .find(|p| &p.indicator_id == indicator)
            .ok_or_else(|| Error::domain(format!("no proxy table for `{indicator}`")))?;
        let fine = downscale_by_proxy(coarse, proxy, &ids)?;
        for (row, t) in ids.iter().enumerate() {
            if let Some(v) = fine.get(t) {
                table.set(row, col, Some(*v));
            }
        }
        log.downscaled.push(indicator.clone());
    }

    let area: BTreeMap<TerritoryId, f64> = dataset
        .territories
        .iter()
        .map(|t| (t.id.clone(), t.area_km2))
        .collect();
    let population: BTreeMap<TerritoryId, f64> = dataset
        .territories
        .iter()
        .map(|t| (t.id.clone(), t.population))
        .collect();

    for col in 0..table.n_cols() {
        let def = table.indicators()[col].clone();
        let denominators = match def.basis {
            NormalizationBasis::PerArea => &area,
            NormalizationBasis::PerCapita => &population,
            NormalizationBasis::MedianPerSite | NormalizationBasis::None => continue,
        };
        let observed: BTreeMap<TerritoryId, f64> = ids
            .iter()
            .enumerate()
            .filter_map(|(row, t)| table.get(row, col).map(|v| (t.clone(), v)))
            .collect();
        let normalized = normalize_indicator(&observed, denominators)?;
        for (row, t) in ids.iter().enumerate() {
            if let Some(v) = normalized.get(t) {
                table.set(row, col, Some(*v));
            }
        }
        log.normalized.push((def.id.clone(), def.basis));
    }

    let coords: BTreeMap<&TerritoryId, (f64, f64)> = dataset
        .territories
        .iter()
        .map(|t| {
            let c = centroids
                .and_then(|m| m.get(&t.id).copied())
                .unwrap_or((t.lon, t.lat));
            (&t.id, c)
        })
        .collect();
    for col in 0..table.n_cols() {
        let id = table.indicators()[col].id.clone();
        let pick: fn((f64, f64)) -> f64 = if LATITUDE_IDS.contains(&id.as_str()) {
            |(_, lat)| lat
        } else if LONGITUDE_IDS.contains(&id.as_str()) {
            |(lon, _)| lon
        } else {
            continue;
        };
        if table.missing_count(col) != table.n_rows() {
            continue;
        }
        for (row, t) in ids.iter().enumerate() {
            if let Some(c) = coords.get(t) {
                table.set(row, col, Some(pick(*c)));
            }
        }
        log.from_centroids.push(id);
    }

    Ok(Harmonized { table, log })
}
