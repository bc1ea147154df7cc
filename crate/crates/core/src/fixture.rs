//! Synthetic datasets with planted cluster structure.
//!
//! Territories are spread over a handful of countries. Every indicator
//! column is drawn around one of `n_blobs` planted centers, so the planted
//! key is the partition a clustering run should recover. Per-area and
//! per-capita energy indicators are only published as country totals plus
//! proxy weights, exactly consistent with the planted fine-level values.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{self, fmt_num, Geometry};
use crate::model::{
    CoarseValue, Dataset, IndicatorDef, IndicatorKind, IndicatorTable, NormalizationBasis,
    ProxyTable, RegionSet, Territory, TerritoryId,
};
use crate::rng;

const COUNTRIES: [&str; 28] = [
    "AT", "BE", "BG", "CH", "CZ", "DE", "DK", "EE", "EL", "ES", "FI", "FR", "HR", "HU", "IE", "IT",
    "LT", "LU", "LV", "NL", "PL", "PT", "RO", "SE", "SI", "SK", "UK", "CY",
];

const ENERGY: [(&str, &str, NormalizationBasis); 7] = [
    ("p_agr", "MJ/km2", NormalizationBasis::PerArea),
    ("p_for", "MJ/km2", NormalizationBasis::PerArea),
    ("p_liv", "MJ/km2", NormalizationBasis::PerArea),
    ("p_mun", "MJ/inhabitant", NormalizationBasis::PerCapita),
    ("p_ww", "MJ/inhabitant", NormalizationBasis::PerCapita),
    ("p_wind", "W/m2", NormalizationBasis::MedianPerSite),
    ("p_sun", "kWh/m2", NormalizationBasis::MedianPerSite),
];

const SOCIO: [(&str, &str); 8] = [
    ("gdp", "MEUR"),
    ("income", "EUR/inhabitant"),
    ("r_edu", "%"),
    ("r_unemp", "%"),
    ("p_el", "EUR/kWh"),
    ("p_gas", "EUR/kWh"),
    ("hdd", "degree days"),
    ("cdd", "degree days"),
];

const REGIONS: [&str; 4] = ["Adriatic-Ionian", "Alpine", "Baltic Sea", "Danube"];

/// Offset keeping planted indicator values positive.
const BASE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    Gaussian,
    /// Uniform with the same variance as the Gaussian.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub n_territories: usize,
    pub n_blobs: usize,
    pub d_energy: usize,
    pub d_socio: usize,
    pub seed: u64,
    /// Minimum distance between planted centers, in units of the within-blob σ.
    pub separation: f64,
    pub n_countries: usize,
    pub noise: Noise,
    /// Adds an indicator `sparse` with this fraction of missing cells.
    pub sparse_fraction: Option<f64>,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            n_territories: 340,
            n_blobs: 17,
            d_energy: 4,
            d_socio: 3,
            seed: 7,
            separation: 8.0,
            n_countries: 10,
            noise: Noise::Gaussian,
            sparse_fraction: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub spec: FixtureSpec,
    pub dataset: Dataset,
    pub geometry: Geometry,
    /// Planted blob label per territory, in dataset order.
    pub planted: Vec<usize>,
    pub centers: Array2<f64>,
    /// Country totals per downscaled indicator.
    pub national_totals: BTreeMap<String, BTreeMap<String, f64>>,
}

fn indicator_defs(spec: &FixtureSpec) -> Vec<IndicatorDef> {
    let mut defs = Vec::new();
    for i in 0..spec.d_energy {
        let (id, unit, basis) = match ENERGY.get(i) {
            Some(&(id, unit, basis)) => (id.to_string(), unit, basis),
            None => (format!("p_extra{}", i - ENERGY.len() + 1), "MJ/km2", NormalizationBasis::PerArea),
        };
        defs.push(IndicatorDef::new(&id, IndicatorKind::Energy, unit, basis));
    }
    for i in 0..spec.d_socio {
        let (id, unit) = match SOCIO.get(i) {
            Some(&(id, unit)) => (id.to_string(), unit),
            None => (format!("s_extra{}", i - SOCIO.len() + 1), "-"),
        };
        defs.push(IndicatorDef::new(&id, IndicatorKind::NonEnergy, unit, NormalizationBasis::None));
    }
    defs
}

fn plant_centers<R: Rng>(k: usize, d: usize, separation: f64, rng: &mut R) -> Array2<f64> {
    let mut side = separation * 2.0 * (k as f64).powf(1.0 / d as f64).max(1.0);
    loop {
        let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut tries = 0;
        while centers.len() < k && tries < 20_000 {
            tries += 1;
            let c: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..side)).collect();
            let ok = centers.iter().all(|o| {
                o.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() >= separation
            });
            if ok {
                centers.push(c);
            }
        }
        if centers.len() == k {
            let flat: Vec<f64> = centers.into_iter().flatten().collect();
            return Array2::from_shape_vec((k, d), flat).expect("k x d centers");
        }
        side *= 1.25;
    }
}

fn territory_code(country: &str, index: usize) -> String {
    const DIGITS: &[u8] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    let mut n = index + 1;
    let mut tail = [b'0'; 3];
    for slot in tail.iter_mut().rev() {
        *slot = DIGITS[n % 36];
        n /= 36;
    }
    format!("{country}{}", std::str::from_utf8(&tail).expect("ascii"))
}

/// Build a synthetic dataset with known cluster structure.
pub fn generate_fixture(spec: &FixtureSpec) -> Result<Fixture> {
    let n = spec.n_territories;
    let d = spec.d_energy + spec.d_socio;
    if spec.n_blobs == 0 || n < 3 * spec.n_blobs {
        return Err(Error::domain(format!(
            "need at least 3 territories per blob: {n} territories, {} blobs",
            spec.n_blobs
        )));
    }
    if d == 0 {
        return Err(Error::domain("fixture needs at least one indicator"));
    }
    if spec.n_countries == 0 || spec.n_countries > COUNTRIES.len() || spec.n_countries > n {
        return Err(Error::domain(format!(
            "country count must lie in [1, {}]",
            COUNTRIES.len().min(n)
        )));
    }
    if !(spec.separation > 0.0 && spec.separation.is_finite()) {
        return Err(Error::domain("blob separation must be positive"));
    }
    if let Some(f) = spec.sparse_fraction {
        if !(0.0..1.0).contains(&f) {
            return Err(Error::domain("sparse fraction must lie in [0, 1)"));
        }
    }
    if n > 46_655 * spec.n_countries {
        return Err(Error::domain("too many territories per country"));
    }

    let mut rng = rng::stream(spec.seed, 0);
    let centers = plant_centers(spec.n_blobs, d, spec.separation, &mut rng);

    let mut planted: Vec<usize> = (0..n).map(|i| i % spec.n_blobs).collect();
    planted.shuffle(&mut rng);

    let area_dist = LogNormal::new(1500f64.ln(), 0.6).expect("valid lognormal");
    let pop_dist = LogNormal::new(300_000f64.ln(), 0.8).expect("valid lognormal");
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    let half_width = 3f64.sqrt();

    let mut territories = Vec::with_capacity(n);
    let mut country_of = Vec::with_capacity(n);
    let mut features = Vec::with_capacity(n);
    let cell = 0.3;
    for c in 0..spec.n_countries {
        let count = n / spec.n_countries + usize::from(c < n % spec.n_countries);
        let cols = (count as f64).sqrt().ceil() as usize;
        let origin_lat = 38.0 + 8.0 * (c / 6) as f64;
        let origin_lon = -8.0 + 7.0 * (c % 6) as f64;
        for j in 0..count {
            let lat = origin_lat + cell * (j / cols) as f64;
            let lon = origin_lon + cell * (j % cols) as f64;
            let id = TerritoryId::parse(&territory_code(COUNTRIES[c], j))?;
            let h = cell * 0.45;
            let ring: Vec<[f64; 2]> = vec![
                [lon - h, lat - h],
                [lon + h, lat - h],
                [lon + h, lat + h],
                [lon - h, lat + h],
                [lon - h, lat - h],
            ];
            features.push(json!({
                "type": "Feature",
                "properties": {"territory_id": id.code()},
                "geometry": {"type": "Polygon", "coordinates": [ring]},
            }));
            territories.push(Territory {
                id,
                area_km2: area_dist.sample(&mut rng).round().max(1.0),
                population: pop_dist.sample(&mut rng).round(),
                lat,
                lon,
            });
            country_of.push(c);
        }
    }

    let mut defs = indicator_defs(spec);
    // Planted values on the analysis scale, one row per territory.
    let mut planted_values = Array2::<f64>::zeros((n, d));
    for i in 0..n {
        for j in 0..d {
            let z = match spec.noise {
                Noise::Gaussian => normal.sample(&mut rng),
                Noise::Uniform => rng.random_range(-half_width..half_width),
            };
            planted_values[[i, j]] = BASE + centers[[planted[i], j]] + z;
        }
    }
    let sparse_col = spec.sparse_fraction.map(|_| {
        defs.push(IndicatorDef::new("sparse", IndicatorKind::NonEnergy, "-", NormalizationBasis::None));
        defs.len() - 1
    });

    let ids: Vec<TerritoryId> = territories.iter().map(|t| t.id.clone()).collect();
    let mut table = IndicatorTable::empty(ids.clone(), defs.clone());
    let mut coarse: BTreeMap<String, Vec<CoarseValue>> = BTreeMap::new();
    let mut proxies = Vec::new();
    let mut national_totals: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    let country_scale: Vec<f64> = (0..spec.n_countries).map(|_| rng.random_range(0.5..2.0)).collect();

    for (j, def) in defs.iter().enumerate().take(d) {
        let denominator = |t: &Territory| match def.basis {
            NormalizationBasis::PerArea => Some(t.area_km2),
            NormalizationBasis::PerCapita => Some(t.population),
            _ => None,
        };
        if def.kind == IndicatorKind::Energy && denominator(&territories[0]).is_some() {
            let mut totals: BTreeMap<String, f64> = BTreeMap::new();
            let mut weights = BTreeMap::new();
            for (i, t) in territories.iter().enumerate() {
                let raw = planted_values[[i, j]] * denominator(t).expect("basis has a denominator");
                *totals.entry(t.id.country().to_string()).or_default() += raw;
                // Proxy units differ per country; only within-country ratios matter.
                weights.insert(t.id.clone(), raw * country_scale[country_of[i]]);
            }
            coarse.insert(
                def.id.clone(),
                totals
                    .iter()
                    .map(|(c, v)| CoarseValue { country: c.clone(), value: *v })
                    .collect(),
            );
            proxies.push(ProxyTable { indicator_id: def.id.clone(), weights });
            national_totals.insert(def.id.clone(), totals);
        } else {
            for i in 0..n {
                table.set(i, j, Some(planted_values[[i, j]]));
            }
        }
    }
    if let (Some(col), Some(fraction)) = (sparse_col, spec.sparse_fraction) {
        let missing = (fraction * n as f64).round() as usize;
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        let gaps: BTreeSet<usize> = rows.into_iter().take(missing).collect();
        for i in 0..n {
            let v = (!gaps.contains(&i)).then(|| rng.random_range(0.0..1.0));
            table.set(i, col, v);
        }
    }

    let mut regions = Vec::new();
    for (r, name) in REGIONS.iter().enumerate() {
        let members: BTreeSet<TerritoryId> = territories
            .iter()
            .zip(&country_of)
            .filter(|(_, &c)| c % REGIONS.len() == r || (c + 1) % REGIONS.len() == r)
            .map(|(t, _)| t.id.clone())
            .collect();
        if !members.is_empty() {
            regions.push(RegionSet { name: name.to_string(), members });
        }
    }

    Ok(Fixture {
        spec: spec.clone(),
        dataset: Dataset {
            territories,
            table,
            coarse,
            proxies,
            regions,
        },
        geometry: Geometry {
            doc: json!({"type": "FeatureCollection", "features": Value::Array(features)}),
        },
        planted,
        centers,
        national_totals,
    })
}

/// Write the fixture as a dataset directory, plus `planted_key.csv` and a
/// ready-to-use `config.txt`.
pub fn write_fixture(fixture: &Fixture, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::export(dir, e))?;
    let ds = &fixture.dataset;

    let rows: Vec<Vec<String>> = ds
        .territories
        .iter()
        .map(|t| {
            vec![
                t.id.to_string(),
                fmt_num(t.area_km2),
                fmt_num(t.population),
                fmt_num(t.lat),
                fmt_num(t.lon),
            ]
        })
        .collect();
    io::write_csv(&dir.join("territories.csv"), &["territory_id", "area_km2", "population", "lat", "lon"], &rows)?;
    io::write_indicator_defs(&dir.join("indicator_defs.csv"), ds.table.indicators())?;

    // Coarse-only indicators have no fine-level rows at all.
    let mut rows = Vec::new();
    for (r, t) in ds.table.territories().iter().enumerate() {
        for (c, def) in ds.table.indicators().iter().enumerate() {
            if ds.coarse.contains_key(&def.id) {
                continue;
            }
            rows.push(vec![
                t.to_string(),
                def.id.clone(),
                ds.table.get(r, c).map(fmt_num).unwrap_or_default(),
            ]);
        }
    }
    io::write_csv(&dir.join("indicators.csv"), &["territory_id", "indicator_id", "value"], &rows)?;

    let rows: Vec<Vec<String>> = ds
        .coarse
        .iter()
        .flat_map(|(id, values)| {
            values
                .iter()
                .map(move |cv| vec![id.clone(), cv.country.clone(), fmt_num(cv.value)])
        })
        .collect();
    io::write_csv(&dir.join("national.csv"), &["indicator_id", "country_code", "value"], &rows)?;

    let rows: Vec<Vec<String>> = ds
        .proxies
        .iter()
        .flat_map(|p| {
            p.weights
                .iter()
                .map(move |(t, w)| vec![p.indicator_id.clone(), t.to_string(), fmt_num(*w)])
        })
        .collect();
    io::write_csv(&dir.join("proxies.csv"), &["indicator_id", "territory_id", "weight"], &rows)?;

    let rows: Vec<Vec<String>> = ds
        .regions
        .iter()
        .flat_map(|r| r.members.iter().map(move |t| vec![r.name.clone(), t.to_string()]))
        .collect();
    io::write_csv(&dir.join("regions.csv"), &["region_name", "territory_id"], &rows)?;

    io::write_json(&dir.join("geometry.geojson"), &fixture.geometry.doc)?;

    let rows: Vec<Vec<String>> = ds
        .territories
        .iter()
        .zip(&fixture.planted)
        .map(|(t, b)| vec![t.id.to_string(), b.to_string()])
        .collect();
    io::write_csv(&dir.join("planted_key.csv"), &["territory_id", "blob"], &rows)?;

    let spec = &fixture.spec;
    let config = format!(
        "# synthetic dataset: {} territories, {} planted blobs, generator seed {}\n\
         data = .\n\
         geometry = geometry.geojson\n\
         out = out\n\
         seed = 42\n",
        spec.n_territories, spec.n_blobs, spec.seed
    );
    io::write_text(&dir.join("config.txt"), &config)
}
