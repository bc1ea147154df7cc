//! CSV and GeoJSON ingestion and export.
//!
//! All CSV files are UTF-8 with a header row and `.` as decimal separator;
//! an empty cell means a missing value. Numbers are written rounded to 12
//! significant digits in shortest round-trip form.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::harmonize::polygons_centroid;
use crate::model::{
    CoarseValue, Dataset, IndicatorDef, IndicatorTable, ProxyTable, RegionSet, Territory,
    TerritoryId,
};
use crate::profile::{QualLevel, QualitativeProfile};

/// Round to 12 significant digits and print in shortest round-trip form.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    rounded.to_string()
}

/// `fmt_num` for JSON output.
pub fn json_num(x: f64) -> Value {
    fmt_num(x)
        .parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::ingest(path, e))
}

fn rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = reader(path)?;
    rdr.deserialize()
        .map(|r| r.map_err(|e| Error::ingest(path, e)))
        .collect()
}

fn territory(path: &Path, code: &str) -> Result<TerritoryId> {
    TerritoryId::parse(code).map_err(|e| Error::ingest(path, e))
}

#[derive(Deserialize)]
struct TerritoryRow {
    territory_id: String,
    area_km2: f64,
    population: f64,
    lat: f64,
    lon: f64,
}

pub fn read_territories(path: &Path) -> Result<Vec<Territory>> {
    rows::<TerritoryRow>(path)?
        .into_iter()
        .map(|r| {
            Ok(Territory {
                id: territory(path, &r.territory_id)?,
                area_km2: r.area_km2,
                population: r.population,
                lat: r.lat,
                lon: r.lon,
            })
        })
        .collect()
}

#[derive(Deserialize)]
struct DefRow {
    indicator_id: String,
    kind: String,
    unit: String,
    normalization_basis: String,
}

pub fn read_indicator_defs(path: &Path) -> Result<Vec<IndicatorDef>> {
    rows::<DefRow>(path)?
        .into_iter()
        .map(|r| {
            Ok(IndicatorDef {
                id: r.indicator_id,
                kind: r.kind.parse().map_err(|e| Error::ingest(path, e))?,
                unit: r.unit,
                basis: r
                    .normalization_basis
                    .parse()
                    .map_err(|e| Error::ingest(path, e))?,
            })
        })
        .collect()
}

#[derive(Deserialize)]
struct ValueRow {
    territory_id: String,
    indicator_id: String,
    value: Option<f64>,
}

/// Long-form indicator values laid out on the given territories and indicators.
pub fn read_indicator_values(
    path: &Path,
    territories: &[TerritoryId],
    defs: Vec<IndicatorDef>,
) -> Result<IndicatorTable> {
    let row_of: BTreeMap<&TerritoryId, usize> =
        territories.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let col_of: BTreeMap<String, usize> = defs
        .iter()
        .enumerate()
        .map(|(i, d)| (d.id.clone(), i))
        .collect();
    let mut table = IndicatorTable::empty(territories.to_vec(), defs);
    let mut seen = BTreeSet::new();
    for r in rows::<ValueRow>(path)? {
        let t = territory(path, &r.territory_id)?;
        let row = *row_of.get(&t).ok_or_else(|| {
            Error::ingest(path, format!("territory {t} is not declared in the territory list"))
        })?;
        let col = *col_of.get(&r.indicator_id).ok_or_else(|| {
            Error::ingest(path, format!("indicator `{}` has no definition", r.indicator_id))
        })?;
        if !seen.insert((row, col)) {
            return Err(Error::ingest(
                path,
                format!("duplicate value for {t} / {}", r.indicator_id),
            ));
        }
        table.set(row, col, r.value);
    }
    Ok(table)
}

#[derive(Deserialize)]
struct ProxyRow {
    indicator_id: String,
    territory_id: String,
    weight: f64,
}

pub fn read_proxies(path: &Path) -> Result<Vec<ProxyTable>> {
    let mut out: Vec<ProxyTable> = Vec::new();
    for r in rows::<ProxyRow>(path)? {
        let t = territory(path, &r.territory_id)?;
        let idx = match out.iter().position(|p| p.indicator_id == r.indicator_id) {
            Some(i) => i,
            None => {
                out.push(ProxyTable {
                    indicator_id: r.indicator_id.clone(),
                    weights: BTreeMap::new(),
                });
                out.len() - 1
            }
        };
        if out[idx].weights.insert(t.clone(), r.weight).is_some() {
            return Err(Error::ingest(
                path,
                format!("duplicate weight for {t} / {}", r.indicator_id),
            ));
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
struct NationalRow {
    indicator_id: String,
    country_code: String,
    value: f64,
}

pub fn read_national(path: &Path) -> Result<BTreeMap<String, Vec<CoarseValue>>> {
    let mut out: BTreeMap<String, Vec<CoarseValue>> = BTreeMap::new();
    for r in rows::<NationalRow>(path)? {
        out.entry(r.indicator_id).or_default().push(CoarseValue {
            country: r.country_code,
            value: r.value,
        });
    }
    Ok(out)
}

#[derive(Deserialize)]
struct RegionRow {
    region_name: String,
    territory_id: String,
}

pub fn read_regions(path: &Path) -> Result<Vec<RegionSet>> {
    let mut out: Vec<RegionSet> = Vec::new();
    for r in rows::<RegionRow>(path)? {
        let t = territory(path, &r.territory_id)?;
        match out.iter_mut().find(|g| g.name == r.region_name) {
            Some(g) => {
                g.members.insert(t);
            }
            None => out.push(RegionSet {
                name: r.region_name,
                members: [t].into_iter().collect(),
            }),
        }
    }
    Ok(out)
}

/// Locations of every input file of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPaths {
    pub territories: PathBuf,
    pub indicator_defs: PathBuf,
    pub indicators: PathBuf,
    pub proxies: Option<PathBuf>,
    pub national: Option<PathBuf>,
    pub regions: Option<PathBuf>,
    pub geometry: Option<PathBuf>,
}

impl DatasetPaths {
    /// Conventional file names inside one directory. Optional files are
    /// only referenced when present.
    pub fn in_dir(dir: &Path) -> Self {
        let opt = |name: &str| {
            let p = dir.join(name);
            p.exists().then_some(p)
        };
        DatasetPaths {
            territories: dir.join("territories.csv"),
            indicator_defs: dir.join("indicator_defs.csv"),
            indicators: dir.join("indicators.csv"),
            proxies: opt("proxies.csv"),
            national: opt("national.csv"),
            regions: opt("regions.csv"),
            geometry: opt("geometry.geojson"),
        }
    }
}

pub fn load_dataset(paths: &DatasetPaths) -> Result<Dataset> {
    let territories = read_territories(&paths.territories)?;
    let defs = read_indicator_defs(&paths.indicator_defs)?;
    let ids: Vec<TerritoryId> = territories.iter().map(|t| t.id.clone()).collect();
    let table = read_indicator_values(&paths.indicators, &ids, defs)?;
    Ok(Dataset {
        territories,
        table,
        coarse: paths.national.as_deref().map(read_national).transpose()?.unwrap_or_default(),
        proxies: paths.proxies.as_deref().map(read_proxies).transpose()?.unwrap_or_default(),
        regions: paths.regions.as_deref().map(read_regions).transpose()?.unwrap_or_default(),
    })
}

#[derive(Deserialize)]
struct AssignmentRow {
    territory_id: String,
    cluster: usize,
}

/// Read back an `assignments.csv` written by a pipeline run.
pub fn read_assignments(path: &Path) -> Result<BTreeMap<TerritoryId, usize>> {
    let mut out = BTreeMap::new();
    for r in rows::<AssignmentRow>(path)? {
        let t = territory(path, &r.territory_id)?;
        if out.insert(t.clone(), r.cluster).is_some() {
            return Err(Error::ingest(path, format!("duplicate assignment for {t}")));
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
struct ProfileRow {
    cluster: usize,
    indicator: String,
    level: String,
}

/// Read back a `profiles.csv` written by a pipeline run.
pub fn read_profiles(path: &Path) -> Result<Vec<QualitativeProfile>> {
    let mut by_cluster: BTreeMap<usize, Vec<(String, QualLevel)>> = BTreeMap::new();
    for r in rows::<ProfileRow>(path)? {
        let level = r.level.parse().map_err(|e| Error::ingest(path, e))?;
        by_cluster.entry(r.cluster).or_default().push((r.indicator, level));
    }
    Ok(by_cluster
        .into_iter()
        .map(|(cluster, levels)| QualitativeProfile { cluster, levels })
        .collect())
}

/// A GeoJSON FeatureCollection keyed by a `territory_id` property.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub doc: Value,
}

impl Geometry {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::ingest(path, e))?;
        let doc: Value = serde_json::from_str(&text).map_err(|e| Error::ingest(path, e))?;
        if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection")
            || !doc.get("features").is_some_and(Value::is_array)
        {
            return Err(Error::ingest(path, "expected a GeoJSON FeatureCollection"));
        }
        Ok(Geometry { doc })
    }

    fn features(&self) -> &[Value] {
        self.doc["features"].as_array().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Planar centroid of every feature carrying a territory id.
    pub fn centroids(&self) -> Result<BTreeMap<TerritoryId, (f64, f64)>> {
        let mut out = BTreeMap::new();
        for f in self.features() {
            let Some(code) = f["properties"]["territory_id"].as_str() else {
                continue;
            };
            let id = TerritoryId::parse(code)?;
            let polygons = polygons_of(&f["geometry"])
                .ok_or_else(|| Error::Geometry(format!("{code}: unsupported geometry")))?;
            let c = polygons_centroid(&polygons)
                .map_err(|e| Error::Geometry(format!("{code}: {e}")))?;
            out.insert(id, c);
        }
        Ok(out)
    }

    /// Copy of the collection with `cluster` and `cluster_levels` properties added.
    pub fn annotate(
        &self,
        assignment: &BTreeMap<TerritoryId, usize>,
        profiles: &[QualitativeProfile],
    ) -> Value {
        let mut doc = self.doc.clone();
        if let Some(features) = doc["features"].as_array_mut() {
            for f in features {
                let id = f["properties"]["territory_id"]
                    .as_str()
                    .and_then(|c| TerritoryId::parse(c).ok());
                let cluster = id.and_then(|t| assignment.get(&t).copied());
                let levels: Map<String, Value> = cluster
                    .and_then(|c| profiles.iter().find(|p| p.cluster == c))
                    .map(|p| {
                        p.levels
                            .iter()
                            .map(|(k, l)| (k.clone(), Value::String(l.as_str().into())))
                            .collect()
                    })
                    .unwrap_or_default();
                if !f["properties"].is_object() {
                    f["properties"] = Value::Object(Map::new());
                }
                let props = f["properties"].as_object_mut().expect("object");
                props.insert("cluster".into(), cluster.map(Value::from).unwrap_or(Value::Null));
                props.insert("cluster_levels".into(), Value::Object(levels));
            }
        }
        doc
    }
}

fn ring(v: &Value) -> Option<Vec<(f64, f64)>> {
    v.as_array()?
        .iter()
        .map(|p| {
            let p = p.as_array()?;
            Some((p.first()?.as_f64()?, p.get(1)?.as_f64()?))
        })
        .collect()
}

fn polygon(v: &Value) -> Option<Vec<Vec<(f64, f64)>>> {
    v.as_array()?.iter().map(ring).collect()
}

fn polygons_of(geometry: &Value) -> Option<Vec<Vec<Vec<(f64, f64)>>>> {
    match geometry["type"].as_str()? {
        "Polygon" => Some(vec![polygon(&geometry["coordinates"])?]),
        "MultiPolygon" => geometry["coordinates"].as_array()?.iter().map(polygon).collect(),
        _ => None,
    }
}

/// Write a CSV file from a header and string rows.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::export(path, e))?;
    w.write_record(header).map_err(|e| Error::export(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| Error::export(path, e))?;
    }
    w.flush().map_err(|e| Error::export(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::export(path, e))
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::export(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

/// Long form `territory_id,indicator_id,value`, missing cells left empty.
pub fn write_indicator_table(path: &Path, table: &IndicatorTable) -> Result<()> {
    let mut out = Vec::with_capacity(table.n_rows() * table.n_cols());
    for (r, t) in table.territories().iter().enumerate() {
        for (c, def) in table.indicators().iter().enumerate() {
            out.push(vec![
                t.to_string(),
                def.id.clone(),
                table.get(r, c).map(fmt_num).unwrap_or_default(),
            ]);
        }
    }
    write_csv(path, &["territory_id", "indicator_id", "value"], &out)
}

pub fn write_indicator_defs(path: &Path, defs: &[IndicatorDef]) -> Result<()> {
    let rows: Vec<Vec<String>> = defs
        .iter()
        .map(|d| {
            vec![
                d.id.clone(),
                d.kind.as_str().into(),
                d.unit.clone(),
                d.basis.as_str().into(),
            ]
        })
        .collect();
    write_csv(path, &["indicator_id", "kind", "unit", "normalization_basis"], &rows)
}

/// Read back a `key = value` text file; `#` starts a comment line.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::domain(format!("line {}: expected `key = value`", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(fmt_num(1234.5), "1234.5");
        assert_eq!(fmt_num(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_num(-1e-7), "-0.0000001");
    }

    #[test]
    fn key_values() {
        let kv = parse_key_values("# c\n k = 17\n\nout=results \n").unwrap();
        assert_eq!(kv, vec![("k".into(), "17".into()), ("out".into(), "results".into())]);
        assert!(parse_key_values("nonsense").is_err());
    }

    #[test]
    fn geometry_centroids_and_annotation() {
        let doc = serde_json::json!({
            "type": "FeatureCollection",
            "features": [
                {"type": "Feature", "properties": {"territory_id": "ITA01"},
                 "geometry": {"type": "Polygon", "coordinates": [[[0,0],[2,0],[2,2],[0,2],[0,0]]]}},
                {"type": "Feature", "properties": {"territory_id": "ITA02", "name": "x"},
                 "geometry": {"type": "MultiPolygon", "coordinates": [
                     [[[10,0],[11,0],[11,1],[10,1],[10,0]]],
                     [[[12,0],[13,0],[13,1],[12,1],[12,0]]]]}}
            ]
        });
        let g = Geometry { doc };
        let c = g.centroids().unwrap();
        assert_eq!(c[&TerritoryId::parse("ITA01").unwrap()], (1.0, 1.0));
        assert_eq!(c[&TerritoryId::parse("ITA02").unwrap()], (11.5, 0.5));

        let assignment = [(TerritoryId::parse("ITA01").unwrap(), 3)].into_iter().collect();
        let out = g.annotate(&assignment, &[]);
        assert_eq!(out["features"][0]["properties"]["cluster"], 3);
        assert!(out["features"][1]["properties"]["cluster"].is_null());
        assert_eq!(out["features"][1]["properties"]["name"], "x");
        assert_eq!(out["features"][0]["geometry"], g.doc["features"][0]["geometry"]);
    }
}
