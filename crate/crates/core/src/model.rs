//! Dataset schema: territories, indicators, proxy weights and macro-regions,
//! plus the structural checks that gate every downstream computation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Finest level of the territorial hierarchy; all computations run here.
pub const FINEST_LEVEL: u8 = 3;

/// A NUTS-style territorial code. The first two characters are the country
/// prefix and every further character descends one hierarchy level.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TerritoryId(String);

impl TerritoryId {
    pub fn parse(code: &str) -> Result<Self> {
        let code = code.trim();
        if code.is_empty() {
            return Err(Error::domain("territory code is empty"));
        }
        let prefix: Vec<char> = code.chars().take(2).collect();
        if prefix.len() < 2 || !prefix.iter().all(|c| c.is_ascii_alphabetic()) {
            return Err(Error::domain(format!(
                "territory code `{code}` must start with a two-letter country prefix"
            )));
        }
        if !code.chars().all(|c| c.is_ascii_alphanumeric()) {
            return Err(Error::domain(format!(
                "territory code `{code}` contains non-alphanumeric characters"
            )));
        }
        if code.len() > 2 + FINEST_LEVEL as usize {
            return Err(Error::domain(format!(
                "territory code `{code}` is deeper than level {FINEST_LEVEL}"
            )));
        }
        Ok(TerritoryId(code.to_string()))
    }

    pub fn code(&self) -> &str {
        &self.0
    }

    pub fn level(&self) -> u8 {
        (self.0.len() - 2) as u8
    }

    pub fn country(&self) -> &str {
        &self.0[..2]
    }
}

impl fmt::Display for TerritoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for TerritoryId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TerritoryId::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Territory {
    pub id: TerritoryId,
    /// Surface in km².
    pub area_km2: f64,
    pub population: f64,
    /// Centroid latitude in degrees.
    pub lat: f64,
    /// Centroid longitude in degrees.
    pub lon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndicatorKind {
    Energy,
    NonEnergy,
}

impl IndicatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IndicatorKind::Energy => "energy",
            IndicatorKind::NonEnergy => "non_energy",
        }
    }
}

impl FromStr for IndicatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "energy" => Ok(IndicatorKind::Energy),
            "non_energy" => Ok(IndicatorKind::NonEnergy),
            other => Err(Error::domain(format!("unknown indicator kind `{other}`"))),
        }
    }
}

/// Denominator applied to raw totals during harmonization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormalizationBasis {
    PerArea,
    PerCapita,
    /// Already a per-site median upstream; passed through.
    MedianPerSite,
    None,
}

impl NormalizationBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            NormalizationBasis::PerArea => "per_area",
            NormalizationBasis::PerCapita => "per_capita",
            NormalizationBasis::MedianPerSite => "median_per_site",
            NormalizationBasis::None => "none",
        }
    }
}

impl FromStr for NormalizationBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "per_area" => Ok(NormalizationBasis::PerArea),
            "per_capita" => Ok(NormalizationBasis::PerCapita),
            "median_per_site" => Ok(NormalizationBasis::MedianPerSite),
            "none" => Ok(NormalizationBasis::None),
            other => Err(Error::domain(format!(
                "unknown normalization basis `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorDef {
    pub id: String,
    pub kind: IndicatorKind,
    pub unit: String,
    pub basis: NormalizationBasis,
}

impl IndicatorDef {
    pub fn new(id: &str, kind: IndicatorKind, unit: &str, basis: NormalizationBasis) -> Self {
        IndicatorDef {
            id: id.to_string(),
            kind,
            unit: unit.to_string(),
            basis,
        }
    }
}

/// Territory × indicator matrix with explicit missing cells.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorTable {
    territories: Vec<TerritoryId>,
    indicators: Vec<IndicatorDef>,
    values: Vec<Option<f64>>,
}

impl IndicatorTable {
    /// `values` is row-major, one row per territory.
    pub fn new(
        territories: Vec<TerritoryId>,
        indicators: Vec<IndicatorDef>,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        if values.len() != territories.len() * indicators.len() {
            return Err(Error::domain(format!(
                "indicator table holds {} cells, expected {} x {}",
                values.len(),
                territories.len(),
                indicators.len()
            )));
        }
        Ok(IndicatorTable {
            territories,
            indicators,
            values,
        })
    }

    pub fn empty(territories: Vec<TerritoryId>, indicators: Vec<IndicatorDef>) -> Self {
        let cells = territories.len() * indicators.len();
        IndicatorTable {
            territories,
            indicators,
            values: vec![None; cells],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.territories.len()
    }

    pub fn n_cols(&self) -> usize {
        self.indicators.len()
    }

    pub fn territories(&self) -> &[TerritoryId] {
        &self.territories
    }

    pub fn indicators(&self) -> &[IndicatorDef] {
        &self.indicators
    }

    pub fn indicator_ids(&self) -> Vec<String> {
        self.indicators.iter().map(|d| d.id.clone()).collect()
    }

    pub fn column_index(&self, id: &str) -> Option<usize> {
        self.indicators.iter().position(|d| d.id == id)
    }

    pub fn row_index(&self, id: &TerritoryId) -> Option<usize> {
        self.territories.iter().position(|t| t == id)
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.indicators.len() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Option<f64>) {
        let n_cols = self.indicators.len();
        self.values[row * n_cols + col] = value;
    }

    pub fn column(&self, col: usize) -> Vec<Option<f64>> {
        (0..self.n_rows()).map(|r| self.get(r, col)).collect()
    }

    /// Column values, panicking on a missing cell. Use after imputation.
    pub(crate) fn dense_column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows())
            .map(|r| self.get(r, col).expect("dense column has a missing cell"))
            .collect()
    }

    pub fn missing_count(&self, col: usize) -> usize {
        (0..self.n_rows()).filter(|&r| self.get(r, col).is_none()).count()
    }

    pub fn total_missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Keep only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.n_rows() * cols.len());
        for r in 0..self.n_rows() {
            values.extend(cols.iter().map(|&c| self.get(r, c)));
        }
        IndicatorTable {
            territories: self.territories.clone(),
            indicators: cols.iter().map(|&c| self.indicators[c].clone()).collect(),
            values,
        }
    }
}

/// Nonnegative weights distributing a coarse value over finest-level territories.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProxyTable {
    pub indicator_id: String,
    pub weights: BTreeMap<TerritoryId, f64>,
}

/// A country-level value to be distributed over the country's territories.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseValue {
    pub country: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSet {
    pub name: String,
    pub members: BTreeSet<TerritoryId>,
}

/// Everything ingested for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub territories: Vec<Territory>,
    /// Observed fine-level values; columns cover every declared indicator.
    pub table: IndicatorTable,
    /// Coarse values per indicator id.
    pub coarse: BTreeMap<String, Vec<CoarseValue>>,
    pub proxies: Vec<ProxyTable>,
    pub regions: Vec<RegionSet>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateTerritory(TerritoryId),
    NotFinestLevel(TerritoryId),
    NonPositiveArea { territory: TerritoryId, area: f64 },
    NegativePopulation { territory: TerritoryId, population: f64 },
    LatitudeOutOfRange { territory: TerritoryId, lat: f64 },
    LongitudeOutOfRange { territory: TerritoryId, lon: f64 },
    DuplicateIndicator(String),
    TableRowMismatch { row: usize, expected: TerritoryId, found: TerritoryId },
    NonFiniteValue { territory: TerritoryId, indicator: String },
    UnknownProxyIndicator(String),
    DuplicateProxyTable(String),
    UnknownProxyTerritory { indicator: String, territory: TerritoryId },
    NegativeWeight { indicator: String, territory: TerritoryId, weight: f64 },
    UnknownCoarseIndicator(String),
    MissingProxy(String),
    NonFiniteCoarse { indicator: String, country: String },
    DuplicateCoarse { indicator: String, country: String },
    CoarseAndFineValues(String),
    ZeroProxyMass { indicator: String, country: String },
    EmptyRegion(String),
    UnknownRegionMember { region: String, territory: TerritoryId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateTerritory(t) => write!(f, "territory {t}: duplicate id"),
            NotFinestLevel(t) => write!(
                f,
                "territory {t}: level {} is not the finest level {FINEST_LEVEL}",
                t.level()
            ),
            NonPositiveArea { territory, area } => {
                write!(f, "territory {territory}: area {area} is not positive")
            }
            NegativePopulation {
                territory,
                population,
            } => write!(f, "territory {territory}: population {population} is negative"),
            LatitudeOutOfRange { territory, lat } => {
                write!(f, "territory {territory}: latitude {lat} outside [-90, 90]")
            }
            LongitudeOutOfRange { territory, lon } => {
                write!(f, "territory {territory}: longitude {lon} outside [-180, 180]")
            }
            DuplicateIndicator(i) => write!(f, "indicator {i}: duplicate id"),
            TableRowMismatch {
                row,
                expected,
                found,
            } => write!(
                f,
                "indicator table row {row}: found {found}, expected {expected}"
            ),
            NonFiniteValue {
                territory,
                indicator,
            } => write!(f, "territory {territory}, indicator {indicator}: non-finite value"),
            UnknownProxyIndicator(i) => write!(f, "proxy for unknown indicator {i}"),
            DuplicateProxyTable(i) => write!(f, "indicator {i}: more than one proxy table"),
            UnknownProxyTerritory {
                indicator,
                territory,
            } => write!(f, "proxy {indicator}: unknown territory {territory}"),
            NegativeWeight {
                indicator,
                territory,
                weight,
            } => write!(f, "proxy {indicator}, territory {territory}: negative weight {weight}"),
            UnknownCoarseIndicator(i) => write!(f, "coarse value for unknown indicator {i}"),
            MissingProxy(i) => write!(f, "indicator {i}: coarse values without a proxy table"),
            NonFiniteCoarse { indicator, country } => {
                write!(f, "indicator {indicator}, country {country}: non-finite coarse value")
            }
            DuplicateCoarse { indicator, country } => {
                write!(f, "indicator {indicator}, country {country}: duplicate coarse value")
            }
            CoarseAndFineValues(i) => write!(
                f,
                "indicator {i}: has both coarse values and fine-level observations"
            ),
            ZeroProxyMass { indicator, country } => write!(
                f,
                "indicator {indicator}, country {country}: nonzero coarse value but zero total proxy weight"
            ),
            EmptyRegion(r) => write!(f, "region {r}: no members"),
            UnknownRegionMember { region, territory } => {
                write!(f, "region {region}: unknown territory {territory}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Check every structural invariant of a dataset. The dataset is accepted iff
/// the returned report is empty.
pub fn validate_dataset(dataset: &Dataset) -> ValidationReport {
    let mut out = Vec::new();

    let mut seen = BTreeSet::new();
    for t in &dataset.territories {
        if !seen.insert(&t.id) {
            out.push(Violation::DuplicateTerritory(t.id.clone()));
        }
        if t.id.level() != FINEST_LEVEL {
            out.push(Violation::NotFinestLevel(t.id.clone()));
        }
        if !(t.area_km2 > 0.0 && t.area_km2.is_finite()) {
            out.push(Violation::NonPositiveArea {
                territory: t.id.clone(),
                area: t.area_km2,
            });
        }
        if !(t.population >= 0.0 && t.population.is_finite()) {
            out.push(Violation::NegativePopulation {
                territory: t.id.clone(),
                population: t.population,
            });
        }
        if !(-90.0..=90.0).contains(&t.lat) {
            out.push(Violation::LatitudeOutOfRange {
                territory: t.id.clone(),
                lat: t.lat,
            });
        }
        if !(-180.0..=180.0).contains(&t.lon) {
            out.push(Violation::LongitudeOutOfRange {
                territory: t.id.clone(),
                lon: t.lon,
            });
        }
    }

    let table = &dataset.table;
    let mut ids = BTreeSet::new();
    for def in table.indicators() {
        if !ids.insert(def.id.as_str()) {
            out.push(Violation::DuplicateIndicator(def.id.clone()));
        }
    }
    for (row, (found, t)) in table
        .territories()
        .iter()
        .zip(&dataset.territories)
        .enumerate()
    {
        if found != &t.id {
            out.push(Violation::TableRowMismatch {
                row,
                expected: t.id.clone(),
                found: found.clone(),
            });
        }
    }
    for (row, t) in table.territories().iter().enumerate() {
        for (col, def) in table.indicators().iter().enumerate() {
            if let Some(v) = table.get(row, col) {
                if !v.is_finite() {
                    out.push(Violation::NonFiniteValue {
                        territory: t.clone(),
                        indicator: def.id.clone(),
                    });
                }
            }
        }
    }

    let known: BTreeSet<&TerritoryId> = dataset.territories.iter().map(|t| &t.id).collect();
    let mut proxied = BTreeMap::new();
    for proxy in &dataset.proxies {
        if !ids.contains(proxy.indicator_id.as_str()) {
            out.push(Violation::UnknownProxyIndicator(proxy.indicator_id.clone()));
        }
        if proxied.insert(proxy.indicator_id.as_str(), proxy).is_some() {
            out.push(Violation::DuplicateProxyTable(proxy.indicator_id.clone()));
        }
        for (t, &w) in &proxy.weights {
            if !known.contains(t) {
                out.push(Violation::UnknownProxyTerritory {
                    indicator: proxy.indicator_id.clone(),
                    territory: t.clone(),
                });
            }
            if !(w >= 0.0 && w.is_finite()) {
                out.push(Violation::NegativeWeight {
                    indicator: proxy.indicator_id.clone(),
                    territory: t.clone(),
                    weight: w,
                });
            }
        }
    }

    for (indicator, values) in &dataset.coarse {
        let Some(col) = table.column_index(indicator) else {
            out.push(Violation::UnknownCoarseIndicator(indicator.clone()));
            continue;
        };
        if table.missing_count(col) != table.n_rows() {
            out.push(Violation::CoarseAndFineValues(indicator.clone()));
        }
        let proxy = proxied.get(indicator.as_str());
        if proxy.is_none() {
            out.push(Violation::MissingProxy(indicator.clone()));
        }
        let mut countries = BTreeSet::new();
        for cv in values {
            if !countries.insert(cv.country.as_str()) {
                out.push(Violation::DuplicateCoarse {
                    indicator: indicator.clone(),
                    country: cv.country.clone(),
                });
            }
            if !cv.value.is_finite() {
                out.push(Violation::NonFiniteCoarse {
                    indicator: indicator.clone(),
                    country: cv.country.clone(),
                });
                continue;
            }
            if let Some(proxy) = proxy {
                let mass: f64 = proxy
                    .weights
                    .iter()
                    .filter(|(t, w)| t.country() == cv.country && known.contains(t) && **w > 0.0)
                    .map(|(_, w)| *w)
                    .sum();
                if cv.value != 0.0 && mass <= 0.0 {
                    out.push(Violation::ZeroProxyMass {
                        indicator: indicator.clone(),
                        country: cv.country.clone(),
                    });
                }
            }
        }
    }

    for region in &dataset.regions {
        if region.members.is_empty() {
            out.push(Violation::EmptyRegion(region.name.clone()));
        }
        for m in &region.members {
            if !known.contains(m) {
                out.push(Violation::UnknownRegionMember {
                    region: region.name.clone(),
                    territory: m.clone(),
                });
            }
        }
    }

    ValidationReport { violations: out }
}
