//! Run configuration: a flat `key = value` file whose keys can each be
//! overridden from the command line.
//!
//! Relative paths in a configuration file resolve against the file's
//! directory. Keys accept `-` or `_` interchangeably.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::{parse_key_values, DatasetPaths};
use crate::kmeans::{Init, KMeansConfig};
use crate::preprocess::PreprocessConfig;
use crate::profile::Binning;
use crate::tendency::{default_sample_size, HopkinsConfig, IndexKind, KVoteConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub paths: DatasetPaths,
    pub out: PathBuf,
    pub seed: u64,
    pub preprocess: PreprocessConfig,
    /// `None` picks `max(10, n/10)`.
    pub hopkins_sample_size: Option<usize>,
    pub hopkins_repeats: usize,
    pub k: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub indices: BTreeSet<IndexKind>,
    pub max_iter: usize,
    pub n_starts: usize,
    pub init: Init,
    pub binning: Binning,
    /// Cluster with `k` directly instead of voting over `[k_min, k_max]`.
    pub skip_vote: bool,
    pub emit_geojson: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let km = KMeansConfig::default();
        let vote = KVoteConfig::default();
        RunConfig {
            paths: DatasetPaths::in_dir(Path::new(".")),
            out: PathBuf::from("out"),
            seed: 42,
            preprocess: PreprocessConfig::default(),
            hopkins_sample_size: None,
            hopkins_repeats: 10,
            k: km.k,
            k_min: vote.k_min,
            k_max: vote.k_max,
            indices: vote.indices,
            max_iter: km.max_iter,
            n_starts: km.n_starts,
            init: km.init,
            binning: Binning::default(),
            skip_vote: false,
            emit_geojson: false,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::domain(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::domain(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

impl RunConfig {
    /// Defaults reading the dataset from `dir`.
    pub fn for_data_dir(dir: &Path) -> Self {
        RunConfig {
            paths: DatasetPaths::in_dir(dir),
            ..Default::default()
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::ingest(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = RunConfig::default();
        for (k, v) in parse_key_values(&text).map_err(|e| Error::ingest(path, e))? {
            cfg.set_relative(&k, &v, base)
                .map_err(|e| Error::ingest(path, e))?;
        }
        Ok(cfg)
    }

    /// Apply one setting; relative paths stay relative to the working directory.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.set_relative(key, value, Path::new(""))
    }

    fn set_relative(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let path = || base.join(value);
        match key.as_str() {
            "data" => {
                let geometry = self.paths.geometry.clone();
                self.paths = DatasetPaths::in_dir(&path());
                if geometry.is_some() {
                    self.paths.geometry = geometry;
                }
            }
            "territories" => self.paths.territories = path(),
            "indicator_defs" => self.paths.indicator_defs = path(),
            "indicators" => self.paths.indicators = path(),
            "proxies" => self.paths.proxies = Some(path()),
            "national" => self.paths.national = Some(path()),
            "regions" => self.paths.regions = Some(path()),
            "geometry" => self.paths.geometry = Some(path()),
            "out" => self.out = path(),
            "seed" => self.seed = parse(&key, value)?,
            "missing_threshold" => self.preprocess.missing_threshold = parse(&key, value)?,
            "corr_threshold" => self.preprocess.corr_threshold = parse(&key, value)?,
            "hopkins_sample_size" => self.hopkins_sample_size = Some(parse(&key, value)?),
            "hopkins_repeats" => self.hopkins_repeats = parse(&key, value)?,
            "k" => self.k = parse(&key, value)?,
            "k_min" => self.k_min = parse(&key, value)?,
            "k_max" => self.k_max = parse(&key, value)?,
            "indices" => {
                self.indices = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "max_iter" => self.max_iter = parse(&key, value)?,
            "n_starts" => self.n_starts = parse(&key, value)?,
            "init" => self.init = value.parse()?,
            "bin_inner" => self.binning.inner = parse(&key, value)?,
            "bin_middle" => self.binning.middle = parse(&key, value)?,
            "bin_outer" => self.binning.outer = parse(&key, value)?,
            "skip_vote" => self.skip_vote = parse_bool(&key, value)?,
            "emit_geojson" => self.emit_geojson = parse_bool(&key, value)?,
            other => return Err(Error::domain(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    pub fn check(&self) -> Result<()> {
        self.preprocess.check()?;
        Binning::new(self.binning.inner, self.binning.middle, self.binning.outer)?;
        if self.k_min > self.k_max {
            return Err(Error::domain(format!(
                "k_min ({}) exceeds k_max ({})",
                self.k_min, self.k_max
            )));
        }
        if self.hopkins_repeats == 0 || self.max_iter == 0 || self.n_starts == 0 {
            return Err(Error::domain(
                "hopkins_repeats, max_iter and n_starts must be positive",
            ));
        }
        Ok(())
    }

    pub fn hopkins_config(&self, n_rows: usize) -> HopkinsConfig {
        HopkinsConfig {
            sample_size: self
                .hopkins_sample_size
                .unwrap_or_else(|| default_sample_size(n_rows)),
            seed: self.seed,
            n_repeats: self.hopkins_repeats,
        }
    }

    pub fn vote_config(&self) -> KVoteConfig {
        KVoteConfig {
            k_min: self.k_min,
            k_max: self.k_max,
            indices: self.indices.clone(),
            seed: self.seed,
            max_iter: self.max_iter,
            n_starts: self.n_starts,
            init: self.init,
        }
    }

    pub fn kmeans_config(&self) -> KMeansConfig {
        KMeansConfig {
            k: self.k,
            max_iter: self.max_iter,
            n_starts: self.n_starts,
            seed: self.seed,
            init: self.init,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_configuration() {
        let c = RunConfig::default();
        assert_eq!((c.k, c.max_iter, c.n_starts), (17, 50, 10));
        assert_eq!((c.k_min, c.k_max), (15, 20));
        assert_eq!(c.preprocess.missing_threshold, 0.18);
        assert_eq!(c.preprocess.corr_threshold, 0.85);
        assert_eq!(c.indices.len(), 5);
    }

    #[test]
    fn file_then_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.conf");
        fs::write(&p, "# demo\ndata = inputs\nk = 5\nk-min = 3\nskip_vote = true\nindices = silhouette, dunn\n").unwrap();
        let mut c = RunConfig::from_file(&p).unwrap();
        assert_eq!(c.paths.territories, dir.path().join("inputs").join("territories.csv"));
        assert_eq!((c.k, c.k_min), (5, 3));
        assert!(c.skip_vote);
        assert_eq!(c.indices.len(), 2);
        c.set("k", "7").unwrap();
        c.set("init", "maximin").unwrap();
        assert_eq!(c.k, 7);
        assert_eq!(c.init, Init::Maximin);
        assert!(c.set("bogus", "1").is_err());
        assert!(c.set("k", "seven").is_err());
    }
}
