//! End-to-end driver: ingest, validate, harmonize, preprocess, assess
//! tendency, cluster, profile and export.
//!
//! Every output is a pure function of the inputs and the configuration, so
//! two runs with the same seed write byte-identical files. Stage timings are
//! kept on the [`RunReport`] but never written to disk.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::Error;
use crate::harmonize::{harmonize_dataset, Harmonized};
use crate::io::{self, fmt_num, json_num, Geometry};
use crate::kmeans::{explained_variance, kmeans_fit, ClusterModel};
use crate::model::{validate_dataset, Dataset, TerritoryId};
use crate::preprocess::{
    apply_missing_policy, prune_correlated, standardize, PrunedPair, StandardizedMatrix,
};
use crate::profile::{
    bin_centroids_with, centroid_dendrogram, heatmap_matrix, macro_region_report, CentroidTree,
    QualitativeProfile, RegionReport,
};
use crate::tendency::{hopkins, project_2d, vote_k, IndexKind, VoteOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Validate,
    Harmonize,
    Preprocess,
    Tendency,
    Cluster,
    Profile,
    Export,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingestion",
            Stage::Validate => "validation",
            Stage::Harmonize => "harmonization",
            Stage::Preprocess => "preprocessing",
            Stage::Tendency => "tendency",
            Stage::Cluster => "clustering",
            Stage::Profile => "profiling",
            Stage::Export => "export",
        }
    }

    /// Process exit status for a failure in this stage. 1 and 2 are left
    /// to generic and usage errors.
    pub fn exit_code(self) -> i32 {
        match self {
            Stage::Ingest => 10,
            Stage::Validate => 11,
            Stage::Harmonize => 12,
            Stage::Preprocess => 13,
            Stage::Tendency => 14,
            Stage::Cluster => 15,
            Stage::Profile => 16,
            Stage::Export => 17,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        self.stage.exit_code()
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T> AtStage<T> for crate::Result<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|source| PipelineError { stage, source })
    }
}

/// Vote summary without the fitted models.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteTable {
    pub votes: BTreeMap<usize, usize>,
    pub per_index: BTreeMap<IndexKind, usize>,
    pub scores: BTreeMap<IndexKind, BTreeMap<usize, f64>>,
    pub abstained: Vec<IndexKind>,
}

impl From<&VoteOutcome> for VoteTable {
    fn from(v: &VoteOutcome) -> Self {
        VoteTable {
            votes: v.votes.clone(),
            per_index: v.per_index.clone(),
            scores: v.scores.clone(),
            abstained: v.abstained.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: RunConfig,
    pub n_territories: usize,
    pub n_indicators: usize,
    pub downscaled: Vec<String>,
    pub normalized: Vec<String>,
    pub from_centroids: Vec<String>,
    pub dropped: Vec<String>,
    pub imputed: Vec<(TerritoryId, String)>,
    pub pruned: Vec<PrunedPair>,
    pub zero_variance: Vec<String>,
    pub retained: Vec<String>,
    pub hopkins: f64,
    pub hopkins_sample_size: usize,
    pub vote: Option<VoteTable>,
    pub k: usize,
    pub explained_variance: f64,
    pub within_ss: f64,
    pub between_ss: f64,
    pub total_ss: f64,
    pub cluster_sizes: Vec<usize>,
    pub iterations_run: usize,
    pub converged: bool,
    pub timings: Vec<(Stage, Duration)>,
}

fn list<I: IntoIterator<Item = S>, S: AsRef<str>>(items: I) -> String {
    items
        .into_iter()
        .map(|s| s.as_ref().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl RunReport {
    /// Structured `key = value` text. Timings are left out so the file is
    /// reproducible.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut s = String::from("# terraclass run report\n");
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("settings.seed", c.seed.to_string());
        line("settings.missing_threshold", fmt_num(c.preprocess.missing_threshold));
        line("settings.corr_threshold", fmt_num(c.preprocess.corr_threshold));
        line("settings.hopkins_repeats", c.hopkins_repeats.to_string());
        line("settings.k", c.k.to_string());
        line("settings.k_min", c.k_min.to_string());
        line("settings.k_max", c.k_max.to_string());
        line("settings.indices", list(c.indices.iter().map(|i| i.as_str())));
        line("settings.max_iter", c.max_iter.to_string());
        line("settings.n_starts", c.n_starts.to_string());
        line("settings.init", c.init.as_str().to_string());
        line("settings.bin_inner", fmt_num(c.binning.inner));
        line("settings.bin_middle", fmt_num(c.binning.middle));
        line("settings.bin_outer", fmt_num(c.binning.outer));
        line("settings.skip_vote", c.skip_vote.to_string());
        line("data.territories", self.n_territories.to_string());
        line("data.indicators", self.n_indicators.to_string());
        line("harmonize.downscaled", list(&self.downscaled));
        line("harmonize.normalized", list(&self.normalized));
        line("harmonize.from_centroids", list(&self.from_centroids));
        line("preprocess.dropped", list(&self.dropped));
        line(
            "preprocess.imputed",
            list(self.imputed.iter().map(|(t, i)| format!("{t}:{i}"))),
        );
        line(
            "preprocess.pruned",
            list(
                self.pruned
                    .iter()
                    .map(|p| format!("{} (kept {}, r {})", p.dropped, p.kept, fmt_num(p.r))),
            ),
        );
        line("preprocess.zero_variance", list(&self.zero_variance));
        line("preprocess.retained", list(&self.retained));
        line("tendency.hopkins", fmt_num(self.hopkins));
        line("tendency.hopkins_sample_size", self.hopkins_sample_size.to_string());
        if let Some(v) = &self.vote {
            for (k, n) in &v.votes {
                line(&format!("vote.count.{k}"), n.to_string());
            }
            for (idx, k) in &v.per_index {
                line(&format!("vote.choice.{idx}"), k.to_string());
            }
            for (idx, scores) in &v.scores {
                for (k, x) in scores {
                    line(&format!("vote.score.{idx}.{k}"), fmt_num(*x));
                }
            }
            line("vote.abstained", list(v.abstained.iter().map(|i| i.as_str())));
        }
        line("cluster.k", self.k.to_string());
        line("cluster.explained_variance", fmt_num(self.explained_variance));
        line("cluster.within_ss", fmt_num(self.within_ss));
        line("cluster.between_ss", fmt_num(self.between_ss));
        line("cluster.total_ss", fmt_num(self.total_ss));
        line("cluster.iterations_run", self.iterations_run.to_string());
        line("cluster.converged", self.converged.to_string());
        for (c, n) in self.cluster_sizes.iter().enumerate() {
            line(&format!("cluster.size.{c}"), n.to_string());
        }
        s
    }
}

/// Everything a run computes, before anything is written.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: RunReport,
    pub harmonized: Harmonized,
    pub matrix: StandardizedMatrix,
    pub model: ClusterModel,
    pub profiles: Vec<QualitativeProfile>,
    pub dendrogram: Option<CentroidTree>,
    pub region_reports: Vec<RegionReport>,
    pub projection: Vec<(f64, f64)>,
    pub geometry: Option<Geometry>,
}

impl PipelineOutput {
    pub fn assignment_map(&self) -> BTreeMap<TerritoryId, usize> {
        assignment_map(&self.matrix.rows, &self.model.assignment)
    }
}

fn assignment_map(rows: &[TerritoryId], assignment: &[usize]) -> BTreeMap<TerritoryId, usize> {
    rows.iter().cloned().zip(assignment.iter().copied()).collect()
}

struct Clock {
    timings: Vec<(Stage, Duration)>,
    started: Instant,
}

impl Clock {
    fn new() -> Self {
        Clock { timings: Vec::new(), started: Instant::now() }
    }

    fn lap(&mut self, stage: Stage) {
        let now = Instant::now();
        self.timings.push((stage, now - self.started));
        self.started = now;
    }
}

/// Ingest and validate the dataset and geometry named by the configuration.
pub fn load_inputs(cfg: &RunConfig) -> Result<(Dataset, Option<Geometry>), PipelineError> {
    cfg.check().at(Stage::Ingest)?;
    let dataset = io::load_dataset(&cfg.paths).at(Stage::Ingest)?;
    let geometry = match &cfg.paths.geometry {
        Some(p) => Some(Geometry::read(p).at(Stage::Ingest)?),
        None if cfg.emit_geojson => {
            return Err(Error::domain("emit_geojson needs a geometry file")).at(Stage::Ingest)
        }
        None => None,
    };
    validate_dataset(&dataset).into_result().at(Stage::Validate)?;
    Ok((dataset, geometry))
}

/// Ingest, validate and harmonize.
pub fn harmonize_inputs(cfg: &RunConfig) -> Result<(Dataset, Option<Geometry>, Harmonized), PipelineError> {
    let (dataset, geometry) = load_inputs(cfg)?;
    let centroids = geometry.as_ref().map(Geometry::centroids).transpose().at(Stage::Harmonize)?;
    let harmonized = harmonize_dataset(&dataset, centroids.as_ref()).at(Stage::Harmonize)?;
    Ok((dataset, geometry, harmonized))
}

/// Run every stage in memory.
pub fn run_dataset(
    cfg: &RunConfig,
    dataset: &Dataset,
    geometry: Option<Geometry>,
) -> Result<PipelineOutput, PipelineError> {
    cfg.check().at(Stage::Ingest)?;
    let mut clock = Clock::new();
    validate_dataset(dataset).into_result().at(Stage::Validate)?;
    clock.lap(Stage::Validate);

    let centroids = geometry.as_ref().map(Geometry::centroids).transpose().at(Stage::Harmonize)?;
    let harmonized = harmonize_dataset(dataset, centroids.as_ref()).at(Stage::Harmonize)?;
    clock.lap(Stage::Harmonize);

    let missing = apply_missing_policy(&harmonized.table, &cfg.preprocess).at(Stage::Preprocess)?;
    let pruned = prune_correlated(&missing.table, &cfg.preprocess).at(Stage::Preprocess)?;
    let matrix = standardize(&pruned.table).at(Stage::Preprocess)?;
    clock.lap(Stage::Preprocess);

    let hcfg = cfg.hopkins_config(matrix.n_rows());
    let h = hopkins(matrix.view(), &hcfg).at(Stage::Tendency)?;
    let vote_cfg = cfg.vote_config();
    let vote = if cfg.skip_vote {
        None
    } else {
        Some(vote_k(matrix.view(), &vote_cfg).at(Stage::Tendency)?)
    };
    clock.lap(Stage::Tendency);

    // Both paths fit with the seed the vote uses for that k, so skipping the
    // vote with the voted k reproduces the same model.
    let model = match &vote {
        Some(v) => v.models[&v.k_best].clone(),
        None => kmeans_fit(matrix.view(), &vote_cfg.kmeans_config(cfg.k)).at(Stage::Cluster)?,
    };
    let ev = explained_variance(&model).at(Stage::Cluster)?;
    let projection = project_2d(matrix.view()).at(Stage::Cluster)?;
    clock.lap(Stage::Cluster);

    let profiles = bin_centroids_with(&model, &matrix.cols, &cfg.binning).at(Stage::Profile)?;
    let dendrogram = if model.k >= 2 {
        Some(centroid_dendrogram(&model).at(Stage::Profile)?)
    } else {
        None
    };
    let assignment = assignment_map(&matrix.rows, &model.assignment);
    let region_reports = dataset
        .regions
        .iter()
        .map(|r| macro_region_report(&assignment, &profiles, r))
        .collect::<crate::Result<Vec<_>>>()
        .at(Stage::Profile)?;
    clock.lap(Stage::Profile);

    let report = RunReport {
        config: cfg.clone(),
        n_territories: dataset.territories.len(),
        n_indicators: dataset.table.n_cols(),
        downscaled: harmonized.log.downscaled.clone(),
        normalized: harmonized
            .log
            .normalized
            .iter()
            .map(|(id, b)| format!("{id}:{}", b.as_str()))
            .collect(),
        from_centroids: harmonized.log.from_centroids.clone(),
        dropped: missing.dropped,
        imputed: missing.imputed,
        pruned: pruned.pairs,
        zero_variance: pruned.zero_variance,
        retained: matrix.cols.clone(),
        hopkins: h,
        hopkins_sample_size: hcfg.sample_size,
        vote: vote.as_ref().map(VoteTable::from),
        k: model.k,
        explained_variance: ev,
        within_ss: model.within_ss,
        between_ss: model.between_ss,
        total_ss: model.total_ss,
        cluster_sizes: model.sizes.clone(),
        iterations_run: model.iterations_run,
        converged: model.converged,
        timings: clock.timings,
    };
    Ok(PipelineOutput {
        report,
        harmonized,
        matrix,
        model,
        profiles,
        dendrogram,
        region_reports,
        projection,
        geometry,
    })
}

/// Names of the files [`write_outputs`] produces, `map.geojson` aside.
pub const OUTPUT_FILES: [&str; 11] = [
    "harmonized.csv",
    "standardized.csv",
    "assignments.csv",
    "centroids.csv",
    "centroids_original.csv",
    "profiles.csv",
    "heatmap.csv",
    "dendrogram.json",
    "region_reports.csv",
    "projection.csv",
    "report.txt",
];

fn matrix_rows(labels: &[String], m: ndarray::ArrayView2<'_, f64>) -> Vec<Vec<String>> {
    labels
        .iter()
        .zip(m.rows())
        .map(|(l, row)| std::iter::once(l.clone()).chain(row.iter().map(|&v| fmt_num(v))).collect())
        .collect()
}

pub fn write_region_reports(path: &Path, reports: &[RegionReport]) -> crate::Result<()> {
    let mut rows = Vec::new();
    for r in reports {
        let mut push = |record: &str, key: String, value: String| {
            rows.push(vec![r.region.clone(), record.to_string(), key, value]);
        };
        push("size", String::new(), r.size.to_string());
        push("n_clusters_present", String::new(), r.n_clusters_present.to_string());
        for (c, n) in &r.cluster_frequencies {
            push("cluster", c.to_string(), n.to_string());
        }
        for (id, lo, hi) in &r.indicator_spread {
            push("spread", id.clone(), format!("{lo}..{hi}"));
        }
    }
    io::write_csv(path, &["region", "record", "key", "value"], &rows)
}

pub fn write_outputs(out: &PipelineOutput, dir: &Path) -> crate::Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::export(dir, e))?;
    let m = &out.matrix;
    let model = &out.model;
    let mut header: Vec<&str> = vec!["territory_id"];
    header.extend(m.cols.iter().map(String::as_str));
    let row_labels: Vec<String> = m.rows.iter().map(ToString::to_string).collect();

    io::write_indicator_table(&dir.join("harmonized.csv"), &out.harmonized.table)?;
    io::write_csv(&dir.join("standardized.csv"), &header, &matrix_rows(&row_labels, m.view()))?;

    let rows: Vec<Vec<String>> = m
        .rows
        .iter()
        .zip(&model.assignment)
        .map(|(t, c)| vec![t.to_string(), c.to_string()])
        .collect();
    io::write_csv(&dir.join("assignments.csv"), &["territory_id", "cluster"], &rows)?;

    header[0] = "cluster";
    let clusters: Vec<String> = (0..model.k).map(|c| c.to_string()).collect();
    io::write_csv(&dir.join("centroids.csv"), &header, &matrix_rows(&clusters, model.centroids.view()))?;
    let original = m.inverse_rows(model.centroids.view());
    io::write_csv(&dir.join("centroids_original.csv"), &header, &matrix_rows(&clusters, original.view()))?;

    let rows: Vec<Vec<String>> = out
        .profiles
        .iter()
        .flat_map(|p| {
            p.levels
                .iter()
                .map(move |(id, l)| vec![p.cluster.to_string(), id.clone(), l.as_str().to_string()])
        })
        .collect();
    io::write_csv(&dir.join("profiles.csv"), &["cluster", "indicator", "level"], &rows)?;

    let heat = heatmap_matrix(model);
    let mut heat_header = vec!["cluster"];
    heat_header.extend(heat.col_order.iter().map(|&c| m.cols[c].as_str()));
    let heat_labels: Vec<String> = heat.row_order.iter().map(ToString::to_string).collect();
    io::write_csv(&dir.join("heatmap.csv"), &heat_header, &matrix_rows(&heat_labels, heat.values.view()))?;

    let dendrogram = match &out.dendrogram {
        Some(t) => json!({
            "k": t.k,
            "leaf_order": t.leaf_order(),
            "merges": t.merges.iter().map(|mg| json!({
                "left": mg.left,
                "right": mg.right,
                "height": json_num(mg.height),
                "size": mg.size,
            })).collect::<Vec<Value>>(),
        }),
        None => json!({"k": model.k, "leaf_order": (0..model.k).collect::<Vec<_>>(), "merges": []}),
    };
    io::write_json(&dir.join("dendrogram.json"), &dendrogram)?;

    write_region_reports(&dir.join("region_reports.csv"), &out.region_reports)?;

    let rows: Vec<Vec<String>> = m
        .rows
        .iter()
        .zip(&model.assignment)
        .zip(&out.projection)
        .map(|((t, c), (x, y))| vec![t.to_string(), c.to_string(), fmt_num(*x), fmt_num(*y)])
        .collect();
    io::write_csv(&dir.join("projection.csv"), &["territory_id", "cluster", "x", "y"], &rows)?;

    io::write_text(&dir.join("report.txt"), &out.report.to_text())?;

    if let Some(g) = &out.geometry {
        io::write_json(&dir.join("map.geojson"), &g.annotate(&out.assignment_map(), &out.profiles))?;
    }
    Ok(())
}

/// Load the inputs named by `cfg`, run every stage and write all outputs
/// to `cfg.out`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunReport, PipelineError> {
    let started = Instant::now();
    let (dataset, geometry) = load_inputs(cfg)?;
    let ingest = started.elapsed();
    let out = run_dataset(cfg, &dataset, geometry)?;
    let started = Instant::now();
    write_outputs(&out, &cfg.out).at(Stage::Export)?;
    let mut report = out.report;
    report.timings.insert(0, (Stage::Ingest, ingest));
    report.timings.push((Stage::Export, started.elapsed()));
    Ok(report)
}
