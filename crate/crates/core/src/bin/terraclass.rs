use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use terraclass::config::RunConfig;
use terraclass::fixture::{generate_fixture, write_fixture, FixtureSpec, Noise};
use terraclass::io::{self, read_assignments, read_profiles, read_regions};
use terraclass::model::validate_dataset;
use terraclass::pipeline::{self, harmonize_inputs, write_region_reports, PipelineError, Stage};
use terraclass::profile::macro_region_report;

#[derive(Parser)]
#[command(name = "terraclass", version, about = "Cluster territories by energy potential and socioeconomic indicators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the input files against the dataset schema.
    Validate(RunArgs),
    /// Downscale, normalize and write `harmonized.csv`.
    Harmonize(RunArgs),
    /// Run the full pipeline and write every artifact.
    Cluster(RunArgs),
    /// Write a synthetic dataset with planted clusters.
    Fixture(FixtureArgs),
    /// Recompute macro-region reports from a finished run.
    Report(RunArgs),
}

/// Every configuration key is also a flag of the same name.
#[derive(Args)]
struct RunArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory holding the standard input file names.
    #[arg(long)]
    data: Option<String>,
    #[arg(long)]
    territories: Option<String>,
    #[arg(long)]
    indicator_defs: Option<String>,
    #[arg(long)]
    indicators: Option<String>,
    #[arg(long)]
    proxies: Option<String>,
    #[arg(long)]
    national: Option<String>,
    #[arg(long)]
    regions: Option<String>,
    #[arg(long)]
    geometry: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    missing_threshold: Option<String>,
    #[arg(long)]
    corr_threshold: Option<String>,
    #[arg(long)]
    hopkins_sample_size: Option<String>,
    #[arg(long)]
    hopkins_repeats: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    k_min: Option<String>,
    #[arg(long)]
    k_max: Option<String>,
    /// Comma-separated validity indices taking part in the vote.
    #[arg(long)]
    indices: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    #[arg(long)]
    n_starts: Option<String>,
    /// `dsq_weighted` or `maximin`.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    bin_inner: Option<String>,
    #[arg(long)]
    bin_middle: Option<String>,
    #[arg(long)]
    bin_outer: Option<String>,
    /// Cluster with `--k` instead of voting.
    #[arg(long)]
    skip_vote: bool,
    #[arg(long)]
    emit_geojson: bool,
}

impl RunArgs {
    fn config(&self) -> terraclass::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let overrides = [
            ("data", &self.data),
            ("territories", &self.territories),
            ("indicator_defs", &self.indicator_defs),
            ("indicators", &self.indicators),
            ("proxies", &self.proxies),
            ("national", &self.national),
            ("regions", &self.regions),
            ("geometry", &self.geometry),
            ("out", &self.out),
            ("seed", &self.seed),
            ("missing_threshold", &self.missing_threshold),
            ("corr_threshold", &self.corr_threshold),
            ("hopkins_sample_size", &self.hopkins_sample_size),
            ("hopkins_repeats", &self.hopkins_repeats),
            ("k", &self.k),
            ("k_min", &self.k_min),
            ("k_max", &self.k_max),
            ("indices", &self.indices),
            ("max_iter", &self.max_iter),
            ("n_starts", &self.n_starts),
            ("init", &self.init),
            ("bin_inner", &self.bin_inner),
            ("bin_middle", &self.bin_middle),
            ("bin_outer", &self.bin_outer),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.skip_vote |= self.skip_vote;
        cfg.emit_geojson |= self.emit_geojson;
        Ok(cfg)
    }
}

#[derive(Args)]
struct FixtureArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 340)]
    n_territories: usize,
    #[arg(long, default_value_t = 17)]
    n_blobs: usize,
    #[arg(long, default_value_t = 4)]
    d_energy: usize,
    #[arg(long, default_value_t = 3)]
    d_socio: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Minimum distance between planted centers in within-blob σ.
    #[arg(long, default_value_t = 8.0)]
    separation: f64,
    #[arg(long, default_value_t = 10)]
    n_countries: usize,
    /// Draw within-blob noise uniformly instead of from a Gaussian.
    #[arg(long)]
    uniform_noise: bool,
    /// Add an indicator `sparse` with this fraction of missing cells.
    #[arg(long)]
    sparse_fraction: Option<f64>,
}

fn fail(stage: Stage, err: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {stage} failed: {err}");
    ExitCode::from(stage.exit_code() as u8)
}

fn pipeline_fail(e: PipelineError) -> ExitCode {
    if let terraclass::Error::Validation(report) = &e.source {
        for v in &report.violations {
            eprintln!("  {v}");
        }
    }
    fail(e.stage, &e.source)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate(args) => {
            let cfg = match args.config() {
                Ok(c) => c,
                Err(e) => return fail(Stage::Ingest, e),
            };
            let dataset = match io::load_dataset(&cfg.paths) {
                Ok(d) => d,
                Err(e) => return fail(Stage::Ingest, e),
            };
            let report = validate_dataset(&dataset);
            if report.is_ok() {
                println!(
                    "ok: {} territories, {} indicators",
                    dataset.territories.len(),
                    dataset.table.n_cols()
                );
                ExitCode::SUCCESS
            } else {
                for v in &report.violations {
                    println!("{v}");
                }
                fail(Stage::Validate, format!("{} violation(s)", report.violations.len()))
            }
        }
        Command::Harmonize(args) => {
            let cfg = match args.config() {
                Ok(c) => c,
                Err(e) => return fail(Stage::Ingest, e),
            };
            let (_, _, harmonized) = match harmonize_inputs(&cfg) {
                Ok(h) => h,
                Err(e) => return pipeline_fail(e),
            };
            let path = cfg.out.join("harmonized.csv");
            let written = std::fs::create_dir_all(&cfg.out)
                .map_err(|e| e.to_string())
                .and_then(|_| io::write_indicator_table(&path, &harmonized.table).map_err(|e| e.to_string()));
            if let Err(e) = written {
                return fail(Stage::Export, e);
            }
            println!("downscaled: {}", harmonized.log.downscaled.join(", "));
            println!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Command::Cluster(args) => {
            let cfg = match args.config() {
                Ok(c) => c,
                Err(e) => return fail(Stage::Ingest, e),
            };
            match pipeline::run_pipeline(&cfg) {
                Ok(report) => {
                    for (stage, t) in &report.timings {
                        eprintln!("{stage}: {:.3} s", t.as_secs_f64());
                    }
                    println!(
                        "k = {}, explained variance {:.4}, Hopkins {:.4}; outputs in {}",
                        report.k,
                        report.explained_variance,
                        report.hopkins,
                        cfg.out.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => pipeline_fail(e),
            }
        }
        Command::Fixture(a) => {
            let spec = FixtureSpec {
                n_territories: a.n_territories,
                n_blobs: a.n_blobs,
                d_energy: a.d_energy,
                d_socio: a.d_socio,
                seed: a.seed,
                separation: a.separation,
                n_countries: a.n_countries,
                noise: if a.uniform_noise { Noise::Uniform } else { Noise::Gaussian },
                sparse_fraction: a.sparse_fraction,
            };
            let fixture = match generate_fixture(&spec) {
                Ok(f) => f,
                Err(e) => return fail(Stage::Ingest, e),
            };
            if let Err(e) = write_fixture(&fixture, &a.out) {
                return fail(Stage::Export, e);
            }
            println!("wrote {} territories to {}", spec.n_territories, a.out.display());
            ExitCode::SUCCESS
        }
        Command::Report(args) => {
            let cfg = match args.config() {
                Ok(c) => c,
                Err(e) => return fail(Stage::Ingest, e),
            };
            let loaded = (|| {
                let regions = match &cfg.paths.regions {
                    Some(p) => read_regions(p)?,
                    None => Vec::new(),
                };
                Ok::<_, terraclass::Error>((
                    read_assignments(&cfg.out.join("assignments.csv"))?,
                    read_profiles(&cfg.out.join("profiles.csv"))?,
                    regions,
                ))
            })();
            let (assignment, profiles, regions) = match loaded {
                Ok(x) => x,
                Err(e) => return fail(Stage::Ingest, e),
            };
            let reports = match regions
                .iter()
                .map(|r| macro_region_report(&assignment, &profiles, r))
                .collect::<terraclass::Result<Vec<_>>>()
            {
                Ok(r) => r,
                Err(e) => return fail(Stage::Profile, e),
            };
            for r in &reports {
                println!("{}: {} territories in {} clusters", r.region, r.size, r.n_clusters_present);
            }
            if let Err(e) = write_region_reports(&cfg.out.join("region_reports.csv"), &reports) {
                return fail(Stage::Export, e);
            }
            ExitCode::SUCCESS
        }
    }
}
