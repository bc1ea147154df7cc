//! Run every stage on the bundled fixture and write the artifacts.
//!
//! Usage: `cargo run --example full_pipeline -- [out_dir]`

use std::path::{Path, PathBuf};

use terraclass::config::RunConfig;
use terraclass::pipeline::run_pipeline;

fn main() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/fixture/config.txt");
    let mut cfg = RunConfig::from_file(&fixture).expect("bundled fixture config");
    cfg.out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("terraclass-demo"));

    match run_pipeline(&cfg) {
        Ok(report) => {
            println!("chosen k: {}", report.k);
            println!("Hopkins: {:.4}", report.hopkins);
            println!("explained variance: {:.4}", report.explained_variance);
            println!("cluster sizes: {:?}", report.cluster_sizes);
            for (stage, t) in &report.timings {
                println!("  {stage:<14}{:>8.1} ms", t.as_secs_f64() * 1e3);
            }
            println!("outputs in {}", cfg.out.display());
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
