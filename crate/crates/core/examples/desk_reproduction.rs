//! The train → extract → classify pipeline on a reduced desk configuration.
//!
//! Pass `--full-desk` to use the unreduced desk preset instead.

use cdae::harness::{ExperimentConfig, Run, RunPaths, Scale};

fn main() {
    let mut cfg = ExperimentConfig::preset(Scale::Desk);
    if !std::env::args().any(|a| a == "--full-desk") {
        cfg.split.per_class = 50;
        cfg.architectures = vec![vec![784, 64, 16]];
        cfg.train.epochs = 10;
        cfg.train.batch_size = 50;
    }
    let out = std::env::temp_dir().join(format!("cdae-desk-example-{}", std::process::id()));
    let run = Run::new(cfg, RunPaths::new(&out)).with_log(|m| eprintln!("{m}"));
    let report = run.reproduce().expect("pipeline runs");
    print!("{}", report.to_text());
    println!("artifacts in {}", out.display());
}
