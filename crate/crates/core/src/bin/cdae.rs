use std::path::PathBuf;
use std::process::ExitCode;

use cdae::autoencoder::gradcheck::GradCheckConfig;
use cdae::autoencoder::VariantKind;
use cdae::harness::{
    self, atomic_write, write_json, ErrorDocument, ExperimentConfig, Run, RunPaths, Scale,
};
use cdae::{Error, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cdae", version, about = "Contractive denoising autoencoder experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Ae,
    Dae,
    Cae,
    Cdae,
}

impl From<VariantArg> for VariantKind {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Ae => VariantKind::Ae,
            VariantArg::Dae => VariantKind::Dae,
            VariantArg::Cae => VariantKind::Cae,
            VariantArg::Cdae => VariantKind::Cdae,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    /// Experiment configuration (JSON). Defaults to the preset for --scale.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "desk")]
    scale: ScaleArg,
    /// Run directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(clap::Args)]
struct Selected {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    variant: VariantArg,
    /// Architecture such as 784-200-50; defaults to every configured one.
    #[arg(long)]
    arch: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Pretrain the stack for one variant.
    Train(Selected),
    /// Encode the train and test splits with a trained stack.
    Extract(Selected),
    /// Fit the SVM on extracted features and score the test split.
    Classify(Selected),
    /// Rebuild report.json and report.txt from a run directory.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare analytic and finite-difference gradients.
    Gradcheck {
        #[arg(long, default_value_t = 20)]
        visible: usize,
        #[arg(long, default_value_t = 7)]
        hidden: usize,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[arg(long, default_value_t = 25)]
        restarts: usize,
        #[arg(long, value_enum)]
        variant: Vec<VariantArg>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the full pipeline and print the accuracy table.
    Reproduce(Common),
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::preset(match c.scale {
            ScaleArg::Desk => Scale::Desk,
            ScaleArg::Full => Scale::Full,
        }),
    };
    cfg.apply_env();
    if let Some(out) = &c.out {
        cfg.output_dir = Some(out.clone());
    }
    if let Some(seed) = c.seed {
        cfg = cfg.with_seed(seed);
    }
    if cfg.output_dir.is_none() {
        let scale = match c.scale {
            ScaleArg::Desk => "desk",
            ScaleArg::Full => "full",
        };
        cfg.output_dir = Some(PathBuf::from("runs").join(scale));
    }
    Ok(cfg)
}

fn make_run(c: &Common) -> Result<Run> {
    harness::configure_threads(c.threads)?;
    let cfg = load_config(c)?;
    let out = cfg.output_dir.clone().expect("output dir set");
    Ok(Run::new(cfg, RunPaths::new(out)).with_log(|m| eprintln!("{m}")))
}

fn archs(run: &Run, arch: &Option<String>) -> Result<Vec<Vec<usize>>> {
    match arch {
        None => Ok(run.config.architectures.clone()),
        Some(s) => {
            let dims = s
                .split('-')
                .map(|d| d.parse::<usize>().map_err(|_| Error::Config(format!("bad architecture {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            Ok(vec![dims])
        }
    }
}

fn execute(command: &Command, out_dir: &mut Option<PathBuf>) -> Result<()> {
    match command {
        Command::Train(sel) | Command::Extract(sel) | Command::Classify(sel) => {
            let run = make_run(&sel.common)?;
            *out_dir = Some(run.paths.root().to_path_buf());
            run.prepare()?;
            let kind = VariantKind::from(sel.variant);
            let archs = archs(&run, &sel.arch)?;
            let data = match command {
                Command::Classify(_) => None,
                _ => Some(run.load_data()?),
            };
            for arch in &archs {
                match (command, &data) {
                    (Command::Train(_), Some((train, _))) => {
                        run.train(arch, kind, train)?;
                    }
                    (Command::Extract(_), Some((train, test))) => run.extract(arch, kind, train, test)?,
                    _ => {
                        let r = run.classify(arch, kind)?;
                        println!("{} {} accuracy {:.4}", r.architecture, kind.label(), r.accuracy);
                    }
                }
            }
            Ok(())
        }
        Command::Report { out } => {
            *out_dir = Some(out.clone());
            let report = harness::report_dir(&RunPaths::new(out))?;
            print!("{}", report.to_text());
            Ok(())
        }
        Command::Gradcheck {
            visible,
            hidden,
            tolerance,
            restarts,
            variant,
            seed,
            out,
            threads,
        } => {
            harness::configure_threads(*threads)?;
            *out_dir = out.clone();
            let mut cfg = GradCheckConfig {
                visible: *visible,
                hidden: *hidden,
                tolerance: *tolerance,
                restarts: *restarts,
                ..GradCheckConfig::default()
            };
            if let Some(seed) = seed {
                cfg.seed = *seed;
            }
            if !variant.is_empty() {
                cfg.variants = variant.iter().map(|&v| v.into()).collect();
            }
            let report = harness::gradcheck(&cfg)?;
            if let Some(out) = out {
                write_json(out.join("gradcheck.json"), &report)?;
            }
            println!(
                "gradcheck passed: {} cases, max relative error {:e} < {:e}",
                report.cases.len(),
                report.max_relative_error(),
                report.tolerance
            );
            Ok(())
        }
        Command::Reproduce(c) => {
            let run = make_run(c)?;
            *out_dir = Some(run.paths.root().to_path_buf());
            let report = run.reproduce()?;
            print!("{}", report.to_text());
            Ok(())
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Train(_) => "train",
        Command::Extract(_) => "extract",
        Command::Classify(_) => "classify",
        Command::Report { .. } => "report",
        Command::Gradcheck { .. } => "gradcheck",
        Command::Reproduce(_) => "reproduce",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out_dir = None;
    match execute(&cli.command, &mut out_dir) {
        Ok(()) => {
            if let Some(dir) = out_dir {
                let _ = std::fs::remove_file(dir.join("error.json"));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let doc = ErrorDocument::new(command_name(&cli.command), &e).to_json();
            eprintln!("{doc}");
            if let Some(dir) = out_dir {
                let _ = atomic_write(dir.join("error.json"), format!("{doc}\n").as_bytes());
            }
            ExitCode::FAILURE
        }
    }
}
