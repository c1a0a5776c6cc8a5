use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use pinned_toda::config::{parse_config, ExperimentKind};
use pinned_toda::harness;
use pinned_toda::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Ness,
    Ring,
    Poincare,
    Sweep,
}

impl From<Kind> for ExperimentKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Ness => ExperimentKind::Ness,
            Kind::Ring => ExperimentKind::Ring,
            Kind::Poincare => ExperimentKind::Poincare,
            Kind::Sweep => ExperimentKind::Sweep,
        }
    }
}

/// Runs one experiment file and writes CSV/JSON outputs plus a manifest.
///
/// Exit status: 0 success, 1 invalid configuration, 2 trajectory blow-up, 3 I/O failure.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Cli {
    /// Experiment kind; must match `kind` in the config file.
    kind: Kind,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides `master_seed` from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to $TODA_WORKERS, then the config file, then 1.
    #[arg(long)]
    workers: Option<usize>,
}

fn run(cli: &Cli) -> Result<(), Error> {
    let text = std::fs::read_to_string(&cli.config).map_err(|source| Error::Io {
        path: cli.config.clone(),
        source,
    })?;
    let mut config = parse_config(&text)?;
    let wanted = ExperimentKind::from(cli.kind);
    if config.kind() != wanted {
        return Err(Error::Invalid(format!(
            "command is `{}` but the config describes a `{}` experiment",
            wanted.as_str(),
            config.kind().as_str()
        )));
    }
    if let Some(seed) = cli.seed {
        config.set_master_seed(seed);
    }
    let workers = harness::resolve_workers(cli.workers, &config)?;
    let manifest = harness::run(&config, &cli.out, workers)?;
    eprintln!("wrote {}", manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("simulate: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
