mod args;
mod run;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::Cli;
use run::Refusal;

/// Exit status for a computation refused by a cost cap.
const EXIT_REFUSED: u8 = 3;

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn main_inner(cli: &Cli) -> Result<Option<Refusal>> {
    if let Some(n) = cli.threads {
        anyhow::ensure!(n > 0, "--threads must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let (art, refusal) = run::run(cli)?;
    emit(cli, &art.0)?;
    Ok(refusal)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(r)) => {
            eprintln!("error: {r}");
            ExitCode::from(EXIT_REFUSED)
        }
        Err(e) => {
            let refused = e.chain().any(|c| c.downcast_ref::<Refusal>().is_some());
            eprintln!("error: {e:#}");
            ExitCode::from(if refused { EXIT_REFUSED } else { 1 })
        }
    }
}
