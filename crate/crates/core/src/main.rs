use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ionphonon::cli;

#[derive(Parser)]
#[command(name = "ionphonon", version, about = "Trapped-ion phonon experiment runner")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment config and write summary.json plus CSV tables.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List experiment kinds.
    List,
    /// Print the parameter schema of one kind.
    Describe { kind: String },
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = cli::init_threads().and_then(|_| match args.cmd {
        Cmd::Run { config, seed, trials, out } => {
            let (bundle, dir) = cli::run(&config, &cli::Overrides { seed, trials, out })?;
            let failed: Vec<&str> = bundle.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            println!("{} -> {}", bundle.kind, dir.display());
            if !failed.is_empty() {
                eprintln!("built-in checks failed: {}", failed.join(", "));
            }
            Ok(())
        }
        Cmd::List => {
            print!("{}", cli::list());
            Ok(())
        }
        Cmd::Describe { kind } => {
            print!("{}", cli::describe(&kind)?);
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
