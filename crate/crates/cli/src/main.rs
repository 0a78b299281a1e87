mod config;
mod expr;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use run::{CliError, Options, Output, Verb};

#[derive(Parser)]
#[command(name = "signlab", version, about = "Sign experiments for −ΔU = AU + μU + F with Dirichlet conditions")]
struct Cli {
    #[command(subcommand)]
    verb: Command,

    /// Experiment configuration (TOML)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides output.dir
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Matrix tolerance; overrides tolerances.matrix
    #[arg(long, global = true, value_name = "REAL")]
    tol: Option<f64>,

    /// Recorded in the manifest; only the randomized test suites draw from it
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Solve once at solve.mu and write the components
    Solve,
    /// Sign reports over a range of μ plus the empirical δ on both sides
    Sweep,
    /// Antimaximum threshold for one source component
    Amp,
    /// Closed forms and sign results for a 2×2 coupling
    Annex,
    /// Structural hypotheses on the matrix and the source
    CheckHypotheses,
}

impl From<Command> for Verb {
    fn from(c: Command) -> Verb {
        match c {
            Command::Solve => Verb::Solve,
            Command::Sweep => Verb::Sweep,
            Command::Amp => Verb::Amp,
            Command::Annex => Verb::Annex,
            Command::CheckHypotheses => Verb::CheckHypotheses,
        }
    }
}

fn fail(err: &CliError, out: Option<PathBuf>) -> ExitCode {
    eprintln!("error[{}]: {err}", err.code());
    if let Some(dir) = out {
        if let Ok(mut o) = Output::new(&dir) {
            let _ = o.write_json("error.json", &err.record());
        }
    }
    ExitCode::from(err.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    let Some(config) = cli.config else {
        return fail(&CliError::Config("--config is required".into()), cli.out);
    };
    let opts = Options { config, out: cli.out, tol: cli.tol, seed: cli.seed };
    match run::run(cli.verb.into(), &opts) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            let checked = run::load_config(&opts.config).ok().map(|(c, _)| c);
            fail(&err, Some(run::output_dir(&opts, checked.as_ref())))
        }
    }
}
