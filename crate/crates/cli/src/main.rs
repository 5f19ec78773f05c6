mod config;
mod csv;
mod error;
mod scenarios;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use config::Config;
use error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    Fig1,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig4gap,
    GjSweep,
    Quasienergy,
    ClassicalAvg,
    Channels,
    /// Resolve and check a config without running it.
    Validate,
}

impl Command {
    fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }
}

/// Runs rf-dressed spin scenarios and writes CSV.
#[derive(Debug, Parser)]
#[command(name = "rfdress", version)]
struct Args {
    /// Scenario to run, or `validate`.
    #[arg(value_enum)]
    command: Command,

    /// Scenario file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,

    /// Output CSV; defaults to the `output` key, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for the sweep (fallback: RFDRESS_JOBS).
    #[arg(long, env = "RFDRESS_JOBS")]
    jobs: Option<usize>,

    /// Integration tolerance, overriding the `tol` key.
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rfdress: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    let cfg = Config::load(&args.config)?.with_tol_override(args.tol);
    let declared = cfg.text("scenario");
    let scenario = match (args.command, &declared) {
        (Command::Validate, Some(s)) => s.clone(),
        (Command::Validate, None) => {
            return Err(CliError::config(
                "scenario",
                "missing required key (validate needs it)",
            ));
        }
        (cmd, Some(s)) if *s != cmd.name() => {
            return Err(CliError::config(
                "scenario",
                format!("config declares `{s}` but command is `{}`", cmd.name()),
            ));
        }
        (cmd, _) => cmd.name(),
    };
    if let Some(s) = &declared {
        if !config::SCENARIOS.contains(&s.as_str()) {
            return Err(CliError::config(
                "scenario",
                format!("unknown scenario `{s}`"),
            ));
        }
    }
    let plan = scenarios::plan(&scenario, &cfg)?;

    if args.command == Command::Validate {
        let mut report = format!("ok\nscenario = {scenario}\n");
        for (k, v) in cfg.resolved() {
            report.push_str(&format!("{k} = {v}\n"));
        }
        for w in &plan.warnings {
            report.push_str(&format!("warning: {w}\n"));
        }
        print!("{report}");
        return Ok(());
    }

    for w in &plan.warnings {
        eprintln!("warning: {w}");
    }
    let pool = match args.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be >= 1".into())),
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?,
        ),
        None => None,
    };
    let table = match pool {
        Some(p) => p.install(|| plan.run())?,
        None => plan.run()?,
    };
    let text = table.render();
    match args
        .out
        .clone()
        .or_else(|| cfg.text("output").map(PathBuf::from))
    {
        Some(path) => std::fs::write(&path, text).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Output {
                path: "stdout".into(),
                source,
            }),
    }
}
