use clap::{Parser, Subcommand};
use pfme_cli::config::parse_override;
use pfme_cli::{run, CliError, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pfme", version, about = "Polaron-frame master equation scenario runner")]
struct Cli {
    /// Worker threads for sweeps and ensembles.
    #[arg(long, global = true, env = "PFME_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario described by a TOML configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the `scenario` key.
        #[arg(long)]
        scenario: Option<String>,
        /// Overrides the `out` key.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides any dotted key, e.g. `--set system.drive=0.05`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config { field: "PFME_THREADS".into(), reason: "must be at least 1".into() });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config { field: "PFME_THREADS".into(), reason: e.to_string() })?;
    }
    let Command::Run { config, scenario, out, set } = cli.command;
    let mut overrides = set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    if let Some(s) = scenario {
        overrides.push(("scenario".into(), toml::Value::String(s)));
    }
    if let Some(o) = out {
        overrides.push(("out".into(), toml::Value::String(o.display().to_string())));
    }
    let cfg = RunConfig::load(&config, &overrides)?;
    let manifest = run(&cfg)?;
    println!("{}", serde_json::to_string(&manifest).expect("manifest serialises"));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config { field: "arguments".into(), reason: e.kind().to_string() };
            let _ = e.print();
            eprintln!("{}", err.report());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
