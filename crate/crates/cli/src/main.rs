use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use resonance_lab::{load_config, run, write_output, CliError, Command, Format, Kind};

/// Resonance experiments for the delta-shell model.
#[derive(Debug, Parser)]
#[command(name = "resonance-lab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// TOML experiment file.
    #[arg(long)]
    config: String,

    /// Overrides `output.path`; `-` means standard output.
    #[arg(long)]
    output: Option<String>,

    #[arg(long, value_enum)]
    format: Option<FormatArg>,

    #[arg(long, value_enum, default_value_t = Kind::Decaying)]
    kind: Kind,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            return fail(&CliError::Usage(
                e.to_string().lines().next().unwrap_or("").to_string(),
            ))
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut config = load_config(&cli.config)?;
    if let Some(path) = &cli.output {
        config.output.path = path.clone();
    }
    if let Some(f) = cli.format {
        config.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    let table = run(cli.command, &config, cli.kind)?;
    let text = table.render(config.output.format, cli.command.name(), &config);
    write_output(&config.output.path, &text)
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.record());
    ExitCode::from(e.exit_code() as u8)
}
