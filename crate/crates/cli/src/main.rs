mod args;
mod commands;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::de::DeserializeOwned;

use args::{Cli, Command, Format, RunConfig};
use error::CliError;
use output::{render, write_output, Meta, Outcome};

const THREADS_ENV: &str = "STEINLAB_THREADS";

fn init_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|e| CliError::Validation(format!("{THREADS_ENV}={v}: {e}")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Validation("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}

fn infer_format(flag: Option<Format>, out: Option<&Path>) -> Format {
    flag.unwrap_or_else(|| match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    })
}

fn parse_params<T: DeserializeOwned>(value: serde_json::Value) -> Result<T, CliError> {
    let value = if value.is_null() { serde_json::json!({}) } else { value };
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::Validation(format!("params.{path}: {}", e.inner()))
    })
}

/// Runs a parsed subcommand and returns its outcome plus the params echo.
fn dispatch(cmd: &Command, seed: Option<u64>) -> Result<(Outcome, serde_json::Value), CliError> {
    let echo = |v: &dyn erased::Echo| v.echo();
    Ok(match cmd {
        Command::Constants(a) => (commands::constants(a)?, echo(a)),
        Command::Solve(a) => (commands::solve(a)?, echo(a)),
        Command::Residual(a) => (commands::residual(a, seed)?, echo(a)),
        Command::HolderProbe(a) => (commands::holder_probe(a, seed)?, echo(a)),
        Command::Raic(a) => (commands::raic(a)?, echo(a)),
        Command::W1(a) => (commands::w1(a)?, echo(a)),
        Command::Clt(a) => (commands::clt(a, seed)?, echo(a)),
        Command::Run(_) => unreachable!("run configs are expanded before dispatch"),
    })
}

mod erased {
    pub trait Echo {
        fn echo(&self) -> serde_json::Value;
    }

    impl<T: serde::Serialize> Echo for T {
        fn echo(&self) -> serde_json::Value {
            serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
        }
    }
}

fn command_from_config(cfg: &RunConfig) -> Result<Command, CliError> {
    let p = cfg.params.clone();
    Ok(match cfg.subcommand.as_str() {
        "constants" => Command::Constants(parse_params(p)?),
        "solve" => Command::Solve(parse_params(p)?),
        "residual" => Command::Residual(parse_params(p)?),
        "holder-probe" | "holder_probe" => Command::HolderProbe(parse_params(p)?),
        "raic" => Command::Raic(parse_params(p)?),
        "w1" => Command::W1(parse_params(p)?),
        "clt" => Command::Clt(parse_params(p)?),
        other => {
            return Err(CliError::Validation(format!(
                "subcommand: unknown `{other}` (expected constants, solve, residual, holder-probe, raic, w1, clt)"
            )))
        }
    })
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let mut global = cli.global;
    let command = match cli.command {
        Command::Run(r) => {
            let text = std::fs::read_to_string(&r.config)
                .map_err(|e| CliError::Io(format!("{}: {e}", r.config.display())))?;
            let mut de = serde_json::Deserializer::from_str(&text);
            let cfg: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
                CliError::Validation(format!("{}: {}: {}", r.config.display(), e.path(), e.inner()))
            })?;
            global.seed = global.seed.or(cfg.seed);
            global.out = global.out.or_else(|| cfg.output_path.clone());
            global.format = global.format.or(cfg.format);
            command_from_config(&cfg)?
        }
        c => c,
    };
    init_threads(global.threads)?;
    let (outcome, params) = dispatch(&command, global.seed)?;
    let out_path: Option<PathBuf> = global.out.clone();
    let format = infer_format(global.format, out_path.as_deref());
    let meta = Meta {
        subcommand: command.name(),
        seed: global.seed,
        params,
    };
    let bytes = render(&outcome, &meta, format)?;
    write_output(&bytes, out_path.as_deref())?;
    eprintln!("{}", outcome.summary);
    Ok(outcome.violation)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
