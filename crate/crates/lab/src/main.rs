use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ergodic_lab::catalog::{self, describe};
use ergodic_lab::output::{summary_json, write_all};
use ergodic_lab::{execute, ExperimentConfig, LabError, LabResult};

#[derive(Parser)]
#[command(name = "ergolab", version, about = "Run the ergodic-core experiment catalog")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs one experiment; exits 0 when every verdict passes, 1 otherwise, 2 on a bad configuration.
    Run {
        /// Catalog id; may instead come from the config file.
        experiment: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Accepts scientific notation such as 1e6.
        #[arg(long)]
        n: Option<f64>,
        #[arg(long)]
        trajectories: Option<f64>,
        #[arg(long)]
        model: Option<String>,
        /// Directory for summary.json and the CSV tables; without it the summary goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parameter override, `name=value`; repeatable.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Threshold override, `key=value`; repeatable.
        #[arg(long = "threshold", value_name = "KEY=VALUE")]
        thresholds: Vec<String>,
    },
    /// Lists the catalog.
    List,
    /// Shows an experiment's claim, settings and the thresholds in effect.
    Describe {
        experiment: String,
        #[arg(long)]
        model: Option<String>,
    },
}

fn pairs(items: &[String]) -> LabResult<BTreeMap<String, f64>> {
    items
        .iter()
        .map(|s| {
            let (k, v) = s.split_once('=').ok_or_else(|| LabError::config(format!("expected NAME=VALUE, got `{s}`")))?;
            let v: f64 = v.trim().parse().map_err(|_| LabError::config(format!("`{v}` is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn run(cli: Cli) -> LabResult<bool> {
    match cli.command {
        Command::List => {
            for e in catalog::catalog() {
                println!("{:<24} criterion {:>2}  {}", e.id, e.criterion, e.claim);
            }
            Ok(true)
        }
        Command::Describe { experiment, model } => {
            let entry = catalog::find(&experiment).ok_or_else(|| LabError::config(format!("unknown experiment `{experiment}`")))?;
            if let Some(m) = &model {
                if !entry.models.contains(&m.as_str()) {
                    return Err(LabError::config(format!("model `{m}` is not one of {:?}", entry.models)));
                }
            }
            print!("{}", describe(entry, model.as_deref()));
            Ok(true)
        }
        Command::Run { experiment, config, seed, n, trajectories, model, out, params, thresholds } => {
            let base = match &config {
                Some(path) => ExperimentConfig::from_file(path)?,
                None => ExperimentConfig::default(),
            };
            let flags = ExperimentConfig { experiment, seed, model, n, trajectories, out, params: pairs(&params)?, thresholds: pairs(&thresholds)? };
            let resolved = base.overlay(flags).resolve()?;
            let (mut envelope, outcome) = execute(&resolved)?;
            match &resolved.out {
                Some(dir) => {
                    write_all(dir, &mut envelope, &outcome.tables)?;
                    for v in &envelope.verdicts {
                        eprintln!("{} {}: {} = {} {} {}", if v.pass { "PASS" } else { "FAIL" }, v.threshold, v.metric, v.value, v.op.symbol(), v.limit);
                    }
                    eprintln!("wrote {}", dir.display());
                }
                None => print!("{}", summary_json(&envelope)?),
            }
            Ok(envelope.pass)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
