use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uzawa_cli::commands::{cmd_diagnose, cmd_generate, cmd_ns, cmd_solve};
use uzawa_cli::config::{ExperimentConfig, TraceFormat};
use uzawa_cli::presets::{preset, PresetKind};
use uzawa_cli::CliError;

/// Saddle-point solver harness: generate test systems, run the adaptive
/// Uzawa iterations and baselines with residual traces, evaluate spectral
/// diagnostics, and reproduce the cavity-flow experiments.
#[derive(Parser)]
#[command(name = "uzawa", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Canned experiment: figure1, table1, table2, table3, figure2.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the seed of a synthetic problem.
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict trace output to one format.
    #[arg(long, value_enum)]
    format: Option<TraceFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the configured system and write it as Matrix Market plus
    /// vector files.
    Generate(CommonArgs),
    /// Run the configured solvers, writing residual traces and a summary.
    Solve(CommonArgs),
    /// Compute the spectral constants and parameter-window verdicts.
    Diagnose(CommonArgs),
    /// Run the Navier-Stokes fixed-point loop with the configured inner
    /// solvers.
    Ns(CommonArgs),
}

fn load_configs(
    args: &CommonArgs,
    expect: Option<PresetKind>,
) -> Result<Vec<(String, ExperimentConfig)>, CliError> {
    let mut configs = match (&args.config, &args.preset) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "pass either --config or --preset, not both".into(),
            ))
        }
        (Some(path), None) => vec![(String::new(), ExperimentConfig::from_path(path)?)],
        (None, Some(name)) => {
            let p = preset(name)?;
            if let Some(kind) = expect {
                if p.kind != kind {
                    let cmd = match p.kind {
                        PresetKind::Solve => "solve",
                        PresetKind::NavierStokes => "ns",
                    };
                    return Err(CliError::Config(format!(
                        "preset '{name}' belongs to the `{cmd}` command"
                    )));
                }
            }
            p.configs
        }
        (None, None) => {
            return Err(CliError::Config(
                "one of --config or --preset is required".into(),
            ))
        }
    };
    for (_, cfg) in configs.iter_mut() {
        if let Some(seed) = args.seed {
            cfg.problem.override_seed(seed);
        }
        if let Some(format) = args.format {
            cfg.formats = vec![format];
        }
    }
    Ok(configs)
}

fn out_dir(args: &CommonArgs, cfg: &ExperimentConfig, sub: &str) -> PathBuf {
    let base = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("uzawa-out"));
    if sub.is_empty() {
        base
    } else {
        base.join(sub)
    }
}

fn real_main() -> Result<i32, CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(args) => {
            let configs = load_configs(&args, None)?;
            for (sub, cfg) in &configs {
                let out = out_dir(&args, cfg, sub);
                let paths = cmd_generate(cfg, &out)?;
                for p in paths {
                    println!("wrote {}", p.display());
                }
            }
            Ok(0)
        }
        Command::Solve(args) => {
            let configs = load_configs(&args, Some(PresetKind::Solve))?;
            let mut failed = false;
            for (sub, cfg) in &configs {
                let out = out_dir(&args, cfg, sub);
                let summary = cmd_solve(cfg, &out)?;
                if !sub.is_empty() {
                    println!("[{sub}]");
                }
                print!("{}", summary.render_table());
                println!("summary: {}", out.join("summary.csv").display());
                failed |= summary.any_solver_failure();
            }
            Ok(if failed { 2 } else { 0 })
        }
        Command::Diagnose(args) => {
            let configs = load_configs(&args, None)?;
            for (sub, cfg) in &configs {
                let out = args
                    .out
                    .clone()
                    .or_else(|| cfg.output_dir.clone())
                    .map(|base| if sub.is_empty() { base } else { base.join(sub) });
                let value = cmd_diagnose(cfg, out.as_deref())?;
                println!("{}", serde_json::to_string_pretty(&value).unwrap());
            }
            Ok(0)
        }
        Command::Ns(args) => {
            let configs = load_configs(&args, Some(PresetKind::NavierStokes))?;
            let mut failed = false;
            for (sub, cfg) in &configs {
                let out = out_dir(&args, cfg, sub);
                let summary = cmd_ns(cfg, &out)?;
                if !sub.is_empty() {
                    println!("[{sub}]");
                }
                print!("{}", summary.render_table());
                println!("summary: {}", out.join("picard_summary.csv").display());
                failed |= summary.any_solver_failure();
            }
            Ok(if failed { 2 } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
