use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jamsim::cli::{run_sweep, run_validation_config, SweepConfig};

#[derive(Parser)]
#[command(
    name = "jamsim",
    version,
    about = "Massive MU-MIMO uplink under a training/data-phase jammer: closed-form SE sweeps and Monte Carlo validation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sum SE versus jammer power budget at M = 100 (optimal vs equal jamming)
    Fig1(PresetArgs),
    /// Sum SE versus number of BS antennas at Q = 10 dB
    Fig2(PresetArgs),
    /// Optimal jammer energy fraction versus antennas, one curve per phi
    Fig3(PresetArgs),
    /// Run a sweep described by a JSON config file
    Sweep(SweepArgs),
    /// Monte Carlo validation of the closed-form SINR
    Validate(ValidateArgs),
}

#[derive(Args)]
struct PresetArgs {
    /// JSON config overriding the scenario and link parameters; the preset
    /// still pins the sweep kind and grid
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (presets default to figN.csv)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of user-drop realizations to average
    #[arg(long)]
    drops: Option<usize>,
    /// Users' power budget in dB
    #[arg(long = "p-db")]
    p_db: Option<f64>,
    /// Jammer's power budget in dB
    #[arg(long = "q-db")]
    q_db: Option<f64>,
    /// Single-threaded reference mode (output is identical either way)
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config describing the sweep
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path (overrides the config's output_path)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    drops: Option<usize>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// JSON config describing the validation scenario (defaults to a
    /// single-user reference case)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of simulated coherence blocks
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sequential: bool,
}

fn preset_config(preset: SweepConfig, args: &PresetArgs) -> Result<SweepConfig, jamsim::Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let mut file_cfg = SweepConfig::from_json_file(path)?;
            file_cfg.kind = preset.kind;
            file_cfg.grid = preset.grid.clone();
            file_cfg.jamming_modes = preset.jamming_modes.clone();
            if file_cfg.output_path.is_none() {
                file_cfg.output_path = preset.output_path.clone();
            }
            file_cfg
        }
        None => preset,
    };
    if let Some(out) = &args.out {
        cfg.output_path = Some(out.clone());
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(drops) = args.drops {
        cfg.num_drops = drops;
    }
    if let Some(p_db) = args.p_db {
        cfg.user_budget_db = p_db;
    }
    if let Some(q_db) = args.q_db {
        cfg.jammer_budget_db = q_db;
    }
    cfg.sequential |= args.sequential;
    Ok(cfg)
}

fn execute_sweep(cfg: &SweepConfig) -> Result<(), jamsim::Error> {
    let outcome = run_sweep(cfg)?;
    match &outcome.written_to {
        Some(path) => eprintln!("wrote {} rows to {}", outcome.rows.len(), path.display()),
        None => print!("{}", outcome.csv),
    }
    Ok(())
}

fn real_main() -> Result<ExitCode, jamsim::Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Fig1(args) => execute_sweep(&preset_config(SweepConfig::preset_fig1(), &args)?)?,
        Command::Fig2(args) => execute_sweep(&preset_config(SweepConfig::preset_fig2(), &args)?)?,
        Command::Fig3(args) => execute_sweep(&preset_config(SweepConfig::preset_fig3(), &args)?)?,
        Command::Sweep(args) => {
            let mut cfg = SweepConfig::from_json_file(&args.config)?;
            if let Some(out) = &args.out {
                cfg.output_path = Some(out.clone());
            }
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            if let Some(drops) = args.drops {
                cfg.num_drops = drops;
            }
            cfg.sequential |= args.sequential;
            execute_sweep(&cfg)?;
        }
        Command::Validate(args) => {
            let mut cfg = match &args.config {
                Some(path) => SweepConfig::from_json_file(path)?,
                None => SweepConfig::validation_default(),
            };
            if let Some(blocks) = args.blocks {
                cfg.num_blocks = blocks;
            }
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            cfg.sequential |= args.sequential;
            let report = run_validation_config(&cfg)?;
            print!("{}", report.render());
            if report.verdict == Some(false) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
