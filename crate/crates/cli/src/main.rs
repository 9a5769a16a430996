//! `outage-cr`: outage capacity, outage CR capacity and protocol
//! simulation from one configuration file.
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 when a resource
//! cap stops the computation, 1 when a replay does not reproduce.

mod commands;
mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use outage_cr::config::{Config, GainConfig};
use outage_cr::protocol::{Backend, GainStates, SimulationMode};

use manifest::{CommandSpec, RunManifest, Sweep};

#[derive(Parser)]
#[command(name = "outage-cr", version, about = "Outage capacity and outage common randomness over slow-fading channels")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files and the run manifest.
    #[arg(long, global = true, default_value = "outage-cr-out")]
    out: PathBuf,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// γ₀ and C_η(P) for the fading section.
    OutageCapacity {
        #[command(flatten)]
        fading: FadingArgs,
        /// Sweep `eta` or `power`, e.g. `eta=0:0.9:0.1`; writes CSV.
        #[arg(long)]
        sweep: Option<Sweep>,
    },
    /// Outage CR capacity of the source under the channel budget.
    CrCapacity {
        #[command(flatten)]
        fading: FadingArgs,
        /// Explicit budget in bits instead of C_η(P).
        #[arg(long)]
        budget_bits: Option<f64>,
        /// Use the exhaustive grid search.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        grid_steps: Option<usize>,
        #[arg(long)]
        card_u: Option<usize>,
    },
    /// Monte Carlo run of the binning protocol.
    Simulate(SimulateArgs),
    /// Re-run a manifest and check its outputs are reproduced.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Args)]
struct FadingArgs {
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    power: Option<f64>,
    #[arg(long)]
    noise_var: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Idealized,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Materialized,
    Ensemble,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    fading: FadingArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    channel_uses: Option<usize>,
    /// Equal-mass gain buckets.
    #[arg(long)]
    buckets: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Budget in bits for choosing the test channel.
    #[arg(long)]
    budget_bits: Option<f64>,
}

/// Error raised for a configuration problem, mapped to exit status 2.
#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn load_config(path: Option<&Path>) -> Result<Config> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("reading {}: {e}", path.display())))?;
    let mut config: Config = toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    if let GainConfig::Empirical { samples, path: Some(file) } = &mut config.fading.gain {
        if samples.is_none() {
            let base = path.parent().unwrap_or(Path::new("."));
            *samples = Some(read_gains(&base.join(file.as_str()))?);
        }
    }
    Ok(config)
}

fn read_gains(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("reading {}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse::<f64>().map_err(|e| ConfigError(format!("{}: `{l}`: {e}", path.display())).into()))
        .collect()
}

fn apply_fading(config: &mut Config, f: &FadingArgs) {
    if let Some(v) = f.eta {
        config.fading.eta = v;
    }
    if let Some(v) = f.power {
        config.fading.power = v;
    }
    if let Some(v) = f.noise_var {
        config.fading.noise_var = v;
    }
}

fn apply_simulate(config: &mut Config, a: &SimulateArgs) {
    apply_fading(config, &a.fading);
    let p = &mut config.protocol;
    macro_rules! set {
        ($($field:ident),*) => { $(if let Some(v) = a.$field { p.$field = v; })* };
    }
    set!(n, delta, alpha, trials, margin);
    if a.epsilon.is_some() {
        p.epsilon = a.epsilon;
    }
    if a.channel_uses.is_some() {
        p.channel_uses = a.channel_uses;
    }
    if let Some(b) = a.buckets {
        p.gain_states = GainStates::Sampled { buckets: b };
    }
    if let Some(b) = a.backend {
        p.backend = match b {
            BackendArg::Idealized => Backend::Idealized,
            BackendArg::Gaussian => Backend::Gaussian,
        };
    }
    if let Some(m) = a.mode {
        p.mode = match m {
            ModeArg::Auto => SimulationMode::Auto,
            ModeArg::Materialized => SimulationMode::Materialized,
            ModeArg::Ensemble => SimulationMode::Ensemble,
        };
    }
    if a.budget_bits.is_some() {
        config.capacity.budget_bits = a.budget_bits;
    }
}

fn write_outputs(dir: &Path, outputs: &commands::Outputs, manifest: &RunManifest) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, text) in outputs {
        fs::write(dir.join(name), text).with_context(|| format!("writing {name}"))?;
    }
    manifest.save(&dir.join("manifest.json"))
}

fn run(cli: Cli) -> Result<()> {
    if let Command::Replay { manifest } = &cli.command {
        let recorded = RunManifest::load(manifest).map_err(|e| ConfigError(format!("{e:#}")))?;
        let (outputs, console) = commands::execute(&recorded.command, &recorded.config)?;
        print!("{console}");
        let fresh = RunManifest::new(recorded.command.clone(), recorded.config.clone(), outputs.clone());
        write_outputs(&cli.out, &outputs, &fresh)?;
        if outputs != recorded.outputs {
            bail!("replay of {} did not reproduce the recorded outputs", manifest.display());
        }
        eprintln!("replay reproduced {} output file(s)", outputs.len());
        return Ok(());
    }

    let mut config = load_config(cli.config.as_deref())?;
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    let spec = match &cli.command {
        Command::OutageCapacity { fading, sweep } => {
            apply_fading(&mut config, fading);
            CommandSpec::OutageCapacity { sweep: sweep.clone() }
        }
        Command::CrCapacity {
            fading,
            budget_bits,
            oracle,
            grid_steps,
            card_u,
        } => {
            apply_fading(&mut config, fading);
            if budget_bits.is_some() {
                config.capacity.budget_bits = *budget_bits;
            }
            if let Some(g) = grid_steps {
                config.capacity.grid_steps = *g;
            }
            if card_u.is_some() {
                config.capacity.oracle_card_u = *card_u;
            }
            CommandSpec::CrCapacity { oracle: *oracle }
        }
        Command::Simulate(args) => {
            apply_simulate(&mut config, args);
            CommandSpec::Simulate
        }
        Command::Replay { .. } => unreachable!("handled above"),
    };
    config.resolve_seed();
    let (outputs, console) = commands::execute(&spec, &config)?;
    print!("{console}");
    write_outputs(&cli.out, &outputs, &RunManifest::new(spec, config, outputs.clone()))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<outage_cr::Error>() {
        return if e.is_resource_cap() { 3 } else { 2 };
    }
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
