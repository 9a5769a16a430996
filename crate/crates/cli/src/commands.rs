//! The subcommands, as pure functions from a resolved configuration to
//! output files.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, Result};
use outage_cr::config::Config;
use outage_cr::protocol::{RunStats, Simulator};
use outage_cr::{brute_force_cr_capacity, converse_bound_check, cr_capacity, crcap::default_card_u};
use serde::Serialize;
use serde_json::json;

use crate::manifest::{CommandSpec, Sweep, SweepParam};

/// Output file name to contents.
pub type Outputs = BTreeMap<String, String>;

/// Runs `command`, returning its files and its console text.
pub fn execute(command: &CommandSpec, config: &Config) -> Result<(Outputs, String)> {
    match command {
        CommandSpec::OutageCapacity { sweep: None } => outage_capacity(config),
        CommandSpec::OutageCapacity { sweep: Some(s) } => outage_sweep(config, s),
        CommandSpec::CrCapacity { oracle } => capacity(config, *oracle),
        CommandSpec::Simulate => simulate(config),
    }
}

fn json_line<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string(value)? + "\n")
}

fn outage_capacity(config: &Config) -> Result<(Outputs, String)> {
    let spec = config.fading.build()?;
    let summary = json_line(&json!({
        "gamma0": spec.gamma0()?,
        "capacity_bits": spec.outage_capacity()?,
        "eta": spec.eta,
        "power": spec.power,
        "noise_var": spec.noise_var,
    }))?;
    Ok((Outputs::from([("summary.json".into(), summary.clone())]), summary))
}

fn outage_sweep(config: &Config, sweep: &Sweep) -> Result<(Outputs, String)> {
    let mut csv = format!("{},gamma0,capacity_bits\n", sweep.param.name());
    for v in sweep.values() {
        let mut fading = config.fading.clone();
        match sweep.param {
            SweepParam::Eta => fading.eta = v,
            SweepParam::Power => fading.power = v,
        }
        let spec = fading.build()?;
        writeln!(csv, "{v},{},{}", spec.gamma0()?, spec.outage_capacity()?)?;
    }
    Ok((Outputs::from([("sweep.csv".into(), csv.clone())]), csv))
}

fn capacity(config: &Config, oracle: bool) -> Result<(Outputs, String)> {
    let src = config.source()?;
    let budget = config.budget()?;
    let result = if oracle {
        let card_u = config.capacity.oracle_card_u.unwrap_or_else(|| default_card_u(src.x_size()));
        brute_force_cr_capacity(&src, budget, config.capacity.grid_steps, card_u)?
    } else {
        cr_capacity(&src, budget, &config.capacity.optimizer)?
    };
    let w = result.argmax.weights();
    let card_x = result.argmax.card_x();
    let rows: Vec<&[f64]> = w.chunks(card_x).collect();
    let summary = json_line(&json!({
        "solver": if oracle { "oracle" } else { "optimizer" },
        "cr_capacity_bits": result.value,
        "excess_bits": result.excess,
        "budget_bits": budget,
        "h_x_bits": src.entropy_x(),
        "h_x_given_y_bits": src.conditional_entropy_x_given_y(),
        "converse_ok": converse_bound_check(&result, &src, budget),
        "iterations": result.iterations,
        "argmax": rows,
    }))?;
    Ok((Outputs::from([("summary.json".into(), summary.clone())]), summary))
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    outage_fraction: f64,
    empirical_rate: f64,
    #[serde(rename = "N1")]
    n1: f64,
    #[serde(rename = "N2")]
    n2: f64,
    cardinality_bound_ok: bool,
    log2_n1: f64,
    log2_n2: f64,
    i_ux: f64,
    i_uy: f64,
    mean_error: f64,
    fallback_fraction: f64,
    trials: usize,
    mode: &'a outage_cr::protocol::SimulationMode,
}

fn simulate(config: &Config) -> Result<(Outputs, String)> {
    let src = config.source()?;
    let spec = config.fading.build()?;
    let aux = config.aux(&src)?;
    let stats: RunStats = Simulator::new(&config.protocol, &aux, &src, &spec)?.run()?;
    if !stats.cardinality_bound_ok {
        bail!("cardinality bound violated: log2|K| = {}", stats.sizes.log2_alphabet());
    }
    let mut csv = String::from("g_lo,g_hi,trials,errors,error_rate\n");
    for s in &stats.per_state {
        writeln!(csv, "{},{},{},{},{}", s.g_lo, s.g_hi, s.trials, s.errors, s.error_rate)?;
    }
    let summary = json_line(&SimulationSummary {
        outage_fraction: stats.outage_fraction,
        empirical_rate: stats.empirical_rate,
        n1: stats.sizes.n1,
        n2: stats.sizes.n2,
        cardinality_bound_ok: stats.cardinality_bound_ok,
        log2_n1: stats.sizes.log2_n1,
        log2_n2: stats.sizes.log2_n2,
        i_ux: stats.i_ux,
        i_uy: stats.i_uy,
        mean_error: stats.mean_error,
        fallback_fraction: stats.fallback_fraction,
        trials: stats.trials,
        mode: &stats.mode,
    })?;
    let console = format!("{csv}{summary}");
    Ok((
        Outputs::from([("states.csv".into(), csv), ("summary.json".into(), summary)]),
        console,
    ))
}
