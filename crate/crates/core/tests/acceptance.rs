//! Acceptance suite. Each test prints one `PASS`/`FAIL` line for its
//! criterion to stderr, bypassing the harness capture, then asserts.
//!
//! Run with `cargo test --release -p outage-cr --test acceptance`.

use std::io::Write;
use std::time::{Duration, Instant};

use outage_cr::crcap::default_card_u;
use outage_cr::protocol::{Codeword, CodebookSet, GainStates, ProtocolConfig, Simulator};
use outage_cr::{
    brute_force_cr_capacity, converse_bound_check, cr_capacity, AuxChannel, CapacityResult, FadingSpec,
    GainDistribution, JointSource, OptimizerOptions, TypicalityParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Tolerance between the optimizer and the grid oracle, in bits.
const ORACLE_TOL: f64 = 5e-3;
/// Oracle levels per coordinate for the equivalence check.
const ORACLE_GRID: usize = 201;
const MONOTONE_TOL: f64 = 1e-6;

fn report(criterion: u32, title: &str, failures: &[String], elapsed: Duration, limit: Duration) {
    let mut failures = failures.to_vec();
    if elapsed > limit {
        failures.push(format!("took {elapsed:.2?}, limit {limit:.0?}"));
    }
    let verdict = if failures.is_empty() { "PASS" } else { "FAIL" };
    let line = format!("criterion {criterion} ({title}): {verdict} in {elapsed:.2?}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    for f in failures.iter().take(10) {
        let _ = std::io::stderr().write_all(format!("    {f}\n").as_bytes());
    }
    assert!(failures.is_empty(), "criterion {criterion} failed: {failures:?}");
}

fn random_source(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> JointSource {
    let w: Vec<f64> = (0..nx * ny).map(|_| rng.random::<f64>() + 1e-3).collect();
    JointSource::normalized(w, nx, ny).unwrap()
}

fn rayleigh_spec(power: f64, eta: f64) -> FadingSpec {
    FadingSpec::new(GainDistribution::rayleigh_unit_power(), power, 1.0, eta).unwrap()
}

fn converse(r: &CapacityResult, src: &JointSource, budget: f64, what: &str, failures: &mut Vec<String>) {
    if !converse_bound_check(r, src, budget) {
        failures.push(format!("{what}: converse check failed (value {}, excess {})", r.value, r.excess));
    }
}

#[test]
fn criterion_1_rayleigh_quantile() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let rayleigh = GainDistribution::rayleigh_unit_power();
    let samples = rayleigh.sample(1_000_000, 17).unwrap();
    let empirical = GainDistribution::empirical(samples).unwrap();
    for eta in [0.01, 0.1, 0.5] {
        let exact = (-(1.0f64 - eta).ln()).sqrt();
        let g = rayleigh.gamma0(eta).unwrap();
        if (g - exact).abs() > 1e-9 {
            failures.push(format!("eta {eta}: gamma0 {g} vs {exact}"));
        }
        let ge = empirical.gamma0(eta).unwrap();
        if (ge - exact).abs() > 5e-3 {
            failures.push(format!("eta {eta}: empirical gamma0 {ge} vs {exact}"));
        }
        for (power, noise_var) in [(1.0, 1.0), (10.0, 1.0), (3.0, 0.5)] {
            let spec = FadingSpec::new(rayleigh.clone(), power, noise_var, eta).unwrap();
            let direct = (1.0 + power * g * g / noise_var).log2();
            let c = spec.outage_capacity().unwrap();
            if (c - direct).abs() > 1e-12 {
                failures.push(format!("eta {eta} P {power}: capacity {c} vs {direct}"));
            }
        }
    }
    report(1, "Rayleigh quantile and outage capacity", &failures, start.elapsed(), Duration::from_secs(5));
}

#[test]
fn criterion_2_step_cdf_quantile() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for model in 0..50 {
        let m = rng.random_range(1..400);
        // a coarse grid forces repeated atoms
        let levels = rng.random_range(1..60) as f64;
        let samples: Vec<f64> = (0..m).map(|_| (rng.random::<f64>() * levels).floor() / levels * 3.0).collect();
        let dist = GainDistribution::empirical(samples).unwrap();
        for k in 0..20 {
            let eta = k as f64 * 0.05;
            let g = dist.gamma0(eta).unwrap();
            let below = dist.cdf_below(g);
            let above = dist.cdf_below(g + 1e-6);
            if !(below <= eta && above > eta) {
                failures.push(format!("model {model} eta {eta}: F({g}) = {below}, F(+1e-6) = {above}"));
            }
        }
    }
    report(2, "step-CDF quantile contract", &failures, start.elapsed(), Duration::from_secs(5));
}

#[test]
fn criterion_3_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sources: Vec<JointSource> = (0..120)
        .map(|i| random_source(&mut rng, 2, if i < 100 { 2 } else { 3 }))
        .collect();
    let opts = OptimizerOptions {
        parallel: false,
        ..OptimizerOptions::default()
    };
    let card_u = default_card_u(2);
    let per_source: Vec<(Vec<String>, f64)> = sources
        .par_iter()
        .enumerate()
        .map(|(i, src)| {
            let mut failures = Vec::new();
            let mut worst: f64 = 0.0;
            for c in [0.0, 0.1, 0.25, 0.5, src.conditional_entropy_x_given_y(), 1.5] {
                let main = cr_capacity(src, c, &opts).unwrap();
                let oracle = brute_force_cr_capacity(src, c, ORACLE_GRID, card_u).unwrap();
                let gap = main.value - oracle.value;
                worst = worst.max(gap.abs());
                if gap.abs() > ORACLE_TOL {
                    failures.push(format!("source {i} C {c:.4}: main {} oracle {}", main.value, oracle.value));
                }
                converse(&main, src, c, "main", &mut failures);
                converse(&oracle, src, c, "oracle", &mut failures);
            }
            (failures, worst)
        })
        .collect();
    let worst = per_source.iter().map(|p| p.1).fold(0.0, f64::max);
    let failures: Vec<String> = per_source.into_iter().flat_map(|p| p.0).collect();
    let _ = std::io::stderr().write_all(format!("    worst |main - oracle| = {worst:.3e}\n").as_bytes());
    report(3, "optimizer matches the grid oracle", &failures, start.elapsed(), Duration::from_secs(600));
}

#[test]
fn criterion_4_endpoints() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let opts = OptimizerOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..50 {
        let (nx, ny) = (rng.random_range(2..5), rng.random_range(2..5));
        let src = random_source(&mut rng, nx, ny);
        let h_x = src.entropy_x();
        let h_cond = src.conditional_entropy_x_given_y();
        for c in [h_cond, h_cond + 0.3] {
            let r = cr_capacity(&src, c, &opts).unwrap();
            if (r.value - h_x).abs() > 1e-6 {
                failures.push(format!("source {i} ({nx}x{ny}) C {c}: {} vs H(X) {h_x}", r.value));
            }
            converse(&r, &src, c, "saturated", &mut failures);
        }
    }
    for p in [0.1, 0.2, 0.3] {
        let src: JointSource = JointSource::dsbs(p).unwrap();
        let main = cr_capacity(&src, 0.0, &opts).unwrap();
        let oracle = brute_force_cr_capacity(&src, 0.0, 21, default_card_u(2)).unwrap();
        if main.value > 2e-2 || oracle.value > 2e-2 || (main.value - oracle.value).abs() > ORACLE_TOL {
            failures.push(format!("DSBS({p}) C 0: main {} oracle {}", main.value, oracle.value));
        }
    }
    report(4, "endpoint identities", &failures, start.elapsed(), Duration::from_secs(120));
}

fn check_nondecreasing(values: &[f64], what: &str, failures: &mut Vec<String>) {
    for (i, w) in values.windows(2).enumerate() {
        if w[1] < w[0] - MONOTONE_TOL {
            failures.push(format!("{what}: step {i} drops from {} to {}", w[0], w[1]));
        }
    }
}

#[test]
fn criterion_5_monotonicity() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let gains = [
        ("rayleigh", GainDistribution::rayleigh_unit_power()),
        ("empirical", GainDistribution::empirical((0..500).map(|_| rng.random::<f64>() * 2.0).collect()).unwrap()),
        ("constant", GainDistribution::constant(0.7).unwrap()),
    ];
    for (name, gain) in &gains {
        let by_eta: Vec<f64> = (0..20)
            .map(|k| FadingSpec::new(gain.clone(), 10.0, 1.0, k as f64 * 0.05).unwrap().outage_capacity().unwrap())
            .collect();
        check_nondecreasing(&by_eta, &format!("{name} capacity in eta"), &mut failures);
        let by_power: Vec<f64> = (0..20)
            .map(|k| FadingSpec::new(gain.clone(), 0.25 * 1.5f64.powi(k), 1.0, 0.1).unwrap().outage_capacity().unwrap())
            .collect();
        check_nondecreasing(&by_power, &format!("{name} capacity in P"), &mut failures);
    }
    let opts = OptimizerOptions::default();
    for i in 0..20 {
        let (nx, ny) = (rng.random_range(2..4), rng.random_range(2..4));
        let src = random_source(&mut rng, nx, ny);
        let top = 1.1 * src.conditional_entropy_x_given_y();
        let values: Vec<f64> = (0..10)
            .map(|k| {
                let c = top * k as f64 / 9.0;
                let r = cr_capacity(&src, c, &opts).unwrap();
                converse(&r, &src, c, "budget grid", &mut failures);
                r.value
            })
            .collect();
        check_nondecreasing(&values, &format!("source {i} ({nx}x{ny}) in C"), &mut failures);
    }
    report(5, "monotonicity", &failures, start.elapsed(), Duration::from_secs(120));
}

/// `U = X = Y` at `n = 4`: all six words of type (2, 2), two per bin.
fn planted_codebook() -> (CodebookSet, AuxChannel, JointSource) {
    let src = JointSource::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
    let aux = AuxChannel::identity(2, 2).unwrap();
    let words = [[0, 0, 1, 1], [0, 1, 0, 1], [0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 1, 0], [1, 1, 0, 0]];
    let bins = words.chunks(2).map(|b| b.iter().map(|w| w.to_vec()).collect()).collect();
    let book = CodebookSet::from_words(bins, vec![0; 4], &aux, &src).unwrap();
    (book, aux, src)
}

#[test]
fn criterion_6_protocol_fixtures() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let eps = TypicalityParams::new(0.1).unwrap();

    let (book, aux, src) = planted_codebook();
    let strong = FadingSpec::new(GainDistribution::constant(10.0).unwrap(), 1.0, 1.0, 0.1).unwrap();
    let config = ProtocolConfig {
        n: 4,
        epsilon: Some(0.1),
        trials: 1000,
        seed: 6,
        gain_states: GainStates::List(vec![10.0]),
        ..ProtocolConfig::default()
    };
    let sim = Simulator::with_codebook(&config, book.clone(), &aux, &src, &strong).unwrap();
    let disagreements = (0..config.trials).filter(|&t| !sim.trial(t).unwrap().agreed).count();
    if disagreements != 0 {
        failures.push(format!("noiseless fixture: {disagreements} disagreements"));
    }
    let stats = sim.run().unwrap();
    if stats.errors != 0 || stats.outage_fraction != 0.0 || !stats.cardinality_bound_ok {
        failures.push(format!("noiseless fixture stats: {stats:?}"));
    }

    // both words of the bin are jointly typical with y for an independent pair
    let indep = JointSource::independent(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
    let two = vec![vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1]]];
    let ambiguous = CodebookSet::from_words(two, vec![0; 4], &aux, &indep).unwrap();
    let l = ambiguous.decode(&[0, 1, 1, 0], 1, TypicalityParams::new(0.25).unwrap()).unwrap();
    if l != Codeword::Fallback || ambiguous.sequence(l) != [0, 0, 0, 0] {
        failures.push(format!("ambiguous bin decoded to {l:?}"));
    }

    let (k, bin) = book.encode(&[0, 0, 0, 0], eps).unwrap();
    if k != Codeword::Fallback || bin != book.n1() + 1 || book.sequence(k) != book.u0() {
        failures.push(format!("fallback fixture encoded to ({k:?}, {bin})"));
    }
    let l = book.decode(&[1, 1, 1, 1], book.fallback_bin(), eps).unwrap();
    if l != Codeword::Fallback {
        failures.push(format!("fallback bin decoded to {l:?}"));
    }
    report(6, "protocol fixtures", &failures, start.elapsed(), Duration::from_secs(1));
}

/// DSBS(0.2) over unit-power Rayleigh fading at SNR 10 with `η = 0.1`; the
/// test channel is the optimizer's maximizer at 80% of `C_η`.
fn scenario() -> (JointSource, FadingSpec, AuxChannel) {
    let src = JointSource::dsbs(0.2).unwrap();
    let spec = rayleigh_spec(10.0, 0.1);
    let budget = 0.8 * spec.outage_capacity().unwrap();
    let result = cr_capacity(&src, budget, &OptimizerOptions::default()).unwrap();
    assert!(converse_bound_check(&result, &src, budget));
    (src, spec, result.argmax)
}

const SCENARIO_SEED: u64 = 2024;

#[test]
fn criterion_7_end_to_end() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let (src, spec, aux) = scenario();
    let config = ProtocolConfig {
        seed: SCENARIO_SEED,
        ..ProtocolConfig::default()
    };
    let stats = Simulator::new(&config, &aux, &src, &spec).unwrap().run().unwrap();
    if stats.outage_fraction > spec.eta + 0.05 {
        failures.push(format!("outage fraction {} > {}", stats.outage_fraction, spec.eta + 0.05));
    }
    let (lo, hi) = (stats.i_ux, stats.i_ux + 5.0 * config.delta);
    if !(stats.empirical_rate >= lo && stats.empirical_rate <= hi) {
        failures.push(format!("empirical rate {} outside [{lo}, {hi}]", stats.empirical_rate));
    }
    if !stats.cardinality_bound_ok {
        failures.push("cardinality bound".into());
    }

    let mean_error = |n: usize| {
        let total: f64 = (0..10)
            .map(|s| {
                let c = ProtocolConfig {
                    n,
                    seed: SCENARIO_SEED + s,
                    ..ProtocolConfig::default()
                };
                Simulator::new(&c, &aux, &src, &spec).unwrap().run().unwrap().mean_error
            })
            .sum();
        total / 10.0
    };
    let (e100, e400) = (mean_error(100), mean_error(400));
    if e400 > e100 {
        failures.push(format!("mean error grows with n: {e100} at 100, {e400} at 400"));
    }
    let summary = format!(
        "    outage {} rate {:.4} in [{lo:.4}, {hi:.4}], mean error n=100 {e100:.4} n=400 {e400:.4}, fallbacks {:.3}\n",
        stats.outage_fraction, stats.empirical_rate, stats.fallback_fraction
    );
    let _ = std::io::stderr().write_all(summary.as_bytes());
    report(7, "end-to-end Monte Carlo", &failures, start.elapsed(), Duration::from_secs(300));
}

#[test]
fn criterion_8_cardinality_and_converse() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let opts = OptimizerOptions::default();
    for i in 0..30 {
        let (nx, ny) = (rng.random_range(2..4), rng.random_range(2..4));
        let src = random_source(&mut rng, nx, ny);
        let c = rng.random::<f64>() * 1.2 * src.conditional_entropy_x_given_y();
        let main = cr_capacity(&src, c, &opts).unwrap();
        converse(&main, &src, c, &format!("source {i} main"), &mut failures);
        let oracle = brute_force_cr_capacity(&src, c, 13, default_card_u(nx)).unwrap();
        converse(&oracle, &src, c, &format!("source {i} oracle"), &mut failures);

        let spec = rayleigh_spec(1.0 + 20.0 * rng.random::<f64>(), 0.1);
        for n in [20, 60, 100] {
            let config = ProtocolConfig {
                n,
                trials: 50,
                seed: i,
                ..ProtocolConfig::default()
            };
            match Simulator::new(&config, &main.argmax, &src, &spec).and_then(|s| s.run()) {
                Ok(stats) if stats.cardinality_bound_ok => {}
                Ok(stats) => failures.push(format!("source {i} n {n}: cardinality bound, log2|K| {}", stats.sizes.log2_alphabet())),
                Err(e) => failures.push(format!("source {i} n {n}: {e}")),
            }
        }
    }
    report(8, "cardinality and converse guards", &failures, start.elapsed(), Duration::from_secs(300));
}
