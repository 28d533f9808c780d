//! Seeded ensembles, parameter sweeps and their aggregate records.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{Scenario, ScenarioSpec};
use super::simulate::{run_simulation, sim_seed, Method, SimulationOutput};
use super::stats::{sample_std, tail_mean};
use crate::error::{param, Error, Result};

/// Value assigned to a group of coupled keys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub keys: Vec<String>,
    pub value: String,
}

/// Aggregate of one ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario_hash: String,
    pub method: String,
    pub master_seed: u64,
    pub n_sims: usize,
    pub iters: usize,
    /// Per-iteration mean over simulations, summed in simulation order.
    pub mean_sumrate: Vec<f64>,
    /// Per-iteration sample standard deviation.
    pub std_sumrate: Vec<f64>,
    /// Per-simulation mean over the trailing `final.tail` fraction.
    pub final_sumrates: Vec<f64>,
    pub series: Vec<Vec<f64>>,
    pub seeds: Vec<u64>,
    /// Per-simulation realization checksums; equal across methods run on
    /// the same scenario and seeds.
    pub checksums: Vec<u64>,
    pub outer_iterations: usize,
    /// Per-simulation channel evaluations.
    pub channel_uses: Vec<usize>,
    pub degenerate_steps: usize,
    pub wall_clock_secs: f64,
    pub config: BTreeMap<String, String>,
    pub sweep: Option<SweepPoint>,
}

impl RunRecord {
    pub fn mean_final(&self) -> f64 {
        super::stats::mean(&self.final_sumrates)
    }

    /// Equality ignoring wall-clock time.
    pub fn same_results(&self, other: &Self) -> bool {
        let mut a = self.clone();
        a.wall_clock_secs = other.wall_clock_secs;
        a == *other
    }
}

/// Per-iteration mean and sample std over `series`, reduced in index order.
pub fn aggregate(series: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let len = series.first().map_or(0, Vec::len);
    if series.iter().any(|s| s.len() != len) {
        return Err(param("simulation series differ in length"));
    }
    let mut mean = Vec::with_capacity(len);
    let mut std = Vec::with_capacity(len);
    let mut column = Vec::with_capacity(series.len());
    for t in 0..len {
        column.clear();
        column.extend(series.iter().map(|s| s[t]));
        mean.push(super::stats::mean(&column));
        std.push(sample_std(&column));
    }
    Ok((mean, std))
}

/// Reads externally produced series: one comma-separated row per simulation.
pub fn read_external_series(path: &Path, n_sims: usize, iters: usize) -> Result<Vec<Vec<f64>>> {
    let bad = |msg: String| Error::Format { path: path.to_path_buf(), msg };
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .enumerate()
        .map(|(i, l)| {
            l.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| bad(format!("row {i}: bad number `{}`", x.trim()))))
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.len() < n_sims {
        return Err(bad(format!("{} rows for {n_sims} simulations", rows.len())));
    }
    if let Some((i, r)) = rows.iter().enumerate().take(n_sims).find(|(_, r)| r.len() != iters) {
        return Err(bad(format!("row {i} has {} values, expected {iters}", r.len())));
    }
    Ok(rows.into_iter().take(n_sims).collect())
}

fn record(
    scenario: &Scenario,
    method: &Method,
    master_seed: u64,
    outputs: Vec<SimulationOutput>,
    seeds: Vec<u64>,
    started: Instant,
) -> Result<RunRecord> {
    let series: Vec<Vec<f64>> = outputs.iter().map(|o| o.series.clone()).collect();
    let (mean_sumrate, std_sumrate) = aggregate(&series)?;
    Ok(RunRecord {
        scenario_hash: scenario.hash(),
        method: method.tag(),
        master_seed,
        n_sims: outputs.len(),
        iters: scenario.iters,
        mean_sumrate,
        std_sumrate,
        final_sumrates: series.iter().map(|s| tail_mean(s, scenario.tail_fraction)).collect(),
        seeds,
        checksums: outputs.iter().map(|o| o.checksum).collect(),
        outer_iterations: scenario.iters,
        channel_uses: outputs.iter().map(|o| o.channel_uses).collect(),
        degenerate_steps: outputs.iter().map(|o| o.degenerate_steps).sum(),
        wall_clock_secs: started.elapsed().as_secs_f64(),
        config: scenario.canonical().clone(),
        sweep: None,
        series,
    })
}

/// Runs `n_sims` simulations in parallel on the current rayon pool with
/// seeds [`sim_seed`]`(master_seed, i)`. The record does not depend on the
/// number of workers.
pub fn run_ensemble(scenario: &Scenario, method: &Method, master_seed: u64, n_sims: usize) -> Result<RunRecord> {
    if n_sims == 0 {
        return Err(param("an ensemble needs at least one simulation"));
    }
    let started = Instant::now();
    let seeds: Vec<u64> = (0..n_sims).map(|i| sim_seed(master_seed, i)).collect();
    let outputs: Vec<SimulationOutput> = match method {
        Method::External(path) => read_external_series(path, n_sims, scenario.iters)?
            .into_iter()
            .map(|series| SimulationOutput {
                series,
                checksum: 0,
                outer_iterations: scenario.iters,
                channel_uses: 0,
                degenerate_steps: 0,
                selected: None,
                selected_theta: None,
                final_theta: None,
                max_factor_norm: None,
            })
            .collect(),
        _ => seeds
            .par_iter()
            .map(|&seed| run_simulation(scenario, method, seed))
            .collect::<Result<_>>()?,
    };
    record(scenario, method, master_seed, outputs, seeds, started)
}

/// Coupled keys swept over a list of values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSpec {
    keys: Vec<String>,
    values: Vec<String>,
    n_sims: usize,
}

impl SweepSpec {
    pub fn new(keys: Vec<String>, values: Vec<String>, n_sims: usize) -> Result<Self> {
        if keys.is_empty() || keys.iter().any(|k| k.trim().is_empty()) {
            return Err(param("sweep needs at least one non-empty key"));
        }
        if values.is_empty() {
            return Err(param("sweep needs at least one value"));
        }
        if n_sims == 0 {
            return Err(param("sweep points need at least one simulation"));
        }
        Ok(Self { keys, values, n_sims })
    }

    /// `"a,b"` couples keys `a` and `b`.
    pub fn parse_keys(s: &str) -> Vec<String> {
        s.split(',').map(|k| k.trim().to_string()).filter(|k| !k.is_empty()).collect()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn n_sims(&self) -> usize {
        self.n_sims
    }
}

/// One ensemble per (value, method), value-major. Every point and method
/// uses the same master seed, so all records share simulation seeds.
pub fn run_sweep(spec: &ScenarioSpec, sweep: &SweepSpec, methods: &[Method], master_seed: u64) -> Result<Vec<RunRecord>> {
    if methods.is_empty() {
        return Err(param("sweep needs at least one method"));
    }
    let mut out = Vec::with_capacity(sweep.values.len() * methods.len());
    for value in &sweep.values {
        let scenario = spec.with(&sweep.keys, value).resolve()?;
        for m in methods {
            let mut r = run_ensemble(&scenario, m, master_seed, sweep.n_sims)?;
            r.sweep = Some(SweepPoint { keys: sweep.keys.clone(), value: value.clone() });
            out.push(r);
        }
    }
    Ok(out)
}
