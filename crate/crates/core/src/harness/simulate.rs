//! One seeded simulation: statistical CSI drawn once, fresh instantaneous CSI
//! every outer iteration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::beamforming::{InnerOracle, Utility, Wmmse};
use crate::channel::{
    direct_channel, effective_channel, AmplitudeMode, ChannelFn, ChannelModel, ChannelRealization, IrsLayout, IrsState,
    RealizationChannel,
};
use crate::error::{param, Result};
use crate::gradients::{gaussian_direction, probe_channel, wirtinger_factor};
use crate::zosga::{StepRules, Zosga};

/// Algorithm run by one ensemble.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// ZoSGA with the amplitude mode from the scenario.
    Zosga,
    ZosgaAa,
    ZosgaUa,
    /// Phases drawn once per simulation and held; WMMSE per realization.
    RandomIrs,
    /// Every IRS switched off; WMMSE on the direct links.
    NoIrs,
    /// Series read from a file: one comma-separated row per simulation.
    External(PathBuf),
}

impl Method {
    pub fn tag(&self) -> String {
        match self {
            Method::Zosga => "zosga".into(),
            Method::ZosgaAa => "zosga_aa".into(),
            Method::ZosgaUa => "zosga_ua".into(),
            Method::RandomIrs => "random_irs".into(),
            Method::NoIrs => "no_irs".into(),
            Method::External(p) => format!("external:{}", p.display()),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zosga" => Ok(Method::Zosga),
            "zosga_aa" => Ok(Method::ZosgaAa),
            "zosga_ua" => Ok(Method::ZosgaUa),
            "random_irs" => Ok(Method::RandomIrs),
            "no_irs" => Ok(Method::NoIrs),
            _ => match s.strip_prefix("external:") {
                Some(p) if !p.is_empty() => Ok(Method::External(PathBuf::from(p))),
                _ => Err(param(format!(
                    "unknown method `{s}` (expected zosga, zosga_aa, zosga_ua, random_irs, no_irs or external:<path>)"
                ))),
            },
        }
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of simulation `index` under `master`: SplitMix64 of
/// `master + (index + 1)·0x9E3779B97F4A7C15`. Simulation `i` keeps its seed
/// when more simulations are added.
pub fn sim_seed(master: u64, index: usize) -> u64 {
    splitmix64(master.wrapping_add((index as u64).wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Independent generator streams of one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Statistical CSI, then one realization per iteration.
    Channel = 0,
    /// Initial IRS phases.
    Init = 1,
    /// Output-index draw and probing directions.
    Optimizer = 2,
    /// Pilot run estimating schedule constants.
    Pilot = 3,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Per-iteration sumrates of one simulation plus bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutput {
    pub series: Vec<f64>,
    /// Fold of the per-iteration realization checksums.
    pub checksum: u64,
    pub outer_iterations: usize,
    pub channel_uses: usize,
    pub degenerate_steps: usize,
    /// ZoSGA only: randomly selected output iterate and its parameters.
    pub selected: Option<usize>,
    pub selected_theta: Option<Vec<f64>>,
    pub final_theta: Option<Vec<f64>>,
    /// ZoSGA only: largest `‖D‖_F` observed.
    pub max_factor_norm: Option<f64>,
}

fn fold_checksum(acc: u64, c: u64) -> u64 {
    (acc ^ c).wrapping_mul(0x0000_0100_0000_01B3).rotate_left(17)
}

fn oracle(scenario: &Scenario) -> Result<Wmmse<f64>> {
    let net = &scenario.network;
    Wmmse::new(net.power, Utility::new(net.weights.clone(), net.noise.clone())?, scenario.wmmse_iters)
}

/// Realizations of one simulation with a running checksum.
struct ChannelStream {
    model: ChannelModel<f64>,
    scsi: crate::channel::StatisticalCsi<f64>,
    rng: ChaCha8Rng,
    checksum: u64,
}

impl ChannelStream {
    fn new(scenario: &Scenario, seed: u64) -> Result<Self> {
        let model = ChannelModel::new(&scenario.network)?;
        let mut rng = stream_rng(seed, Stream::Channel);
        let scsi = model.draw_statistical_csi(&mut rng);
        Ok(Self { model, scsi, rng, checksum: 0 })
    }

    fn next(&mut self) -> Result<ChannelRealization<f64>> {
        let omega = self.model.sample_realization(&self.scsi, &mut self.rng)?;
        self.checksum = fold_checksum(self.checksum, omega.checksum());
        Ok(omega)
    }
}

/// Largest `‖D‖_F` and largest `‖H(θ+μu) − H(θ−μu)‖_F / (2μ‖u‖)` over
/// `draws` random parameter points and realizations.
pub fn estimate_constants(scenario: &Scenario, layout: &IrsLayout, seed: u64, draws: usize) -> Result<(f64, f64)> {
    let model = ChannelModel::<f64>::new(&scenario.network)?;
    let oracle = oracle(scenario)?;
    let mut rng = stream_rng(seed, Stream::Pilot);
    let scsi = model.draw_statistical_csi(&mut rng);
    let (lo, hi) = layout.bounds::<f64>();
    let mu = scenario.zosga.mu;
    let (mut b_f, mut l_h0) = (0.0f64, 0.0f64);
    for _ in 0..draws {
        let omega = model.sample_realization(&scsi, &mut rng)?;
        let theta: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| rand::Rng::random_range(&mut rng, *l..=*h)).collect();
        let channel = RealizationChannel { layout, omega: &omega };
        let h = channel.eval(&theta)?;
        let sol = oracle.solve(&h)?;
        b_f = b_f.max(wirtinger_factor(&sol.precoder, &h, oracle.utility())?.norm());
        let u: Vec<f64> = gaussian_direction(theta.len(), &mut rng);
        let unorm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if unorm > 0.0 {
            let probe = probe_channel(&theta, &u, mu, &channel)?;
            let dn = probe.delta.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            l_h0 = l_h0.max(dn / (2.0 * mu * unorm));
        }
    }
    Ok((b_f.max(f64::MIN_POSITIVE), l_h0.max(f64::MIN_POSITIVE)))
}

/// Runs one simulation of `method` on `scenario`. Every method consumes the
/// same channel stream for a given `seed`, so methods compared under equal
/// seeds see identical realizations.
pub fn run_simulation(scenario: &Scenario, method: &Method, seed: u64) -> Result<SimulationOutput> {
    let sizes = scenario.network.irs_sizes();
    let iters = scenario.iters;
    let mut channels = ChannelStream::new(scenario, seed)?;
    let oracle = oracle(scenario)?;
    let init = IrsState::<f64>::random_phases(&sizes, &mut stream_rng(seed, Stream::Init));

    let fixed = |state: Option<IrsState<f64>>, channels: &mut ChannelStream| -> Result<SimulationOutput> {
        let mut series = Vec::with_capacity(iters);
        let mut degenerate = 0;
        for _ in 0..iters {
            let omega = channels.next()?;
            let h = match &state {
                Some(state) => effective_channel(state, &omega)?,
                None => direct_channel(&omega),
            };
            let sol = oracle.solve(&h)?;
            degenerate += usize::from(sol.degenerate);
            series.push(sol.sumrate);
        }
        Ok(SimulationOutput {
            series,
            checksum: channels.checksum,
            outer_iterations: iters,
            channel_uses: iters,
            degenerate_steps: degenerate,
            selected: None,
            selected_theta: None,
            final_theta: None,
            max_factor_norm: None,
        })
    };

    let mode = match method {
        Method::RandomIrs => return fixed(Some(init), &mut channels),
        Method::NoIrs => return fixed(None, &mut channels),
        Method::External(p) => {
            return Err(param(format!(
                "external method `{}` is replayed by the ensemble runner, not simulated",
                p.display()
            )))
        }
        Method::Zosga => scenario.network.amplitude_mode,
        Method::ZosgaAa => AmplitudeMode::Adjustable,
        Method::ZosgaUa => AmplitudeMode::Unit,
    };

    let layout = scenario.network.layout_with(mode);
    let schedule = if scenario.needs_pilot() {
        let (b_f, l_h0) = estimate_constants(scenario, &layout, seed, 50)?;
        scenario.schedule_with(b_f, l_h0)
    } else {
        scenario.zosga.schedule
    };
    let mut rules = StepRules::new(&layout).with_phase_wrap(scenario.zosga.phase_wrap);
    if let Some(active) = &scenario.zosga.optimize {
        rules = rules.optimize_only(&layout, active)?;
    }
    let opt = Zosga::new(layout, scenario.zosga.mu, schedule)?
        .with_rules(rules)
        .with_thin(scenario.zosga.thin);
    let mut rng = stream_rng(seed, Stream::Optimizer);
    let traj = opt.run(init.flatten(mode), &oracle, |_| channels.next(), &mut rng, iters)?;
    Ok(SimulationOutput {
        checksum: channels.checksum,
        outer_iterations: iters,
        channel_uses: traj.channel_evaluations,
        degenerate_steps: traj.degenerate_steps,
        selected: Some(traj.selected),
        selected_theta: Some(traj.selected_theta),
        final_theta: Some(traj.final_theta),
        max_factor_norm: Some(traj.max_factor_norm),
        series: traj.sumrates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamforming::wmmse_precoder;
    use crate::harness::ScenarioSpec;

    fn small(extra: &str) -> Scenario {
        ScenarioSpec::parse(&format!("antennas = 2\nusers = 2\nirs.0.nh = 2\nirs.0.nv = 2\niters = 12\n{extra}"))
            .unwrap()
            .resolve()
            .unwrap()
    }

    #[test]
    fn method_tags_round_trip() {
        for tag in ["zosga", "zosga_aa", "zosga_ua", "random_irs", "no_irs", "external:/tmp/x.csv"] {
            assert_eq!(tag.parse::<Method>().unwrap().tag(), tag);
        }
        assert!(matches!("tts_ssco".parse::<Method>(), Err(crate::Error::Parameter(_))));
        assert!("external:".parse::<Method>().is_err());
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        let a: Vec<u64> = (0..1000).map(|i| sim_seed(7, i)).collect();
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), a.len());
        assert_eq!(sim_seed(7, 3), a[3]);
        assert_ne!(sim_seed(8, 0), sim_seed(7, 0));
    }

    #[test]
    fn methods_share_channel_draws() {
        let s = small("");
        let sums: Vec<u64> = [Method::ZosgaAa, Method::ZosgaUa, Method::RandomIrs, Method::NoIrs]
            .iter()
            .map(|m| run_simulation(&s, m, 99).unwrap().checksum)
            .collect();
        assert!(sums.iter().all(|c| *c == sums[0]));
        assert_ne!(run_simulation(&s, &Method::NoIrs, 100).unwrap().checksum, sums[0]);
    }

    #[test]
    fn no_irs_matches_direct_link_wmmse() {
        let s = small("");
        let out = run_simulation(&s, &Method::NoIrs, 5).unwrap();
        let mut channels = ChannelStream::new(&s, 5).unwrap();
        let net = &s.network;
        for value in &out.series {
            let omega = channels.next().unwrap();
            let sol = wmmse_precoder(&direct_channel(&omega), net.power, &net.noise, &net.weights, 20, None).unwrap();
            assert_eq!(*value, sol.sumrate);
        }
    }

    #[test]
    fn deterministic() {
        let s = small("");
        for m in [Method::ZosgaAa, Method::RandomIrs] {
            assert_eq!(run_simulation(&s, &m, 3).unwrap(), run_simulation(&s, &m, 3).unwrap());
        }
    }

    #[test]
    fn zosga_starts_where_random_irs_does() {
        let s = small("");
        let z = run_simulation(&s, &Method::ZosgaAa, 11).unwrap();
        let u = run_simulation(&s, &Method::ZosgaUa, 11).unwrap();
        let r = run_simulation(&s, &Method::RandomIrs, 11).unwrap();
        assert_eq!(z.series[0], r.series[0]);
        assert_eq!(u.series[0], r.series[0]);
        assert_eq!(z.channel_uses, 3 * 12);
        assert_eq!(r.channel_uses, 12);
        assert_eq!(z.final_theta.unwrap().len(), 8);
        assert_eq!(u.final_theta.unwrap().len(), 4);
    }

    #[test]
    fn pilot_fills_constants() {
        let s = small("zosga.schedule = constant\nzosga.b_f = auto\nzosga.l_h0 = auto\n");
        let layout = s.network.layout();
        let (b_f, l_h0) = estimate_constants(&s, &layout, 1, 20).unwrap();
        assert!(b_f > 0.0 && l_h0 > 0.0);
        let out = run_simulation(&s, &Method::Zosga, 1).unwrap();
        assert_eq!(out.series.len(), 12);
    }

    #[test]
    fn external_is_not_simulated() {
        let s = small("");
        assert!(run_simulation(&s, &Method::External("x".into()), 1).is_err());
    }
}
