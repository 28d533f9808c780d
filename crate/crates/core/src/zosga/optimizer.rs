//! Projected zeroth-order stochastic gradient ascent over the IRS parameters.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::schedule::{step_size, ScheduleParams, StepSizes};
use crate::beamforming::InnerOracle;
use crate::channel::{Block, ChannelFn, ChannelRealization, IrsLayout, RealizationChannel};
use crate::error::{dim, param, Result};
use crate::gradients::{gaussian_direction, probe_channel, quasi_gradient, wirtinger_factor};
use crate::scalar::Real;

/// Coordinatewise clamp of `theta` into `[lo, hi]`.
pub fn project_box<T: Real>(theta: &[T], lo: &[T], hi: &[T]) -> Vec<T> {
    theta
        .iter()
        .zip(lo.iter().zip(hi))
        .map(|(x, (l, h))| x.max(*l).min(*h))
        .collect()
}

/// Maps an angle onto `[−π, π)`.
pub fn wrap_phase<T: Real>(x: T) -> T {
    let two_pi = T::PI() + T::PI();
    let y = (x + T::PI()) % two_pi;
    let y = if y < T::zero() { y + two_pi } else { y };
    y - T::PI()
}

/// Per-coordinate treatment applied by a single step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRules {
    blocks: Vec<Block>,
    frozen: Vec<bool>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    pub phase_wrap: bool,
}

impl StepRules {
    /// Every coordinate free, phases clamped.
    pub fn new(layout: &IrsLayout) -> Self {
        let (lo, hi) = layout.bounds::<f64>();
        Self {
            blocks: layout.coordinates().into_iter().map(|(_, b)| b).collect(),
            frozen: vec![false; layout.dimension()],
            lo,
            hi,
            phase_wrap: false,
        }
    }

    /// Freezes every coordinate belonging to an IRS not listed in `active`.
    pub fn optimize_only(mut self, layout: &IrsLayout, active: &[usize]) -> Result<Self> {
        if let Some(bad) = active.iter().find(|&&i| i >= layout.num_irs()) {
            return Err(param(format!("IRS index {bad} out of range ({} panels)", layout.num_irs())));
        }
        self.frozen = layout.coordinates().into_iter().map(|(i, _)| !active.contains(&i)).collect();
        Ok(self)
    }

    pub fn with_phase_wrap(mut self, wrap: bool) -> Self {
        self.phase_wrap = wrap;
        self
    }

    pub fn dimension(&self) -> usize {
        self.blocks.len()
    }

    pub fn frozen(&self) -> &[bool] {
        &self.frozen
    }

    fn apply<T: Real>(&self, theta: &[T], gradient: &[T], steps: StepSizes<T>) -> Vec<T> {
        let raw: Vec<T> = theta
            .iter()
            .zip(gradient)
            .enumerate()
            .map(|(s, (x, g))| {
                if self.frozen[s] {
                    return *x;
                }
                let eta = match self.blocks[s] {
                    Block::Phase => steps.phase,
                    Block::Amplitude => steps.amplitude,
                };
                *x + eta * *g
            })
            .collect();
        raw.into_iter()
            .enumerate()
            .map(|(s, x)| {
                if self.phase_wrap && self.blocks[s] == Block::Phase {
                    wrap_phase(x)
                } else {
                    x.max(T::of(self.lo[s])).min(T::of(self.hi[s]))
                }
            })
            .collect()
    }
}

/// What one outer iteration produced.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<T> {
    pub theta: Vec<T>,
    /// Sumrate of the inner solution at the pre-step point.
    pub sumrate: T,
    pub gradient: Vec<T>,
    /// `‖D‖_F` at the inner solution.
    pub factor_norm: T,
    pub degenerate: bool,
}

/// One iteration: solve the inner problem at `H(θ)`, probe the channel at
/// `θ ± μu`, and take a projected ascent step along the quasi-gradient.
/// Frozen coordinates of `u` are zeroed before probing.
pub fn zosga_step<T, O, C>(
    theta: &[T],
    u: &[T],
    mu: T,
    steps: StepSizes<T>,
    rules: &StepRules,
    oracle: &O,
    channel: &C,
) -> Result<StepOutcome<T>>
where
    T: Real,
    O: InnerOracle<T> + ?Sized,
    C: ChannelFn<T> + ?Sized,
{
    if theta.len() != rules.dimension() || u.len() != theta.len() {
        return Err(dim(format!(
            "theta/direction lengths {}/{} vs layout dimension {}",
            theta.len(),
            u.len(),
            rules.dimension()
        )));
    }
    let h = channel.eval(theta)?;
    let inner = oracle.solve(&h)?;
    let factor = wirtinger_factor(&inner.precoder, &h, oracle.utility())?;
    let masked: Vec<T> = u
        .iter()
        .zip(&rules.frozen)
        .map(|(x, f)| if *f { T::zero() } else { *x })
        .collect();
    let probe = probe_channel(theta, &masked, mu, channel)?;
    let gradient = quasi_gradient(&probe, &factor)?;
    Ok(StepOutcome {
        theta: rules.apply(theta, &gradient, steps),
        sumrate: inner.sumrate,
        factor_norm: factor.norm(),
        gradient,
        degenerate: inner.degenerate,
    })
}

/// Samples `t*` with `P(t* = t) ∝ steps[t]`.
pub fn select_iterate<T: Real, R: Rng + ?Sized>(steps: &[T], rng: &mut R) -> Result<usize> {
    let weights: Vec<f64> = steps.iter().map(|s| s.to_f64_lossy()).collect();
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(param("step weights must be finite and nonnegative"));
    }
    let dist = WeightedIndex::new(&weights).map_err(|e| param(format!("cannot sample iterate: {e}")))?;
    Ok(dist.sample(rng))
}

/// Record of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    /// `(t, θ^t)` every `thin` iterations plus the last iterate.
    pub iterates: Vec<(usize, Vec<T>)>,
    /// `F(W*, H(θ^t, ω^{t+1}))` for every iteration.
    pub sumrates: Vec<T>,
    pub steps: Vec<StepSizes<T>>,
    /// Randomly selected output index `t*`.
    pub selected: usize,
    pub selected_theta: Vec<T>,
    pub final_theta: Vec<T>,
    pub degenerate_steps: usize,
    /// Largest `‖D‖_F` seen: an empirical `B_F`.
    pub max_factor_norm: T,
    pub channel_evaluations: usize,
}

/// The outer optimizer.
#[derive(Debug, Clone)]
pub struct Zosga<T> {
    pub layout: IrsLayout,
    pub mu: T,
    pub schedule: ScheduleParams<T>,
    pub rules: StepRules,
    /// Keep every `thin`-th iterate in the trajectory.
    pub thin: usize,
}

impl<T: Real> Zosga<T> {
    pub fn new(layout: IrsLayout, mu: T, schedule: ScheduleParams<T>) -> Result<Self> {
        if !(mu > T::zero()) {
            return Err(param("smoothing parameter must be positive"));
        }
        schedule.validate()?;
        let rules = StepRules::new(&layout);
        Ok(Self { layout, mu, schedule, rules, thin: 100 })
    }

    pub fn with_rules(mut self, rules: StepRules) -> Self {
        self.rules = rules;
        self
    }

    pub fn with_thin(mut self, thin: usize) -> Self {
        self.thin = thin.max(1);
        self
    }

    /// Step sizes for iterations `0..iters`.
    pub fn step_schedule(&self, iters: usize) -> Result<Vec<StepSizes<T>>> {
        let schedule = self.schedule.with_default_horizon(iters.saturating_sub(1));
        let s = self.layout.dimension();
        (0..iters).map(|t| step_size(t, &schedule, s)).collect()
    }

    /// Runs `iters` iterations from `theta0`. `sample` yields the realization
    /// `ω^{t+1}` for iteration `t`; `rng` drives the output-index draw and
    /// the probing directions.
    pub fn run<O, S, R>(&self, theta0: Vec<T>, oracle: &O, mut sample: S, rng: &mut R, iters: usize) -> Result<Trajectory<T>>
    where
        O: InnerOracle<T> + ?Sized,
        S: FnMut(usize) -> Result<ChannelRealization<T>>,
        R: Rng + ?Sized,
    {
        if iters == 0 {
            return Err(param("need at least one iteration"));
        }
        let s = self.layout.dimension();
        if theta0.len() != s {
            return Err(dim(format!("initial theta has {} entries, layout {s}", theta0.len())));
        }
        let steps = self.step_schedule(iters)?;
        let phase_steps: Vec<T> = steps.iter().map(|st| st.phase).collect();
        let selected = select_iterate(&phase_steps, rng)?;

        let mut theta = theta0;
        let mut traj = Trajectory {
            iterates: Vec::new(),
            sumrates: Vec::with_capacity(iters),
            steps: steps.clone(),
            selected,
            selected_theta: Vec::new(),
            final_theta: Vec::new(),
            degenerate_steps: 0,
            max_factor_norm: T::zero(),
            channel_evaluations: 0,
        };
        for (t, st) in steps.iter().enumerate() {
            if t % self.thin == 0 {
                traj.iterates.push((t, theta.clone()));
            }
            if t == selected {
                traj.selected_theta = theta.clone();
            }
            let omega = sample(t)?;
            let u: Vec<T> = gaussian_direction(s, rng);
            let channel = RealizationChannel { layout: &self.layout, omega: &omega };
            let out = zosga_step(&theta, &u, self.mu, *st, &self.rules, oracle, &channel)?;
            traj.channel_evaluations += 3;
            traj.sumrates.push(out.sumrate);
            traj.max_factor_norm = traj.max_factor_norm.max(out.factor_norm);
            if out.degenerate {
                traj.degenerate_steps += 1;
            }
            theta = out.theta;
        }
        traj.iterates.push((iters, theta.clone()));
        traj.final_theta = theta;
        Ok(traj)
    }
}
