//! Step-size schedules and the stationarity-bound diagnostic.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::scalar::Real;

/// Problem constants entering the constant step size and the bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremConstants<T> {
    /// Initial optimality-gap bound `Δ_φ`.
    pub delta_phi: T,
    /// Weak-convexity modulus `ρ`.
    pub rho: T,
    /// Bound `B_F` on `‖D‖_F`.
    pub b_f: T,
    /// Channel Lipschitz constant `L_{h,0}`.
    pub l_h0: T,
    /// Channel-gradient Lipschitz constant `L_{h,1}`.
    pub l_h1: T,
    /// Diameter `Δ_K` of the feasible box.
    pub delta_k: T,
}

impl<T: Real> Default for TheoremConstants<T> {
    fn default() -> Self {
        let one = T::one();
        Self { delta_phi: one, rho: one, b_f: one, l_h0: one, l_h1: one, delta_k: one }
    }
}

impl<T: Real> TheoremConstants<T> {
    fn validate(&self) -> Result<()> {
        let all = [self.delta_phi, self.rho, self.b_f, self.l_h0, self.l_h1, self.delta_k];
        if all.iter().any(|c| !(*c > T::zero()) || !c.is_finite()) {
            return Err(param("schedule constants must be positive and finite"));
        }
        Ok(())
    }
}

/// `η⁰ · γ^min(t, cutoff)` per block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySchedule<T> {
    pub eta_phase: T,
    pub eta_amplitude: T,
    pub gamma: T,
    pub cutoff: usize,
}

impl<T: Real> Default for DecaySchedule<T> {
    fn default() -> Self {
        Self { eta_phase: T::of(0.4), eta_amplitude: T::of(0.01), gamma: T::of(0.9972), cutoff: 1000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ScheduleParams<T> {
    /// Equal constant steps for both blocks, sized from the problem constants
    /// and the horizon `T`.
    ConstantTheorem { constants: TheoremConstants<T>, horizon: Option<usize> },
    /// Separate geometric decays for phases and amplitudes, frozen after the cutoff.
    GeometricDecay(DecaySchedule<T>),
}

impl<T: Real> Default for ScheduleParams<T> {
    fn default() -> Self {
        ScheduleParams::GeometricDecay(DecaySchedule::default())
    }
}

/// Step sizes for the phase and amplitude coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSizes<T> {
    pub phase: T,
    pub amplitude: T,
}

impl<T: Real> StepSizes<T> {
    pub fn uniform(eta: T) -> Self {
        Self { phase: eta, amplitude: eta }
    }
}

impl<T: Real> ScheduleParams<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            ScheduleParams::ConstantTheorem { constants, .. } => constants.validate(),
            ScheduleParams::GeometricDecay(d) => {
                if !(d.eta_phase >= T::zero()) || !(d.eta_amplitude >= T::zero()) {
                    return Err(param("initial step sizes must be nonnegative"));
                }
                if !(d.gamma > T::zero() && d.gamma <= T::one()) {
                    return Err(param(format!("decay base must lie in (0, 1], got {}", d.gamma)));
                }
                Ok(())
            }
        }
    }

    /// The same schedule with the horizon filled in when it is unset.
    pub fn with_default_horizon(self, horizon: usize) -> Self {
        match self {
            ScheduleParams::ConstantTheorem { constants, horizon: None } => {
                ScheduleParams::ConstantTheorem { constants, horizon: Some(horizon) }
            }
            other => other,
        }
    }
}

/// Step sizes used at iteration `t` for a parameter vector of dimension `s`.
pub fn step_size<T: Real>(t: usize, params: &ScheduleParams<T>, s: usize) -> Result<StepSizes<T>> {
    params.validate()?;
    match params {
        ScheduleParams::ConstantTheorem { constants: c, horizon } => {
            let horizon = horizon.ok_or_else(|| param("constant schedule needs a horizon T"))?;
            let s = T::of(s as f64);
            let denom = T::of(4.0)
                * c.rho
                * c.b_f
                * c.b_f
                * c.l_h0
                * c.l_h0
                * (s * s + s + s)
                * T::of((horizon + 1) as f64);
            Ok(StepSizes::uniform((c.delta_phi / denom).sqrt()))
        }
        ScheduleParams::GeometricDecay(d) => {
            let exp = t.min(d.cutoff);
            let factor = d.gamma.powi(i32::try_from(exp).unwrap_or(i32::MAX));
            Ok(StepSizes { phase: d.eta_phase * factor, amplitude: d.eta_amplitude * factor })
        }
    }
}

/// `8(sqrt(Δ_φ ρ B_F² L_{h,0}² (S²+2S)/(T+1)) + μ ρ Δ_K B_F L_{h,1} sqrt(S M K))`,
/// the bound on the expected squared Moreau-envelope gradient at the
/// randomly selected iterate. Reported only.
pub fn theorem1_bound<T: Real>(
    c: &TheoremConstants<T>,
    s: usize,
    antennas: usize,
    users: usize,
    mu: T,
    horizon: usize,
) -> T {
    let sf = T::of(s as f64);
    let first = (c.delta_phi * c.rho * c.b_f * c.b_f * c.l_h0 * c.l_h0 * (sf * sf + sf + sf)
        / T::of((horizon + 1) as f64))
    .sqrt();
    let second = mu * c.rho * c.delta_k * c.b_f * c.l_h1 * T::of((s * antennas * users) as f64).sqrt();
    T::of(8.0) * (first + second)
}
