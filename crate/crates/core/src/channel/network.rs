use serde::{Deserialize, Serialize};

use crate::channel::irs::{AmplitudeMode, IrsLayout};
use crate::error::{param, Result};

/// One reflecting panel of `nh × nv` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrsPanel {
    pub nh: usize,
    pub nv: usize,
}

impl IrsPanel {
    pub fn elements(&self) -> usize {
        self.nh * self.nv
    }
}

/// Linear-scale Rician factors per link class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicianFactors {
    /// IRS → user.
    pub irs_user: f64,
    /// AP → IRS.
    pub ap_irs: f64,
    /// AP → user.
    pub ap_user: f64,
}

/// Exponential-correlation coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCoeffs {
    /// IRS side of the IRS → user links.
    pub irs_user: f64,
    /// IRS side of the AP → IRS links.
    pub irs: f64,
    /// AP side of every link leaving the AP.
    pub ap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossExponents {
    pub ap_irs: f64,
    pub irs_user: f64,
    pub ap_user: f64,
}

/// Link lengths in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDistances {
    /// `[k]`: AP → user k.
    pub ap_user: Vec<f64>,
    /// `[i]`: AP → IRS i.
    pub ap_irs: Vec<f64>,
    /// `[i][k]`: IRS i → user k.
    pub irs_user: Vec<Vec<f64>>,
}

/// Everything that fixes the channel statistics and the utility.
/// Power quantities are linear (watts, unitless gains).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub antennas: usize,
    pub users: usize,
    pub irs: Vec<IrsPanel>,
    pub rician: RicianFactors,
    pub correlation: CorrelationCoeffs,
    pub pathloss_c0: f64,
    pub exponents: PathLossExponents,
    pub distances: LinkDistances,
    /// Total AP power budget `P`.
    pub power: f64,
    /// Per-user noise variance `σ_k²`.
    pub noise: Vec<f64>,
    /// Per-user weight `α_k`.
    pub weights: Vec<f64>,
    pub amplitude_mode: AmplitudeMode,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let (m, k) = (self.antennas, self.users);
        if m == 0 || k == 0 {
            return Err(param("antennas and users must be positive"));
        }
        if self.irs.iter().any(|p| p.elements() == 0) {
            return Err(param("every IRS panel needs nh·nv ≥ 1"));
        }
        let r = &self.rician;
        for (name, b) in [("irs_user", r.irs_user), ("ap_irs", r.ap_irs), ("ap_user", r.ap_user)] {
            if !(b >= 0.0) || !b.is_finite() {
                return Err(param(format!("Rician factor {name} must be finite and ≥ 0, got {b}")));
            }
        }
        let c = &self.correlation;
        for (name, v) in [("irs_user", c.irs_user), ("irs", c.irs), ("ap", c.ap)] {
            if !(0.0..1.0).contains(&v) {
                return Err(param(format!("correlation {name} must lie in [0, 1), got {v}")));
            }
        }
        if !(self.pathloss_c0 > 0.0) {
            return Err(param("path-loss reference C0 must be positive"));
        }
        let e = &self.exponents;
        if [e.ap_irs, e.irs_user, e.ap_user].iter().any(|x| !x.is_finite()) {
            return Err(param("path-loss exponents must be finite"));
        }
        let d = &self.distances;
        if d.ap_user.len() != k || d.ap_irs.len() != self.irs.len() || d.irs_user.len() != self.irs.len() {
            return Err(param("link distance table does not match users/IRS count"));
        }
        if d.irs_user.iter().any(|row| row.len() != k) {
            return Err(param("IRS→user distance rows need one entry per user"));
        }
        let all = d.ap_user.iter().chain(&d.ap_irs).chain(d.irs_user.iter().flatten());
        for x in all {
            if !(*x > 0.0) || !x.is_finite() {
                return Err(param(format!("link distances must be positive, got {x}")));
            }
        }
        if !(self.power > 0.0) || !self.power.is_finite() {
            return Err(param("power budget must be positive"));
        }
        if self.noise.len() != k || self.noise.iter().any(|s| !(*s > 0.0)) {
            return Err(param("need one positive noise variance per user"));
        }
        if self.weights.len() != k || self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(param("need one nonnegative weight per user"));
        }
        if !self.weights.iter().any(|w| *w > 0.0) {
            return Err(param("at least one user weight must be positive"));
        }
        Ok(())
    }

    pub fn irs_sizes(&self) -> Vec<usize> {
        self.irs.iter().map(IrsPanel::elements).collect()
    }

    pub fn layout(&self) -> IrsLayout {
        IrsLayout::new(self.irs_sizes(), self.amplitude_mode).expect("validated panel sizes")
    }

    pub fn layout_with(&self, mode: AmplitudeMode) -> IrsLayout {
        IrsLayout::new(self.irs_sizes(), mode).expect("validated panel sizes")
    }
}

impl NetworkConfig {
    /// Normalized network: unit distances and reference gain, no path-loss
    /// decay, Rayleigh links, no correlation, `P = σ² = α_k = 1`.
    pub fn unit_scale(antennas: usize, users: usize, panels: &[(usize, usize)]) -> Self {
        let n_irs = panels.len();
        Self {
            antennas,
            users,
            irs: panels.iter().map(|&(nh, nv)| IrsPanel { nh, nv }).collect(),
            rician: RicianFactors { irs_user: 0.0, ap_irs: 0.0, ap_user: 0.0 },
            correlation: CorrelationCoeffs { irs_user: 0.0, irs: 0.0, ap: 0.0 },
            pathloss_c0: 1.0,
            exponents: PathLossExponents { ap_irs: 0.0, irs_user: 0.0, ap_user: 0.0 },
            distances: LinkDistances {
                ap_user: vec![1.0; users],
                ap_irs: vec![1.0; n_irs],
                irs_user: vec![vec![1.0; users]; n_irs],
            },
            power: 1.0,
            noise: vec![1.0; users],
            weights: vec![1.0; users],
            amplitude_mode: AmplitudeMode::Adjustable,
        }
    }
}
