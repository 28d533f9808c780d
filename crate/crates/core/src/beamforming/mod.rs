//! Per-user SINR, weighted sumrate, and the WMMSE inner solver.

mod wmmse;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{dim, param, Result};
use crate::linalg::fro_norm_sqr;
use crate::scalar::{Cx, Real};

pub use wmmse::{scaled_mrt, wmmse_precoder, InnerOracle, InnerSolution, Wmmse};

/// AP precoder `W`, column k is `w_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderMatrix<T> {
    pub w: Array2<Cx<T>>,
}

impl<T: Real> PrecoderMatrix<T> {
    pub fn new(w: Array2<Cx<T>>) -> Self {
        Self { w }
    }

    pub fn zeros(antennas: usize, users: usize) -> Self {
        Self { w: Array2::from_elem((antennas, users), Cx::default()) }
    }

    /// `‖W‖²_F`.
    pub fn power(&self) -> T {
        fro_norm_sqr(&self.w)
    }

    pub fn is_feasible(&self, budget: T) -> bool {
        self.power() <= budget + T::of(1e-9)
    }

    pub fn antennas(&self) -> usize {
        self.w.nrows()
    }

    pub fn users(&self) -> usize {
        self.w.ncols()
    }
}

/// Weights and noise levels defining the utility `F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utility<T> {
    pub weights: Vec<T>,
    pub noise: Vec<T>,
}

impl<T: Real> Utility<T> {
    pub fn new(weights: Vec<T>, noise: Vec<T>) -> Result<Self> {
        if weights.len() != noise.len() {
            return Err(param("weights and noise need one entry per user"));
        }
        if noise.iter().any(|s| !(*s > T::zero())) {
            return Err(param("noise variances must be positive"));
        }
        if weights.iter().any(|a| !(*a >= T::zero())) {
            return Err(param("user weights must be nonnegative"));
        }
        Ok(Self { weights, noise })
    }

    /// Equal unit weights, common noise level.
    pub fn uniform(users: usize, noise: T) -> Self {
        Self { weights: vec![T::one(); users], noise: vec![noise; users] }
    }

    pub fn users(&self) -> usize {
        self.weights.len()
    }

    pub fn sumrate(&self, w: &PrecoderMatrix<T>, h: &Array2<Cx<T>>) -> Result<SumrateBreakdown<T>> {
        weighted_sumrate(w, h, &self.weights, &self.noise)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumrateBreakdown<T> {
    pub sinr: Vec<T>,
    /// `α_k log₂(1 + SINR_k)`.
    pub rates: Vec<T>,
    /// Sum of `rates` in user order.
    pub total: T,
}

/// `h_kᴴ w_j` for every column `j`.
pub(crate) fn inner_products<T: Real>(h_k: ArrayView1<Cx<T>>, w: &Array2<Cx<T>>) -> Vec<Cx<T>> {
    (0..w.ncols())
        .map(|j| h_k.iter().zip(w.column(j)).map(|(h, x)| h.conj() * x).sum())
        .collect()
}

/// `|h_kᴴ w_k|² / (Σ_{j≠k} |h_kᴴ w_j|² + σ_k²)`.
pub fn sinr<T: Real>(w: &PrecoderMatrix<T>, h_k: ArrayView1<Cx<T>>, k: usize, noise: T) -> Result<T> {
    if k >= w.users() {
        return Err(param(format!("user index {k} out of range for {} users", w.users())));
    }
    if h_k.len() != w.antennas() {
        return Err(dim(format!("channel has {} entries, precoder {} antennas", h_k.len(), w.antennas())));
    }
    if !(noise > T::zero()) {
        return Err(param("noise variance must be positive"));
    }
    let a = inner_products(h_k, &w.w);
    let interference: T = a.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, z)| z.norm_sqr()).sum();
    Ok(a[k].norm_sqr() / (interference + noise))
}

/// `F = Σ_k α_k log₂(1 + SINR_k)` with the per-user breakdown.
pub fn weighted_sumrate<T: Real>(
    w: &PrecoderMatrix<T>,
    h: &Array2<Cx<T>>,
    weights: &[T],
    noise: &[T],
) -> Result<SumrateBreakdown<T>> {
    let k = h.ncols();
    if h.dim() != w.w.dim() {
        return Err(dim(format!("channel is {:?}, precoder {:?}", h.dim(), w.w.dim())));
    }
    if weights.len() != k || noise.len() != k {
        return Err(dim("weights and noise need one entry per user"));
    }
    let mut sinrs = Vec::with_capacity(k);
    let mut rates = Vec::with_capacity(k);
    let mut total = T::zero();
    for user in 0..k {
        let s = sinr(w, h.column(user), user, noise[user])?;
        let r = if weights[user] == T::zero() { T::zero() } else { weights[user] * s.ln_1p() / T::LN_2() };
        total += r;
        sinrs.push(s);
        rates.push(r);
    }
    Ok(SumrateBreakdown { sinr: sinrs, rates, total })
}
