//! Chain-rule pieces of the outer gradient: the Wirtinger factor of the
//! sumrate with respect to the effective channel, the two-point channel
//! probe, and their pairing into a stochastic quasi-gradient.

use ndarray::Array2;
use rand::Rng;

use crate::beamforming::{inner_products, PrecoderMatrix, Utility};
use crate::channel::ChannelFn;
use crate::error::{dim, param, Result};
use crate::linalg::fro_norm_sqr;
use crate::scalar::{real_normal, Cx, Real};

/// `D[m, k] = ∂F/∂H[m, k]`, the Wirtinger derivative of the weighted
/// sumrate with respect to the unconjugated channel entry.
///
/// With `D`, the real partials are `∂F/∂Re H = 2 Re D` and
/// `∂F/∂Im H = 2 Re(jD)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WirtingerFactor<T> {
    pub d: Array2<Cx<T>>,
}

impl<T: Real> WirtingerFactor<T> {
    pub fn norm(&self) -> T {
        fro_norm_sqr(&self.d).sqrt()
    }

    pub fn within(&self, bound: T) -> bool {
        self.norm() <= bound
    }
}

/// Column k: `α_k [zᴴ(b w_k w_kᴴ − a Σ_{j≠k} w_j w_jᴴ)]ᵀ / (ln2 · b · (a + b))`
/// at `z = h_k`, with `a = |zᴴw_k|²` and `b = Σ_{j≠k}|zᴴw_j|² + σ_k²`.
pub fn wirtinger_factor<T: Real>(
    w: &PrecoderMatrix<T>,
    h: &Array2<Cx<T>>,
    utility: &Utility<T>,
) -> Result<WirtingerFactor<T>> {
    let (m, k) = h.dim();
    if w.w.dim() != (m, k) {
        return Err(dim(format!("channel is {:?}, precoder {:?}", h.dim(), w.w.dim())));
    }
    if utility.users() != k {
        return Err(dim("utility user count differs from channel"));
    }
    let mut d = Array2::from_elem((m, k), Cx::default());
    for user in 0..k {
        let alpha = utility.weights[user];
        if alpha == T::zero() {
            continue;
        }
        let p = inner_products(h.column(user), &w.w);
        let a = p[user].norm_sqr();
        let b = p
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != user)
            .map(|(_, z)| z.norm_sqr())
            .sum::<T>()
            + utility.noise[user];
        let scale = alpha / (T::LN_2() * b * (a + b));
        for ant in 0..m {
            let mut acc = (p[user] * w.w[[ant, user]].conj()).scale(b);
            for (j, pj) in p.iter().enumerate() {
                if j != user {
                    acc -= (*pj * w.w[[ant, j]].conj()).scale(a);
                }
            }
            d[[ant, user]] = acc.scale(scale);
        }
    }
    Ok(WirtingerFactor { d })
}

/// Two channel probes at `θ ± μu`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbePair<T> {
    pub direction: Vec<T>,
    pub mu: T,
    /// The perturbed points actually evaluated (not projected).
    pub theta_plus: Vec<T>,
    pub theta_minus: Vec<T>,
    pub h_plus: Array2<Cx<T>>,
    pub h_minus: Array2<Cx<T>>,
    /// `H(θ + μu) − H(θ − μu)`.
    pub delta: Array2<Cx<T>>,
}

/// Evaluates `channel` exactly twice, at `θ + μu` and `θ − μu`.
pub fn probe_channel<T: Real, C: ChannelFn<T> + ?Sized>(
    theta: &[T],
    u: &[T],
    mu: T,
    channel: &C,
) -> Result<ProbePair<T>> {
    if !(mu > T::zero()) {
        return Err(param(format!("smoothing parameter must be positive, got {mu}")));
    }
    if u.len() != theta.len() {
        return Err(dim(format!("direction has {} entries, theta {}", u.len(), theta.len())));
    }
    let theta_plus: Vec<T> = theta.iter().zip(u).map(|(t, d)| *t + mu * *d).collect();
    let theta_minus: Vec<T> = theta.iter().zip(u).map(|(t, d)| *t - mu * *d).collect();
    let h_plus = channel.eval(&theta_plus)?;
    let h_minus = channel.eval(&theta_minus)?;
    if h_plus.dim() != h_minus.dim() {
        return Err(dim("probe evaluations returned different shapes"));
    }
    let delta = &h_plus - &h_minus;
    Ok(ProbePair { direction: u.to_vec(), mu, theta_plus, theta_minus, h_plus, h_minus, delta })
}

/// `Re Σ_{m,k} Δ[m,k]·D[m,k] = ⟨Re Δ, Re D⟩ + ⟨Im Δ, Re(jD)⟩`.
pub fn pairing<T: Real>(delta: &Array2<Cx<T>>, d: &WirtingerFactor<T>) -> Result<T> {
    if delta.dim() != d.d.dim() {
        return Err(dim(format!("probe difference is {:?}, factor {:?}", delta.dim(), d.d.dim())));
    }
    Ok(delta.iter().zip(d.d.iter()).map(|(x, y)| x.re * y.re - x.im * y.im).sum())
}

/// `G_μ = (u/μ) · Re Σ Δ_μ ∘ D`: the two-point estimate of `∇_θ F`.
pub fn quasi_gradient<T: Real>(probe: &ProbePair<T>, d: &WirtingerFactor<T>) -> Result<Vec<T>> {
    let s = pairing(&probe.delta, d)? / probe.mu;
    Ok(probe.direction.iter().map(|u| *u * s).collect())
}

/// `u ~ N(0, I_S)`.
pub fn gaussian_direction<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<T> {
    (0..dim).map(|_| real_normal(rng)).collect()
}
