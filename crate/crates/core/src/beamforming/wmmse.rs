//! Weighted-MMSE block-coordinate precoder design under a total power budget.
//!
//! Each round updates, in order, the receive scalars `u_k`, the MSE weights
//! `v_k = 1/e_k`, and the precoder
//! `w_k = α_k v_k u_k (Σ_j α_j v_j |u_j|² h_j h_jᴴ + λI)⁻¹ h_k`,
//! with the multiplier `λ ≥ 0` found by bisection on the power residual.

use ndarray::Array2;

use super::{inner_products, PrecoderMatrix, Utility};
use crate::error::{dim, param, Result};
use crate::linalg::{hermitian_embedding, symmetric_eigen};
use crate::scalar::{Cx, Real};

const BISECTION_STEPS: usize = 100;
const POWER_TOL: f64 = 1e-10;

/// Result of one inner solve.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution<T> {
    pub precoder: PrecoderMatrix<T>,
    /// Weighted sumrate at the returned precoder.
    pub sumrate: T,
    /// Sumrate at the initial point followed by the value after every round.
    pub trace: Vec<T>,
    /// Set when the channel carried no signal (all-zero `H`).
    pub degenerate: bool,
}

/// Second-stage solver: maps an effective channel to a precoder.
pub trait InnerOracle<T> {
    fn utility(&self) -> &Utility<T>;
    fn solve(&self, h: &Array2<Cx<T>>) -> Result<InnerSolution<T>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wmmse<T> {
    pub power: T,
    pub utility: Utility<T>,
    pub iters: usize,
}

/// `sqrt(P/K) · h_k/‖h_k‖` per column; zero columns stay zero.
pub fn scaled_mrt<T: Real>(h: &Array2<Cx<T>>, power: T) -> PrecoderMatrix<T> {
    let (m, k) = h.dim();
    let scale = (power / T::of(k as f64)).sqrt();
    let mut w = Array2::from_elem((m, k), Cx::default());
    for user in 0..k {
        let norm = h.column(user).iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm > T::zero() {
            for ant in 0..m {
                w[[ant, user]] = h[[ant, user]].scale(scale / norm);
            }
        }
    }
    PrecoderMatrix::new(w)
}

impl<T: Real> Wmmse<T> {
    pub fn new(power: T, utility: Utility<T>, iters: usize) -> Result<Self> {
        if !(power > T::zero()) {
            return Err(param("power budget must be positive"));
        }
        if iters == 0 {
            return Err(param("WMMSE needs at least one round"));
        }
        Ok(Self { power, utility, iters })
    }

    pub fn solve_from(&self, h: &Array2<Cx<T>>, init: Option<&PrecoderMatrix<T>>) -> Result<InnerSolution<T>> {
        let (m, k) = h.dim();
        if k != self.utility.users() {
            return Err(dim(format!("channel has {k} users, utility {}", self.utility.users())));
        }
        if h.iter().all(|z| z.re == T::zero() && z.im == T::zero()) {
            return Ok(InnerSolution {
                precoder: PrecoderMatrix::zeros(m, k),
                sumrate: T::zero(),
                trace: vec![T::zero(); self.iters + 1],
                degenerate: true,
            });
        }
        let mut w = match init {
            Some(w0) => {
                if w0.w.dim() != h.dim() {
                    return Err(dim("initial precoder shape differs from channel"));
                }
                w0.clone()
            }
            None => scaled_mrt(h, self.power),
        };
        let mut trace = Vec::with_capacity(self.iters + 1);
        trace.push(self.utility.sumrate(&w, h)?.total);
        for _ in 0..self.iters {
            w = self.round(h, &w);
            trace.push(self.utility.sumrate(&w, h)?.total);
        }
        Ok(InnerSolution { sumrate: *trace.last().expect("non-empty"), precoder: w, trace, degenerate: false })
    }

    fn round(&self, h: &Array2<Cx<T>>, w: &PrecoderMatrix<T>) -> PrecoderMatrix<T> {
        let (m, k) = h.dim();
        let mut a = Array2::<Cx<T>>::from_elem((m, m), Cx::default());
        let mut b = Array2::<Cx<T>>::from_elem((m, k), Cx::default());
        for user in 0..k {
            let alpha = self.utility.weights[user];
            if alpha == T::zero() {
                continue;
            }
            let hk = h.column(user);
            let prods = inner_products(hk, &w.w);
            let signal = prods[user].norm_sqr();
            let interference: T = prods
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != user)
                .map(|(_, z)| z.norm_sqr())
                .sum::<T>()
                + self.utility.noise[user];
            let total = signal + interference;
            let u = prods[user].unscale(total);
            // 1/e_k = total / interference
            let v = total / interference;
            let c = alpha * v * u.norm_sqr();
            for i in 0..m {
                for j in 0..m {
                    a[[i, j]] += (hk[i] * hk[j].conj()).scale(c);
                }
                b[[i, user]] = hk[i] * u.scale(alpha * v);
            }
        }
        PrecoderMatrix::new(constrained_solve(&a, &b, self.power))
    }
}

/// Solves `(A + λI) W = B` with the smallest `λ ≥ 0` such that `‖W‖²_F ≤ P`.
/// Directions in the numerical null space of `A` are dropped (pseudo-inverse).
fn constrained_solve<T: Real>(a: &Array2<Cx<T>>, b: &Array2<Cx<T>>, power: T) -> Array2<Cx<T>> {
    let (m, k) = b.dim();
    let eig = symmetric_eigen(&hermitian_embedding(a));
    let n = 2 * m;
    let lam: Vec<T> = eig.values.iter().map(|l| l.max(T::zero())).collect();
    let lam_max = lam.iter().cloned().fold(T::zero(), T::max);
    let null_tol = lam_max * T::epsilon().sqrt() * T::of(0.01);
    let active: Vec<bool> = lam.iter().map(|&l| lam_max > T::zero() && l > null_tol).collect();

    // coeffs[i][col] = V_iᵀ [Re b_col; Im b_col]
    let mut coeffs = vec![vec![T::zero(); k]; n];
    for i in 0..n {
        if !active[i] {
            continue;
        }
        for col in 0..k {
            let mut acc = T::zero();
            for r in 0..m {
                acc += eig.vectors[[r, i]] * b[[r, col]].re + eig.vectors[[r + m, i]] * b[[r, col]].im;
            }
            coeffs[i][col] = acc;
        }
    }
    let energy: Vec<T> = coeffs.iter().map(|c| c.iter().map(|x| *x * *x).sum()).collect();
    let total_energy: T = energy.iter().cloned().sum();
    if total_energy == T::zero() {
        return Array2::from_elem((m, k), Cx::default());
    }
    let power_at = |mu: T| -> T {
        (0..n)
            .filter(|&i| active[i])
            .map(|i| energy[i] / ((lam[i] + mu) * (lam[i] + mu)))
            .sum()
    };

    let multiplier = if power_at(T::zero()) <= power {
        T::zero()
    } else {
        let mut lo = T::zero();
        let mut hi = (total_energy / power).sqrt();
        while power_at(hi) > power {
            hi = hi + hi;
        }
        let tol = power * T::of(POWER_TOL);
        for _ in 0..BISECTION_STEPS {
            if power - power_at(hi) <= tol {
                break;
            }
            let mid = (lo + hi) * T::of(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if power_at(mid) > power {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };

    let mut w = Array2::from_elem((m, k), Cx::default());
    for i in 0..n {
        if !active[i] {
            continue;
        }
        let inv = T::one() / (lam[i] + multiplier);
        for col in 0..k {
            let s = coeffs[i][col] * inv;
            if s == T::zero() {
                continue;
            }
            for r in 0..m {
                w[[r, col]].re += eig.vectors[[r, i]] * s;
                w[[r, col]].im += eig.vectors[[r + m, i]] * s;
            }
        }
    }
    // Round-off can leave the power a hair above budget; pull it back inside.
    let got: T = w.iter().map(|z| z.norm_sqr()).sum();
    if got > power {
        let s = (power / got).sqrt();
        w.mapv_inplace(|z| z.scale(s));
    }
    w
}

impl<T: Real> InnerOracle<T> for Wmmse<T> {
    fn utility(&self) -> &Utility<T> {
        &self.utility
    }

    fn solve(&self, h: &Array2<Cx<T>>) -> Result<InnerSolution<T>> {
        self.solve_from(h, None)
    }
}

/// One-shot WMMSE: `iters` rounds from `init` (scaled MRT when `None`).
pub fn wmmse_precoder<T: Real>(
    h: &Array2<Cx<T>>,
    power: T,
    noise: &[T],
    weights: &[T],
    iters: usize,
    init: Option<&PrecoderMatrix<T>>,
) -> Result<InnerSolution<T>> {
    let utility = Utility::new(weights.to_vec(), noise.to_vec())?;
    Wmmse::new(power, utility, iters)?.solve_from(h, init)
}
