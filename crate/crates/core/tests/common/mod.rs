//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64 as C;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use zosga_core::channel::{AmplitudeMode, ChannelRealization, IrsLayout};

pub fn scenario_path(name: &str) -> String {
    format!("{}/../../scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn cn(rng: &mut ChaCha8Rng) -> C {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<C> {
    Array2::from_shape_simple_fn((rows, cols), || cn(rng))
}

/// Random precoder scaled to total power `p`.
pub fn random_precoder(m: usize, k: usize, p: f64, rng: &mut ChaCha8Rng) -> Array2<C> {
    let w = random_matrix(m, k, rng);
    let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    w.mapv(|z| z * (p.sqrt() / norm))
}

/// `Σ_k α_k log2(1 + |h_kᴴw_k|² / (Σ_{j≠k}|h_kᴴw_j|² + σ_k²))` by plain loops.
pub fn sumrate(w: &Array2<C>, h: &Array2<C>, weights: &[f64], noise: &[f64]) -> f64 {
    let (m, k) = h.dim();
    let mut total = 0.0;
    for user in 0..k {
        let mut gains = vec![0.0; k];
        for (j, g) in gains.iter_mut().enumerate() {
            let mut z = C::new(0.0, 0.0);
            for a in 0..m {
                z += h[[a, user]].conj() * w[[a, j]];
            }
            *g = z.norm_sqr();
        }
        let interference: f64 = (0..k).filter(|j| *j != user).map(|j| gains[j]).sum();
        total += weights[user] * (1.0 + gains[user] / (interference + noise[user])).log2();
    }
    total
}

/// Central differences of [`sumrate`] in every `Re H` then every `Im H`
/// entry, row-major.
pub fn fd_channel_gradient(w: &Array2<C>, h: &Array2<C>, weights: &[f64], noise: &[f64], step: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * h.len());
    for dir in [C::new(1.0, 0.0), C::new(0.0, 1.0)] {
        for idx in 0..h.len() {
            let (r, c) = (idx / h.ncols(), idx % h.ncols());
            let mut hp = h.clone();
            let mut hm = h.clone();
            hp[[r, c]] += dir * step;
            hm[[r, c]] -= dir * step;
            out.push((sumrate(w, &hp, weights, noise) - sumrate(w, &hm, weights, noise)) / (2.0 * step));
        }
    }
    out
}

/// Reflection coefficient `A e^{−jφ}` of every element, per IRS.
fn coefficients(layout: &IrsLayout, theta: &[f64]) -> Vec<Vec<(f64, f64)>> {
    let mut at = 0;
    layout
        .sizes()
        .iter()
        .map(|&n| {
            let phases = &theta[at..at + n];
            let v = match layout.mode() {
                AmplitudeMode::Adjustable => {
                    let amps = &theta[at + n..at + 2 * n];
                    at += 2 * n;
                    phases.iter().zip(amps).map(|(p, a)| (*p, *a)).collect()
                }
                AmplitudeMode::Unit => {
                    at += n;
                    phases.iter().map(|p| (*p, 1.0)).collect()
                }
            };
            v
        })
        .collect()
}

/// `H[m,k] = Σ_i Σ_n conj(G_i[n,m]) A_n e^{−jφ_n} h_r^i[n,k] + h_d[m,k]`.
pub fn channel(layout: &IrsLayout, omega: &ChannelRealization<f64>, theta: &[f64]) -> Array2<C> {
    let coeffs = coefficients(layout, theta);
    let (m, k) = omega.ap_user.dim();
    let mut h = omega.ap_user.clone();
    for (i, c) in coeffs.iter().enumerate() {
        let g = &omega.ap_irs[i];
        let r = &omega.irs_user[i];
        for a in 0..m {
            for u in 0..k {
                for (n, (phi, amp)) in c.iter().enumerate() {
                    h[[a, u]] += g[[n, a]].conj() * C::from_polar(*amp, -phi) * r[[n, u]];
                }
            }
        }
    }
    h
}

/// Exact `∂H/∂θ_s` for every coordinate `s` of the flat parameter vector.
pub fn channel_jacobian(layout: &IrsLayout, omega: &ChannelRealization<f64>, theta: &[f64]) -> Vec<Array2<C>> {
    let coeffs = coefficients(layout, theta);
    let (m, k) = omega.ap_user.dim();
    let mut out = Vec::with_capacity(theta.len());
    for (i, c) in coeffs.iter().enumerate() {
        let g = &omega.ap_irs[i];
        let r = &omega.irs_user[i];
        let cascade = |n: usize, factor: C| Array2::from_shape_fn((m, k), |(a, u)| g[[n, a]].conj() * factor * r[[n, u]]);
        for (n, (phi, amp)) in c.iter().enumerate() {
            out.push(cascade(n, C::new(0.0, -1.0) * C::from_polar(*amp, -phi)));
        }
        if layout.mode() == AmplitudeMode::Adjustable {
            for (n, (phi, _)) in c.iter().enumerate() {
                out.push(cascade(n, C::from_polar(1.0, -phi)));
            }
        }
    }
    out
}

/// `∇_θ F = [2 Re Σ_{m,k} D[m,k]·J_s[m,k]]_s`.
pub fn chain_gradient(d: &Array2<C>, jacobian: &[Array2<C>]) -> Vec<f64> {
    jacobian
        .iter()
        .map(|j| 2.0 * d.iter().zip(j.iter()).map(|(a, b)| (a * b).re).sum::<f64>())
        .collect()
}

pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Interior point of the layout's box.
pub fn random_theta(layout: &IrsLayout, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (lo, hi) = layout.bounds::<f64>();
    lo.iter().zip(&hi).map(|(l, h)| l + (h - l) * rng.random_range(0.05..0.95)).collect()
}
