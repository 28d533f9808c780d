//! Rician ensemble sampling and the effective-channel composition.

use ndarray::Array2;
use rand::Rng;

use crate::channel::correlation::{correlation_matrix, irs_correlation, path_loss, Correlation};
use crate::channel::irs::{IrsLayout, IrsState};
use crate::channel::network::NetworkConfig;
use crate::error::{dim, Result};
use crate::linalg::{complex_mul_real, real_mul_complex};
use crate::scalar::{complex_normal, Cx, Real};

/// Line-of-sight components, drawn once per simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticalCsi<T> {
    /// `[i]`: `N_i × M`.
    pub ap_irs: Vec<Array2<Cx<T>>>,
    /// `[i]`: `N_i × K`, column k is IRS i → user k.
    pub irs_user: Vec<Array2<Cx<T>>>,
    /// `M × K`, column k is AP → user k.
    pub ap_user: Array2<Cx<T>>,
}

/// One state of nature ω: every link already mixed, correlated and
/// path-loss scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T> {
    /// `[i]`: `G_i`, `N_i × M`.
    pub ap_irs: Vec<Array2<Cx<T>>>,
    /// `[i]`: `N_i × K`, column k is `h_{r,k}^i`.
    pub irs_user: Vec<Array2<Cx<T>>>,
    /// `M × K`, column k is `h_{d,k}`.
    pub ap_user: Array2<Cx<T>>,
}

impl<T: Real> ChannelRealization<T> {
    pub fn antennas(&self) -> usize {
        self.ap_user.nrows()
    }

    pub fn users(&self) -> usize {
        self.ap_user.ncols()
    }

    pub fn irs_sizes(&self) -> Vec<usize> {
        self.ap_irs.iter().map(|g| g.nrows()).collect()
    }

    fn check(&self) -> Result<()> {
        let (m, k) = self.ap_user.dim();
        if self.ap_irs.len() != self.irs_user.len() {
            return Err(dim("AP→IRS and IRS→user link counts differ"));
        }
        for (i, (g, hr)) in self.ap_irs.iter().zip(&self.irs_user).enumerate() {
            if g.ncols() != m || hr.ncols() != k || g.nrows() != hr.nrows() {
                return Err(dim(format!("IRS {i} links have inconsistent shapes")));
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        let finite = |a: &Array2<Cx<T>>| a.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        finite(&self.ap_user) && self.ap_irs.iter().all(finite) && self.irs_user.iter().all(finite)
    }

    /// FNV-1a digest over every entry in a fixed order. Two realizations
    /// with the same digest were drawn from the same random numbers.
    pub fn checksum(&self) -> u64 {
        let mut h = Fnv::default();
        for g in &self.ap_irs {
            h.feed(g);
        }
        for r in &self.irs_user {
            h.feed(r);
        }
        h.feed(&self.ap_user);
        h.0
    }
}

struct Fnv(u64);

impl Default for Fnv {
    fn default() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv {
    fn feed<T: Real>(&mut self, a: &Array2<Cx<T>>) {
        for z in a.iter() {
            for part in [z.re, z.im] {
                for b in part.to_f64_lossy().to_bits().to_le_bytes() {
                    self.0 ^= u64::from(b);
                    self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Mixing<T> {
    los: T,
    scattered: T,
}

impl<T: Real> Mixing<T> {
    fn new(beta: f64) -> Self {
        Self {
            los: T::of((beta / (1.0 + beta)).sqrt()),
            scattered: T::of((1.0 / (1.0 + beta)).sqrt()),
        }
    }
}

#[derive(Debug, Clone)]
struct PanelModel<T> {
    n: usize,
    corr_irs: Correlation<T>,
    corr_irs_user: Correlation<T>,
    loss_ap_irs: T,
    loss_irs_user: Vec<T>,
}

/// Sampler with the correlation square roots and path-loss factors of one
/// `NetworkConfig` precomputed.
#[derive(Debug, Clone)]
pub struct ChannelModel<T> {
    antennas: usize,
    users: usize,
    panels: Vec<PanelModel<T>>,
    corr_ap: Correlation<T>,
    loss_ap_user: Vec<T>,
    mix_irs_user: Mixing<T>,
    mix_ap_irs: Mixing<T>,
    mix_ap_user: Mixing<T>,
}

fn draw_matrix<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<Cx<T>> {
    // Row-major fill order is part of the determinism contract.
    Array2::from_shape_simple_fn((rows, cols), || complex_normal(rng))
}

fn mix<T: Real>(
    los: &Array2<Cx<T>>,
    scattered: &Array2<Cx<T>>,
    m: &Mixing<T>,
    loss: impl Fn(usize, usize) -> T,
) -> Array2<Cx<T>> {
    Array2::from_shape_fn(los.dim(), |(r, c)| {
        (los[[r, c]].scale(m.los) + scattered[[r, c]].scale(m.scattered)).scale(loss(r, c))
    })
}

impl<T: Real> ChannelModel<T> {
    pub fn new(config: &NetworkConfig) -> Result<Self> {
        config.validate()?;
        let c = &config.correlation;
        let e = &config.exponents;
        let d = &config.distances;
        let c0 = config.pathloss_c0;
        let panels = config
            .irs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                Ok(PanelModel {
                    n: p.elements(),
                    corr_irs: irs_correlation(c.irs, c.irs, p.nh, p.nv)?,
                    corr_irs_user: irs_correlation(c.irs_user, c.irs_user, p.nh, p.nv)?,
                    loss_ap_irs: path_loss(d.ap_irs[i], e.ap_irs, c0)?,
                    loss_irs_user: d.irs_user[i]
                        .iter()
                        .map(|&x| path_loss(x, e.irs_user, c0))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            antennas: config.antennas,
            users: config.users,
            panels,
            corr_ap: correlation_matrix(c.ap, config.antennas)?,
            loss_ap_user: d.ap_user.iter().map(|&x| path_loss(x, e.ap_user, c0)).collect::<Result<_>>()?,
            mix_irs_user: Mixing::new(config.rician.irs_user),
            mix_ap_irs: Mixing::new(config.rician.ap_irs),
            mix_ap_user: Mixing::new(config.rician.ap_user),
        })
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn irs_sizes(&self) -> Vec<usize> {
        self.panels.iter().map(|p| p.n).collect()
    }

    /// Draws every LoS component i.i.d. CN(0, 1).
    pub fn draw_statistical_csi<R: Rng + ?Sized>(&self, rng: &mut R) -> StatisticalCsi<T> {
        let (m, k) = (self.antennas, self.users);
        let ap_irs = self.panels.iter().map(|p| draw_matrix(p.n, m, rng)).collect();
        let irs_user = self.panels.iter().map(|p| draw_matrix(p.n, k, rng)).collect();
        let ap_user = draw_matrix(m, k, rng);
        StatisticalCsi { ap_irs, irs_user, ap_user }
    }

    /// Draws fresh scattered components and mixes them with `scsi`.
    pub fn sample_realization<R: Rng + ?Sized>(
        &self,
        scsi: &StatisticalCsi<T>,
        rng: &mut R,
    ) -> Result<ChannelRealization<T>> {
        let (m, k) = (self.antennas, self.users);
        let np = self.panels.len();
        if scsi.ap_irs.len() != np
            || scsi.irs_user.len() != np
            || scsi.ap_user.dim() != (m, k)
            || self.panels.iter().zip(&scsi.ap_irs).any(|(p, g)| g.dim() != (p.n, m))
            || self.panels.iter().zip(&scsi.irs_user).any(|(p, h)| h.dim() != (p.n, k))
        {
            return Err(dim("statistical CSI does not match the network configuration"));
        }

        let scattered_g: Vec<_> = self.panels.iter().map(|p| draw_matrix::<T, _>(p.n, m, rng)).collect();
        let scattered_r: Vec<_> = self.panels.iter().map(|p| draw_matrix::<T, _>(p.n, k, rng)).collect();
        let scattered_d = draw_matrix::<T, _>(m, k, rng);

        let ap_irs = self
            .panels
            .iter()
            .zip(&scsi.ap_irs)
            .zip(&scattered_g)
            .map(|((p, los), f)| {
                let corr = self.correlate_ap_irs(p, f);
                mix(los, &corr, &self.mix_ap_irs, |_, _| p.loss_ap_irs)
            })
            .collect();
        let irs_user = self
            .panels
            .iter()
            .zip(&scsi.irs_user)
            .zip(&scattered_r)
            .map(|((p, los), v)| {
                let corr = correlate_left(&p.corr_irs_user, v);
                mix(los, &corr, &self.mix_irs_user, |_, col| p.loss_irs_user[col])
            })
            .collect();
        let corr_d = correlate_left(&self.corr_ap, &scattered_d);
        let ap_user = mix(&scsi.ap_user, &corr_d, &self.mix_ap_user, |_, col| self.loss_ap_user[col]);

        Ok(ChannelRealization { ap_irs, irs_user, ap_user })
    }

    fn correlate_ap_irs(&self, p: &PanelModel<T>, f: &Array2<Cx<T>>) -> Array2<Cx<T>> {
        let left = correlate_left(&p.corr_irs, f);
        if self.corr_ap.is_identity() {
            left
        } else {
            complex_mul_real(&left, &self.corr_ap.sqrt)
        }
    }
}

fn correlate_left<T: Real>(c: &Correlation<T>, v: &Array2<Cx<T>>) -> Array2<Cx<T>> {
    if c.is_identity() {
        v.clone()
    } else {
        real_mul_complex(&c.sqrt, v)
    }
}

/// Draws the LoS components for `config` (builds a throwaway [`ChannelModel`]).
pub fn draw_statistical_csi<T: Real, R: Rng + ?Sized>(
    config: &NetworkConfig,
    rng: &mut R,
) -> Result<StatisticalCsi<T>> {
    Ok(ChannelModel::new(config)?.draw_statistical_csi(rng))
}

/// Draws one realization for `config` (builds a throwaway [`ChannelModel`]).
pub fn sample_realization<T: Real, R: Rng + ?Sized>(
    config: &NetworkConfig,
    scsi: &StatisticalCsi<T>,
    rng: &mut R,
) -> Result<ChannelRealization<T>> {
    ChannelModel::new(config)?.sample_realization(scsi, rng)
}

/// `H[:, k] = Σ_i G_iᴴ diag(c_i) h_{r,k}^i + h_{d,k}` for reflection
/// coefficients `c_i`.
pub fn compose_channel<T: Real>(coeffs: &[Vec<Cx<T>>], omega: &ChannelRealization<T>) -> Result<Array2<Cx<T>>> {
    omega.check()?;
    if coeffs.len() != omega.ap_irs.len() {
        return Err(dim(format!(
            "{} coefficient blocks for {} IRS links",
            coeffs.len(),
            omega.ap_irs.len()
        )));
    }
    let (m, k) = omega.ap_user.dim();
    let mut h = omega.ap_user.clone();
    let mut scaled = vec![Cx::<T>::default(); k];
    for (i, c) in coeffs.iter().enumerate() {
        let g = &omega.ap_irs[i];
        let hr = &omega.irs_user[i];
        if c.len() != g.nrows() {
            return Err(dim(format!("IRS {i}: {} coefficients for {} elements", c.len(), g.nrows())));
        }
        for (n, cn) in c.iter().enumerate() {
            for (kk, s) in scaled.iter_mut().enumerate() {
                *s = *cn * hr[[n, kk]];
            }
            for mm in 0..m {
                let gc = g[[n, mm]].conj();
                for (kk, s) in scaled.iter().enumerate() {
                    h[[mm, kk]] += gc * *s;
                }
            }
        }
    }
    Ok(h)
}

/// Effective `M × K` channel for IRS state `theta` under realization `omega`.
pub fn effective_channel<T: Real>(theta: &IrsState<T>, omega: &ChannelRealization<T>) -> Result<Array2<Cx<T>>> {
    compose_channel(&theta.reflection_coefficients(), omega)
}

/// Channel with every IRS removed; the IRS links are never read.
pub fn direct_channel<T: Real>(omega: &ChannelRealization<T>) -> Array2<Cx<T>> {
    omega.ap_user.clone()
}

/// Zeroth-order access to `θ ↦ H(θ, ω)`.
pub trait ChannelFn<T> {
    fn eval(&self, theta: &[T]) -> Result<Array2<Cx<T>>>;
}

impl<T, F> ChannelFn<T> for F
where
    F: Fn(&[T]) -> Result<Array2<Cx<T>>>,
{
    fn eval(&self, theta: &[T]) -> Result<Array2<Cx<T>>> {
        self(theta)
    }
}

/// A fixed realization viewed as a function of the flat parameter vector.
#[derive(Debug, Clone, Copy)]
pub struct RealizationChannel<'a, T> {
    pub layout: &'a IrsLayout,
    pub omega: &'a ChannelRealization<T>,
}

impl<T: Real> ChannelFn<T> for RealizationChannel<'_, T> {
    fn eval(&self, theta: &[T]) -> Result<Array2<Cx<T>>> {
        compose_channel(&self.layout.reflection_coefficients(theta)?, self.omega)
    }
}
