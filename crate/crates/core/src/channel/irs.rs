//! IRS parameters and their flat optimization-vector view.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{dim, param, Result};
use crate::scalar::{Cx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeMode {
    /// Phases and amplitudes are both tunable.
    Adjustable,
    /// Amplitudes pinned at 1, only phases are tunable.
    Unit,
}

/// Which half of an IRS block a flat coordinate belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Phase,
    Amplitude,
}

/// Shape of the flat parameter vector θ.
///
/// Per IRS `i` the block is `[φ_i; A_i]` in adjustable mode and `[φ_i]` in
/// unit mode; blocks are concatenated in IRS order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrsLayout {
    sizes: Vec<usize>,
    mode: AmplitudeMode,
}

impl IrsLayout {
    pub fn new(sizes: Vec<usize>, mode: AmplitudeMode) -> Result<Self> {
        if sizes.iter().any(|&n| n == 0) {
            return Err(param("every IRS needs at least one element"));
        }
        Ok(Self { sizes, mode })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn mode(&self) -> AmplitudeMode {
        self.mode
    }

    pub fn num_irs(&self) -> usize {
        self.sizes.len()
    }

    fn block_len(&self, n: usize) -> usize {
        match self.mode {
            AmplitudeMode::Adjustable => 2 * n,
            AmplitudeMode::Unit => n,
        }
    }

    /// Dimension `S` of θ.
    pub fn dimension(&self) -> usize {
        self.sizes.iter().map(|&n| self.block_len(n)).sum()
    }

    /// Offset of IRS `i`'s block inside θ.
    pub fn offset(&self, irs: usize) -> usize {
        self.sizes[..irs].iter().map(|&n| self.block_len(n)).sum()
    }

    /// `(irs index, block)` of every flat coordinate, in order.
    pub fn coordinates(&self) -> Vec<(usize, Block)> {
        let mut out = Vec::with_capacity(self.dimension());
        for (i, &n) in self.sizes.iter().enumerate() {
            out.extend(std::iter::repeat_n((i, Block::Phase), n));
            if self.mode == AmplitudeMode::Adjustable {
                out.extend(std::iter::repeat_n((i, Block::Amplitude), n));
            }
        }
        out
    }

    /// Per-coordinate box `[lo, hi]`: `[−π, π]` for phases, `[0, 1]` for amplitudes.
    pub fn bounds<T: Real>(&self) -> (Vec<T>, Vec<T>) {
        self.coordinates()
            .into_iter()
            .map(|(_, b)| match b {
                Block::Phase => (-T::PI(), T::PI()),
                Block::Amplitude => (T::zero(), T::one()),
            })
            .unzip()
    }

    /// Reflection coefficients `A ∘ e^{−jφ}` per IRS straight from θ.
    /// Coordinates outside the box are used as given.
    pub fn reflection_coefficients<T: Real>(&self, theta: &[T]) -> Result<Vec<Vec<Cx<T>>>> {
        if theta.len() != self.dimension() {
            return Err(dim(format!(
                "theta has {} entries, layout expects {}",
                theta.len(),
                self.dimension()
            )));
        }
        let mut out = Vec::with_capacity(self.sizes.len());
        let mut at = 0;
        for &n in &self.sizes {
            let phases = &theta[at..at + n];
            let coeffs = match self.mode {
                AmplitudeMode::Adjustable => {
                    let amps = &theta[at + n..at + 2 * n];
                    phases.iter().zip(amps).map(|(&p, &a)| Cx::from_polar(a, -p)).collect()
                }
                AmplitudeMode::Unit => phases.iter().map(|&p| Cx::from_polar(T::one(), -p)).collect(),
            };
            out.push(coeffs);
            at += self.block_len(n);
        }
        Ok(out)
    }
}

/// Phases and amplitudes of every IRS element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrsState<T> {
    pub phases: Vec<Vec<T>>,
    pub amplitudes: Vec<Vec<T>>,
}

impl<T: Real> IrsState<T> {
    /// Uniform phases on `[−π, π]`, unit amplitudes.
    pub fn random_phases<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        let pi = std::f64::consts::PI;
        let phases = sizes
            .iter()
            .map(|&n| (0..n).map(|_| T::of(rng.random_range(-pi..=pi))).collect())
            .collect();
        let amplitudes = sizes.iter().map(|&n| vec![T::one(); n]).collect();
        Self { phases, amplitudes }
    }

    /// All amplitudes zero: the surfaces reflect nothing.
    pub fn dead(sizes: &[usize]) -> Self {
        Self {
            phases: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            amplitudes: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.phases.iter().map(Vec::len).collect()
    }

    pub fn reflection_coefficients(&self) -> Vec<Vec<Cx<T>>> {
        self.phases
            .iter()
            .zip(&self.amplitudes)
            .map(|(p, a)| p.iter().zip(a).map(|(&p, &a)| Cx::from_polar(a, -p)).collect())
            .collect()
    }

    /// Checks the box constraints (and unit amplitudes in unit mode).
    pub fn validate(&self, mode: AmplitudeMode) -> Result<()> {
        let pi = T::PI();
        for (i, (p, a)) in self.phases.iter().zip(&self.amplitudes).enumerate() {
            if p.len() != a.len() {
                return Err(dim(format!("IRS {i}: {} phases vs {} amplitudes", p.len(), a.len())));
            }
            if p.iter().any(|&x| !(x >= -pi && x <= pi)) {
                return Err(param(format!("IRS {i}: phase outside [-pi, pi]")));
            }
            if a.iter().any(|&x| !(x >= T::zero() && x <= T::one())) {
                return Err(param(format!("IRS {i}: amplitude outside [0, 1]")));
            }
            if mode == AmplitudeMode::Unit && a.iter().any(|&x| x != T::one()) {
                return Err(param(format!("IRS {i}: unit mode requires amplitudes of exactly 1")));
            }
        }
        Ok(())
    }

    /// Flat θ for `mode`; unit mode drops the amplitude blocks.
    pub fn flatten(&self, mode: AmplitudeMode) -> Vec<T> {
        let mut out = Vec::new();
        for (p, a) in self.phases.iter().zip(&self.amplitudes) {
            out.extend_from_slice(p);
            if mode == AmplitudeMode::Adjustable {
                out.extend_from_slice(a);
            }
        }
        out
    }

    /// Inverse of [`flatten`](Self::flatten); unit mode restores unit amplitudes.
    pub fn unflatten(layout: &IrsLayout, theta: &[T]) -> Result<Self> {
        if theta.len() != layout.dimension() {
            return Err(dim(format!(
                "theta has {} entries, layout expects {}",
                theta.len(),
                layout.dimension()
            )));
        }
        let mut phases = Vec::with_capacity(layout.num_irs());
        let mut amplitudes = Vec::with_capacity(layout.num_irs());
        let mut at = 0;
        for &n in layout.sizes() {
            phases.push(theta[at..at + n].to_vec());
            at += n;
            match layout.mode() {
                AmplitudeMode::Adjustable => {
                    amplitudes.push(theta[at..at + n].to_vec());
                    at += n;
                }
                AmplitudeMode::Unit => amplitudes.push(vec![T::one(); n]),
            }
        }
        Ok(Self { phases, amplitudes })
    }
}
