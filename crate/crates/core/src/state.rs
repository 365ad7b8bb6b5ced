//! The coupled spectral state `(z, w)`: vorticity deviation and memory
//! variable `w(t) = int_0^t e^{-lambda(t-s)} z(s) ds`, as Hermitian-symmetric
//! coefficient arrays over the retained modes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::basis::FourierBasis;
use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone)]
pub struct SpectralState {
    pub z: Vec<C64>,
    pub w: Vec<C64>,
    pub t: f64,
}

/// Norm snapshot used in time series records.
#[derive(Debug, Clone, Copy)]
pub struct StateNorms {
    pub l2_z: f64,
    pub h1_z: f64,
    pub l2_w: f64,
    pub h2_w: f64,
}

impl SpectralState {
    pub fn zero(m: usize) -> Self {
        SpectralState {
            z: vec![C64::new(0.0, 0.0); m],
            w: vec![C64::new(0.0, 0.0); m],
            t: 0.0,
        }
    }

    /// Initial state with given vorticity coefficients and zero memory.
    pub fn from_vorticity(z: Vec<C64>, basis: &FourierBasis) -> Result<Self> {
        if z.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: z.len() });
        }
        let m = z.len();
        Ok(SpectralState { z, w: vec![C64::new(0.0, 0.0); m], t: 0.0 })
    }

    /// Seeded random real vorticity with spectral decay `1/(1 + |k|^2)`,
    /// scaled to the requested `H^1` norm; memory starts at zero.
    pub fn random(basis: &FourierBasis, amplitude_h1: f64, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut z: Vec<C64> = basis
            .sigma
            .iter()
            .map(|&s| {
                let w = 1.0 / (1.0 + s);
                C64::new(rng.gen_range(-1.0..1.0) * w, rng.gen_range(-1.0..1.0) * w)
            })
            .collect();
        basis.symmetrize(&mut z);
        let h1 = basis.sobolev_norm(&z, 1.0);
        if h1 > 0.0 {
            let scale = amplitude_h1 / h1;
            for c in &mut z {
                *c *= scale;
            }
        }
        let m = z.len();
        SpectralState { z, w: vec![C64::new(0.0, 0.0); m], t: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn norms(&self, basis: &FourierBasis) -> StateNorms {
        StateNorms {
            l2_z: basis.l2_norm(&self.z),
            h1_z: basis.sobolev_norm(&self.z, 1.0),
            l2_w: basis.l2_norm(&self.w),
            h2_w: basis.sobolev_norm(&self.w, 2.0),
        }
    }

    /// Largest Hermitian-symmetry violation across both components.
    pub fn hermitian_defect(&self, basis: &FourierBasis) -> f64 {
        basis
            .hermitian_defect(&self.z)
            .max(basis.hermitian_defect(&self.w))
    }

    /// `E = 1/2 ||z||^2 + (kappa/2) ||grad w||^2`, the Lyapunov energy of the
    /// uncontrolled linear flow (`dE/dt = -eta ||grad z||^2 - kappa lambda ||grad w||^2`).
    pub fn energy(&self, basis: &FourierBasis, kappa: f64) -> f64 {
        let z2: f64 = self.z.iter().map(|c| c.norm_sqr()).sum();
        let gw2: f64 = self
            .w
            .iter()
            .zip(&basis.sigma)
            .map(|(c, &s)| s * c.norm_sqr())
            .sum();
        0.5 * z2 + 0.5 * kappa * gw2
    }
}
