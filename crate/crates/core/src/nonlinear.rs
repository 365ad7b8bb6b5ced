//! Pseudospectral advection terms.
//!
//! `advect(a, b)` computes the spectral coefficients of `(k*a) . grad b`:
//! the advecting velocity comes from the vorticity field `a` via
//! Biot-Savart, the product is formed pointwise on the grid, and the result
//! is projected back onto the retained modes (with the 2/3-rule mask when
//! dealiasing is on). The mean mode never enters: it is not part of the
//! retained set.

use std::f64::consts::PI;

use crate::basis::{FourierBasis, SpectralTransform};
use crate::biot_savart::biot_savart;
use crate::error::Result;
use crate::C64;

pub struct PseudoSpectral {
    pub transform: SpectralTransform,
    pub dealias: bool,
    /// Per-mode 2/3-rule mask (true = keep).
    mask: Vec<bool>,
}

impl PseudoSpectral {
    pub fn new(basis: FourierBasis, grid: usize, dealias: bool) -> Result<Self> {
        let keep = (2 * basis.cutoff) / 3;
        let mask = basis
            .modes
            .iter()
            .map(|k| k[0].unsigned_abs() as usize <= keep && k[1].unsigned_abs() as usize <= keep)
            .collect();
        let transform = SpectralTransform::new(basis, grid)?;
        Ok(PseudoSpectral { transform, dealias, mask })
    }

    pub fn basis(&self) -> &FourierBasis {
        &self.transform.basis
    }

    /// Zeroes the top third of retained wavenumbers.
    pub fn apply_mask(&self, coeffs: &mut [C64]) {
        for (c, &keep) in coeffs.iter_mut().zip(&self.mask) {
            if !keep {
                *c = C64::new(0.0, 0.0);
            }
        }
    }

    /// Spectral coefficients of `(k*a) . grad b`.
    pub fn advect(&self, a: &[C64], b: &[C64]) -> Vec<C64> {
        let basis = self.basis();
        let (u1, u2) = biot_savart(a, basis);
        let mut b1 = Vec::with_capacity(b.len());
        let mut b2 = Vec::with_capacity(b.len());
        for (i, k) in basis.modes.iter().enumerate() {
            b1.push(C64::new(0.0, k[0] as f64) * b[i]);
            b2.push(C64::new(0.0, k[1] as f64) * b[i]);
        }

        let gu1 = self.transform.to_grid(&u1);
        let gu2 = self.transform.to_grid(&u2);
        let gb1 = self.transform.to_grid(&b1);
        let gb2 = self.transform.to_grid(&b2);

        let mut prod = vec![C64::new(0.0, 0.0); gu1.len()];
        for i in 0..prod.len() {
            prod[i] = gu1[i] * gb1[i] + gu2[i] * gb2[i];
        }
        let mut out = self.transform.to_coeffs(&prod);
        if self.dealias {
            self.apply_mask(&mut out);
        }
        out
    }

    /// Nonlinear term `(k*w) . grad w`.
    pub fn nonlinear_term(&self, w: &[C64]) -> Vec<C64> {
        self.advect(w, w)
    }

    /// Linearization around a steady vorticity:
    /// `(k*z) . grad w_inf + (k*w_inf) . grad z`.
    pub fn linearized_terms(&self, z: &[C64], w_inf: &[C64]) -> Vec<C64> {
        let mut a = self.advect(z, w_inf);
        let b = self.advect(w_inf, z);
        for (x, y) in a.iter_mut().zip(&b) {
            *x += y;
        }
        a
    }
}

/// Dense convolution-sum evaluation of `(k*a) . grad b`, quadratic in the
/// mode count. Retained as an exactness oracle for the pseudospectral route:
/// products of unit-norm modes satisfy `phi_p phi_q = (1/(2pi)) phi_{p+q}`.
pub fn advect_convolution(a: &[C64], b: &[C64], basis: &FourierBasis) -> Vec<C64> {
    let (u1, u2) = biot_savart(a, basis);
    let mut out = vec![C64::new(0.0, 0.0); basis.len()];
    let norm = 1.0 / (2.0 * PI);
    for (ip, kp) in basis.modes.iter().enumerate() {
        for (iq, kq) in basis.modes.iter().enumerate() {
            let k = [kp[0] + kq[0], kp[1] + kq[1]];
            if let Some(ik) = basis.mode_index(k) {
                let grad = C64::new(0.0, kq[0] as f64) * b[iq] * u1[ip]
                    + C64::new(0.0, kq[1] as f64) * b[iq] * u2[ip];
                out[ik] += grad * norm;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_real_field(basis: &FourierBasis, seed: u64, scale: f64) -> Vec<C64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut w: Vec<C64> = (0..basis.len())
            .map(|_| C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
            .collect();
        basis.symmetrize(&mut w);
        w
    }

    fn sin_x1(basis: &FourierBasis) -> Vec<C64> {
        let mut w = vec![C64::new(0.0, 0.0); basis.len()];
        let pi = std::f64::consts::PI;
        w[basis.mode_index([1, 0]).unwrap()] = C64::new(0.0, -pi);
        w[basis.mode_index([-1, 0]).unwrap()] = C64::new(0.0, pi);
        w
    }

    #[test]
    fn single_mode_vorticity_is_steady() {
        // u . grad w vanishes identically for w = sin x1.
        let basis = FourierBasis::new(4).unwrap();
        let w = sin_x1(&basis);
        // Convolution oracle.
        let conv = advect_convolution(&w, &w, &basis);
        assert!(conv.iter().all(|c| c.norm() < 1e-14));
        // Pseudospectral route.
        let ps = PseudoSpectral::new(basis, 16, false).unwrap();
        let out = ps.nonlinear_term(&w);
        assert!(out.iter().all(|c| c.norm() < 1e-13));
    }

    #[test]
    fn matches_convolution_oracle_when_fully_resolved() {
        // Grid 3N+2 resolves all quadratic products of cutoff-N fields, so
        // the undealiased pseudospectral product is exact.
        let basis = FourierBasis::new(4).unwrap();
        let w = random_real_field(&basis, 21, 0.5);
        let oracle = advect_convolution(&w, &w, &basis);
        let ps = PseudoSpectral::new(basis.clone(), 14, false).unwrap();
        let got = ps.nonlinear_term(&w);
        let err: f64 = oracle
            .iter()
            .zip(&got)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "pseudospectral vs convolution error {err}");
    }

    #[test]
    fn advection_is_skew_symmetric() {
        // <(u . grad) w, w> = 0 for divergence-free u, fully resolved.
        let basis = FourierBasis::new(4).unwrap();
        let w = random_real_field(&basis, 33, 0.3);
        let ps = PseudoSpectral::new(basis.clone(), 16, false).unwrap();
        let nl = ps.nonlinear_term(&w);
        let inner: C64 = nl.iter().zip(&w).map(|(a, b)| a * b.conj()).sum();
        assert!(inner.norm() < 1e-10, "skew-symmetry defect {inner}");
    }

    #[test]
    fn linearized_terms_vanish_for_zero_steady_state() {
        let basis = FourierBasis::new(3).unwrap();
        let z = random_real_field(&basis, 4, 0.5);
        let zero = vec![C64::new(0.0, 0.0); basis.len()];
        let ps = PseudoSpectral::new(basis, 8, false).unwrap();
        let out = ps.linearized_terms(&z, &zero);
        assert!(out.iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn linearized_terms_vanish_on_shared_single_mode() {
        // z = w_inf = sin x1: both advection pairings vanish.
        let basis = FourierBasis::new(3).unwrap();
        let w = sin_x1(&basis);
        let oracle: Vec<C64> = {
            let mut a = advect_convolution(&w, &w, &basis);
            let b = advect_convolution(&w, &w, &basis);
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            a
        };
        assert!(oracle.iter().all(|c| c.norm() < 1e-14));
        let ps = PseudoSpectral::new(basis, 8, false).unwrap();
        let out = ps.linearized_terms(&w, &w);
        assert!(out.iter().all(|c| c.norm() < 1e-13));
    }

    #[test]
    fn linearized_terms_additive_in_z() {
        let basis = FourierBasis::new(3).unwrap();
        let z1 = random_real_field(&basis, 5, 0.4);
        let z2 = random_real_field(&basis, 6, 0.4);
        let w_inf = random_real_field(&basis, 7, 0.2);
        let ps = PseudoSpectral::new(basis.clone(), 10, false).unwrap();

        let sum_in: Vec<C64> = z1.iter().zip(&z2).map(|(a, b)| a + b).collect();
        let lhs = ps.linearized_terms(&sum_in, &w_inf);
        let r1 = ps.linearized_terms(&z1, &w_inf);
        let r2 = ps.linearized_terms(&z2, &w_inf);
        let err: f64 = lhs
            .iter()
            .zip(r1.iter().zip(&r2))
            .map(|(l, (a, b))| (l - (a + b)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "bilinearity defect {err}");
    }

    #[test]
    fn dealias_mask_zeroes_top_third() {
        let basis = FourierBasis::new(6).unwrap();
        let ps = PseudoSpectral::new(basis.clone(), 14, true).unwrap();
        let mut c: Vec<C64> = (0..basis.len()).map(|_| C64::new(1.0, 0.0)).collect();
        ps.apply_mask(&mut c);
        for (i, k) in basis.modes.iter().enumerate() {
            let kept = k[0].abs() <= 4 && k[1].abs() <= 4;
            assert_eq!(c[i].norm() > 0.0, kept, "mode {k:?}");
        }
    }
}
