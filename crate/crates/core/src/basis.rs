//! Mean-zero Fourier basis on the torus `[0, 2pi]^2` and the forward /
//! inverse transforms between retained-mode coefficients and grid values.
//!
//! Modes are `phi_k(x) = (1/(2pi)) exp(i k.x)` for integer wavevectors
//! `k != 0`, orthonormal in `L^2`. A real field has Hermitian-symmetric
//! coefficients `c(-k) = conj(c(k))`, and `-Lap phi_k = |k|^2 phi_k`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::C64;

/// Basis normalization: `phi_k = NORMALIZATION * exp(i k.x)`.
pub const NORMALIZATION: f64 = 1.0 / (2.0 * PI);

/// Retained wavevectors `|k1|, |k2| <= cutoff`, zero mode excluded, sorted
/// by nondecreasing `sigma = |k|^2` with lexicographic `(k1, k2)` tie-break.
/// The set is closed under `k -> -k`.
#[derive(Debug, Clone)]
pub struct FourierBasis {
    pub cutoff: usize,
    pub modes: Vec<[i32; 2]>,
    pub sigma: Vec<f64>,
    /// Index of `-k` for each mode (Hermitian partner).
    pub conj_index: Vec<usize>,
    index: BTreeMap<(i32, i32), usize>,
}

impl FourierBasis {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidParams("cutoff must be at least 1".into()));
        }
        let n = cutoff as i32;
        let mut modes: Vec<[i32; 2]> = Vec::new();
        for k1 in -n..=n {
            for k2 in -n..=n {
                if k1 == 0 && k2 == 0 {
                    continue;
                }
                modes.push([k1, k2]);
            }
        }
        modes.sort_by(|a, b| {
            let sa = a[0] * a[0] + a[1] * a[1];
            let sb = b[0] * b[0] + b[1] * b[1];
            sa.cmp(&sb).then(a[0].cmp(&b[0])).then(a[1].cmp(&b[1]))
        });
        let sigma: Vec<f64> = modes
            .iter()
            .map(|k| (k[0] * k[0] + k[1] * k[1]) as f64)
            .collect();
        let index: BTreeMap<(i32, i32), usize> =
            modes.iter().enumerate().map(|(i, k)| ((k[0], k[1]), i)).collect();
        let conj_index = modes
            .iter()
            .map(|k| index[&(-k[0], -k[1])])
            .collect();
        Ok(FourierBasis { cutoff, modes, sigma, conj_index, index })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn mode_index(&self, k: [i32; 2]) -> Option<usize> {
        self.index.get(&(k[0], k[1])).copied()
    }

    /// Value of the unit-normalized mode `phi_k` at a point.
    pub fn mode_value(k: [i32; 2], x: [f64; 2]) -> C64 {
        let phase = k[0] as f64 * x[0] + k[1] as f64 * x[1];
        C64::new(0.0, phase).exp() * NORMALIZATION
    }

    /// Smallest grid size on which the retained modes are exactly
    /// representable together with their quadratic products' dealiased range.
    pub fn min_grid(&self) -> usize {
        2 * self.cutoff + 2
    }

    /// Enforces `c(-k) = conj(c(k))` by averaging Hermitian partners.
    pub fn symmetrize(&self, coeffs: &mut [C64]) {
        for i in 0..coeffs.len() {
            let j = self.conj_index[i];
            if j > i {
                let avg = 0.5 * (coeffs[i] + coeffs[j].conj());
                coeffs[i] = avg;
                coeffs[j] = avg.conj();
            } else if j == i {
                coeffs[i] = C64::new(coeffs[i].re, 0.0);
            }
        }
    }

    /// Largest Hermitian-symmetry violation `|c(-k) - conj(c(k))|`.
    pub fn hermitian_defect(&self, coeffs: &[C64]) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (coeffs[self.conj_index[i]] - c.conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `L^2` norm of a coefficient vector (the basis is orthonormal).
    pub fn l2_norm(&self, coeffs: &[C64]) -> f64 {
        coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Sobolev norm with weight `(1 + |k|^2)^s`.
    pub fn sobolev_norm(&self, coeffs: &[C64], s: f64) -> f64 {
        coeffs
            .iter()
            .zip(&self.sigma)
            .map(|(c, &sig)| (1.0 + sig).powf(s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Seminorm `(sum |k|^2 |c_k|^2)^(1/2)`, i.e. the `L^2` norm of the gradient.
    pub fn grad_norm(&self, coeffs: &[C64]) -> f64 {
        coeffs
            .iter()
            .zip(&self.sigma)
            .map(|(c, &sig)| sig * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Forward/inverse transform pair between retained-mode coefficients and a
/// `grid x grid` point grid, exact on band-limited fields.
pub struct SpectralTransform {
    pub basis: FourierBasis,
    pub grid: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl SpectralTransform {
    pub fn new(basis: FourierBasis, grid: usize) -> Result<Self> {
        let min = basis.min_grid();
        if grid < min {
            return Err(Error::GridTooCoarse { grid, cutoff: basis.cutoff, min });
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid);
        let inv = planner.plan_fft_inverse(grid);
        Ok(SpectralTransform { basis, grid, fwd, inv })
    }

    fn wrap(&self, k: i32) -> usize {
        k.rem_euclid(self.grid as i32) as usize
    }

    /// Coefficients -> grid values (row index = x1, column index = x2, both
    /// sampled at `2 pi j / grid`).
    pub fn to_grid(&self, coeffs: &[C64]) -> Vec<C64> {
        let g = self.grid;
        let mut data = vec![Complex64::new(0.0, 0.0); g * g];
        for (i, k) in self.basis.modes.iter().enumerate() {
            let r = self.wrap(k[0]);
            let c = self.wrap(k[1]);
            data[r * g + c] = coeffs[i];
        }
        self.fft2(&mut data, false);
        for v in &mut data {
            *v *= NORMALIZATION;
        }
        data
    }

    /// Grid values -> retained coefficients (band-limited projection).
    pub fn to_coeffs(&self, values: &[C64]) -> Vec<C64> {
        let g = self.grid;
        assert_eq!(values.len(), g * g, "grid size mismatch");
        let mut data = values.to_vec();
        self.fft2(&mut data, true);
        let scale = 2.0 * PI / (g * g) as f64;
        self.basis
            .modes
            .iter()
            .map(|k| data[self.wrap(k[0]) * g + self.wrap(k[1])] * scale)
            .collect()
    }

    /// Unnormalized 2D FFT in place (forward or inverse).
    fn fft2(&self, data: &mut [C64], forward: bool) {
        let g = self.grid;
        let plan = if forward { &self.fwd } else { &self.inv };
        // Rows (contiguous).
        for row in data.chunks_exact_mut(g) {
            plan.process(row);
        }
        // Columns via transpose round trip.
        let mut col = vec![Complex64::new(0.0, 0.0); g];
        for c in 0..g {
            for r in 0..g {
                col[r] = data[r * g + c];
            }
            plan.process(&mut col);
            for r in 0..g {
                data[r * g + c] = col[r];
            }
        }
    }
}
