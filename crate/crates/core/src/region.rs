//! Axis-aligned control patch on the torus and its Gram matrix in the
//! Fourier basis.

use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::basis::FourierBasis;
use crate::error::{Error, Result};
use crate::C64;

/// The control patch `O = [a1, b1] x [a2, b2]` inside `[0, 2pi]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlRegion {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl ControlRegion {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Self> {
        let r = ControlRegion { a: [a1, a2], b: [b1, b2] };
        for d in 0..2 {
            if !(0.0 <= r.a[d] && r.a[d] < r.b[d] && r.b[d] <= 2.0 * PI) {
                return Err(Error::InvalidParams(format!(
                    "control region axis {} violates 0 <= a < b <= 2pi: [{}, {}]",
                    d + 1,
                    r.a[d],
                    r.b[d]
                )));
            }
        }
        Ok(r)
    }

    /// Full torus.
    pub fn full() -> Self {
        ControlRegion { a: [0.0, 0.0], b: [2.0 * PI, 2.0 * PI] }
    }

    pub fn from_array(v: [f64; 4]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a[0], self.b[0], self.a[1], self.b[1]]
    }

    pub fn area(&self) -> f64 {
        (self.b[0] - self.a[0]) * (self.b[1] - self.a[1])
    }

    /// Pointwise indicator, with periodic coordinates reduced to `[0, 2pi)`.
    pub fn contains(&self, x: [f64; 2]) -> bool {
        (0..2).all(|d| {
            let xi = x[d].rem_euclid(2.0 * PI);
            self.a[d] <= xi && xi <= self.b[d]
        })
    }
}

/// One-dimensional factor `int_a^b e^{i m t} dt`.
fn interval_integral(m: i32, a: f64, b: f64) -> C64 {
    if m == 0 {
        C64::new(b - a, 0.0)
    } else {
        let im = C64::new(0.0, m as f64);
        ((im * b).exp() - (im * a).exp()) / im
    }
}

/// Gram matrix of the indicator: `G[k, n] = <chi_O phi_n, phi_k>`, in closed
/// form as a product of one-dimensional integrals:
/// `G[k, n] = (1/(2pi)^2) prod_d int_{a_d}^{b_d} e^{i (n_d - k_d) t} dt`.
///
/// `G` is Hermitian positive semidefinite with eigenvalues in `[0, 1]`, and
/// `G[k, k] = area / (2pi)^2`.
pub fn indicator_gram(region: &ControlRegion, basis: &FourierBasis) -> Array2<C64> {
    let m = basis.len();
    let norm = 1.0 / (4.0 * PI * PI);
    // Distinct 1D integrals indexed by the mode difference.
    let span = 2 * basis.cutoff as i32;
    let table = |a: f64, b: f64| -> Vec<C64> {
        (-span..=span).map(|d| interval_integral(d, a, b)).collect()
    };
    let t1 = table(region.a[0], region.b[0]);
    let t2 = table(region.a[1], region.b[1]);
    let lookup = |t: &[C64], d: i32| t[(d + span) as usize];

    let mut g = Array2::zeros((m, m));
    for (r, k) in basis.modes.iter().enumerate() {
        for (c, n) in basis.modes.iter().enumerate() {
            let d1 = n[0] - k[0];
            let d2 = n[1] - k[1];
            g[[r, c]] = lookup(&t1, d1) * lookup(&t2, d2) * norm;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray_linalg::Eigh;

    #[test]
    fn degenerate_region_rejected() {
        assert!(ControlRegion::new(1.0, 1.0, 0.0, 2.0).is_err());
        assert!(ControlRegion::new(-0.1, 1.0, 0.0, 2.0).is_err());
        assert!(ControlRegion::new(0.0, 7.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn full_torus_gram_is_identity() {
        let basis = FourierBasis::new(3).unwrap();
        let g = indicator_gram(&ControlRegion::full(), &basis);
        for r in 0..basis.len() {
            for c in 0..basis.len() {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((g[[r, c]] - expect).norm() < 1e-13, "G[{r},{c}] = {}", g[[r, c]]);
            }
        }
    }

    #[test]
    fn diagonal_is_relative_area() {
        // O = [0, pi] x [0, 2pi]: G[k, k] = area / (4 pi^2) = 1/2.
        let basis = FourierBasis::new(4).unwrap();
        let region = ControlRegion::new(0.0, PI, 0.0, 2.0 * PI).unwrap();
        let g = indicator_gram(&region, &basis);
        for k in 0..basis.len() {
            assert!((g[[k, k]].re - 0.5).abs() < 1e-13);
            assert!(g[[k, k]].im.abs() < 1e-15);
        }
    }

    #[test]
    fn gram_is_hermitian_psd_with_spectrum_in_unit_interval() {
        let basis = FourierBasis::new(4).unwrap();
        let region = ControlRegion::new(0.3, 2.1, 1.0, 5.5).unwrap();
        let g = indicator_gram(&region, &basis);
        let m = basis.len();
        for r in 0..m {
            for c in 0..m {
                assert!((g[[r, c]] - g[[c, r]].conj()).norm() < 1e-14);
            }
        }
        let (evals, _) = g.eigh(ndarray_linalg::UPLO::Lower).unwrap();
        for &e in evals.iter() {
            assert!(e > -1e-12 && e < 1.0 + 1e-12, "Gram eigenvalue {e} outside [0, 1]");
        }
    }
}
