//! Biot-Savart velocity recovery on the torus.
//!
//! With the Green function convention `Lap G = delta` (mean removed), the
//! kernel `k = (-dG/dx2, dG/dx1)` gives, mode by mode,
//! `u_hat(k) = i (k2, -k1) w_hat(k) / |k|^2`, so that the velocity is
//! spectrally divergence-free and `curl u = d1 u2 - d2 u1 = w`.

use crate::basis::FourierBasis;
use crate::C64;

/// Velocity coefficients `(u1_hat, u2_hat)` from vorticity coefficients.
pub fn biot_savart(w: &[C64], basis: &FourierBasis) -> (Vec<C64>, Vec<C64>) {
    let mut u1 = Vec::with_capacity(w.len());
    let mut u2 = Vec::with_capacity(w.len());
    for (i, k) in basis.modes.iter().enumerate() {
        let inv_s = 1.0 / basis.sigma[i];
        let iw = C64::new(0.0, 1.0) * w[i] * inv_s;
        u1.push(iw * k[1] as f64);
        u2.push(-iw * k[0] as f64);
    }
    (u1, u2)
}

/// Scalar curl `d1 u2 - d2 u1` of a velocity coefficient pair.
pub fn curl(u1: &[C64], u2: &[C64], basis: &FourierBasis) -> Vec<C64> {
    basis
        .modes
        .iter()
        .enumerate()
        .map(|(i, k)| C64::new(0.0, 1.0) * (k[0] as f64 * u2[i] - k[1] as f64 * u1[i]))
        .collect()
}

/// Largest `|k . u_hat(k)|` over retained modes. The Biot-Savart formula
/// carries no normal component, so this vanishes to rounding (a 1-ulp
/// association artifact of the two integer products is the only residue).
pub fn max_divergence(u1: &[C64], u2: &[C64], basis: &FourierBasis) -> f64 {
    basis
        .modes
        .iter()
        .enumerate()
        .map(|(i, k)| (k[0] as f64 * u1[i] + k[1] as f64 * u2[i]).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn single_mode_matches_streamfunction_oracle() {
        // w = sin x1 -> u = (0, -cos x1), from -Lap psi = w and
        // u = (d2 psi, -d1 psi).
        let basis = FourierBasis::new(2).unwrap();
        let mut w = vec![C64::new(0.0, 0.0); basis.len()];
        // sin x1 = (e^{ix1} - e^{-ix1}) / 2i, modes are (1/2pi) e^{ikx}.
        let p = basis.mode_index([1, 0]).unwrap();
        let m = basis.mode_index([-1, 0]).unwrap();
        let pi = std::f64::consts::PI;
        w[p] = C64::new(0.0, -pi);
        w[m] = C64::new(0.0, pi);

        let (u1, u2) = biot_savart(&w, &basis);

        // Oracle route: psi_hat = w_hat / sigma; u = (i k2 psi, -i k1 psi).
        for (i, k) in basis.modes.iter().enumerate() {
            let psi = w[i] / basis.sigma[i];
            let e1 = C64::new(0.0, k[1] as f64) * psi;
            let e2 = -C64::new(0.0, k[0] as f64) * psi;
            assert!((u1[i] - e1).norm() < 1e-15);
            assert!((u2[i] - e2).norm() < 1e-15);
        }
        // u2 = -cos x1 has coefficients -pi at k = (+-1, 0); u1 = 0.
        assert!(u1.iter().all(|c| c.norm() == 0.0));
        assert!((u2[p] - C64::new(-pi, 0.0)).norm() < 1e-14);
        assert!((u2[m] - C64::new(-pi, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn divergence_free_exactly() {
        let basis = FourierBasis::new(5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut w: Vec<C64> = (0..basis.len())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        basis.symmetrize(&mut w);
        let (u1, u2) = biot_savart(&w, &basis);
        let umax = u1.iter().chain(&u2).map(|c| c.norm()).fold(0.0, f64::max);
        let kmax = 2.0 * basis.cutoff as f64;
        assert!(max_divergence(&u1, &u2, &basis) <= f64::EPSILON * kmax * umax);
    }

    #[test]
    fn curl_round_trip_is_identity() {
        let basis = FourierBasis::new(6).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        let mut w: Vec<C64> = (0..basis.len())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        basis.symmetrize(&mut w);
        let (u1, u2) = biot_savart(&w, &basis);
        let back = curl(&u1, &u2, &basis);
        let err: f64 = w
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-14, "curl round trip error {err}");
    }
}
