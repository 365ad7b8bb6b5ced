//! Consistency of the coupled-ODE memory variable with the Volterra
//! integral it reformulates: `w(t) = int_0^t e^{-lambda(t-s)} z(s) ds`.

use crate::C64;

/// Trapezoidal quadrature of the Volterra integral over a uniformly sampled
/// history, via the exact-kernel recurrence
/// `T_{n+1} = e^{-lambda dt} (T_n + dt/2 z_n) + dt/2 z_{n+1}`
/// (identical to the composite trapezoid of `e^{-lambda(t-s)} z(s)`).
pub fn volterra_trapezoid(z_hist: &[Vec<C64>], lambda: f64, dt: f64) -> Vec<Vec<C64>> {
    let mut out = Vec::with_capacity(z_hist.len());
    if z_hist.is_empty() {
        return out;
    }
    let m = z_hist[0].len();
    let decay = (-lambda * dt).exp();
    let mut acc = vec![C64::new(0.0, 0.0); m];
    out.push(acc.clone());
    for n in 1..z_hist.len() {
        for i in 0..m {
            acc[i] = decay * (acc[i] + 0.5 * dt * z_hist[n - 1][i]) + 0.5 * dt * z_hist[n][i];
        }
        out.push(acc.clone());
    }
    out
}

/// Maximum deviation between the ODE-evolved memory history and the
/// trapezoidal quadrature of the integral, relative to the largest memory
/// norm over the horizon.
pub fn memory_consistency(
    z_hist: &[Vec<C64>],
    w_hist: &[Vec<C64>],
    lambda: f64,
    dt: f64,
) -> f64 {
    assert_eq!(z_hist.len(), w_hist.len(), "history length mismatch");
    let quad = volterra_trapezoid(z_hist, lambda, dt);
    let norm = |v: &[C64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let scale = w_hist.iter().map(|w| norm(w)).fold(0.0, f64::max).max(1e-300);
    quad.iter()
        .zip(w_hist)
        .map(|(q, w)| {
            let d: f64 = q
                .iter()
                .zip(w.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            d / scale
        })
        .fold(0.0, f64::max)
}
