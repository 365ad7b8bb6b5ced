//! Test-side oracles, kept independent of the library implementation paths
//! they are used to check.

use memstab_core::basis::FourierBasis;
use memstab_core::C64;
use ndarray::Array2;
use ndarray_linalg::Inverse;

/// Gauss-Legendre nodes/weights on `[a, b]` (Newton iteration on the
/// Legendre recurrence, written independently of the library's rule).
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..64 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            deriv = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / deriv;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        out.push((mid - half * x, w * half));
    }
    out
}

/// Quadrature of `(1/(2pi)^2) int_O e^{i m . x} dx` over the rectangle
/// `[a1, b1] x [a2, b2]` by a tensor Gauss-Legendre rule.
pub fn indicator_entry_quadrature(m: [i32; 2], rect: [f64; 4], pts: usize) -> C64 {
    let gx = gauss_legendre(pts, rect[0], rect[1]);
    let gy = gauss_legendre(pts, rect[2], rect[3]);
    let mut acc = C64::new(0.0, 0.0);
    for &(x, wx) in &gx {
        for &(y, wy) in &gy {
            let phase = m[0] as f64 * x + m[1] as f64 * y;
            acc += C64::new(0.0, phase).exp() * (wx * wy);
        }
    }
    acc / (4.0 * std::f64::consts::PI * std::f64::consts::PI)
}

/// Adaptive Runge-Kutta-Fehlberg 4(5) integrator for complex ODE systems.
pub fn rkf45<F>(f: F, mut y: Vec<C64>, t0: f64, t1: f64, tol: f64) -> Vec<C64>
where
    F: Fn(f64, &[C64]) -> Vec<C64>,
{
    const A: [f64; 6] = [0.0, 0.25, 3.0 / 8.0, 12.0 / 13.0, 1.0, 0.5];
    const B: [[f64; 5]; 6] = [
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [0.25, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
        [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
        [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
        [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
    ];
    const C4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2, 0.0];
    const C5: [f64; 6] = [
        16.0 / 135.0,
        0.0,
        6656.0 / 12825.0,
        28561.0 / 56430.0,
        -9.0 / 50.0,
        2.0 / 55.0,
    ];

    let mut t = t0;
    let mut h = (t1 - t0) / 100.0;
    let dim = y.len();
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        let mut k: Vec<Vec<C64>> = Vec::with_capacity(6);
        for s in 0..6 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                for i in 0..dim {
                    ys[i] += h * B[s][j] * kj[i];
                }
            }
            k.push(f(t + A[s] * h, &ys));
        }
        let mut y4 = y.clone();
        let mut y5 = y.clone();
        for (s, ks) in k.iter().enumerate() {
            for i in 0..dim {
                y4[i] += h * C4[s] * ks[i];
                y5[i] += h * C5[s] * ks[i];
            }
        }
        let err: f64 = y4
            .iter()
            .zip(&y5)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            .max(1e-300);
        if err <= tol * h.max(1e-12) {
            t += h;
            y = y5;
        }
        let factor = (0.84 * (tol * h / err).powf(0.25)).clamp(0.1, 4.0);
        h = (h * factor).min(t1 - t0);
        if h < 1e-14 {
            panic!("RKF45 step size underflow at t = {t}");
        }
    }
    y
}

/// Dense convolution-sum oracle for `(k*a) . grad b` over retained modes,
/// including the Biot-Savart factor, written from the definitions.
pub fn advection_oracle(a: &[C64], b: &[C64], basis: &FourierBasis) -> Vec<C64> {
    let i_unit = C64::new(0.0, 1.0);
    let mut out = vec![C64::new(0.0, 0.0); basis.len()];
    let norm = 1.0 / (2.0 * std::f64::consts::PI);
    for (ip, kp) in basis.modes.iter().enumerate() {
        // Velocity mode of the advecting field: u_hat = i (k2, -k1) a / |k|^2.
        let s = (kp[0] * kp[0] + kp[1] * kp[1]) as f64;
        let u = [
            i_unit * kp[1] as f64 * a[ip] / s,
            -i_unit * kp[0] as f64 * a[ip] / s,
        ];
        for (iq, kq) in basis.modes.iter().enumerate() {
            let sum = [kp[0] + kq[0], kp[1] + kq[1]];
            if let Some(ik) = basis.mode_index(sum) {
                let grad = [i_unit * kq[0] as f64 * b[iq], i_unit * kq[1] as f64 * b[iq]];
                out[ik] += (u[0] * grad[0] + u[1] * grad[1]) * norm;
            }
        }
    }
    out
}

/// Trapezoidal contour quadrature of the spectral projector over a circle
/// `center + radius e^{i theta}`, from dense resolvent inversions.
pub fn contour_quadrature(
    a: &Array2<C64>,
    center: f64,
    radius: f64,
    nodes: usize,
) -> Array2<C64> {
    let n = a.nrows();
    let eye = Array2::<C64>::eye(n);
    let mut acc = Array2::<C64>::zeros((n, n));
    for j in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / nodes as f64;
        let e = C64::new(0.0, theta).exp();
        let mu = C64::new(center, 0.0) + radius * e;
        let resolvent = (&eye * mu - a).inv().expect("resolvent inversion");
        acc = acc + resolvent * (e * radius / nodes as f64);
    }
    acc
}

/// Random Hermitian-symmetric (real-field) coefficient vector.
pub fn random_field(basis: &FourierBasis, seed: u64, scale: f64) -> Vec<C64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<C64> = (0..basis.len())
        .map(|_| C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
        .collect();
    basis.symmetrize(&mut w);
    w
}
