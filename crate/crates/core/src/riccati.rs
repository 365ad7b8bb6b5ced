//! Riccati feedback synthesis on the spectral truncation.
//!
//! Solves `A_nu^H P + P A_nu - P B B^H P + I = 0` for the stabilizing
//! `P = P^H >= 0` and the feedback gain `K = -B^H P`. The primary route
//! extracts the stable invariant subspace of the Hamiltonian matrix
//!
//! ```text
//! H = [ A_nu    -B B^H  ]
//!     [ -I      -A_nu^H ]
//! ```
//!
//! through an orthonormalized eigenbasis; a Newton-Kleinman iteration from
//! a stabilizing seed serves as the independent cross-check and polishing
//! pass.

use ndarray::{s, Array2};
use ndarray_linalg::{Eig, Inverse, SVD};

use crate::basis::FourierBasis;
use crate::error::{Error, Result};
use crate::linalg::{expm, frobenius, hermitian_part, matvec, spectral_abscissa};
use crate::params::PhysicalParams;
use crate::region::ControlRegion;
use crate::system::TruncatedSystem;
use crate::C64;

/// Residual accepted for a certified gain.
pub const ARE_RESIDUAL_TOL: f64 = 1e-8;

/// Riccati solution with its certification data.
#[derive(Debug, Clone)]
pub struct GainOperator {
    pub params: PhysicalParams,
    /// Effective shift used for synthesis (after any nudge).
    pub nu: f64,
    pub region: ControlRegion,
    pub basis: FourierBasis,
    /// `2M x 2M` Hermitian PSD Riccati solution.
    pub p: Array2<C64>,
    /// `M x 2M` feedback matrix `K = -B^H P`.
    pub k: Array2<C64>,
    /// Frobenius norm of `A^H P + P A - P B B^H P + I`.
    pub residual: f64,
    /// `max Re eig(A_nu - B B^H P)`, certified negative.
    pub closed_loop_abscissa: f64,
}

impl GainOperator {
    /// Control coefficients `v = K (z, v_mem)` for a coupled state given as
    /// separate coefficient slices.
    pub fn apply(&self, z: &[C64], w: &[C64]) -> Result<Vec<C64>> {
        let m = self.basis.len();
        if z.len() != m || w.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: z.len().min(w.len()) });
        }
        let mut y = vec![C64::new(0.0, 0.0); 2 * m];
        for i in 0..m {
            y[2 * i] = z[i];
            y[2 * i + 1] = w[i];
        }
        Ok(matvec(&self.k, &y))
    }

    pub fn modes(&self) -> &[[i32; 2]] {
        &self.basis.modes
    }
}

/// Enforces the conjugate-mode pairing `P[a, b] = conj(P[flip a, flip b])`
/// that any real-structured solution carries; removes rounding drift so
/// feedback applied to real fields stays real.
fn symmetrize_real_structure(p: &mut Array2<C64>, basis: &FourierBasis) {
    let flip = |idx: usize| -> usize {
        let (mode, comp) = (idx / 2, idx % 2);
        2 * basis.conj_index[mode] + comp
    };
    let n = p.nrows();
    let orig = p.clone();
    for r in 0..n {
        for c in 0..n {
            p[[r, c]] = 0.5 * (orig[[r, c]] + orig[[flip(r), flip(c)]].conj());
        }
    }
}

/// Frobenius norm of the Riccati residual for a candidate `P`.
pub fn are_residual(a: &Array2<C64>, bbh: &Array2<C64>, p: &Array2<C64>) -> f64 {
    let ah = a.t().mapv(|v| v.conj());
    let r = ah.dot(p) + p.dot(a) - p.dot(bbh).dot(p) + Array2::<C64>::eye(a.nrows());
    frobenius(&r)
}

/// Stable-invariant-subspace solution from the Hamiltonian matrix.
///
/// Errors with `NoStabilizingSolution` when the Hamiltonian has eigenvalues
/// within tolerance of the imaginary axis or the stable count is wrong, and
/// with `IllConditioned` when the subspace basis is numerically rank
/// deficient.
pub fn hamiltonian_solution(a: &Array2<C64>, bbh: &Array2<C64>) -> Result<Array2<C64>> {
    crate::linalg::init_blas();
    let n = a.nrows();
    let mut h = Array2::<C64>::zeros((2 * n, 2 * n));
    h.slice_mut(s![..n, ..n]).assign(a);
    h.slice_mut(s![..n, n..]).assign(&bbh.mapv(|v| -v));
    for i in 0..n {
        h[[n + i, i]] = C64::new(-1.0, 0.0);
    }
    let ah = a.t().mapv(|v: C64| v.conj());
    h.slice_mut(s![n.., n..]).assign(&ah.mapv(|v| -v));

    let (vals, vecs) = h.eig()?;
    let axis_tol = 1e-9;
    let mut stable_cols: Vec<usize> = Vec::new();
    for (i, l) in vals.iter().enumerate() {
        if l.re.abs() < axis_tol * (1.0 + l.norm()) {
            return Err(Error::NoStabilizingSolution(format!(
                "Hamiltonian eigenvalue {l} lies on the imaginary axis"
            )));
        }
        if l.re < 0.0 {
            stable_cols.push(i);
        }
    }
    if stable_cols.len() != n {
        return Err(Error::NoStabilizingSolution(format!(
            "expected {n} stable Hamiltonian eigenvalues, found {}",
            stable_cols.len()
        )));
    }

    let mut basis = Array2::<C64>::zeros((2 * n, n));
    for (c, &col) in stable_cols.iter().enumerate() {
        basis.column_mut(c).assign(&vecs.column(col));
    }
    // Orthonormalize the subspace basis before extracting the graph.
    let (q, _r) = ndarray_linalg::QR::qr(&basis)?;
    // Rebuild with standard layout: sliced singleton axes carry zero
    // strides, which the LAPACK wrappers reject.
    let u1 = Array2::from_shape_fn((n, n), |(r, c)| q[[r, c]]);
    let u2 = Array2::from_shape_fn((n, n), |(r, c)| q[[n + r, c]]);

    let (_, sv, _) = u1.svd(false, false)?;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin <= 0.0 || smax / smin > 1e12 {
        return Err(Error::IllConditioned { cond: smax / smin });
    }

    let p = u2.dot(&u1.inv()?);
    Ok(hermitian_part(&p))
}

/// Newton-Kleinman iteration: given a stabilizing seed, each step solves
/// the Lyapunov equation
/// `(A - B B^H P_j)^H P_{j+1} + P_{j+1} (A - B B^H P_j) = -(I + P_j B B^H P_j)`.
/// Quadratically convergent; returns the refined solution and the number of
/// iterations taken.
pub fn newton_kleinman(
    a: &Array2<C64>,
    bbh: &Array2<C64>,
    seed: &Array2<C64>,
    max_iter: usize,
) -> Result<(Array2<C64>, usize)> {
    let n = a.nrows();
    let eye = Array2::<C64>::eye(n);
    let mut p = hermitian_part(seed);
    for iter in 0..max_iter {
        let a_cl = a - &bbh.dot(&p);
        let q = &eye + &p.dot(bbh).dot(&p);
        let next = crate::linalg::solve_lyapunov(&a_cl, &q).map_err(|e| match e {
            Error::Linalg(msg) if msg.contains("stable") => Error::NoStabilizingSolution(format!(
                "Newton-Kleinman iterate lost stabilizing property: {msg}"
            )),
            other => other,
        })?;
        let delta = frobenius(&(&next - &p)) / frobenius(&next).max(1e-300);
        p = next;
        if delta < 1e-13 {
            return Ok((p, iter + 1));
        }
    }
    Ok((p, max_iter))
}

/// Full synthesis: Hamiltonian subspace solve, Newton-Kleinman polish,
/// structural symmetrization, and closed-loop certification.
pub fn solve_are(sys: &TruncatedSystem) -> Result<GainOperator> {
    let a = &sys.a_nu;
    let bbh = sys.bbh();

    let p_h = hamiltonian_solution(a, &bbh)?;
    let (mut p, _) = newton_kleinman(a, &bbh, &p_h, 30)?;
    symmetrize_real_structure(&mut p, &sys.basis);
    p = hermitian_part(&p);

    let residual = are_residual(a, &bbh, &p);
    let closed_loop_abscissa = spectral_abscissa(&(a - &bbh.dot(&p)))?;
    if closed_loop_abscissa >= 0.0 {
        return Err(Error::NoStabilizingSolution(format!(
            "closed-loop abscissa {closed_loop_abscissa} is not negative"
        )));
    }

    let bh = sys.b_mat.t().mapv(|v: C64| v.conj());
    let k = bh.dot(&p).mapv(|v| -v);

    Ok(GainOperator {
        params: sys.params,
        nu: sys.nu,
        region: sys.region,
        basis: sys.basis.clone(),
        p,
        k,
        residual,
        closed_loop_abscissa,
    })
}

/// Quadrature of the closed-loop cost
/// `J = int_0^T (||Y||^2 + ||B^H P Y||^2) dt` from `x0`, by composite
/// Simpson with the exact one-step propagator `exp(h A_cl)`. With `T` a few
/// multiples of the decay time this approximates the infinite-horizon cost,
/// which the Riccati solution predicts as `<P x0, x0>`.
pub fn closed_loop_cost_quadrature(
    sys: &TruncatedSystem,
    gain: &GainOperator,
    x0: &[C64],
    horizon: f64,
    steps: usize,
) -> Result<f64> {
    let n = sys.state_dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    let steps = steps + steps % 2; // Simpson needs an even interval count
    let h = horizon / steps as f64;
    let a_cl = &sys.a_nu - &sys.bbh().dot(&gain.p);
    let e = expm(&a_cl.mapv(|v| v * h));

    let bh_p = {
        let bh = sys.b_mat.t().mapv(|v: C64| v.conj());
        bh.dot(&gain.p)
    };
    let integrand = |y: &[C64]| -> f64 {
        let state: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        let ctrl: f64 = matvec(&bh_p, y).iter().map(|v| v.norm_sqr()).sum();
        state + ctrl
    };

    let mut y = x0.to_vec();
    let mut acc = integrand(&y);
    for j in 1..=steps {
        y = matvec(&e, &y);
        let w = if j == steps {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * integrand(&y);
    }
    Ok(acc * h / 3.0)
}

/// `<P x0, x0>` (real for Hermitian `P`).
pub fn predicted_cost(gain: &GainOperator, x0: &[C64]) -> f64 {
    let px = matvec(&gain.p, x0);
    px.iter().zip(x0).map(|(a, b)| (a * b.conj()).re).sum()
}
