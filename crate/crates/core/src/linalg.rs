//! Dense complex linear-algebra helpers shared by synthesis and
//! certification: Hermitian projections, spectral abscissa, a
//! scaling-and-squaring matrix exponential, and a diagonalization-based
//! Lyapunov solver.

use std::sync::Once;

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Inverse, OperationNorm};

use crate::error::{Error, Result};
use crate::C64;

extern "C" {
    fn openblas_set_num_threads(num: core::ffi::c_int);
}

static BLAS_INIT: Once = Once::new();

/// Pins OpenBLAS to one worker: its per-thread buffers overflow the small
/// default test-thread stacks, and run-level parallelism already happens
/// across sweep points.
pub fn init_blas() {
    BLAS_INIT.call_once(|| unsafe { openblas_set_num_threads(1) });
}

pub fn frobenius(a: &Array2<C64>) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian part `(A + A^H)/2`.
pub fn hermitian_part(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    let mut h = Array2::zeros((n, n));
    for r in 0..n {
        for c in 0..n {
            h[[r, c]] = 0.5 * (a[[r, c]] + a[[c, r]].conj());
        }
    }
    h
}

pub fn matvec(a: &Array2<C64>, x: &[C64]) -> Vec<C64> {
    a.rows()
        .into_iter()
        .map(|row| row.iter().zip(x).map(|(m, v)| m * v).sum())
        .collect()
}

/// Largest real part among the eigenvalues of `a`.
pub fn spectral_abscissa(a: &Array2<C64>) -> Result<f64> {
    init_blas();
    let (vals, _) = a.eig()?;
    Ok(vals.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max))
}

pub fn eigenvalues(a: &Array2<C64>) -> Result<Array1<C64>> {
    init_blas();
    let (vals, _) = a.eig()?;
    Ok(vals)
}

/// Matrix exponential `exp(a)` by Pade(13) scaling and squaring.
pub fn expm(a: &Array2<C64>) -> Array2<C64> {
    init_blas();
    let n = a.nrows();
    let norm = a.opnorm_one().unwrap_or_else(|_| frobenius(a));
    // Scale so the Pade approximant operates below its accuracy radius.
    let theta13 = 5.371920351148152;
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.mapv(|v| v / C64::new(2f64.powi(s), 0.0));

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let id = Array2::<C64>::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let u_inner = &a6 * C64::from(B[13]) + &a4 * C64::from(B[11]) + &a2 * C64::from(B[9]);
    let u = a.dot(
        &(a6.dot(&u_inner)
            + &a6 * C64::from(B[7])
            + &a4 * C64::from(B[5])
            + &a2 * C64::from(B[3])
            + &id * C64::from(B[1])),
    );
    let v_inner = &a6 * C64::from(B[12]) + &a4 * C64::from(B[10]) + &a2 * C64::from(B[8]);
    let v = a6.dot(&v_inner)
        + &a6 * C64::from(B[6])
        + &a4 * C64::from(B[4])
        + &a2 * C64::from(B[2])
        + &id * C64::from(B[0]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.inv().expect("Pade denominator is nonsingular").dot(&p);
    for _ in 0..s {
        r = r.dot(&r);
    }
    r
}

/// Solves the continuous Lyapunov equation `A^H X + X A = -Q` by
/// diagonalizing `A`; one residual-correction pass absorbs conditioning
/// loss from clustered eigenvalues.
///
/// Requires `A` stable (so that `conj(l_i) + l_j != 0`).
pub fn solve_lyapunov(a: &Array2<C64>, q: &Array2<C64>) -> Result<Array2<C64>> {
    init_blas();
    let n = a.nrows();
    if q.nrows() != n || q.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: q.nrows() });
    }
    let (vals, vecs) = a.eig()?;
    for &l in vals.iter() {
        if l.re >= 0.0 {
            return Err(Error::Linalg(format!(
                "Lyapunov solve requires a stable matrix; eigenvalue {l} has Re >= 0"
            )));
        }
    }
    let vinv = vecs.inv()?;

    let solve_once = |rhs: &Array2<C64>| -> Array2<C64> {
        // A = V L V^{-1}; with Y = V^H X V the equation reads
        // conj(L) Y + Y L = V^H (-RHS) V, solved entrywise.
        let c = vecs.t().mapv(|v| v.conj()).dot(rhs).dot(&vecs);
        let mut y = Array2::<C64>::zeros((n, n));
        for r in 0..n {
            for col in 0..n {
                y[[r, col]] = -c[[r, col]] / (vals[r].conj() + vals[col]);
            }
        }
        let vinv_h = vinv.t().mapv(|v| v.conj());
        vinv_h.dot(&y).dot(&vinv)
    };

    let mut x = solve_once(q);
    // Residual correction: R = A^H X + X A + Q, then X -= solve(R).
    let ah = a.t().mapv(|v| v.conj());
    let resid = ah.dot(&x) + x.dot(a) + q;
    if frobenius(&resid) > 1e-14 * (1.0 + frobenius(q)) {
        let dx = solve_once(&resid);
        x += &dx;
    }
    Ok(hermitian_part(&x))
}
