//! Stationary vorticity solve
//! `-(eta + kappa/lambda) Lap w_inf + (k*w_inf) . grad w_inf = f_inf`
//! by Picard iteration in spectral space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinear::PseudoSpectral;
use crate::params::PhysicalParams;
use crate::C64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteadyState {
    /// Spectral coefficients of the stationary vorticity.
    pub w_inf: Vec<C64>,
    /// Spectral coefficients of the forcing.
    pub f_inf: Vec<C64>,
    /// Final residual of the stationary equation.
    pub residual: f64,
    pub iterations: usize,
}

impl SteadyState {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Zero steady state for a basis of `m` modes.
    pub fn zero(m: usize) -> Self {
        SteadyState {
            w_inf: vec![C64::new(0.0, 0.0); m],
            f_inf: vec![C64::new(0.0, 0.0); m],
            residual: 0.0,
            iterations: 0,
        }
    }
}

/// Residual of the stationary equation for a candidate `w`:
/// `|| (eta + kappa/lambda) sigma w_hat + N(w)_hat - f_hat ||`.
pub fn steady_residual(
    w: &[C64],
    f_inf: &[C64],
    params: &PhysicalParams,
    ps: &PseudoSpectral,
) -> f64 {
    let visc = params.effective_viscosity();
    let nl = ps.nonlinear_term(w);
    ps.basis()
        .sigma
        .iter()
        .enumerate()
        .map(|(i, &s)| (visc * s * w[i] + nl[i] - f_inf[i]).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Picard iteration `w <- ((eta + kappa/lambda)(-Lap))^{-1} [f - (k*w).grad w]`,
/// started from zero. Small forcing keeps the map contractive; divergence is
/// reported as `NoConvergence`.
pub fn steady_solve(
    f_inf: &[C64],
    params: &PhysicalParams,
    ps: &PseudoSpectral,
    tol: f64,
    max_iter: usize,
) -> Result<SteadyState> {
    let basis = ps.basis();
    if f_inf.len() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), got: f_inf.len() });
    }
    let visc = params.effective_viscosity();
    let mut w = vec![C64::new(0.0, 0.0); basis.len()];
    let mut residual = steady_residual(&w, f_inf, params, ps);
    let f_scale = basis.l2_norm(f_inf).max(1e-300);
    for iter in 0..max_iter {
        if residual < tol {
            return Ok(SteadyState {
                w_inf: w,
                f_inf: f_inf.to_vec(),
                residual,
                iterations: iter,
            });
        }
        let nl = ps.nonlinear_term(&w);
        let mut next: Vec<C64> = basis
            .sigma
            .iter()
            .enumerate()
            .map(|(i, &s)| (f_inf[i] - nl[i]) / (visc * s))
            .collect();
        basis.symmetrize(&mut next);
        w = next;
        residual = steady_residual(&w, f_inf, params, ps);
        if !residual.is_finite() || residual > 1e6 * f_scale {
            return Err(Error::NoConvergence { iterations: iter + 1, last_residual: residual });
        }
    }
    if residual < tol {
        Ok(SteadyState { w_inf: w, f_inf: f_inf.to_vec(), residual, iterations: max_iter })
    } else {
        Err(Error::NoConvergence { iterations: max_iter, last_residual: residual })
    }
}
