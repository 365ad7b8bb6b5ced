//! Spectral split of the shifted operator, Hautus stabilizability check for
//! the control patch, and the spectral projection onto the unstable modes.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::region::{indicator_gram, ControlRegion};
use crate::spectral::CoupledSpectrum;
use crate::system::TruncatedSystem;
use crate::C64;

/// Tolerance below which `-nu` is considered to sit on an eigenvalue.
pub const SHIFT_TOL: f64 = 1e-6;

/// Default lower bound demanded of `||phi_k||^2_{L^2(O)}` on unstable modes.
pub const HAUTUS_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// One eigenvalue of the truncation, identified by mode index and branch.
#[derive(Debug, Clone, Copy)]
pub struct EigenRef {
    pub mode: usize,
    pub branch: Branch,
    pub mu: C64,
}

/// Partition of the retained eigenvalues by the sign of `Re(mu + nu)`.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    pub nu: f64,
    pub unstable: Vec<EigenRef>,
    pub stable: Vec<EigenRef>,
}

/// Splits the spectrum at the shift `nu`. Errors when `-nu` lies within
/// `tol` of some `Re mu` (use [`admissible_shift`] to nudge first).
pub fn spectral_split(spectrum: &CoupledSpectrum, nu: f64, tol: f64) -> Result<SpectralSplit> {
    let mut unstable = Vec::new();
    let mut stable = Vec::new();
    for (i, pair) in spectrum.pairs.iter().enumerate() {
        for (branch, mu) in [(Branch::Plus, pair.mu_plus), (Branch::Minus, pair.mu_minus)] {
            if (mu.re + nu).abs() < tol {
                return Err(Error::ShiftOnEigenvalue {
                    nu_neg: -nu,
                    re_mu: mu.re,
                    mode: i,
                    tol,
                });
            }
            let r = EigenRef { mode: i, branch, mu };
            if mu.re + nu >= 0.0 {
                unstable.push(r);
            } else {
                stable.push(r);
            }
        }
    }
    Ok(SpectralSplit { nu, unstable, stable })
}

/// Nudges `nu` upward by `1e-4 nu0` while `-nu` collides with an eigenvalue
/// real part, returning the effective shift and whether it moved.
pub fn admissible_shift(spectrum: &CoupledSpectrum, nu: f64) -> Result<(f64, bool)> {
    let nu0 = spectrum.params.nu0();
    let mut effective = nu;
    let mut nudged = false;
    for _ in 0..16 {
        match spectral_split(spectrum, effective, SHIFT_TOL) {
            Ok(_) => return Ok((effective, nudged)),
            Err(Error::ShiftOnEigenvalue { .. }) => {
                effective += 1e-4 * nu0;
                nudged = true;
                if effective >= nu0 {
                    return Err(Error::InvalidParams(format!(
                        "shift nudge pushed nu past the accumulation point nu0 = {nu0}"
                    )));
                }
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidParams(
        "could not find an admissible shift near the requested nu".into(),
    ))
}

/// Per-mode outcome of the Hautus verification.
#[derive(Debug, Clone)]
pub struct HautusMode {
    pub mode: usize,
    pub wavevector: Option<[i32; 2]>,
    pub mu_plus_shifted: C64,
    pub mu_minus_shifted: C64,
    /// `||phi_k||^2_{L^2(O)} = G[k, k]`.
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct HautusReport {
    pub nu: f64,
    pub threshold: f64,
    /// Modes with at least one shifted-unstable branch, with margins.
    pub unstable_modes: Vec<HautusMode>,
    pub min_margin: f64,
}

/// Verifies `Ker(mu I - A_nu^*) \cap Ker(B^*) = {0}` on the truncation: for
/// every shifted-unstable mode the patch must see the mode,
/// `G[k, k] >= threshold`. Positive-area rectangles always pass; the check
/// asserts rather than assumes it.
pub fn hautus_check(
    spectrum: &CoupledSpectrum,
    region: &ControlRegion,
    nu: f64,
    threshold: f64,
) -> Result<HautusReport> {
    let basis = spectrum.basis.as_ref().ok_or_else(|| {
        Error::InvalidParams("Hautus check requires a concrete Fourier basis".into())
    })?;
    let split = spectral_split(spectrum, nu, SHIFT_TOL)?;
    let gram = indicator_gram(region, basis);

    let mut modes: Vec<usize> = split.unstable.iter().map(|e| e.mode).collect();
    modes.sort_unstable();
    modes.dedup();

    let mut unstable_modes = Vec::with_capacity(modes.len());
    let mut offenders = Vec::new();
    let mut min_margin = f64::INFINITY;
    for &m in &modes {
        let margin = gram[[m, m]].re;
        min_margin = min_margin.min(margin);
        if margin < threshold {
            offenders.push(m);
        }
        let pair = &spectrum.pairs[m];
        unstable_modes.push(HautusMode {
            mode: m,
            wavevector: Some(basis.modes[m]),
            mu_plus_shifted: pair.mu_plus + nu,
            mu_minus_shifted: pair.mu_minus + nu,
            margin,
        });
    }
    if modes.is_empty() {
        min_margin = f64::INFINITY;
    }
    if !offenders.is_empty() {
        return Err(Error::HautusFail { offenders, min_margin, threshold });
    }
    Ok(HautusReport { nu, threshold, unstable_modes, min_margin })
}

/// Spectral projection onto the shifted-unstable eigenspace, assembled from
/// the bi-orthogonal family:
/// `pi_u = sum_{n in sigma_+} zeta_n <., zeta_n^*>` as a `2M x 2M` matrix.
/// Idempotent and commuting with `A_nu` on the truncation.
pub fn unstable_projector(spectrum: &CoupledSpectrum, split: &SpectralSplit) -> Result<Array2<C64>> {
    let m = spectrum.len();
    let mut pi = Array2::<C64>::zeros((2 * m, 2 * m));
    for e in &split.unstable {
        let pair = &spectrum.pairs[e.mode];
        if pair.defective {
            return Err(Error::DefectivePair { sigma: pair.sigma, disc: 0.0 });
        }
        let (zeta, star) = match e.branch {
            Branch::Plus => (pair.zeta_plus, pair.zeta_star_plus.unwrap()),
            Branch::Minus => (pair.zeta_minus, pair.zeta_star_minus.unwrap()),
        };
        let z = TruncatedSystem::z_index(e.mode);
        // Rank-one update zeta (zeta^*)^H confined to the mode's 2x2 block.
        for (r, zr) in zeta.iter().enumerate() {
            for (c, sc) in star.iter().enumerate() {
                pi[[z + r, z + c]] += zr * sc.conj();
            }
        }
    }
    Ok(pi)
}
