//! Closed-form spectral theory of the coupled principal operator.
//!
//! Per base eigenvalue `sigma` of the (minus) Laplacian, the coupled
//! `(z, v)` dynamics reduce to the 2x2 block
//!
//! ```text
//! M(sigma) = [ -eta sigma   -kappa sigma ]
//!            [          1        -lambda ]
//! ```
//!
//! whose eigenvalues are the roots of
//! `mu^2 + (lambda + eta sigma) mu + sigma (eta lambda + kappa) = 0`.
//! The slow branch `mu^+` accumulates at `-nu0 = -(kappa/eta + lambda)`,
//! the fast branch `mu^-` behaves like `-eta sigma`.

use crate::basis::FourierBasis;
use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::C64;

/// Relative tolerance factor flagging a defective (coincident) pair:
/// `|disc| < DEFECT_TOL_FACTOR * (lambda + eta sigma)^2`.
pub const DEFECT_TOL_FACTOR: f64 = 1e-9;

/// Both eigenvalues of the per-mode block, `(mu_plus, mu_minus)`.
///
/// `mu_plus` is the root with larger real part; for a conjugate pair the
/// tie is broken by larger imaginary part. Computed from the standard
/// cancellation-free quadratic formula so the slow branch stays accurate
/// for large `sigma`.
pub fn coupled_eigenvalues(sigma: f64, params: &PhysicalParams) -> (C64, C64) {
    let b = params.lambda + params.eta * sigma; // > 0
    let c = sigma * (params.eta * params.lambda + params.kappa); // >= 0
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        // Roots are real and negative. q = -(b + sqrt(disc))/2 is the far
        // root; the near root follows from the product c = r1 r2.
        let q = -(b + disc.sqrt()) / 2.0;
        let far = C64::new(q, 0.0);
        if c == 0.0 {
            // kappa = 0 limit with sigma (eta lambda) = 0 cannot happen for
            // valid params; guard for synthetic inputs.
            return (C64::new(0.0, 0.0), far);
        }
        let near = C64::new(c / q, 0.0);
        (near, far)
    } else {
        let im = (-disc).sqrt() / 2.0;
        let re = -b / 2.0;
        (C64::new(re, im), C64::new(re, -im))
    }
}

/// Interval of `sigma` on which the pair `mu^+/-` is non-real.
///
/// The discriminant `(lambda + eta sigma)^2 - 4 sigma (eta lambda + kappa)`
/// is a quadratic in `sigma`,
/// `eta^2 sigma^2 - 2 (eta lambda + 2 kappa) sigma + lambda^2`;
/// the eigenvalues are complex exactly for `sigma` strictly between its
/// roots. For `kappa -> 0` the window degenerates to the point
/// `lambda / eta`.
pub fn complex_window(params: &PhysicalParams) -> (f64, f64) {
    let (eta, kappa, lambda) = (params.eta, params.kappa, params.lambda);
    let half_b = eta * lambda + 2.0 * kappa;
    // Discriminant of the sigma-quadratic: 4 [ (eta lambda + 2 kappa)^2 - eta^2 lambda^2 ]
    //                                    = 16 kappa (kappa + eta lambda).
    let root = 2.0 * (kappa * (kappa + eta * lambda)).sqrt();
    let hi = (half_b + root) / (eta * eta);
    let lo = if hi > 0.0 {
        // lo * hi = lambda^2 / eta^2; product form avoids cancellation.
        (lambda * lambda) / (eta * eta) / hi
    } else {
        0.0
    };
    (lo, hi)
}

/// Discriminant of the characteristic quadratic at `sigma`.
pub fn discriminant(sigma: f64, params: &PhysicalParams) -> f64 {
    let b = params.lambda + params.eta * sigma;
    b * b - 4.0 * sigma * (params.eta * params.lambda + params.kappa)
}

/// True when the pair at `sigma` is within the defectiveness tolerance.
pub fn is_defective(sigma: f64, params: &PhysicalParams) -> bool {
    let b = params.lambda + params.eta * sigma;
    discriminant(sigma, params).abs() < DEFECT_TOL_FACTOR * b * b
}

/// Eigenvector coefficients `(1, 1/(mu + lambda))` for one branch.
///
/// Returns `None` when `mu + lambda` vanishes, which only happens in the
/// `kappa = 0` limit.
pub fn eigenvector_coeffs(mu: C64, lambda: f64) -> Option<[C64; 2]> {
    let d = mu + lambda;
    if d.norm() < 1e-300 {
        return None;
    }
    Some([C64::new(1.0, 0.0), d.inv()])
}

/// Per-mode eigen data: eigenvalues, eigenvector coefficients and (when the
/// pair is not defective) the bi-orthonormal adjoint coefficients.
#[derive(Debug, Clone)]
pub struct CoupledEigenpair {
    pub sigma: f64,
    pub mu_plus: C64,
    pub mu_minus: C64,
    pub defective: bool,
    pub zeta_plus: [C64; 2],
    pub zeta_minus: [C64; 2],
    /// Adjoint coefficients, normalized so that `<zeta^a, zeta^{*b}> = delta_ab`.
    /// Omitted for defective pairs.
    pub zeta_star_plus: Option<[C64; 2]>,
    pub zeta_star_minus: Option<[C64; 2]>,
}

impl CoupledEigenpair {
    pub fn adjoints(&self) -> Result<([C64; 2], [C64; 2])> {
        match (self.zeta_star_plus, self.zeta_star_minus) {
            (Some(p), Some(m)) => Ok((p, m)),
            _ => Err(Error::DefectivePair {
                sigma: self.sigma,
                disc: 0.0,
            }),
        }
    }
}

/// Builds the eigenfamily for one `sigma`.
///
/// The adjoint coefficients are `c (1, -kappa sigma / (lambda + conj mu))`
/// with normalization
/// `c = (lambda + conj mu)^2 / ((lambda + conj mu)^2 - kappa sigma)`. A pair
/// whose discriminant is within tolerance of zero is flagged defective and
/// carries no adjoint family (the normalization denominator degenerates).
pub fn eigenfamily(sigma: f64, params: &PhysicalParams) -> Result<CoupledEigenpair> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParams(format!("sigma must be positive, got {sigma}")));
    }
    let (mu_p, mu_m) = coupled_eigenvalues(sigma, params);
    let lambda = params.lambda;
    let kappa = params.kappa;

    let zeta_plus = eigenvector_coeffs(mu_p, lambda).ok_or_else(|| {
        Error::InvalidParams(format!(
            "eigenvector singular at sigma = {sigma}: mu + lambda = 0 (kappa = 0 limit)"
        ))
    })?;
    let zeta_minus = eigenvector_coeffs(mu_m, lambda).ok_or_else(|| {
        Error::InvalidParams(format!(
            "eigenvector singular at sigma = {sigma}: mu + lambda = 0 (kappa = 0 limit)"
        ))
    })?;

    let defective = is_defective(sigma, params);
    let (zeta_star_plus, zeta_star_minus) = if defective {
        (None, None)
    } else {
        let adj = |mu: C64| -> [C64; 2] {
            let d = lambda + mu.conj();
            let d2 = d * d;
            let c = d2 / (d2 - kappa * sigma);
            [c, c * (-kappa * sigma) / d]
        };
        (Some(adj(mu_p)), Some(adj(mu_m)))
    };

    Ok(CoupledEigenpair {
        sigma,
        mu_plus: mu_p,
        mu_minus: mu_m,
        defective,
        zeta_plus,
        zeta_minus,
        zeta_star_plus,
        zeta_star_minus,
    })
}

/// Eigen data for a whole family of base eigenvalues, either the torus
/// Fourier basis or a synthetic `sigma` list (the abstract bounded-domain
/// case).
#[derive(Debug, Clone)]
pub struct CoupledSpectrum {
    pub params: PhysicalParams,
    pub sigmas: Vec<f64>,
    pub basis: Option<FourierBasis>,
    pub pairs: Vec<CoupledEigenpair>,
}

impl CoupledSpectrum {
    pub fn from_basis(params: PhysicalParams, basis: FourierBasis) -> Result<Self> {
        let sigmas = basis.sigma.clone();
        let pairs = sigmas
            .iter()
            .map(|&s| eigenfamily(s, &params))
            .collect::<Result<Vec<_>>>()?;
        Ok(CoupledSpectrum { params, sigmas, basis: Some(basis), pairs })
    }

    pub fn from_sigmas(params: PhysicalParams, sigmas: Vec<f64>) -> Result<Self> {
        let pairs = sigmas
            .iter()
            .map(|&s| eigenfamily(s, &params))
            .collect::<Result<Vec<_>>>()?;
        Ok(CoupledSpectrum { params, sigmas, basis: None, pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Error if any retained pair is defective.
    pub fn require_nondefective(&self) -> Result<()> {
        for p in &self.pairs {
            if p.defective {
                return Err(Error::DefectivePair {
                    sigma: p.sigma,
                    disc: discriminant(p.sigma, &self.params),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(eta: f64, kappa: f64, lambda: f64) -> PhysicalParams {
        PhysicalParams { eta, kappa, lambda, nu: 0.0 }
    }

    #[test]
    fn kappa_zero_decouples_quadratic() {
        // (mu + lambda)(mu + eta sigma) = 0 at kappa = 0: roots {-lambda, -eta sigma}.
        let p = params(1.0, 0.0, 2.0);
        let (mu_p, mu_m) = coupled_eigenvalues(3.0, &p);
        assert_abs_diff_eq!(mu_p.re, -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mu_p.im, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mu_m.re, -3.0, epsilon = 1e-14);
    }

    #[test]
    fn unit_parameters_give_conjugate_pair() {
        let p = params(1.0, 1.0, 1.0);
        let (mu_p, mu_m) = coupled_eigenvalues(1.0, &p);
        assert_abs_diff_eq!(mu_p.re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mu_p.im, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mu_m.re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mu_m.im, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn slow_branch_accumulates_at_minus_nu0() {
        let p = params(1.0, 1.0, 1.0);
        let (mu_p, _) = coupled_eigenvalues(1e6, &p);
        // mu+ ~ -(eta lambda + kappa)/eta = -nu0 up to O(1/sigma).
        assert!((mu_p.re + 2.0).abs() < 3e-6, "mu+ = {mu_p}");
        assert_eq!(mu_p.im, 0.0);
    }

    #[test]
    fn window_unit_parameters() {
        let p = params(1.0, 1.0, 1.0);
        let (lo, hi) = complex_window(&p);
        let s2 = std::f64::consts::SQRT_2;
        assert_abs_diff_eq!(lo, 3.0 - 2.0 * s2, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 3.0 + 2.0 * s2, epsilon = 1e-12);
        // sigma = 1 lies inside and produces the non-real pair above.
        assert!(lo < 1.0 && 1.0 < hi);
        let (mu_p, _) = coupled_eigenvalues(1.0, &p);
        assert!(mu_p.im != 0.0);
    }

    #[test]
    fn window_degenerates_without_memory() {
        let p = params(1.0, 0.0, 1.0);
        let (lo, hi) = complex_window(&p);
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenfamily_biorthonormal_at_unit_sigma() {
        let p = params(1.0, 1.0, 1.0);
        let pair = eigenfamily(1.0, &p).unwrap();
        // zeta+ = (1, 1/(mu+ + lambda)) = (1, 1/i) = (1, -i).
        assert_abs_diff_eq!(pair.zeta_plus[1].re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(pair.zeta_plus[1].im, -1.0, epsilon = 1e-14);
        let (sp, sm) = pair.adjoints().unwrap();
        let inner = |a: [C64; 2], b: [C64; 2]| a[0] * b[0].conj() + a[1] * b[1].conj();
        assert!(inner(pair.zeta_plus, sp).norm() - 1.0 < 1e-12);
        assert!(inner(pair.zeta_plus, sm).norm() < 1e-12);
        assert!(inner(pair.zeta_minus, sp).norm() < 1e-12);
        assert!((inner(pair.zeta_minus, sm) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn eigenfamily_rejects_kappa_zero_singularity() {
        // kappa = 0 puts mu+ = -lambda, so (1, 1/(mu + lambda)) degenerates.
        let p = params(1.0, 0.0, 2.0);
        assert!(eigenfamily(3.0, &p).is_err());
        // The minus branch alone is still well-defined via the raw formula.
        let (_, mu_m) = coupled_eigenvalues(3.0, &p);
        let z = eigenvector_coeffs(mu_m, 2.0).unwrap();
        assert_abs_diff_eq!(z[1].re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(z[1].im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn vieta_residuals_random_sweep() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10_000 {
            let eta = rng.gen_range(0.05..5.0);
            let kappa = rng.gen_range(0.0..5.0);
            let lambda = rng.gen_range(0.05..5.0);
            let sigma = 10f64.powf(rng.gen_range(-2.0..6.0));
            let p = params(eta, kappa, lambda);
            let (mp, mm) = coupled_eigenvalues(sigma, &p);
            let sum = mp + mm + C64::new(lambda + eta * sigma, 0.0);
            let prod = mp * mm - C64::new(sigma * (eta * lambda + kappa), 0.0);
            let scale = 1.0 + sigma;
            assert!(sum.norm() < 1e-10 * scale, "vieta sum {sum} at sigma {sigma}");
            assert!(prod.norm() < 1e-10 * scale * scale, "vieta prod {prod}");
            assert!(mp.re < 0.0 && mm.re < 0.0);
        }
    }

    #[test]
    fn window_consistency_sampled() {
        let p = params(0.7, 1.3, 0.9);
        let (lo, hi) = complex_window(&p);
        for i in 0..1000 {
            let sigma = 1e-3 + (i as f64) * (2.0 * hi) / 1000.0;
            let (mu_p, _) = coupled_eigenvalues(sigma, &p);
            let inside = sigma > lo && sigma < hi;
            let margin = (sigma - lo).abs().min((sigma - hi).abs());
            if margin > 1e-9 {
                assert_eq!(mu_p.im != 0.0, inside, "sigma = {sigma}, window = ({lo}, {hi})");
            }
        }
    }
}
