//! Riesz-basis expansion of coupled states in the bi-orthogonal
//! eigenfamilies: any `(z, v)` decomposes uniquely as
//! `sum_n a_n^+ zeta_n^+ + a_n^- zeta_n^-` with
//! `a_n^{+/-} = <(z, v), zeta_n^{*+/-}>`.

use crate::error::Result;
use crate::spectral::CoupledSpectrum;
use crate::C64;

/// Expansion coefficients per mode, `(a_plus, a_minus)`.
#[derive(Debug, Clone)]
pub struct RieszCoefficients {
    pub a_plus: Vec<C64>,
    pub a_minus: Vec<C64>,
}

fn inner(a: [C64; 2], b: [C64; 2]) -> C64 {
    a[0] * b[0].conj() + a[1] * b[1].conj()
}

/// Projects a coupled state onto the adjoint eigenfamily.
///
/// Fails with `DefectivePair` if any retained pair lacks adjoints.
pub fn riesz_expand(z: &[C64], w: &[C64], spectrum: &CoupledSpectrum) -> Result<RieszCoefficients> {
    spectrum.require_nondefective()?;
    let mut a_plus = Vec::with_capacity(spectrum.len());
    let mut a_minus = Vec::with_capacity(spectrum.len());
    for (i, pair) in spectrum.pairs.iter().enumerate() {
        let (sp, sm) = pair.adjoints()?;
        let y = [z[i], w[i]];
        a_plus.push(inner(y, sp));
        a_minus.push(inner(y, sm));
    }
    Ok(RieszCoefficients { a_plus, a_minus })
}

/// Reassembles the coupled state from its expansion coefficients.
pub fn riesz_reconstruct(
    coeffs: &RieszCoefficients,
    spectrum: &CoupledSpectrum,
) -> Result<(Vec<C64>, Vec<C64>)> {
    spectrum.require_nondefective()?;
    let mut z = Vec::with_capacity(spectrum.len());
    let mut w = Vec::with_capacity(spectrum.len());
    for (i, pair) in spectrum.pairs.iter().enumerate() {
        let ap = coeffs.a_plus[i];
        let am = coeffs.a_minus[i];
        z.push(ap * pair.zeta_plus[0] + am * pair.zeta_minus[0]);
        w.push(ap * pair.zeta_plus[1] + am * pair.zeta_minus[1]);
    }
    Ok((z, w))
}
