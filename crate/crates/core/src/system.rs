//! Finite spectral truncation of the shifted pair `(A_nu, B)`.
//!
//! State ordering is interleaved: entries `2i` and `2i + 1` hold the `z` and
//! `v` coefficients of mode `i`. Before control coupling `A_nu` is
//! block-diagonal with per-mode blocks
//! `[[-eta sigma + nu, -kappa sigma], [1, -lambda + nu]]`, so its
//! eigenvalues are `{mu_k^+/- + nu}`.

use ndarray::Array2;

use crate::basis::FourierBasis;
use crate::error::Result;
use crate::params::PhysicalParams;
use crate::region::{indicator_gram, ControlRegion};
use crate::C64;

#[derive(Debug, Clone)]
pub struct TruncatedSystem {
    pub params: PhysicalParams,
    pub basis: FourierBasis,
    pub region: ControlRegion,
    pub nu: f64,
    /// `2M x 2M` shifted generator.
    pub a_nu: Array2<C64>,
    /// `2M x M` control embedding into the `z` components through the
    /// indicator Gram matrix.
    pub b_mat: Array2<C64>,
    /// `M x M` Hermitian Gram matrix `G[k, n] = <chi_O phi_n, phi_k>`.
    pub gram: Array2<C64>,
}

impl TruncatedSystem {
    pub fn assemble(
        params: &PhysicalParams,
        basis: &FourierBasis,
        region: &ControlRegion,
        nu: f64,
    ) -> Result<Self> {
        let m = basis.len();
        let gram = indicator_gram(region, basis);

        let mut a_nu = Array2::<C64>::zeros((2 * m, 2 * m));
        for (i, &sigma) in basis.sigma.iter().enumerate() {
            let z = 2 * i;
            let w = z + 1;
            a_nu[[z, z]] = C64::new(-params.eta * sigma + nu, 0.0);
            a_nu[[z, w]] = C64::new(-params.kappa * sigma, 0.0);
            a_nu[[w, z]] = C64::new(1.0, 0.0);
            a_nu[[w, w]] = C64::new(-params.lambda + nu, 0.0);
        }

        let mut b_mat = Array2::<C64>::zeros((2 * m, m));
        for i in 0..m {
            for n in 0..m {
                b_mat[[2 * i, n]] = gram[[i, n]];
            }
        }

        Ok(TruncatedSystem {
            params: *params,
            basis: basis.clone(),
            region: *region,
            nu,
            a_nu,
            b_mat,
            gram,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.a_nu.nrows()
    }

    pub fn control_dim(&self) -> usize {
        self.b_mat.ncols()
    }

    /// `B B^H`, the control weight appearing in the Riccati equation.
    pub fn bbh(&self) -> Array2<C64> {
        let bh = self.b_mat.t().mapv(|v| v.conj());
        self.b_mat.dot(&bh)
    }

    /// Index of the `z` (respectively `v`) entry of mode `i`.
    pub fn z_index(i: usize) -> usize {
        2 * i
    }

    pub fn w_index(i: usize) -> usize {
        2 * i + 1
    }
}
