//! JSON exchange format for synthesized gains, consumed by the simulator.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::basis::FourierBasis;
use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::region::ControlRegion;
use crate::riccati::GainOperator;
use crate::C64;

/// On-disk gain record. Complex matrices are stored row-major as
/// `[re, im]` pairs.
#[derive(Debug, Serialize, Deserialize)]
pub struct GainFile {
    pub eta: f64,
    pub kappa: f64,
    pub lambda: f64,
    /// Shift the synthesis was run at (after any admissibility nudge).
    pub nu: f64,
    pub cutoff: usize,
    /// `[a1, b1, a2, b2]`.
    pub region: [f64; 4],
    pub modes: Vec<[i32; 2]>,
    pub p: Vec<[f64; 2]>,
    pub k: Vec<[f64; 2]>,
    pub residual: f64,
    pub closed_loop_abscissa: f64,
}

fn pack(m: &Array2<C64>) -> Vec<[f64; 2]> {
    m.iter().map(|c| [c.re, c.im]).collect()
}

fn unpack(data: &[[f64; 2]], rows: usize, cols: usize) -> Result<Array2<C64>> {
    if data.len() != rows * cols {
        return Err(Error::Config(format!(
            "matrix payload has {} entries, expected {rows} x {cols}",
            data.len()
        )));
    }
    Ok(Array2::from_shape_vec(
        (rows, cols),
        data.iter().map(|p| C64::new(p[0], p[1])).collect(),
    )
    .expect("shape checked"))
}

impl GainFile {
    pub fn from_gain(gain: &GainOperator) -> Self {
        GainFile {
            eta: gain.params.eta,
            kappa: gain.params.kappa,
            lambda: gain.params.lambda,
            nu: gain.nu,
            cutoff: gain.basis.cutoff,
            region: gain.region.as_array(),
            modes: gain.basis.modes.clone(),
            p: pack(&gain.p),
            k: pack(&gain.k),
            residual: gain.residual,
            closed_loop_abscissa: gain.closed_loop_abscissa,
        }
    }

    pub fn into_gain(self) -> Result<GainOperator> {
        let basis = FourierBasis::new(self.cutoff)?;
        if basis.modes != self.modes {
            return Err(Error::Config(
                "gain file mode list does not match the canonical basis ordering".into(),
            ));
        }
        let m = basis.len();
        let params = PhysicalParams::new(self.eta, self.kappa, self.lambda, self.nu)?;
        let region = ControlRegion::from_array(self.region)?;
        Ok(GainOperator {
            params,
            nu: self.nu,
            region,
            basis,
            p: unpack(&self.p, 2 * m, 2 * m)?,
            k: unpack(&self.k, m, 2 * m)?,
            residual: self.residual,
            closed_loop_abscissa: self.closed_loop_abscissa,
        })
    }
}

pub fn save_gain(gain: &GainOperator, path: &Path) -> Result<()> {
    let file = GainFile::from_gain(gain);
    let json = serde_json::to_string(&file)?;
    crate::experiment::write_atomic(path, json.as_bytes())
}

pub fn load_gain(path: &Path) -> Result<GainOperator> {
    let text = std::fs::read_to_string(path)?;
    let file: GainFile = serde_json::from_str(&text)?;
    file.into_gain()
}
