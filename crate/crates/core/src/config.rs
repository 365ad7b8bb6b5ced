//! TOML run configuration for the simulator and steady solver.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::basis::FourierBasis;
use crate::error::{Error, Result};
use crate::nonlinear::PseudoSpectral;
use crate::params::PhysicalParams;
use crate::region::ControlRegion;
use crate::state::SpectralState;
use crate::steady::SteadyState;
use crate::C64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsSection {
    pub eta: f64,
    pub kappa: f64,
    pub lambda: f64,
    #[serde(default)]
    pub nu: f64,
}

fn default_record_every() -> usize {
    10
}

fn default_dealias() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscretizationSection {
    pub cutoff: usize,
    pub grid: usize,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default = "default_dealias")]
    pub dealias: bool,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ControlSection {
    #[serde(default)]
    pub enabled: bool,
    /// `[a1, b1, a2, b2]`.
    pub region: Option<[f64; 4]>,
    pub gain_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Random,
    Modes,
    File,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitialSection {
    pub kind: InitialKind,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
    /// For `kind = "modes"`: entries `[k1, k2, re, im]`; the Hermitian
    /// partner is filled in automatically.
    #[serde(default)]
    pub modes: Vec<[f64; 4]>,
    pub path: Option<PathBuf>,
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            kind: InitialKind::Random,
            amplitude: 1e-2,
            seed: 0,
            modes: Vec::new(),
            path: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyKind {
    None,
    SinX1,
    File,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteadySection {
    pub kind: SteadyKind,
    /// Forcing amplitude `eps` for `kind = "sin_x1"` (`f_inf = eps sin x1`).
    #[serde(default)]
    pub amplitude: f64,
    pub path: Option<PathBuf>,
    #[serde(default = "default_steady_tol")]
    pub tol: f64,
}

fn default_steady_tol() -> f64 {
    1e-12
}

impl Default for SteadySection {
    fn default() -> Self {
        SteadySection { kind: SteadyKind::None, amplitude: 0.0, path: None, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    Linear,
    #[default]
    Nonlinear,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationConfig {
    #[serde(default)]
    pub mode: SimMode,
    pub params: ParamsSection,
    pub discretization: DiscretizationSection,
    #[serde(default)]
    pub control: ControlSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub steady: SteadySection,
}

impl SimulationConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimulationConfig =
            toml::from_str(text).map_err(|e| Error::Toml(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Toml(e.to_string()))
    }

    pub fn physical_params(&self) -> Result<PhysicalParams> {
        PhysicalParams::new(
            self.params.eta,
            self.params.kappa,
            self.params.lambda,
            self.params.nu,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.physical_params()?;
        let d = &self.discretization;
        if d.cutoff == 0 {
            return Err(Error::Config("cutoff must be at least 1".into()));
        }
        let min = 2 * d.cutoff + 2;
        if d.grid < min {
            return Err(Error::GridTooCoarse { grid: d.grid, cutoff: d.cutoff, min });
        }
        if d.dealias && d.grid < (3 * d.cutoff).div_ceil(2) {
            return Err(Error::Config(format!(
                "dealiased runs need grid >= {}",
                (3 * d.cutoff).div_ceil(2)
            )));
        }
        if !d.dt.is_finite() || d.dt <= 0.0 {
            return Err(Error::Config(format!("dt must be positive, got {}", d.dt)));
        }
        if d.horizon < d.dt {
            return Err(Error::Config(format!(
                "horizon {} must be at least one step dt = {}",
                d.horizon, d.dt
            )));
        }
        if self.control.enabled && self.control.region.is_none() && self.control.gain_path.is_none()
        {
            return Err(Error::Config(
                "control.enabled requires a region (for synthesis) or a gain_path".into(),
            ));
        }
        if let Some(r) = self.control.region {
            ControlRegion::from_array(r)?;
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<FourierBasis> {
        FourierBasis::new(self.discretization.cutoff)
    }

    pub fn pseudo_spectral(&self) -> Result<PseudoSpectral> {
        PseudoSpectral::new(self.basis()?, self.discretization.grid, self.discretization.dealias)
    }

    /// Builds the initial state per the `[initial]` section.
    pub fn initial_state(&self, basis: &FourierBasis) -> Result<SpectralState> {
        match self.initial.kind {
            InitialKind::Random => {
                Ok(SpectralState::random(basis, self.initial.amplitude, self.initial.seed))
            }
            InitialKind::Modes => {
                let mut z = vec![C64::new(0.0, 0.0); basis.len()];
                for entry in &self.initial.modes {
                    let k = [entry[0] as i32, entry[1] as i32];
                    let idx = basis.mode_index(k).ok_or_else(|| {
                        Error::Config(format!("initial mode {k:?} outside the cutoff"))
                    })?;
                    z[idx] = C64::new(entry[2], entry[3]);
                }
                basis.symmetrize(&mut z);
                SpectralState::from_vorticity(z, basis)
            }
            InitialKind::File => {
                let path = self.initial.path.as_ref().ok_or_else(|| {
                    Error::Config("initial.kind = \"file\" requires initial.path".into())
                })?;
                let text = std::fs::read_to_string(path)?;
                let coeffs: Vec<[f64; 2]> = serde_json::from_str(&text)?;
                if coeffs.len() != basis.len() {
                    return Err(Error::DimensionMismatch {
                        expected: basis.len(),
                        got: coeffs.len(),
                    });
                }
                let mut z: Vec<C64> =
                    coeffs.iter().map(|p| C64::new(p[0], p[1])).collect();
                basis.symmetrize(&mut z);
                SpectralState::from_vorticity(z, basis)
            }
        }
    }

    /// Spectral forcing coefficients per the `[steady]` section (`None` when
    /// no steady state is configured).
    pub fn steady_forcing(&self, basis: &FourierBasis) -> Result<Option<Vec<C64>>> {
        match self.steady.kind {
            SteadyKind::None => Ok(None),
            SteadyKind::SinX1 => {
                let mut f = vec![C64::new(0.0, 0.0); basis.len()];
                let eps = self.steady.amplitude;
                let p = basis
                    .mode_index([1, 0])
                    .ok_or_else(|| Error::Config("cutoff too small for sin x1 forcing".into()))?;
                let m = basis.mode_index([-1, 0]).unwrap();
                f[p] = C64::new(0.0, -PI * eps);
                f[m] = C64::new(0.0, PI * eps);
                Ok(Some(f))
            }
            SteadyKind::File => {
                let path = self.steady.path.as_ref().ok_or_else(|| {
                    Error::Config("steady.kind = \"file\" requires steady.path".into())
                })?;
                let text = std::fs::read_to_string(path)?;
                let st: SteadyState = serde_json::from_str(&text)?;
                if st.f_inf.len() != basis.len() {
                    return Err(Error::DimensionMismatch {
                        expected: basis.len(),
                        got: st.f_inf.len(),
                    });
                }
                Ok(Some(st.f_inf))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
        [params]
        eta = 1.0
        kappa = 1.0
        lambda = 1.0
        nu = 0.5

        [discretization]
        cutoff = 4
        grid = 16
        dt = 1e-3
        horizon = 2.0
        dealias = true
        record_every = 10

        [control]
        enabled = true
        region = [0.0, 3.141592653589793, 0.0, 6.283185307179586]

        [initial]
        kind = "random"
        amplitude = 0.01
        seed = 7

        [steady]
        kind = "sin_x1"
        amplitude = 0.001
    "#;

    #[test]
    fn parses_and_validates_example() {
        let cfg = SimulationConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(cfg.discretization.cutoff, 4);
        assert!(cfg.control.enabled);
        let basis = cfg.basis().unwrap();
        let state = cfg.initial_state(&basis).unwrap();
        assert!((basis.sobolev_norm(&state.z, 1.0) - 0.01).abs() < 1e-12);
        let f = cfg.steady_forcing(&basis).unwrap().unwrap();
        assert!(basis.hermitian_defect(&f) < 1e-15);
    }

    #[test]
    fn rejects_coarse_grid() {
        let bad = EXAMPLE.replace("grid = 16", "grid = 8");
        assert!(matches!(
            SimulationConfig::from_toml(&bad),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn rejects_enabled_control_without_region_or_gain() {
        let bad = EXAMPLE.replace(
            "region = [0.0, 3.141592653589793, 0.0, 6.283185307179586]",
            "",
        );
        assert!(SimulationConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = SimulationConfig::from_toml(EXAMPLE).unwrap();
        let text = cfg.to_toml().unwrap();
        let back = SimulationConfig::from_toml(&text).unwrap();
        assert_eq!(back.discretization.grid, cfg.discretization.grid);
        assert_eq!(back.initial.seed, cfg.initial.seed);
    }
}
