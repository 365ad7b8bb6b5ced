//! Experiment orchestration: sweep the pipeline
//! spectrum -> split -> Hautus -> gain -> simulate -> fit, persist
//! re-checkable records, and render verdict reports.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::FourierBasis;
use crate::config::{DiscretizationSection, InitialSection, SteadyKind, SteadySection};
use crate::error::{Error, Result};
use crate::fit::decay_fit;
use crate::hautus::{admissible_shift, hautus_check, HAUTUS_THRESHOLD};
use crate::nonlinear::PseudoSpectral;
use crate::params::PhysicalParams;
use crate::region::ControlRegion;
use crate::riccati::{solve_are, ARE_RESIDUAL_TOL};
use crate::spectral::CoupledSpectrum;
use crate::state::SpectralState;
use crate::steady::{steady_solve, SteadyState};
use crate::stepper::{Simulator, TimeSeries};
use crate::system::TruncatedSystem;

/// Atomic file write: temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSection {
    pub eta: Vec<f64>,
    pub kappa: Vec<f64>,
    pub lambda: Vec<f64>,
    pub nu: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControlSpecSection {
    /// `[a1, b1, a2, b2]`.
    pub region: [f64; 4],
    #[serde(default = "default_hautus_threshold")]
    pub hautus_threshold: f64,
}

fn default_hautus_threshold() -> f64 {
    HAUTUS_THRESHOLD
}

fn default_fit_window() -> f64 {
    0.5
}

fn default_rate_margin() -> f64 {
    0.05
}

fn default_nonlinear_bound() -> f64 {
    5.0
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    pub outdir: PathBuf,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub sweep: SweepSection,
    pub discretization: DiscretizationSection,
    pub control: ControlSpecSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub steady: SteadySection,
    /// Fraction of the horizon discarded before the decay fit.
    #[serde(default = "default_fit_window")]
    pub fit_window: f64,
    /// Verdict: closed-loop rate <= -nu + rate_margin * nu.
    #[serde(default = "default_rate_margin")]
    pub rate_margin: f64,
    /// Verdict (nonlinear runs): e^{nu t} ||z||_{H^1} <= bound * initial.
    #[serde(default = "default_nonlinear_bound")]
    pub nonlinear_bound: f64,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            toml::from_str(text).map_err(|e| Error::Toml(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        for &eta in &self.sweep.eta {
            for &kappa in &self.sweep.kappa {
                for &lambda in &self.sweep.lambda {
                    for &nu in &self.sweep.nu {
                        PhysicalParams::new(eta, kappa, lambda, nu)?;
                    }
                }
            }
        }
        ControlRegion::from_array(self.control.region)?;
        let d = &self.discretization;
        let min = 2 * d.cutoff + 2;
        if d.grid < min {
            return Err(Error::GridTooCoarse { grid: d.grid, cutoff: d.cutoff, min });
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical TOML serialization.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).unwrap_or_default();
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        format!("{:x}", h.finalize())
    }

    pub fn combos(&self) -> Vec<RunPoint> {
        let mut out = Vec::new();
        let mut index = 0;
        for &eta in &self.sweep.eta {
            for &kappa in &self.sweep.kappa {
                for &lambda in &self.sweep.lambda {
                    for &nu in &self.sweep.nu {
                        for &seed in &self.seeds {
                            out.push(RunPoint { index, eta, kappa, lambda, nu, seed });
                            index += 1;
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RunPoint {
    pub index: usize,
    pub eta: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub nu: f64,
    pub seed: u64,
}

impl RunPoint {
    pub fn dir_name(&self) -> String {
        format!(
            "run{:03}_eta{}_kappa{}_lambda{}_nu{}_seed{}",
            self.index, self.eta, self.kappa, self.lambda, self.nu, self.seed
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub rule: String,
    pub pass: bool,
    /// Observed value and threshold, so the verdict can be re-derived
    /// offline from the record alone.
    pub observed: f64,
    pub threshold: f64,
}

fn default_rng_name() -> String {
    "chacha20".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub spec_hash: String,
    /// Generator behind the seeded initial data.
    #[serde(default = "default_rng_name")]
    pub rng: String,
    pub point: RunPoint,
    pub status: RunStatus,
    /// Shift actually used for synthesis (after any admissibility nudge).
    pub nu_effective: f64,
    pub nudged: bool,
    pub unstable_modes: usize,
    /// Absent when the unstable set is empty or the run failed first.
    pub hautus_min_margin: Option<f64>,
    pub gain_residual: Option<f64>,
    pub closed_loop_abscissa: Option<f64>,
    /// Fitted decay rates of the closed-loop run, keyed by norm name.
    pub rates: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub wall_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed(String),
}

impl RunRecord {
    pub fn all_pass(&self) -> bool {
        matches!(self.status, RunStatus::Ok) && self.verdicts.iter().all(|v| v.pass)
    }
}

fn fit_rates(series: &TimeSeries, window: f64) -> BTreeMap<String, f64> {
    let times = series.times();
    let mut rates = BTreeMap::new();
    let mut put = |name: &str, values: Vec<f64>| {
        if let Ok(fit) = decay_fit(&times, &values, window) {
            rates.insert(name.to_string(), fit.rate);
        }
    };
    put("combined", series.combined_norm());
    put("l2_z", series.samples.iter().map(|s| s.l2_z).collect());
    put("h1_z", series.samples.iter().map(|s| s.h1_z).collect());
    put("l2_w", series.samples.iter().map(|s| s.l2_w).collect());
    put("h2_w", series.samples.iter().map(|s| s.h2_w).collect());
    rates
}

/// Runs one sweep point end to end, persisting series and the record.
fn run_point(spec: &ExperimentSpec, point: &RunPoint, spec_hash: &str) -> RunRecord {
    let started = Instant::now();
    let mut record = RunRecord {
        spec_hash: spec_hash.to_string(),
        rng: default_rng_name(),
        point: *point,
        status: RunStatus::Ok,
        nu_effective: point.nu,
        nudged: false,
        unstable_modes: 0,
        hautus_min_margin: None,
        gain_residual: None,
        closed_loop_abscissa: None,
        rates: BTreeMap::new(),
        verdicts: Vec::new(),
        wall_ms: 0,
    };

    let outcome = (|| -> Result<()> {
        let params = PhysicalParams::new(point.eta, point.kappa, point.lambda, point.nu)?;
        let basis = FourierBasis::new(spec.discretization.cutoff)?;
        let region = ControlRegion::from_array(spec.control.region)?;
        let spectrum = CoupledSpectrum::from_basis(params, basis.clone())?;

        let (nu_eff, nudged) = admissible_shift(&spectrum, point.nu)?;
        record.nu_effective = nu_eff;
        record.nudged = nudged;

        let report = hautus_check(&spectrum, &region, nu_eff, spec.control.hautus_threshold)?;
        record.unstable_modes = report.unstable_modes.len();
        record.hautus_min_margin =
            (record.unstable_modes > 0).then_some(report.min_margin);

        let sys = TruncatedSystem::assemble(&params, &basis, &region, nu_eff)?;
        let gain = solve_are(&sys)?;
        let gain_residual = gain.residual;
        let abscissa = gain.closed_loop_abscissa;
        record.gain_residual = Some(gain_residual);
        record.closed_loop_abscissa = Some(abscissa);

        let dir = spec.outdir.join(&spec.name).join(point.dir_name());
        std::fs::create_dir_all(&dir)?;

        let mut initial = spec.initial.clone();
        initial.seed = point.seed;
        let d = &spec.discretization;

        let (steady, ps_pair) = match spec.kind {
            ExperimentKind::Linear => (None, None),
            ExperimentKind::Nonlinear => {
                let ps_a = PseudoSpectral::new(basis.clone(), d.grid, d.dealias)?;
                let ps_b = PseudoSpectral::new(basis.clone(), d.grid, d.dealias)?;
                let steady = match spec.steady.kind {
                    SteadyKind::None => None,
                    _ => {
                        let cfg = crate::config::SimulationConfig {
                            mode: crate::config::SimMode::Nonlinear,
                            params: crate::config::ParamsSection {
                                eta: point.eta,
                                kappa: point.kappa,
                                lambda: point.lambda,
                                nu: point.nu,
                            },
                            discretization: d.clone(),
                            control: Default::default(),
                            initial: initial.clone(),
                            steady: spec.steady.clone(),
                        };
                        let f = cfg.steady_forcing(&basis)?;
                        match f {
                            Some(f) => {
                                Some(steady_solve(&f, &params, &ps_a, spec.steady.tol, 500)?)
                            }
                            None => None,
                        }
                    }
                };
                (steady, Some((ps_a, ps_b)))
            }
        };

        let z0 = SpectralState::random(&basis, initial.amplitude, initial.seed);
        let make_sim = |gain: Option<crate::riccati::GainOperator>,
                        ps: Option<PseudoSpectral>,
                        steady: Option<SteadyState>|
         -> Result<Simulator> {
            match ps {
                Some(ps) => Simulator::nonlinear(params, ps, d.dt, gain, steady),
                None => Simulator::linear(params, basis.clone(), d.dt, gain),
            }
        };

        let (ps_open, ps_closed) = match ps_pair {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        let open_sim = make_sim(None, ps_open, steady.clone())?;
        let (open_series, _) = open_sim.run(z0.clone(), d.horizon, d.record_every)?;
        write_atomic(&dir.join("series_open.csv"), open_series.to_csv().as_bytes())?;

        let closed_sim = make_sim(Some(gain), ps_closed, steady)?;
        let (closed_series, _) = closed_sim.run(z0, d.horizon, d.record_every)?;
        write_atomic(&dir.join("series_closed.csv"), closed_series.to_csv().as_bytes())?;

        record.rates = fit_rates(&closed_series, spec.fit_window);

        // Verdicts, each re-derivable from the stored numbers.
        record.verdicts.push(Verdict {
            rule: "are_residual".into(),
            pass: gain_residual < ARE_RESIDUAL_TOL,
            observed: gain_residual,
            threshold: ARE_RESIDUAL_TOL,
        });
        record.verdicts.push(Verdict {
            rule: "closed_loop_abscissa".into(),
            pass: abscissa < 0.0,
            observed: abscissa,
            threshold: 0.0,
        });
        if let Some(margin) = record.hautus_min_margin {
            record.verdicts.push(Verdict {
                rule: "hautus_margin".into(),
                pass: margin >= spec.control.hautus_threshold,
                observed: margin,
                threshold: spec.control.hautus_threshold,
            });
        }
        if point.nu > 0.0 {
            let bound = -point.nu + spec.rate_margin * point.nu;
            let rate = record.rates.get("combined").copied().unwrap_or(f64::NAN);
            record.verdicts.push(Verdict {
                rule: "closed_loop_rate".into(),
                pass: rate <= bound,
                observed: rate,
                threshold: bound,
            });
        }
        if spec.kind == ExperimentKind::Nonlinear {
            // e^{nu t} ||z(t)||_{H^1} <= bound * ||z(0)||_{H^1}.
            let h0 = closed_series.samples[0].h1_z.max(1e-300);
            let worst = closed_series
                .samples
                .iter()
                .map(|s| (point.nu * s.t).exp() * s.h1_z / h0)
                .fold(0.0, f64::max);
            record.verdicts.push(Verdict {
                rule: "nonlinear_weighted_bound".into(),
                pass: worst <= spec.nonlinear_bound,
                observed: worst,
                threshold: spec.nonlinear_bound,
            });
        }

        let record_json = serde_json::to_string_pretty(&record)?;
        write_atomic(&dir.join("record.json"), record_json.as_bytes())?;
        Ok(())
    })();

    if let Err(e) = outcome {
        record.status = RunStatus::Failed(e.to_string());
    }
    record.wall_ms = started.elapsed().as_millis();
    record
}

/// Worker cap: `MEMSTAB_WORKERS` or the machine parallelism.
pub fn worker_limit() -> usize {
    std::env::var("MEMSTAB_WORKERS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        })
}

/// Runs every sweep point (concurrently up to the worker limit), persists
/// per-run artifacts under `outdir/<name>/`, and writes the combined
/// `records.json`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let combos = spec.combos();
    if combos.is_empty() {
        return Ok(Vec::new());
    }
    let hash = spec.hash();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_limit().min(combos.len()))
        .build()
        .map_err(|e| Error::Config(format!("could not build worker pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| {
        use rayon::prelude::*;
        combos.par_iter().map(|p| run_point(spec, p, &hash)).collect()
    });

    let summary_path = spec.outdir.join(&spec.name).join("records.json");
    write_atomic(&summary_path, serde_json::to_string_pretty(&records)?.as_bytes())?;
    Ok(records)
}

/// Human-readable verdict table. The second return is true when every run
/// passed every verdict.
pub fn report(records: &[RunRecord]) -> (String, bool) {
    let mut out = String::new();
    let mut all_pass = true;
    out.push_str(&format!(
        "{:<6} {:<8} {:<8} {:<8} {:<8} {:<6} {:<10} {:<12} {:<10} verdicts\n",
        "run", "eta", "kappa", "lambda", "nu", "seed", "residual", "abscissa", "rate"
    ));
    for r in records {
        let rate = r
            .rates
            .get("combined")
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "-".into());
        let verdicts: Vec<String> = match &r.status {
            RunStatus::Ok => r
                .verdicts
                .iter()
                .map(|v| format!("{}={}", v.rule, if v.pass { "pass" } else { "FAIL" }))
                .collect(),
            RunStatus::Failed(msg) => vec![format!("ERROR: {msg}")],
        };
        if !r.all_pass() {
            all_pass = false;
        }
        let fmt_opt = |v: Option<f64>, spec: &str| -> String {
            v.map(|x| match spec {
                "e" => format!("{x:.2e}"),
                _ => format!("{x:.4e}"),
            })
            .unwrap_or_else(|| "-".into())
        };
        out.push_str(&format!(
            "{:<6} {:<8} {:<8} {:<8} {:<8} {:<6} {:<10} {:<12} {:<10} {}\n",
            r.point.index,
            r.point.eta,
            r.point.kappa,
            r.point.lambda,
            r.point.nu,
            r.point.seed,
            fmt_opt(r.gain_residual, "e"),
            fmt_opt(r.closed_loop_abscissa, "a"),
            rate,
            verdicts.join(" ")
        ));
    }
    out.push_str(&format!(
        "\n{} run(s), {}\n",
        records.len(),
        if all_pass { "all verdicts pass" } else { "FAILURES present" }
    ));
    (out, all_pass)
}

/// Loads a persisted `records.json`.
pub fn load_records(path: &Path) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
