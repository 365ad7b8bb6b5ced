//! `memstab`: spectral analysis, Riccati feedback synthesis, and closed-loop
//! simulation of the 2D vorticity equation with an exponential memory kernel.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use memstab_core::basis::FourierBasis;
use memstab_core::config::{SimMode, SimulationConfig};
use memstab_core::experiment::{self, ExperimentSpec};
use memstab_core::fit::decay_fit;
use memstab_core::gain_io;
use memstab_core::hautus::{admissible_shift, hautus_check, HAUTUS_THRESHOLD};
use memstab_core::params::PhysicalParams;
use memstab_core::region::ControlRegion;
use memstab_core::riccati::solve_are;
use memstab_core::spectral::{complex_window, CoupledSpectrum};
use memstab_core::steady::steady_solve;
use memstab_core::stepper::Simulator;
use memstab_core::system::TruncatedSystem;
use memstab_core::verify;

#[derive(Parser)]
#[command(name = "memstab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    eta: f64,
    #[arg(long)]
    kappa: f64,
    #[arg(long)]
    lambda: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Print the coupled spectrum over the retained torus modes as CSV.
    Spectrum {
        #[command(flatten)]
        params: ParamArgs,
        /// Retain modes with |k1|, |k2| <= N.
        #[arg(long)]
        cutoff: usize,
        /// Shift used for the unstable-after-shift column.
        #[arg(long, default_value_t = 0.0)]
        shift: f64,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize a Riccati feedback gain and write it as JSON.
    Gain {
        #[command(flatten)]
        params: ParamArgs,
        /// Decay-rate shift nu (0 < nu < nu0).
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        cutoff: usize,
        /// Control patch a1,b1,a2,b2 inside [0, 2pi]^2.
        #[arg(long, value_delimiter = ',')]
        region: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the stationary vorticity equation for the configured forcing.
    Steady {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time-integrate the (non)linear closed or open loop; write series CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Gain file (overrides control.gain_path from the config).
        #[arg(long)]
        gain: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in oracle cross-check suite.
    Verify {
        /// Which suite to run (only "all" is defined).
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Run a sweep experiment from a TOML spec.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Re-render the verdict table from persisted records.
    Report {
        #[arg(long)]
        records: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Spectrum { params, cutoff, shift, out } => {
            let p = PhysicalParams::unshifted(params.eta, params.kappa, params.lambda)?;
            let basis = FourierBasis::new(cutoff)?;
            let spectrum = CoupledSpectrum::from_basis(p, basis)?;
            let (lo, hi) = complex_window(&p);
            let mut csv = String::from(
                "k1,k2,sigma,re_mu_plus,im_mu_plus,re_mu_minus,im_mu_minus,in_complex_window,unstable_after_shift\n",
            );
            let basis = spectrum.basis.as_ref().expect("torus spectrum");
            for (i, pair) in spectrum.pairs.iter().enumerate() {
                let k = basis.modes[i];
                let in_window = pair.sigma > lo && pair.sigma < hi;
                let unstable =
                    pair.mu_plus.re + shift >= 0.0 || pair.mu_minus.re + shift >= 0.0;
                csv.push_str(&format!(
                    "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}\n",
                    k[0],
                    k[1],
                    pair.sigma,
                    pair.mu_plus.re,
                    pair.mu_plus.im,
                    pair.mu_minus.re,
                    pair.mu_minus.im,
                    in_window,
                    unstable
                ));
            }
            match out {
                Some(path) => {
                    experiment::write_atomic(&path, csv.as_bytes())?;
                    eprintln!("wrote {} modes to {}", spectrum.len(), path.display());
                }
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Gain { params, nu, cutoff, region, out } => {
            let p = PhysicalParams::new(params.eta, params.kappa, params.lambda, nu)?;
            if region.len() != 4 {
                bail!("--region needs exactly four values a1,b1,a2,b2");
            }
            let region = ControlRegion::new(region[0], region[1], region[2], region[3])?;
            let basis = FourierBasis::new(cutoff)?;
            let spectrum = CoupledSpectrum::from_basis(p, basis.clone())?;
            let (nu_eff, nudged) = admissible_shift(&spectrum, nu)?;
            if nudged {
                eprintln!(
                    "warning: -nu coincides with an eigenvalue real part; nudged shift to {nu_eff}"
                );
            }
            let report = hautus_check(&spectrum, &region, nu_eff, HAUTUS_THRESHOLD)?;
            let sys = TruncatedSystem::assemble(&p, &basis, &region, nu_eff)?;
            let gain = solve_are(&sys)?;
            gain_io::save_gain(&gain, &out)?;
            eprintln!(
                "gain written to {}: {} unstable mode(s), ARE residual {:.3e}, closed-loop abscissa {:.6}",
                out.display(),
                report.unstable_modes.len(),
                gain.residual,
                gain.closed_loop_abscissa
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Steady { config, out } => {
            let cfg = SimulationConfig::load(&config)?;
            let p = cfg.physical_params()?;
            let ps = cfg.pseudo_spectral()?;
            let basis = ps.basis().clone();
            let forcing = cfg
                .steady_forcing(&basis)?
                .context("config has steady.kind = \"none\"; nothing to solve")?;
            let steady = steady_solve(&forcing, &p, &ps, cfg.steady.tol, 500)?;
            eprintln!(
                "steady state solved in {} iteration(s), residual {:.3e}",
                steady.iterations, steady.residual
            );
            experiment::write_atomic(&out, steady.to_json()?.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Simulate { config, gain, out } => {
            let cfg = SimulationConfig::load(&config)?;
            let p = cfg.physical_params()?;
            let basis = cfg.basis()?;
            let d = &cfg.discretization;

            let gain_path = gain.or_else(|| {
                cfg.control.enabled.then(|| cfg.control.gain_path.clone()).flatten()
            });
            let gain_op = match gain_path {
                Some(path) => {
                    Some(gain_io::load_gain(&path).context("failed to load gain file")?)
                }
                None if cfg.control.enabled => {
                    // Synthesize in place from the configured region.
                    let region = ControlRegion::from_array(
                        cfg.control.region.context("control.enabled needs region or gain")?,
                    )?;
                    let spectrum = CoupledSpectrum::from_basis(p, basis.clone())?;
                    let (nu_eff, nudged) = admissible_shift(&spectrum, p.nu)?;
                    if nudged {
                        eprintln!("warning: shift nudged to {nu_eff}");
                    }
                    hautus_check(&spectrum, &region, nu_eff, HAUTUS_THRESHOLD)?;
                    let sys = TruncatedSystem::assemble(&p, &basis, &region, nu_eff)?;
                    Some(solve_are(&sys)?)
                }
                None => None,
            };

            let steady = match cfg.steady_forcing(&basis)? {
                Some(f) => {
                    let ps = cfg.pseudo_spectral()?;
                    Some(steady_solve(&f, &p, &ps, cfg.steady.tol, 500)?)
                }
                None => None,
            };

            let sim = match cfg.mode {
                SimMode::Linear => Simulator::linear(p, basis.clone(), d.dt, gain_op)?,
                SimMode::Nonlinear => {
                    Simulator::nonlinear(p, cfg.pseudo_spectral()?, d.dt, gain_op, steady)?
                }
            };
            let state = cfg.initial_state(&basis)?;
            let (series, end) = sim.run(state, d.horizon, d.record_every)?;
            experiment::write_atomic(&out, series.to_csv().as_bytes())?;

            let last = series.samples.last().expect("at least one sample");
            eprintln!(
                "simulated to t = {}: ||z|| = {:.6e}, ||w|| = {:.6e}",
                end.t, last.l2_z, last.l2_w
            );
            if let Ok(fit) = decay_fit(&series.times(), &series.combined_norm(), 0.5) {
                eprintln!("fitted decay rate over trailing half: {:.4}", fit.rate);
            }
            eprintln!("series written to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::Verify { suite } => {
            if suite != "all" {
                bail!("unknown suite {suite:?}; only \"all\" is available");
            }
            let results = verify::run_suite();
            let (table, all_pass) = verify::render(&results);
            print!("{table}");
            Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }

        Command::Experiment { spec } => {
            let spec = ExperimentSpec::load(&spec)?;
            let records = experiment::run_experiment(&spec)?;
            let (table, all_pass) = experiment::report(&records);
            print!("{table}");
            eprintln!(
                "records written to {}",
                spec.outdir.join(&spec.name).join("records.json").display()
            );
            Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }

        Command::Report { records } => {
            let records = experiment::load_records(&records)?;
            let (table, all_pass) = experiment::report(&records);
            print!("{table}");
            Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
