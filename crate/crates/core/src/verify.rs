//! Built-in cross-check suite (`memstab verify`): every closed-form route
//! in the library is validated against an independent numerical route at
//! desk scale, printing one pass/fail line per check.

use std::f64::consts::PI;

use ndarray::Array2;
use ndarray_linalg::{Eig, Inverse};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::FourierBasis;
use crate::biot_savart::{biot_savart, curl, max_divergence};
use crate::error::Result;
use crate::hautus::{spectral_split, unstable_projector, SHIFT_TOL};
use crate::linalg::frobenius;
use crate::memory::memory_consistency;
use crate::nonlinear::{advect_convolution, PseudoSpectral};
use crate::params::PhysicalParams;
use crate::quadrature::gauss_legendre_on;
use crate::region::{indicator_gram, ControlRegion};
use crate::riccati::{
    are_residual, closed_loop_cost_quadrature, hamiltonian_solution, newton_kleinman,
    predicted_cost, solve_are,
};
use crate::riesz::{riesz_expand, riesz_reconstruct};
use crate::spectral::{complex_window, coupled_eigenvalues, CoupledSpectrum};
use crate::state::SpectralState;
use crate::stepper::Simulator;
use crate::system::TruncatedSystem;
use crate::C64;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> CheckResult {
    CheckResult { name: name.to_string(), pass, detail }
}

fn random_real_field(basis: &FourierBasis, rng: &mut ChaCha8Rng, scale: f64) -> Vec<C64> {
    let mut w: Vec<C64> = (0..basis.len())
        .map(|_| C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
        .collect();
    basis.symmetrize(&mut w);
    w
}

fn vieta_check(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut stable = true;
    for _ in 0..1000 {
        let p = PhysicalParams {
            eta: rng.gen_range(0.05..5.0),
            kappa: rng.gen_range(0.01..5.0),
            lambda: rng.gen_range(0.05..5.0),
            nu: 0.0,
        };
        let sigma = 10f64.powf(rng.gen_range(-2.0..5.0));
        let (mp, mm) = coupled_eigenvalues(sigma, &p);
        let scale = 1.0 + sigma;
        let sum = (mp + mm + C64::from(p.lambda + p.eta * sigma)).norm() / scale;
        let prod =
            (mp * mm - C64::from(sigma * (p.eta * p.lambda + p.kappa))).norm() / (scale * scale);
        worst = worst.max(sum).max(prod);
        stable &= mp.re < 0.0 && mm.re < 0.0;
    }
    check(
        "vieta_and_stability",
        worst < 1e-10 && stable,
        format!("max scaled residual {worst:.2e}, all Re < 0: {stable}"),
    )
}

fn eigensolver_cross_check(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = PhysicalParams {
            eta: rng.gen_range(0.1..3.0),
            kappa: rng.gen_range(0.01..3.0),
            lambda: rng.gen_range(0.1..3.0),
            nu: 0.0,
        };
        let sigma = 10f64.powf(rng.gen_range(-1.0..3.0));
        let (mp, mm) = coupled_eigenvalues(sigma, &p);
        let block = ndarray::array![
            [C64::from(-p.eta * sigma), C64::from(-p.kappa * sigma)],
            [C64::from(1.0), C64::from(-p.lambda)]
        ];
        let (vals, _) = block.eig().expect("2x2 eigensolve");
        for v in vals.iter() {
            let d = (v - mp).norm().min((v - mm).norm()) / (1.0 + v.norm());
            worst = worst.max(d);
        }
    }
    check(
        "eigenvalues_vs_dense_2x2",
        worst < 1e-10,
        format!("max relative mismatch {worst:.2e}"),
    )
}

fn accumulation_check() -> CheckResult {
    let p = PhysicalParams { eta: 0.8, kappa: 1.3, lambda: 0.6, nu: 0.0 };
    let nu0 = p.nu0();
    let mut prev = f64::INFINITY;
    let mut ok = true;
    let mut detail = String::new();
    for &sigma in &[1e2, 1e3, 1e4] {
        let (mp, _) = coupled_eigenvalues(sigma, &p);
        let gap = (mp + nu0).norm();
        let bound = 10.0 * (p.eta * p.lambda + p.kappa) * nu0 / (p.eta * p.eta * sigma);
        ok &= gap < bound && gap < prev;
        prev = gap;
        detail.push_str(&format!("sigma {sigma:.0}: gap {gap:.2e} < {bound:.2e}; "));
    }
    check("slow_branch_accumulation", ok, detail)
}

fn window_check() -> CheckResult {
    let p = PhysicalParams { eta: 1.2, kappa: 0.7, lambda: 0.9, nu: 0.0 };
    let (lo, hi) = complex_window(&p);
    let mut ok = true;
    for i in 0..1000 {
        let sigma = 1e-3 + (i as f64) * (1.5 * hi) / 1000.0;
        if (sigma - lo).abs().min((sigma - hi).abs()) < 1e-9 {
            continue;
        }
        let (mp, _) = coupled_eigenvalues(sigma, &p);
        ok &= (mp.im != 0.0) == (sigma > lo && sigma < hi);
    }
    check(
        "complex_window_consistency",
        ok,
        format!("window ({lo:.4}, {hi:.4}), 1000 samples"),
    )
}

fn biorth_riesz_check(rng: &mut ChaCha8Rng) -> CheckResult {
    let p = PhysicalParams::unshifted(1.0, 1.0, 1.0).expect("valid params");
    let basis = FourierBasis::new(8).expect("basis");
    let spec = CoupledSpectrum::from_basis(p, basis).expect("spectrum");
    let mut worst: f64 = 0.0;
    for pair in &spec.pairs {
        let (sp, sm) = pair.adjoints().expect("nondefective");
        let inner = |a: [C64; 2], b: [C64; 2]| a[0] * b[0].conj() + a[1] * b[1].conj();
        worst = worst
            .max((inner(pair.zeta_plus, sp) - 1.0).norm())
            .max(inner(pair.zeta_plus, sm).norm())
            .max(inner(pair.zeta_minus, sp).norm())
            .max((inner(pair.zeta_minus, sm) - 1.0).norm());
    }
    let n = spec.len();
    let z: Vec<C64> = (0..n).map(|_| C64::new(rng.gen(), rng.gen())).collect();
    let w: Vec<C64> = (0..n).map(|_| C64::new(rng.gen(), rng.gen())).collect();
    let coeffs = riesz_expand(&z, &w, &spec).expect("expand");
    let (z2, w2) = riesz_reconstruct(&coeffs, &spec).expect("reconstruct");
    let norm: f64 = z.iter().chain(&w).map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let err: f64 = z
        .iter()
        .zip(&z2)
        .chain(w.iter().zip(&w2))
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / norm;
    check(
        "biorthonormality_and_riesz_round_trip",
        worst < 1e-12 && err < 1e-12,
        format!("biorth residual {worst:.2e}, round trip {err:.2e}"),
    )
}

fn gram_quadrature_check(rng: &mut ChaCha8Rng) -> CheckResult {
    let basis = FourierBasis::new(4).expect("basis");
    let a1 = rng.gen_range(0.0..2.0);
    let b1 = a1 + rng.gen_range(0.5..2.0);
    let a2 = rng.gen_range(0.0..2.0);
    let b2 = a2 + rng.gen_range(0.5..2.0);
    let region = ControlRegion::new(a1, b1, a2, b2).expect("region");
    let g = indicator_gram(&region, &basis);

    // Tensor Gauss-Legendre quadrature of int_O e^{i m . x} dx per distinct
    // difference m.
    let (x1, w1) = gauss_legendre_on(64, a1, b1);
    let (x2, w2) = gauss_legendre_on(64, a2, b2);
    let span = 2 * basis.cutoff as i32;
    let mut table = std::collections::BTreeMap::new();
    for m1 in -span..=span {
        for m2 in -span..=span {
            let mut acc = C64::new(0.0, 0.0);
            for (xa, wa) in x1.iter().zip(&w1) {
                for (xb, wb) in x2.iter().zip(&w2) {
                    let phase = m1 as f64 * xa + m2 as f64 * xb;
                    acc += C64::new(0.0, phase).exp() * (wa * wb);
                }
            }
            table.insert((m1, m2), acc / (4.0 * PI * PI));
        }
    }
    let mut worst: f64 = 0.0;
    for (r, k) in basis.modes.iter().enumerate() {
        for (c, n) in basis.modes.iter().enumerate() {
            let q = table[&(n[0] - k[0], n[1] - k[1])];
            worst = worst.max((g[[r, c]] - q).norm());
        }
    }
    check(
        "indicator_gram_vs_quadrature",
        worst < 1e-8,
        format!("max entry deviation {worst:.2e}"),
    )
}

/// Trapezoidal contour quadrature of `(1/2 pi i) oint R(mu, A) d mu` over a
/// circle separating the unstable from the stable eigenvalues.
pub fn contour_projector(a: &Array2<C64>, unstable: &[C64], stable: &[C64], nodes: usize) -> Result<Array2<C64>> {
    let n = a.nrows();
    if unstable.is_empty() {
        // Any small circle in the resolvent set integrates to zero; report
        // the zero matrix directly.
        return Ok(Array2::zeros((n, n)));
    }
    // Pick a real center maximizing the ring gap between the two sets.
    let min_u = unstable.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    let max_u = unstable.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(f64, f64, f64)> = None; // (gap, center, radius)
    for i in 0..=200 {
        let c = min_u - 0.5 + (i as f64) * (max_u - min_u + 1.0) / 200.0;
        let r_in = unstable
            .iter()
            .map(|v| (v - C64::from(c)).norm())
            .fold(0.0, f64::max);
        let r_out = stable
            .iter()
            .map(|v| (v - C64::from(c)).norm())
            .fold(f64::INFINITY, f64::min);
        if r_out > r_in {
            let gap = r_out - r_in;
            if best.map(|(g, _, _)| gap > g).unwrap_or(true) {
                best = Some((gap, c, 0.5 * (r_in + r_out)));
            }
        }
    }
    let (_, center, radius) = best.ok_or_else(|| {
        crate::error::Error::Linalg("no separating circle for the contour quadrature".into())
    })?;

    crate::linalg::init_blas();
    let mut acc = Array2::<C64>::zeros((n, n));
    let eye = Array2::<C64>::eye(n);
    for j in 0..nodes {
        let theta = 2.0 * PI * j as f64 / nodes as f64;
        let e = C64::new(0.0, theta).exp();
        let mu = C64::from(center) + radius * e;
        let resolvent = (&eye * mu - a).inv()?;
        acc = acc + resolvent * (e * radius / nodes as f64);
    }
    Ok(acc)
}

fn projector_check() -> CheckResult {
    let params = PhysicalParams::new(1.0, 0.02, 3.0, 2.0).expect("params");
    let basis = FourierBasis::new(4).expect("basis");
    let spec = CoupledSpectrum::from_basis(params, basis.clone()).expect("spectrum");
    let split = spectral_split(&spec, params.nu, SHIFT_TOL).expect("split");
    let pi = unstable_projector(&spec, &split).expect("projector");

    let idem = frobenius(&(&pi.dot(&pi) - &pi));

    let region = ControlRegion::full();
    let sys = TruncatedSystem::assemble(&params, &basis, &region, params.nu).expect("assemble");
    let unstable: Vec<C64> = split.unstable.iter().map(|e| e.mu + params.nu).collect();
    let stable: Vec<C64> = split.stable.iter().map(|e| e.mu + params.nu).collect();
    let quad = contour_projector(&sys.a_nu, &unstable, &stable, 64).expect("contour");
    let dev = frobenius(&(&quad - &pi));
    check(
        "unstable_projector_vs_contour",
        idem < 1e-10 && dev < 1e-8,
        format!("idempotence {idem:.2e}, contour deviation {dev:.2e}"),
    )
}

fn riccati_check(rng: &mut ChaCha8Rng) -> CheckResult {
    let params = PhysicalParams::new(1.0, 1.0, 1.0, 1.3).expect("params");
    let basis = FourierBasis::new(3).expect("basis");
    let region = ControlRegion::new(0.0, PI, 0.0, PI).expect("region");
    let sys = TruncatedSystem::assemble(&params, &basis, &region, params.nu).expect("assemble");

    let bbh = sys.bbh();
    let p_h = hamiltonian_solution(&sys.a_nu, &bbh).expect("hamiltonian");
    let (p_nk, _) = newton_kleinman(&sys.a_nu, &bbh, &p_h, 30).expect("newton");
    let agree = frobenius(&(&p_h - &p_nk)) / frobenius(&p_nk);

    let gain = solve_are(&sys).expect("solve_are");
    let resid = are_residual(&sys.a_nu, &bbh, &gain.p);

    let x0: Vec<C64> = {
        let state = SpectralState::random(&basis, 1.0, rng.gen());
        let mut y = vec![C64::new(0.0, 0.0); 2 * basis.len()];
        for i in 0..basis.len() {
            y[2 * i] = state.z[i];
        }
        y
    };
    let horizon = 10.0 / gain.closed_loop_abscissa.abs().max(0.2);
    let j_quad = closed_loop_cost_quadrature(&sys, &gain, &x0, horizon, 4000).expect("cost");
    let j_pred = predicted_cost(&gain, &x0);
    let cost_err = (j_quad - j_pred).abs() / j_pred;

    check(
        "riccati_dual_route_and_cost",
        agree < 1e-7 && resid < 1e-8 && gain.closed_loop_abscissa < 0.0 && cost_err < 0.01,
        format!(
            "NK agreement {agree:.2e}, residual {resid:.2e}, abscissa {:.3}, cost error {cost_err:.2e}",
            gain.closed_loop_abscissa
        ),
    )
}

fn structure_checks(rng: &mut ChaCha8Rng) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let basis = FourierBasis::new(4).expect("basis");
    let w = random_real_field(&basis, rng, 0.5);

    let (u1, u2) = biot_savart(&w, &basis);
    let umax = u1.iter().chain(&u2).map(|c| c.norm()).fold(0.0, f64::max);
    let div = max_divergence(&u1, &u2, &basis) / (f64::EPSILON * umax).max(1e-300);
    let back = curl(&u1, &u2, &basis);
    let curl_err: f64 = w
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    out.push(check(
        "biot_savart_divergence_and_curl",
        div <= 2.0 * basis.cutoff as f64 && curl_err < 1e-13,
        format!("divergence {div:.2} ulp, curl round trip {curl_err:.2e}"),
    ));

    let ps = PseudoSpectral::new(basis.clone(), 14, false).expect("pseudospectral");
    let nl = ps.nonlinear_term(&w);
    let oracle = advect_convolution(&w, &w, &basis);
    let conv_err: f64 = nl
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let skew: C64 = nl.iter().zip(&w).map(|(a, b)| a * b.conj()).sum();
    out.push(check(
        "advection_vs_convolution_and_skew",
        conv_err < 1e-12 && skew.norm() < 1e-10,
        format!("convolution deviation {conv_err:.2e}, skew defect {:.2e}", skew.norm()),
    ));
    out
}

fn dynamics_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let params = PhysicalParams::unshifted(1.0, 1.0, 1.0).expect("params");
    let basis = FourierBasis::new(3).expect("basis");

    let sim = Simulator::linear(params, basis.clone(), 1e-3, None).expect("sim");
    let state = SpectralState::random(&basis, 1.0, 42);
    let (series, _, hist) = sim.run_with_history(state, 2.0, 1).expect("run");
    let monotone = series
        .samples
        .windows(2)
        .all(|w| w[1].energy <= w[0].energy + 1e-12);
    out.push(check(
        "linear_lyapunov_energy_monotone",
        monotone,
        format!("{} samples", series.samples.len()),
    ));

    let dev = memory_consistency(&hist.z, &hist.w, params.lambda, 1e-3);
    out.push(check(
        "memory_volterra_consistency",
        dev < 1e-5,
        format!("max relative deviation {dev:.2e}"),
    ));
    out
}

/// Runs the full cross-check suite.
pub fn run_suite() -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut results = vec![
        vieta_check(&mut rng),
        eigensolver_cross_check(&mut rng),
        accumulation_check(),
        window_check(),
        biorth_riesz_check(&mut rng),
        gram_quadrature_check(&mut rng),
        projector_check(),
        riccati_check(&mut rng),
    ];
    results.extend(structure_checks(&mut rng));
    results.extend(dynamics_checks());
    results
}

/// Pass/fail table; returns true when everything passed.
pub fn render(results: &[CheckResult]) -> (String, bool) {
    let mut out = String::new();
    let mut all = true;
    for r in results {
        all &= r.pass;
        out.push_str(&format!(
            "[{}] {:<40} {}\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        ));
    }
    out.push_str(&format!(
        "\n{}/{} checks passed\n",
        results.iter().filter(|r| r.pass).count(),
        results.len()
    ));
    (out, all)
}
