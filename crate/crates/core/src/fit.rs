//! Exponential decay-rate fitting from norm time series.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    /// Least-squares slope of `log(norm)` over the fit window.
    pub rate: f64,
    /// Intercept at `t = 0` (log scale).
    pub intercept: f64,
    pub samples_used: usize,
}

/// Fits `log(values) ~ intercept + rate * t` over the trailing
/// `(1 - window_fraction)` portion of the horizon.
///
/// Needs at least 10 samples with strictly positive norms in the window;
/// norms that underflow to zero signal decay beyond the measurement floor
/// and are reported as `DegenerateFit`.
pub fn decay_fit(times: &[f64], values: &[f64], window_fraction: f64) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: values.len() });
    }
    if !(0.0..1.0).contains(&window_fraction) {
        return Err(Error::InvalidParams(format!(
            "window_fraction must lie in [0, 1), got {window_fraction}"
        )));
    }
    let (t0, t1) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        _ => return Err(Error::DegenerateFit("need an increasing time grid".into())),
    };
    let start = t0 + window_fraction * (t1 - t0);

    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < start {
            continue;
        }
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::DegenerateFit(format!(
                "norm {v} at t = {t} is not positive; decay exceeds the measurement floor"
            )));
        }
        if v < 1e-280 {
            return Err(Error::DegenerateFit(format!(
                "norm underflow ({v:.3e}) at t = {t}; decay exceeds the measurement floor"
            )));
        }
        ts.push(t);
        logs.push(v.ln());
    }
    let n = ts.len();
    if n < 10 {
        return Err(Error::DegenerateFit(format!("only {n} samples in the fit window (need 10)")));
    }

    let nf = n as f64;
    let mean_t = ts.iter().sum::<f64>() / nf;
    let mean_l = logs.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (t, l) in ts.iter().zip(&logs) {
        sxx += (t - mean_t) * (t - mean_t);
        sxy += (t - mean_t) * (l - mean_l);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all samples at the same time".into()));
    }
    let rate = sxy / sxx;
    Ok(DecayFit { rate, intercept: mean_l - rate * mean_t, samples_used: n })
}
