//! Derived diagnostics on top of the computation backends: plateau
//! detection with a redundancy count, the trace-distance back-flow measure
//! of non-Markovianity, and scans verifying that dynamics depend on
//! (lambda, theta) only through the rate lambda (1 - cos theta).

use crate::analytic::{coherence_inf, MICurve};
use crate::collision::{AncillaCount, ModelParams};
use crate::error::{Error, Result};
use crate::stochastic::{estimate_coherence, TrajectorySpec};

/// Result of scanning a mutual-information curve for a plateau at the
/// system entropy.
#[derive(Clone, Copy, Debug)]
pub struct PlateauReport {
    /// Accepted relative deviation of I_f / H_S from 1.
    pub delta: f64,
    pub f_lo: f64,
    pub f_hi: f64,
    /// f_hi - f_lo; zero when no point qualifies.
    pub width: f64,
    /// floor(1 / f_lo): how many disjoint fragments of the plateau's
    /// smallest sufficient size fit in the environment.
    pub redundancy: u64,
}

/// Finds the widest contiguous run of curve points whose ratio to the
/// system entropy sits within delta of 1.
pub fn detect_plateau(curve: &MICurve, delta: f64) -> Result<PlateauReport> {
    if curve.points.len() < 10 {
        return Err(Error::InvalidParam(format!(
            "plateau detection needs >= 10 points, got {}",
            curve.points.len()
        )));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidParam(format!("delta = {delta} outside (0, 0.5)")));
    }
    if curve.h_system < 1e-9 {
        return Err(Error::UndefinedPlateau);
    }
    let mut best: Option<(usize, usize)> = None;
    let mut run_start: Option<usize> = None;
    for (i, p) in curve.points.iter().enumerate() {
        let inside = (p.i_f / curve.h_system - 1.0).abs() <= delta;
        match (inside, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                if best.is_none_or(|(bs, be)| {
                    curve.points[i - 1].f - curve.points[s].f > curve.points[be].f - curve.points[bs].f
                }) {
                    best = Some((s, i - 1));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        let e = curve.points.len() - 1;
        if best.is_none_or(|(bs, be)| {
            curve.points[e].f - curve.points[s].f > curve.points[be].f - curve.points[bs].f
        }) {
            best = Some((s, e));
        }
    }
    let (f_lo, f_hi) = match best {
        Some((s, e)) => (curve.points[s].f, curve.points[e].f),
        None => (0.0, 0.0),
    };
    let redundancy = if f_lo > 0.0 { (1.0 / f_lo).floor() as u64 } else { 0 };
    Ok(PlateauReport { delta, f_lo, f_hi, width: f_hi - f_lo, redundancy })
}

/// Sum of the positive increments of the trace distance D(t) = |c(t)|
/// between the two dephasing-optimal probe states. Positive increments
/// mean information flowing back. The grid must resolve 1/lambda with at
/// least 100 points, and should contain the zero crossings of c so the
/// piecewise-monotone sum telescopes exactly.
pub fn blp_measure(lambda: f64, times: &[f64], coherence: &[f64]) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParam(format!("lambda = {lambda}, expected > 0")));
    }
    if times.len() != coherence.len() {
        return Err(Error::Grid(format!(
            "{} times vs {} coherence samples",
            times.len(),
            coherence.len()
        )));
    }
    if times.len() < 2 {
        return Err(Error::Grid("need at least two samples".into()));
    }
    let max_spacing = 1.0 / (100.0 * lambda);
    for w in times.windows(2) {
        if !(w[1].is_finite() && w[1] > w[0]) {
            return Err(Error::Grid(format!("times not strictly increasing at {} -> {}", w[0], w[1])));
        }
        if w[1] - w[0] > max_spacing * (1.0 + 1e-9) {
            return Err(Error::Resolution(format!(
                "grid spacing {} exceeds {max_spacing} (100 points per 1/lambda)",
                w[1] - w[0]
            )));
        }
    }
    let mut total = 0.0;
    for w in coherence.windows(2) {
        let inc = w[1].abs() - w[0].abs();
        if inc > 0.0 {
            total += inc;
        }
    }
    Ok(total)
}

fn check_pairs(c_target: f64, pairs: &[(f64, f64)]) -> Result<Vec<ModelParams>> {
    if pairs.is_empty() {
        return Err(Error::InvalidParam("no (lambda, theta) pairs given".into()));
    }
    pairs
        .iter()
        .map(|&(lambda, theta)| {
            let p = ModelParams::new(theta, lambda, 0.0, AncillaCount::Infinite)?;
            let rate = p.dephasing_rate();
            if (rate - c_target).abs() > 1e-12 {
                return Err(Error::InvalidParam(format!(
                    "pair (lambda = {lambda}, theta = {theta}) has rate {rate}, expected {c_target}"
                )));
            }
            Ok(p)
        })
        .collect()
}

/// Max over pairs and grid times of the closed-form coherence against
/// e^{-c_target t}. Every pair must realize the target rate exactly.
pub fn invariance_scan(c_target: f64, pairs: &[(f64, f64)], t_grid: &[f64]) -> Result<f64> {
    let params = check_pairs(c_target, pairs)?;
    let mut worst = 0.0f64;
    for p in &params {
        for &t in t_grid {
            let c = coherence_inf(p, t)?;
            worst = worst.max((c.re - (-c_target * t).exp()).abs()).max(c.im.abs());
        }
    }
    Ok(worst)
}

/// Monte-Carlo counterpart of the invariance scan.
#[derive(Clone, Copy, Debug)]
pub struct McInvarianceReport {
    /// Largest |estimate - e^{-c_target t}| seen.
    pub max_abs_dev: f64,
    /// The same deviation in units of its standard error.
    pub max_stderr_units: f64,
}

/// Runs the trajectory estimator for each pair and compares against
/// e^{-c_target t} pointwise. Pair i draws from seed + i, so pairs are
/// independent but the whole scan is reproducible.
pub fn invariance_scan_mc(
    c_target: f64,
    pairs: &[(f64, f64)],
    t_grid: &[f64],
    n_traj: u64,
    seed: u64,
) -> Result<McInvarianceReport> {
    let params = check_pairs(c_target, pairs)?;
    let mut report = McInvarianceReport { max_abs_dev: 0.0, max_stderr_units: 0.0 };
    for (i, p) in params.iter().enumerate() {
        let spec = TrajectorySpec::new(*p, t_grid.to_vec(), n_traj, seed + i as u64)?;
        let batch = estimate_coherence(&spec)?;
        for point in &batch.points {
            let dev = (point.mean_factor - (-c_target * point.t).exp()).abs();
            report.max_abs_dev = report.max_abs_dev.max(dev);
            let units = if point.stderr > 0.0 {
                dev / point.stderr
            } else if dev > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            report.max_stderr_units = report.max_stderr_units.max(units);
        }
    }
    Ok(report)
}
