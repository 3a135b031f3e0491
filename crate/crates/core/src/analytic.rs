//! Closed-form results: coherence factors for the unbounded and finite
//! reservoirs, the mixture time, even-collision-count probabilities, and
//! the mutual-information formulas built from them.
//!
//! The mutual-information formulas hold for a fully dephasing collision
//! (cos theta = -1) acting on the (|0> + |1>)/sqrt(2) initial state; the
//! constructors reject anything else rather than extrapolate.

use crate::collision::ModelParams;
use crate::error::{Error, Result};
use crate::qcore::{C64, DensityMatrix};

/// Which part of the environment a fragment is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvironmentSetting {
    /// Fragments contain ancillae alone.
    AncillaeOnly,
    /// Fragments contain emitter plus ancilla pairs.
    WithEmitters,
}

impl EnvironmentSetting {
    pub fn as_str(self) -> &'static str {
        match self {
            EnvironmentSetting::AncillaeOnly => "ancillae",
            EnvironmentSetting::WithEmitters => "emitters",
        }
    }
}

impl std::fmt::Display for EnvironmentSetting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One sampled point of a mutual-information curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MIPoint {
    /// Fraction of the environment kept.
    pub f: f64,
    /// Number of environment units traced out, round((1-f)*n) ties to even.
    pub k: u64,
    /// Mutual information in bits.
    pub i_f: f64,
}

/// Mutual information against kept fraction at a fixed time.
#[derive(Clone, Debug)]
pub struct MICurve {
    pub time: f64,
    pub n: u64,
    pub setting: EnvironmentSetting,
    /// Points sorted by ascending fraction.
    pub points: Vec<MIPoint>,
    /// System entropy in bits at `time`.
    pub h_system: f64,
}

/// x^m with the sign carried separately; the magnitude goes through
/// exp(m ln x) so |x| slightly under 1 keeps full precision at m ~ 1e4.
pub fn signed_pow(base: f64, exp: u64) -> f64 {
    if exp == 0 {
        return 1.0;
    }
    if base == 0.0 {
        return 0.0;
    }
    let sign = if base < 0.0 && exp % 2 == 1 { -1.0 } else { 1.0 };
    sign * (exp as f64 * base.abs().ln()).exp()
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParam(format!("t = {t}, expected >= 0")));
    }
    Ok(())
}

/// Coherence of the unbounded-reservoir dynamics,
/// e^{-i omega t} e^{-lambda (1 - cos theta) t}.
pub fn coherence_inf(params: &ModelParams, t: f64) -> Result<C64> {
    check_time(t)?;
    Ok(C64::from_polar((-params.dephasing_rate() * t).exp(), -params.omega() * t))
}

/// Real coherence factor of the n-ancilla dynamics,
/// [1 + (cos theta - 1) p_t]^n with p_t = 1 - e^{-lambda t / n}.
pub fn coherence_finite(params: &ModelParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let n = params.finite_n()?;
    let p = params.collision_probability(t)?;
    Ok(signed_pow(1.0 + (params.theta().cos() - 1.0) * p, n))
}

/// Dephasing factor for either reservoir mode, with the free phase
/// stripped: the finite form above, or e^{-lambda (1 - cos theta) t}.
pub fn coherence_factor(params: &ModelParams, t: f64) -> Result<f64> {
    if params.n().is_finite() {
        coherence_finite(params, t)
    } else {
        check_time(t)?;
        Ok((-params.dephasing_rate() * t).exp())
    }
}

/// The dephasing map in closed form: populations are untouched, the
/// off-diagonal picks up the mode's coherence factor and the free phase.
pub fn evolve_closed_form(params: &ModelParams, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if rho0.num_qubits() != 1 {
        return Err(Error::WrongQubitCount { expected: 1, got: rho0.num_qubits() });
    }
    let factor = C64::from_polar(1.0, -params.omega() * t) * coherence_factor(params, t)?;
    let mut data = rho0.data().clone();
    data[(0, 1)] *= factor;
    data[(1, 0)] *= factor.conj();
    Ok(DensityMatrix::new(rho0.labels().to_vec(), data)
        .expect("dephasing preserves hermiticity and trace"))
}

fn require_fully_dephasing(params: &ModelParams, what: &'static str) -> Result<()> {
    if !params.is_fully_dephasing() {
        return Err(Error::RequiresFullDephasing(what));
    }
    Ok(())
}

/// Time n ln2 / lambda at which the fully dephasing finite-n coherence
/// factor crosses zero and the system is maximally mixed.
pub fn mixture_time(params: &ModelParams) -> Result<f64> {
    require_fully_dephasing(params, "mixture_time")?;
    let n = params.finite_n()?;
    Ok(n as f64 * std::f64::consts::LN_2 / params.lambda())
}

/// Probability that a group of m of the n ancillae has absorbed an even
/// number of collisions by time t: (1 + (2 e^{-lambda t / n} - 1)^m) / 2.
pub fn p_even(m: u64, params: &ModelParams, t: f64) -> Result<f64> {
    let n = params.finite_n()?;
    if m > n {
        return Err(Error::InvalidParam(format!("m = {m} exceeds n = {n}")));
    }
    let p = params.collision_probability(t)?;
    Ok(0.5 * (1.0 + signed_pow(1.0 - 2.0 * p, m)))
}

/// Base-2 binary entropy with the endpoint convention H(0) = H(1) = 0.
/// Inputs within 1e-12 of [0, 1] are clamped; anything further is an error.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&p) {
        return Err(Error::InvalidParam(format!("p = {p} outside [0, 1]")));
    }
    let p = p.clamp(0.0, 1.0);
    let q = 1.0 - p;
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.log2();
    }
    if q > 0.0 {
        h -= q * q.log2();
    }
    Ok(h)
}

fn check_k(k: u64, n: u64) -> Result<()> {
    if k > n {
        return Err(Error::InvalidParam(format!("k = {k} exceeds n = {n}")));
    }
    Ok(())
}

/// System entropy H_b(P^e_n(t)) in bits.
pub fn system_entropy(params: &ModelParams, t: f64) -> Result<f64> {
    require_fully_dephasing(params, "system_entropy")?;
    let n = params.finite_n()?;
    binary_entropy(p_even(n, params, t)?)
}

/// Mutual information between the system and a fragment of n - k ancillae:
/// H_b(P^e_n) - H_b(P^e_k).
pub fn mi_ancillae(params: &ModelParams, t: f64, k: u64) -> Result<f64> {
    require_fully_dephasing(params, "mi_ancillae")?;
    let n = params.finite_n()?;
    check_k(k, n)?;
    Ok(binary_entropy(p_even(n, params, t)?)? - binary_entropy(p_even(k, params, t)?)?)
}

/// Mutual information between the system and a fragment of n - k
/// emitter-ancilla pairs: H_b(P^e_n) + H_b(P^e_{n-k}) - H_b(P^e_k).
pub fn mi_emitters(params: &ModelParams, t: f64, k: u64) -> Result<f64> {
    require_fully_dephasing(params, "mi_emitters")?;
    let n = params.finite_n()?;
    check_k(k, n)?;
    Ok(binary_entropy(p_even(n, params, t)?)?
        + binary_entropy(p_even(n - k, params, t)?)?
        - binary_entropy(p_even(k, params, t)?)?)
}

/// Number of environment units traced out when a fraction f is kept.
pub fn k_from_fraction(f: f64, n: u64) -> Result<u64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&f) {
        return Err(Error::InvalidParam(format!("f = {f} outside [0, 1]")));
    }
    let k = ((1.0 - f.clamp(0.0, 1.0)) * n as f64).round_ties_even() as u64;
    Ok(k.min(n))
}

/// Samples a mutual-information curve on the given fractions (sorted
/// internally), in the chosen environment setting.
pub fn mi_curve(
    params: &ModelParams,
    t: f64,
    setting: EnvironmentSetting,
    fractions: &[f64],
) -> Result<MICurve> {
    let n = params.finite_n()?;
    let h_system = system_entropy(params, t)?;
    let mut fs: Vec<f64> = fractions.to_vec();
    fs.sort_by(|a, b| a.total_cmp(b));
    let mut points = Vec::with_capacity(fs.len());
    for f in fs {
        let k = k_from_fraction(f, n)?;
        let i_f = match setting {
            EnvironmentSetting::AncillaeOnly => mi_ancillae(params, t, k)?,
            EnvironmentSetting::WithEmitters => mi_emitters(params, t, k)?,
        };
        points.push(MIPoint { f, k, i_f });
    }
    Ok(MICurve { time: t, n, setting, points, h_system })
}
