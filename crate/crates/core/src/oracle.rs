//! Exact dense construction of the full system-environment state at small
//! n, for the fully dephasing collision acting on (|0> + |1>)/sqrt(2).
//! Everything downstream (entropies, mutual information, entanglement
//! across cuts) is computed from these states by partial trace and
//! eigen-decomposition alone, with no closed form anywhere in the path, so
//! agreement with the formula layer is a genuine cross-check.
//!
//! Ancillae-only setting: the state is a classical mixture over collision
//! patterns, block diagonal in the ancilla computational basis. Emitter
//! setting: each ancilla is purified by its emitter and the global state
//! is a pure vector on 2n + 1 qubits.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::analytic::EnvironmentSetting;
use crate::collision::ModelParams;
use crate::error::{Error, Result};
use crate::qcore::{
    reduced_from_pure, partial_trace, vn_entropy, C64, DensityMatrix, PureStateVector, QubitLabel,
};

/// Densest tolerated environment; the emitter state is then 2^21 complex
/// amplitudes and every reduced matrix stays at or under 2^11 x 2^11.
pub const MAX_ORACLE_ANCILLAE: u64 = 10;

/// One collision pattern and its probability.
#[derive(Clone, Copy, Debug)]
pub struct TrajectoryWeight {
    /// Collision flags; bit n-1-j holds ancilla j, matching label order.
    pub alpha: u64,
    pub weight: f64,
}

fn checked_n(params: &ModelParams, what: &'static str) -> Result<usize> {
    let n = params.finite_n()?;
    if n > MAX_ORACLE_ANCILLAE {
        return Err(Error::Capacity { qubits: n as usize, max: MAX_ORACLE_ANCILLAE as usize });
    }
    if !params.is_fully_dephasing() {
        return Err(Error::RequiresFullDephasing(what));
    }
    Ok(n as usize)
}

/// All 2^n collision patterns with their probabilities at time t.
pub fn trajectory_weights(params: &ModelParams, t: f64) -> Result<Vec<TrajectoryWeight>> {
    let n = checked_n(params, "trajectory_weights")?;
    let p = params.collision_probability(t)?;
    Ok((0u64..1 << n)
        .map(|alpha| {
            let hits = alpha.count_ones() as i32;
            TrajectoryWeight {
                alpha,
                weight: p.powi(hits) * (1.0 - p).powi(n as i32 - hits),
            }
        })
        .collect())
}

fn ancilla_labels(n: usize) -> Vec<QubitLabel> {
    (0..n).map(QubitLabel::Ancilla).collect()
}

/// System amplitudes of the freely precessed (|0> +- |1>)/sqrt(2).
fn system_amplitudes(omega: f64, t: f64, even_parity: bool) -> (C64, C64) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a0 = C64::from_polar(s, -omega * t / 2.0);
    let a1 = C64::from_polar(s, omega * t / 2.0);
    if even_parity {
        (a0, a1)
    } else {
        (a0, -a1)
    }
}

/// Exact mixed state over [a0 .. a_{n-1}, S]: for each collision pattern,
/// the pattern itself is recorded in the ancillae and the system points
/// along + or - according to the pattern's parity.
pub fn build_state_ancillae(params: &ModelParams, t: f64) -> Result<DensityMatrix> {
    let n = checked_n(params, "build_state_ancillae")?;
    let weights = trajectory_weights(params, t)?;
    let dim = 1usize << (n + 1);
    let mut data = DMatrix::zeros(dim, dim);
    for tw in &weights {
        let (a0, a1) = system_amplitudes(params.omega(), t, tw.alpha.count_ones() % 2 == 0);
        let w = C64::new(tw.weight, 0.0);
        let base = (tw.alpha as usize) << 1;
        data[(base, base)] += w * a0 * a0.conj();
        data[(base, base + 1)] += w * a0 * a1.conj();
        data[(base + 1, base)] += w * a1 * a0.conj();
        data[(base + 1, base + 1)] += w * a1 * a1.conj();
    }
    let mut labels = ancilla_labels(n);
    labels.push(QubitLabel::System);
    DensityMatrix::new(labels, data)
}

/// Exact pure state over [e0 .. e_{n-1}, a0 .. a_{n-1}, S]. Each emitter
/// starts excited and relaxes when its ancilla is hit, so emitter flags are
/// the complement of the collision pattern and the collision probability
/// becomes a pair amplitude.
pub fn build_state_emitters(params: &ModelParams, t: f64) -> Result<PureStateVector> {
    let n = checked_n(params, "build_state_emitters")?;
    let weights = trajectory_weights(params, t)?;
    let mask = (1u64 << n) - 1;
    let dim = 1usize << (2 * n + 1);
    let mut data = DVector::zeros(dim);
    for tw in &weights {
        let (a0, a1) = system_amplitudes(params.omega(), t, tw.alpha.count_ones() % 2 == 0);
        let amp = C64::new(tw.weight.sqrt(), 0.0);
        let emitters = !tw.alpha & mask;
        let base = ((emitters as usize) << (n + 1)) | ((tw.alpha as usize) << 1);
        data[base] = amp * a0;
        data[base + 1] = amp * a1;
    }
    let mut labels: Vec<QubitLabel> = (0..n).map(QubitLabel::Emitter).collect();
    labels.extend(ancilla_labels(n));
    labels.push(QubitLabel::System);
    PureStateVector::new(labels, data)
}

/// The exact global state in either environment setting.
#[derive(Clone, Debug)]
pub enum TotalState {
    Ancillae(DensityMatrix),
    Emitters(PureStateVector),
}

impl TotalState {
    pub fn build(params: &ModelParams, t: f64, setting: EnvironmentSetting) -> Result<Self> {
        match setting {
            EnvironmentSetting::AncillaeOnly => Ok(TotalState::Ancillae(build_state_ancillae(params, t)?)),
            EnvironmentSetting::WithEmitters => Ok(TotalState::Emitters(build_state_emitters(params, t)?)),
        }
    }

    pub fn setting(&self) -> EnvironmentSetting {
        match self {
            TotalState::Ancillae(_) => EnvironmentSetting::AncillaeOnly,
            TotalState::Emitters(_) => EnvironmentSetting::WithEmitters,
        }
    }

    pub fn labels(&self) -> &[QubitLabel] {
        match self {
            TotalState::Ancillae(rho) => rho.labels(),
            TotalState::Emitters(psi) => psi.labels(),
        }
    }

    /// Number of environment units (ancillae, or emitter-ancilla pairs).
    pub fn num_units(&self) -> usize {
        match self {
            TotalState::Ancillae(rho) => rho.num_qubits() - 1,
            TotalState::Emitters(psi) => (psi.num_qubits() - 1) / 2,
        }
    }
}

/// Which environment units a fragment keeps.
#[derive(Clone, Debug)]
pub struct FractionSelection {
    kept: BTreeSet<usize>,
    setting: EnvironmentSetting,
}

impl FractionSelection {
    /// The canonical fragment {0, .., count-1}; exchangeability makes any
    /// other choice equivalent.
    pub fn first(count: usize, setting: EnvironmentSetting) -> Self {
        Self { kept: (0..count).collect(), setting }
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>, setting: EnvironmentSetting) -> Self {
        Self { kept: indices.into_iter().collect(), setting }
    }

    /// count distinct units drawn uniformly, for exercising the
    /// exchangeability claim rather than assuming it.
    pub fn sampled<R: Rng>(count: usize, n: usize, rng: &mut R, setting: EnvironmentSetting) -> Result<Self> {
        if count > n {
            return Err(Error::InvalidParam(format!("cannot keep {count} of {n} units")));
        }
        let kept = rand::seq::index::sample(rng, n, count).into_iter().collect();
        Ok(Self { kept, setting })
    }

    pub fn kept(&self) -> &BTreeSet<usize> {
        &self.kept
    }

    pub fn setting(&self) -> EnvironmentSetting {
        self.setting
    }

    fn fragment_labels(&self) -> Vec<QubitLabel> {
        match self.setting {
            EnvironmentSetting::AncillaeOnly => self.kept.iter().map(|&i| QubitLabel::Ancilla(i)).collect(),
            EnvironmentSetting::WithEmitters => self
                .kept
                .iter()
                .flat_map(|&i| [QubitLabel::Emitter(i), QubitLabel::Ancilla(i)])
                .collect(),
        }
    }
}

/// Entropy of the reduction of a pure state onto `part`, going through the
/// complement when that side is smaller; both sides share the spectrum.
fn pure_part_entropy(psi: &PureStateVector, part: &[QubitLabel]) -> Result<f64> {
    let m = psi.num_qubits();
    if part.is_empty() || part.len() == m {
        return Ok(0.0);
    }
    if 2 * part.len() <= m {
        vn_entropy(&reduced_from_pure(psi, part)?)
    } else {
        let complement: Vec<QubitLabel> =
            psi.labels().iter().copied().filter(|l| !part.contains(l)).collect();
        vn_entropy(&reduced_from_pure(psi, &complement)?)
    }
}

/// Mutual information H_S + H_fragment - H_joint between the system and
/// the selected fragment, from partial traces and eigenvalues alone.
pub fn mi_bruteforce(state: &TotalState, selection: &FractionSelection) -> Result<f64> {
    if selection.setting() != state.setting() {
        return Err(Error::LabelMismatch);
    }
    let n = state.num_units();
    if let Some(&bad) = selection.kept().iter().find(|&&i| i >= n) {
        return Err(Error::UnknownLabel(QubitLabel::Ancilla(bad)));
    }
    if selection.kept().is_empty() {
        return Ok(0.0);
    }
    let frag = selection.fragment_labels();
    let mut joint = frag.clone();
    joint.push(QubitLabel::System);
    match state {
        TotalState::Ancillae(rho) => {
            let h_s = vn_entropy(&partial_trace(rho, &[QubitLabel::System])?)?;
            let h_f = vn_entropy(&partial_trace(rho, &frag)?)?;
            let h_joint = vn_entropy(&partial_trace(rho, &joint)?)?;
            Ok(h_s + h_f - h_joint)
        }
        TotalState::Emitters(psi) => {
            let h_s = vn_entropy(&reduced_from_pure(psi, &[QubitLabel::System])?)?;
            let h_f = pure_part_entropy(psi, &frag)?;
            let h_joint = pure_part_entropy(psi, &joint)?;
            Ok(h_s + h_f - h_joint)
        }
    }
}

/// Entanglement entropy across the bipartition (part | rest) of the pure
/// emitter-setting state. Mixed states are rejected: entropy of a
/// reduction is not an entanglement measure for them.
pub fn cut_entanglement(state: &TotalState, part: &[QubitLabel]) -> Result<f64> {
    let psi = match state {
        TotalState::Ancillae(_) => return Err(Error::MixedState),
        TotalState::Emitters(psi) => psi,
    };
    if part.is_empty() || part.len() >= psi.num_qubits() {
        return Err(Error::InvalidParam(
            "cut requires a proper nonempty subset of the labels".into(),
        ));
    }
    for l in part {
        if !psi.labels().contains(l) {
            return Err(Error::UnknownLabel(*l));
        }
    }
    pure_part_entropy(psi, part)
}

/// Reduced state on `keep` in either setting.
pub fn reduced_density(state: &TotalState, keep: &[QubitLabel]) -> Result<DensityMatrix> {
    match state {
        TotalState::Ancillae(rho) => partial_trace(rho, keep),
        TotalState::Emitters(psi) => reduced_from_pure(psi, keep),
    }
}

/// Largest matrix element connecting different configurations of the
/// non-system qubits. Zero means the state is a classical mixture over
/// that register and hence separable across every cut.
pub fn classical_register_defect(rho: &DensityMatrix) -> f64 {
    let m = rho.num_qubits();
    let system_bit: usize = rho
        .labels()
        .iter()
        .position(|&l| l == QubitLabel::System)
        .map(|p| 1 << (m - 1 - p))
        .unwrap_or(0);
    let mut worst = 0.0f64;
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            if (i ^ j) & !system_bit != 0 {
                worst = worst.max(rho.data()[(i, j)].norm());
            }
        }
    }
    worst
}
