//! Labeled multi-qubit states and the dense linear algebra the rest of the
//! crate is built on.
//!
//! Convention, used everywhere: `labels[0]` is the most significant tensor
//! factor of the basis index, so a basis label reads left to right like the
//! label list. Model states keep the system qubit last, i.e. least
//! significant. Entropies are in bits.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;

/// Hermiticity defect tolerated when accepting a density matrix.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace defect tolerated when accepting a density matrix.
pub const TRACE_TOL: f64 = 1e-12;
/// Norm defect tolerated when accepting a pure state vector.
pub const NORM_TOL: f64 = 1e-12;
/// Eigenvalues in `[-EIG_CLAMP_TOL, 0)` are treated as exact zeros when
/// computing entropies; anything lower is rejected as non-positive.
pub const EIG_CLAMP_TOL: f64 = 1e-10;
/// Singular values at or below this level count as zero in entropy sums.
/// Sits well above the solver's noise floor (~1e-15 for unit-trace
/// states) but low enough that a dropped genuine eigenvalue costs under
/// 1e-11 bits, so entropy differences stay good to 1e-10.
pub const ENTROPY_CLAMP_TOL: f64 = 1e-13;

/// Hard cap on qubits per dense state, well past anything the dense
/// routines can allocate anyway.
const MAX_QUBITS: usize = 30;

/// Identity of one qubit inside a labeled state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QubitLabel {
    /// One of the fresh environment qubits the system collides with.
    Ancilla(usize),
    /// The partner qubit a given ancilla is initially excited against.
    Emitter(usize),
    /// The open system qubit.
    System,
}

impl fmt::Display for QubitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QubitLabel::Ancilla(i) => write!(f, "a{i}"),
            QubitLabel::Emitter(i) => write!(f, "e{i}"),
            QubitLabel::System => write!(f, "S"),
        }
    }
}

fn check_labels(labels: &[QubitLabel]) -> Result<()> {
    if labels.len() > MAX_QUBITS {
        return Err(Error::Capacity { qubits: labels.len(), max: MAX_QUBITS });
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::DuplicateLabel(*l));
        }
    }
    Ok(())
}

/// Density matrix on an ordered list of labeled qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    labels: Vec<QubitLabel>,
    data: DMatrix<C64>,
}

impl DensityMatrix {
    /// Accepts a matrix as a state after checking dimensions, label
    /// uniqueness, hermiticity and unit trace. Positivity is only checked
    /// where eigenvalues are actually computed.
    pub fn new(labels: Vec<QubitLabel>, data: DMatrix<C64>) -> Result<Self> {
        check_labels(&labels)?;
        let dim = 1usize << labels.len();
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{}, expected {dim}x{dim} for {} qubit(s)",
                data.nrows(),
                data.ncols(),
                labels.len()
            )));
        }
        for i in 0..dim {
            for j in i..dim {
                let defect = (data[(i, j)] - data[(j, i)].conj()).norm();
                if defect > HERMITICITY_TOL {
                    return Err(Error::InvalidState(format!(
                        "hermiticity defect {defect:.3e} at ({i}, {j})"
                    )));
                }
            }
        }
        let trace_defect = (data.trace() - C64::new(1.0, 0.0)).norm();
        if trace_defect > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace defect {trace_defect:.3e}")));
        }
        Ok(Self { labels, data })
    }

    /// Builds the projector onto a pure state.
    pub fn from_pure(psi: &PureStateVector) -> Self {
        let data = &psi.data * psi.data.adjoint();
        Self { labels: psi.labels.clone(), data }
    }

    /// Single qubit in the computational ground state.
    pub fn ground(label: QubitLabel) -> Self {
        let mut data = DMatrix::zeros(2, 2);
        data[(0, 0)] = C64::new(1.0, 0.0);
        Self { labels: vec![label], data }
    }

    /// Single qubit in the computational excited state.
    pub fn excited(label: QubitLabel) -> Self {
        let mut data = DMatrix::zeros(2, 2);
        data[(1, 1)] = C64::new(1.0, 0.0);
        Self { labels: vec![label], data }
    }

    /// Single qubit state (|0> + |1>)/sqrt(2), the natural probe for
    /// dephasing.
    pub fn plus(label: QubitLabel) -> Self {
        let h = C64::new(0.5, 0.0);
        Self { labels: vec![label], data: DMatrix::from_element(2, 2, h) }
    }

    /// Single qubit state (|0> - |1>)/sqrt(2).
    pub fn minus(label: QubitLabel) -> Self {
        let h = C64::new(0.5, 0.0);
        let mut data = DMatrix::from_element(2, 2, h);
        data[(0, 1)] = -h;
        data[(1, 0)] = -h;
        Self { labels: vec![label], data }
    }

    /// Single qubit maximally mixed state.
    pub fn maximally_mixed(label: QubitLabel) -> Self {
        let data = DMatrix::from_diagonal_element(2, 2, C64::new(0.5, 0.0));
        Self { labels: vec![label], data }
    }

    pub(crate) fn from_parts_unchecked(labels: Vec<QubitLabel>, data: DMatrix<C64>) -> Self {
        Self { labels, data }
    }

    pub fn labels(&self) -> &[QubitLabel] {
        &self.labels
    }

    pub fn data(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// Tr(rho^2); 1 for pure states, 1/dim for the maximally mixed one.
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += (self.data[(i, j)] * self.data[(j, i)]).re;
            }
        }
        acc
    }
}

/// Pure state vector on an ordered list of labeled qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureStateVector {
    labels: Vec<QubitLabel>,
    data: DVector<C64>,
}

impl PureStateVector {
    pub fn new(labels: Vec<QubitLabel>, data: DVector<C64>) -> Result<Self> {
        check_labels(&labels)?;
        let dim = 1usize << labels.len();
        if data.len() != dim {
            return Err(Error::InvalidState(format!(
                "vector has {} entries, expected {dim} for {} qubit(s)",
                data.len(),
                labels.len()
            )));
        }
        let norm_defect = (data.norm() - 1.0).abs();
        if norm_defect > NORM_TOL {
            return Err(Error::InvalidState(format!("norm defect {norm_defect:.3e}")));
        }
        Ok(Self { labels, data })
    }

    pub fn labels(&self) -> &[QubitLabel] {
        &self.labels
    }

    pub fn data(&self) -> &DVector<C64> {
        &self.data
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// Tensor product, `self` becoming the more significant factor.
    pub fn tensor(&self, other: &PureStateVector) -> Result<PureStateVector> {
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        check_labels(&labels)?;
        Ok(PureStateVector { labels, data: self.data.kronecker(&other.data) })
    }
}

/// Tensor product of two states on disjoint label sets; `a` becomes the
/// more significant factor.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let mut labels = a.labels.clone();
    labels.extend_from_slice(&b.labels);
    check_labels(&labels)?;
    Ok(DensityMatrix { labels, data: a.data.kronecker(&b.data) })
}

/// Bit position (shift) of each listed qubit position inside the basis
/// index of a state on `m` qubits.
fn shifts_of(positions: &[usize], m: usize) -> Vec<u32> {
    positions.iter().map(|&p| (m - 1 - p) as u32).collect()
}

/// Expands a compact sub-register index into a full-state basis index,
/// placing bit `j` (counted from the most significant end of `idx`) at
/// `shifts[j]`.
fn scatter(idx: usize, shifts: &[u32]) -> usize {
    let q = shifts.len();
    let mut out = 0usize;
    for (j, &s) in shifts.iter().enumerate() {
        if (idx >> (q - 1 - j)) & 1 == 1 {
            out |= 1usize << s;
        }
    }
    out
}

fn split_positions(state_labels: &[QubitLabel], keep: &[QubitLabel]) -> Result<(Vec<usize>, Vec<usize>)> {
    for k in keep {
        if !state_labels.contains(k) {
            return Err(Error::UnknownLabel(*k));
        }
    }
    check_labels(keep)?;
    let mut kept = Vec::new();
    let mut traced = Vec::new();
    for (p, l) in state_labels.iter().enumerate() {
        if keep.contains(l) {
            kept.push(p);
        } else {
            traced.push(p);
        }
    }
    Ok((kept, traced))
}

/// Reduced state on `keep`, in the original relative label order. The
/// empty set is rejected; a full set returns a copy.
pub fn partial_trace(rho: &DensityMatrix, keep: &[QubitLabel]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    let m = rho.num_qubits();
    let (kept_pos, traced_pos) = split_positions(&rho.labels, keep)?;
    if traced_pos.is_empty() {
        return Ok(rho.clone());
    }
    let keep_shift = shifts_of(&kept_pos, m);
    let traced_shift = shifts_of(&traced_pos, m);
    let dk = 1usize << kept_pos.len();
    let dt = 1usize << traced_pos.len();
    let keep_base: Vec<usize> = (0..dk).map(|i| scatter(i, &keep_shift)).collect();
    let traced_base: Vec<usize> = (0..dt).map(|r| scatter(r, &traced_shift)).collect();
    let mut out = DMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for &e in &traced_base {
                acc += rho.data[(keep_base[i] | e, keep_base[j] | e)];
            }
            out[(i, j)] = acc;
        }
    }
    let labels = kept_pos.iter().map(|&p| rho.labels[p]).collect();
    Ok(DensityMatrix { labels, data: out })
}

/// Reduced density matrix of a pure state on `keep`, built from the
/// amplitude matrix as a Gram product instead of forming the full
/// projector.
pub fn reduced_from_pure(psi: &PureStateVector, keep: &[QubitLabel]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    let m = psi.num_qubits();
    let (kept_pos, traced_pos) = split_positions(&psi.labels, keep)?;
    let keep_shift = shifts_of(&kept_pos, m);
    let traced_shift = shifts_of(&traced_pos, m);
    let dk = 1usize << kept_pos.len();
    let dt = 1usize << traced_pos.len();
    let mut amp = DMatrix::zeros(dk, dt);
    for i in 0..dk {
        let bi = scatter(i, &keep_shift);
        for r in 0..dt {
            amp[(i, r)] = psi.data[bi | scatter(r, &traced_shift)];
        }
    }
    let data = &amp * amp.adjoint();
    let labels = kept_pos.iter().map(|&p| psi.labels[p]).collect();
    Ok(DensityMatrix { labels, data })
}

/// Von Neumann entropy in bits. Eigenvalues inside the clamp window count
/// as zero; anything below it means the matrix is not a state.
pub fn vn_entropy(rho: &DensityMatrix) -> Result<f64> {
    // Singular values, not symmetric_eigenvalues: the QL iteration can
    // emit NaN on heavily degenerate spectra with denormal tails, which
    // the reduced states here produce routinely. For Hermitian input the
    // singular values are |eigenvalues|, so a genuinely negative
    // eigenvalue shows up as an excess of their sum over the trace.
    let svals = rho.data.clone().svd(false, false).singular_values;
    let defect = svals.iter().sum::<f64>() - rho.data.trace().re;
    if defect > 2.0 * EIG_CLAMP_TOL {
        return Err(Error::InvalidState(format!("negative eigenvalue -{:.3e}", defect / 2.0)));
    }
    let mut h = 0.0;
    for &lam in svals.iter() {
        if lam > ENTROPY_CLAMP_TOL {
            h -= lam * lam.log2();
        }
    }
    Ok(h.max(0.0))
}

/// Trace distance (1/2)||a - b||_1. The difference of two hermitian
/// matrices is hermitian, so the singular values are absolute eigenvalues.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.labels != b.labels {
        return Err(Error::LabelMismatch);
    }
    let diff = &a.data - &b.data;
    Ok(diff.svd(false, false).singular_values.iter().sum::<f64>() / 2.0)
}

/// Two-qubit concurrence via the spin-flip spectrum: with `Y = sy (x) sy`
/// and `l_1 >= ... >= l_4` the square roots of the eigenvalues of
/// `rho Y conj(rho) Y`, the concurrence is `max(0, l_1 - l_2 - l_3 - l_4)`.
/// The roots are computed as the singular values of
/// `W = sqrt(rho) Y conj(sqrt(rho))`, since `W W^dag` is similar to
/// `rho Y conj(rho) Y`; unlike a general eigensolve on that non-normal
/// product, the SVD keeps full absolute accuracy on the degenerate spectra
/// that show up at separable points. Eigenvalues of rho below 1e-13 are
/// treated as exact zeros so the matrix square root does not amplify
/// rounding noise.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.num_qubits() != 2 {
        return Err(Error::WrongQubitCount { expected: 2, got: rho.num_qubits() });
    }
    let yy = sigma_y().kronecker(&sigma_y());
    let eig = rho.data.clone().symmetric_eigen();
    let sqrt_d = DVector::from_iterator(
        4,
        eig.eigenvalues.iter().map(|&d| C64::new(if d > 1e-13 { d.sqrt() } else { 0.0 }, 0.0)),
    );
    let sqrt_rho = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_d) * eig.eigenvectors.adjoint();
    let w = &sqrt_rho * yy * sqrt_rho.conjugate();
    let mut roots: Vec<f64> = w.svd(false, false).singular_values.iter().copied().collect();
    roots.sort_by(|x, y| y.total_cmp(x));
    Ok((roots[0] - roots[1] - roots[2] - roots[3]).max(0.0))
}

pub fn identity2() -> DMatrix<C64> {
    DMatrix::identity(2, 2)
}

pub fn sigma_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
    ])
}

pub fn sigma_y() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[
        C64::new(0.0, 0.0),
        C64::new(0.0, -1.0),
        C64::new(0.0, 1.0),
        C64::new(0.0, 0.0),
    ])
}

pub fn sigma_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(-1.0, 0.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    use QubitLabel::{Ancilla, Emitter, System};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Random single-qubit state with Bloch radius <= 1.
    fn random_qubit(label: QubitLabel, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let (x, y, z) = loop {
            let v: (f64, f64, f64) = (
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if (v.0 * v.0 + v.1 * v.1 + v.2 * v.2) <= 1.0 {
                break v;
            }
        };
        let data = DMatrix::from_row_slice(2, 2, &[
            c(0.5 * (1.0 + z), 0.0),
            c(0.5 * x, -0.5 * y),
            c(0.5 * x, 0.5 * y),
            c(0.5 * (1.0 - z), 0.0),
        ]);
        DensityMatrix::new(vec![label], data).unwrap()
    }

    /// Random pure two-qubit state.
    fn random_two_qubit_pure(rng: &mut ChaCha8Rng) -> PureStateVector {
        let mut v = DVector::from_fn(4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        v /= c(v.norm(), 0.0);
        PureStateVector::new(vec![Ancilla(0), System], v).unwrap()
    }

    /// Haar-ish random unitary from the QR of a complex Gaussian-ish matrix.
    fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        g.qr().q()
    }

    /// Concurrence of a pure two-qubit state computed by an independent
    /// route: twice the product of the Schmidt coefficients, read off the
    /// singular values of the 2x2 amplitude matrix.
    fn concurrence_pure_schmidt(psi: &PureStateVector) -> f64 {
        let amp = DMatrix::from_fn(2, 2, |i, j| psi.data()[2 * i + j]);
        let sv = amp.svd(false, false).singular_values;
        2.0 * sv[0] * sv[1]
    }

    fn bell_phi_plus() -> PureStateVector {
        let s = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let v = DVector::from_vec(vec![s, c(0.0, 0.0), c(0.0, 0.0), s]);
        PureStateVector::new(vec![Ancilla(0), System], v).unwrap()
    }

    #[test]
    fn rejects_duplicate_labels() {
        let data = DMatrix::from_diagonal_element(4, 4, c(0.25, 0.0));
        let err = DensityMatrix::new(vec![System, System], data).unwrap_err();
        assert!(matches!(err, Error::DuplicateLabel(System)));
    }

    #[test]
    fn rejects_non_hermitian_and_traceless() {
        let mut data = DMatrix::from_diagonal_element(2, 2, c(0.5, 0.0));
        data[(0, 1)] = c(0.3, 0.0);
        assert!(DensityMatrix::new(vec![System], data).is_err());

        let data = DMatrix::from_diagonal_element(2, 2, c(0.7, 0.0));
        assert!(DensityMatrix::new(vec![System], data).is_err());
    }

    #[test]
    fn zero_qubit_scalar_state_is_accepted() {
        let unit = DensityMatrix::new(vec![], DMatrix::from_element(1, 1, c(1.0, 0.0))).unwrap();
        assert_eq!(unit.num_qubits(), 0);
        assert_abs_diff_eq!(vn_entropy(&unit).unwrap(), 0.0, epsilon = 1e-15);
        // tensoring with the scalar unit changes nothing
        let rho = DensityMatrix::plus(System);
        let out = tensor(&rho, &unit).unwrap();
        assert_eq!(out.labels(), rho.labels());
        assert_eq!(out.data(), rho.data());
    }

    #[test]
    fn tensor_puts_first_factor_most_significant() {
        // ancilla ground state (x) maximally mixed system, system last
        let rho = tensor(
            &DensityMatrix::ground(Ancilla(0)),
            &DensityMatrix::maximally_mixed(System),
        )
        .unwrap();
        assert_eq!(rho.labels(), &[Ancilla(0), System]);
        let expect = [0.5, 0.5, 0.0, 0.0];
        for (i, e) in expect.iter().enumerate() {
            assert_abs_diff_eq!(rho.data()[(i, i)].re, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn tensor_rejects_overlapping_labels() {
        let a = DensityMatrix::ground(System);
        let b = DensityMatrix::plus(System);
        assert!(matches!(tensor(&a, &b), Err(Error::DuplicateLabel(System))));
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let rho = bell_phi_plus().to_density();
        for keep in [System, Ancilla(0)] {
            let red = partial_trace(&rho, &[keep]).unwrap();
            assert_eq!(red.labels(), &[keep]);
            for i in 0..2 {
                for j in 0..2 {
                    let expect = if i == j { 0.5 } else { 0.0 };
                    assert_abs_diff_eq!(red.data()[(i, j)].norm(), expect, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn partial_trace_empty_keep_is_an_error() {
        let rho = DensityMatrix::plus(System);
        assert!(matches!(partial_trace(&rho, &[]), Err(Error::EmptyKeep)));
    }

    #[test]
    fn partial_trace_unknown_label_is_an_error() {
        let rho = DensityMatrix::plus(System);
        assert!(matches!(
            partial_trace(&rho, &[Ancilla(3)]),
            Err(Error::UnknownLabel(Ancilla(3)))
        ));
    }

    #[test]
    fn partial_trace_inverts_tensor_on_random_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let a = random_qubit(Ancilla(1), &mut rng);
            let b = random_qubit(Emitter(0), &mut rng);
            let s = random_qubit(System, &mut rng);
            let joint = tensor(&tensor(&a, &b).unwrap(), &s).unwrap();
            for (orig, keep) in [(&a, Ancilla(1)), (&b, Emitter(0)), (&s, System)] {
                let red = partial_trace(&joint, &[keep]).unwrap();
                let dev = (red.data() - orig.data()).map(|z| z.norm()).max();
                assert!(dev <= 1e-12, "round trip defect {dev:.3e}");
            }
            // keeping two of three preserves relative order
            let red = partial_trace(&joint, &[System, Ancilla(1)]).unwrap();
            assert_eq!(red.labels(), &[Ancilla(1), System]);
            let expect = tensor(&a, &s).unwrap();
            let dev = (red.data() - expect.data()).map(|z| z.norm()).max();
            assert!(dev <= 1e-12);
        }
    }

    #[test]
    fn reduced_from_pure_matches_partial_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..20 {
            let psi = {
                let mut v = DVector::from_fn(8, |_, _| {
                    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                v /= c(v.norm(), 0.0);
                PureStateVector::new(vec![Emitter(0), Ancilla(0), System], v).unwrap()
            };
            let rho = psi.to_density();
            for keep in [vec![System], vec![Emitter(0), System], vec![Ancilla(0)]] {
                let a = reduced_from_pure(&psi, &keep).unwrap();
                let b = partial_trace(&rho, &keep).unwrap();
                assert_eq!(a.labels(), b.labels());
                let dev = (a.data() - b.data()).map(|z| z.norm()).max();
                assert!(dev <= 1e-13, "gram/trace mismatch {dev:.3e}");
            }
        }
    }

    #[test]
    fn vn_entropy_reference_points() {
        assert_abs_diff_eq!(vn_entropy(&DensityMatrix::plus(System)).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            vn_entropy(&DensityMatrix::maximally_mixed(System)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // diag(p, 1-p) has the binary entropy, computed here directly
        let p: f64 = 0.3;
        let expect = -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        let rho = DensityMatrix::new(
            vec![System],
            DMatrix::from_diagonal(&DVector::from_vec(vec![c(p, 0.0), c(1.0 - p, 0.0)])),
        )
        .unwrap();
        assert_abs_diff_eq!(vn_entropy(&rho).unwrap(), expect, epsilon = 1e-12);
    }

    #[test]
    fn vn_entropy_clamps_tiny_negatives_and_rejects_real_ones() {
        // a tolerated negative eigenvalue enters the sum as its magnitude,
        // so keep it small enough that the contribution stays below 1e-9
        let eps = 5e-12;
        let ok = DensityMatrix::new(
            vec![System],
            DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0 + eps, 0.0), c(-eps, 0.0)])),
        )
        .unwrap();
        assert_abs_diff_eq!(vn_entropy(&ok).unwrap(), 0.0, epsilon = 1e-9);

        let bad_eps = 1e-6;
        let bad = DensityMatrix::new(
            vec![System],
            DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0 + bad_eps, 0.0), c(-bad_eps, 0.0)])),
        )
        .unwrap();
        assert!(vn_entropy(&bad).is_err());
    }

    #[test]
    fn vn_entropy_is_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let rho = tensor(
                &random_qubit(Ancilla(0), &mut rng),
                &random_qubit(System, &mut rng),
            )
            .unwrap();
            let h0 = vn_entropy(&rho).unwrap();
            let u = random_unitary(4, &mut rng);
            let rotated = DensityMatrix::new(
                rho.labels().to_vec(),
                &u * rho.data() * u.adjoint(),
            )
            .unwrap();
            assert_abs_diff_eq!(vn_entropy(&rotated).unwrap(), h0, epsilon = 1e-10);
        }
    }

    #[test]
    fn trace_distance_reference_points_and_triangle() {
        let plus = DensityMatrix::plus(System);
        let minus = DensityMatrix::minus(System);
        assert_abs_diff_eq!(trace_distance(&plus, &plus).unwrap(), 0.0, epsilon = 1e-15);
        // orthogonal pure states sit at distance one
        assert_abs_diff_eq!(trace_distance(&plus, &minus).unwrap(), 1.0, epsilon = 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let a = random_qubit(System, &mut rng);
            let b = random_qubit(System, &mut rng);
            let m = random_qubit(System, &mut rng);
            let dab = trace_distance(&a, &b).unwrap();
            let dam = trace_distance(&a, &m).unwrap();
            let dmb = trace_distance(&m, &b).unwrap();
            assert!(dab <= dam + dmb + 1e-10);
            assert!((0.0..=1.0 + 1e-12).contains(&dab));
        }
    }

    #[test]
    fn trace_distance_requires_matching_labels() {
        let a = DensityMatrix::plus(System);
        let b = DensityMatrix::plus(Ancilla(0));
        assert!(matches!(trace_distance(&a, &b), Err(Error::LabelMismatch)));
    }

    #[test]
    fn concurrence_endpoints() {
        assert_abs_diff_eq!(concurrence(&bell_phi_plus().to_density()).unwrap(), 1.0, epsilon = 1e-10);
        let product = tensor(&DensityMatrix::ground(Ancilla(0)), &DensityMatrix::plus(System)).unwrap();
        assert_abs_diff_eq!(concurrence(&product).unwrap(), 0.0, epsilon = 1e-10);
        assert!(concurrence(&DensityMatrix::plus(System)).is_err());
    }

    #[test]
    fn concurrence_agrees_with_schmidt_route_on_random_pure_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let psi = random_two_qubit_pure(&mut rng);
            let via_spectrum = concurrence(&psi.to_density()).unwrap();
            let via_schmidt = concurrence_pure_schmidt(&psi);
            assert_abs_diff_eq!(via_spectrum, via_schmidt, epsilon = 1e-10);
        }
    }

    #[test]
    fn purity_tracks_mixedness() {
        assert_abs_diff_eq!(DensityMatrix::plus(System).purity(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(DensityMatrix::maximally_mixed(System).purity(), 0.5, epsilon = 1e-14);
    }
}
