//! Microscopic dynamics: the two-qubit collision unitary, the induced
//! single-qubit Kraus channel, repeated collisions, free precession, and a
//! fixed-step integrator for the coarse-grained master equation.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qcore::{self, C64, DensityMatrix};

/// Number of environment qubits feeding the collision stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AncillaCount {
    Finite(u64),
    /// Unbounded reservoir; the total collision rate stays lambda.
    Infinite,
}

impl AncillaCount {
    pub fn is_finite(self) -> bool {
        matches!(self, AncillaCount::Finite(_))
    }
}

/// Model parameters shared by every computation path. `theta` is held in
/// the canonical range (-pi, pi]; constructors canonicalize any real input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    theta: f64,
    lambda: f64,
    omega: f64,
    n: AncillaCount,
}

/// Maps an angle into (-pi, pi], preserving its cosine and sine exactly up
/// to rounding in the reduction.
pub fn canonical_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut t = theta.rem_euclid(two_pi);
    if t > std::f64::consts::PI {
        t -= two_pi;
    }
    t
}

impl ModelParams {
    pub fn new(theta: f64, lambda: f64, omega: f64, n: AncillaCount) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidParam(format!("theta = {theta} is not finite")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParam(format!("lambda = {lambda}, expected > 0")));
        }
        if !omega.is_finite() {
            return Err(Error::InvalidParam(format!("omega = {omega} is not finite")));
        }
        if n == AncillaCount::Finite(0) {
            return Err(Error::InvalidParam("ancilla count must be >= 1".into()));
        }
        Ok(Self { theta: canonical_angle(theta), lambda, omega, n })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n(&self) -> AncillaCount {
        self.n
    }

    pub fn finite_n(&self) -> Result<u64> {
        match self.n {
            AncillaCount::Finite(n) => Ok(n),
            AncillaCount::Infinite => Err(Error::RequiresFinite("finite_n")),
        }
    }

    /// Exponential dephasing rate lambda*(1 - cos theta) of the
    /// coarse-grained dynamics.
    pub fn dephasing_rate(&self) -> f64 {
        self.lambda * (1.0 - self.theta.cos())
    }

    /// One collision flips the coherence sign outright (cos theta = -1).
    pub fn is_fully_dephasing(&self) -> bool {
        (self.theta.cos() + 1.0).abs() <= 1e-12
    }

    /// Probability that a given one of the n ancillae has collided by
    /// time t. Uses expm1 so small lambda*t/n does not lose precision.
    pub fn collision_probability(&self, t: f64) -> Result<f64> {
        let n = self.finite_n()? as f64;
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParam(format!("t = {t}, expected >= 0")));
        }
        Ok(-(-self.lambda * t / n).exp_m1())
    }
}

/// The channel's Kraus pair {K, K'}; K = diag(e^{-i theta/2}, e^{i theta/2})/sqrt(2).
#[derive(Clone, Debug)]
pub struct KrausPair {
    pub k: DMatrix<C64>,
    pub k_dagger: DMatrix<C64>,
}

impl KrausPair {
    pub fn new(theta: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut k = DMatrix::zeros(2, 2);
        k[(0, 0)] = C64::from_polar(s, -theta / 2.0);
        k[(1, 1)] = C64::from_polar(s, theta / 2.0);
        let k_dagger = k.adjoint();
        Self { k, k_dagger }
    }

    /// Max abs element of K'K + KK' - I.
    pub fn completeness_defect(&self) -> f64 {
        let sum = &self.k_dagger * &self.k + &self.k * &self.k_dagger;
        (sum - DMatrix::<C64>::identity(2, 2)).map(|z| z.norm()).max()
    }
}

/// Two-qubit collision unitary cos(theta/2) I - i sin(theta/2) (sx (x) sz)
/// in [ancilla, system] ordering.
pub fn collision_unitary(theta: f64) -> DMatrix<C64> {
    let xz = qcore::sigma_x().kronecker(&qcore::sigma_z());
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::new(0.0, -(theta / 2.0).sin());
    DMatrix::<C64>::identity(4, 4) * c + xz * s
}

/// One collision seen from the system alone: K rho K' + K' rho K. Leaves
/// populations fixed and multiplies coherences by cos theta.
pub fn collision_channel(rho_s: &DensityMatrix, theta: f64) -> Result<DensityMatrix> {
    if rho_s.num_qubits() != 1 {
        return Err(Error::WrongQubitCount { expected: 1, got: rho_s.num_qubits() });
    }
    let kp = KrausPair::new(theta);
    let data = &kp.k * rho_s.data() * &kp.k_dagger + &kp.k_dagger * rho_s.data() * &kp.k;
    Ok(DensityMatrix::from_parts_unchecked(rho_s.labels().to_vec(), data))
}

/// k successive collisions; coherences pick up cos^k theta.
pub fn channel_pow(rho_s: &DensityMatrix, theta: f64, k: u32) -> Result<DensityMatrix> {
    let mut out = rho_s.clone();
    for _ in 0..k {
        out = collision_channel(&out, theta)?;
    }
    Ok(out)
}

/// Free single-qubit propagator diag(e^{-i omega t/2}, e^{i omega t/2}).
pub fn free_unitary(omega: f64, t: f64) -> DMatrix<C64> {
    let mut u = DMatrix::zeros(2, 2);
    u[(0, 0)] = C64::from_polar(1.0, -omega * t / 2.0);
    u[(1, 1)] = C64::from_polar(1.0, omega * t / 2.0);
    u
}

/// Precession of a single qubit for time t at frequency omega.
pub fn evolve_free(rho_s: &DensityMatrix, omega: f64, t: f64) -> Result<DensityMatrix> {
    if rho_s.num_qubits() != 1 {
        return Err(Error::WrongQubitCount { expected: 1, got: rho_s.num_qubits() });
    }
    let u = free_unitary(omega, t);
    let data = &u * rho_s.data() * u.adjoint();
    Ok(DensityMatrix::from_parts_unchecked(rho_s.labels().to_vec(), data))
}

/// Right-hand side -i[H, rho] + lambda (Phi[rho] - rho) with
/// H = (omega/2) sz.
fn gksl_rhs(rho: &DMatrix<C64>, params: &ModelParams, kp: &KrausPair) -> DMatrix<C64> {
    let h = qcore::sigma_z() * C64::new(params.omega() / 2.0, 0.0);
    let comm = &h * rho - rho * &h;
    let phi = &kp.k * rho * &kp.k_dagger + &kp.k_dagger * rho * &kp.k;
    comm * C64::new(0.0, -1.0) + (phi - rho) * C64::new(params.lambda(), 0.0)
}

fn rk4_step(rho: &DMatrix<C64>, h: f64, params: &ModelParams, kp: &KrausPair) -> DMatrix<C64> {
    let half = C64::new(h / 2.0, 0.0);
    let full = C64::new(h, 0.0);
    let k1 = gksl_rhs(rho, params, kp);
    let k2 = gksl_rhs(&(rho + &k1 * half), params, kp);
    let k3 = gksl_rhs(&(rho + &k2 * half), params, kp);
    let k4 = gksl_rhs(&(rho + &k3 * full), params, kp);
    rho + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0)
}

/// Fixed step so runs are bit-reproducible; small enough that the local
/// truncation error sits well under the 1e-8 closed-form tolerance.
fn gksl_step_size(params: &ModelParams) -> f64 {
    let scale = params.lambda().max(params.omega().abs()).max(1.0);
    (1e-3f64).min(1.0 / (50.0 * scale))
}

/// Integrates the master equation from t = 0, reporting the state at each
/// grid time. The grid must be strictly increasing and start at or after 0.
pub fn integrate_gksl(
    rho0: &DensityMatrix,
    params: &ModelParams,
    t_grid: &[f64],
) -> Result<Vec<DensityMatrix>> {
    if rho0.num_qubits() != 1 {
        return Err(Error::WrongQubitCount { expected: 1, got: rho0.num_qubits() });
    }
    if t_grid.is_empty() {
        return Err(Error::Grid("empty time grid".into()));
    }
    if !t_grid[0].is_finite() || t_grid[0] < 0.0 {
        return Err(Error::Grid(format!("grid starts at {}, expected >= 0", t_grid[0])));
    }
    for w in t_grid.windows(2) {
        if !(w[1].is_finite() && w[1] > w[0]) {
            return Err(Error::Grid(format!("grid not strictly increasing at {} -> {}", w[0], w[1])));
        }
    }
    let kp = KrausPair::new(params.theta());
    let h_max = gksl_step_size(params);
    let mut rho = rho0.data().clone();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        let span = target - t;
        if span > 0.0 {
            // land exactly on the grid point: equal substeps no larger than h_max
            let steps = (span / h_max).ceil() as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                rho = rk4_step(&rho, h, params, &kp);
            }
        }
        t = target;
        let state = DensityMatrix::new(rho0.labels().to_vec(), rho.clone())
            .map_err(|e| Error::Integration(format!("state invalid at t = {target}: {e}")))?;
        out.push(state);
    }
    Ok(out)
}
