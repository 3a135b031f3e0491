//! Monte-Carlo trajectory sampling. A trajectory is fully described by its
//! collision count at each grid time: the unbounded reservoir draws a
//! Poisson arrival stream at rate lambda, the finite reservoir draws the
//! number of collided ancillae, whose increments between grid times are
//! conditionally binomial. The coherence estimator averages
//! (cos theta)^count over trajectories; the free phase e^{-i omega t} is
//! deterministic and applied after averaging.
//!
//! Determinism contract: trajectory i draws from stream i of a
//! counter-based generator keyed on the batch seed, trajectories are
//! aggregated in fixed 1024-trajectory chunks, and chunk partials are
//! merged in index order with compensated summation. Results are therefore
//! byte-identical across runs and across worker counts.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Exp};
use rayon::prelude::*;

use crate::analytic::signed_pow;
use crate::collision::{channel_pow, evolve_free, ModelParams};
use crate::error::{Error, Result};
use crate::qcore::{C64, DensityMatrix, QubitLabel};

/// Trajectories per aggregation chunk. Fixed so the reduction tree does
/// not depend on the number of workers.
const CHUNK: u64 = 1024;

/// A reproducible Monte-Carlo run request.
#[derive(Clone, Debug)]
pub struct TrajectorySpec {
    pub params: ModelParams,
    pub t_grid: Vec<f64>,
    pub n_traj: u64,
    pub seed: u64,
}

impl TrajectorySpec {
    pub fn new(params: ModelParams, t_grid: Vec<f64>, n_traj: u64, seed: u64) -> Result<Self> {
        if n_traj == 0 {
            return Err(Error::InvalidParam("n_traj must be >= 1".into()));
        }
        if t_grid.is_empty() {
            return Err(Error::Grid("empty time grid".into()));
        }
        if !t_grid[0].is_finite() || t_grid[0] < 0.0 {
            return Err(Error::Grid(format!("grid starts at {}, expected >= 0", t_grid[0])));
        }
        for w in t_grid.windows(2) {
            if !(w[1].is_finite() && w[1] > w[0]) {
                return Err(Error::Grid(format!(
                    "grid not strictly increasing at {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { params, t_grid, n_traj, seed })
    }
}

/// Estimator statistics at one grid time.
#[derive(Clone, Copy, Debug)]
pub struct BatchPoint {
    pub t: f64,
    /// Mean of the real factor (cos theta)^count.
    pub mean_factor: f64,
    /// mean_factor carrying the deterministic free phase.
    pub mean_coherence: C64,
    /// Standard error of mean_factor.
    pub stderr: f64,
    pub mean_collision_count: f64,
}

/// Aggregated Monte-Carlo statistics over a whole batch.
#[derive(Clone, Debug)]
pub struct TrajectoryBatchResult {
    pub points: Vec<BatchPoint>,
    pub n_traj: u64,
}

/// Independent generator for one trajectory: same key, dedicated stream.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Collision counts at each grid time for one unbounded-reservoir
/// trajectory: a Poisson stream at rate lambda, counted up to each t.
pub fn sample_counts_inf(params: &ModelParams, t_grid: &[f64], rng: &mut ChaCha8Rng) -> Vec<u64> {
    let exp = Exp::new(params.lambda()).expect("lambda > 0 by construction");
    let mut counts = Vec::with_capacity(t_grid.len());
    let mut next_arrival = rng.sample(exp);
    let mut count = 0u64;
    for &t in t_grid {
        while next_arrival <= t {
            count += 1;
            next_arrival += rng.sample(exp);
        }
        counts.push(count);
    }
    counts
}

/// Per-ancilla collision flags at a single time: each of the n ancillae
/// has collided independently with probability 1 - e^{-lambda t / n}.
pub fn sample_flags_finite(params: &ModelParams, t: f64, rng: &mut ChaCha8Rng) -> Result<Vec<bool>> {
    let n = params.finite_n()?;
    let p = params.collision_probability(t)?;
    Ok((0..n).map(|_| rng.random_bool(p)).collect())
}

/// Numbers of collided ancillae at each grid time for one finite-reservoir
/// trajectory. Given N ancillae collided by the previous time, the
/// increment is Binomial(n - N, (p_j - p_prev) / (1 - p_prev)), which is
/// the exact joint law of the flag process sampled on the grid.
pub fn sample_counts_finite(
    params: &ModelParams,
    t_grid: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<u64>> {
    let n = params.finite_n()?;
    let mut counts = Vec::with_capacity(t_grid.len());
    let mut collided = 0u64;
    let mut p_prev = 0.0f64;
    for &t in t_grid {
        let p = params.collision_probability(t)?;
        let remaining = n - collided;
        if remaining > 0 && p > p_prev {
            let q = if 1.0 - p_prev > 0.0 {
                ((p - p_prev) / (1.0 - p_prev)).clamp(0.0, 1.0)
            } else {
                1.0
            };
            let inc = Binomial::new(remaining, q)
                .map_err(|e| Error::InvalidParam(format!("binomial increment: {e}")))?;
            collided += rng.sample(inc);
        }
        p_prev = p;
        counts.push(collided);
    }
    Ok(counts)
}

struct PointAccum {
    sum_y: f64,
    sum_y2: f64,
    sum_count: f64,
}

/// Compensated (Neumaier) accumulator for the cross-chunk merge.
#[derive(Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

fn chunk_stats(spec: &TrajectorySpec, chunk_index: u64) -> Result<Vec<PointAccum>> {
    let cos = spec.params.theta().cos();
    let lo = chunk_index * CHUNK;
    let hi = (lo + CHUNK).min(spec.n_traj);
    let mut acc: Vec<PointAccum> = spec
        .t_grid
        .iter()
        .map(|_| PointAccum { sum_y: 0.0, sum_y2: 0.0, sum_count: 0.0 })
        .collect();
    let finite = spec.params.n().is_finite();
    for traj in lo..hi {
        let mut rng = trajectory_rng(spec.seed, traj);
        let counts = if finite {
            sample_counts_finite(&spec.params, &spec.t_grid, &mut rng)?
        } else {
            sample_counts_inf(&spec.params, &spec.t_grid, &mut rng)
        };
        for (a, &c) in acc.iter_mut().zip(&counts) {
            let y = signed_pow(cos, c);
            a.sum_y += y;
            a.sum_y2 += y * y;
            a.sum_count += c as f64;
        }
    }
    Ok(acc)
}

/// Runs the batch and aggregates the coherence estimator per grid time.
/// Deterministic for a fixed seed, independent of worker count.
pub fn estimate_coherence(spec: &TrajectorySpec) -> Result<TrajectoryBatchResult> {
    let n_chunks = spec.n_traj.div_ceil(CHUNK);
    let partials: Vec<Result<Vec<PointAccum>>> =
        (0..n_chunks).into_par_iter().map(|ci| chunk_stats(spec, ci)).collect();

    let n_points = spec.t_grid.len();
    let mut sum_y = vec![CompensatedSum::default(); n_points];
    let mut sum_y2 = vec![CompensatedSum::default(); n_points];
    let mut sum_count = vec![CompensatedSum::default(); n_points];
    for partial in partials {
        for (j, a) in partial?.iter().enumerate() {
            sum_y[j].add(a.sum_y);
            sum_y2[j].add(a.sum_y2);
            sum_count[j].add(a.sum_count);
        }
    }

    let m = spec.n_traj as f64;
    let omega = spec.params.omega();
    let points = spec
        .t_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let mean = sum_y[j].value() / m;
            let var = if spec.n_traj > 1 {
                ((sum_y2[j].value() - m * mean * mean) / (m - 1.0)).max(0.0)
            } else {
                0.0
            };
            BatchPoint {
                t,
                mean_factor: mean,
                mean_coherence: C64::from_polar(1.0, -omega * t) * mean,
                stderr: (var / m).sqrt(),
                mean_collision_count: sum_count[j].value() / m,
            }
        })
        .collect();
    Ok(TrajectoryBatchResult { points, n_traj: spec.n_traj })
}

/// Full density matrices along one trajectory, for cross-checking the
/// counts-only estimator against explicit state evolution.
pub fn trajectory_states(spec: &TrajectorySpec, traj_index: u64) -> Result<Vec<DensityMatrix>> {
    if traj_index >= spec.n_traj {
        return Err(Error::InvalidParam(format!(
            "trajectory index {traj_index} out of range for n_traj = {}",
            spec.n_traj
        )));
    }
    let mut rng = trajectory_rng(spec.seed, traj_index);
    let counts = if spec.params.n().is_finite() {
        sample_counts_finite(&spec.params, &spec.t_grid, &mut rng)?
    } else {
        sample_counts_inf(&spec.params, &spec.t_grid, &mut rng)
    };
    let rho0 = DensityMatrix::plus(QubitLabel::System);
    spec.t_grid
        .iter()
        .zip(&counts)
        .map(|(&t, &c)| {
            let collided = channel_pow(&rho0, spec.params.theta(), c as u32)?;
            evolve_free(&collided, spec.params.omega(), t)
        })
        .collect()
}
