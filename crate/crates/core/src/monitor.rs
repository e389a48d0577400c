//! Continuous photodetection of the detector: quantum jumps, no-count
//! evolution and projective post-selection.
//!
//! A click applies one jump operator `L_i`; between clicks the state evolves
//! under `H − iR/2` with `R = Σ L_i† L_i`, and its squared norm is the
//! probability of having seen no click.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::evolve::{is_member, stop_times, Propagator};
use crate::fock::{
    projector, sigma, HilbertSpace, LinearOperator, Moments, ObservableSeries, StateVector,
    Symmetry,
};
use crate::model::{DetectorSpec, FrameTag, Hamiltonian};

/// Largest admissible `dt · max⟨R⟩` for first-order click sampling.
pub const MAX_CLICK_PROBABILITY: f64 = 0.1;
/// Squared norms below this end a no-count propagation.
pub const EXTINCTION_NORM_SQR: f64 = 1e-15;
/// Outcomes with probability below this are rejected by [`postselect`].
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-15;

/// Jump operators `L_i` (read-out rates absorbed as `√λ` factors) and the
/// cached `R = Σ L_i† L_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpModel {
    operators: Vec<LinearOperator>,
    rate_operator: LinearOperator,
}

impl JumpModel {
    pub fn new(space: HilbertSpace, operators: Vec<LinearOperator>) -> Result<Self> {
        if let Some(op) = operators.iter().find(|op| op.space() != space) {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: op.dim(),
            });
        }
        let rate_operator = operators
            .iter()
            .fold(LinearOperator::zeros(space), |acc, l| acc.add(&l.adjoint().mul(l)))
            .with_symmetry(Symmetry::Hermitian)?;
        Ok(Self {
            operators,
            rate_operator,
        })
    }

    pub fn space(&self) -> HilbertSpace {
        self.rate_operator.space()
    }

    pub fn operators(&self) -> &[LinearOperator] {
        &self.operators
    }

    /// `R = Σ L_i† L_i`.
    pub fn rate_operator(&self) -> &LinearOperator {
        &self.rate_operator
    }

    /// Upper bound on `⟨R⟩` over all states.
    pub fn max_rate(&self) -> f64 {
        self.rate_operator.row_sum_bound()
    }

    /// Click rate `⟨R⟩ = Tr[Jρ]` of the normalized state.
    pub fn click_rate(&self, state: &StateVector) -> f64 {
        let weights = self.channel_weights(state);
        weights.iter().sum::<f64>() / state.norm_sqr()
    }

    /// `‖L_i ψ‖²` per channel.
    pub fn channel_weights(&self, state: &StateVector) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); state.amplitudes().len()];
        self.operators
            .iter()
            .map(|l| {
                l.apply_into(state.amplitudes(), &mut buf);
                buf.iter().map(|a| a.norm_sqr()).sum()
            })
            .collect()
    }

    /// Applies `L_channel` and renormalizes: the post-click state.
    pub fn jump(&self, channel: usize, state: &StateVector) -> Result<StateVector> {
        let op = self.operators.get(channel).ok_or(Error::LevelOutOfRange {
            index: channel,
            levels: self.operators.len(),
        })?;
        let mut out = op.apply(state)?;
        let weight = out.norm_sqr() / state.norm_sqr();
        if weight < MIN_OUTCOME_PROBABILITY {
            return Err(Error::ImpossibleOutcome {
                probability: weight,
            });
        }
        out.normalize();
        Ok(out)
    }
}

/// Adjacent lowering `L_j = √λ_j σ̂_{j,j+1}` for `j = 1..N−1` with one rate
/// per transition.
pub fn transition_jump_model(space: HilbertSpace, rates: &[f64]) -> Result<JumpModel> {
    let levels = space.n_levels();
    if rates.len() + 1 != levels {
        return Err(invalid(
            "rates",
            format!("{levels} levels need {} transition rates, got {}", levels - 1, rates.len()),
        ));
    }
    if let Some(r) = rates.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
        return Err(invalid("rates", format!("read-out rate {r} must be non-negative")));
    }
    let operators = rates
        .iter()
        .enumerate()
        .map(|(j, &rate)| Ok(sigma(space, j + 1, j + 2)?.scale(Complex64::new(libm::sqrt(rate), 0.0))))
        .collect::<Result<Vec<_>>>()?;
    JumpModel::new(space, operators)
}

/// Uniform adjacent lowering `L_j = √λ σ̂_{j,j+1}`.
pub fn default_jump_model(det: &DetectorSpec, space: HilbertSpace, rate: f64) -> Result<JumpModel> {
    if det.levels() != space.n_levels() {
        return Err(Error::DimensionMismatch {
            expected: det.levels(),
            found: space.n_levels(),
        });
    }
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(invalid("rate", "read-out rate must be non-negative"));
    }
    transition_jump_model(space, &vec![rate; space.n_levels() - 1])
}

/// Propagates under `H − iR/2` from `t0` to `t1` without renormalizing; the
/// returned squared norm is the no-click probability times the initial one.
pub fn no_count_evolve(
    hamiltonian: &Hamiltonian,
    jump: &JumpModel,
    state: &StateVector,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<StateVector> {
    if state.space() != hamiltonian.space() {
        return Err(Error::DimensionMismatch {
            expected: hamiltonian.space().dim(),
            found: state.amplitudes().len(),
        });
    }
    if state.norm_sqr() > 1.0 + 1e-9 {
        return Err(invalid("state", "no-count evolution needs norm ≤ 1"));
    }
    let mut propagator = Propagator::new(hamiltonian, dt)?.with_decay(jump.rate_operator())?;
    let mut out = state.clone();
    propagator.advance(t0, t1, out.amplitudes_mut(), |time, psi| {
        let norm_sqr: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if norm_sqr < EXTINCTION_NORM_SQR {
            Err(Error::Extinct { time })
        } else {
            Ok(())
        }
    })?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfig {
    pub t_end: f64,
    pub dt: f64,
    /// Moments are recorded on `samples + 1` uniform times in `[0, t_end]`.
    pub samples: usize,
    /// Conditioned states are stored at these times.
    pub snapshot_times: Vec<f64>,
}

impl TrajectoryConfig {
    pub fn new(t_end: f64, dt: f64, samples: usize) -> Self {
        Self {
            t_end,
            dt,
            samples,
            snapshot_times: Vec::new(),
        }
    }

    pub fn record_times(&self) -> Vec<f64> {
        (0..=self.samples)
            .map(|k| self.t_end * k as f64 / self.samples as f64)
            .collect()
    }

    fn validate(&self, jump: &JumpModel) -> Result<()> {
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(invalid("t_end", "must be finite and non-negative"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", "must be positive"));
        }
        if self.samples == 0 {
            return Err(invalid("samples", "must be at least 1"));
        }
        if self.snapshot_times.iter().any(|&t| !(t >= 0.0 && t <= self.t_end)) {
            return Err(invalid("snapshot_times", "must lie within [0, t_end]"));
        }
        let worst = self.dt * jump.max_rate();
        if worst > MAX_CLICK_PROBABILITY {
            return Err(invalid(
                "dt",
                format!("dt·max⟨R⟩ = {worst} exceeds {MAX_CLICK_PROBABILITY}"),
            ));
        }
        Ok(())
    }
}

/// One sampled measurement record.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub stream: u64,
    /// Strictly increasing.
    pub click_times: Vec<f64>,
    pub click_channels: Vec<usize>,
    /// Conditioned (unit-norm) states at the requested snapshot times.
    pub snapshots: Vec<(f64, StateVector)>,
    /// Conditioned moments on the record grid.
    pub moments: Vec<(f64, Moments)>,
    pub final_state: StateVector,
}

/// Per-trajectory generator: ChaCha8 seeded with `seed`, on stream `stream`.
pub fn trajectory_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// First-order jump unraveling. Each step of length `h` clicks with
/// probability `⟨R⟩h`; on a click a channel is drawn in proportion to
/// `‖L_i ψ‖²`, applied, and the state renormalized. Every step then
/// propagates under `H − iR/2` and renormalizes. A click inside a step is
/// timed uniformly within it.
pub fn sample_trajectory(
    hamiltonian: &Hamiltonian,
    jump: &JumpModel,
    initial: &StateVector,
    cfg: &TrajectoryConfig,
    seed: u64,
    stream: u64,
) -> Result<TrajectoryRecord> {
    cfg.validate(jump)?;
    if initial.space() != hamiltonian.space() || jump.space() != hamiltonian.space() {
        return Err(Error::DimensionMismatch {
            expected: hamiltonian.space().dim(),
            found: initial.amplitudes().len(),
        });
    }
    if (initial.norm() - 1.0).abs() > 1e-9 {
        return Err(invalid("initial", "trajectories start from a unit-norm state"));
    }
    let mut rng = trajectory_rng(seed, stream);
    let mut propagator = Propagator::new(hamiltonian, cfg.dt)?.with_decay(jump.rate_operator())?;
    let mut state = initial.clone();
    let mut record = TrajectoryRecord {
        seed,
        stream,
        click_times: Vec::new(),
        click_channels: Vec::new(),
        snapshots: Vec::new(),
        moments: Vec::new(),
        final_state: initial.clone(),
    };
    let records = cfg.record_times();
    let mut time = 0.0;
    for stop in stop_times(&records, &cfg.snapshot_times) {
        let span = stop - time;
        if span > 0.0 {
            let steps = libm::ceil(span / cfg.dt * (1.0 - 1e-12)).max(1.0) as usize;
            let h = span / steps as f64;
            for s in 0..steps {
                let t = time + s as f64 * h;
                let weights = jump.channel_weights(&state);
                let total: f64 = weights.iter().sum();
                let p = total * h;
                let u: f64 = rng.random();
                if u < p {
                    let mut pick = rng.random::<f64>() * total;
                    let mut channel = weights.len() - 1;
                    for (i, w) in weights.iter().enumerate() {
                        if pick < *w {
                            channel = i;
                            break;
                        }
                        pick -= w;
                    }
                    state = jump.jump(channel, &state)?;
                    record.click_times.push(t + h * (u / p));
                    record.click_channels.push(channel);
                }
                propagator.step(t, h, state.amplitudes_mut());
                if state.norm_sqr() < EXTINCTION_NORM_SQR {
                    return Err(Error::Extinct { time: t + h });
                }
                state.normalize();
            }
            time = stop;
        }
        if is_member(stop, &records) {
            record.moments.push((stop, Moments::from_state(&state)));
        }
        if is_member(stop, &cfg.snapshot_times) {
            record.snapshots.push((stop, state.clone()));
        }
    }
    record.final_state = state;
    Ok(record)
}

/// Running sums over trajectories of the conditioned moments, plus the
/// second moments needed for standard errors of `⟨n̂⟩` and `P_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAccumulator {
    times: Vec<f64>,
    sums: Vec<Moments>,
    n_sq: Vec<f64>,
    pop_sq: Vec<Vec<f64>>,
    count: usize,
}

impl EnsembleAccumulator {
    pub fn new() -> Self {
        Self {
            times: Vec::new(),
            sums: Vec::new(),
            n_sq: Vec::new(),
            pop_sq: Vec::new(),
            count: 0,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn add(&mut self, record: &TrajectoryRecord) -> Result<()> {
        if self.count == 0 {
            self.times = record.moments.iter().map(|m| m.0).collect();
            self.sums = record.moments.iter().map(|m| m.1.zeros_like()).collect();
            self.n_sq = vec![0.0; self.times.len()];
            self.pop_sq = record
                .moments
                .iter()
                .map(|m| vec![0.0; m.1.level_populations.len()])
                .collect();
        }
        if record.moments.len() != self.times.len() {
            return Err(Error::DimensionMismatch {
                expected: self.times.len(),
                found: record.moments.len(),
            });
        }
        for (k, (_, m)) in record.moments.iter().enumerate() {
            self.sums[k].accumulate(m, 1.0);
            let n = m.n_mean();
            self.n_sq[k] += n * n;
            for (acc, p) in self.pop_sq[k].iter_mut().zip(&m.level_populations) {
                *acc += p * p;
            }
        }
        self.count += 1;
        Ok(())
    }

    /// Combines two partial ensembles over the same record grid.
    pub fn merge(mut self, other: Self) -> Result<Self> {
        if other.count == 0 {
            return Ok(self);
        }
        if self.count == 0 {
            return Ok(other);
        }
        if self.times.len() != other.times.len() {
            return Err(Error::DimensionMismatch {
                expected: self.times.len(),
                found: other.times.len(),
            });
        }
        for k in 0..self.times.len() {
            self.sums[k].accumulate(&other.sums[k], 1.0);
            self.n_sq[k] += other.n_sq[k];
            for (a, b) in self.pop_sq[k].iter_mut().zip(&other.pop_sq[k]) {
                *a += b;
            }
        }
        self.count += other.count;
        Ok(self)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Ensemble-averaged moments, equal to those of the unconditioned state.
    pub fn mean(&self, k: usize) -> Moments {
        let mut out = self.sums[k].zeros_like();
        out.accumulate(&self.sums[k], 1.0 / self.count as f64);
        out
    }

    fn standard_error(sum: f64, sum_sq: f64, count: usize) -> f64 {
        let n = count as f64;
        if count < 2 {
            return f64::INFINITY;
        }
        let mean = sum / n;
        let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
        libm::sqrt(var / n)
    }

    /// Standard error of the ensemble mean of `⟨n̂⟩` at record `k`.
    pub fn n_mean_standard_error(&self, k: usize) -> f64 {
        Self::standard_error(self.sums[k].n_mean(), self.n_sq[k], self.count)
    }

    /// Standard error of the ensemble mean of `P_level` at record `k`.
    pub fn population_standard_error(&self, k: usize, level: usize) -> f64 {
        Self::standard_error(
            self.sums[k].level_populations[level - 1],
            self.pop_sq[k][level - 1],
            self.count,
        )
    }

    pub fn series(&self, frame: FrameTag, epsilon: f64) -> ObservableSeries {
        let mut series = ObservableSeries::new(frame, epsilon);
        series.samples = (0..self.times.len())
            .map(|k| self.mean(k).sample(self.times[k]))
            .collect();
        series
    }
}

impl Default for EnsembleAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

/// Detector-measurement outcome: projector onto a subset of levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostSelection {
    levels: Vec<usize>,
}

impl PostSelection {
    pub fn new(mut levels: Vec<usize>, n_levels: usize) -> Result<Self> {
        levels.sort_unstable();
        levels.dedup();
        if levels.is_empty() {
            return Err(invalid("levels", "post-selection needs at least one level"));
        }
        if let Some(&bad) = levels.iter().find(|&&l| l == 0 || l > n_levels) {
            return Err(Error::LevelOutOfRange {
                index: bad,
                levels: n_levels,
            });
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// The outcome selecting every other level.
    pub fn complement(&self, n_levels: usize) -> Result<Self> {
        Self::new(
            (1..=n_levels).filter(|l| !self.levels.contains(l)).collect(),
            n_levels,
        )
    }

    /// `P_d = Σ_{j ∈ levels} σ̂_j`.
    pub fn projector(&self, space: HilbertSpace) -> Result<LinearOperator> {
        let mut p = LinearOperator::zeros(space);
        for &l in &self.levels {
            p = p.add(&projector(space, l)?);
        }
        p.with_symmetry(Symmetry::Hermitian)
    }
}

/// Collapses the state onto the outcome; returns the normalized post-measurement
/// state and the outcome probability `Tr[P_d ρ]`.
pub fn postselect(state: &StateVector, sel: &PostSelection) -> Result<(StateVector, f64)> {
    let space = state.space();
    let fock = space.fock_dim();
    if let Some(&bad) = sel.levels.iter().find(|&&l| l > space.n_levels()) {
        return Err(Error::LevelOutOfRange {
            index: bad,
            levels: space.n_levels(),
        });
    }
    let mut out = StateVector::zeros(space);
    for &l in &sel.levels {
        let range = (l - 1) * fock..l * fock;
        out.amplitudes_mut()[range.clone()].copy_from_slice(&state.amplitudes()[range]);
    }
    let probability = out.norm_sqr() / state.norm_sqr();
    if probability < MIN_OUTCOME_PROBABILITY {
        return Err(Error::ImpossibleOutcome { probability });
    }
    out.normalize();
    Ok((out, probability))
}

/// Reduced field density matrix `Tr_d |ψ⟩⟨ψ| / ⟨ψ|ψ⟩`, row-major over
/// `n, n' = 0..=n_max`.
pub fn field_density_matrix(state: &StateVector) -> Vec<Complex64> {
    let fock = state.space().fock_dim();
    let norm_sqr = state.norm_sqr();
    let mut rho = vec![Complex64::new(0.0, 0.0); fock * fock];
    for chunk in state.amplitudes().chunks_exact(fock) {
        for (n, a) in chunk.iter().enumerate() {
            for (m, b) in chunk.iter().enumerate() {
                rho[n * fock + m] += a * b.conj();
            }
        }
    }
    if norm_sqr > 0.0 {
        rho.iter_mut().for_each(|x| *x /= norm_sqr);
    }
    rho
}
