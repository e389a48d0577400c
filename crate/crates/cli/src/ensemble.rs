//! Parallel trajectory ensembles with thread-count independent results.
//!
//! Trajectory `k` uses the master seed on stream `k`. Trajectories are grouped
//! into fixed chunks that are summed in index order, so floating-point
//! reductions do not depend on scheduling.

use rayon::prelude::*;

use dce_core::fock::{Moments, StateVector};
use dce_core::model::Hamiltonian;
use dce_core::monitor::{sample_trajectory, EnsembleAccumulator, JumpModel, TrajectoryConfig};

use crate::error::{CliError, CliResult};

pub const CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ClickLog {
    pub trajectory: usize,
    pub stream: u64,
    pub times: Vec<f64>,
    pub channels: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub seed: u64,
    pub accumulator: EnsembleAccumulator,
    pub clicks: Vec<ClickLog>,
    /// Ensemble-averaged photon distributions at the snapshot times.
    pub snapshots: Vec<(f64, Vec<f64>)>,
}

struct Chunk {
    accumulator: EnsembleAccumulator,
    clicks: Vec<ClickLog>,
    snapshot_sums: Vec<(f64, Moments)>,
}

fn run_chunk(
    hamiltonian: &Hamiltonian,
    jump: &JumpModel,
    initial: &StateVector,
    cfg: &TrajectoryConfig,
    seed: u64,
    range: std::ops::Range<usize>,
) -> CliResult<Chunk> {
    let mut chunk = Chunk {
        accumulator: EnsembleAccumulator::new(),
        clicks: Vec::with_capacity(range.len()),
        snapshot_sums: Vec::new(),
    };
    for k in range {
        let stream = k as u64;
        let record = sample_trajectory(hamiltonian, jump, initial, cfg, seed, stream)
            .map_err(|e| CliError::physics(format!("trajectory {k}"), e))?;
        chunk
            .accumulator
            .add(&record)
            .map_err(|e| CliError::physics("ensemble", e))?;
        if chunk.snapshot_sums.is_empty() {
            chunk.snapshot_sums = record
                .snapshots
                .iter()
                .map(|(t, s)| (*t, Moments::from_state(s).zeros_like()))
                .collect();
        }
        for ((_, sum), (_, s)) in chunk.snapshot_sums.iter_mut().zip(&record.snapshots) {
            sum.accumulate(&Moments::from_state(s), 1.0);
        }
        chunk.clicks.push(ClickLog {
            trajectory: k,
            stream,
            times: record.click_times,
            channels: record.click_channels,
        });
    }
    Ok(chunk)
}

/// Samples `count` trajectories on the current rayon pool.
pub fn run_ensemble(
    hamiltonian: &Hamiltonian,
    jump: &JumpModel,
    initial: &StateVector,
    cfg: &TrajectoryConfig,
    seed: u64,
    count: usize,
) -> CliResult<EnsembleResult> {
    let chunks: Vec<Chunk> = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let range = c * CHUNK..((c + 1) * CHUNK).min(count);
            run_chunk(hamiltonian, jump, initial, cfg, seed, range)
        })
        .collect::<CliResult<_>>()?;

    let mut accumulator = EnsembleAccumulator::new();
    let mut clicks = Vec::with_capacity(count);
    let mut sums: Vec<(f64, Moments)> = Vec::new();
    for chunk in chunks {
        accumulator = accumulator
            .merge(chunk.accumulator)
            .map_err(|e| CliError::physics("ensemble", e))?;
        clicks.extend(chunk.clicks);
        if sums.is_empty() {
            sums = chunk.snapshot_sums;
        } else {
            for ((_, a), (_, b)) in sums.iter_mut().zip(&chunk.snapshot_sums) {
                a.accumulate(b, 1.0);
            }
        }
    }
    let scale = 1.0 / count.max(1) as f64;
    let snapshots = sums
        .into_iter()
        .map(|(t, m)| (t, m.photon_distribution.iter().map(|p| p * scale).collect()))
        .collect();
    Ok(EnsembleResult {
        seed,
        accumulator,
        clicks,
        snapshots,
    })
}

/// Runs `f` on a pool of `threads` workers, or the global pool when `None`.
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, rayon::ThreadPoolBuildError> {
    match threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(f)),
        None => Ok(f()),
    }
}
