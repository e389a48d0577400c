use alloc::vec::Vec;

use num_complex::Complex64;

use super::operator::LinearOperator;
use super::space::StateVector;
use crate::error::{invalid, Error, Result};
use crate::model::FrameTag;

/// Below this mean photon number the Mandel factor is reported as undefined.
pub const Q_FLOOR: f64 = 1e-12;

/// Photon distributions in snapshots stop at the first `n` whose remaining
/// tail is below this.
pub const SNAPSHOT_TAIL: f64 = 1e-12;

/// `⟨ψ|Ô|ψ⟩ / ⟨ψ|ψ⟩`.
///
/// Normalizing by the squared norm keeps the value meaningful for the
/// sub-unit-norm states produced by no-count evolution.
pub fn expectation(state: &StateVector, op: &LinearOperator) -> Result<Complex64> {
    if state.space() != op.space() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: state.amplitudes().len(),
        });
    }
    let norm_sqr = state.norm_sqr();
    if norm_sqr == 0.0 {
        return Err(invalid("state", "zero vector has no expectation values"));
    }
    let applied = op.apply(state)?;
    Ok(state.inner(&applied)? / norm_sqr)
}

/// Mandel factor `Q = (⟨(Δn̂)²⟩ - ⟨n̂⟩) / ⟨n̂⟩`, or `None` when `⟨n̂⟩ < Q_FLOOR`.
pub fn mandel_q(state: &StateVector) -> Option<f64> {
    mandel_q_from_distribution(&state.photon_distribution())
}

pub fn mandel_q_from_distribution(p: &[f64]) -> Option<f64> {
    let (mean, var) = mean_and_variance(p);
    (mean >= Q_FLOOR).then(|| (var - mean) / mean)
}

fn mean_and_variance(p: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut second = 0.0;
    for (n, &pn) in p.iter().enumerate() {
        let n = n as f64;
        mean += n * pn;
        second += n * n * pn;
    }
    (mean, second - mean * mean)
}

/// Variances of `x̂_± = (â ± â†)/√(±2)`; the vacuum gives `(1/2, 1/2)`.
pub fn quadrature_variances(state: &StateVector) -> (f64, f64) {
    Moments::from_state(state).quadrature_variances()
}

/// Total population in the top `margin_layers` Fock layers across all
/// detector levels, normalized by the squared norm.
pub fn truncation_check(state: &StateVector, margin_layers: usize) -> Result<f64> {
    if margin_layers == 0 {
        return Err(invalid("margin_layers", "must be at least 1"));
    }
    let p = state.photon_distribution();
    let start = p.len().saturating_sub(margin_layers);
    Ok(p[start..].iter().sum())
}

/// Population in the top `margin_levels` detector levels; used for truncated
/// harmonic-oscillator detectors.
pub fn detector_truncation_check(state: &StateVector, margin_levels: usize) -> Result<f64> {
    if margin_levels == 0 {
        return Err(invalid("margin_levels", "must be at least 1"));
    }
    let pops = state.level_populations();
    let start = pops.len().saturating_sub(margin_levels);
    Ok(pops[start..].iter().sum())
}

/// Field and detector moments that are linear in the density operator.
///
/// Everything reported in an [`ObservableSample`] derives from these, so
/// averaging `Moments` over quantum trajectories yields the same quantities as
/// the unconditioned density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub photon_distribution: Vec<f64>,
    pub level_populations: Vec<f64>,
    /// `⟨â⟩`
    pub a_mean: Complex64,
    /// `⟨â²⟩`
    pub a2_mean: Complex64,
}

impl Moments {
    pub fn from_state(state: &StateVector) -> Self {
        let space = state.space();
        let fock = space.fock_dim();
        let norm_sqr = state.norm_sqr();
        let mut a_mean = Complex64::new(0.0, 0.0);
        let mut a2_mean = Complex64::new(0.0, 0.0);
        for chunk in state.amplitudes().chunks_exact(fock) {
            for n in 1..fock {
                let sqrt_n = libm::sqrt(n as f64);
                a_mean += chunk[n - 1].conj() * chunk[n] * sqrt_n;
                if n >= 2 {
                    a2_mean +=
                        chunk[n - 2].conj() * chunk[n] * (sqrt_n * libm::sqrt((n - 1) as f64));
                }
            }
        }
        if norm_sqr > 0.0 {
            a_mean /= norm_sqr;
            a2_mean /= norm_sqr;
        }
        Self {
            photon_distribution: state.photon_distribution(),
            level_populations: state.level_populations(),
            a_mean,
            a2_mean,
        }
    }

    /// Same moments with detector populations regrouped: level `j` of the
    /// state contributes to reported level `groups[j - 1]` (1-based).
    pub fn regroup_levels(mut self, groups: &[usize]) -> Self {
        let reported = groups.iter().copied().max().unwrap_or(0);
        let mut pops = alloc::vec![0.0; reported];
        for (p, &g) in self.level_populations.iter().zip(groups) {
            pops[g - 1] += p;
        }
        self.level_populations = pops;
        self
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            photon_distribution: alloc::vec![0.0; self.photon_distribution.len()],
            level_populations: alloc::vec![0.0; self.level_populations.len()],
            a_mean: Complex64::new(0.0, 0.0),
            a2_mean: Complex64::new(0.0, 0.0),
        }
    }

    /// `self += weight · other`.
    pub fn accumulate(&mut self, other: &Moments, weight: f64) {
        for (a, b) in self.photon_distribution.iter_mut().zip(&other.photon_distribution) {
            *a += weight * b;
        }
        for (a, b) in self.level_populations.iter_mut().zip(&other.level_populations) {
            *a += weight * b;
        }
        self.a_mean += other.a_mean * weight;
        self.a2_mean += other.a2_mean * weight;
    }

    pub fn n_mean(&self) -> f64 {
        mean_and_variance(&self.photon_distribution).0
    }

    pub fn mandel_q(&self) -> Option<f64> {
        mandel_q_from_distribution(&self.photon_distribution)
    }

    /// Quadrature variances from `⟨n̂⟩`, `⟨â⟩`, `⟨â²⟩`, assuming `[â, â†] = 1`
    /// (exact up to the population of the cutoff layer).
    pub fn quadrature_variances(&self) -> (f64, f64) {
        let n = self.n_mean();
        let plus = 0.5 + n + self.a2_mean.re - 2.0 * self.a_mean.re * self.a_mean.re;
        let minus = 0.5 + n - self.a2_mean.re - 2.0 * self.a_mean.im * self.a_mean.im;
        (plus, minus)
    }

    pub fn sample(&self, time: f64) -> ObservableSample {
        let (xvar_plus, xvar_minus) = self.quadrature_variances();
        ObservableSample {
            time,
            n_mean: self.n_mean(),
            mandel_q: self.mandel_q(),
            xvar_plus,
            xvar_minus,
            level_populations: self.level_populations.clone(),
        }
    }

    pub fn snapshot(&self, time: f64) -> PhotonSnapshot {
        PhotonSnapshot::new(time, &self.photon_distribution)
    }
}

/// Observables at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSample {
    pub time: f64,
    pub n_mean: f64,
    pub mandel_q: Option<f64>,
    pub xvar_plus: f64,
    pub xvar_minus: f64,
    pub level_populations: Vec<f64>,
}

/// Photon-number distribution at one instant, cut where the tail drops below
/// [`SNAPSHOT_TAIL`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonSnapshot {
    pub time: f64,
    pub distribution: Vec<f64>,
}

impl PhotonSnapshot {
    pub fn new(time: f64, p: &[f64]) -> Self {
        let mut tail: f64 = p.iter().sum();
        let mut len = p.len();
        for (n, &pn) in p.iter().enumerate() {
            tail -= pn;
            if tail < SNAPSHOT_TAIL {
                len = n + 1;
                break;
            }
        }
        Self {
            time,
            distribution: p[..len].to_vec(),
        }
    }
}

/// Time unit of the `time` fields in a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    /// Inverse angular-frequency units (ħ = 1).
    Absolute,
    /// Dimensionless `εt`.
    EpsilonT,
}

/// Time-indexed observables from one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub frame: FrameTag,
    pub time_unit: TimeUnit,
    /// Modulation depth used to convert between time units.
    pub epsilon: f64,
    pub samples: Vec<ObservableSample>,
    pub snapshots: Vec<PhotonSnapshot>,
}

impl ObservableSeries {
    pub fn new(frame: FrameTag, epsilon: f64) -> Self {
        Self {
            frame,
            time_unit: TimeUnit::Absolute,
            epsilon,
            samples: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    /// Number of detector levels reported in each sample.
    pub fn levels(&self) -> usize {
        self.samples
            .first()
            .map_or(0, |s| s.level_populations.len())
    }

    /// Converts a sample or snapshot time to dimensionless `εt`.
    pub fn epsilon_t(&self, time: f64) -> f64 {
        match self.time_unit {
            TimeUnit::Absolute => self.epsilon * time,
            TimeUnit::EpsilonT => time,
        }
    }
}
