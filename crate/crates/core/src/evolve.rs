//! Fixed-step fourth-order Runge–Kutta integration of the Schrödinger
//! equation `i ∂ψ/∂t = H(t) ψ`, optionally with the non-Hermitian damping
//! `−iR/2` used by no-count evolution.
//!
//! All times here are absolute (ħ = 1 units). Use
//! [`EvolutionConfig::in_epsilon_t`] to build a configuration from `εt`
//! values.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fock::{
    detector_truncation_check, truncation_check, HilbertSpace, LinearOperator, Moments,
    ObservableSeries, StateVector,
};
use crate::model::{
    counter_rotating_hamiltonian, lab_hamiltonian, rwa_hamiltonian,
    two_level_rotated_hamiltonian, DetectorSpec, FrameTag, Hamiltonian, ModulationSpec,
};
use crate::oracle;

pub const DEFAULT_RENORM_TOL: f64 = 1e-9;
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-8;
pub const DEFAULT_TRUNCATION_MARGIN: usize = 4;
pub const DEFAULT_SAMPLES: usize = 200;
/// Rotating-frame step: `RWA_DT_FACTOR / (fastest rate)`.
pub const RWA_DT_FACTOR: f64 = 0.01;
/// Lab-frame steps per modulation period.
pub const LAB_STEPS_PER_PERIOD: f64 = 64.0;
/// Upper bound on `dt · ‖H‖` (Gershgorin norm).
pub const STABILITY_FACTOR: f64 = 0.5;
/// Rates below `RATE_FLOOR · ω₀` are ignored when picking the RWA step.
pub const RATE_FLOOR: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// Initial state descriptor; the default is `|1, 0⟩`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialState {
    #[default]
    Ground,
    Basis {
        level: usize,
        photons: usize,
    },
    /// Normalized superposition of `(level, photons, amplitude)` terms.
    Superposition(Vec<(usize, usize, Complex64)>),
    State(StateVector),
}

impl InitialState {
    pub fn build(&self, space: HilbertSpace) -> Result<StateVector> {
        match self {
            Self::Ground => Ok(StateVector::ground(space)),
            Self::Basis { level, photons } => StateVector::basis(space, *level, *photons),
            Self::Superposition(terms) => StateVector::superposition(space, terms),
            Self::State(s) => {
                space.check_dim(s.amplitudes().len())?;
                if s.space() != space {
                    return Err(Error::DimensionMismatch {
                        expected: space.dim(),
                        found: s.space().dim(),
                    });
                }
                Ok(s.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub frame: FrameTag,
    pub t_end: f64,
    /// Step; `None` picks the frame default.
    pub dt: Option<f64>,
    /// Observables are recorded on `samples + 1` uniform times in `[0, t_end]`.
    pub samples: usize,
    /// Photon distributions are stored at these times (within `[0, t_end]`).
    pub snapshot_times: Vec<f64>,
    pub renorm_tol: f64,
    pub truncation_tol: f64,
    /// Fock layers at the top of the cutoff whose population is checked.
    pub truncation_margin: usize,
    /// Detector levels at the top checked as well (truncated oscillator detectors).
    pub detector_margin: Option<usize>,
    /// Keep the counter-rotating coupling in the interaction frame.
    pub counter_rotating: bool,
    pub initial: InitialState,
    /// Modulation depth used to express output times as `εt`.
    pub epsilon: f64,
}

impl EvolutionConfig {
    pub fn new(frame: FrameTag, t_end: f64) -> Self {
        Self {
            frame,
            t_end,
            dt: None,
            samples: DEFAULT_SAMPLES,
            snapshot_times: Vec::new(),
            renorm_tol: DEFAULT_RENORM_TOL,
            truncation_tol: DEFAULT_TRUNCATION_TOL,
            truncation_margin: DEFAULT_TRUNCATION_MARGIN,
            detector_margin: None,
            counter_rotating: false,
            initial: InitialState::Ground,
            epsilon: 0.0,
        }
    }

    /// Configuration with `t_end` and snapshot times given as `εt`.
    pub fn in_epsilon_t(
        frame: FrameTag,
        eps_t_end: f64,
        eps_snapshots: &[f64],
        epsilon: f64,
    ) -> Result<Self> {
        if epsilon == 0.0 || !epsilon.is_finite() {
            return Err(invalid("epsilon", "εt units need a nonzero modulation depth"));
        }
        let scale = 1.0 / epsilon.abs();
        let mut cfg = Self::new(frame, eps_t_end * scale);
        cfg.snapshot_times = eps_snapshots.iter().map(|t| t * scale).collect();
        cfg.epsilon = epsilon;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(invalid("t_end", "must be finite and non-negative"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid("dt", "must be positive"));
            }
        }
        if let Some(t) = self
            .snapshot_times
            .iter()
            .find(|&&t| !(t >= 0.0 && t <= self.t_end * (1.0 + 1e-12)))
        {
            return Err(invalid(
                "snapshot_times",
                format!("snapshot at {t} lies outside [0, {}]", self.t_end),
            ));
        }
        if self.samples == 0 {
            return Err(invalid("samples", "must be at least 1"));
        }
        if !(self.renorm_tol > 0.0) || !(self.truncation_tol > 0.0) {
            return Err(invalid("renorm_tol", "tolerances must be positive"));
        }
        if self.truncation_margin == 0 || self.detector_margin == Some(0) {
            return Err(invalid("truncation_margin", "must be at least 1"));
        }
        Ok(())
    }

    fn record_times(&self) -> Vec<f64> {
        (0..=self.samples)
            .map(|k| self.t_end * k as f64 / self.samples as f64)
            .collect()
    }
}

/// Frame-default step for the given detector and modulation.
///
/// Rotating frames resolve the slowest of `0.01 / max(|g_j|, |β_r|, |r|, |Δ_j|)`
/// and `0.5 / ‖H‖`; the lab frame takes 64 steps per modulation period,
/// again capped by `0.5 / ‖H‖`.
pub fn default_dt(det: &DetectorSpec, modulation: &ModulationSpec, h: &Hamiltonian) -> Result<f64> {
    let ladder = det.ladder()?;
    let stability = STABILITY_FACTOR / h.norm_bound().max(f64::MIN_POSITIVE);
    let dt = match h.frame() {
        FrameTag::Lab => {
            core::f64::consts::TAU / (LAB_STEPS_PER_PERIOD * modulation.eta())
        }
        FrameTag::RwaInteraction | FrameTag::TwoLevelRotated => {
            let fastest = ladder
                .couplings()
                .iter()
                .chain(&ladder.detunings(modulation.omega0))
                .chain([modulation.beta_r(), modulation.r].iter())
                .map(|x| x.abs())
                .fold(RATE_FLOOR * modulation.omega0, f64::max);
            RWA_DT_FACTOR / fastest
        }
    };
    Ok(dt.min(stability))
}

/// RK4 propagator for `dψ/dt = −i H(t) ψ − R ψ / 2`.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    hamiltonian: &'a Hamiltonian,
    decay: Option<&'a LinearOperator>,
    dt: f64,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl<'a> Propagator<'a> {
    pub fn new(hamiltonian: &'a Hamiltonian, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", "must be positive"));
        }
        let dim = hamiltonian.space().dim();
        Ok(Self {
            hamiltonian,
            decay: None,
            dt,
            k: [vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim]],
            tmp: vec![ZERO; dim],
        })
    }

    /// Adds the damping `−R/2` (no-count evolution).
    pub fn with_decay(mut self, decay: &'a LinearOperator) -> Result<Self> {
        if decay.space() != self.hamiltonian.space() {
            return Err(Error::DimensionMismatch {
                expected: self.hamiltonian.space().dim(),
                found: decay.dim(),
            });
        }
        self.decay = Some(decay);
        Ok(self)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn derivative(
        hamiltonian: &Hamiltonian,
        decay: Option<&LinearOperator>,
        t: f64,
        x: &[Complex64],
        out: &mut [Complex64],
    ) {
        out.iter_mut().for_each(|v| *v = ZERO);
        hamiltonian.apply_add(t, MINUS_I, x, out);
        if let Some(r) = decay {
            r.apply_add(Complex64::new(-0.5, 0.0), x, out);
        }
    }

    /// One RK4 step of length `h` from time `t`.
    pub fn step(&mut self, t: f64, h: f64, psi: &mut [Complex64]) {
        let (hm, decay) = (self.hamiltonian, self.decay);
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        Self::derivative(hm, decay, t, psi, k1);
        for ((y, x), k) in tmp.iter_mut().zip(psi.iter()).zip(k1.iter()) {
            *y = x + k * (0.5 * h);
        }
        Self::derivative(hm, decay, t + 0.5 * h, tmp, k2);
        for ((y, x), k) in tmp.iter_mut().zip(psi.iter()).zip(k2.iter()) {
            *y = x + k * (0.5 * h);
        }
        Self::derivative(hm, decay, t + 0.5 * h, tmp, k3);
        for ((y, x), k) in tmp.iter_mut().zip(psi.iter()).zip(k3.iter()) {
            *y = x + k * h;
        }
        Self::derivative(hm, decay, t + h, tmp, k4);
        let w = h / 6.0;
        for (i, x) in psi.iter_mut().enumerate() {
            *x += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
    }

    /// Integrates from `t0` to `t1` in equal steps no longer than `dt`,
    /// calling `after_step(t, psi)` after each.
    pub fn advance(
        &mut self,
        t0: f64,
        t1: f64,
        psi: &mut [Complex64],
        mut after_step: impl FnMut(f64, &mut [Complex64]) -> Result<()>,
    ) -> Result<()> {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let steps = libm::ceil(span / self.dt * (1.0 - 1e-12)).max(1.0) as usize;
        let h = span / steps as f64;
        for s in 0..steps {
            let t = t0 + s as f64 * h;
            self.step(t, h, psi);
            let now = if s + 1 == steps { t1 } else { t + h };
            after_step(now, psi)?;
        }
        Ok(())
    }
}

fn renormalize(time: f64, psi: &mut [Complex64], tol: f64) -> Result<()> {
    let norm = libm::sqrt(psi.iter().map(|a| a.norm_sqr()).sum::<f64>());
    let drift = (norm - 1.0).abs();
    if !(drift <= tol) {
        return Err(Error::NormDrift { time, drift });
    }
    let inv = 1.0 / norm;
    psi.iter_mut().for_each(|a| *a *= inv);
    Ok(())
}

/// Step-wise unitary evolution; each step is renormalized after its norm
/// drift is checked against `renorm_tol`.
#[derive(Debug, Clone)]
pub struct UnitaryRun<'a> {
    propagator: Propagator<'a>,
    state: StateVector,
    time: f64,
    renorm_tol: f64,
}

impl<'a> UnitaryRun<'a> {
    pub fn new(
        hamiltonian: &'a Hamiltonian,
        initial: StateVector,
        dt: f64,
        renorm_tol: f64,
    ) -> Result<Self> {
        if initial.space() != hamiltonian.space() {
            return Err(Error::DimensionMismatch {
                expected: hamiltonian.space().dim(),
                found: initial.amplitudes().len(),
            });
        }
        let drift = (initial.norm() - 1.0).abs();
        if drift > renorm_tol {
            return Err(invalid("initial", format!("state norm deviates from 1 by {drift:e}")));
        }
        Ok(Self {
            propagator: Propagator::new(hamiltonian, dt)?,
            state: initial,
            time: 0.0,
            renorm_tol,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn into_state(self) -> StateVector {
        self.state
    }

    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let tol = self.renorm_tol;
        self.propagator
            .advance(self.time, t, self.state.amplitudes_mut(), |now, psi| {
                renormalize(now, psi, tol)
            })?;
        self.time = self.time.max(t);
        Ok(())
    }
}

/// Checks the top Fock layers (and top detector levels if requested).
pub fn check_truncation(state: &StateVector, time: f64, cfg: &EvolutionConfig) -> Result<()> {
    let space = state.space();
    let margin = cfg.truncation_margin.min((space.fock_dim() / 4).max(1));
    let population = truncation_check(state, margin)?;
    if population > cfg.truncation_tol {
        return Err(Error::TruncationOverflow { time, population });
    }
    if let Some(levels) = cfg.detector_margin {
        let margin = levels.min((space.n_levels() / 4).max(1));
        let population = detector_truncation_check(state, margin)?;
        if population > cfg.truncation_tol {
            return Err(Error::TruncationOverflow { time, population });
        }
    }
    Ok(())
}

/// Sorted union of record and snapshot times.
pub(crate) fn stop_times(records: &[f64], snapshots: &[f64]) -> Vec<f64> {
    let mut stops: Vec<f64> = records.iter().chain(snapshots).copied().collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    stops
}

pub(crate) fn is_member(t: f64, set: &[f64]) -> bool {
    set.iter().any(|s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
}

/// Evolves `state` under `hamiltonian`, recording observables on the uniform
/// grid and photon distributions at the snapshot times. Returns the series
/// and the final state. Without `cfg.dt` the step is `0.5 / ‖H‖`.
pub fn unitary_evolve(
    hamiltonian: &Hamiltonian,
    state: StateVector,
    cfg: &EvolutionConfig,
) -> Result<(ObservableSeries, StateVector)> {
    unitary_evolve_with(hamiltonian, state, cfg, |m| m)
}

/// As [`unitary_evolve`], mapping every recorded [`Moments`] through `report`
/// (for example to regroup detector levels).
pub fn unitary_evolve_with(
    hamiltonian: &Hamiltonian,
    state: StateVector,
    cfg: &EvolutionConfig,
    report: impl Fn(Moments) -> Moments,
) -> Result<(ObservableSeries, StateVector)> {
    cfg.validate()?;
    if hamiltonian.frame() != cfg.frame {
        return Err(invalid(
            "frame",
            format!("Hamiltonian is in {:?}, configuration asks for {:?}", hamiltonian.frame(), cfg.frame),
        ));
    }
    let dt = cfg
        .dt
        .unwrap_or(STABILITY_FACTOR / hamiltonian.norm_bound().max(f64::MIN_POSITIVE));
    let records = cfg.record_times();
    let mut series = ObservableSeries::new(cfg.frame, cfg.epsilon);
    let mut run = UnitaryRun::new(hamiltonian, state, dt, cfg.renorm_tol)?;
    for t in stop_times(&records, &cfg.snapshot_times) {
        run.advance_to(t)?;
        check_truncation(run.state(), t, cfg)?;
        let moments = report(Moments::from_state(run.state()));
        if is_member(t, &records) {
            series.samples.push(moments.sample(t));
        }
        if is_member(t, &cfg.snapshot_times) {
            series.snapshots.push(moments.snapshot(t));
        }
    }
    Ok((series, run.into_state()))
}

/// Hamiltonian for the configured frame.
pub fn frame_hamiltonian(
    det: &DetectorSpec,
    modulation: &ModulationSpec,
    space: HilbertSpace,
    cfg: &EvolutionConfig,
) -> Result<Hamiltonian> {
    match cfg.frame {
        FrameTag::Lab => lab_hamiltonian(det, modulation, space),
        FrameTag::RwaInteraction if cfg.counter_rotating => {
            counter_rotating_hamiltonian(det, modulation, space)
        }
        FrameTag::RwaInteraction => Ok(Hamiltonian::time_independent(
            FrameTag::RwaInteraction,
            rwa_hamiltonian(det, modulation, space)?,
        )),
        FrameTag::TwoLevelRotated => two_level_rotated_hamiltonian(det, modulation, space),
    }
}

/// End-to-end run: assemble the frame Hamiltonian on an `n_max` cutoff,
/// pick the default step if none is set, and evolve the initial state.
///
/// Photon statistics and populations are frame independent; quadrature
/// variances refer to the integration frame.
pub fn run_experiment(
    det: &DetectorSpec,
    modulation: &ModulationSpec,
    n_max: usize,
    cfg: &EvolutionConfig,
) -> Result<ObservableSeries> {
    let space = HilbertSpace::new(det.levels(), n_max)?;
    let hamiltonian = frame_hamiltonian(det, modulation, space, cfg)?;
    let mut cfg = cfg.clone();
    if cfg.dt.is_none() {
        cfg.dt = Some(default_dt(det, modulation, &hamiltonian)?);
    }
    if matches!(det, DetectorSpec::HarmonicOscillator { .. }) && cfg.detector_margin.is_none() {
        cfg.detector_margin = Some(cfg.truncation_margin);
    }
    cfg.epsilon = modulation.epsilon;
    let initial = cfg.initial.build(space)?;
    Ok(unitary_evolve(&hamiltonian, initial, &cfg)?.0)
}

/// Closed-form quadrature variances and their product for a resonant
/// oscillator detector at `r = 0` (takes `β₀`).
pub fn ho_closed_form_check(g: f64, modulation: &ModulationSpec, t: f64) -> Result<(f64, f64, f64)> {
    if modulation.r != 0.0 {
        return Err(invalid("r", "closed form holds at r = 0"));
    }
    let beta0 = modulation.beta0();
    let (plus, minus) = oracle::ho_variances(g, beta0, t)?;
    Ok((plus, minus, oracle::ho_uncertainty_product(g, beta0, t)?))
}
