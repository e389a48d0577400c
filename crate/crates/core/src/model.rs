//! Detector and modulation descriptions and the Hamiltonians built from them.
//!
//! Units: ħ = 1, all energies and rates are angular frequencies. Detector
//! levels are 1-based, `|1⟩` being the lowest.
//!
//! Frames:
//! - [`FrameTag::Lab`]: `H′(t) = ω_t n̂ + iχ_t(â†² − â²) + H_d`.
//! - [`FrameTag::RwaInteraction`]: the interaction picture defined by
//!   `V(t) = exp[-i t (η n̂ + Σ_k (2E₁ + kη) σ̂_{k+1}) / 2]`, where the cavity
//!   term becomes `iβ_r(â†² − â²) − r n̂` and the counter-rotating
//!   `e^{-iηt} â σ̂_{l,l+1}` terms are dropped (or kept, see
//!   [`counter_rotating_hamiltonian`]).
//! - [`FrameTag::TwoLevelRotated`]: RWA frame further rotated by
//!   `V₂(t) = exp[i r t (n̂ + σ̂₂)]` for a two-level detector.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fock::{
    annihilation, creation, number, projector, sigma, HilbertSpace, LinearOperator, StateVector,
    Symmetry,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Modulation depths above this fraction of `ω₀` are rejected.
pub const MAX_DEPTH_RATIO: f64 = 0.1;
/// Modulation depths above this fraction of `ω₀` are accepted with a warning.
pub const WARN_DEPTH_RATIO: f64 = 0.01;
/// Validity cap on `|ξ_l| = |g_l / 2β_r|` for the strong-modulation expansion.
pub const XI_CAP: f64 = 0.3;
/// Largest explicit atom network assembled by [`dicke_network_hamiltonian`].
pub const MAX_NETWORK_ATOMS: usize = 4;

/// Reference frame of a Hamiltonian or an observable series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameTag {
    Lab,
    RwaInteraction,
    TwoLevelRotated,
}

/// Ladder atom: level energies `E_j` and nearest-neighbour couplings `g_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    energies: Vec<f64>,
    couplings: Vec<f64>,
}

impl Ladder {
    pub fn new(energies: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        if energies.is_empty() {
            return Err(invalid("energies", "a detector needs at least one level"));
        }
        if couplings.len() + 1 != energies.len() {
            return Err(invalid(
                "couplings",
                format!(
                    "{} levels need {} couplings, got {}",
                    energies.len(),
                    energies.len() - 1,
                    couplings.len()
                ),
            ));
        }
        if energies.iter().chain(&couplings).any(|x| !x.is_finite()) {
            return Err(invalid("energies", "energies and couplings must be finite"));
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("energies", "ladder energies must be non-decreasing"));
        }
        Ok(Self {
            energies,
            couplings,
        })
    }

    /// Equidistant ladder `E_j = spacing · (j - 1)`.
    pub fn equidistant(spacing: f64, couplings: Vec<f64>) -> Result<Self> {
        let energies = (0..=couplings.len()).map(|j| spacing * j as f64).collect();
        Self::new(energies, couplings)
    }

    /// Equidistant ladder with harmonic couplings `g_l = g √l`.
    pub fn harmonic(levels: usize, spacing: f64, g: f64) -> Result<Self> {
        if levels == 0 {
            return Err(invalid("levels", "a detector needs at least one level"));
        }
        let couplings = (1..levels).map(|l| g * libm::sqrt(l as f64)).collect();
        Self::equidistant(spacing, couplings)
    }

    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// `Δ_j = ω₀ - (E_{j+1} - E_j)` for `j = 1..N-1`.
    pub fn detunings(&self, omega0: f64) -> Vec<f64> {
        self.energies.windows(2).map(|w| omega0 - (w[1] - w[0])).collect()
    }

    /// Energy of level `l` (1-based) in the RWA frame relative to `|1⟩`:
    /// `-Σ_{j<l} (Δ_j + r)`.
    fn rwa_level_shift(&self, omega0: f64, r: f64, level: usize) -> f64 {
        -self.detunings(omega0)[..level - 1]
            .iter()
            .map(|d| d + r)
            .sum::<f64>()
    }
}

/// Intracavity detector.
#[derive(Debug, Clone, PartialEq)]
pub enum DetectorSpec {
    /// No detector: bare cavity (`N = 1`).
    Empty,
    Ladder(Ladder),
    /// Harmonic oscillator of frequency `omega` truncated to `levels` states,
    /// coupled as a ladder with `g_l = g √l`.
    HarmonicOscillator { omega: f64, g: f64, levels: usize },
    /// `atoms` identical two-level atoms with transition frequency `omega` and
    /// common coupling `g`.
    DickeNetwork { atoms: usize, omega: f64, g: f64 },
}

impl DetectorSpec {
    /// Equivalent ladder description used to assemble Hamiltonians.
    pub fn ladder(&self) -> Result<Ladder> {
        match self {
            DetectorSpec::Empty => Ladder::new(vec![0.0], Vec::new()),
            DetectorSpec::Ladder(l) => Ok(l.clone()),
            DetectorSpec::HarmonicOscillator { omega, g, levels } => {
                Ladder::harmonic(*levels, *omega, *g)
            }
            DetectorSpec::DickeNetwork { .. } => match dicke_to_ladder(self)? {
                DetectorSpec::Ladder(l) => Ok(l),
                _ => unreachable!("dicke_to_ladder returns a ladder"),
            },
        }
    }

    /// Number of levels `N` of the (equivalent) ladder.
    pub fn levels(&self) -> usize {
        match self {
            DetectorSpec::Empty => 1,
            DetectorSpec::Ladder(l) => l.levels(),
            DetectorSpec::HarmonicOscillator { levels, .. } => *levels,
            DetectorSpec::DickeNetwork { atoms, .. } => atoms + 1,
        }
    }
}

/// How the lab-frame cavity term is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SqueezeForm {
    /// `ω_t ≃ ω₀` and `χ_t ≃ (εη / 4ω₀) cos ηt`.
    #[default]
    Approximate,
    /// `ω_t = ω₀ + ε sin ηt` and `χ_t = (4ω_t)^{-1} dω_t/dt`.
    Exact,
}

/// Harmonic modulation `ω_t = ω₀ + ε sin(ηt)` with `η = 2ω₀ + 2r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationSpec {
    pub omega0: f64,
    pub epsilon: f64,
    /// Resonance shift: `η = 2ω₀ + 2r`.
    pub r: f64,
    /// Correctional shift already folded into `r` for shifted two-level
    /// resonances; kept for bookkeeping.
    pub y: f64,
    pub squeeze: SqueezeForm,
}

impl ModulationSpec {
    pub fn new(omega0: f64, epsilon: f64) -> Result<Self> {
        let spec = Self {
            omega0,
            epsilon,
            r: 0.0,
            y: 0.0,
            squeeze: SqueezeForm::Approximate,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_shift(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn with_correction(mut self, y: f64) -> Self {
        self.y = y;
        self
    }

    pub fn with_squeeze(mut self, squeeze: SqueezeForm) -> Self {
        self.squeeze = squeeze;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(invalid("omega0", "must be positive and finite"));
        }
        if !self.epsilon.is_finite() || !self.r.is_finite() || !self.y.is_finite() {
            return Err(invalid("epsilon", "modulation parameters must be finite"));
        }
        let ratio = self.epsilon.abs() / self.omega0;
        if ratio >= MAX_DEPTH_RATIO {
            return Err(invalid(
                "epsilon",
                format!("|epsilon|/omega0 = {ratio} must stay below {MAX_DEPTH_RATIO}"),
            ));
        }
        if ratio > WARN_DEPTH_RATIO {
            log::warn!("|epsilon|/omega0 = {ratio} is outside the weak-modulation regime");
        }
        Ok(())
    }

    /// Modulation frequency `η = 2ω₀ + 2r`.
    pub fn eta(&self) -> f64 {
        2.0 * self.omega0 + 2.0 * self.r
    }

    /// `β_r = (1 + r/ω₀) ε / 4`.
    pub fn beta_r(&self) -> f64 {
        (1.0 + self.r / self.omega0) * self.epsilon / 4.0
    }

    /// `β₀ = ε / 4`.
    pub fn beta0(&self) -> f64 {
        self.epsilon / 4.0
    }

    /// Instantaneous cavity frequency `ω_t`.
    pub fn omega_t(&self, t: f64) -> f64 {
        self.omega0 + self.epsilon * libm::sin(self.eta() * t)
    }

    /// Squeezing coefficient `χ_t` in the configured form.
    pub fn chi(&self, t: f64) -> f64 {
        let eta = self.eta();
        match self.squeeze {
            SqueezeForm::Approximate => {
                self.epsilon * eta / (4.0 * self.omega0) * libm::cos(eta * t)
            }
            SqueezeForm::Exact => self.epsilon * eta * libm::cos(eta * t) / (4.0 * self.omega_t(t)),
        }
    }
}

/// Scalar time dependence multiplying one operator of a [`Hamiltonian`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// `amplitude · cos(frequency · t + phase)`
    Cosine {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// `amplitude · exp(-i · frequency · t)`
    Phase { amplitude: Complex64, frequency: f64 },
    /// `εη cos(ηt) / (4(ω₀ + ε sin ηt))`
    ExactSqueeze { omega0: f64, epsilon: f64, eta: f64 },
}

impl Envelope {
    pub fn value(&self, t: f64) -> Complex64 {
        match *self {
            Envelope::Cosine {
                amplitude,
                frequency,
                phase,
            } => re(amplitude * libm::cos(frequency * t + phase)),
            Envelope::Phase {
                amplitude,
                frequency,
            } => {
                let (s, c) = libm::sincos(frequency * t);
                amplitude * Complex64::new(c, -s)
            }
            Envelope::ExactSqueeze {
                omega0,
                epsilon,
                eta,
            } => {
                let (s, c) = libm::sincos(eta * t);
                re(epsilon * eta * c / (4.0 * (omega0 + epsilon * s)))
            }
        }
    }

    /// Upper bound on `|value(t)|`.
    pub fn bound(&self) -> f64 {
        match *self {
            Envelope::Cosine { amplitude, .. } => amplitude.abs(),
            Envelope::Phase { amplitude, .. } => amplitude.norm(),
            Envelope::ExactSqueeze {
                omega0,
                epsilon,
                eta,
            } => (epsilon * eta).abs() / (4.0 * (omega0 - epsilon.abs())),
        }
    }
}

/// One time-dependent contribution `envelope(t) · operator`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivenTerm {
    pub operator: LinearOperator,
    pub envelope: Envelope,
}

/// `H(t) = constant + Σ_k envelope_k(t) · operator_k`.
///
/// The integrator re-evaluates the scalar envelopes at each substep instead
/// of rebuilding matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    frame: FrameTag,
    constant: LinearOperator,
    terms: Vec<DrivenTerm>,
}

impl Hamiltonian {
    pub fn time_independent(frame: FrameTag, constant: LinearOperator) -> Self {
        Self {
            frame,
            constant,
            terms: Vec::new(),
        }
    }

    pub fn new(frame: FrameTag, constant: LinearOperator, terms: Vec<DrivenTerm>) -> Result<Self> {
        let space = constant.space();
        if let Some(t) = terms.iter().find(|t| t.operator.space() != space) {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: t.operator.dim(),
            });
        }
        Ok(Self {
            frame,
            constant,
            terms,
        })
    }

    pub fn frame(&self) -> FrameTag {
        self.frame
    }

    pub fn space(&self) -> HilbertSpace {
        self.constant.space()
    }

    pub fn constant(&self) -> &LinearOperator {
        &self.constant
    }

    pub fn terms(&self) -> &[DrivenTerm] {
        &self.terms
    }

    pub fn is_time_independent(&self) -> bool {
        self.terms.is_empty()
    }

    /// `y = H(t) x`.
    pub fn apply_into(&self, t: f64, x: &[Complex64], y: &mut [Complex64]) {
        self.constant.apply_into(x, y);
        for term in &self.terms {
            term.operator.apply_add(term.envelope.value(t), x, y);
        }
    }

    /// `y += coeff · H(t) x`.
    pub fn apply_add(&self, t: f64, coeff: Complex64, x: &[Complex64], y: &mut [Complex64]) {
        self.constant.apply_add(coeff, x, y);
        for term in &self.terms {
            term.operator
                .apply_add(coeff * term.envelope.value(t), x, y);
        }
    }

    /// `H(t)` as a single sparse matrix.
    pub fn at(&self, t: f64) -> LinearOperator {
        self.terms.iter().fold(self.constant.clone(), |acc, term| {
            acc.add_scaled(&term.operator, term.envelope.value(t))
        })
    }

    /// Upper bound on the spectral radius of `H(t)` over all `t`.
    pub fn norm_bound(&self) -> f64 {
        self.constant.row_sum_bound()
            + self
                .terms
                .iter()
                .map(|t| t.envelope.bound() * t.operator.row_sum_bound())
                .sum::<f64>()
    }

    /// Largest Hermiticity defect of `H(t)` over the given times.
    pub fn hermiticity_defect(&self, times: &[f64]) -> f64 {
        times
            .iter()
            .map(|&t| self.at(t).symmetry_defect(Symmetry::Hermitian))
            .fold(0.0, f64::max)
    }
}

struct FieldOps {
    a: LinearOperator,
    ad: LinearOperator,
    n: LinearOperator,
}

impl FieldOps {
    fn new(space: HilbertSpace) -> Self {
        Self {
            a: annihilation(space),
            ad: creation(space),
            n: number(space),
        }
    }

    /// `i(â†² - â²)`, Hermitian.
    fn squeeze(&self) -> LinearOperator {
        let ad2 = self.ad.mul(&self.ad);
        let a2 = self.a.mul(&self.a);
        ad2.add_scaled(&a2, re(-1.0)).scale(I)
    }
}

fn check_space(ladder: &Ladder, space: HilbertSpace) -> Result<()> {
    if space.n_levels() != ladder.levels() {
        return Err(Error::DimensionMismatch {
            expected: ladder.levels(),
            found: space.n_levels(),
        });
    }
    Ok(())
}

fn hermitian(op: LinearOperator) -> Result<LinearOperator> {
    op.with_symmetry(Symmetry::Hermitian)
}

/// Lab-frame Hamiltonian
/// `H′(t) = ω_t n̂ + iχ_t(â†² − â²) + Σ E_j σ̂_j + Σ g_j (â + â†)(σ̂_{j+1,j} + σ̂_{j,j+1})`.
pub fn lab_hamiltonian(
    det: &DetectorSpec,
    modulation: &ModulationSpec,
    space: HilbertSpace,
) -> Result<Hamiltonian> {
    modulation.validate()?;
    let ladder = det.ladder()?;
    check_space(&ladder, space)?;
    let ops = FieldOps::new(space);

    let mut constant = ops.n.scale(re(modulation.omega0));
    for (j, &e) in ladder.energies().iter().enumerate() {
        constant = constant.add_scaled(&projector(space, j + 1)?, re(e));
    }
    let x = ops.a.add(&ops.ad);
    for (j, &g) in ladder.couplings().iter().enumerate() {
        let flip = sigma(space, j + 2, j + 1)?.add(&sigma(space, j + 1, j + 2)?);
        constant = constant.add_scaled(&x.mul(&flip), re(g));
    }
    let constant = hermitian(constant)?;

    let eta = modulation.eta();
    let squeeze = hermitian(ops.squeeze())?;
    let terms = match modulation.squeeze {
        SqueezeForm::Approximate => vec![DrivenTerm {
            operator: squeeze,
            envelope: Envelope::Cosine {
                amplitude: modulation.epsilon * eta / (4.0 * modulation.omega0),
                frequency: eta,
                phase: 0.0,
            },
        }],
        SqueezeForm::Exact => vec![
            DrivenTerm {
                operator: ops.n.clone(),
                envelope: Envelope::Cosine {
                    amplitude: modulation.epsilon,
                    frequency: eta,
                    phase: -FRAC_PI_2,
                },
            },
            DrivenTerm {
                operator: squeeze,
                envelope: Envelope::ExactSqueeze {
                    omega0: modulation.omega0,
                    epsilon: modulation.epsilon,
                    eta,
                },
            },
        ],
    };
    Hamiltonian::new(FrameTag::Lab, constant, terms)
}

fn warn_rwa_validity(ladder: &Ladder, modulation: &ModulationSpec) {
    let omega0 = modulation.omega0;
    let worst = ladder
        .couplings()
        .iter()
        .chain(&ladder.detunings(omega0))
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    if worst > 0.1 * omega0 {
        log::warn!("couplings/detunings up to {worst} are not small against omega0 = {omega0}; RWA may be inaccurate");
    }
}

/// Time-independent RWA Hamiltonian in the interaction picture:
/// `Ĥ = iβ_r(â†² − â²) − r n̂ − Σ_l Σ_{j≤l} (Δ_j + r) σ̂_{l+1} + Σ_l g_l (â σ̂_{l+1,l} + H.c.)`.
pub fn rwa_hamiltonian(
    det: &DetectorSpec,
    modulation: &ModulationSpec,
    space: HilbertSpace,
) -> Result<LinearOperator> {
    modulation.validate()?;
    let ladder = det.ladder()?;
    check_space(&ladder, space)?;
    warn_rwa_validity(&ladder, modulation);
    let ops = FieldOps::new(space);
    let r = modulation.r;

    let mut h = ops
        .squeeze()
        .scale(re(modulation.beta_r()))
        .add_scaled(&ops.n, re(-r));
    for level in 2..=ladder.levels() {
        let shift = ladder.rwa_level_shift(modulation.omega0, r, level);
        h = h.add_scaled(&projector(space, level)?, re(shift));
    }
    for (l, &g) in ladder.couplings().iter().enumerate() {
        let raise = ops.a.mul(&sigma(space, l + 2, l + 1)?);
        h = h.add_scaled(&raise, re(g)).add_scaled(&raise.adjoint(), re(g));
    }
    hermitian(h)
}

/// Interaction-picture Hamiltonian keeping the counter-rotating
/// `g_l (e^{-iηt} â σ̂_{l,l+1} + H.c.)` terms that the RWA drops.
pub fn counter_rotating_hamiltonian(
    det: &DetectorSpec,
    modulation: &ModulationSpec,
    space: HilbertSpace,
) -> Result<Hamiltonian> {
    let constant = rwa_hamiltonian(det, modulation, space)?;
    let ladder = det.ladder()?;
    let a = annihilation(space);
    let mut counter = LinearOperator::zeros(space);
    for (l, &g) in ladder.couplings().iter().enumerate() {
        counter = counter.add_scaled(&a.mul(&sigma(space, l + 1, l + 2)?), re(g));
    }
    let eta = modulation.eta();
    let terms = vec![
        DrivenTerm {
            operator: counter.adjoint(),
            envelope: Envelope::Phase {
                amplitude: re(1.0),
                frequency: -eta,
            },
        },
        DrivenTerm {
            operator: counter,
            envelope: Envelope::Phase {
                amplitude: re(1.0),
                frequency: eta,
            },
        },
    ];
    Hamiltonian::new(FrameTag::RwaInteraction, constant, terms)
}

/// Dimensionless couplings `ξ_l = g_l / 2β_r` of the strong-modulation expansion.
pub fn strong_modulation_xi(ladder: &Ladder, modulation: &ModulationSpec) -> Result<Vec<f64>> {
    let beta = modulation.beta_r();
    if beta == 0.0 {
        return Err(invalid("epsilon", "strong-modulation regime needs epsilon != 0"));
    }
    Ok(ladder.couplings().iter().map(|g| g / (2.0 * beta)).collect())
}

/// Second-order effective Hamiltonian in the strong-modulation regime (`r = 0`):
/// `H_eff = iβ₀[θ̂ â†² + Σ_l ξ_l ξ_{l+1} σ̂_{l,l+2} − H.c.]`,
/// `θ̂ = 1 + Σ_l ξ_l² (σ̂_{l+1} − σ̂_l)`.
///
/// It acts on states rotated by `Û = exp(-i K̂)` with `K̂` from
/// [`strong_modulation_generator`]: `|ψ⟩ = Û |ψ₁⟩`.
pub fn effective_strong_modulation_hamiltonian(
    det: &DetectorSpec,
    modulation: &ModulationSpec,
    space: HilbertSpace,
) -> Result<LinearOperator> {
    modulation.validate()?;
    if modulation.r != 0.0 {
        return Err(invalid("r", "effective Hamiltonian is derived for r = 0"));
    }
    let ladder = det.ladder()?;
    check_space(&ladder, space)?;
    let xi = strong_modulation_xi(&ladder, modulation)?;
    let worst = xi.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if worst > XI_CAP {
        return Err(Error::OutOfDomain {
            formula: "strong-modulation effective Hamiltonian",
            reason: format!("max |xi| = {worst} exceeds {XI_CAP}"),
        });
    }
    let ops = FieldOps::new(space);
    let beta0 = modulation.beta0();

    let mut theta = LinearOperator::identity(space);
    for (l, &x) in xi.iter().enumerate() {
        theta = theta
            .add_scaled(&projector(space, l + 2)?, re(x * x))
            .add_scaled(&projector(space, l + 1)?, re(-x * x));
    }
    let mut h = theta.mul(&ops.squeeze()).scale(re(beta0));
    for l in 0..xi.len().saturating_sub(1) {
        let up = sigma(space, l + 1, l + 3)?;
        let hop = up.add_scaled(&up.adjoint(), re(-1.0)).scale(I);
        h = h.add_scaled(&hop, re(beta0 * xi[l] * xi[l + 1]));
    }
    hermitian(h)
}

/// `K̂ = Σ_l ξ_l (â σ̂_{l,l+1} + â† σ̂_{l+1,l})`; the strong-modulation frame is
/// `Û = exp(-i K̂)`.
pub fn strong_modulation_generator(
    det: &DetectorSpec,
    modulation: &ModulationSpec,
    space: HilbertSpace,
) -> Result<LinearOperator> {
    let ladder = det.ladder()?;
    check_space(&ladder, space)?;
    let xi = strong_modulation_xi(&ladder, modulation)?;
    let a = annihilation(space);
    let mut k = LinearOperator::zeros(space);
    for (l, &x) in xi.iter().enumerate() {
        let term = a.mul(&sigma(space, l + 1, l + 2)?);
        k = k.add_scaled(&term, re(x)).add_scaled(&term.adjoint(), re(x));
    }
    hermitian(k)
}

/// Two-level Hamiltonian in the frame rotated by `V₂(t) = exp[i r t (n̂ + σ̂₂)]`:
/// `H₂(t) = −Δ₁ σ̂₂ + (iβ_r â†² e^{−2irt} + g₁ â σ̂_{2,1} + H.c.)`.
pub fn two_level_rotated_hamiltonian(
    det: &DetectorSpec,
    modulation: &ModulationSpec,
    space: HilbertSpace,
) -> Result<Hamiltonian> {
    modulation.validate()?;
    let ladder = det.ladder()?;
    if ladder.levels() != 2 {
        return Err(invalid(
            "detector",
            format!("two-level frame needs N = 2, got N = {}", ladder.levels()),
        ));
    }
    check_space(&ladder, space)?;
    let ops = FieldOps::new(space);
    let delta1 = ladder.detunings(modulation.omega0)[0];
    let g1 = ladder.couplings()[0];
    let beta = modulation.beta_r();

    let raise = ops.a.mul(&sigma(space, 2, 1)?);
    let mut constant = projector(space, 2)?
        .scale(re(-delta1))
        .add_scaled(&raise, re(g1))
        .add_scaled(&raise.adjoint(), re(g1));
    let pump = ops.ad.mul(&ops.ad).scale(I * beta);
    let terms = if modulation.r == 0.0 {
        constant = constant.add(&pump).add(&pump.adjoint());
        Vec::new()
    } else {
        let two_r = 2.0 * modulation.r;
        vec![
            DrivenTerm {
                operator: pump.adjoint(),
                envelope: Envelope::Phase {
                    amplitude: re(1.0),
                    frequency: -two_r,
                },
            },
            DrivenTerm {
                operator: pump,
                envelope: Envelope::Phase {
                    amplitude: re(1.0),
                    frequency: two_r,
                },
            },
        ]
    };
    Hamiltonian::new(FrameTag::TwoLevelRotated, hermitian(constant)?, terms)
}

/// Maps an RWA-frame state to the lab frame at time `t`: `|ψ′⟩ = V(t)|ψ⟩`.
pub fn rwa_to_lab(
    ladder: &Ladder,
    modulation: &ModulationSpec,
    t: f64,
    state: &mut StateVector,
) -> Result<()> {
    let space = state.space();
    check_space(ladder, space)?;
    let eta = modulation.eta();
    let e1 = ladder.energies()[0];
    for (idx, amp) in state.amplitudes_mut().iter_mut().enumerate() {
        let (level, n) = space.decompose(idx);
        let phase = -0.5 * t * (eta * n as f64 + 2.0 * e1 + (level - 1) as f64 * eta);
        let (s, c) = libm::sincos(phase);
        *amp *= Complex64::new(c, s);
    }
    Ok(())
}

/// Maps a two-level rotated-frame state to the RWA frame at time `t`:
/// `|ψ⟩ = V₂(t)|ψ₂⟩`.
pub fn two_level_to_rwa(r: f64, t: f64, state: &mut StateVector) -> Result<()> {
    let space = state.space();
    if space.n_levels() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: space.n_levels(),
        });
    }
    for (idx, amp) in state.amplitudes_mut().iter_mut().enumerate() {
        let (level, n) = space.decompose(idx);
        let (s, c) = libm::sincos(r * t * (n + level - 1) as f64);
        *amp *= Complex64::new(c, s);
    }
    Ok(())
}

/// Equivalent equidistant ladder of a network of identical two-level atoms:
/// `E_j = Ω (j − 1)`, `g_j = g √(j (N − j))` with `N = atoms + 1`.
pub fn dicke_to_ladder(network: &DetectorSpec) -> Result<DetectorSpec> {
    let DetectorSpec::DickeNetwork { atoms, omega, g } = *network else {
        return Err(Error::Unsupported(
            "only networks of identical two-level atoms map to a ladder".into(),
        ));
    };
    if atoms == 0 {
        return Err(invalid("atoms", "network needs at least one atom"));
    }
    let n = atoms + 1;
    let couplings = (1..n)
        .map(|j| g * libm::sqrt((j * (n - j)) as f64))
        .collect();
    Ok(DetectorSpec::Ladder(Ladder::equidistant(omega, couplings)?))
}

/// Collective operators of an explicit atom network; the detector register
/// index `b` (level `b + 1`) has atom `k` excited when bit `k` is set.
#[derive(Debug, Clone)]
pub struct CollectiveOperators {
    pub s_z: LinearOperator,
    pub s_plus: LinearOperator,
    pub s_minus: LinearOperator,
}

fn network_atoms(space: HilbertSpace, atoms: usize) -> Result<()> {
    if atoms == 0 || atoms > MAX_NETWORK_ATOMS {
        return Err(invalid(
            "atoms",
            format!("explicit networks support 1..={MAX_NETWORK_ATOMS} atoms, got {atoms}"),
        ));
    }
    if space.n_levels() != 1 << atoms {
        return Err(Error::DimensionMismatch {
            expected: 1 << atoms,
            found: space.n_levels(),
        });
    }
    Ok(())
}

/// `Ŝ_z = Σ σ̂₂^{(k)}`, `Ŝ_+ = Σ σ̂_{2,1}^{(k)}`, `Ŝ_- = Ŝ_+†`.
pub fn collective_operators(atoms: usize, space: HilbertSpace) -> Result<CollectiveOperators> {
    network_atoms(space, atoms)?;
    let fock = space.fock_dim();
    let registers = 1usize << atoms;
    let s_z = LinearOperator::diagonal(space, |idx| {
        re((idx / fock).count_ones() as f64)
    });
    let mut plus = Vec::new();
    for b in 0..registers {
        for k in 0..atoms {
            if b & (1 << k) == 0 {
                let target = b | (1 << k);
                for n in 0..fock {
                    plus.push((target * fock + n, b * fock + n, re(1.0)));
                }
            }
        }
    }
    let s_plus = LinearOperator::from_triplets(space, plus)?;
    Ok(CollectiveOperators {
        s_z: hermitian(s_z)?,
        s_minus: s_plus.adjoint(),
        s_plus,
    })
}

/// RWA-frame Hamiltonian of the explicit network:
/// `iβ_r(â†² − â²) − r n̂ − (Δ + r) Ŝ_z + g(â Ŝ_+ + â† Ŝ_-)`, `Δ = ω₀ − Ω`.
pub fn dicke_network_hamiltonian(
    network: &DetectorSpec,
    modulation: &ModulationSpec,
    space: HilbertSpace,
) -> Result<LinearOperator> {
    modulation.validate()?;
    let DetectorSpec::DickeNetwork { atoms, omega, g } = *network else {
        return Err(invalid("detector", "expected a Dicke network"));
    };
    let collective = collective_operators(atoms, space)?;
    let ops = FieldOps::new(space);
    let r = modulation.r;
    let delta = modulation.omega0 - omega;
    let raise = ops.a.mul(&collective.s_plus);
    let h = ops
        .squeeze()
        .scale(re(modulation.beta_r()))
        .add_scaled(&ops.n, re(-r))
        .add_scaled(&collective.s_z, re(-(delta + r)))
        .add_scaled(&raise, re(g))
        .add_scaled(&raise.adjoint(), re(g));
    hermitian(h)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Amplitudes of the symmetric Dicke state `|j⟩` (j − 1 excitations) over the
/// atom register.
pub fn dicke_state(atoms: usize, j: usize) -> Result<Vec<f64>> {
    if j == 0 || j > atoms + 1 {
        return Err(Error::LevelOutOfRange {
            index: j,
            levels: atoms + 1,
        });
    }
    let amp = 1.0 / libm::sqrt(binomial(atoms, j - 1));
    Ok((0..1usize << atoms)
        .map(|b| if b.count_ones() as usize == j - 1 { amp } else { 0.0 })
        .collect())
}

/// Embeds a state of the mapped `(atoms + 1)`-level ladder into the explicit
/// network space via the symmetric Dicke states.
pub fn embed_dicke_state(
    atoms: usize,
    ladder_state: &StateVector,
    network_space: HilbertSpace,
) -> Result<StateVector> {
    network_atoms(network_space, atoms)?;
    let ladder_space = ladder_state.space();
    if ladder_space.n_levels() != atoms + 1 || ladder_space.n_max() != network_space.n_max() {
        return Err(Error::DimensionMismatch {
            expected: atoms + 1,
            found: ladder_space.n_levels(),
        });
    }
    let fock = network_space.fock_dim();
    let mut out = StateVector::zeros(network_space);
    for b in 0..1usize << atoms {
        let excited = b.count_ones() as usize;
        let weight = 1.0 / libm::sqrt(binomial(atoms, excited));
        for n in 0..fock {
            out.amplitudes_mut()[b * fock + n] =
                ladder_state.amplitude(excited + 1, n)? * weight;
        }
    }
    Ok(out)
}

/// Level grouping that reports explicit-network populations per Dicke level
/// (number of excited atoms + 1); see [`crate::fock::Moments::regroup_levels`].
pub fn dicke_level_groups(atoms: usize) -> Vec<usize> {
    (0..1usize << atoms)
        .map(|b| b.count_ones() as usize + 1)
        .collect()
}
