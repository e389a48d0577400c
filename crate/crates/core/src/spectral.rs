//! Dressed states of the unmodulated (`ε = 0`, `r = 0`) RWA Hamiltonian and
//! the catalog of resonance shifts.
//!
//! At `ε = 0` the total excitation number `m = n + (j − 1)` is conserved, so
//! the spectrum is assembled block by block; the `m`-block is spanned by
//! `|j, m − j + 1⟩` for `j = 1..=min(N, m + 1)` and is tridiagonal.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fock::{HilbertSpace, StateVector};
use crate::linalg::symmetric_eigen;
use crate::model::{DetectorSpec, Ladder, ModulationSpec};
use crate::oracle;

/// Default ratio `|gap| / |coupling|` below which a dressed-state coupling is
/// flagged resonant.
pub const RESONANCE_WINDOW: f64 = 0.2;

/// `(Δ₁/2)² ≥ DISPERSIVE_MARGIN · g₁² n` marks the dispersive formula valid.
pub const DISPERSIVE_MARGIN: f64 = 10.0;

/// Photon number at which the dispersive validity flag is evaluated.
pub const DISPERSIVE_REFERENCE_PHOTONS: usize = 2;

/// Eigenvalues below this (relative to the block scale) count as null.
const NULL_TOL: f64 = 1e-12;

/// Eigenstate of the unmodulated Hamiltonian inside one excitation block.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedState {
    /// Total excitation number.
    pub m: usize,
    /// Branch: 0 for the null state, `±1, ±2, …` ordered by `|λ|` otherwise.
    pub k: i32,
    pub eigenvalue: f64,
    /// Real amplitudes on bare states `(level, photons, amplitude)`.
    pub components: Vec<(usize, usize, f64)>,
}

impl DressedState {
    pub fn to_state(&self, space: HilbertSpace) -> Result<StateVector> {
        let mut state = StateVector::zeros(space);
        for &(level, photons, amp) in &self.components {
            state.amplitudes_mut()[space.index(level, photons)?] = Complex64::new(amp, 0.0);
        }
        Ok(state)
    }

    pub fn amplitude(&self, level: usize, photons: usize) -> f64 {
        self.components
            .iter()
            .find(|&&(l, n, _)| l == level && n == photons)
            .map_or(0.0, |c| c.2)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.components.iter().map(|c| c.2 * c.2).sum())
    }
}

/// Resonant doublet of the two-level (Jaynes–Cummings) detector with `n`
/// excitations.
#[derive(Debug, Clone, PartialEq)]
pub struct JcDoublet {
    pub n: usize,
    /// `z_n = √((Δ₁/2)² + g₁² n)`.
    pub z: f64,
    /// Mixing angle in `[0, π/2]`.
    pub theta: f64,
    /// `λ_{n,+} = −Δ₁/2 + z_n`.
    pub plus: DressedState,
    /// `λ_{n,−} = −Δ₁/2 − z_n`.
    pub minus: DressedState,
}

/// JC eigensystem in the `{|1,n⟩, |2,n−1⟩}` block:
/// `|φ_{n,+}⟩ = sinθ|1,n⟩ + cosθ|2,n−1⟩`, `|φ_{n,−}⟩ = cosθ|1,n⟩ − sinθ|2,n−1⟩`.
/// A negative `g₁` flips the sign of the `|2,n−1⟩` components.
pub fn jc_eigensystem(g1: f64, delta1: f64, n: usize) -> Result<JcDoublet> {
    if n == 0 {
        return Err(invalid("n", "the ground state |1,0⟩ has eigenvalue 0 and no doublet"));
    }
    let coupling = g1.abs() * libm::sqrt(n as f64);
    let half = delta1 / 2.0;
    let z = libm::sqrt(half * half + coupling * coupling);
    let theta = if coupling == 0.0 && delta1 >= 0.0 {
        core::f64::consts::FRAC_PI_2
    } else {
        libm::atan2(coupling, z - half)
    };
    let (s, c) = libm::sincos(theta);
    let sign = if g1 < 0.0 { -1.0 } else { 1.0 };
    let plus = DressedState {
        m: n,
        k: 1,
        eigenvalue: -half + z,
        components: vec![(1, n, s), (2, n - 1, sign * c)],
    };
    let minus = DressedState {
        m: n,
        k: -1,
        eigenvalue: -half - z,
        components: vec![(1, n, c), (2, n - 1, -sign * s)],
    };
    Ok(JcDoublet {
        n,
        z,
        theta,
        plus,
        minus,
    })
}

/// `λ_n = √(n g₁² + (n − 1) g₂²)`.
pub fn three_level_lambda(g1: f64, g2: f64, n: usize) -> f64 {
    let n = n as f64;
    libm::sqrt(n * g1 * g1 + (n - 1.0).max(0.0) * g2 * g2)
}

/// Nonzero eigenpairs `±λ_n` of the resonant three-level ladder with `n`
/// excitations:
/// `|φ_{n,±}⟩ = (√n g₁|1,n⟩ ± λ_n|2,n−1⟩ + g₂√(n−1)|3,n−2⟩) / (√2 λ_n)`.
pub fn three_level_eigensystem(
    g1: f64,
    g2: f64,
    n: usize,
) -> Result<(f64, DressedState, DressedState)> {
    if n == 0 {
        return Err(invalid("n", "the zero-excitation block has only the null state"));
    }
    let lambda = three_level_lambda(g1, g2, n);
    if lambda == 0.0 {
        return Err(invalid("g1", "block is uncoupled; no nonzero eigenvalues"));
    }
    let norm = libm::sqrt(2.0) * lambda;
    let a1 = libm::sqrt(n as f64) * g1 / norm;
    let a3 = g2 * libm::sqrt((n - 1) as f64) / norm;
    let build = |sign: f64| {
        let mut components = vec![(1, n, a1), (2, n - 1, sign / libm::sqrt(2.0))];
        if n >= 2 {
            components.push((3, n - 2, a3));
        }
        DressedState {
            m: n,
            k: sign as i32,
            eigenvalue: sign * lambda,
            components,
        }
    };
    Ok((lambda, build(1.0), build(-1.0)))
}

fn require_resonant(ladder: &Ladder, omega0: f64) -> Result<()> {
    let scale = omega0.abs().max(1.0);
    if let Some(d) = ladder
        .detunings(omega0)
        .into_iter()
        .find(|d| d.abs() > 1e-12 * scale)
    {
        return Err(invalid(
            "detector",
            format!("null-state recursion needs a resonant ladder, found detuning {d}"),
        ));
    }
    Ok(())
}

/// Zero-eigenvalue dressed state of the resonant ladder in the `m`-excitation
/// block, `N_m⁻¹ Σ_k α_k |2k+1, m−2k⟩` with `α₀ = 1` and
/// `α_{k+1} = −α_k g_{2k+1}√(m−2k) / (g_{2k+2}√(m−2k−1))`.
///
/// The recursion closes only when the block's top level `min(N, m + 1)` is
/// odd; otherwise `None` is returned.
pub fn null_eigenstate(det: &DetectorSpec, omega0: f64, m: usize) -> Result<Option<DressedState>> {
    let ladder = det.ladder()?;
    require_resonant(&ladder, omega0)?;
    let top = ladder.levels().min(m + 1);
    if top % 2 == 0 {
        return Ok(None);
    }
    let g = ladder.couplings();
    let mut components = vec![(1, m, 1.0)];
    let mut alpha = 1.0;
    let mut k = 0;
    while 2 * k + 3 <= top {
        let (upper, lower) = (g[2 * k + 1], g[2 * k]);
        if upper == 0.0 || lower == 0.0 {
            return Err(invalid("couplings", "null-state recursion needs nonzero couplings"));
        }
        let photons = (m - 2 * k) as f64;
        alpha = -alpha * lower * libm::sqrt(photons) / (upper * libm::sqrt(photons - 1.0));
        components.push((2 * k + 3, m - 2 * k - 2, alpha));
        k += 1;
    }
    let norm = libm::sqrt(components.iter().map(|c| c.2 * c.2).sum());
    components.iter_mut().for_each(|c| c.2 /= norm);
    Ok(Some(DressedState {
        m,
        k: 0,
        eigenvalue: 0.0,
        components,
    }))
}

/// Basis `(level, photons)` and dense real-symmetric matrix of the
/// `m`-excitation block of the unmodulated RWA Hamiltonian at `r = 0`.
pub fn excitation_block(ladder: &Ladder, omega0: f64, m: usize) -> (Vec<(usize, usize)>, Vec<f64>) {
    let top = ladder.levels().min(m + 1);
    let basis: Vec<(usize, usize)> = (1..=top).map(|j| (j, m + 1 - j)).collect();
    let detunings = ladder.detunings(omega0);
    let mut matrix = vec![0.0; top * top];
    for j in 1..=top {
        matrix[(j - 1) * top + (j - 1)] = -detunings[..j - 1].iter().sum::<f64>();
        if j < top {
            let element = ladder.couplings()[j - 1] * libm::sqrt((m + 1 - j) as f64);
            matrix[(j - 1) * top + j] = element;
            matrix[j * top + (j - 1)] = element;
        }
    }
    (basis, matrix)
}

/// All dressed states of the `m`-excitation block, ascending in eigenvalue.
pub fn block_eigensystem(ladder: &Ladder, omega0: f64, m: usize) -> Vec<DressedState> {
    let (basis, matrix) = excitation_block(ladder, omega0, m);
    let dim = basis.len();
    let (values, vectors) = symmetric_eigen(&matrix, dim);
    let scale = matrix.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let null = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() <= NULL_TOL * scale)
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i);

    let mut states: Vec<DressedState> = values
        .iter()
        .enumerate()
        .map(|(i, &eigenvalue)| DressedState {
            m,
            k: 0,
            eigenvalue,
            components: basis
                .iter()
                .enumerate()
                .map(|(b, &(l, n))| (l, n, vectors[i * dim + b]))
                .collect(),
        })
        .collect();
    let mut positive = 0;
    for i in 0..dim {
        if Some(i) != null && (values[i] > 0.0 || (values[i] == 0.0 && null.is_some())) {
            positive += 1;
            states[i].k = positive;
        }
    }
    let mut negative = 0;
    for i in (0..dim).rev() {
        if Some(i) != null && states[i].k == 0 {
            negative -= 1;
            states[i].k = negative;
        }
    }
    states
}

/// Dressed spectrum for every block `m = 0..=m_cap`.
pub fn dressed_spectrum(det: &DetectorSpec, omega0: f64, m_cap: usize) -> Result<Vec<DressedState>> {
    let ladder = det.ladder()?;
    Ok((0..=m_cap)
        .flat_map(|m| block_eigensystem(&ladder, omega0, m))
        .collect())
}

/// Coupling `β₀⟨φ_{m,j}|(â†² − â²)|φ_{n,k}⟩` between two dressed states.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedCoupling {
    /// Index into [`DressedCouplings::states`].
    pub row: usize,
    pub col: usize,
    pub element: f64,
    /// `λ_col − λ_row`.
    pub gap: f64,
    pub resonant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DressedCouplings {
    pub states: Vec<DressedState>,
    pub couplings: Vec<DressedCoupling>,
}

impl DressedCouplings {
    pub fn find(&self, (m, k): (usize, i32)) -> Option<usize> {
        self.states.iter().position(|s| s.m == m && s.k == k)
    }

    pub fn coupling(&self, a: (usize, i32), b: (usize, i32)) -> Option<&DressedCoupling> {
        let (row, col) = (self.find(a)?, self.find(b)?);
        self.couplings
            .iter()
            .find(|c| c.row == row && c.col == col)
    }
}

fn squeeze_element(bra: &DressedState, ket: &DressedState) -> f64 {
    let mut sum = 0.0;
    for &(l, n, a) in &ket.components {
        let up = libm::sqrt(((n + 1) * (n + 2)) as f64);
        sum += bra.amplitude(l, n + 2) * up * a;
        if n >= 2 {
            let down = libm::sqrt((n * (n - 1)) as f64);
            sum -= bra.amplitude(l, n - 2) * down * a;
        }
    }
    sum
}

/// Matrix elements of the modulation between dressed states up to `m_cap`
/// excitations; an element is flagged resonant when
/// `|gap| < window · |element|`. Only `|m − n| = 2` elements can be nonzero.
pub fn dressed_coupling_matrix(
    det: &DetectorSpec,
    modulation: &ModulationSpec,
    space: HilbertSpace,
    m_cap: usize,
    window: f64,
) -> Result<DressedCouplings> {
    if m_cap > space.n_max() {
        return Err(Error::PhotonOutOfRange {
            photons: m_cap,
            n_max: space.n_max(),
        });
    }
    if !(window > 0.0) {
        return Err(invalid("window", "resonance window must be positive"));
    }
    let states = dressed_spectrum(det, modulation.omega0, m_cap)?;
    let beta0 = modulation.beta0();
    let mut couplings = Vec::new();
    for (row, bra) in states.iter().enumerate() {
        for (col, ket) in states.iter().enumerate() {
            if bra.m.abs_diff(ket.m) != 2 {
                continue;
            }
            let element = beta0 * squeeze_element(bra, ket);
            if element.abs() < 1e-300 {
                continue;
            }
            let gap = ket.eigenvalue - bra.eigenvalue;
            couplings.push(DressedCoupling {
                row,
                col,
                element,
                gap,
                resonant: gap.abs() < window * element.abs(),
            });
        }
    }
    Ok(DressedCouplings { states, couplings })
}

/// Photon-number behaviour expected at a catalogued resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    Unbounded,
    /// At most this many photons are created.
    Bounded(usize),
    /// Photon creation proceeds at least up to this many photons; the bound
    /// above is not established.
    AtLeastPhotons(usize),
    /// Rabi-like exchange between `|1,0⟩` and one dressed state, with the
    /// given angular frequency.
    TwoStateOscillation { frequency: f64 },
    /// Dispersive shift; `valid` reports whether `(Δ₁/2)² ≫ g₁² n`.
    Dispersive { valid: bool },
}

/// Closed form a catalog entry was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResonanceFormula {
    /// `r = 0`
    Unshifted,
    /// `2r = ±√(2g₁² + g₂²)`
    TwoPhoton,
    /// `r = ±g` for an oscillator detector.
    Oscillator,
    /// `2r = S z₂ − Δ₁/2 + y`
    TwoLevelShifted,
    /// `2r = 2δ`, `δ = g₁²/Δ₁`
    Dispersive,
}

impl ResonanceFormula {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Unshifted => "unshifted",
            Self::TwoPhoton => "two_photon",
            Self::Oscillator => "oscillator",
            Self::TwoLevelShifted => "two_level_shifted",
            Self::Dispersive => "dispersive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceEntry {
    pub r: f64,
    pub regime: Regime,
    pub formula: ResonanceFormula,
    /// Branch sign `S = ±1` where the formula has one, else 0.
    pub sign: i32,
}

/// `z_n` of the two-level doublet.
pub fn two_level_z(g1: f64, delta1: f64, n: usize) -> f64 {
    libm::sqrt(delta1 * delta1 / 4.0 + g1 * g1 * n as f64)
}

/// Shift `r` of the two-level resonance `2r = S z₂ − Δ₁/2 + y`.
pub fn two_level_shift(g1: f64, delta1: f64, sign: i32, y: f64) -> f64 {
    (sign as f64 * two_level_z(g1, delta1, 2) - delta1 / 2.0 + y) / 2.0
}

/// Resonance shifts implied by the detector and the modulation.
pub fn resonance_catalog(det: &DetectorSpec, modulation: &ModulationSpec) -> Result<Vec<ResonanceEntry>> {
    let entry = |r, regime, formula, sign| ResonanceEntry {
        r,
        regime,
        formula,
        sign,
    };
    let mut out = Vec::new();
    match det {
        DetectorSpec::Empty => {
            out.push(entry(0.0, Regime::Unbounded, ResonanceFormula::Unshifted, 0));
        }
        DetectorSpec::HarmonicOscillator { g, .. } => {
            out.push(entry(0.0, Regime::Unbounded, ResonanceFormula::Unshifted, 0));
            for sign in [1, -1] {
                out.push(entry(
                    sign as f64 * g,
                    Regime::Unbounded,
                    ResonanceFormula::Oscillator,
                    sign,
                ));
            }
        }
        DetectorSpec::Ladder(_) | DetectorSpec::DickeNetwork { .. } => {
            let ladder = det.ladder()?;
            let n = ladder.levels();
            let zero_regime = if n % 2 == 1 {
                Regime::Unbounded
            } else {
                Regime::Bounded(n - 2)
            };
            out.push(entry(0.0, zero_regime, ResonanceFormula::Unshifted, 0));
            let g = ladder.couplings();
            if n == 2 {
                let delta1 = ladder.detunings(modulation.omega0)[0];
                for sign in [1, -1] {
                    let regime = if delta1 != 0.0 && delta1.signum() as i32 == sign {
                        Regime::AtLeastPhotons(2)
                    } else {
                        Regime::Bounded(2)
                    };
                    out.push(entry(
                        two_level_shift(g[0], delta1, sign, modulation.y),
                        regime,
                        ResonanceFormula::TwoLevelShifted,
                        sign,
                    ));
                }
                if delta1 != 0.0 {
                    let delta = oracle::dispersive_shift(g[0], delta1)?;
                    let valid = oracle::dispersive_valid(
                        g[0],
                        delta1,
                        DISPERSIVE_REFERENCE_PHOTONS,
                        DISPERSIVE_MARGIN,
                    );
                    out.push(entry(
                        delta,
                        Regime::Dispersive { valid },
                        ResonanceFormula::Dispersive,
                        0,
                    ));
                }
            }
            if n >= 3 {
                let lambda2 = three_level_lambda(g[0], g[1], 2);
                for sign in [1, -1] {
                    let r = sign as f64 * lambda2 / 2.0;
                    let regime = if n == 3 && g[0] != 0.0 {
                        let beta_r = modulation.with_shift(r).beta_r();
                        Regime::TwoStateOscillation {
                            frequency: oracle::three_level_oscillation_frequency(
                                g[0], g[1], beta_r,
                            )?,
                        }
                    } else {
                        Regime::AtLeastPhotons(2)
                    };
                    out.push(entry(r, regime, ResonanceFormula::TwoPhoton, sign));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three(g1: f64, g2: f64) -> DetectorSpec {
        DetectorSpec::Ladder(Ladder::equidistant(1.0, vec![g1, g2]).unwrap())
    }

    #[test]
    fn jc_resonant_symmetric_doublet() {
        let d = jc_eigensystem(0.01, 0.0, 1).unwrap();
        assert!((d.plus.eigenvalue - 0.01).abs() < 1e-16);
        assert!((d.minus.eigenvalue + 0.01).abs() < 1e-16);
        assert!((d.theta - core::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(jc_eigensystem(0.01, 0.0, 0).is_err());
    }

    #[test]
    fn jc_detuned_eigenvalues() {
        let g = 0.01;
        let d = jc_eigensystem(g, 8.0 * g, 1).unwrap();
        let r17 = libm::sqrt(17.0);
        assert!((d.plus.eigenvalue - g * (r17 - 4.0)).abs() < 1e-15);
        assert!((d.minus.eigenvalue - g * (-r17 - 4.0)).abs() < 1e-15);
        assert!(d.theta > 0.0 && d.theta < core::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn jc_uncoupled_limits_are_bare() {
        let d = jc_eigensystem(0.0, 0.3, 2).unwrap();
        assert_eq!(d.plus.amplitude(1, 2), 1.0);
        assert_eq!(d.plus.eigenvalue, 0.0);
        let d = jc_eigensystem(0.0, -0.3, 2).unwrap();
        assert_eq!(d.plus.amplitude(2, 1), 1.0);
        assert!((d.plus.eigenvalue - 0.3).abs() < 1e-16);
    }

    #[test]
    fn three_level_examples() {
        let (l1, p, _) = three_level_eigensystem(0.02, 0.05, 1).unwrap();
        assert!((l1 - 0.02).abs() < 1e-16);
        assert_eq!(p.components.len(), 2);
        assert!((p.amplitude(1, 1) - libm::sqrt(0.5)).abs() < 1e-15);
        let (l2, _, _) = three_level_eigensystem(0.01, 0.01, 2).unwrap();
        assert!((l2 - 0.01 * libm::sqrt(3.0)).abs() < 1e-16);
    }

    #[test]
    fn null_state_three_levels_two_excitations() {
        let s = null_eigenstate(&three(0.01, 0.01), 1.0, 2).unwrap().unwrap();
        assert!((s.amplitude(1, 2) - 1.0 / libm::sqrt(3.0)).abs() < 1e-15);
        assert!((s.amplitude(3, 0) + libm::sqrt(2.0 / 3.0)).abs() < 1e-15);
        assert!(null_eigenstate(&three(0.01, 0.01), 1.0, 1).unwrap().is_none());
    }

    #[test]
    fn null_state_parity_rules() {
        let two = DetectorSpec::Ladder(Ladder::equidistant(1.0, vec![0.1]).unwrap());
        let ground = null_eigenstate(&two, 1.0, 0).unwrap().unwrap();
        assert_eq!(ground.components, vec![(1, 0, 1.0)]);
        let four = DetectorSpec::Ladder(Ladder::harmonic(4, 1.0, 0.1).unwrap());
        assert!(null_eigenstate(&four, 1.0, 3).unwrap().is_none());
        assert!(null_eigenstate(&four, 1.0, 2).unwrap().is_some());
        let detuned = DetectorSpec::Ladder(Ladder::equidistant(0.9, vec![0.1]).unwrap());
        assert!(null_eigenstate(&detuned, 1.0, 2).is_err());
    }

    #[test]
    fn block_branches_labelled() {
        let ladder = Ladder::equidistant(1.0, vec![0.01, 0.01]).unwrap();
        let states = block_eigensystem(&ladder, 1.0, 2);
        let ks: Vec<i32> = states.iter().map(|s| s.k).collect();
        assert_eq!(ks, vec![-1, 0, 1]);
        assert!((states[2].eigenvalue - 0.01 * libm::sqrt(3.0)).abs() < 1e-15);
        let two = Ladder::equidistant(1.0, vec![0.01]).unwrap();
        let ks: Vec<i32> = block_eigensystem(&two, 1.0, 3).iter().map(|s| s.k).collect();
        assert_eq!(ks, vec![-1, 1]);
    }

    #[test]
    fn coupling_selection_rule_and_null_chain() {
        let det = three(0.01, 0.01);
        let m = ModulationSpec::new(1.0, 1e-3).unwrap();
        let space = HilbertSpace::new(3, 10).unwrap();
        let c = dressed_coupling_matrix(&det, &m, space, 8, RESONANCE_WINDOW).unwrap();
        for x in &c.couplings {
            assert_eq!(c.states[x.row].m.abs_diff(c.states[x.col].m), 2);
        }
        for k in (0..6).step_by(2) {
            let link = c.coupling((k, 0), (k + 2, 0)).expect("null chain element");
            assert!(link.resonant);
        }
        assert!(c
            .couplings
            .iter()
            .filter(|x| c.states[x.row].k != 0 || c.states[x.col].k != 0)
            .all(|x| !x.resonant));
        assert!(dressed_coupling_matrix(&det, &m, space, 11, RESONANCE_WINDOW).is_err());
    }

    #[test]
    fn catalog_three_level() {
        let g = 0.01;
        let m = ModulationSpec::new(1.0, 1e-3).unwrap();
        let cat = resonance_catalog(&three(g, g), &m).unwrap();
        let shifted: Vec<&ResonanceEntry> = cat
            .iter()
            .filter(|e| e.formula == ResonanceFormula::TwoPhoton)
            .collect();
        assert_eq!(shifted.len(), 2);
        for e in shifted {
            assert!((2.0 * e.r.abs() - g * libm::sqrt(3.0)).abs() < 1e-15);
            assert!(matches!(e.regime, Regime::TwoStateOscillation { .. }));
        }
        assert_eq!(cat[0].regime, Regime::Unbounded);
    }

    #[test]
    fn catalog_two_level_and_oscillator() {
        let g = 0.01;
        let m = ModulationSpec::new(1.0, 1e-3).unwrap().with_correction(2e-4);
        let two = DetectorSpec::Ladder(Ladder::equidistant(1.0, vec![g]).unwrap());
        let cat = resonance_catalog(&two, &m).unwrap();
        assert_eq!(cat[0].regime, Regime::Bounded(0));
        let plus = cat.iter().find(|e| e.sign == 1).unwrap();
        assert!((2.0 * plus.r - (g * libm::sqrt(2.0) + 2e-4)).abs() < 1e-15);
        assert!(cat.iter().all(|e| e.formula != ResonanceFormula::Dispersive));

        let ho = DetectorSpec::HarmonicOscillator { omega: 1.0, g, levels: 30 };
        let cat = resonance_catalog(&ho, &m).unwrap();
        assert!(cat.iter().any(|e| e.r == g && e.regime == Regime::Unbounded));
        assert!(cat.iter().any(|e| e.r == -g));
    }

    #[test]
    fn catalog_dispersive_entry() {
        let g = 0.01;
        let det = DetectorSpec::Ladder(Ladder::new(vec![0.0, 1.0 - 8.0 * g], vec![g]).unwrap());
        let m = ModulationSpec::new(1.0, 3e-4).unwrap();
        let cat = resonance_catalog(&det, &m).unwrap();
        let disp = cat
            .iter()
            .find(|e| e.formula == ResonanceFormula::Dispersive)
            .unwrap();
        assert!((disp.r - g / 8.0).abs() < 1e-16);
        assert_eq!(disp.regime, Regime::Dispersive { valid: false });
        let plus = cat.iter().find(|e| e.sign == 1).unwrap();
        assert_eq!(plus.regime, Regime::AtLeastPhotons(2));
        let minus = cat.iter().find(|e| e.sign == -1).unwrap();
        assert_eq!(minus.regime, Regime::Bounded(2));

        let far = DetectorSpec::Ladder(Ladder::new(vec![0.0, 1.0 - 20.0 * g], vec![g]).unwrap());
        let cat = resonance_catalog(&far, &m).unwrap();
        let disp = cat
            .iter()
            .find(|e| e.formula == ResonanceFormula::Dispersive)
            .unwrap();
        assert!((disp.r - g / 20.0).abs() < 1e-16);
        assert_eq!(disp.regime, Regime::Dispersive { valid: true });
    }
}
