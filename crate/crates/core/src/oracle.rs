//! Closed-form predictions. None of these call simulation code.
//!
//! `β₀ = ε/4` enters the unshifted (`r = 0`) results; shifted resonances take
//! `β_r = (1 + r/ω₀) ε/4`. Each function names which one it expects.

use alloc::format;

use crate::error::{Error, Result};
use crate::model::{DetectorSpec, ModulationSpec};

fn sinh(x: f64) -> f64 {
    libm::sinh(x)
}

fn out_of_domain(formula: &'static str, reason: impl Into<alloc::string::String>) -> Error {
    Error::OutOfDomain {
        formula,
        reason: reason.into(),
    }
}

/// Empty cavity at `r = 0`: `⟨n̂(t)⟩ = sinh²(2β₀t)`.
pub fn empty_cavity_mean_n(beta0: f64, t: f64) -> f64 {
    let s = sinh(2.0 * beta0 * t);
    s * s
}

/// Empty cavity at `r = 0`: `⟨(Δx̂_±)²⟩ = e^{±4β₀t}/2`.
pub fn empty_cavity_variances(beta0: f64, t: f64) -> (f64, f64) {
    let e = libm::exp(4.0 * beta0 * t);
    (e / 2.0, 1.0 / (2.0 * e))
}

/// Mandel factor of squeezed vacuum, `Q = 1 + 2⟨n̂⟩`.
pub fn empty_cavity_mandel_q(mean_n: f64) -> Result<f64> {
    if !(mean_n > 0.0) {
        return Err(out_of_domain("empty_cavity_mandel_q", "mean photon number must be positive"));
    }
    Ok(1.0 + 2.0 * mean_n)
}

/// Mandel factor of a thermal state, `Q = ⟨n̂⟩`.
pub fn thermal_mandel_q(mean_n: f64) -> f64 {
    mean_n
}

/// `γ = √(g² − β₀²)`; the oscillator-detector formulas need it real.
pub fn ho_gamma(g: f64, beta0: f64) -> Result<f64> {
    let arg = g * g - beta0 * beta0;
    if !(arg > 0.0) {
        return Err(out_of_domain(
            "ho_gamma",
            format!("|g| = {} must exceed |beta0| = {}", g.abs(), beta0.abs()),
        ));
    }
    Ok(libm::sqrt(arg))
}

/// Oscillator detector at `r = 0`, resonant, from vacuum:
/// `⟨(Δx̂_±)²⟩ = e^{±2β₀t}(1/2 ± (β₀/2γ) sin 2γt + (β₀²/γ²) sin² γt)`.
pub fn ho_variances(g: f64, beta0: f64, t: f64) -> Result<(f64, f64)> {
    let gamma = ho_gamma(g, beta0)?;
    let osc = beta0 / (2.0 * gamma) * libm::sin(2.0 * gamma * t);
    let s = libm::sin(gamma * t);
    let sq = (beta0 / gamma) * (beta0 / gamma) * s * s;
    let e = libm::exp(2.0 * beta0 * t);
    Ok((e * (0.5 + osc + sq), (0.5 - osc + sq) / e))
}

/// `⟨(Δx̂₊)²⟩⟨(Δx̂₋)²⟩ = 1/4 + (gβ₀/γ²)² sin⁴ γt`.
pub fn ho_uncertainty_product(g: f64, beta0: f64, t: f64) -> Result<f64> {
    let gamma = ho_gamma(g, beta0)?;
    let c = g * beta0 / (gamma * gamma);
    let s = libm::sin(gamma * t);
    Ok(0.25 + c * c * s * s * s * s)
}

/// `⟨n̂⟩` implied by the oscillator variances for a field with `⟨â⟩ = 0`:
/// `(⟨(Δx̂₊)²⟩ + ⟨(Δx̂₋)²⟩ − 1)/2`.
pub fn ho_mean_n(g: f64, beta0: f64, t: f64) -> Result<f64> {
    let (p, m) = ho_variances(g, beta0, t)?;
    Ok((p + m - 1.0) / 2.0)
}

/// Oscillator detector at the shifted resonance `r = ±g`:
/// `⟨n̂(t)⟩ = sinh²(β₀t)/2`.
pub fn ho_shifted_resonance_mean_n(beta0: f64, t: f64) -> f64 {
    let s = sinh(beta0 * t);
    s * s / 2.0
}

/// Two-state oscillation frequency at the three-level resonance `2r = ±λ₂`:
/// `β_r [1 + (g₂/2g₁)²]^{−1/2}`.
pub fn three_level_oscillation_frequency(g1: f64, g2: f64, beta_r: f64) -> Result<f64> {
    if g1 == 0.0 || !g1.is_finite() {
        return Err(out_of_domain("three_level_oscillation_frequency", "g1 must be nonzero"));
    }
    let x = g2 / (2.0 * g1);
    Ok(beta_r / libm::sqrt(1.0 + x * x))
}

/// First-order coupling `|β_r⟨φ_{2,±}|â†²|1,0⟩| = β_r √2 |g₁| / λ₂` between the
/// vacuum and the resonant three-level dressed state.
pub fn three_level_coupling_rate(g1: f64, g2: f64, beta_r: f64) -> Result<f64> {
    let lambda2 = libm::sqrt(2.0 * g1 * g1 + g2 * g2);
    if lambda2 == 0.0 || !lambda2.is_finite() {
        return Err(out_of_domain("three_level_coupling_rate", "couplings must be nonzero"));
    }
    Ok(beta_r.abs() * libm::sqrt(2.0) * g1.abs() / lambda2)
}

/// Period of `P(|1,0⟩)` for a two-state exchange at amplitude frequency
/// `frequency`: the population completes a cycle every `π/frequency`.
pub fn population_period(frequency: f64) -> f64 {
    core::f64::consts::PI / frequency
}

/// Dispersive shift `δ = g₁²/Δ₁`.
pub fn dispersive_shift(g1: f64, delta1: f64) -> Result<f64> {
    if delta1 == 0.0 || !delta1.is_finite() {
        return Err(out_of_domain("dispersive_shift", "delta1 must be nonzero"));
    }
    Ok(g1 * g1 / delta1)
}

/// Whether `(Δ₁/2)² ≥ margin · g₁² n`.
pub fn dispersive_valid(g1: f64, delta1: f64, n: usize, margin: f64) -> bool {
    delta1 * delta1 / 4.0 >= margin * g1 * g1 * n as f64
}

/// Values a closed form predicts at one time; `None` where it is silent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OraclePoint {
    pub n_mean: Option<f64>,
    pub mandel_q: Option<f64>,
    pub xvar_plus: Option<f64>,
    pub xvar_minus: Option<f64>,
}

/// Closed form with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// Empty cavity, `r = 0`; takes `β₀`.
    EmptyCavity { beta0: f64 },
    /// Resonant oscillator detector, `r = 0`; takes `β₀`.
    Oscillator { g: f64, beta0: f64 },
    /// Oscillator detector at `r = ±g`; takes `β₀`.
    OscillatorShifted { beta0: f64 },
}

impl ClosedForm {
    pub fn id(&self) -> &'static str {
        match self {
            Self::EmptyCavity { .. } => "empty_cavity",
            Self::Oscillator { .. } => "oscillator",
            Self::OscillatorShifted { .. } => "oscillator_shifted",
        }
    }

    /// Validity predicate; total over finite and non-finite inputs.
    pub fn is_valid(&self) -> bool {
        match *self {
            Self::EmptyCavity { beta0 } | Self::OscillatorShifted { beta0 } => beta0.is_finite(),
            Self::Oscillator { g, beta0 } => {
                g.is_finite() && beta0.is_finite() && g * g > beta0 * beta0
            }
        }
    }

    pub fn evaluate(&self, t: f64) -> Result<OraclePoint> {
        if !self.is_valid() || !t.is_finite() {
            return Err(out_of_domain(self.id(), "parameters outside the validity domain"));
        }
        Ok(match *self {
            Self::EmptyCavity { beta0 } => {
                let n = empty_cavity_mean_n(beta0, t);
                let (p, m) = empty_cavity_variances(beta0, t);
                OraclePoint {
                    n_mean: Some(n),
                    mandel_q: empty_cavity_mandel_q(n).ok(),
                    xvar_plus: Some(p),
                    xvar_minus: Some(m),
                }
            }
            Self::Oscillator { g, beta0 } => {
                let (p, m) = ho_variances(g, beta0, t)?;
                OraclePoint {
                    n_mean: Some((p + m - 1.0) / 2.0),
                    mandel_q: None,
                    xvar_plus: Some(p),
                    xvar_minus: Some(m),
                }
            }
            Self::OscillatorShifted { beta0 } => OraclePoint {
                n_mean: Some(ho_shifted_resonance_mean_n(beta0, t)),
                ..OraclePoint::default()
            },
        })
    }

    /// Closed form matching an RWA-frame experiment, if one exists.
    pub fn for_experiment(det: &DetectorSpec, modulation: &ModulationSpec) -> Option<Self> {
        let beta0 = modulation.beta0();
        let resonant = |omega: f64| omega == modulation.omega0;
        let form = match *det {
            DetectorSpec::Empty if modulation.r == 0.0 => Self::EmptyCavity { beta0 },
            DetectorSpec::HarmonicOscillator { omega, g, .. } if resonant(omega) => {
                if modulation.r == 0.0 {
                    Self::Oscillator { g, beta0 }
                } else if modulation.r.abs() == g.abs() {
                    Self::OscillatorShifted { beta0 }
                } else {
                    return None;
                }
            }
            _ => return None,
        };
        form.is_valid().then_some(form)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_cavity_limits() {
        assert_eq!(empty_cavity_mean_n(0.1, 0.0), 0.0);
        let s1 = libm::sinh(1.0);
        assert!((empty_cavity_mean_n(0.25, 2.0) - s1 * s1).abs() < 1e-15);
        let big = empty_cavity_mean_n(1.0, 5.0);
        assert!((big / (libm::exp(20.0) / 4.0) - 1.0).abs() < 1e-8);
        assert_eq!(empty_cavity_mandel_q(1.0).unwrap(), 3.0);
        assert!(empty_cavity_mandel_q(0.0).is_err());
        assert_eq!(thermal_mandel_q(2.5), 2.5);
    }

    #[test]
    fn ho_formula_edges() {
        let (p, m) = ho_variances(0.01, 2.5e-4, 0.0).unwrap();
        assert_eq!((p, m), (0.5, 0.5));
        assert_eq!(ho_uncertainty_product(0.01, 2.5e-4, 0.0).unwrap(), 0.25);
        let gamma = ho_gamma(0.01, 2.5e-4).unwrap();
        let revival = ho_uncertainty_product(0.01, 2.5e-4, core::f64::consts::PI / gamma).unwrap();
        assert!((revival - 0.25).abs() < 1e-15);
        assert!(ho_variances(1e-4, 2.5e-4, 1.0).is_err());
        assert!(ho_gamma(2.5e-4, 2.5e-4).is_err());
    }

    #[test]
    fn ho_product_matches_variances() {
        let (g, b) = (0.01, 2.5e-4);
        for k in 0..40 {
            let t = 97.0 * k as f64;
            let (p, m) = ho_variances(g, b, t).unwrap();
            let prod = ho_uncertainty_product(g, b, t).unwrap();
            assert!((p * m - prod).abs() < 1e-13);
        }
    }

    #[test]
    fn shifted_resonance_grows_at_half_rate() {
        let n = ho_shifted_resonance_mean_n(0.1, 1.0 / 0.1);
        let s = libm::sinh(1.0);
        assert!((n - s * s / 2.0).abs() < 1e-15);
        let late = ho_shifted_resonance_mean_n(1.0, 20.0).ln();
        let empty = empty_cavity_mean_n(1.0, 20.0).ln();
        assert!((late / empty - 0.5).abs() < 0.02);
    }

    #[test]
    fn three_level_frequency_properties() {
        assert_eq!(three_level_oscillation_frequency(0.01, 0.0, 3e-4).unwrap(), 3e-4);
        let f = three_level_oscillation_frequency(0.01, 0.01, 1.0).unwrap();
        assert!((f - 1.0 / libm::sqrt(1.25)).abs() < 1e-15);
        let mut last = f64::INFINITY;
        for k in 0..20 {
            let f = three_level_oscillation_frequency(1.0, 0.2 * k as f64, 1.0).unwrap();
            assert!(f < last);
            last = f;
        }
        assert!(three_level_oscillation_frequency(0.0, 0.1, 1.0).is_err());
        let c = three_level_coupling_rate(0.01, 0.01, 1.0).unwrap();
        assert!((c - libm::sqrt(2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn dispersive() {
        let g = 0.01;
        assert!((dispersive_shift(g, 8.0 * g).unwrap() - g / 8.0).abs() < 1e-18);
        assert!(dispersive_shift(g, -8.0 * g).unwrap() < 0.0);
        assert!(dispersive_shift(g, 0.0).is_err());
        assert!(dispersive_valid(g, 8.0 * g, 2, 1.0));
        assert!(!dispersive_valid(g, g, 2, 1.0));
    }

    #[test]
    fn closed_form_domains_are_total() {
        let forms = [
            ClosedForm::EmptyCavity { beta0: f64::NAN },
            ClosedForm::Oscillator { g: f64::INFINITY, beta0: 0.1 },
            ClosedForm::Oscillator { g: 0.01, beta0: 0.1 },
            ClosedForm::OscillatorShifted { beta0: 0.2 },
        ];
        let valid: alloc::vec::Vec<bool> = forms.iter().map(|f| f.is_valid()).collect();
        assert_eq!(valid, [false, false, false, true]);
        assert!(forms[2].evaluate(1.0).is_err());
        let p = ClosedForm::EmptyCavity { beta0: 0.1 }.evaluate(0.0).unwrap();
        assert_eq!(p.n_mean, Some(0.0));
        assert_eq!(p.mandel_q, None);
    }
}
