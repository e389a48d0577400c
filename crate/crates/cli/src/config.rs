//! Experiment configuration file (TOML).
//!
//! ```toml
//! [detector]
//! kind = "ladder"          # none | ladder | harmonic_oscillator | dicke
//! levels = 3
//! detuning = 0.0           # or omega = ..., or energies = [...]
//! g = 0.01                 # or couplings = [...]
//! coupling_law = "harmonic"
//!
//! [modulation]
//! omega0 = 1.0
//! epsilon = 1e-3
//! resonance = { formula = "two_photon", sign = 1 }   # or r = ...
//!
//! [evolution]
//! t_end = 10.0             # in units of 1/epsilon unless time_unit = "absolute"
//! n_max = 120
//! snapshots = [5.0]
//!
//! [monitor]
//! enabled = true
//! rates = [0.001]
//! trajectories = 1000
//! seed = 7
//!
//! [output]
//! stem = "fig2_n3"
//! ```

use serde::{Deserialize, Serialize};

use dce_core::evolve::{EvolutionConfig, InitialState};
use dce_core::model::{DetectorSpec, FrameTag, Ladder, ModulationSpec, SqueezeForm, MAX_NETWORK_ATOMS};
use dce_core::spectral::resonance_catalog;
use dce_core::{Complex64, Error};

use crate::error::{CliError, CliResult, ConfigIssue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub detector: DetectorSection,
    pub modulation: ModulationSection,
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub monitor: MonitorSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    #[default]
    None,
    Ladder,
    HarmonicOscillator,
    Dicke,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingLaw {
    /// `g_l = g`
    #[default]
    Uniform,
    /// `g_l = g √l`
    Harmonic,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    #[serde(default)]
    pub kind: DetectorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<f64>>,
    /// Transition frequency `Ω` of an equidistant ladder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// `Δ = ω₀ − Ω`, an alternative to `omega`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_law: Option<CouplingLaw>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<usize>,
    /// Simulate every atom of a Dicke network instead of the mapped ladder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SqueezeChoice {
    #[default]
    Approximate,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceSelector {
    /// Catalog formula id: unshifted, two_photon, oscillator, two_level_shifted, dispersive.
    pub formula: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSection {
    pub omega0: f64,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default)]
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonance: Option<ResonanceSelector>,
    #[serde(default)]
    pub squeeze: SqueezeChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameChoice {
    #[default]
    Rwa,
    Lab,
    TwoLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnitChoice {
    #[default]
    EpsilonT,
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeTerm {
    pub level: usize,
    pub photons: usize,
    #[serde(default = "one")]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photons: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<AmplitudeTerm>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    #[serde(default)]
    pub frame: FrameChoice,
    #[serde(default)]
    pub time_unit: TimeUnitChoice,
    pub t_end: f64,
    pub n_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub counter_rotating: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_margin: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_tol: Option<f64>,
}

fn default_samples() -> usize {
    dce_core::evolve::DEFAULT_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSection {
    #[serde(default)]
    pub enabled: bool,
    /// One rate for every adjacent transition, or one per transition.
    #[serde(default)]
    pub rates: Vec<f64>,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default)]
    pub seed: u64,
    /// Step in the evolution time unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

fn default_trajectories() -> usize {
    1000
}

impl Default for MonitorSection {
    fn default() -> Self {
        Self {
            enabled: false,
            rates: Vec::new(),
            trajectories: default_trajectories(),
            seed: 0,
            dt: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeAxis {
    #[default]
    EpsilonT,
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_stem")]
    pub stem: String,
    /// Significant digits of every float written.
    #[serde(default = "default_precision")]
    pub precision: usize,
    #[serde(default = "yes")]
    pub oracle: bool,
    #[serde(default)]
    pub time_axis: TimeAxis,
}

fn default_stem() -> String {
    "run".into()
}

fn default_precision() -> usize {
    17
}

fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            stem: default_stem(),
            precision: default_precision(),
            oracle: true,
            time_axis: TimeAxis::EpsilonT,
        }
    }
}

/// Parses and validates a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> CliResult<ExperimentConfig> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let path = e
            .span()
            .map(|span| {
                let line = text[..span.start].matches('\n').count() + 1;
                format!("line {line}")
            })
            .unwrap_or_default();
        CliError::Config(vec![ConfigIssue::new(path, e.message().trim().to_string())])
    })?;
    let issues = config.validate();
    if issues.is_empty() {
        Ok(config)
    } else {
        Err(CliError::Config(issues))
    }
}

/// Locates a core validation error under `section`.
pub fn locate(section: &str, err: Error) -> CliError {
    match err {
        Error::InvalidParameter { name, reason } => {
            CliError::config(format!("{section}.{name}"), reason)
        }
        other => CliError::physics(section.to_string(), other),
    }
}

fn finite(issues: &mut Vec<ConfigIssue>, path: &str, x: f64) {
    if !x.is_finite() {
        issues.push(ConfigIssue::new(path, "must be finite"));
    }
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// All field-level problems; empty when the configuration is usable.
    pub fn validate(&self) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        let detector = match self.detector_spec() {
            Ok(d) => Some(d),
            Err(CliError::Config(mut more)) => {
                issues.append(&mut more);
                None
            }
            Err(other) => {
                issues.push(ConfigIssue::new("detector", other.to_string()));
                None
            }
        };
        if let Some(det) = &detector {
            match self.modulation_spec(det) {
                Ok(_) => {}
                Err(CliError::Config(mut more)) => issues.append(&mut more),
                Err(other) => issues.push(ConfigIssue::new("modulation", other.to_string())),
            }
        } else if let Err(e) = ModulationSpec::new(self.modulation.omega0, self.modulation.epsilon) {
            if let CliError::Config(mut more) = locate("modulation", e) {
                issues.append(&mut more);
            }
        }
        self.validate_evolution(detector.as_ref(), &mut issues);
        self.validate_monitor(detector.as_ref(), &mut issues);
        self.validate_output(&mut issues);
        issues
    }

    fn validate_evolution(&self, det: Option<&DetectorSpec>, issues: &mut Vec<ConfigIssue>) {
        let e = &self.evolution;
        finite(issues, "evolution.t_end", e.t_end);
        if e.t_end < 0.0 {
            issues.push(ConfigIssue::new("evolution.t_end", "must be non-negative"));
        }
        if e.n_max < 2 {
            issues.push(ConfigIssue::new("evolution.n_max", "photon cutoff must be at least 2"));
        }
        if let Some(dt) = e.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                issues.push(ConfigIssue::new("evolution.dt", "must be positive"));
            }
        }
        if e.samples == 0 {
            issues.push(ConfigIssue::new("evolution.samples", "must be at least 1"));
        }
        for (i, &t) in e.snapshots.iter().enumerate() {
            if !(t >= 0.0 && t <= e.t_end) {
                issues.push(ConfigIssue::new(
                    format!("evolution.snapshots[{i}]"),
                    format!("{t} lies outside [0, t_end = {}]", e.t_end),
                ));
            }
        }
        if e.time_unit == TimeUnitChoice::EpsilonT && self.modulation.epsilon == 0.0 {
            issues.push(ConfigIssue::new(
                "evolution.time_unit",
                "epsilon_t units need a nonzero modulation.epsilon; use time_unit = \"absolute\"",
            ));
        }
        if let Some(tol) = e.truncation_tol {
            if !(tol > 0.0 && tol.is_finite()) {
                issues.push(ConfigIssue::new("evolution.truncation_tol", "must be positive"));
            }
        }
        if e.truncation_margin == Some(0) {
            issues.push(ConfigIssue::new("evolution.truncation_margin", "must be at least 1"));
        }
        let init = &e.initial;
        if init.terms.is_some() && (init.level.is_some() || init.photons.is_some()) {
            issues.push(ConfigIssue::new(
                "evolution.initial",
                "give either level/photons or terms, not both",
            ));
        }
        if let Some(det) = det {
            let levels = det.levels();
            let check = |issues: &mut Vec<ConfigIssue>, path: String, level: usize, photons: usize| {
                if level == 0 || level > levels {
                    issues.push(ConfigIssue::new(path.clone(), format!("level {level} outside 1..={levels}")));
                }
                if photons > e.n_max {
                    issues.push(ConfigIssue::new(path, format!("photon number {photons} exceeds n_max = {}", e.n_max)));
                }
            };
            check(issues, "evolution.initial".into(), init.level.unwrap_or(1), init.photons.unwrap_or(0));
            if let Some(terms) = &init.terms {
                if terms.is_empty() {
                    issues.push(ConfigIssue::new("evolution.initial.terms", "must not be empty"));
                }
                for (i, t) in terms.iter().enumerate() {
                    check(issues, format!("evolution.initial.terms[{i}]"), t.level, t.photons);
                }
            }
            if e.frame == FrameChoice::TwoLevel && levels != 2 {
                issues.push(ConfigIssue::new(
                    "evolution.frame",
                    format!("two_level frame needs a 2-level detector, got {levels} levels"),
                ));
            }
            if self.explicit_network().is_some() && e.frame != FrameChoice::Rwa {
                issues.push(ConfigIssue::new(
                    "evolution.frame",
                    "explicit Dicke networks are simulated in the rwa frame",
                ));
            }
            if e.counter_rotating && e.frame != FrameChoice::Rwa {
                issues.push(ConfigIssue::new(
                    "evolution.counter_rotating",
                    "applies to the rwa frame only",
                ));
            }
        }
    }

    fn validate_monitor(&self, det: Option<&DetectorSpec>, issues: &mut Vec<ConfigIssue>) {
        let m = &self.monitor;
        for (i, &r) in m.rates.iter().enumerate() {
            if !(r >= 0.0 && r.is_finite()) {
                issues.push(ConfigIssue::new(format!("monitor.rates[{i}]"), "rates must be non-negative"));
            }
        }
        if let Some(dt) = m.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                issues.push(ConfigIssue::new("monitor.dt", "must be positive"));
            }
        }
        if !m.enabled {
            return;
        }
        if m.trajectories == 0 {
            issues.push(ConfigIssue::new("monitor.trajectories", "must be at least 1"));
        }
        if let Some(det) = det {
            let transitions = det.levels() - 1;
            if transitions == 0 {
                issues.push(ConfigIssue::new("monitor.enabled", "an empty cavity has no detector to monitor"));
            } else if !(m.rates.len() == 1 || m.rates.len() == transitions) {
                issues.push(ConfigIssue::new(
                    "monitor.rates",
                    format!("give 1 rate or {transitions} per-transition rates, got {}", m.rates.len()),
                ));
            }
            if self.explicit_network().is_some() {
                issues.push(ConfigIssue::new("monitor.enabled", "monitoring uses the mapped ladder; set detector.explicit = false"));
            }
        }
    }

    fn validate_output(&self, issues: &mut Vec<ConfigIssue>) {
        let o = &self.output;
        if o.stem.is_empty() || o.stem.contains(['/', '\\']) || o.stem.starts_with('.') {
            issues.push(ConfigIssue::new("output.stem", "must be a plain, non-empty file name stem"));
        }
        if !(1..=17).contains(&o.precision) {
            issues.push(ConfigIssue::new("output.precision", "significant digits must lie in 1..=17"));
        }
    }

    /// Atom count when the Dicke network is simulated explicitly.
    pub fn explicit_network(&self) -> Option<usize> {
        match (self.detector.kind, self.detector.explicit) {
            (DetectorKind::Dicke, Some(true)) => self.detector.atoms,
            _ => None,
        }
    }

    fn transition_frequency(&self, issues: &mut Vec<ConfigIssue>) -> f64 {
        let d = &self.detector;
        match (d.omega, d.detuning) {
            (Some(_), Some(_)) => {
                issues.push(ConfigIssue::new("detector.detuning", "give either omega or detuning, not both"));
                self.modulation.omega0
            }
            (Some(w), None) => {
                finite(issues, "detector.omega", w);
                w
            }
            (None, Some(delta)) => {
                finite(issues, "detector.detuning", delta);
                self.modulation.omega0 - delta
            }
            (None, None) => self.modulation.omega0,
        }
    }

    fn unused(&self, issues: &mut Vec<ConfigIssue>, allowed: &[&str]) {
        let d = &self.detector;
        let present = [
            ("levels", d.levels.is_some()),
            ("energies", d.energies.is_some()),
            ("omega", d.omega.is_some()),
            ("detuning", d.detuning.is_some()),
            ("g", d.g.is_some()),
            ("couplings", d.couplings.is_some()),
            ("coupling_law", d.coupling_law.is_some()),
            ("atoms", d.atoms.is_some()),
            ("explicit", d.explicit.is_some()),
        ];
        for (name, set) in present {
            if set && !allowed.contains(&name) {
                issues.push(ConfigIssue::new(
                    format!("detector.{name}"),
                    format!("not used by detector kind {:?}", d.kind),
                ));
            }
        }
    }

    fn required<T: Copy>(issues: &mut Vec<ConfigIssue>, name: &str, value: Option<T>) -> Option<T> {
        if value.is_none() {
            issues.push(ConfigIssue::new(format!("detector.{name}"), "missing required field"));
        }
        value
    }

    /// Detector description; Dicke networks are returned as networks.
    pub fn detector_spec(&self) -> CliResult<DetectorSpec> {
        let d = &self.detector;
        let mut issues = Vec::new();
        let spec = match d.kind {
            DetectorKind::None => {
                self.unused(&mut issues, &[]);
                Some(DetectorSpec::Empty)
            }
            DetectorKind::HarmonicOscillator => {
                self.unused(&mut issues, &["levels", "omega", "detuning", "g"]);
                let omega = self.transition_frequency(&mut issues);
                let g = Self::required(&mut issues, "g", d.g);
                let levels = Self::required(&mut issues, "levels", d.levels);
                if matches!(levels, Some(l) if l < 2) {
                    issues.push(ConfigIssue::new("detector.levels", "oscillator truncation needs at least 2 levels"));
                }
                match (g, levels) {
                    (Some(g), Some(levels)) => {
                        finite(&mut issues, "detector.g", g);
                        Some(DetectorSpec::HarmonicOscillator { omega, g, levels })
                    }
                    _ => None,
                }
            }
            DetectorKind::Dicke => {
                self.unused(&mut issues, &["atoms", "omega", "detuning", "g", "explicit"]);
                let omega = self.transition_frequency(&mut issues);
                let g = Self::required(&mut issues, "g", d.g);
                let atoms = Self::required(&mut issues, "atoms", d.atoms);
                if atoms == Some(0) {
                    issues.push(ConfigIssue::new("detector.atoms", "must be at least 1"));
                }
                if d.explicit == Some(true) && atoms.is_some_and(|a| a > MAX_NETWORK_ATOMS) {
                    issues.push(ConfigIssue::new(
                        "detector.atoms",
                        format!("explicit networks support at most {MAX_NETWORK_ATOMS} atoms"),
                    ));
                }
                match (g, atoms) {
                    (Some(g), Some(atoms)) if atoms > 0 => Some(DetectorSpec::DickeNetwork { atoms, omega, g }),
                    _ => None,
                }
            }
            DetectorKind::Ladder => {
                self.unused(
                    &mut issues,
                    &["levels", "energies", "omega", "detuning", "g", "couplings", "coupling_law"],
                );
                self.ladder(&mut issues).map(DetectorSpec::Ladder)
            }
        };
        match spec {
            Some(s) if issues.is_empty() => Ok(s),
            _ => Err(CliError::Config(issues)),
        }
    }

    fn ladder(&self, issues: &mut Vec<ConfigIssue>) -> Option<Ladder> {
        let d = &self.detector;
        let levels = match (d.levels, &d.energies) {
            (Some(l), Some(e)) if l != e.len() => {
                issues.push(ConfigIssue::new(
                    "detector.energies",
                    format!("{} energies given for {l} levels", e.len()),
                ));
                return None;
            }
            (Some(l), _) => l,
            (None, Some(e)) => e.len(),
            (None, None) => {
                issues.push(ConfigIssue::new("detector.levels", "missing required field"));
                return None;
            }
        };
        if levels < 2 {
            issues.push(ConfigIssue::new("detector.levels", "a ladder needs at least 2 levels; use kind = \"none\""));
            return None;
        }
        let energies = match &d.energies {
            Some(e) => {
                if d.omega.is_some() || d.detuning.is_some() {
                    issues.push(ConfigIssue::new("detector.energies", "give energies or omega/detuning, not both"));
                }
                e.clone()
            }
            None => {
                let omega = self.transition_frequency(issues);
                (0..levels).map(|j| omega * j as f64).collect()
            }
        };
        let couplings = match (&d.couplings, d.g) {
            (Some(_), Some(_)) => {
                issues.push(ConfigIssue::new("detector.couplings", "give couplings or g, not both"));
                return None;
            }
            (Some(c), None) => {
                if d.coupling_law.is_some() {
                    issues.push(ConfigIssue::new("detector.coupling_law", "only applies together with g"));
                }
                c.clone()
            }
            (None, Some(g)) => match d.coupling_law.unwrap_or_default() {
                CouplingLaw::Uniform => vec![g; levels - 1],
                CouplingLaw::Harmonic => (1..levels).map(|l| g * (l as f64).sqrt()).collect(),
            },
            (None, None) => {
                issues.push(ConfigIssue::new("detector.g", "missing required field (or couplings)"));
                return None;
            }
        };
        match Ladder::new(energies, couplings) {
            Ok(l) => Some(l),
            Err(Error::InvalidParameter { name, reason }) => {
                issues.push(ConfigIssue::new(format!("detector.{name}"), reason));
                None
            }
            Err(e) => {
                issues.push(ConfigIssue::new("detector", e.to_string()));
                None
            }
        }
    }

    /// Modulation with the shift resolved from `r` or the resonance catalog.
    pub fn modulation_spec(&self, det: &DetectorSpec) -> CliResult<ModulationSpec> {
        let m = &self.modulation;
        let squeeze = match m.squeeze {
            SqueezeChoice::Approximate => SqueezeForm::Approximate,
            SqueezeChoice::Exact => SqueezeForm::Exact,
        };
        let base = ModulationSpec::new(m.omega0, m.epsilon)
            .map_err(|e| locate("modulation", e))?
            .with_correction(m.y)
            .with_squeeze(squeeze);
        let r = match (m.r, &m.resonance) {
            (Some(_), Some(_)) => {
                return Err(CliError::config("modulation.resonance", "give either r or resonance, not both"))
            }
            (Some(r), None) => r,
            (None, None) => 0.0,
            (None, Some(sel)) => {
                let catalog = resonance_catalog(det, &base).map_err(|e| locate("modulation.resonance", e))?;
                let candidates: Vec<_> = catalog
                    .iter()
                    .filter(|e| e.formula.id() == sel.formula)
                    .collect();
                if candidates.is_empty() {
                    let known: Vec<&str> = catalog.iter().map(|e| e.formula.id()).collect();
                    return Err(CliError::config(
                        "modulation.resonance.formula",
                        format!("`{}` is not catalogued for this detector (available: {})", sel.formula, known.join(", ")),
                    ));
                }
                let chosen = match sel.sign {
                    Some(s) => candidates.iter().find(|e| e.sign == s),
                    None if candidates.len() == 1 => candidates.first(),
                    None => {
                        return Err(CliError::config(
                            "modulation.resonance.sign",
                            "this formula has two branches; set sign = 1 or -1",
                        ))
                    }
                };
                match chosen {
                    Some(e) => e.r,
                    None => {
                        return Err(CliError::config(
                            "modulation.resonance.sign",
                            format!("no branch with sign {:?}", sel.sign),
                        ))
                    }
                }
            }
        };
        let spec = base.with_shift(r);
        spec.validate().map_err(|e| locate("modulation", e))?;
        Ok(spec)
    }

    /// Factor converting configured times to absolute time.
    pub fn time_scale(&self) -> f64 {
        match self.evolution.time_unit {
            TimeUnitChoice::EpsilonT => 1.0 / self.modulation.epsilon.abs(),
            TimeUnitChoice::Absolute => 1.0,
        }
    }

    pub fn frame(&self) -> FrameTag {
        match self.evolution.frame {
            FrameChoice::Rwa => FrameTag::RwaInteraction,
            FrameChoice::Lab => FrameTag::Lab,
            FrameChoice::TwoLevel => FrameTag::TwoLevelRotated,
        }
    }

    pub fn initial_state(&self) -> InitialState {
        let init = &self.evolution.initial;
        match &init.terms {
            Some(terms) => InitialState::Superposition(
                terms
                    .iter()
                    .map(|t| (t.level, t.photons, Complex64::new(t.re, t.im)))
                    .collect(),
            ),
            None => match (init.level.unwrap_or(1), init.photons.unwrap_or(0)) {
                (1, 0) => InitialState::Ground,
                (level, photons) => InitialState::Basis { level, photons },
            },
        }
    }

    /// Evolution settings in absolute time.
    pub fn evolution_config(&self, modulation: &ModulationSpec) -> EvolutionConfig {
        let e = &self.evolution;
        let scale = self.time_scale();
        let mut cfg = EvolutionConfig::new(self.frame(), e.t_end * scale);
        cfg.dt = e.dt.map(|dt| dt * scale);
        cfg.samples = e.samples;
        cfg.snapshot_times = e.snapshots.iter().map(|t| t * scale).collect();
        cfg.counter_rotating = e.counter_rotating;
        cfg.initial = self.initial_state();
        cfg.epsilon = modulation.epsilon;
        if let Some(m) = e.truncation_margin {
            cfg.truncation_margin = m;
        }
        if let Some(t) = e.truncation_tol {
            cfg.truncation_tol = t;
        }
        cfg
    }
}
