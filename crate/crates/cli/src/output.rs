//! CSV writers. Every file uses LF line endings and a fixed number of
//! significant digits, so identical inputs give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use dce_core::model::FrameTag;
use dce_core::fock::ObservableSeries;
use dce_core::oracle::ClosedForm;
use dce_core::spectral::{DressedCouplings, DressedState, Regime, ResonanceEntry};

use crate::config::TimeAxis;
use crate::error::{CliError, CliResult};

/// Float formatting shared by every writer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NumberFormat {
    digits: usize,
}

impl NumberFormat {
    /// `digits` significant digits, clamped to `1..=17`.
    pub fn new(digits: usize) -> Self {
        Self {
            digits: digits.clamp(1, 17),
        }
    }

    pub fn fmt(&self, x: f64) -> String {
        if x.is_finite() {
            format!("{:.*e}", self.digits - 1, x)
        } else if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    }

    pub fn fmt_opt(&self, x: Option<f64>) -> String {
        x.map(|v| self.fmt(v)).unwrap_or_default()
    }
}

impl Default for NumberFormat {
    fn default() -> Self {
        Self::new(17)
    }
}

/// Rows collected in memory and written with a single call.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer
            .write_record(header.iter().map(|h| h.as_ref()))
            .expect("in-memory write");
        Self { writer }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        self.writer
            .write_record(cells.iter().map(|c| c.as_ref()))
            .expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }

    pub fn write(self, path: &Path) -> CliResult<()> {
        write_bytes(path, &self.into_bytes())
    }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OracleColumn {
    NMean,
    MandelQ,
    XvarPlus,
    XvarMinus,
}

impl OracleColumn {
    fn name(self) -> &'static str {
        match self {
            Self::NMean => "n_mean_oracle",
            Self::MandelQ => "mandel_q_oracle",
            Self::XvarPlus => "xvar_plus_oracle",
            Self::XvarMinus => "xvar_minus_oracle",
        }
    }
}

fn oracle_columns(form: &ClosedForm, frame: FrameTag) -> Vec<OracleColumn> {
    use OracleColumn::*;
    let mut cols = match form {
        ClosedForm::EmptyCavity { .. } => vec![NMean, MandelQ, XvarPlus, XvarMinus],
        ClosedForm::Oscillator { .. } => vec![NMean, XvarPlus, XvarMinus],
        ClosedForm::OscillatorShifted { .. } => vec![NMean],
    };
    // Closed-form quadratures refer to the interaction frame.
    if frame != FrameTag::RwaInteraction {
        cols.retain(|c| !matches!(c, XvarPlus | XvarMinus));
    }
    cols
}

/// Settings shared by the series writers.
#[derive(Debug, Clone, Copy)]
pub struct SeriesFormat {
    pub number: NumberFormat,
    pub time_axis: TimeAxis,
}

impl SeriesFormat {
    pub fn time_value(&self, series: &ObservableSeries, t: f64) -> f64 {
        match self.time_axis {
            TimeAxis::EpsilonT => series.epsilon_t(t),
            TimeAxis::Absolute => t,
        }
    }

    fn time(&self, series: &ObservableSeries, t: f64) -> String {
        self.number.fmt(self.time_value(series, t))
    }

    pub fn time_header(&self) -> &'static str {
        match self.time_axis {
            TimeAxis::EpsilonT => "t_dimensionless",
            TimeAxis::Absolute => "t",
        }
    }
}

impl Default for SeriesFormat {
    fn default() -> Self {
        Self {
            number: NumberFormat::default(),
            time_axis: TimeAxis::EpsilonT,
        }
    }
}

/// Observable series as CSV, with `_oracle` columns when `oracle` is given.
pub fn series_csv(
    series: &ObservableSeries,
    levels: usize,
    oracle: Option<&ClosedForm>,
    format: SeriesFormat,
) -> CliResult<Vec<u8>> {
    let oracle_cols = oracle.map(|f| oracle_columns(f, series.frame)).unwrap_or_default();
    let mut header: Vec<String> = [format.time_header(), "n_mean", "mandel_q", "xvar_plus", "xvar_minus"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=levels).map(|j| format!("P_{j}")));
    header.extend(oracle_cols.iter().map(|c| c.name().to_string()));
    let mut table = Table::new(&header);
    let num = format.number;
    for s in &series.samples {
        let mut row = vec![
            format.time(series, s.time),
            num.fmt(s.n_mean),
            num.fmt_opt(s.mandel_q),
            num.fmt(s.xvar_plus),
            num.fmt(s.xvar_minus),
        ];
        row.extend(s.level_populations.iter().map(|p| num.fmt(*p)));
        if let Some(form) = oracle {
            let point = form
                .evaluate(s.time)
                .map_err(|e| CliError::physics("oracle", e))?;
            for c in &oracle_cols {
                row.push(num.fmt_opt(match c {
                    OracleColumn::NMean => point.n_mean,
                    OracleColumn::MandelQ => point.mandel_q,
                    OracleColumn::XvarPlus => point.xvar_plus,
                    OracleColumn::XvarMinus => point.xvar_minus,
                }));
            }
        }
        table.row(&row);
    }
    Ok(table.into_bytes())
}

/// Photon distribution of snapshot `k` as `n,p` rows.
pub fn snapshot_csv(distribution: &[f64], number: NumberFormat) -> Vec<u8> {
    let mut table = Table::new(&["n", "p"]);
    for (n, p) in distribution.iter().enumerate() {
        table.row(&[n.to_string(), number.fmt(*p)]);
    }
    table.into_bytes()
}

pub fn snapshot_path(dir: &Path, stem: &str, k: usize) -> PathBuf {
    dir.join(format!("{stem}_pn_{k}.csv"))
}

fn regime_cells(regime: &Regime, number: NumberFormat) -> [String; 2] {
    match regime {
        Regime::Unbounded => ["unbounded".into(), String::new()],
        Regime::Bounded(n) => ["bounded".into(), n.to_string()],
        Regime::AtLeastPhotons(n) => ["at_least_photons".into(), n.to_string()],
        Regime::TwoStateOscillation { frequency } => {
            ["two_state_oscillation".into(), number.fmt(*frequency)]
        }
        Regime::Dispersive { valid } => ["dispersive".into(), valid.to_string()],
    }
}

/// Catalog rows: `formula,sign,r,two_r,regime,regime_value`.
pub fn catalog_csv(entries: &[ResonanceEntry], number: NumberFormat) -> Vec<u8> {
    let mut table = Table::new(&["formula", "sign", "r", "two_r", "regime", "regime_value"]);
    for e in entries {
        let [regime, value] = regime_cells(&e.regime, number);
        table.row(&[
            e.formula.id().to_string(),
            e.sign.to_string(),
            number.fmt(e.r),
            number.fmt(2.0 * e.r),
            regime,
            value,
        ]);
    }
    table.into_bytes()
}

/// Human-readable catalog for the terminal.
pub fn catalog_table(entries: &[ResonanceEntry]) -> String {
    let mut out = format!(
        "{:<18} {:>4} {:>24} {:>24}  {}\n",
        "formula", "sign", "r", "2r", "regime"
    );
    for e in entries {
        let regime = match e.regime {
            Regime::Unbounded => "unbounded".to_string(),
            Regime::Bounded(n) => format!("at most {n} photons"),
            Regime::AtLeastPhotons(n) => format!("at least {n} photons"),
            Regime::TwoStateOscillation { frequency } => {
                format!("two-state oscillation, frequency {frequency:.6e}")
            }
            Regime::Dispersive { valid } => {
                format!("dispersive ({})", if valid { "valid" } else { "outside validity" })
            }
        };
        out.push_str(&format!(
            "{:<18} {:>4} {:>24.16e} {:>24.16e}  {}\n",
            e.formula.id(),
            e.sign,
            e.r,
            2.0 * e.r,
            regime
        ));
    }
    out
}

/// Dressed eigenvalues: `m,k,eigenvalue`.
pub fn spectrum_csv(states: &[DressedState], number: NumberFormat) -> Vec<u8> {
    let mut table = Table::new(&["m", "k", "eigenvalue"]);
    for s in states {
        table.row(&[s.m.to_string(), s.k.to_string(), number.fmt(s.eigenvalue)]);
    }
    table.into_bytes()
}

/// Dressed eigenvector components: `m,k,level,photons,amplitude`.
pub fn states_csv(states: &[DressedState], number: NumberFormat) -> Vec<u8> {
    let mut table = Table::new(&["m", "k", "level", "photons", "amplitude"]);
    for s in states {
        for &(level, photons, amp) in &s.components {
            table.row(&[
                s.m.to_string(),
                s.k.to_string(),
                level.to_string(),
                photons.to_string(),
                number.fmt(amp),
            ]);
        }
    }
    table.into_bytes()
}

/// Pump matrix elements between dressed states.
pub fn couplings_csv(table_in: &DressedCouplings, number: NumberFormat) -> Vec<u8> {
    let mut table = Table::new(&[
        "m_from", "k_from", "m_to", "k_to", "element", "gap", "resonant",
    ]);
    for c in &table_in.couplings {
        let (a, b) = (&table_in.states[c.row], &table_in.states[c.col]);
        table.row(&[
            a.m.to_string(),
            a.k.to_string(),
            b.m.to_string(),
            b.k.to_string(),
            number.fmt(c.element),
            number.fmt(c.gap),
            c.resonant.to_string(),
        ]);
    }
    table.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_requested_digits() {
        let f = NumberFormat::default();
        assert_eq!(f.fmt(0.1), "1.0000000000000001e-1");
        assert_eq!(f.fmt(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(NumberFormat::new(3).fmt(-1234.5), "-1.23e3");
        assert_eq!(NumberFormat::new(0).fmt(7.0), "7e0");
        assert_eq!(f.fmt(f64::NAN), "nan");
        assert_eq!(f.fmt_opt(None), "");
    }

    #[test]
    fn tables_use_lf_line_endings() {
        let mut t = Table::new(&["a", "b"]);
        t.row(&["1", ""]);
        assert_eq!(t.into_bytes(), b"a,b\n1,\n");
    }
}
