//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dce_core::evolve::{default_dt, frame_hamiltonian, run_experiment, unitary_evolve_with, EvolutionConfig};
use dce_core::fock::{HilbertSpace, ObservableSeries, PhotonSnapshot};
use dce_core::model::{
    dicke_level_groups, dicke_network_hamiltonian, embed_dicke_state, DetectorSpec, FrameTag,
    Hamiltonian, ModulationSpec,
};
use dce_core::monitor::{default_jump_model, transition_jump_model, JumpModel, TrajectoryConfig};
use dce_core::oracle::ClosedForm;
use dce_core::spectral::{dressed_coupling_matrix, dressed_spectrum, resonance_catalog, RESONANCE_WINDOW};

use crate::config::{parse_config, ExperimentConfig};
use crate::ensemble::{run_ensemble, with_threads, EnsembleResult};
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;
use crate::output::{
    catalog_csv, catalog_table, couplings_csv, series_csv, snapshot_csv, snapshot_path,
    spectrum_csv, states_csv, write_bytes, NumberFormat, SeriesFormat, Table,
};

/// Largest factor `dt · max⟨R⟩` chosen when the monitor step is defaulted.
pub const MONITOR_DT_FACTOR: f64 = 0.05;

pub const DEFAULT_M_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Run,
    Catalog,
    Spectrum { m_cap: usize },
    Trajectory,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Catalog => "catalog",
            Command::Spectrum { .. } => "spectrum",
            Command::Trajectory => "trajectory",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Files written and text for standard output.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub stdout: String,
}

/// Resolved physical inputs of a configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub detector: DetectorSpec,
    pub modulation: ModulationSpec,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> CliResult<Self> {
        let detector = config.detector_spec()?;
        let modulation = config.modulation_spec(&detector)?;
        Ok(Self {
            config,
            detector,
            modulation,
        })
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        Self::new(parse_config(text)?)
    }

    pub fn evolution(&self) -> EvolutionConfig {
        self.config.evolution_config(&self.modulation)
    }

    pub fn levels(&self) -> usize {
        self.detector.levels()
    }

    fn number(&self) -> NumberFormat {
        NumberFormat::new(self.config.output.precision)
    }

    fn series_format(&self) -> SeriesFormat {
        SeriesFormat {
            number: self.number(),
            time_axis: self.config.output.time_axis,
        }
    }

    /// Closed form overlaid on the series, if one applies.
    pub fn oracle(&self) -> Option<ClosedForm> {
        let evo = &self.config.evolution;
        let vacuum = evo.initial.terms.is_none()
            && evo.initial.level.unwrap_or(1) == 1
            && evo.initial.photons.unwrap_or(0) == 0;
        if !self.config.output.oracle || !vacuum || evo.counter_rotating {
            return None;
        }
        ClosedForm::for_experiment(&self.detector, &self.modulation)
    }

    /// Deterministic evolution of the configured experiment.
    pub fn simulate(&self) -> CliResult<ObservableSeries> {
        let cfg = self.evolution();
        let physics = |e| CliError::physics("evolution", e);
        match self.config.explicit_network() {
            None => run_experiment(&self.detector, &self.modulation, self.config.evolution.n_max, &cfg)
                .map_err(physics),
            Some(atoms) => self.simulate_network(atoms, cfg).map_err(physics),
        }
    }

    fn simulate_network(&self, atoms: usize, mut cfg: EvolutionConfig) -> dce_core::Result<ObservableSeries> {
        let n_max = self.config.evolution.n_max;
        let space = HilbertSpace::new(1 << atoms, n_max)?;
        let h = Hamiltonian::time_independent(
            FrameTag::RwaInteraction,
            dicke_network_hamiltonian(&self.detector, &self.modulation, space)?,
        );
        let ladder_state = cfg.initial.build(HilbertSpace::new(atoms + 1, n_max)?)?;
        let initial = embed_dicke_state(atoms, &ladder_state, space)?;
        if cfg.dt.is_none() {
            cfg.dt = Some(default_dt(&self.detector, &self.modulation, &h)?);
        }
        let groups = dicke_level_groups(atoms);
        Ok(unitary_evolve_with(&h, initial, &cfg, |m| m.regroup_levels(&groups))?.0)
    }

    /// Jump operators from the monitor section.
    pub fn jump_model(&self, space: HilbertSpace) -> CliResult<JumpModel> {
        let rates = &self.config.monitor.rates;
        let model = if rates.len() == 1 {
            default_jump_model(&self.detector, space, rates[0])
        } else {
            transition_jump_model(space, rates)
        };
        model.map_err(|e| crate::config::locate("monitor", e))
    }

    /// Monte Carlo ensemble; `seed` overrides the configured one.
    pub fn ensemble(&self, seed: Option<u64>, threads: Option<usize>) -> CliResult<EnsembleResult> {
        let physics = |e| CliError::physics("trajectory", e);
        let evo = self.evolution();
        let space = HilbertSpace::new(self.levels(), self.config.evolution.n_max).map_err(physics)?;
        let h = frame_hamiltonian(&self.detector, &self.modulation, space, &evo).map_err(physics)?;
        let jump = self.jump_model(space)?;
        let dt = match self.config.monitor.dt {
            Some(dt) => dt * self.config.time_scale(),
            None => {
                let base = default_dt(&self.detector, &self.modulation, &h).map_err(physics)?;
                let max_rate = jump.max_rate();
                if max_rate > 0.0 {
                    base.min(MONITOR_DT_FACTOR / max_rate)
                } else {
                    base
                }
            }
        };
        let mut tcfg = TrajectoryConfig::new(evo.t_end, dt, evo.samples);
        tcfg.snapshot_times = evo.snapshot_times.clone();
        let initial = evo.initial.build(space).map_err(physics)?;
        let seed = seed.unwrap_or(self.config.monitor.seed);
        let count = self.config.monitor.trajectories;
        with_threads(threads, || run_ensemble(&h, &jump, &initial, &tcfg, seed, count))
            .map_err(|e| CliError::config("--threads", e.to_string()))?
    }
}

fn read_config(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

struct Writer<'a> {
    dir: &'a Path,
    stem: String,
    manifest: Manifest,
    outputs: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(dir: &'a Path, experiment: &Experiment, command: &Command, text: &str) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let stem = experiment.config.output.stem.clone();
        let mut manifest = Manifest::new(command.name(), text);
        let config_copy = format!("{stem}.config.toml");
        write_bytes(&dir.join(&config_copy), text.as_bytes())?;
        manifest.push("config_file", &config_copy);
        Ok(Self {
            dir,
            stem,
            manifest,
            outputs: vec![dir.join(config_copy)],
        })
    }

    fn file(&mut self, suffix: &str, bytes: &[u8]) -> CliResult<()> {
        let name = format!("{}{suffix}", self.stem);
        self.put(name, bytes)
    }

    fn put(&mut self, name: String, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(&name);
        write_bytes(&path, bytes)?;
        self.manifest.push("output", name);
        self.outputs.push(path);
        Ok(())
    }

    fn finish(mut self, started: Instant, stdout: String) -> CliResult<Outcome> {
        self.manifest
            .push("wall_time_s", format!("{:.6}", started.elapsed().as_secs_f64()));
        let path = self.dir.join(format!("{}.manifest", self.stem));
        self.manifest.write(&path)?;
        self.outputs.push(path);
        Ok(Outcome {
            outputs: self.outputs,
            stdout,
        })
    }
}

fn write_snapshots(
    writer: &mut Writer<'_>,
    series: &ObservableSeries,
    snapshots: &[PhotonSnapshot],
    number: NumberFormat,
) -> CliResult<()> {
    for (k, snap) in snapshots.iter().enumerate() {
        let name = snapshot_path(Path::new(""), &writer.stem, k)
            .to_string_lossy()
            .into_owned();
        writer.put(name, &snapshot_csv(&snap.distribution, number))?;
        writer
            .manifest
            .push("snapshot", format!("{k}:{}", number.fmt(series.epsilon_t(snap.time))));
    }
    Ok(())
}

/// Executes `command` on the configuration file at `config_path`.
pub fn execute(command: &Command, config_path: &Path, opts: &Options) -> CliResult<Outcome> {
    let text = read_config(config_path)?;
    execute_text(command, &text, opts)
}

/// As [`execute`], with the configuration given as text.
pub fn execute_text(command: &Command, text: &str, opts: &Options) -> CliResult<Outcome> {
    let started = Instant::now();
    let experiment = Experiment::parse(text)?;
    let mut writer = Writer::new(&opts.out, &experiment, command, text)?;
    writer.manifest.push(
        "threads",
        opts.threads.map_or("default".to_string(), |t| t.to_string()),
    );
    let number = experiment.number();
    let mut stdout = String::new();
    match command {
        Command::Run => {
            writer.manifest.push("seed", "none");
            let series = experiment.simulate()?;
            let oracle = experiment.oracle();
            if let Some(form) = &oracle {
                writer.manifest.push("oracle", form.id());
            }
            let csv = series_csv(&series, experiment.levels(), oracle.as_ref(), experiment.series_format())?;
            writer.file(".csv", &csv)?;
            write_snapshots(&mut writer, &series, &series.snapshots, number)?;
        }
        Command::Catalog => {
            let entries = resonance_catalog(&experiment.detector, &experiment.modulation)
                .map_err(|e| CliError::physics("catalog", e))?;
            writer.file("_catalog.csv", &catalog_csv(&entries, number))?;
            stdout = catalog_table(&entries);
        }
        Command::Spectrum { m_cap } => {
            writer.manifest.push("m_cap", m_cap);
            let physics = |e| CliError::physics("spectrum", e);
            let states = dressed_spectrum(&experiment.detector, experiment.modulation.omega0, *m_cap)
                .map_err(physics)?;
            writer.file("_spectrum.csv", &spectrum_csv(&states, number))?;
            writer.file("_states.csv", &states_csv(&states, number))?;
            let space = HilbertSpace::new(experiment.levels(), *m_cap).map_err(physics)?;
            let couplings = dressed_coupling_matrix(
                &experiment.detector,
                &experiment.modulation,
                space,
                *m_cap,
                RESONANCE_WINDOW,
            )
            .map_err(physics)?;
            writer.file("_couplings.csv", &couplings_csv(&couplings, number))?;
            stdout = format!("{} dressed states up to m = {m_cap}\n", states.len());
        }
        Command::Trajectory => {
            if !experiment.config.monitor.enabled {
                return Err(CliError::config("monitor.enabled", "trajectory needs enabled = true"));
            }
            let result = experiment.ensemble(opts.seed, opts.threads)?;
            writer.manifest.push("seed", result.seed);
            writer.manifest.push("trajectories", result.accumulator.count());
            let acc = &result.accumulator;
            let series = acc.series(experiment.config.frame(), experiment.modulation.epsilon);
            let format = experiment.series_format();
            writer.file(".csv", &series_csv(&series, experiment.levels(), None, format)?)?;

            let time = |t: f64| format.time_value(&series, t);
            let mut header = vec![format.time_header().to_string(), "n_mean_se".to_string()];
            header.extend((1..=experiment.levels()).map(|j| format!("P_{j}_se")));
            let mut se = Table::new(&header);
            for (k, &t) in acc.times().iter().enumerate() {
                let mut row = vec![number.fmt(time(t)), number.fmt(acc.n_mean_standard_error(k))];
                row.extend(
                    (1..=experiment.levels()).map(|j| number.fmt(acc.population_standard_error(k, j))),
                );
                se.row(&row);
            }
            writer.file("_stderr.csv", &se.into_bytes())?;

            let mut clicks = Table::new(&["trajectory", "stream", "click", format.time_header(), "transition"]);
            for log in &result.clicks {
                for (i, (&t, &c)) in log.times.iter().zip(&log.channels).enumerate() {
                    clicks.row(&[
                        log.trajectory.to_string(),
                        log.stream.to_string(),
                        i.to_string(),
                        number.fmt(time(t)),
                        (c + 1).to_string(),
                    ]);
                }
            }
            writer.file("_clicks.csv", &clicks.into_bytes())?;

            let snapshots: Vec<PhotonSnapshot> = result
                .snapshots
                .iter()
                .map(|(t, p)| PhotonSnapshot::new(*t, p))
                .collect();
            write_snapshots(&mut writer, &series, &snapshots, number)?;
            let total: usize = result.clicks.iter().map(|c| c.times.len()).sum();
            stdout = format!("{} trajectories, {total} clicks\n", acc.count());
        }
    }
    writer.finish(started, stdout)
}
