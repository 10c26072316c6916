//! Scenario files and the runners behind the command-line tool.
//!
//! A scenario is one JSON document. Every field is optional; an empty object
//! reproduces the default device, ledgers and variation profile.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{margin_report, run_detection_mc_with, workload_report, MonteCarloConfig};
use crate::automaton::{
    map_fsa_to_cells, run_krinsky, simulate_krinsky_rules, Action, EncodingMode, FsaSpec,
    KrinskyEnvironment, KrinskyRules, RewriteMode,
};
use crate::controller::Controller;
use crate::crossbar::{AdcConfig, Crossbar, CrossbarConfig};
use crate::device::{PhysicalModelParams, StateId, StateTable, VariationProfile};
use crate::error::{Error, Result};
use crate::export;
use crate::ledger::{EnergyLedger, LatencyLedger};
use crate::parallel::Execution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub crossbar: CrossbarConfig,
    pub state_table: StateTable,
    pub physical_params: PhysicalModelParams,
    pub variation: VariationProfile,
    pub energy: EnergyLedger,
    pub latency: LatencyLedger,
    /// Replaces the geometric-midpoint ADC thresholds (µA, descending).
    pub adc_thresholds: Option<Vec<f64>>,
    pub workload: WorkloadConfig,
    pub fsa: Option<FsaConfig>,
    pub krinsky: Option<KrinskyConfig>,
    pub montecarlo: MonteCarloSection,
    pub output_dir: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 1,
            crossbar: CrossbarConfig::default(),
            state_table: StateTable::default(),
            physical_params: PhysicalModelParams::default(),
            variation: VariationProfile::default(),
            energy: EnergyLedger::default(),
            latency: LatencyLedger::default(),
            adc_thresholds: None,
            workload: WorkloadConfig::default(),
            fsa: None,
            krinsky: None,
            montecarlo: MonteCarloSection::default(),
            output_dir: None,
        }
    }
}

/// Explicit list of commanded transitions on one cell.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadConfig {
    pub cell: (usize, usize),
    pub transitions: Vec<(StateId, StateId)>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FsaConfig {
    /// Text transition table; relative paths resolve against the scenario file.
    pub path: Option<PathBuf>,
    /// Inline `(state, symbol, next)` triples, used when `path` is absent.
    pub transitions: Vec<(usize, String, usize)>,
    pub states: Option<usize>,
    pub initial: usize,
    pub inputs: Vec<String>,
    pub encoding: EncodingMode,
    pub rewrite: RewriteMode,
}

impl FsaConfig {
    pub fn spec(&self) -> Result<FsaSpec> {
        match &self.path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                FsaSpec::parse(&text)
            }
            None => {
                if self.transitions.is_empty() {
                    return Err(Error::Config(
                        "fsa needs a path or inline transitions".into(),
                    ));
                }
                let n = self.states.unwrap_or_else(|| {
                    self.transitions
                        .iter()
                        .map(|(s, _, t)| s.max(t) + 1)
                        .max()
                        .unwrap_or(0)
                });
                FsaSpec::from_triples(n, self.initial, &self.transitions)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrinskyConfig {
    pub reward_a: Option<f64>,
    pub reward_b: Option<f64>,
    pub start: StateId,
    pub steps: usize,
    pub cell: (usize, usize),
    pub rules: KrinskyRules,
}

impl Default for KrinskyConfig {
    fn default() -> Self {
        KrinskyConfig {
            reward_a: None,
            reward_b: None,
            start: StateId::S1,
            steps: 10_000,
            cell: (0, 0),
            rules: KrinskyRules::default(),
        }
    }
}

impl KrinskyConfig {
    pub fn environment(&self) -> Result<KrinskyEnvironment> {
        let missing = |name: &str| Error::Config(format!("krinsky.{name} is not set"));
        let env = KrinskyEnvironment {
            reward_a: self.reward_a.ok_or_else(|| missing("reward_a"))?,
            reward_b: self.reward_b.ok_or_else(|| missing("reward_b"))?,
        };
        env.validate()?;
        Ok(env)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSection {
    pub trials: usize,
    pub states: Vec<StateId>,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        MonteCarloSection {
            trials: 10_000,
            states: StateId::RESTING.to_vec(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a scenario file and makes any FSA path absolute.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(fsa) = cfg.fsa.as_mut() {
            if let Some(p) = fsa.path.as_mut() {
                if p.is_relative() {
                    let base = path.parent().unwrap_or(Path::new("."));
                    *p = base.join(&*p);
                }
                *p = p
                    .canonicalize()
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.crossbar.validate()?;
        self.state_table.validate()?;
        self.variation.validate()?;
        self.latency.validate()?;
        self.adc()?;
        for (_, to) in &self.workload.transitions {
            if !to.is_resting() {
                return Err(Error::InvalidTarget(*to));
            }
        }
        if let Some(k) = &self.krinsky {
            k.rules.validate()?;
            if !k.start.is_resting() {
                return Err(Error::InvalidTarget(k.start));
            }
        }
        Ok(())
    }

    pub fn adc(&self) -> Result<AdcConfig> {
        let mut adc = AdcConfig::from_table(&self.state_table)?;
        if let Some(t) = &self.adc_thresholds {
            adc.thresholds = t.clone();
        }
        adc.validate()?;
        Ok(adc)
    }

    pub fn build(&self) -> Result<(Crossbar, Controller)> {
        let xbar = Crossbar::with_params(
            self.crossbar,
            self.state_table.clone(),
            &self.physical_params,
            &self.variation,
            self.seed,
        )?;
        let ctl = Controller::new(
            self.adc()?,
            self.energy.clone(),
            self.latency.clone(),
            self.variation.clone(),
        );
        Ok((xbar, ctl))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    Config,
    Execution,
}

/// An error tagged with whether it came from the scenario or from running it.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub kind: FailureKind,
    pub error: Error,
}

impl Failure {
    pub fn config(error: Error) -> Self {
        Failure {
            kind: FailureKind::Config,
            error,
        }
    }

    pub fn execution(error: Error) -> Self {
        Failure {
            kind: FailureKind::Execution,
            error,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            FailureKind::Config => 1,
            FailureKind::Execution => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for Failure {}

type Run<T> = std::result::Result<T, Failure>;

trait Tag<T> {
    fn cfg(self) -> Run<T>;
    fn exec(self) -> Run<T>;
}

impl<T> Tag<T> for Result<T> {
    fn cfg(self) -> Run<T> {
        self.map_err(Failure::config)
    }
    fn exec(self) -> Run<T> {
        self.map_err(Failure::execution)
    }
}

/// What a runner produced. `summary` is also written to `summary.txt`.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

struct OutDir {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl OutDir {
    fn create(dir: &Path) -> Run<Self> {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::execution(Error::Io(format!("{}: {e}", dir.display()))))?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, f: impl FnOnce(BufWriter<File>) -> Result<()>) -> Run<()> {
        let path = self.dir.join(name);
        let file = File::create(&path)
            .map_err(|e| Failure::execution(Error::Io(format!("{}: {e}", path.display()))))?;
        f(BufWriter::new(file)).exec()?;
        self.files.push(path);
        Ok(())
    }

    fn finish(mut self, cfg: &ScenarioConfig, summary: String) -> Run<Outcome> {
        let json = cfg.to_json().exec()?;
        self.write("effective_config.json", |mut w| {
            use std::io::Write;
            w.write_all(json.as_bytes())?;
            w.write_all(b"\n")?;
            Ok(w.flush()?)
        })?;
        let text = summary.clone();
        self.write("summary.txt", |mut w| {
            use std::io::Write;
            w.write_all(text.as_bytes())?;
            Ok(w.flush()?)
        })?;
        Ok(Outcome {
            summary,
            files: self.files,
        })
    }
}

/// Checks that each commanded transition starts where the previous one ended.
fn check_chain(transitions: &[(StateId, StateId)]) -> Result<()> {
    for (i, w) in transitions.windows(2).enumerate() {
        if w[1].0 != w[0].1 {
            return Err(Error::Config(format!(
                "transition {} starts at {} but the cell holds {}",
                i + 1,
                w[1].0,
                w[0].1
            )));
        }
    }
    Ok(())
}

/// Runs the explicit transition list and, if present, the FSA workload.
pub fn run_simulate(cfg: &ScenarioConfig, out: &Path) -> Run<Outcome> {
    cfg.validate().cfg()?;
    let transitions = &cfg.workload.transitions;
    if transitions.is_empty() && cfg.fsa.is_none() {
        return Err(Failure::config(Error::EmptyWorkload));
    }
    check_chain(transitions).cfg()?;
    let fsa_spec = cfg.fsa.as_ref().map(|f| f.spec()).transpose().cfg()?;
    let fsa_inputs = match (&cfg.fsa, &fsa_spec) {
        (Some(f), Some(spec)) => f
            .inputs
            .iter()
            .map(|s| spec.symbol_index(s))
            .collect::<Result<Vec<_>>>()
            .cfg()?,
        _ => Vec::new(),
    };

    let (mut xbar, mut ctl) = cfg.build().cfg()?;
    let mut dir = OutDir::create(out)?;
    let mut summary = String::new();

    if let Some(&(first, _)) = transitions.first() {
        let (row, col) = cfg.workload.cell;
        xbar.claim(row, col).cfg()?;
        xbar.preset(row, col, first).cfg()?;
        let mut rows = Vec::with_capacity(transitions.len());
        for (step, &(from, to)) in transitions.iter().enumerate() {
            let sel = xbar.select(row, col).exec()?;
            let res = ctl.write_from(&mut xbar, &sel, from, to).and_then(|_| {
                let (read, _) = ctl.execute_read_cycle(&mut xbar, &sel)?;
                Ok(read)
            });
            xbar.release(sel);
            let read = res.exec()?;
            let held = xbar.cell(row, col).exec()?.state();
            rows.push((step, from, to, held, read));
        }
        dir.write("state_trace.csv", |w| {
            let mut w = csv::Writer::from_writer(w);
            w.write_record(["step", "from", "to", "cell_state", "read_state"])?;
            for (step, from, to, held, read) in &rows {
                w.write_record([
                    step.to_string(),
                    from.to_string(),
                    to.to_string(),
                    held.to_string(),
                    read.to_string(),
                ])?;
            }
            Ok(w.flush()?)
        })?;
        let last = rows.last().map(|r| r.3).unwrap_or(first);
        let _ = writeln!(summary, "cell: ({row}, {col})");
        let _ = writeln!(summary, "final_state: {last}");
    }

    if let (Some(f), Some(spec)) = (&cfg.fsa, &fsa_spec) {
        let fsa = map_fsa_to_cells(spec, &mut xbar, f.encoding, f.rewrite).cfg()?;
        fsa.initialize(&mut ctl, &mut xbar).exec()?;
        let got = fsa.run(&mut ctl, &mut xbar, &fsa_inputs).exec()?;
        let expected = spec.evaluate(&fsa_inputs);
        let mismatches = got.iter().zip(&expected).filter(|(a, b)| a != b).count();
        dir.write("fsa_trace.csv", |w| {
            let mut w = csv::Writer::from_writer(w);
            w.write_record(["step", "symbol", "state", "expected_state"])?;
            for (i, ((g, e), s)) in got.iter().zip(&expected).zip(&f.inputs).enumerate() {
                w.write_record([i.to_string(), s.clone(), g.to_string(), e.to_string()])?;
            }
            Ok(w.flush()?)
        })?;
        let cells: Vec<String> = fsa
            .layout
            .cells
            .iter()
            .map(|(r, c)| format!("({r}, {c})"))
            .collect();
        let _ = writeln!(summary, "fsa_states: {}", spec.state_count);
        let _ = writeln!(summary, "fsa_cells: {}", cells.join(" "));
        let _ = writeln!(
            summary,
            "fsa_final_state: {}",
            got.last().copied().unwrap_or(spec.initial)
        );
        let _ = writeln!(summary, "fsa_oracle_mismatches: {mismatches}");
    }

    let log = ctl.take_log();
    let report = workload_report(&log).exec()?;
    let _ = writeln!(summary, "transitions: {}", report.transitions);
    let _ = writeln!(summary, "read_cycles: {}", report.read_cycles);
    let _ = writeln!(summary, "total_energy_pJ: {:.4}", report.total_energy_pj);
    let _ = writeln!(summary, "mean_energy_pJ: {:.4}", report.mean_energy_pj);
    let _ = writeln!(summary, "write_latency_ns: {}", report.write_latency_ns);
    let _ = writeln!(summary, "read_latency_ns: {}", report.read_latency_ns);
    let _ = writeln!(summary, "total_latency_ns: {}", report.total_latency_ns);

    dir.write("cycle_trace.csv", |w| {
        export::write_cycle_traces(w, &log.traces)
    })?;
    dir.write("ledger.csv", |w| export::write_ledger(w, &log.transitions))?;
    dir.write("readout.csv", |w| export::write_readouts(w, &log.readouts))?;
    dir.write("energy_latency.csv", |w| export::write_workload(w, &report))?;
    dir.finish(cfg, summary)
}

/// Detection Monte Carlo under the scenario's variation profile.
pub fn run_montecarlo(cfg: &ScenarioConfig, out: &Path, exec: Execution) -> Run<Outcome> {
    cfg.validate().cfg()?;
    let mc = MonteCarloConfig {
        trials: cfg.montecarlo.trials,
        seed: cfg.seed,
        profile: cfg.variation.clone(),
        states: cfg.montecarlo.states.clone(),
        table: cfg.state_table.clone(),
    };
    mc.validate().cfg()?;
    let report = run_detection_mc_with(&mc, exec).exec()?;
    let mut dir = OutDir::create(out)?;
    dir.write("detection.csv", |w| export::write_detection(w, &report))?;
    dir.write("margins.csv", |w| export::write_margins(w, &report.margins))?;
    dir.finish(cfg, report.summary())
}

/// Krinsky automaton on one crossbar cell, checked against the software rules.
pub fn run_krinsky_scenario(cfg: &ScenarioConfig, out: &Path) -> Run<Outcome> {
    cfg.validate().cfg()?;
    let k = cfg
        .krinsky
        .as_ref()
        .ok_or_else(|| Failure::config(Error::Config("no krinsky section".into())))?;
    let env = k.environment().cfg()?;
    if k.steps == 0 {
        return Err(Failure::config(Error::Config(
            "steps must be at least 1".into(),
        )));
    }
    let (mut xbar, mut ctl) = cfg.build().cfg()?;
    let (row, col) = k.cell;
    xbar.claim(row, col).cfg()?;
    xbar.preset(row, col, k.start).cfg()?;
    let sel = xbar.select(row, col).exec()?;
    let traj = run_krinsky(&mut ctl, &mut xbar, &sel, &env, &k.rules, k.steps, cfg.seed);
    xbar.release(sel);
    let traj = traj.exec()?;
    let oracle = simulate_krinsky_rules(k.start, &env, &k.rules, k.steps, cfg.seed).exec()?;
    let log = ctl.take_log();
    let report = workload_report(&log).exec()?;

    let mut summary = String::new();
    let _ = writeln!(summary, "steps: {}", traj.steps.len());
    let _ = writeln!(summary, "start: {}", traj.start);
    let _ = writeln!(
        summary,
        "final_state: {}",
        traj.steps.last().map(|s| s.next).unwrap_or(traj.start)
    );
    let _ = writeln!(
        summary,
        "fraction_A: {:.4}",
        traj.fraction_choosing(Action::A)
    );
    let _ = writeln!(
        summary,
        "fraction_B: {:.4}",
        traj.fraction_choosing(Action::B)
    );
    let _ = writeln!(
        summary,
        "matches_software_rules: {}",
        traj.states() == oracle.states()
    );
    let _ = writeln!(summary, "total_energy_pJ: {:.4}", report.total_energy_pj);
    let _ = writeln!(summary, "total_latency_ns: {}", report.total_latency_ns);

    let mut dir = OutDir::create(out)?;
    dir.write("trajectory.csv", |w| export::write_trajectory(w, &traj))?;
    dir.write("ledger.csv", |w| export::write_ledger(w, &log.transitions))?;
    dir.finish(cfg, summary)
}

/// Static report: margins, ADC setup, energy table and model parameters.
pub fn run_report(cfg: &ScenarioConfig, out: &Path) -> Run<Outcome> {
    cfg.validate().cfg()?;
    let adc = cfg.adc().cfg()?;
    let margins = margin_report(&cfg.state_table, &cfg.variation);
    let mut energies = Vec::new();
    for (from, to) in EnergyLedger::reference_transitions() {
        let plan = crate::controller::plan_transition(&cfg.state_table, from, to).cfg()?;
        energies.push(cfg.energy.energy_of(&plan).cfg()?);
    }
    let mean = energies.iter().sum::<f64>() / energies.len() as f64;

    let mut summary = String::new();
    let _ = writeln!(summary, "adc_bits: {}", adc.bits);
    let t: Vec<String> = adc.thresholds.iter().map(|v| format!("{v:.4}")).collect();
    let _ = writeln!(summary, "adc_thresholds_uA: {}", t.join(" "));
    let _ = writeln!(summary, "mean_energy_pJ: {mean:.4}");
    let flagged: Vec<String> = margins
        .flagged()
        .iter()
        .map(|(a, b)| format!("{a}/{b}"))
        .collect();
    let _ = writeln!(summary, "flagged_margins: {}", flagged.join(" "));

    let mut dir = OutDir::create(out)?;
    dir.write("margins.csv", |w| export::write_margins(w, &margins))?;
    dir.write("energy_table.csv", |w| {
        export::write_energy_table(w, &cfg.state_table, &cfg.energy, &cfg.latency)
    })?;
    dir.write("params.csv", |w| {
        export::write_params(w, &cfg.physical_params)
    })?;
    dir.finish(cfg, summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        assert_eq!(
            ScenarioConfig::from_json("{}").unwrap(),
            ScenarioConfig::default()
        );
    }

    #[test]
    fn unknown_field_is_rejected() {
        assert!(ScenarioConfig::from_json(r#"{"sead": 3}"#).is_err());
    }

    #[test]
    fn s0_target_is_a_config_error() {
        let e =
            ScenarioConfig::from_json(r#"{"workload":{"transitions":[["S1","S0"]]}}"#).unwrap_err();
        assert_eq!(e.to_string(), "S0 is not a resting state");
    }

    #[test]
    fn broken_chain_is_rejected() {
        let t = [(StateId::S0, StateId::S1), (StateId::S3, StateId::S2)];
        assert!(check_chain(&t).is_err());
    }

    #[test]
    fn missing_probability_names_field() {
        let k = KrinskyConfig {
            reward_a: Some(0.5),
            ..Default::default()
        };
        assert!(k
            .environment()
            .unwrap_err()
            .to_string()
            .contains("reward_b"));
    }
}
