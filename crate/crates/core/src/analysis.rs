//! Variation studies and workload aggregation.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::controller::Controller;
use crate::crossbar::{AdcConfig, Crossbar, CrossbarConfig};
use crate::device::{
    sample_d2d, CellDevice, PhysicalModelParams, PulseSpec, StateId, StateTable, VariationProfile,
    V_READ,
};
use crate::error::{Error, Result};
use crate::ledger::WorkloadLog;
use crate::parallel::{map_trials, Execution};
use crate::seed::{self, derive_seed};

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloConfig {
    pub trials: usize,
    pub seed: u64,
    pub profile: VariationProfile,
    pub states: Vec<StateId>,
    pub table: StateTable,
}

impl MonteCarloConfig {
    pub fn new(trials: usize, seed: u64, profile: VariationProfile) -> Self {
        MonteCarloConfig {
            trials,
            seed,
            profile,
            states: StateId::RESTING.to_vec(),
            table: StateTable::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.states.is_empty() || self.states.iter().any(|s| !s.is_resting()) {
            return Err(Error::Config(
                "states under test must be a subset of S1..S6".into(),
            ));
        }
        self.profile.validate()?;
        self.table.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateDetection {
    pub state: StateId,
    pub trials: usize,
    pub misdetections: usize,
    /// Count of reads quantized to each of S1..S6.
    pub detected_as: [usize; 6],
    pub nominal_current_ua: f64,
    pub min_current_ua: f64,
    pub max_current_ua: f64,
    /// Mean of |I − I_nominal| / I_nominal.
    pub mean_rel_excursion: f64,
    pub max_rel_excursion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairMargin {
    pub upper: StateId,
    pub lower: StateId,
    /// I_upper / I_lower
    pub ratio: f64,
    pub threshold_ua: f64,
    /// Upper state's current at its worst-case low excursion.
    pub upper_worst_low_ua: f64,
    /// Lower state's current at its worst-case high excursion.
    pub lower_worst_high_ua: f64,
    pub bands_overlap: bool,
    /// A worst-case excursion lands on the wrong side of the threshold.
    pub worst_case_misdetect: bool,
    pub degenerate: bool,
}

impl PairMargin {
    pub fn flagged(&self) -> bool {
        self.degenerate || self.worst_case_misdetect || self.bands_overlap
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginReport {
    pub pairs: Vec<PairMargin>,
}

impl MarginReport {
    pub fn flagged(&self) -> Vec<(StateId, StateId)> {
        self.pairs
            .iter()
            .filter(|p| p.flagged())
            .map(|p| (p.upper, p.lower))
            .collect()
    }

    pub fn pair(&self, upper: StateId) -> Option<&PairMargin> {
        self.pairs.iter().find(|p| p.upper == upper)
    }
}

/// Adjacent-pair current ratios and worst-case bands under `profile`'s bounds,
/// compounded once per enabled variation source. Does not reject degenerate
/// tables; it flags them.
pub fn margin_report(table: &StateTable, profile: &VariationProfile) -> MarginReport {
    let sources = profile.d2d_enabled as i32 + profile.c2c_enabled as i32;
    let low = |s: StateId| (1.0 - profile.bound_for(s)).powi(sources);
    let high = |s: StateId| (1.0 + profile.bound_for(s)).powi(sources);
    let pairs = StateId::RESTING
        .windows(2)
        .map(|w| {
            let (upper, lower) = (w[0], w[1]);
            let (iu, il) = (table.current_ua(upper), table.current_ua(lower));
            let threshold = (iu * il).sqrt();
            let upper_worst_low = iu * low(upper);
            let lower_worst_high = il * high(lower);
            PairMargin {
                upper,
                lower,
                ratio: iu / il,
                threshold_ua: threshold,
                upper_worst_low_ua: upper_worst_low,
                lower_worst_high_ua: lower_worst_high,
                bands_overlap: upper_worst_low < lower_worst_high,
                worst_case_misdetect: upper_worst_low < threshold || lower_worst_high >= threshold,
                degenerate: iu <= il,
            }
        })
        .collect();
    MarginReport { pairs }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectionReport {
    pub trials: usize,
    pub seed: u64,
    pub per_state: Vec<StateDetection>,
    pub misdetections: usize,
    pub error_rate: f64,
    pub margins: MarginReport,
}

impl DetectionReport {
    /// Adjacent pairs that were confused at least once in either direction.
    pub fn observed_confusions(&self) -> Vec<(StateId, StateId)> {
        let count = |from: StateId, to: StateId| {
            self.per_state
                .iter()
                .find(|d| d.state == from)
                .map_or(0, |d| d.detected_as[to.index() - 1])
        };
        StateId::RESTING
            .windows(2)
            .filter(|w| count(w[0], w[1]) > 0 || count(w[1], w[0]) > 0)
            .map(|w| (w[0], w[1]))
            .collect()
    }

    pub fn state(&self, s: StateId) -> Option<&StateDetection> {
        self.per_state.iter().find(|d| d.state == s)
    }

    /// Mean relative excursion over the tested states in `range`.
    pub fn mean_rel_excursion(&self, range: std::ops::RangeInclusive<StateId>) -> Option<f64> {
        let v: Vec<f64> = self
            .per_state
            .iter()
            .filter(|d| range.contains(&d.state))
            .map(|d| d.mean_rel_excursion)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "trials per state: {}", self.trials);
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(
            s,
            "misdetections: {} of {} reads (error rate {:.6})",
            self.misdetections,
            self.trials * self.per_state.len(),
            self.error_rate
        );
        for d in &self.per_state {
            let _ = writeln!(
                s,
                "  {}: {} misdetected, current {:.4}..{:.4} uA (nominal {}), mean |dI|/I {:.4}",
                d.state,
                d.misdetections,
                d.min_current_ua,
                d.max_current_ua,
                d.nominal_current_ua,
                d.mean_rel_excursion
            );
        }
        for p in &self.margins.pairs {
            let _ = writeln!(
                s,
                "  margin {}/{}: ratio {:.3}, threshold {:.4} uA, worst-case {:.4} / {:.4} uA{}",
                p.upper,
                p.lower,
                p.ratio,
                p.threshold_ua,
                p.upper_worst_low_ua,
                p.lower_worst_high_ua,
                if p.flagged() { "  [FLAGGED]" } else { "" }
            );
        }
        let seen = self.observed_confusions();
        if !seen.is_empty() {
            let pairs: Vec<String> = seen.iter().map(|(a, b)| format!("{a}/{b}")).collect();
            let _ = writeln!(s, "observed confusions: {}", pairs.join(", "));
        }
        s
    }
}

struct Sample {
    detected: StateId,
    current: f64,
}

fn sample_state(
    cfg: &MonteCarloConfig,
    adc: &AdcConfig,
    trial: usize,
    state: StateId,
) -> Result<Sample> {
    let device_seed = derive_seed(
        cfg.seed,
        &[seed::STREAM_TRIAL, trial as u64, state.level() as u64],
    );
    let d2d = sample_d2d(&PhysicalModelParams::default(), &cfg.profile, device_seed);
    let mut cell = CellDevice::new(d2d, device_seed);
    let table = &cfg.table;
    cell.apply_set(table, &PulseSpec::set(table.set_width_ns()))?;
    cell.apply_reset(table, &PulseSpec::reset(table.reset_width_ns(state)))?;
    let current = cell.read_current(table, V_READ, &cfg.profile)?;
    Ok(Sample {
        detected: adc.quantize(current),
        current,
    })
}

pub fn run_detection_mc(cfg: &MonteCarloConfig) -> Result<DetectionReport> {
    run_detection_mc_with(cfg, Execution::default())
}

/// For every trial and state under test: a fresh device is written through
/// S0, read once under the profile's variation, and quantized.
pub fn run_detection_mc_with(cfg: &MonteCarloConfig, exec: Execution) -> Result<DetectionReport> {
    cfg.validate()?;
    let adc = AdcConfig::from_table(&cfg.table)?;
    let rows: Vec<Result<Vec<Sample>>> = map_trials(cfg.trials, exec, |t| {
        cfg.states
            .iter()
            .map(|&s| sample_state(cfg, &adc, t, s))
            .collect()
    });

    let mut per_state: Vec<StateDetection> = cfg
        .states
        .iter()
        .map(|&s| StateDetection {
            state: s,
            trials: cfg.trials,
            misdetections: 0,
            detected_as: [0; 6],
            nominal_current_ua: cfg.table.current_ua(s),
            min_current_ua: f64::INFINITY,
            max_current_ua: f64::NEG_INFINITY,
            mean_rel_excursion: 0.0,
            max_rel_excursion: 0.0,
        })
        .collect();
    for row in rows {
        for (d, sample) in per_state.iter_mut().zip(row?) {
            if sample.detected != d.state {
                d.misdetections += 1;
            }
            d.detected_as[sample.detected.index() - 1] += 1;
            d.min_current_ua = d.min_current_ua.min(sample.current);
            d.max_current_ua = d.max_current_ua.max(sample.current);
            let rel = (sample.current - d.nominal_current_ua).abs() / d.nominal_current_ua;
            d.mean_rel_excursion += rel;
            d.max_rel_excursion = d.max_rel_excursion.max(rel);
        }
    }
    for d in &mut per_state {
        d.mean_rel_excursion /= cfg.trials as f64;
    }
    let misdetections: usize = per_state.iter().map(|d| d.misdetections).sum();
    Ok(DetectionReport {
        trials: cfg.trials,
        seed: cfg.seed,
        error_rate: misdetections as f64 / (cfg.trials * per_state.len()) as f64,
        per_state,
        misdetections,
        margins: margin_report(&cfg.table, &cfg.profile),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccumulationConfig {
    pub trials: usize,
    pub transitions: usize,
    pub seed: u64,
    pub profile: VariationProfile,
    pub table: StateTable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccumulationTrial {
    pub trial: usize,
    pub last_target: StateId,
    pub final_state: StateId,
    pub read_back: StateId,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccumulationReport {
    pub trials: usize,
    pub transitions_per_trial: usize,
    /// Trials whose device did not end in the last commanded state.
    pub state_mismatches: usize,
    /// Trials whose final read cycle disagreed with the last commanded state.
    pub readback_mismatches: usize,
    pub outcomes: Vec<AccumulationTrial>,
}

/// Each trial drives one cell through `transitions` random targets, each a
/// read cycle followed by a routed write, then reads it back once more.
pub fn run_accumulation_study(
    cfg: &AccumulationConfig,
    exec: Execution,
) -> Result<AccumulationReport> {
    if cfg.trials == 0 || cfg.transitions == 0 {
        return Err(Error::Config(
            "trials and transitions must be at least 1".into(),
        ));
    }
    let outcomes: Vec<Result<AccumulationTrial>> = map_trials(cfg.trials, exec, |t| {
        let trial_seed = derive_seed(cfg.seed, &[seed::STREAM_WORKLOAD, t as u64]);
        let mut xb = Crossbar::new(
            CrossbarConfig { rows: 1, cols: 1 },
            cfg.table.clone(),
            &cfg.profile,
            trial_seed,
        )?;
        let mut ctl = Controller::for_crossbar(&xb, cfg.profile.clone())?.retain_traces(false);
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let sel = xb.select(0, 0)?;
        let mut target = StateId::S1;
        for _ in 0..cfg.transitions {
            target = StateId::RESTING[rng.random_range(0..StateId::RESTING.len())];
            ctl.transition_to(&mut xb, &sel, target)?;
        }
        let (read_back, _) = ctl.execute_read_cycle(&mut xb, &sel)?;
        Ok(AccumulationTrial {
            trial: t,
            last_target: target,
            final_state: xb.cell(0, 0)?.state(),
            read_back,
        })
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(AccumulationReport {
        trials: cfg.trials,
        transitions_per_trial: cfg.transitions,
        state_mismatches: outcomes
            .iter()
            .filter(|o| o.final_state != o.last_target)
            .count(),
        readback_mismatches: outcomes
            .iter()
            .filter(|o| o.read_back != o.last_target)
            .count(),
        outcomes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorkloadReport {
    pub transitions: usize,
    pub read_cycles: usize,
    pub total_energy_pj: f64,
    pub mean_energy_pj: f64,
    pub write_latency_ns: f64,
    pub read_latency_ns: f64,
    pub total_latency_ns: f64,
}

pub fn workload_report(log: &WorkloadLog) -> Result<WorkloadReport> {
    if log.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    let n = log.transitions.len();
    let total = log.total_energy_pj();
    Ok(WorkloadReport {
        transitions: n,
        read_cycles: log.readouts.len(),
        total_energy_pj: total,
        mean_energy_pj: if n == 0 { 0.0 } else { total / n as f64 },
        write_latency_ns: log.write_latency_ns(),
        read_latency_ns: log.read_latency_ns(),
        total_latency_ns: log.write_latency_ns() + log.read_latency_ns(),
    })
}
