//! Energy and latency accounting for executed cycles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::controller::TransitionPlan;
use crate::device::{StateId, DEFAULT_FRAME_NS};
use crate::error::{Error, Result};
use crate::trace::CycleTrace;

/// Per-transition write energy in pJ. Routed transitions are keyed by target
/// state: any `S_i -> S0 -> S_j` costs the tabulated `S_(j-1) -> S_j` value,
/// which for `S1` is the `S0 -> S1` figure. Direct writes out of `S0` have
/// their own table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyLedger {
    pub via_s0_pj: BTreeMap<StateId, f64>,
    pub direct_from_s0_pj: BTreeMap<StateId, f64>,
}

impl Default for EnergyLedger {
    fn default() -> Self {
        let via_s0_pj = [
            (StateId::S1, 1.74),
            (StateId::S2, 8.2),
            (StateId::S3, 8.3),
            (StateId::S4, 8.5),
            (StateId::S5, 8.8),
            (StateId::S6, 9.25),
        ]
        .into_iter()
        .collect();
        EnergyLedger {
            via_s0_pj,
            direct_from_s0_pj: [(StateId::S1, 1.74)].into_iter().collect(),
        }
    }
}

impl EnergyLedger {
    pub fn energy_of(&self, plan: &TransitionPlan) -> Result<f64> {
        let (table, route) = if plan.is_direct() {
            (&self.direct_from_s0_pj, "S0")
        } else {
            (&self.via_s0_pj, "via S0")
        };
        table.get(&plan.target).copied().ok_or_else(|| {
            Error::MissingLedgerEntry(format!("{} -> {} ({route})", plan.source, plan.target))
        })
    }

    /// The six tabulated transitions: S0→S1 direct and S(j−1)→S(j) via S0.
    pub fn reference_transitions() -> Vec<(StateId, StateId)> {
        StateId::ALL.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LatencyLedger {
    pub frame_ns: f64,
    pub frames_per_pulse: u32,
    pub read_frames: u32,
}

impl Default for LatencyLedger {
    fn default() -> Self {
        LatencyLedger {
            frame_ns: DEFAULT_FRAME_NS,
            frames_per_pulse: 1,
            read_frames: 1,
        }
    }
}

impl LatencyLedger {
    /// Every pulse occupies whole frames regardless of its width.
    pub fn latency_of(&self, plan: &TransitionPlan) -> f64 {
        plan.steps.len() as f64 * self.frames_per_pulse as f64 * self.frame_ns
    }

    pub fn read_latency_ns(&self) -> f64 {
        self.read_frames as f64 * self.frame_ns
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_ns.is_nan() || self.frame_ns <= 0.0 || self.frames_per_pulse == 0 {
            return Err(Error::Config(
                "latency frame and frames_per_pulse must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionRecord {
    pub cycle_id: u64,
    pub row: usize,
    pub col: usize,
    pub from: StateId,
    pub to: StateId,
    pub pulses: usize,
    pub energy_pj: f64,
    pub latency_ns: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReadoutRecord {
    pub cycle_id: u64,
    pub row: usize,
    pub col: usize,
    pub current_ua: f64,
    pub state: StateId,
    pub latency_ns: f64,
}

/// Everything a controller has executed.
#[derive(Clone, Debug, Default)]
pub struct WorkloadLog {
    pub transitions: Vec<TransitionRecord>,
    pub readouts: Vec<ReadoutRecord>,
    pub traces: Vec<CycleTrace>,
}

impl WorkloadLog {
    pub fn total_energy_pj(&self) -> f64 {
        self.transitions.iter().map(|t| t.energy_pj).sum()
    }

    pub fn write_latency_ns(&self) -> f64 {
        self.transitions.iter().map(|t| t.latency_ns).sum()
    }

    pub fn read_latency_ns(&self) -> f64 {
        self.readouts.iter().map(|r| r.latency_ns).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty() && self.readouts.is_empty()
    }
}
