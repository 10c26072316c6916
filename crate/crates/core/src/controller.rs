//! Control unit: routes every transition through `S0`, drives read and write
//! handshake cycles, and books energy and latency.

use std::fmt;

use crate::crossbar::{AdcConfig, Crossbar, Selection};
use crate::device::{PulseSpec, StateId, StateTable, VariationProfile, V_FIXED, V_SET};
use crate::error::{Error, Result};
use crate::ledger::{EnergyLedger, LatencyLedger, ReadoutRecord, TransitionRecord, WorkloadLog};
use crate::trace::{CycleKind, CycleTrace, Signal};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulseOp {
    SetToS0 { width_ns: f64 },
    Reset { width_ns: f64 },
}

impl PulseOp {
    pub fn pulse(&self, frame_ns: f64) -> PulseSpec {
        match *self {
            PulseOp::SetToS0 { width_ns } => PulseSpec {
                amplitude_v: V_SET,
                width_ns,
                frame_ns,
            },
            PulseOp::Reset { width_ns } => PulseSpec {
                amplitude_v: V_FIXED,
                width_ns,
                frame_ns,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionPlan {
    pub source: StateId,
    pub target: StateId,
    pub steps: Vec<PulseOp>,
}

impl TransitionPlan {
    pub fn is_direct(&self) -> bool {
        self.source == StateId::S0
    }
}

impl fmt::Display for TransitionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_direct() {
            write!(f, "{}->{}", self.source, self.target)
        } else {
            write!(f, "{}->S0->{}", self.source, self.target)
        }
    }
}

/// Plans `current -> target`. From `S0` this is a single RESET; from anywhere
/// else (self-loops included) a SET back to `S0` comes first.
pub fn plan_transition(
    table: &StateTable,
    current: StateId,
    target: StateId,
) -> Result<TransitionPlan> {
    if !target.is_resting() {
        return Err(Error::InvalidTarget(target));
    }
    let reset = PulseOp::Reset {
        width_ns: table.reset_width_ns(target),
    };
    let steps = if current == StateId::S0 {
        vec![reset]
    } else {
        vec![
            PulseOp::SetToS0 {
                width_ns: table.set_width_ns(),
            },
            reset,
        ]
    };
    Ok(TransitionPlan {
        source: current,
        target,
        steps,
    })
}

/// A cycle that stopped part-way; `trace` holds the events emitted so far.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleFailure {
    pub trace: CycleTrace,
    pub error: Error,
}

impl fmt::Display for CycleFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} cycle {} failed after {} events: {}",
            self.trace.kind.label(),
            self.trace.id,
            self.trace.events.len(),
            self.error
        )
    }
}

impl std::error::Error for CycleFailure {}

impl From<CycleFailure> for Error {
    fn from(f: CycleFailure) -> Self {
        f.error
    }
}

#[derive(Clone, Debug)]
pub struct Controller {
    pub adc: AdcConfig,
    pub energy: EnergyLedger,
    pub latency: LatencyLedger,
    pub profile: VariationProfile,
    log: WorkloadLog,
    retain_traces: bool,
    next_cycle: u64,
}

impl Controller {
    pub fn new(
        adc: AdcConfig,
        energy: EnergyLedger,
        latency: LatencyLedger,
        profile: VariationProfile,
    ) -> Self {
        Controller {
            adc,
            energy,
            latency,
            profile,
            log: WorkloadLog::default(),
            retain_traces: true,
            next_cycle: 0,
        }
    }

    /// Default ledgers and thresholds derived from the crossbar's table.
    pub fn for_crossbar(xbar: &Crossbar, profile: VariationProfile) -> Result<Self> {
        Ok(Self::new(
            AdcConfig::from_table(xbar.table())?,
            EnergyLedger::default(),
            LatencyLedger::default(),
            profile,
        ))
    }

    /// Whether executed traces are kept in the log. Long Monte Carlo runs turn
    /// this off.
    pub fn retain_traces(mut self, keep: bool) -> Self {
        self.retain_traces = keep;
        self
    }

    pub fn log(&self) -> &WorkloadLog {
        &self.log
    }

    pub fn take_log(&mut self) -> WorkloadLog {
        std::mem::take(&mut self.log)
    }

    fn open_cycle(&mut self, kind: CycleKind) -> CycleTrace {
        let id = self.next_cycle;
        self.next_cycle += 1;
        CycleTrace::new(id, kind)
    }

    fn keep(&mut self, trace: &CycleTrace) {
        if self.retain_traces {
            self.log.traces.push(trace.clone());
        }
    }

    pub fn execute_write_cycle(
        &mut self,
        xbar: &mut Crossbar,
        sel: &Selection,
        plan: &TransitionPlan,
    ) -> Result<CycleTrace, CycleFailure> {
        let mut trace = self.open_cycle(CycleKind::Write {
            from: plan.source,
            to: plan.target,
        });
        trace.rise(Signal::DW);
        let energy = match self.energy.energy_of(plan) {
            Ok(e) => e,
            Err(error) => return Err(CycleFailure { trace, error }),
        };
        for step in &plan.steps {
            trace.rise(Signal::MEN);
            if let Err(error) = xbar.check_selected(sel) {
                return Err(CycleFailure { trace, error });
            }
            trace.rise(Signal::MACK);
            trace.rise(Signal::DN);
            if let Err(error) = xbar.apply_pulse(sel, &step.pulse(self.latency.frame_ns)) {
                return Err(CycleFailure { trace, error });
            }
            trace.fall(Signal::DN);
            trace.fall(Signal::MEN);
            trace.fall(Signal::MACK);
        }
        let actual = match xbar.cell(sel.row, sel.col) {
            Ok(c) => c.state(),
            Err(error) => return Err(CycleFailure { trace, error }),
        };
        if actual != plan.target {
            return Err(CycleFailure {
                trace,
                error: Error::TransitionMismatch {
                    expected: plan.target,
                    actual,
                },
            });
        }
        trace.rise(Signal::ACK);
        trace.fall(Signal::DW);
        trace.fall(Signal::ACK);
        trace.result = Some(actual);

        self.log.transitions.push(TransitionRecord {
            cycle_id: trace.id,
            row: sel.row,
            col: sel.col,
            from: plan.source,
            to: plan.target,
            pulses: plan.steps.len(),
            energy_pj: energy,
            latency_ns: self.latency.latency_of(plan),
        });
        self.keep(&trace);
        Ok(trace)
    }

    pub fn execute_read_cycle(
        &mut self,
        xbar: &mut Crossbar,
        sel: &Selection,
    ) -> Result<(StateId, CycleTrace), CycleFailure> {
        let mut trace = self.open_cycle(CycleKind::Read);
        trace.rise(Signal::DR);
        trace.rise(Signal::MEN);
        if let Err(error) = xbar.check_selected(sel) {
            return Err(CycleFailure { trace, error });
        }
        trace.rise(Signal::MACK);
        trace.rise(Signal::DN);
        let current = match xbar.sense(sel, &self.profile) {
            Ok(i) => i,
            Err(error) => return Err(CycleFailure { trace, error }),
        };
        let state = self.adc.quantize(current);
        trace.fall(Signal::DN);
        trace.fall(Signal::MEN);
        trace.fall(Signal::MACK);
        trace.rise(Signal::ACK);
        trace.fall(Signal::DR);
        trace.fall(Signal::ACK);
        trace.result = Some(state);

        self.log.readouts.push(ReadoutRecord {
            cycle_id: trace.id,
            row: sel.row,
            col: sel.col,
            current_ua: current,
            state,
            latency_ns: self.latency.read_latency_ns(),
        });
        self.keep(&trace);
        Ok((state, trace))
    }

    /// Reads the cell, then writes `target` via the planned route.
    pub fn transition_to(
        &mut self,
        xbar: &mut Crossbar,
        sel: &Selection,
        target: StateId,
    ) -> Result<StateId> {
        let (current, _) = self.execute_read_cycle(xbar, sel)?;
        self.write_from(xbar, sel, current, target)
    }

    /// Writes `target` assuming the cell currently holds `current`.
    pub fn write_from(
        &mut self,
        xbar: &mut Crossbar,
        sel: &Selection,
        current: StateId,
        target: StateId,
    ) -> Result<StateId> {
        let plan = plan_transition(xbar.table(), current, target)?;
        let trace = self.execute_write_cycle(xbar, sel, &plan)?;
        Ok(trace.result.unwrap_or(target))
    }

    /// One Mealy step `q' = delta(q, x)`: read `q`, evaluate, write `q'`.
    pub fn step_fsa<F>(
        &mut self,
        xbar: &mut Crossbar,
        sel: &Selection,
        delta: F,
        x: f64,
    ) -> Result<StateId>
    where
        F: Fn(StateId, f64) -> StateId,
    {
        if x.is_nan() || x.abs() > 1.0 {
            return Err(Error::InvalidInput(x));
        }
        let (q, _) = self.execute_read_cycle(xbar, sel)?;
        let next = delta(q, x);
        if !next.is_resting() {
            return Err(Error::DeltaRange(next));
        }
        self.write_from(xbar, sel, q, next)
    }
}
