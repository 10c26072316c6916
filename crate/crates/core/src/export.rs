//! CSV exports. Column names carry their unit suffix.

use std::io::Write;

use csv::Writer;

use crate::analysis::{AccumulationReport, DetectionReport, MarginReport, WorkloadReport};
use crate::automaton::KrinskyTrajectory;
use crate::controller::plan_transition;
use crate::device::{PhysicalModelParams, StateId, StateTable};
use crate::error::Result;
use crate::ledger::{EnergyLedger, LatencyLedger, ReadoutRecord, TransitionRecord};
use crate::trace::CycleTrace;

pub fn write_cycle_traces<W: Write>(out: W, traces: &[CycleTrace]) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record(["cycle_id", "kind", "event", "polarity", "event_index"])?;
    for t in traces {
        for e in &t.events {
            w.write_record([
                t.id.to_string(),
                t.kind.label().to_string(),
                e.signal.to_string(),
                e.polarity.symbol().to_string(),
                e.index.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn route(from: StateId, to: StateId) -> String {
    if from == StateId::S0 {
        format!("{from}->{to}")
    } else {
        format!("{from}->S0->{to}")
    }
}

pub fn write_ledger<W: Write>(out: W, records: &[TransitionRecord]) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record([
        "cycle_id",
        "row",
        "col",
        "transition",
        "pulses",
        "energy_pJ",
        "latency_ns",
    ])?;
    for r in records {
        w.write_record([
            r.cycle_id.to_string(),
            r.row.to_string(),
            r.col.to_string(),
            route(r.from, r.to),
            r.pulses.to_string(),
            r.energy_pj.to_string(),
            r.latency_ns.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_readouts<W: Write>(out: W, records: &[ReadoutRecord]) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record(["cycle_index", "row", "col", "current_uA", "state"])?;
    for r in records {
        w.write_record([
            r.cycle_id.to_string(),
            r.row.to_string(),
            r.col.to_string(),
            r.current_ua.to_string(),
            r.state.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_workload<W: Write>(out: W, report: &WorkloadReport) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record([
        "transitions",
        "read_cycles",
        "total_energy_pJ",
        "mean_energy_pJ",
        "write_latency_ns",
        "read_latency_ns",
        "total_latency_ns",
    ])?;
    w.write_record([
        report.transitions.to_string(),
        report.read_cycles.to_string(),
        report.total_energy_pj.to_string(),
        report.mean_energy_pj.to_string(),
        report.write_latency_ns.to_string(),
        report.read_latency_ns.to_string(),
        report.total_latency_ns.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

pub fn write_detection<W: Write>(out: W, report: &DetectionReport) -> Result<()> {
    let mut w = Writer::from_writer(out);
    let mut header = vec![
        "state".to_string(),
        "trials".into(),
        "misdetections".into(),
        "error_rate".into(),
    ];
    header.extend((1..=6).map(|j| format!("detected_S{j}")));
    header.extend(
        [
            "nominal_current_uA",
            "min_current_uA",
            "max_current_uA",
            "mean_rel_excursion",
            "max_rel_excursion",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for d in &report.per_state {
        let mut row = vec![
            d.state.to_string(),
            d.trials.to_string(),
            d.misdetections.to_string(),
            (d.misdetections as f64 / d.trials as f64).to_string(),
        ];
        row.extend(d.detected_as.iter().map(|c| c.to_string()));
        row.extend(
            [
                d.nominal_current_ua,
                d.min_current_ua,
                d.max_current_ua,
                d.mean_rel_excursion,
                d.max_rel_excursion,
            ]
            .map(|v| v.to_string()),
        );
        w.write_record(&row)?;
    }
    let mut total = vec![
        "all".to_string(),
        (report.trials * report.per_state.len()).to_string(),
        report.misdetections.to_string(),
        report.error_rate.to_string(),
    ];
    total.resize(header.len(), String::new());
    w.write_record(&total)?;
    w.flush()?;
    Ok(())
}

pub fn write_margins<W: Write>(out: W, report: &MarginReport) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record([
        "upper",
        "lower",
        "ratio",
        "threshold_uA",
        "upper_worst_low_uA",
        "lower_worst_high_uA",
        "bands_overlap",
        "worst_case_misdetect",
        "flagged",
    ])?;
    for p in &report.pairs {
        w.write_record([
            p.upper.to_string(),
            p.lower.to_string(),
            p.ratio.to_string(),
            p.threshold_ua.to_string(),
            p.upper_worst_low_ua.to_string(),
            p.lower_worst_high_ua.to_string(),
            p.bands_overlap.to_string(),
            p.worst_case_misdetect.to_string(),
            p.flagged().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory<W: Write>(out: W, t: &KrinskyTrajectory) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record(["step", "state", "action", "beta", "next"])?;
    for (i, s) in t.steps.iter().enumerate() {
        w.write_record([
            i.to_string(),
            s.state.to_string(),
            format!("{:?}", s.action),
            s.beta.bit().to_string(),
            s.next.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_accumulation<W: Write>(out: W, r: &AccumulationReport) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record(["trial", "last_target", "final_state", "read_back"])?;
    for o in &r.outcomes {
        w.write_record([
            o.trial.to_string(),
            o.last_target.to_string(),
            o.final_state.to_string(),
            o.read_back.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// The six tabulated transitions with their booked energy and latency.
pub fn write_energy_table<W: Write>(
    out: W,
    table: &StateTable,
    energy: &EnergyLedger,
    latency: &LatencyLedger,
) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record(["transition", "energy_pJ", "latency_ns"])?;
    for (from, to) in EnergyLedger::reference_transitions() {
        let plan = plan_transition(table, from, to)?;
        w.write_record([
            plan.to_string(),
            energy.energy_of(&plan)?.to_string(),
            latency.latency_of(&plan).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_params<W: Write>(out: W, params: &PhysicalModelParams) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record(["symbol", "value", "unit"])?;
    for (sym, v, unit) in params.entries() {
        w.write_record([sym.to_string(), v.to_string(), unit.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
