//! Behavioral simulation of finite state automata stored in a 1T1R ReRAM
//! crossbar.
//!
//! Each cell holds one of seven resistance levels. `S0` is the low-resistance
//! landing state reached by SET; `S1..S6` are reached by pulse-width-coded
//! RESET from `S0` and are the states an automaton rests in. Every write goes
//! through `S0`, so any state can follow any other.

pub mod analysis;
pub mod automaton;
pub mod controller;
pub mod crossbar;
pub mod device;
pub mod error;
pub mod export;
pub mod ledger;
pub mod parallel;
pub mod scenario;
pub mod seed;
pub mod trace;

pub use controller::{plan_transition, Controller, CycleFailure, PulseOp, TransitionPlan};
pub use crossbar::{
    adc_bits, adc_quantize, default_thresholds, AdcConfig, Crossbar, CrossbarConfig, Selection,
};
pub use device::{
    sample_d2d, CellDevice, D2dSample, PhysicalModelParams, PulseSpec, StateId, StateTable,
    VariationMode, VariationProfile,
};
pub use error::{Error, Result};
pub use ledger::{EnergyLedger, LatencyLedger, WorkloadLog};
pub use parallel::Execution;
pub use trace::{validate_trace, CycleKind, CycleTrace, Signal, TraceViolation};
