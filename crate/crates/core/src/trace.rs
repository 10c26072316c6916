//! Handshake signal traces of the asynchronous control unit.
//!
//! A read cycle is requested with `DR`, a write cycle with `DW`. Each pulse or
//! sense phase enables the selection peripherals (`MEN`), waits for their
//! acknowledgment (`MACK`), performs the data step (`DN`) and returns both to
//! zero. The cycle completes with `ACK+`, withdrawal of the request, `ACK-`.
//! Events are ordered but untimed.

use std::fmt;

use serde::Serialize;

use crate::device::StateId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Signal {
    DR,
    DW,
    MEN,
    MACK,
    DN,
    ACK,
}

impl Signal {
    const ALL: [Signal; 6] = [
        Signal::DR,
        Signal::DW,
        Signal::MEN,
        Signal::MACK,
        Signal::DN,
        Signal::ACK,
    ];

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Polarity {
    Rise,
    Fall,
}

impl Polarity {
    pub fn symbol(self) -> char {
        match self {
            Polarity::Rise => '+',
            Polarity::Fall => '-',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignalEvent {
    pub signal: Signal,
    pub polarity: Polarity,
    /// Position of the event within its cycle.
    pub index: usize,
}

impl fmt::Display for SignalEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.signal, self.polarity.symbol())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleKind {
    Read,
    Write { from: StateId, to: StateId },
}

impl CycleKind {
    pub fn label(&self) -> &'static str {
        match self {
            CycleKind::Read => "read",
            CycleKind::Write { .. } => "write",
        }
    }

    fn request(&self) -> Signal {
        match self {
            CycleKind::Read => Signal::DR,
            CycleKind::Write { .. } => Signal::DW,
        }
    }

    /// Number of MEN/MACK/DN phases the cycle must contain.
    pub fn phases(&self) -> usize {
        match self {
            CycleKind::Read => 1,
            CycleKind::Write { from, .. } if *from == StateId::S0 => 1,
            CycleKind::Write { .. } => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleTrace {
    pub id: u64,
    pub kind: CycleKind,
    pub events: Vec<SignalEvent>,
    /// Quantized state for reads, final state for writes.
    pub result: Option<StateId>,
}

impl CycleTrace {
    pub fn new(id: u64, kind: CycleKind) -> Self {
        CycleTrace {
            id,
            kind,
            events: Vec::new(),
            result: None,
        }
    }

    pub fn push(&mut self, signal: Signal, polarity: Polarity) {
        let index = self.events.len();
        self.events.push(SignalEvent {
            signal,
            polarity,
            index,
        });
    }

    pub fn rise(&mut self, signal: Signal) {
        self.push(signal, Polarity::Rise);
    }

    pub fn fall(&mut self, signal: Signal) {
        self.push(signal, Polarity::Fall);
    }

    /// The canonical trace for `kind`.
    pub fn canonical(id: u64, kind: CycleKind) -> Self {
        let mut t = CycleTrace::new(id, kind);
        let req = kind.request();
        t.rise(req);
        for _ in 0..kind.phases() {
            t.rise(Signal::MEN);
            t.rise(Signal::MACK);
            t.rise(Signal::DN);
            t.fall(Signal::DN);
            t.fall(Signal::MEN);
            t.fall(Signal::MACK);
        }
        t.rise(Signal::ACK);
        t.fall(req);
        t.fall(Signal::ACK);
        t
    }

    /// Drops and re-numbers events; used to build mutated traces.
    pub fn with_events(&self, events: impl IntoIterator<Item = (Signal, Polarity)>) -> Self {
        let mut t = CycleTrace::new(self.id, self.kind);
        t.result = self.result;
        for (s, p) in events {
            t.push(s, p);
        }
        t
    }

    pub fn pairs(&self) -> Vec<(Signal, Polarity)> {
        self.events.iter().map(|e| (e.signal, e.polarity)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceViolation {
    Empty,
    WrongRequest { index: usize, expected: Signal },
    ForeignSignal { index: usize, signal: Signal },
    NonAlternating { index: usize, signal: Signal },
    AckBeforeRequest { index: usize },
    AckReleasedEarly { index: usize },
    DataWithoutHandshake { index: usize },
    EarlyCompletion { index: usize },
    RequestWithdrawnEarly { index: usize },
    MissingIntermediatePhase { expected: usize, found: usize },
    ExtraPhase { expected: usize, found: usize },
    Unterminated { signal: Signal },
    NonCanonical { index: usize },
}

impl fmt::Display for TraceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TraceViolation::*;
        match self {
            Empty => write!(f, "empty trace"),
            WrongRequest { index, expected } => {
                write!(f, "cycle must open with {expected}+ (event {index})")
            }
            ForeignSignal { index, signal } => {
                write!(
                    f,
                    "signal {signal} does not belong to this cycle (event {index})"
                )
            }
            NonAlternating { index, signal } => {
                write!(f, "polarity of {signal} does not alternate (event {index})")
            }
            AckBeforeRequest { index } => write!(f, "acknowledge before request (event {index})"),
            AckReleasedEarly { index } => {
                write!(f, "acknowledge released before request (event {index})")
            }
            DataWithoutHandshake { index } => {
                write!(
                    f,
                    "DN+ without completed MEN/MACK handshake (event {index})"
                )
            }
            EarlyCompletion { index } => {
                write!(f, "ACK+ while DN/MEN/MACK still high (event {index})")
            }
            RequestWithdrawnEarly { index } => {
                write!(f, "request withdrawn before ACK+ (event {index})")
            }
            MissingIntermediatePhase { expected, found } => write!(
                f,
                "missing intermediate phase ({found} of {expected} pulse phases)"
            ),
            ExtraPhase { expected, found } => {
                write!(f, "extra phase ({found} phases, expected {expected})")
            }
            Unterminated { signal } => write!(f, "{signal} left high at end of cycle"),
            NonCanonical { index } => write!(f, "non-canonical event order at event {index}"),
        }
    }
}

impl std::error::Error for TraceViolation {}

/// Checks polarity alternation, request/acknowledge causality, the phase count
/// for the cycle kind, and finally the canonical ordering.
pub fn validate_trace(trace: &CycleTrace) -> Result<(), TraceViolation> {
    use TraceViolation::*;
    if trace.events.is_empty() {
        return Err(Empty);
    }
    let request = trace.kind.request();
    let foreign = match trace.kind {
        CycleKind::Read => Signal::DW,
        CycleKind::Write { .. } => Signal::DR,
    };
    let first = trace.events[0];
    if first.signal != request || first.polarity != Polarity::Rise {
        return Err(WrongRequest {
            index: 0,
            expected: request,
        });
    }

    let mut high = [false; 6];
    let mut ack_seen = false;
    let mut phases = 0usize;
    for (index, ev) in trace.events.iter().enumerate() {
        if ev.signal == foreign {
            return Err(ForeignSignal {
                index,
                signal: ev.signal,
            });
        }
        let level = &mut high[ev.signal.slot()];
        let rising = ev.polarity == Polarity::Rise;
        if *level == rising {
            return Err(NonAlternating {
                index,
                signal: ev.signal,
            });
        }
        *level = rising;
        let is_high = |s: Signal| high[s.slot()];
        match (ev.signal, ev.polarity) {
            (Signal::MEN, Polarity::Rise) => phases += 1,
            (Signal::MACK, Polarity::Rise) if !is_high(Signal::MEN) => {
                return Err(AckBeforeRequest { index })
            }
            (Signal::MACK, Polarity::Fall) if is_high(Signal::MEN) => {
                return Err(AckReleasedEarly { index })
            }
            (Signal::DN, Polarity::Rise) if !(is_high(Signal::MEN) && is_high(Signal::MACK)) => {
                return Err(DataWithoutHandshake { index })
            }
            (Signal::ACK, Polarity::Rise) => {
                if is_high(Signal::DN) || is_high(Signal::MEN) || is_high(Signal::MACK) {
                    return Err(EarlyCompletion { index });
                }
                ack_seen = true;
            }
            (s, Polarity::Fall) if s == request && !ack_seen => {
                return Err(RequestWithdrawnEarly { index })
            }
            _ => {}
        }
    }
    if let Some(s) = Signal::ALL.into_iter().find(|s| high[s.slot()]) {
        return Err(Unterminated { signal: s });
    }
    let expected = trace.kind.phases();
    if phases < expected {
        return Err(MissingIntermediatePhase {
            expected,
            found: phases,
        });
    }
    if phases > expected {
        return Err(ExtraPhase {
            expected,
            found: phases,
        });
    }
    let canonical = CycleTrace::canonical(trace.id, trace.kind).pairs();
    let actual = trace.pairs();
    if let Some(index) =
        (0..canonical.len().max(actual.len())).find(|&i| canonical.get(i) != actual.get(i))
    {
        return Err(NonCanonical { index });
    }
    Ok(())
}
