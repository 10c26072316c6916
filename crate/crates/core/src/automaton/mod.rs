//! Automata mapped onto crossbar cells.

pub mod encoding;
pub mod krinsky;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::controller::Controller;
use crate::crossbar::{Crossbar, Selection};
use crate::error::{Error, Result};

pub use encoding::{decode_state, digits_needed, encode_state, EncodingMode, MultiCellEncoding};
pub use krinsky::{
    action_of, krinsky_next, run_krinsky, simulate_krinsky_rules, Action, Beta, KrinskyEnvironment,
    KrinskyRules, KrinskyStep, KrinskyTrajectory,
};

/// A deterministic automaton over `state_count` states and a named alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FsaSpec {
    pub state_count: usize,
    pub alphabet: Vec<String>,
    /// `delta[state][symbol]`
    pub delta: Vec<Vec<usize>>,
    pub initial: usize,
}

impl FsaSpec {
    /// Builds a spec from `(state, symbol, next)` triples. Symbols are indexed
    /// in first-appearance order.
    pub fn from_triples(
        state_count: usize,
        initial: usize,
        triples: &[(usize, String, usize)],
    ) -> Result<Self> {
        let mut alphabet: Vec<String> = Vec::new();
        let mut table: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (s, sym, n) in triples {
            let idx = match alphabet.iter().position(|a| a == sym) {
                Some(i) => i,
                None => {
                    alphabet.push(sym.clone());
                    alphabet.len() - 1
                }
            };
            if table.insert((*s, idx), *n).is_some() {
                return Err(Error::InvalidFsa(format!(
                    "duplicate transition for state {s} on '{sym}'"
                )));
            }
        }
        let mut delta = vec![vec![usize::MAX; alphabet.len()]; state_count];
        for ((s, a), n) in table {
            let row = delta.get_mut(s).ok_or_else(|| {
                Error::InvalidFsa(format!("state {s} out of range for {state_count} states"))
            })?;
            row[a] = n;
        }
        let spec = FsaSpec {
            state_count,
            alphabet,
            delta,
            initial,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Parses the plain-text table format: one `state symbol next` triple per
    /// line, `#` comments, and optional `states N` / `initial K` directives.
    /// Without `states`, the count is one past the largest index seen.
    pub fn parse(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut initial = 0;
        let mut triples = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::InvalidFsa(format!("line {}: cannot parse '{raw}'", lineno + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["states", n] => declared = Some(n.parse().map_err(|_| bad())?),
                ["initial", k] => initial = k.parse().map_err(|_| bad())?,
                [s, sym, n] => triples.push((
                    s.parse::<usize>().map_err(|_| bad())?,
                    sym.to_string(),
                    n.parse::<usize>().map_err(|_| bad())?,
                )),
                _ => return Err(bad()),
            }
        }
        let inferred = triples
            .iter()
            .map(|(s, _, n)| (*s).max(*n) + 1)
            .max()
            .unwrap_or(0);
        FsaSpec::from_triples(declared.unwrap_or(inferred), initial, &triples)
    }

    pub fn validate(&self) -> Result<()> {
        if self.state_count == 0 {
            return Err(Error::InvalidFsa("no states".into()));
        }
        if self.alphabet.is_empty() {
            return Err(Error::InvalidFsa("empty alphabet".into()));
        }
        if self.initial >= self.state_count {
            return Err(Error::InvalidFsa(format!(
                "initial state {} out of range",
                self.initial
            )));
        }
        if self.delta.len() != self.state_count {
            return Err(Error::InvalidFsa(
                "transition table has wrong row count".into(),
            ));
        }
        for (s, row) in self.delta.iter().enumerate() {
            if row.len() != self.alphabet.len() {
                return Err(Error::InvalidFsa(format!("state {s} row has wrong width")));
            }
            for (a, &n) in row.iter().enumerate() {
                if n == usize::MAX {
                    return Err(Error::InvalidFsa(format!(
                        "missing transition for state {s} on '{}'",
                        self.alphabet[a]
                    )));
                }
                if n >= self.state_count {
                    return Err(Error::InvalidFsa(format!(
                        "transition {s} --{}--> {n} leaves the state set",
                        self.alphabet[a]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn symbol_index(&self, symbol: &str) -> Result<usize> {
        self.alphabet
            .iter()
            .position(|a| a == symbol)
            .ok_or_else(|| Error::InvalidFsa(format!("unknown symbol '{symbol}'")))
    }

    pub fn next(&self, state: usize, symbol: usize) -> usize {
        self.delta[state][symbol]
    }

    /// States after each input, starting from `initial`.
    pub fn evaluate(&self, inputs: &[usize]) -> Vec<usize> {
        inputs
            .iter()
            .scan(self.initial, |q, &a| {
                *q = self.next(*q, a);
                Some(*q)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewriteMode {
    /// Only digits whose value changes are rewritten.
    #[default]
    Partial,
    /// Every digit cell is rewritten on every step.
    Full,
}

/// An automaton bound to crossbar cells.
#[derive(Clone, Debug)]
pub struct CompiledFsa {
    pub spec: FsaSpec,
    pub layout: MultiCellEncoding,
    pub rewrite: RewriteMode,
}

/// Allocates `ceil(log_base N)` cells for `spec` on `xbar`.
pub fn map_fsa_to_cells(
    spec: &FsaSpec,
    xbar: &mut Crossbar,
    mode: EncodingMode,
    rewrite: RewriteMode,
) -> Result<CompiledFsa> {
    spec.validate()?;
    let cells = xbar.allocate(digits_needed(spec.state_count, mode.base()))?;
    Ok(CompiledFsa {
        spec: spec.clone(),
        layout: MultiCellEncoding {
            mode,
            states: spec.state_count,
            cells,
        },
        rewrite,
    })
}

fn with_cell<T>(
    xbar: &mut Crossbar,
    (row, col): (usize, usize),
    op: impl FnOnce(&mut Crossbar, &Selection) -> Result<T>,
) -> Result<T> {
    let sel = xbar.select(row, col)?;
    let out = op(xbar, &sel);
    xbar.release(sel);
    out
}

impl CompiledFsa {
    pub fn cell_count(&self) -> usize {
        self.layout.digit_count()
    }

    /// Writes the initial state into every digit cell.
    pub fn initialize(&self, ctl: &mut Controller, xbar: &mut Crossbar) -> Result<()> {
        let digits = self.layout.encode(self.spec.initial)?;
        for (&cell, &d) in self.layout.cells.iter().zip(&digits) {
            let target = self.layout.mode.digit_state(d);
            with_cell(xbar, cell, |xb, sel| {
                ctl.transition_to(xb, sel, target).map(|_| ())
            })?;
        }
        Ok(())
    }

    fn read_digits(&self, ctl: &mut Controller, xbar: &mut Crossbar) -> Result<Vec<u8>> {
        self.layout
            .cells
            .iter()
            .map(|&cell| {
                with_cell(xbar, cell, |xb, sel| {
                    let (s, _) = ctl.execute_read_cycle(xb, sel)?;
                    Ok(self.layout.mode.state_digit(s))
                })
            })
            .collect()
    }

    /// Decoded automaton state as currently stored.
    pub fn read_state(&self, ctl: &mut Controller, xbar: &mut Crossbar) -> Result<usize> {
        let digits = self.read_digits(ctl, xbar)?;
        self.layout.decode(&digits)
    }

    /// Reads every digit, applies δ for `symbol`, and writes the changed digits
    /// (all of them under [`RewriteMode::Full`]).
    pub fn step(&self, ctl: &mut Controller, xbar: &mut Crossbar, symbol: usize) -> Result<usize> {
        if symbol >= self.spec.alphabet.len() {
            return Err(Error::InvalidFsa(format!(
                "symbol index {symbol} out of range"
            )));
        }
        let digits = self.read_digits(ctl, xbar)?;
        let q = self.layout.decode(&digits)?;
        let next = self.spec.next(q, symbol);
        let new_digits = self.layout.encode(next)?;
        for ((&cell, &old), &new) in self.layout.cells.iter().zip(&digits).zip(&new_digits) {
            if old == new && self.rewrite == RewriteMode::Partial {
                continue;
            }
            let mode = self.layout.mode;
            with_cell(xbar, cell, |xb, sel| {
                ctl.write_from(xb, sel, mode.digit_state(old), mode.digit_state(new))
                    .map(|_| ())
            })?;
        }
        Ok(next)
    }

    pub fn run(
        &self,
        ctl: &mut Controller,
        xbar: &mut Crossbar,
        inputs: &[usize],
    ) -> Result<Vec<usize>> {
        inputs.iter().map(|&a| self.step(ctl, xbar, a)).collect()
    }
}
