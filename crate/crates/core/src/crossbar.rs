//! m×n array of 1T1R cells behind a row DeMUX, bit-line encoder and column MUX,
//! sharing one current-sense amplifier and ADC.

use serde::{Deserialize, Serialize};

use crate::device::{
    sample_d2d, CellDevice, PhysicalModelParams, PulseSpec, StateId, StateTable, VariationProfile,
    V_READ,
};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrossbarConfig {
    pub rows: usize,
    pub cols: usize,
}

impl Default for CrossbarConfig {
    fn default() -> Self {
        CrossbarConfig { rows: 4, cols: 4 }
    }
}

impl CrossbarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Config(format!(
                "crossbar must be at least 1x1, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }
}

/// Handle to the one cell currently routed to the sense path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Selection {
    pub row: usize,
    pub col: usize,
    pub gate_enabled: bool,
}

/// Number of ADC bits needed to distinguish `states` levels.
pub fn adc_bits(states: usize) -> u32 {
    debug_assert!(states >= 2);
    usize::BITS - states.saturating_sub(1).leading_zeros()
}

/// Geometric midpoints between adjacent resting-state currents (S1/S2 … S5/S6).
pub fn default_thresholds(table: &StateTable) -> Result<Vec<f64>> {
    StateId::RESTING
        .windows(2)
        .map(|pair| {
            let (hi, lo) = (table.current_ua(pair[0]), table.current_ua(pair[1]));
            if hi <= lo {
                return Err(Error::DegenerateTable(format!(
                    "{} and {} currents give no margin ({hi} vs {lo} uA)",
                    pair[0], pair[1]
                )));
            }
            Ok((hi * lo).sqrt())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdcConfig {
    pub bits: u32,
    /// Descending currents (µA); `thresholds[i]` separates `S(i+1)` from `S(i+2)`.
    pub thresholds: Vec<f64>,
}

impl AdcConfig {
    pub fn from_table(table: &StateTable) -> Result<Self> {
        Ok(AdcConfig {
            bits: adc_bits(StateId::COUNT),
            thresholds: default_thresholds(table)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.bits != adc_bits(StateId::COUNT) {
            return Err(Error::InvalidAdc(format!(
                "{} bits configured, {} states need {}",
                self.bits,
                StateId::COUNT,
                adc_bits(StateId::COUNT)
            )));
        }
        if self.thresholds.len() != StateId::RESTING.len() - 1 {
            return Err(Error::InvalidAdc(format!(
                "expected {} thresholds, got {}",
                StateId::RESTING.len() - 1,
                self.thresholds.len()
            )));
        }
        if self.thresholds.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidAdc(
                "thresholds must strictly decrease".into(),
            ));
        }
        Ok(())
    }

    pub fn quantize(&self, current_ua: f64) -> StateId {
        adc_quantize(current_ua, self)
    }
}

/// Maps a sensed current onto the observable state whose band contains it.
/// S0 and S1 share a code. A current exactly on a threshold resolves to the
/// higher-current state.
pub fn adc_quantize(current_ua: f64, adc: &AdcConfig) -> StateId {
    let below = adc
        .thresholds
        .iter()
        .take_while(|&&t| current_ua < t)
        .count();
    StateId::RESTING[below]
}

pub struct Crossbar {
    config: CrossbarConfig,
    table: StateTable,
    cells: Vec<CellDevice>,
    allocated: Vec<bool>,
    active: Option<(usize, usize)>,
}

impl Crossbar {
    /// Builds an array of pristine cells; each draws its own D2D sample and
    /// C2C stream from `seed`.
    pub fn new(
        config: CrossbarConfig,
        table: StateTable,
        profile: &VariationProfile,
        seed: u64,
    ) -> Result<Self> {
        Self::with_params(
            config,
            table,
            &PhysicalModelParams::default(),
            profile,
            seed,
        )
    }

    pub fn with_params(
        config: CrossbarConfig,
        table: StateTable,
        params: &PhysicalModelParams,
        profile: &VariationProfile,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        table.validate()?;
        profile.validate()?;
        let cells = (0..config.rows * config.cols)
            .map(|i| {
                let cell_seed = seed::derive_seed(seed, &[i as u64]);
                CellDevice::new(sample_d2d(params, profile, cell_seed), cell_seed)
            })
            .collect();
        Ok(Crossbar {
            config,
            table,
            cells,
            allocated: vec![false; config.rows * config.cols],
            active: None,
        })
    }

    /// Variation-free array with the default state table.
    pub fn nominal(rows: usize, cols: usize) -> Result<Self> {
        Self::new(
            CrossbarConfig { rows, cols },
            StateTable::default(),
            &VariationProfile::disabled(),
            0,
        )
    }

    pub fn config(&self) -> CrossbarConfig {
        self.config
    }

    pub fn table(&self) -> &StateTable {
        &self.table
    }

    fn index(&self, row: usize, col: usize) -> Result<usize> {
        if row >= self.config.rows || col >= self.config.cols {
            return Err(Error::OutOfRange {
                row,
                col,
                rows: self.config.rows,
                cols: self.config.cols,
            });
        }
        Ok(row * self.config.cols + col)
    }

    pub fn cell(&self, row: usize, col: usize) -> Result<&CellDevice> {
        let i = self.index(row, col)?;
        Ok(&self.cells[i])
    }

    pub fn cell_mut(&mut self, row: usize, col: usize) -> Result<&mut CellDevice> {
        let i = self.index(row, col)?;
        Ok(&mut self.cells[i])
    }

    /// Routes one cell to the pulse and sense paths and enables its gate.
    pub fn select(&mut self, row: usize, col: usize) -> Result<Selection> {
        self.index(row, col)?;
        if let Some((r, c)) = self.active {
            return Err(Error::AlreadySelected { row: r, col: c });
        }
        self.active = Some((row, col));
        Ok(Selection {
            row,
            col,
            gate_enabled: true,
        })
    }

    pub fn release(&mut self, sel: Selection) {
        if self.active == Some((sel.row, sel.col)) {
            self.active = None;
        }
    }

    pub fn active(&self) -> Option<(usize, usize)> {
        self.active
    }

    pub fn check_selected(&self, sel: &Selection) -> Result<usize> {
        if !sel.gate_enabled || self.active != Some((sel.row, sel.col)) {
            return Err(Error::NotSelected);
        }
        self.index(sel.row, sel.col)
    }

    pub fn apply_pulse(&mut self, sel: &Selection, pulse: &PulseSpec) -> Result<()> {
        let i = self.check_selected(sel)?;
        self.cells[i].apply_pulse(&self.table, pulse)
    }

    /// Current seen by the CSA for the selected cell. The CSA is ideal, so
    /// this is the cell's read current at `V_READ`.
    pub fn sense(&mut self, sel: &Selection, profile: &VariationProfile) -> Result<f64> {
        let i = self.check_selected(sel)?;
        self.cells[i].read_current(&self.table, V_READ, profile)
    }

    /// Puts a cell into `state` directly (SET, then one RESET) without going
    /// through a controller. For test setup and scenario initialization.
    pub fn preset(&mut self, row: usize, col: usize, state: StateId) -> Result<()> {
        let i = self.index(row, col)?;
        let table = &self.table;
        let cell = &mut self.cells[i];
        cell.apply_set(table, &PulseSpec::set(table.set_width_ns()))?;
        if state != StateId::S0 {
            cell.apply_reset(table, &PulseSpec::reset(table.reset_width_ns(state)))?;
        }
        Ok(())
    }

    pub fn free_cells(&self) -> usize {
        self.allocated.iter().filter(|a| !**a).count()
    }

    /// Marks one specific cell as in use.
    pub fn claim(&mut self, row: usize, col: usize) -> Result<()> {
        let i = self.index(row, col)?;
        if self.allocated[i] {
            return Err(Error::InsufficientCells {
                needed: 1,
                available: 0,
            });
        }
        self.allocated[i] = true;
        Ok(())
    }

    /// Claims `count` unallocated cells in row-major order.
    pub fn allocate(&mut self, count: usize) -> Result<Vec<(usize, usize)>> {
        let available = self.free_cells();
        if count > available {
            return Err(Error::InsufficientCells {
                needed: count,
                available,
            });
        }
        let cols = self.config.cols;
        let picked: Vec<usize> = self
            .allocated
            .iter()
            .enumerate()
            .filter(|(_, a)| !**a)
            .map(|(i, _)| i)
            .take(count)
            .collect();
        for &i in &picked {
            self.allocated[i] = true;
        }
        Ok(picked.into_iter().map(|i| (i / cols, i % cols)).collect())
    }
}
