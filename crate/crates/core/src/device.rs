//! Behavioral model of a single 1T1R multi-level cell.
//!
//! The cell is driven by three canonical amplitudes: a negative SET pulse that
//! returns it to the low-resistance landing state `S0`, a positive RESET pulse
//! whose width (accumulated since the last SET) selects one of `S1..S6`, and a
//! small read bias that produces the sensed current. Device-to-device (D2D) and
//! cycle-to-cycle (C2C) variation act as multiplicative factors on the read
//! current.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

pub const V_SET: f64 = -2.0;
pub const V_FIXED: f64 = 1.8;
pub const V_READ: f64 = 0.1;
pub const DEFAULT_FRAME_NS: f64 = 150.0;

const AMPLITUDE_EPS: f64 = 1e-9;

fn same_volts(a: f64, b: f64) -> bool {
    (a - b).abs() <= AMPLITUDE_EPS
}

/// One rung of the seven-level resistance ladder. `S0` is the LRS landing
/// state, `S1..S6` are the states an automaton may rest in.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct StateId(u8);

impl StateId {
    pub const S0: StateId = StateId(0);
    pub const S1: StateId = StateId(1);
    pub const S2: StateId = StateId(2);
    pub const S3: StateId = StateId(3);
    pub const S4: StateId = StateId(4);
    pub const S5: StateId = StateId(5);
    pub const S6: StateId = StateId(6);

    pub const COUNT: usize = 7;
    pub const ALL: [StateId; 7] = [
        Self::S0,
        Self::S1,
        Self::S2,
        Self::S3,
        Self::S4,
        Self::S5,
        Self::S6,
    ];
    /// The six usable automaton states.
    pub const RESTING: [StateId; 6] = [Self::S1, Self::S2, Self::S3, Self::S4, Self::S5, Self::S6];

    pub fn new(level: u8) -> Result<Self> {
        if (level as usize) < Self::COUNT {
            Ok(StateId(level))
        } else {
            Err(Error::InvalidState(format!("level {level}")))
        }
    }

    pub fn level(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_resting(self) -> bool {
        self.0 >= 1
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

impl FromStr for StateId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s
            .trim()
            .strip_prefix(['S', 's'])
            .ok_or_else(|| Error::InvalidState(s.to_string()))?;
        let level: u8 = digits
            .parse()
            .map_err(|_| Error::InvalidState(s.to_string()))?;
        StateId::new(level).map_err(|_| Error::InvalidState(s.to_string()))
    }
}

impl TryFrom<String> for StateId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StateId> for String {
    fn from(s: StateId) -> String {
        s.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub amplitude_v: f64,
    pub width_ns: f64,
    pub frame_ns: f64,
}

impl PulseSpec {
    pub fn set(width_ns: f64) -> Self {
        PulseSpec {
            amplitude_v: V_SET,
            width_ns,
            frame_ns: DEFAULT_FRAME_NS,
        }
    }

    pub fn reset(width_ns: f64) -> Self {
        PulseSpec {
            amplitude_v: V_FIXED,
            width_ns,
            frame_ns: DEFAULT_FRAME_NS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width_ns > 0.0 && self.width_ns <= self.frame_ns) {
            return Err(Error::InvalidPulse {
                width_ns: self.width_ns,
                frame_ns: self.frame_ns,
            });
        }
        if ![V_SET, V_FIXED, V_READ]
            .iter()
            .any(|&v| same_volts(v, self.amplitude_v))
        {
            return Err(Error::WrongAmplitude {
                got: self.amplitude_v,
                expected: V_FIXED,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRow {
    /// Programming pulse width; for `S0` this is the SET width.
    pub pulse_width_ns: f64,
    /// Nominal read current at `V_READ`.
    pub current_ua: f64,
    /// Nominal resistance, kept as metadata. Sensing uses `current_ua`.
    pub resistance_kohm: f64,
}

/// Per-state programming and readout calibration, indexed by state level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateTable {
    pub rows: [StateRow; 7],
}

impl Default for StateTable {
    fn default() -> Self {
        let row = |w, i, r| StateRow {
            pulse_width_ns: w,
            current_ua: i,
            resistance_kohm: r,
        };
        StateTable {
            rows: [
                row(10.0, 12.8, 7.8),
                row(5.0, 12.6, 8.0),
                row(10.0, 1.6, 95.2),
                row(15.0, 0.56, 196.1),
                row(30.0, 0.3, 342.5),
                row(60.0, 0.2, 588.2),
                row(150.0, 0.07, 1492.5),
            ],
        }
    }
}

impl StateTable {
    pub fn row(&self, state: StateId) -> &StateRow {
        &self.rows[state.index()]
    }

    pub fn set_width_ns(&self) -> f64 {
        self.rows[0].pulse_width_ns
    }

    pub fn reset_width_ns(&self, state: StateId) -> f64 {
        self.row(state).pulse_width_ns
    }

    pub fn current_ua(&self, state: StateId) -> f64 {
        self.row(state).current_ua
    }

    pub fn validate(&self) -> Result<()> {
        if self.set_width_ns() <= 0.0 {
            return Err(Error::DegenerateTable("SET width must be positive".into()));
        }
        for j in 1..StateId::COUNT {
            let (prev, cur) = (&self.rows[j - 1], &self.rows[j]);
            if j >= 2 && cur.pulse_width_ns <= prev.pulse_width_ns {
                return Err(Error::DegenerateTable(format!(
                    "pulse widths must increase (S{} -> S{j})",
                    j - 1
                )));
            }
            if cur.current_ua >= prev.current_ua {
                return Err(Error::DegenerateTable(format!(
                    "read currents must decrease (S{} -> S{j})",
                    j - 1
                )));
            }
            if cur.resistance_kohm <= prev.resistance_kohm {
                return Err(Error::DegenerateTable(format!(
                    "resistances must increase (S{} -> S{j})",
                    j - 1
                )));
            }
        }
        if self.rows[1].pulse_width_ns <= 0.0 || self.rows.iter().any(|r| r.current_ua <= 0.0) {
            return Err(Error::DegenerateTable(
                "widths and currents must be positive".into(),
            ));
        }
        Ok(())
    }

    /// State reached after `exposure_ns` of cumulative RESET since the last SET:
    /// the largest `S_j` whose single-pulse width fits in the exposure.
    pub fn nominal_state_for_exposure(&self, exposure_ns: f64) -> StateId {
        StateId::RESTING
            .iter()
            .rev()
            .find(|&&s| self.reset_width_ns(s) <= exposure_ns)
            .copied()
            .unwrap_or(StateId::S0)
    }
}

/// Device model parameters of the electro-thermal compact model, kept as the
/// record of what a D2D sample perturbs. Values are in the units noted per
/// field; the behavioral model does not integrate them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicalModelParams {
    /// nm
    pub l_cell: f64,
    /// nm
    pub l_det: f64,
    /// nm
    pub r_det: f64,
    /// 1e26 m^-3
    pub n_plug: f64,
    /// nm
    pub a: f64,
    /// m^2/Vs
    pub mu_n: f64,
    /// ε0
    pub epsilon: f64,
    /// 1e26 m^-3
    pub n_disc_min: f64,
    /// ε0
    pub epsilon_phi_b: f64,
    /// 1e26 m^-3
    pub n_disc_max: f64,
    /// eV
    pub e_phi_bn0: f64,
    /// eV
    pub e_phi_bn: f64,
    /// eV
    pub delta_w_a: f64,
    /// 1/Ω
    pub a_coeff: f64,
    /// Ω
    pub r_series: f64,
    /// Ω
    pub r_0: f64,
    /// kΩ
    pub r_th_line: f64,
    /// Ω
    pub r_th0: f64,
}

impl Default for PhysicalModelParams {
    fn default() -> Self {
        PhysicalModelParams {
            l_cell: 3.0,
            l_det: 4.0,
            r_det: 20.0,
            n_plug: 20.0,
            a: 0.25,
            mu_n: 1e-6,
            epsilon: 17.0,
            n_disc_min: 0.008,
            epsilon_phi_b: 5.5,
            n_disc_max: 20.0,
            e_phi_bn0: 0.3,
            e_phi_bn: 0.1,
            delta_w_a: 0.7,
            a_coeff: 0.00392,
            r_series: 650.0,
            r_0: 719.244,
            r_th_line: 90.47,
            r_th0: 1.572e7,
        }
    }
}

impl PhysicalModelParams {
    /// `(symbol, value, unit)` rows as they would be tabulated.
    pub fn entries(&self) -> Vec<(&'static str, f64, &'static str)> {
        vec![
            ("l_cell", self.l_cell, "nm"),
            ("l_det", self.l_det, "nm"),
            ("r_det", self.r_det, "nm"),
            ("N_plug", self.n_plug, "1e26 m^-3"),
            ("a", self.a, "nm"),
            ("mu_n", self.mu_n, "m^2/Vs"),
            ("epsilon", self.epsilon, "eps0"),
            ("N_disc_min", self.n_disc_min, "1e26 m^-3"),
            ("epsilon_phi_B", self.epsilon_phi_b, "eps0"),
            ("N_disc_max", self.n_disc_max, "1e26 m^-3"),
            ("e_phi_Bn0", self.e_phi_bn0, "eV"),
            ("e_phi_Bn", self.e_phi_bn, "eV"),
            ("delta_W_A", self.delta_w_a, "eV"),
            ("A", self.a_coeff, "1/Ohm"),
            ("R_series", self.r_series, "Ohm"),
            ("R_0", self.r_0, "Ohm"),
            ("R_th_line", self.r_th_line, "kOhm"),
            ("R_th0", self.r_th0, "Ohm"),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationMode {
    /// Gaussian with σ = bound × `sigma_fraction`, rejected outside ±bound.
    #[default]
    TruncatedGaussian,
    /// Adversarial: every draw lands on +bound or −bound with equal odds.
    UniformAtBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VariationProfile {
    /// Relative read-current bound for S0..S3.
    pub low_state_bound: f64,
    /// Relative read-current bound for S4..S6.
    pub high_state_bound: f64,
    pub sigma_fraction: f64,
    pub d2d_enabled: bool,
    pub c2c_enabled: bool,
    pub mode: VariationMode,
}

impl Default for VariationProfile {
    fn default() -> Self {
        VariationProfile {
            low_state_bound: 0.5,
            high_state_bound: 0.2,
            sigma_fraction: 1.0 / 3.0,
            d2d_enabled: true,
            c2c_enabled: false,
            mode: VariationMode::TruncatedGaussian,
        }
    }
}

impl VariationProfile {
    pub fn disabled() -> Self {
        VariationProfile {
            d2d_enabled: false,
            c2c_enabled: false,
            ..Self::default()
        }
    }

    pub fn d2d_only() -> Self {
        VariationProfile {
            d2d_enabled: true,
            c2c_enabled: false,
            ..Self::default()
        }
    }

    pub fn c2c_only() -> Self {
        VariationProfile {
            d2d_enabled: false,
            c2c_enabled: true,
            ..Self::default()
        }
    }

    pub fn with_bounds(mut self, low: f64, high: f64) -> Self {
        self.low_state_bound = low;
        self.high_state_bound = high;
        self
    }

    pub fn with_mode(mut self, mode: VariationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn bound_for(&self, state: StateId) -> f64 {
        if state <= StateId::S3 {
            self.low_state_bound
        } else {
            self.high_state_bound
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, b) in [
            ("low_state_bound", self.low_state_bound),
            ("high_state_bound", self.high_state_bound),
        ] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidProfile(format!("{name} = {b} not in [0, 1)")));
            }
        }
        if self.sigma_fraction.is_nan() || self.sigma_fraction <= 0.0 {
            return Err(Error::InvalidProfile(
                "sigma_fraction must be positive".into(),
            ));
        }
        Ok(())
    }

    /// One multiplicative factor in `[1 - bound, 1 + bound]` for `state`.
    pub fn draw_multiplier<R: Rng + ?Sized>(&self, state: StateId, rng: &mut R) -> f64 {
        let bound = self.bound_for(state);
        if bound == 0.0 {
            return 1.0;
        }
        match self.mode {
            VariationMode::TruncatedGaussian => {
                let sigma = bound * self.sigma_fraction;
                loop {
                    let z: f64 = rng.sample(StandardNormal);
                    let d = z * sigma;
                    if d.abs() <= bound {
                        return 1.0 + d;
                    }
                }
            }
            VariationMode::UniformAtBound => {
                if rng.random::<bool>() {
                    1.0 + bound
                } else {
                    1.0 - bound
                }
            }
        }
    }
}

/// Fixed per-device variation: one read-current factor per state, plus the
/// model-parameter record the sample stands for.
#[derive(Clone, Debug, PartialEq)]
pub struct D2dSample {
    pub multipliers: [f64; 7],
    pub params: PhysicalModelParams,
}

impl D2dSample {
    pub fn nominal(params: PhysicalModelParams) -> Self {
        D2dSample {
            multipliers: [1.0; 7],
            params,
        }
    }

    pub fn multiplier(&self, state: StateId) -> f64 {
        self.multipliers[state.index()]
    }
}

pub fn sample_d2d(
    params: &PhysicalModelParams,
    profile: &VariationProfile,
    seed: u64,
) -> D2dSample {
    let mut sample = D2dSample::nominal(params.clone());
    if !profile.d2d_enabled {
        return sample;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive_seed(seed, &[seed::STREAM_D2D]));
    for s in StateId::ALL {
        sample.multipliers[s.index()] = profile.draw_multiplier(s, &mut rng);
    }
    sample
}

/// One 1T1R cell. Single owner; the C2C stream lives with the cell so reads are
/// reproducible regardless of how cells are scheduled.
#[derive(Clone, Debug)]
pub struct CellDevice {
    state: StateId,
    reset_exposure_ns: f64,
    formed: bool,
    d2d: D2dSample,
    c2c_rng: ChaCha8Rng,
}

impl CellDevice {
    /// A pristine (never SET) cell.
    pub fn new(d2d: D2dSample, c2c_seed: u64) -> Self {
        CellDevice {
            state: StateId::S0,
            reset_exposure_ns: 0.0,
            formed: false,
            d2d,
            c2c_rng: ChaCha8Rng::seed_from_u64(seed::derive_seed(c2c_seed, &[seed::STREAM_C2C])),
        }
    }

    pub fn nominal(c2c_seed: u64) -> Self {
        Self::new(D2dSample::nominal(PhysicalModelParams::default()), c2c_seed)
    }

    pub fn state(&self) -> StateId {
        self.state
    }

    pub fn reset_exposure_ns(&self) -> f64 {
        self.reset_exposure_ns
    }

    pub fn is_formed(&self) -> bool {
        self.formed
    }

    pub fn d2d(&self) -> &D2dSample {
        &self.d2d
    }

    pub fn apply_set(&mut self, table: &StateTable, pulse: &PulseSpec) -> Result<()> {
        pulse.validate()?;
        if !same_volts(pulse.amplitude_v, V_SET) {
            return Err(Error::WrongAmplitude {
                got: pulse.amplitude_v,
                expected: V_SET,
            });
        }
        if pulse.width_ns < table.set_width_ns() {
            return Err(Error::PulseTooShort {
                width_ns: pulse.width_ns,
                min_ns: table.set_width_ns(),
            });
        }
        // Longer SET pulses clamp to S0.
        self.state = StateId::S0;
        self.reset_exposure_ns = 0.0;
        self.formed = true;
        Ok(())
    }

    pub fn apply_reset(&mut self, table: &StateTable, pulse: &PulseSpec) -> Result<()> {
        pulse.validate()?;
        if !same_volts(pulse.amplitude_v, V_FIXED) {
            return Err(Error::WrongAmplitude {
                got: pulse.amplitude_v,
                expected: V_FIXED,
            });
        }
        if !self.formed {
            return Err(Error::NeverFormed);
        }
        self.reset_exposure_ns += pulse.width_ns;
        self.state = table.nominal_state_for_exposure(self.reset_exposure_ns);
        Ok(())
    }

    /// Dispatches on amplitude: SET for `V_SET`, RESET for `V_FIXED`.
    pub fn apply_pulse(&mut self, table: &StateTable, pulse: &PulseSpec) -> Result<()> {
        if same_volts(pulse.amplitude_v, V_SET) {
            self.apply_set(table, pulse)
        } else {
            self.apply_reset(table, pulse)
        }
    }

    /// Sensed current in µA. Leaves state and exposure untouched; only the C2C
    /// stream advances.
    pub fn read_current(
        &mut self,
        table: &StateTable,
        v_read: f64,
        profile: &VariationProfile,
    ) -> Result<f64> {
        if !same_volts(v_read, V_READ) {
            return Err(Error::WrongAmplitude {
                got: v_read,
                expected: V_READ,
            });
        }
        let mut current = table.current_ua(self.state) * self.d2d.multiplier(self.state);
        if profile.c2c_enabled {
            current *= profile.draw_multiplier(self.state, &mut self.c2c_rng);
        }
        Ok(current)
    }
}
