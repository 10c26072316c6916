//! Two-action Krinsky learning automaton on a single cell.
//!
//! Action A owns S1..S3 and action B owns S4..S6, with S1 and S4 innermost.
//! A reward jumps to the innermost state of the current action. A penalty
//! steps one state outward along S1→S2→S3→S4→S5→S6→S1, so only S3 and S6
//! switch action on a single penalty.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controller::Controller;
use crate::crossbar::{Crossbar, Selection};
use crate::device::StateId;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Action {
    A,
    B,
}

/// Environment response: β = 0 rewards, β = 1 penalizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Beta {
    Reward,
    Penalty,
}

impl Beta {
    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(Beta::Reward),
            1 => Ok(Beta::Penalty),
            b => Err(Error::InvalidInput(b as f64)),
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Beta::Reward => 0,
            Beta::Penalty => 1,
        }
    }
}

pub fn action_of(state: StateId) -> Result<Action> {
    match state.level() {
        1..=3 => Ok(Action::A),
        4..=6 => Ok(Action::B),
        _ => Err(Error::InvalidState(format!("{state} has no action"))),
    }
}

/// Next-state tables indexed by `level - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrinskyRules {
    pub reward: [StateId; 6],
    pub penalty: [StateId; 6],
}

impl Default for KrinskyRules {
    fn default() -> Self {
        use StateId as S;
        KrinskyRules {
            reward: [S::S1, S::S1, S::S1, S::S4, S::S4, S::S4],
            penalty: [S::S2, S::S3, S::S4, S::S5, S::S6, S::S1],
        }
    }
}

impl KrinskyRules {
    pub fn next(&self, state: StateId, beta: Beta) -> Result<StateId> {
        if !state.is_resting() {
            return Err(Error::InvalidState(format!(
                "{state} is not a Krinsky state"
            )));
        }
        let i = state.index() - 1;
        Ok(match beta {
            Beta::Reward => self.reward[i],
            Beta::Penalty => self.penalty[i],
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .reward
            .iter()
            .chain(&self.penalty)
            .any(|s| !s.is_resting())
        {
            return Err(Error::Config("Krinsky rules may only target S1..S6".into()));
        }
        Ok(())
    }
}

pub fn krinsky_next(state: StateId, beta: Beta) -> Result<StateId> {
    KrinskyRules::default().next(state, beta)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrinskyEnvironment {
    /// P(β = 0 | action A)
    pub reward_a: f64,
    /// P(β = 0 | action B)
    pub reward_b: f64,
}

impl KrinskyEnvironment {
    pub fn validate(&self) -> Result<()> {
        for p in [self.reward_a, self.reward_b] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!(
                    "reward probability {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn reward_probability(&self, action: Action) -> f64 {
        match action {
            Action::A => self.reward_a,
            Action::B => self.reward_b,
        }
    }

    /// One environment response. Consumes exactly one uniform draw.
    pub fn respond<R: Rng + ?Sized>(&self, action: Action, rng: &mut R) -> Beta {
        if rng.random::<f64>() < self.reward_probability(action) {
            Beta::Reward
        } else {
            Beta::Penalty
        }
    }

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KrinskyStep {
    pub state: StateId,
    pub action: Action,
    pub beta: Beta,
    pub next: StateId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrinskyTrajectory {
    pub start: StateId,
    pub steps: Vec<KrinskyStep>,
}

impl KrinskyTrajectory {
    /// Visited states, starting state first.
    pub fn states(&self) -> Vec<StateId> {
        std::iter::once(self.start)
            .chain(self.steps.iter().map(|s| s.next))
            .collect()
    }

    pub fn fraction_choosing(&self, action: Action) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        let n = self.steps.iter().filter(|s| s.action == action).count();
        n as f64 / self.steps.len() as f64
    }
}

fn check_run(env: &KrinskyEnvironment, rules: &KrinskyRules, steps: usize) -> Result<()> {
    if steps == 0 {
        return Err(Error::Config("steps must be at least 1".into()));
    }
    env.validate()?;
    rules.validate()
}

/// The update rules evaluated in software, with the same environment stream
/// convention as [`run_krinsky`].
pub fn simulate_krinsky_rules(
    start: StateId,
    env: &KrinskyEnvironment,
    rules: &KrinskyRules,
    steps: usize,
    seed: u64,
) -> Result<KrinskyTrajectory> {
    check_run(env, rules, steps)?;
    let mut rng = KrinskyEnvironment::rng(seed);
    let mut state = start;
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let action = action_of(state)?;
        let beta = env.respond(action, &mut rng);
        let next = rules.next(state, beta)?;
        out.push(KrinskyStep {
            state,
            action,
            beta,
            next,
        });
        state = next;
    }
    Ok(KrinskyTrajectory { start, steps: out })
}

/// Runs the automaton on the selected cell: each step reads the state through
/// a read cycle, picks the action, samples β and writes the next state.
pub fn run_krinsky(
    ctl: &mut Controller,
    xbar: &mut Crossbar,
    sel: &Selection,
    env: &KrinskyEnvironment,
    rules: &KrinskyRules,
    steps: usize,
    seed: u64,
) -> Result<KrinskyTrajectory> {
    check_run(env, rules, steps)?;
    let mut rng = KrinskyEnvironment::rng(seed);
    let mut out = Vec::with_capacity(steps);
    let mut start = None;
    for _ in 0..steps {
        let (state, _) = ctl.execute_read_cycle(xbar, sel)?;
        start.get_or_insert(state);
        let action = action_of(state)?;
        let beta = env.respond(action, &mut rng);
        let next = rules.next(state, beta)?;
        ctl.write_from(xbar, sel, state, next)?;
        out.push(KrinskyStep {
            state,
            action,
            beta,
            next,
        });
    }
    Ok(KrinskyTrajectory {
        start: start.unwrap_or(StateId::S1),
        steps: out,
    })
}
