//! Deterministic tabular MDP with at most 12 states, used to check the
//! learner against exact dynamic programming.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::{Action, EnvError, Environment, Transition, NUM_ACTIONS, NUM_STATES};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicMdp<T> {
    /// `next[s][a]`.
    pub next: Vec<[usize; NUM_ACTIONS]>,
    /// `reward[s][a]`.
    pub reward: Vec<[T; NUM_ACTIONS]>,
    /// States whose value is zero and that end the episode on entry.
    pub absorbing: Vec<bool>,
    /// Fixed start state, or uniform over non-absorbing states when `None`.
    pub start: Option<usize>,
    pub episode_steps: usize,
    state: usize,
    steps: usize,
    started: bool,
}

impl<T: Real> DeterministicMdp<T> {
    pub fn new(
        next: Vec<[usize; NUM_ACTIONS]>,
        reward: Vec<[T; NUM_ACTIONS]>,
        start: Option<usize>,
        episode_steps: usize,
    ) -> Result<Self, EnvError> {
        let n = next.len();
        if n == 0 || n > NUM_STATES || reward.len() != n {
            return Err(EnvError::Config(format!("MDP needs 1..={NUM_STATES} states with matching rewards")));
        }
        if next.iter().flatten().any(|&s| s >= n) || start.is_some_and(|s| s >= n) {
            return Err(EnvError::Config("state index out of range".into()));
        }
        if episode_steps == 0 {
            return Err(EnvError::Config("episode_steps must be >= 1".into()));
        }
        Ok(Self {
            next,
            reward,
            absorbing: vec![false; n],
            start,
            episode_steps,
            state: 0,
            steps: 0,
            started: false,
        })
    }

    /// Two-state chain: `a0` from `s0` moves to `s1` with reward 0, `a0` in
    /// `s1` stays with reward 1; every other action returns to `s0` unpaid.
    pub fn two_state_chain(episode_steps: usize) -> Self {
        let z = T::zero();
        Self::new(
            vec![[1, 0, 0, 0], [1, 0, 0, 0]],
            vec![[z; 4], [T::one(), z, z, z]],
            None,
            episode_steps,
        )
        .expect("valid chain")
    }

    pub fn with_absorbing(mut self, state: usize) -> Self {
        self.absorbing[state] = true;
        self
    }

    pub fn num_states(&self) -> usize {
        self.next.len()
    }
}

impl<T: Real> Environment for DeterministicMdp<T> {
    type Scalar = T;

    fn reset(&mut self, seed: u64) -> usize {
        self.state = match self.start {
            Some(s) => s,
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let open: Vec<usize> = (0..self.num_states()).filter(|&s| !self.absorbing[s]).collect();
                open[rng.gen_range(0..open.len())]
            }
        };
        self.steps = 0;
        self.started = true;
        self.state
    }

    fn step(&mut self, action: Action) -> Result<Transition<T>, EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.steps >= self.episode_steps || self.absorbing[self.state] {
            return Err(EnvError::EpisodeDone);
        }
        let state = self.state;
        let a = action.index();
        let next_state = self.next[state][a];
        self.state = next_state;
        self.steps += 1;
        let terminal = self.absorbing[next_state];
        Ok(Transition {
            state,
            action,
            reward: self.reward[state][a],
            next_state,
            done: terminal || self.steps >= self.episode_steps,
            terminal,
        })
    }
}
