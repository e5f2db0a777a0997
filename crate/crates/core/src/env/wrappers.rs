//! Noise-source wrappers: Noisy TV and sticky actions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::{Action, Env, StepResult};
use super::obs::Observation;
use super::EnvError;
use crate::seeding::mix_seed;

const NOISY_TV_SALT: u64 = 0x6e74;
const STICKY_SALT: u64 = 0x7374;

/// Action-dependent noise source: whenever the agent selects `done`,
/// the returned observation is replaced by a fresh uniform-random
/// valid one-hot pattern. Dynamics, rewards and termination are
/// untouched, and the noise lasts exactly one step.
pub struct NoisyTvWrapper<E: Env> {
    inner: E,
    rng: ChaCha8Rng,
}

impl<E: Env> NoisyTvWrapper<E> {
    pub fn new(inner: E) -> Self {
        NoisyTvWrapper { inner, rng: ChaCha8Rng::seed_from_u64(0) }
    }
}

impl<E: Env> Env for NoisyTvWrapper<E> {
    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError> {
        self.rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0, NOISY_TV_SALT));
        self.inner.reset(seed)
    }

    fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        let mut result = self.inner.step(action)?;
        if action == Action::Done {
            result.observation = Observation::random_noise(&mut self.rng);
        }
        Ok(result)
    }

    fn agent_pos(&self) -> (usize, usize) {
        self.inner.agent_pos()
    }

    fn size(&self) -> (usize, usize) {
        self.inner.size()
    }
}

/// With probability `p`, the previous executed action repeats instead
/// of the requested one. The first step after a reset always executes
/// the requested action.
pub struct StickyWrapper<E: Env> {
    inner: E,
    p: f64,
    prev: Option<Action>,
    rng: ChaCha8Rng,
    sticky_events: u64,
}

impl<E: Env> StickyWrapper<E> {
    pub fn new(inner: E, p: f64) -> Result<Self, EnvError> {
        if !(0.0..1.0).contains(&p) {
            return Err(EnvError::InvalidStickyProbability(p));
        }
        Ok(StickyWrapper { inner, p, prev: None, rng: ChaCha8Rng::seed_from_u64(0), sticky_events: 0 })
    }

    /// Number of steps where the previous action was repeated.
    pub fn sticky_events(&self) -> u64 {
        self.sticky_events
    }
}

impl<E: Env> Env for StickyWrapper<E> {
    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError> {
        self.rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0, STICKY_SALT));
        self.prev = None;
        self.inner.reset(seed)
    }

    fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        let executed = match self.prev {
            Some(prev) if self.p > 0.0 && self.rng.gen::<f64>() < self.p => {
                self.sticky_events += 1;
                prev
            }
            _ => action,
        };
        self.prev = Some(executed);
        self.inner.step(executed)
    }

    fn agent_pos(&self) -> (usize, usize) {
        self.inner.agent_pos()
    }

    fn size(&self) -> (usize, usize) {
        self.inner.size()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::grid::{EnvId, GridWorld};

    #[test]
    fn noisy_tv_passthrough_for_other_actions() {
        let mut plain = GridWorld::new(EnvId::Empty8);
        let mut wrapped = NoisyTvWrapper::new(GridWorld::new(EnvId::Empty8));
        plain.reset(5).unwrap();
        wrapped.reset(5).unwrap();
        for a in [Action::Forward, Action::Left, Action::Forward, Action::Right] {
            let rp = plain.step(a).unwrap();
            let rw = wrapped.step(a).unwrap();
            assert_eq!(rp.observation, rw.observation);
            assert_eq!(rp.reward, rw.reward);
        }
    }

    #[test]
    fn noisy_tv_replaces_observation_on_done() {
        let mut plain = GridWorld::new(EnvId::Empty8);
        let mut wrapped = NoisyTvWrapper::new(GridWorld::new(EnvId::Empty8));
        plain.reset(5).unwrap();
        wrapped.reset(5).unwrap();
        let rp = plain.step(Action::Done).unwrap();
        let rw = wrapped.step(Action::Done).unwrap();
        assert_ne!(rp.observation, rw.observation);
        assert!(rw.observation.one_hot_valid());
        assert_eq!(rp.reward, rw.reward);
        assert_eq!(rp.terminated, rw.terminated);

        // Two consecutive noise observations differ (collision odds are
        // below 2^-40 in an 11^49 pattern space).
        let rw2 = wrapped.step(Action::Done).unwrap();
        assert_ne!(rw.observation, rw2.observation);

        // The noise lasts exactly one step.
        let rp3 = plain.step(Action::Left).unwrap();
        let rw3 = wrapped.step(Action::Left).unwrap();
        assert_eq!(rp3.observation, rw3.observation);
    }

    #[test]
    fn noisy_tv_never_touches_rewards_or_termination() {
        let mut plain = GridWorld::new(EnvId::Empty8);
        let mut wrapped = NoisyTvWrapper::new(GridWorld::new(EnvId::Empty8));
        plain.reset(9).unwrap();
        wrapped.reset(9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..256 {
            let a = Action::from_index(rng.gen_range(0..7)).unwrap();
            match (plain.step(a), wrapped.step(a)) {
                (Ok(rp), Ok(rw)) => {
                    assert_eq!(rp.reward, rw.reward);
                    assert_eq!(rp.terminated, rw.terminated);
                    assert_eq!(rp.truncated, rw.truncated);
                    if rp.terminated || rp.truncated {
                        break;
                    }
                }
                (Err(_), Err(_)) => break,
                _ => panic!("wrapper diverged from base env"),
            }
        }
    }

    #[test]
    fn sticky_zero_probability_is_identity() {
        let mut plain = GridWorld::new(EnvId::Empty8);
        let mut wrapped = StickyWrapper::new(GridWorld::new(EnvId::Empty8), 0.0).unwrap();
        plain.reset(2).unwrap();
        wrapped.reset(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let a = Action::from_index(rng.gen_range(0..7)).unwrap();
            let rp = plain.step(a).unwrap();
            let rw = wrapped.step(a).unwrap();
            assert_eq!(rp.observation, rw.observation);
            if rp.terminated || rp.truncated {
                break;
            }
        }
        assert_eq!(wrapped.sticky_events(), 0);
    }

    #[test]
    fn sticky_rejects_invalid_probability() {
        assert!(StickyWrapper::new(GridWorld::new(EnvId::Empty8), 1.0).is_err());
        assert!(StickyWrapper::new(GridWorld::new(EnvId::Empty8), -0.1).is_err());
    }

    #[test]
    fn first_step_after_reset_never_sticky() {
        let mut wrapped = StickyWrapper::new(GridWorld::new(EnvId::Empty8), 0.9).unwrap();
        for seed in 0..20u64 {
            wrapped.reset(seed).unwrap();
            let before = wrapped.sticky_events();
            wrapped.step(Action::Left).unwrap();
            assert_eq!(wrapped.sticky_events(), before);
        }
    }

    /// Binomial check: every step with a previous action is a
    /// Bernoulli(p) repeat trial; the empirical count over 1e5 eligible
    /// steps must sit within 3 sigma of the mean.
    #[test]
    fn sticky_rate_matches_p() {
        let n = 100_000u64;
        let p = 0.25;
        let mut wrapped = StickyWrapper::new(GridWorld::new(EnvId::Empty16), p).unwrap();
        let mut eligible = 0u64;
        let mut toggle = false;
        let mut episode = 0u64;
        while eligible < n {
            wrapped.reset(episode).unwrap();
            episode += 1;
            let mut first = true;
            loop {
                let a = if toggle { Action::Left } else { Action::Right };
                toggle = !toggle;
                let r = wrapped.step(a).unwrap();
                if !first {
                    eligible += 1;
                }
                first = false;
                if r.terminated || r.truncated || eligible >= n {
                    break;
                }
            }
        }
        let events = wrapped.sticky_events() as f64;
        let mean = eligible as f64 * p;
        let sigma = (eligible as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (events - mean).abs() < 3.0 * sigma,
            "sticky events {events} outside 3 sigma of {mean} (sigma {sigma})"
        );
    }
}
