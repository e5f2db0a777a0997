//! Curiosity-driven reinforcement-learning lab.
//!
//! Building blocks: a colored-noise generator with spectral
//! verification tooling, a small reverse-mode autodiff core, seedable
//! gridworld environments with Noisy-TV and sticky-action wrappers,
//! intrinsic-reward modules (temporally correlated latent exploration,
//! ICM, RND), a dual-value-head PPO learner, and the experiment driver
//! that ties them together behind a CLI.

pub mod env;
pub mod noise;
pub mod nn;
pub mod seeding;
