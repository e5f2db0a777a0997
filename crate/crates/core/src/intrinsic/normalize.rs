//! Intrinsic-reward normalization by running return deviation.
//!
//! Rewards are divided by the running standard deviation of the
//! discounted intrinsic returns (no mean subtraction); the per-env
//! return accumulators are never reset, matching the non-episodic
//! treatment of the intrinsic stream.

/// Floor applied to the return standard deviation.
const STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct RewardNormalizer {
    gamma: f64,
    accum: Vec<f64>,
    count: f64,
    mean: f64,
    m2: f64,
}

impl RewardNormalizer {
    pub fn new(gamma: f64, n_envs: usize) -> Self {
        RewardNormalizer { gamma, accum: vec![0.0; n_envs], count: 0.0, mean: 0.0, m2: 0.0 }
    }

    /// Running (population) standard deviation of observed returns.
    pub fn std(&self) -> f64 {
        if self.count < 1.0 {
            return STD_FLOOR;
        }
        (self.m2 / self.count).sqrt().max(STD_FLOOR)
    }

    /// Update statistics with a rollout of rewards laid out `[k, e]`
    /// (time-major), then divide every reward by the running std.
    pub fn normalize(&mut self, rewards: &[f64], k: usize, n_envs: usize) -> Vec<f64> {
        assert_eq!(rewards.len(), k * n_envs, "reward layout mismatch");
        assert_eq!(self.accum.len(), n_envs, "env count changed");
        for t in 0..k {
            for e in 0..n_envs {
                let r = rewards[t * n_envs + e];
                self.accum[e] = self.gamma * self.accum[e] + r;
                self.push(self.accum[e]);
            }
        }
        let inv = 1.0 / self.std();
        rewards.iter().map(|r| r * inv).collect()
    }

    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed-form oracle: with a constant stream c the accumulator is
    /// R_t = c (1 - gamma^t) / (1 - gamma); the normalizer must divide
    /// by the population std of exactly those values.
    #[test]
    fn constant_stream_matches_geometric_series_oracle() {
        let gamma = 0.99;
        let c = 0.7;
        let k = 64;
        let batches = 40;
        let mut norm = RewardNormalizer::new(gamma, 1);
        let mut last = Vec::new();
        for _ in 0..batches {
            last = norm.normalize(&vec![c; k], k, 1);
        }

        // Oracle: enumerate the returns independently.
        let total = k * batches;
        let returns: Vec<f64> =
            (1..=total).map(|t| c * (1.0 - gamma.powi(t as i32)) / (1.0 - gamma)).collect();
        let mean = returns.iter().sum::<f64>() / total as f64;
        let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / total as f64;
        let expect = c / var.sqrt();

        let got = *last.last().unwrap();
        assert!(
            (got - expect).abs() < 1e-9,
            "normalized constant {got} vs oracle {expect}"
        );
        assert!(got > 0.0);
    }

    #[test]
    fn first_batch_divides_by_its_own_return_std() {
        let gamma = 0.5;
        let rewards = vec![1.0, 2.0, 3.0, 4.0];
        let mut norm = RewardNormalizer::new(gamma, 1);
        let out = norm.normalize(&rewards, 4, 1);

        // Returns: 1, 2.5, 4.25, 6.125 -- their population std.
        let rets = [1.0, 2.5, 4.25, 6.125];
        let mean: f64 = rets.iter().sum::<f64>() / 4.0;
        let std = (rets.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / 4.0).sqrt();
        for (o, r) in out.iter().zip(&rewards) {
            assert!((o - r / std).abs() < 1e-12);
        }
    }

    #[test]
    fn all_zero_rewards_stay_zero() {
        let mut norm = RewardNormalizer::new(0.99, 2);
        let out = norm.normalize(&vec![0.0; 8], 4, 2);
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn accumulators_are_per_env() {
        let mut norm = RewardNormalizer::new(1.0, 2);
        // Env 0 gets 1s, env 1 gets 0s; accumulators must not mix.
        let rewards = vec![1.0, 0.0, 1.0, 0.0];
        norm.normalize(&rewards, 2, 2);
        assert_eq!(norm.accum, vec![2.0, 0.0]);
    }
}
