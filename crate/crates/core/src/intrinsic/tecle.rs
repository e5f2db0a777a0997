//! Temporally correlated latent exploration.
//!
//! An action-conditioned CVAE over the embedded state: the encoder maps
//! (phi(s'), a) to a latent Gaussian, the decoder reconstructs phi(s')
//! from (z, a), and the per-step intrinsic reward is the L2 distance
//! between reconstruction and embedding. Rewards sample z with
//! temporally correlated noise (one colored sequence per latent
//! dimension); training uses fresh white noise so the variational
//! objective keeps its usual form, making parameter updates independent
//! of the noise color.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::ACTION_COUNT;
use crate::nn::{one_hot_batch, Adam, Graph, Param, Tensor};
use crate::seeding::mix_seed;

use super::nets::{Decoder, EmbeddingNet, Encoder, InverseNet, LATENT_DIM};
use super::{row_l2_diff, ColoredNoiseBlock, IntrinsicError, LossReport, TransitionsView};

pub struct TecleModule {
    pub beta: f64,
    embed: EmbeddingNet,
    inverse: InverseNet,
    encoder: Encoder,
    decoder: Decoder,
    opt_cvae: Adam,
    opt_inverse: Adam,
    train_rng: ChaCha8Rng,
}

impl TecleModule {
    pub fn new(beta: f64, seed: u64, lr: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0, 0x7ec1e));
        let embed = EmbeddingNet::new("tecle", &mut rng);
        let inverse = InverseNet::new("tecle", &mut rng);
        let encoder = Encoder::new("tecle", &mut rng);
        let decoder = Decoder::new("tecle", &mut rng);
        let mut cvae_params = encoder.params();
        cvae_params.extend(decoder.params());
        let mut inv_params = embed.params();
        inv_params.extend(inverse.params());
        // The training-noise stream depends on the seed only, never on
        // beta: the color shapes rewards, not parameter updates.
        let train_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 1, 0x7ec1e));
        TecleModule {
            beta,
            opt_cvae: Adam::new(cvae_params, lr),
            opt_inverse: Adam::new(inv_params, lr),
            embed,
            inverse,
            encoder,
            decoder,
            train_rng,
        }
    }

    /// Per-step rewards `||phi_hat - phi(s')||_2` with z sampled from
    /// the pre-generated colored noise. Read-only on parameters.
    pub fn rewards(
        &self,
        view: &TransitionsView,
        noise: &ColoredNoiseBlock,
    ) -> Result<Vec<f64>, IntrinsicError> {
        view.validate()?;
        if noise.steps() < view.k {
            return Err(IntrinsicError::NoiseTooShort { have: noise.steps(), need: view.k });
        }
        if noise.dims() != LATENT_DIM {
            return Err(IntrinsicError::NoiseDims { have: noise.dims(), need: LATENT_DIM });
        }
        let eps = noise.expand_rows(view.k, view.n_envs);
        self.rewards_with_eps(view, eps)
    }

    /// Reward path with an explicit noise matrix `[B, LATENT_DIM]`.
    pub(crate) fn rewards_with_eps(
        &self,
        view: &TransitionsView,
        eps: Tensor,
    ) -> Result<Vec<f64>, IntrinsicError> {
        let mut g = Graph::new();
        let obs_next = g.leaf(view.next_obs_tensor())?;
        let phi = self.embed.forward(&mut g, obs_next)?;
        let actions = g.leaf(one_hot_batch(view.actions, ACTION_COUNT))?;
        let (mu, lv) = self.encoder.forward(&mut g, phi, actions)?;
        let half_lv = g.scale(lv, 0.5)?;
        let sigma = g.exp(half_lv)?;
        let eps = g.leaf(eps)?;
        let scaled = g.mul(eps, sigma)?;
        let z = g.add(mu, scaled)?;
        let phi_hat = self.decoder.forward(&mut g, z, actions)?;
        Ok(row_l2_diff(g.value(phi_hat), g.value(phi)))
    }

    /// One Adam step on the CVAE (reconstruction + KL, embedding
    /// detached) followed by one Adam step on the embedding and inverse
    /// nets (inverse cross-entropy).
    pub fn update(&mut self, view: &TransitionsView) -> Result<LossReport, IntrinsicError> {
        view.validate()?;
        let batch = view.batch();
        let one_hot = one_hot_batch(view.actions, ACTION_COUNT);

        // Embed targets with the current parameters, then treat them as
        // constants: the CVAE never shapes the embedding.
        let phi_const = {
            let mut g = Graph::new();
            let obs_next = g.leaf(view.next_obs_tensor())?;
            let phi = self.embed.forward(&mut g, obs_next)?;
            g.value(phi).clone()
        };

        let mut g = Graph::new();
        let phi_in = g.leaf(phi_const.clone())?;
        let actions = g.leaf(one_hot.clone())?;
        let (mu, lv) = self.encoder.forward(&mut g, phi_in, actions)?;
        let half_lv = g.scale(lv, 0.5)?;
        let sigma = g.exp(half_lv)?;
        let eps = g.leaf(Tensor::randn(&[batch, LATENT_DIM], &mut self.train_rng))?;
        let scaled = g.mul(eps, sigma)?;
        let z = g.add(mu, scaled)?;
        let phi_hat = self.decoder.forward(&mut g, z, actions)?;
        let target = g.leaf(phi_const)?;
        let l_recon = g.bce_mean(phi_hat, target)?;
        let l_kl = g.gaussian_kl_mean(mu, lv)?;
        let loss = g.add(l_recon, l_kl)?;
        let recon = g.value(l_recon).scalar_value();
        let kl = g.value(l_kl).scalar_value();
        self.opt_cvae.zero_grad();
        g.backward(loss)?;
        self.opt_cvae.step()?;

        let mut g = Graph::new();
        let obs = g.leaf(view.obs_tensor())?;
        let obs_next = g.leaf(view.next_obs_tensor())?;
        let phi_s = self.embed.forward(&mut g, obs)?;
        let phi_n = self.embed.forward(&mut g, obs_next)?;
        let logits = self.inverse.forward(&mut g, phi_s, phi_n)?;
        let l_inv = g.cross_entropy(logits, view.actions)?;
        let inverse = g.value(l_inv).scalar_value();
        self.opt_inverse.zero_grad();
        g.backward(l_inv)?;
        self.opt_inverse.step()?;

        Ok(LossReport { recon, kl, inverse })
    }

    /// Inverse cross-entropy on a batch, without updating (diagnostics).
    pub fn inverse_loss(&self, view: &TransitionsView) -> Result<f64, IntrinsicError> {
        view.validate()?;
        let mut g = Graph::new();
        let obs = g.leaf(view.obs_tensor())?;
        let obs_next = g.leaf(view.next_obs_tensor())?;
        let phi_s = self.embed.forward(&mut g, obs)?;
        let phi_n = self.embed.forward(&mut g, obs_next)?;
        let logits = self.inverse.forward(&mut g, phi_s, phi_n)?;
        let l = g.cross_entropy(logits, view.actions)?;
        Ok(g.value(l).scalar_value())
    }

    /// Predicted-action accuracy of the inverse net on a batch.
    pub fn inverse_accuracy(&self, view: &TransitionsView) -> Result<f64, IntrinsicError> {
        view.validate()?;
        let mut g = Graph::new();
        let obs = g.leaf(view.obs_tensor())?;
        let obs_next = g.leaf(view.next_obs_tensor())?;
        let phi_s = self.embed.forward(&mut g, obs)?;
        let phi_n = self.embed.forward(&mut g, obs_next)?;
        let logits = self.inverse.forward(&mut g, phi_s, phi_n)?;
        let lv = g.value(logits);
        let mut hits = 0usize;
        for (r, &a) in view.actions.iter().enumerate() {
            let row = lv.row(r);
            let argmax = row
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
                .unwrap()
                .0;
            if argmax == a {
                hits += 1;
            }
        }
        Ok(hits as f64 / view.actions.len() as f64)
    }

    /// Deterministic embedding of a flat observation batch.
    pub fn embed_batch(&self, obs: &Tensor) -> Result<Tensor, IntrinsicError> {
        let mut g = Graph::new();
        let x = g.leaf(obs.clone())?;
        let phi = self.embed.forward(&mut g, x)?;
        Ok(g.value(phi).clone())
    }

    pub fn params(&self) -> Vec<Param> {
        let mut p = self.embed.params();
        p.extend(self.inverse.params());
        p.extend(self.encoder.params());
        p.extend(self.decoder.params());
        p
    }
}
