//! Intrinsic curiosity module baseline: forward-dynamics prediction
//! error in embedding space, embedding shaped by the inverse loss.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::ACTION_COUNT;
use crate::nn::{one_hot_batch, Adam, Graph, Param};
use crate::seeding::mix_seed;

use super::nets::{EmbeddingNet, ForwardNet, InverseNet};
use super::{IntrinsicError, LossReport, TransitionsView};

pub struct IcmModule {
    embed: EmbeddingNet,
    inverse: InverseNet,
    forward: ForwardNet,
    opt: Adam,
}

impl IcmModule {
    pub fn new(seed: u64, lr: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0, 0x1c3));
        let embed = EmbeddingNet::new("icm", &mut rng);
        let inverse = InverseNet::new("icm", &mut rng);
        let forward = ForwardNet::new("icm", &mut rng);
        let mut params = embed.params();
        params.extend(inverse.params());
        params.extend(forward.params());
        IcmModule { opt: Adam::new(params, lr), embed, inverse, forward }
    }

    /// Per-step reward `0.5 * ||phi_hat(s') - phi(s')||^2`.
    pub fn rewards(&self, view: &TransitionsView) -> Result<Vec<f64>, IntrinsicError> {
        view.validate()?;
        let mut g = Graph::new();
        let obs = g.leaf(view.obs_tensor())?;
        let obs_next = g.leaf(view.next_obs_tensor())?;
        let phi_s = self.embed.forward(&mut g, obs)?;
        let phi_n = self.embed.forward(&mut g, obs_next)?;
        let actions = g.leaf(one_hot_batch(view.actions, ACTION_COUNT))?;
        let phi_hat = self.forward.forward(&mut g, phi_s, actions)?;

        let hat = g.value(phi_hat);
        let phi = g.value(phi_n);
        let out = (0..hat.rows())
            .map(|r| {
                hat.row(r)
                    .iter()
                    .zip(phi.row(r))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    * 0.5
            })
            .collect();
        Ok(out)
    }

    /// One Adam step minimizing `L_F + L_I`. The forward branch sees
    /// detached embeddings, so the representation is shaped only by the
    /// inverse loss.
    pub fn update(&mut self, view: &TransitionsView) -> Result<LossReport, IntrinsicError> {
        view.validate()?;
        let mut g = Graph::new();
        let obs = g.leaf(view.obs_tensor())?;
        let obs_next = g.leaf(view.next_obs_tensor())?;
        let phi_s = self.embed.forward(&mut g, obs)?;
        let phi_n = self.embed.forward(&mut g, obs_next)?;
        let logits = self.inverse.forward(&mut g, phi_s, phi_n)?;
        let l_inv = g.cross_entropy(logits, view.actions)?;

        let phi_s_det = g.detach(phi_s)?;
        let phi_n_det = g.detach(phi_n)?;
        let actions = g.leaf(one_hot_batch(view.actions, ACTION_COUNT))?;
        let phi_hat = self.forward.forward(&mut g, phi_s_det, actions)?;
        let diff = g.sub(phi_hat, phi_n_det)?;
        let sq = g.sq_norm_rows_mean(diff)?;
        let l_fwd = g.scale(sq, 0.5)?;

        let loss = g.add(l_inv, l_fwd)?;
        let inverse = g.value(l_inv).scalar_value();
        let forward = g.value(l_fwd).scalar_value();
        self.opt.zero_grad();
        g.backward(loss)?;
        self.opt.step()?;
        Ok(LossReport { recon: forward, kl: 0.0, inverse })
    }

    pub fn params(&self) -> Vec<Param> {
        let mut p = self.embed.params();
        p.extend(self.inverse.params());
        p.extend(self.forward.params());
        p
    }
}
