//! Networks used by the intrinsic-reward modules.

use rand::Rng;

use crate::env::{ACTION_COUNT, OBS_DIM};
use crate::nn::{Graph, Linear, NodeId, NnError, Param};

/// Width of the shared state representation phi(s).
pub const FEATURE_DIM: usize = 32;
/// Width of the latent space z.
pub const LATENT_DIM: usize = 16;
/// Hidden width of every intrinsic MLP.
pub const HIDDEN_DIM: usize = 64;
/// Clamp bounds for the encoder's log-variance head.
pub const LOG_VAR_MIN: f64 = -8.0;
pub const LOG_VAR_MAX: f64 = 4.0;

/// Shared embedding f: observation -> (0,1)^FEATURE_DIM.
pub struct EmbeddingNet {
    l1: Linear,
    l2: Linear,
}

impl EmbeddingNet {
    pub fn new<R: Rng>(prefix: &str, rng: &mut R) -> Self {
        EmbeddingNet {
            l1: Linear::uniform(&format!("{prefix}.embed.l1"), OBS_DIM, HIDDEN_DIM, rng),
            l2: Linear::uniform(&format!("{prefix}.embed.l2"), HIDDEN_DIM, FEATURE_DIM, rng),
        }
    }

    pub fn forward(&self, g: &mut Graph, obs: NodeId) -> Result<NodeId, NnError> {
        let h = self.l1.forward(g, obs)?;
        let h = g.relu(h)?;
        let z = self.l2.forward(g, h)?;
        g.sigmoid(z)
    }

    pub fn params(&self) -> Vec<Param> {
        let mut p = self.l1.params();
        p.extend(self.l2.params());
        p
    }
}

/// Inverse dynamics g: (phi(s), phi(s')) -> action logits.
pub struct InverseNet {
    l1: Linear,
    l2: Linear,
}

impl InverseNet {
    pub fn new<R: Rng>(prefix: &str, rng: &mut R) -> Self {
        InverseNet {
            l1: Linear::uniform(&format!("{prefix}.inverse.l1"), 2 * FEATURE_DIM, HIDDEN_DIM, rng),
            l2: Linear::uniform(&format!("{prefix}.inverse.l2"), HIDDEN_DIM, ACTION_COUNT, rng),
        }
    }

    pub fn forward(&self, g: &mut Graph, phi_s: NodeId, phi_next: NodeId) -> Result<NodeId, NnError> {
        let x = g.concat_cols(phi_s, phi_next)?;
        let h = self.l1.forward(g, x)?;
        let h = g.relu(h)?;
        self.l2.forward(g, h)
    }

    pub fn params(&self) -> Vec<Param> {
        let mut p = self.l1.params();
        p.extend(self.l2.params());
        p
    }
}

/// Encoder q: (phi(s'), one-hot action) -> (mu, log sigma^2).
pub struct Encoder {
    l1: Linear,
    mu: Linear,
    log_var: Linear,
}

impl Encoder {
    pub fn new<R: Rng>(prefix: &str, rng: &mut R) -> Self {
        let in_dim = FEATURE_DIM + ACTION_COUNT;
        Encoder {
            l1: Linear::uniform(&format!("{prefix}.enc.l1"), in_dim, HIDDEN_DIM, rng),
            mu: Linear::uniform(&format!("{prefix}.enc.mu"), HIDDEN_DIM, LATENT_DIM, rng),
            log_var: Linear::uniform(&format!("{prefix}.enc.log_var"), HIDDEN_DIM, LATENT_DIM, rng),
        }
    }

    /// Returns (mu, log_var) with log_var clamped for stability.
    pub fn forward(
        &self,
        g: &mut Graph,
        phi_next: NodeId,
        action_one_hot: NodeId,
    ) -> Result<(NodeId, NodeId), NnError> {
        let x = g.concat_cols(phi_next, action_one_hot)?;
        let h = self.l1.forward(g, x)?;
        let h = g.relu(h)?;
        let mu = self.mu.forward(g, h)?;
        let lv = self.log_var.forward(g, h)?;
        let lv = g.clamp(lv, LOG_VAR_MIN, LOG_VAR_MAX)?;
        Ok((mu, lv))
    }

    pub fn params(&self) -> Vec<Param> {
        let mut p = self.l1.params();
        p.extend(self.mu.params());
        p.extend(self.log_var.params());
        p
    }
}

/// Decoder p: (z, one-hot action) -> reconstructed phi in (0,1)^FEATURE_DIM.
pub struct Decoder {
    l1: Linear,
    l2: Linear,
}

impl Decoder {
    pub fn new<R: Rng>(prefix: &str, rng: &mut R) -> Self {
        let in_dim = LATENT_DIM + ACTION_COUNT;
        Decoder {
            l1: Linear::uniform(&format!("{prefix}.dec.l1"), in_dim, HIDDEN_DIM, rng),
            l2: Linear::uniform(&format!("{prefix}.dec.l2"), HIDDEN_DIM, FEATURE_DIM, rng),
        }
    }

    pub fn forward(&self, g: &mut Graph, z: NodeId, action_one_hot: NodeId) -> Result<NodeId, NnError> {
        let x = g.concat_cols(z, action_one_hot)?;
        let h = self.l1.forward(g, x)?;
        let h = g.relu(h)?;
        let y = self.l2.forward(g, h)?;
        g.sigmoid(y)
    }

    pub fn params(&self) -> Vec<Param> {
        let mut p = self.l1.params();
        p.extend(self.l2.params());
        p
    }
}

/// Forward dynamics h: (phi(s), one-hot action) -> predicted phi(s').
pub struct ForwardNet {
    l1: Linear,
    l2: Linear,
}

impl ForwardNet {
    pub fn new<R: Rng>(prefix: &str, rng: &mut R) -> Self {
        let in_dim = FEATURE_DIM + ACTION_COUNT;
        ForwardNet {
            l1: Linear::uniform(&format!("{prefix}.fwd.l1"), in_dim, HIDDEN_DIM, rng),
            l2: Linear::uniform(&format!("{prefix}.fwd.l2"), HIDDEN_DIM, FEATURE_DIM, rng),
        }
    }

    pub fn forward(&self, g: &mut Graph, phi_s: NodeId, action_one_hot: NodeId) -> Result<NodeId, NnError> {
        let x = g.concat_cols(phi_s, action_one_hot)?;
        let h = self.l1.forward(g, x)?;
        let h = g.relu(h)?;
        let y = self.l2.forward(g, h)?;
        g.sigmoid(y)
    }

    pub fn params(&self) -> Vec<Param> {
        let mut p = self.l1.params();
        p.extend(self.l2.params());
        p
    }
}

/// Observation -> R^FEATURE_DIM MLP used for both the fixed target and
/// the trained predictor in random network distillation.
pub struct RndNet {
    l1: Linear,
    l2: Linear,
}

impl RndNet {
    pub fn new<R: Rng>(prefix: &str, rng: &mut R) -> Self {
        RndNet {
            l1: Linear::uniform(&format!("{prefix}.l1"), OBS_DIM, HIDDEN_DIM, rng),
            l2: Linear::uniform(&format!("{prefix}.l2"), HIDDEN_DIM, FEATURE_DIM, rng),
        }
    }

    pub fn forward(&self, g: &mut Graph, obs: NodeId) -> Result<NodeId, NnError> {
        let h = self.l1.forward(g, obs)?;
        let h = g.relu(h)?;
        self.l2.forward(g, h)
    }

    pub fn params(&self) -> Vec<Param> {
        let mut p = self.l1.params();
        p.extend(self.l2.params());
        p
    }

    /// Copy another net's parameter values (used in tests).
    pub fn copy_from(&self, other: &RndNet) {
        for (a, b) in self.params().iter().zip(other.params()) {
            a.set_value(b.value());
        }
    }
}
