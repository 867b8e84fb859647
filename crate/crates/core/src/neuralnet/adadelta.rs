//! Adadelta with a global rate multiplier.
//!
//! Canonical Adadelta has no learning rate; the `rate` here scales the
//! computed update, which is the only reading that gives the configured
//! 0.12 a role. Per coordinate:
//!
//! ```text
//! E[g²]  ← ρ E[g²] + (1-ρ) g²
//! Δ      = -rate · sqrt(E[Δx²]+ε) / sqrt(E[g²]+ε) · g
//! E[Δx²] ← ρ E[Δx²] + (1-ρ) Δ²
//! x      ← x + Δ
//! ```

use serde::{Deserialize, Serialize};

use super::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdadeltaConfig {
    /// Decay for both running averages.
    pub rho: f64,
    pub eps: f64,
    /// Global scale on the update.
    pub rate: f64,
}

impl Default for AdadeltaConfig {
    fn default() -> Self {
        AdadeltaConfig {
            rho: 0.95,
            eps: 1e-6,
            rate: 0.12,
        }
    }
}

/// One coordinate-wise update over a flat slice pair.
pub fn adadelta_update(cfg: AdadeltaConfig, eg2: &mut [f64], ex2: &mut [f64], params: &mut [f64], grads: &[f64]) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(params.len(), eg2.len());
    debug_assert_eq!(params.len(), ex2.len());
    for i in 0..params.len() {
        let g = grads[i];
        eg2[i] = cfg.rho * eg2[i] + (1.0 - cfg.rho) * g * g;
        let delta = -cfg.rate * ((ex2[i] + cfg.eps).sqrt() / (eg2[i] + cfg.eps).sqrt()) * g;
        ex2[i] = cfg.rho * ex2[i] + (1.0 - cfg.rho) * delta * delta;
        params[i] += delta;
    }
}

/// Running averages for a fixed list of parameter slots. A slot is one
/// flat tensor; the trainer keeps one state for the model (slots = the
/// canonical tensor list) and one for the sense table (one slot per sense).
#[derive(Debug, Clone, PartialEq)]
pub struct AdadeltaState {
    cfg: AdadeltaConfig,
    eg2: Vec<Vec<f64>>,
    ex2: Vec<Vec<f64>>,
}

impl AdadeltaState {
    pub fn new(cfg: AdadeltaConfig, slot_lens: impl IntoIterator<Item = usize>) -> Self {
        let eg2: Vec<Vec<f64>> = slot_lens.into_iter().map(|n| vec![0.0; n]).collect();
        let ex2 = eg2.clone();
        AdadeltaState { cfg, eg2, ex2 }
    }

    /// Slots aligned with `p.tensor_slices()`.
    pub fn for_model(cfg: AdadeltaConfig, p: &ModelParams) -> Self {
        Self::new(cfg, p.tensor_slices().iter().map(|(_, s)| s.len()))
    }

    /// Rebuild from checkpointed accumulators.
    pub fn from_parts(cfg: AdadeltaConfig, eg2: Vec<Vec<f64>>, ex2: Vec<Vec<f64>>) -> Self {
        assert_eq!(eg2.len(), ex2.len());
        AdadeltaState { cfg, eg2, ex2 }
    }

    pub fn config(&self) -> AdadeltaConfig {
        self.cfg
    }

    pub fn n_slots(&self) -> usize {
        self.eg2.len()
    }

    pub fn slot(&self, i: usize) -> (&[f64], &[f64]) {
        (&self.eg2[i], &self.ex2[i])
    }

    /// Update one slot in place.
    pub fn step(&mut self, slot: usize, params: &mut [f64], grads: &[f64]) {
        adadelta_update(self.cfg, &mut self.eg2[slot], &mut self.ex2[slot], params, grads);
    }

    /// Update every model tensor from a congruent gradient container.
    pub fn step_model(&mut self, params: &mut ModelParams, grads: &ModelParams) {
        let grad_slices = grads.tensor_slices();
        for (slot, (_, p)) in params.tensor_slices_mut().into_iter().enumerate() {
            adadelta_update(self.cfg, &mut self.eg2[slot], &mut self.ex2[slot], p, grad_slices[slot].1);
        }
    }
}
