//! Three-phase training.
//!
//! Phase 1 fits the encoder to monosemous senses (targets fixed at their
//! word vectors). Phase 2 widens the objective to every sense and lets
//! gradients flow into the target sense vectors as well. Phase 3 replaces
//! gloss content words with their disambiguated sense vectors as inputs
//! and trains those too; re-assignment happens once at the start of each
//! epoch using the current sense vectors.
//!
//! Batch elements are processed in parallel in fixed-size chunks and
//! reduced in chunk order, so gradients sum in the same order regardless
//! of thread count; sense-table updates are applied by a single writer
//! between batches.

mod init;
mod sense_table;

pub use init::init_sense_embeddings;
pub use sense_table::{Provenance, SenseTable, TagCounts};

use std::collections::{BTreeMap, HashMap};

use ndarray::ArrayView1;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::disambig::{s2c, ContextInstance};
use crate::embeddings::EmbeddingStore;
use crate::exec;
use crate::lexicon::{Lexicon, Token};
use crate::neuralnet::{
    backward, cosine_loss, forward, init_params, AdadeltaConfig, AdadeltaState, CellKind,
    ModelParams,
};
use crate::{Error, Result, Vector};

/// Fixed sub-batch size for parallel gradient computation. Chunk
/// boundaries pin the floating-point summation tree, so results do not
/// depend on the worker count.
const GRAD_CHUNK: usize = 8;

/// Which senses a phase trains on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Monosemous,
    All,
}

/// How gloss tokens are resolved to input vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputMode {
    Word,
    Sense,
}

/// One resolved gloss position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSource {
    Word(Token),
    Sense(String),
}

/// One training example: a sense and its resolved gloss inputs. The
/// target vector is looked up live in the sense table at batch time.
#[derive(Debug, Clone)]
pub struct TrainInstance {
    pub sense_id: String,
    /// Index of the sense's entry in the lexicon.
    pub entry_idx: usize,
    pub inputs: Vec<InputSource>,
}

/// Instances plus the count of glosses that resolved to nothing.
#[derive(Debug, Clone)]
pub struct BuiltInstances {
    pub instances: Vec<TrainInstance>,
    pub dropped_empty: usize,
}

/// Per-epoch sense assignments for sense-mode input resolution:
/// entry index → (gloss position → sense id).
pub type AssignmentMap = HashMap<usize, BTreeMap<usize, String>>;

/// Resolve every in-scope sense's gloss into a training instance.
/// Tokens with no vector are dropped; instances with no tokens left are
/// dropped and counted. Glosses are truncated to `max_tokens`.
pub fn build_instances(
    lex: &Lexicon,
    store: &EmbeddingStore,
    senses: &SenseTable,
    scope: Scope,
    input_mode: InputMode,
    assignments: Option<&AssignmentMap>,
    max_tokens: usize,
) -> BuiltInstances {
    let mut instances = Vec::new();
    let mut dropped = 0usize;

    for (entry_idx, entry) in lex.entries().iter().enumerate() {
        if scope == Scope::Monosemous && !lex.is_monosemous(&entry.lemma) {
            continue;
        }
        let assigned = assignments.and_then(|m| m.get(&entry_idx));
        let mut inputs = Vec::new();
        for (pos, tok) in entry.gloss.iter().take(max_tokens).enumerate() {
            if input_mode == InputMode::Sense {
                if let Some(sid) = assigned.and_then(|m| m.get(&pos)) {
                    if senses.index_of(sid).is_some() {
                        inputs.push(InputSource::Sense(sid.clone()));
                        continue;
                    }
                }
            }
            if store.contains(tok) {
                inputs.push(InputSource::Word(tok.clone()));
            }
        }
        if inputs.is_empty() {
            dropped += 1;
            continue;
        }
        instances.push(TrainInstance {
            sense_id: entry.sense_id.clone(),
            entry_idx,
            inputs,
        });
    }

    if dropped > 0 {
        log::warn!("{dropped} glosses resolved to no input vectors and were dropped");
    }
    BuiltInstances {
        instances,
        dropped_empty: dropped,
    }
}

/// Training hyperparameters. Everything is seeded and deterministic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub cell: CellKind,
    /// Hidden dimension; `None` means the embedding dimension.
    pub hidden_dim: Option<usize>,
    pub epochs_phase1: usize,
    pub epochs_phase2: usize,
    pub epochs_phase3: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Minimum cosine for initializing a sense from its best gloss token.
    pub sim_threshold: f64,
    pub adadelta: AdadeltaConfig,
    pub shuffle: bool,
    pub max_gloss_tokens: usize,
    /// Optional global-norm clip on the model gradient (vanilla RNN
    /// stability); off by default.
    pub clip_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            cell: CellKind::Gru,
            hidden_dim: None,
            epochs_phase1: 20,
            epochs_phase2: 20,
            epochs_phase3: 10,
            batch_size: 64,
            seed: 42,
            sim_threshold: 0.2,
            adadelta: AdadeltaConfig::default(),
            shuffle: true,
            max_gloss_tokens: 64,
            clip_norm: None,
        }
    }
}

/// Everything a checkpoint persists: encoder parameters, sense table, and
/// both optimizer states.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub params: ModelParams,
    pub senses: SenseTable,
    pub model_opt: AdadeltaState,
    /// One slot per sense, aligned with the sense table.
    pub sense_opt: AdadeltaState,
}

/// One line of the training log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStats {
    pub phase: u8,
    pub epoch: usize,
    pub mean_loss: f64,
    pub mean_cos: f64,
    pub instances: usize,
}

/// Proof that a phase-3 epoch re-assigned senses from the table state at
/// that moment: a digest of the assignments, comparable against an
/// external s2c pass over the same table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReassignmentRecord {
    pub epoch: usize,
    pub digest: u64,
    pub n_assigned: usize,
}

/// What one training phase does. The three standard phases are fixed;
/// tests use custom specs to check reduction properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct PhaseSpec {
    number: u8,
    scope: Scope,
    /// Resolve gloss content words to sense vectors (with per-epoch
    /// re-assignment) instead of word vectors.
    sense_inputs: bool,
    /// Let gradients flow into sense vectors.
    updates_senses: bool,
}

impl PhaseSpec {
    fn p1() -> Self {
        PhaseSpec {
            number: 1,
            scope: Scope::Monosemous,
            sense_inputs: false,
            updates_senses: false,
        }
    }

    fn p2() -> Self {
        PhaseSpec {
            number: 2,
            scope: Scope::All,
            sense_inputs: false,
            updates_senses: true,
        }
    }

    fn p3() -> Self {
        PhaseSpec {
            number: 3,
            scope: Scope::All,
            sense_inputs: true,
            updates_senses: true,
        }
    }

    #[cfg(test)]
    pub(crate) fn custom(number: u8, scope: Scope, updates_senses: bool) -> Self {
        PhaseSpec {
            number,
            scope,
            sense_inputs: false,
            updates_senses,
        }
    }
}

pub struct Trainer<'a> {
    lex: &'a Lexicon,
    store: &'a EmbeddingStore,
    cfg: TrainConfig,
    pub state: TrainState,
    reassignments: Vec<ReassignmentRecord>,
    zero_senses_skipped: usize,
}

impl<'a> Trainer<'a> {
    /// Initialize parameters from the seed and sense embeddings from the
    /// initialization heuristic.
    pub fn new(lex: &'a Lexicon, store: &'a EmbeddingStore, cfg: TrainConfig) -> Result<Self> {
        if cfg.batch_size == 0 || cfg.max_gloss_tokens == 0 {
            return Err(Error::Metric(
                "batch_size and max_gloss_tokens must be positive".into(),
            ));
        }
        let dim = store.dim();
        let d_h = cfg.hidden_dim.unwrap_or(dim);
        let params = init_params(cfg.cell, dim, d_h, dim, cfg.seed);
        let senses = init_sense_embeddings(lex, store, cfg.sim_threshold);
        let model_opt = AdadeltaState::for_model(cfg.adadelta, &params);
        let sense_opt = AdadeltaState::new(cfg.adadelta, (0..senses.len()).map(|_| dim));
        Ok(Trainer {
            lex,
            store,
            cfg,
            state: TrainState {
                params,
                senses,
                model_opt,
                sense_opt,
            },
            reassignments: Vec::new(),
            zero_senses_skipped: 0,
        })
    }

    /// Resume from a checkpointed state. Dimensions must match the store.
    pub fn from_state(
        lex: &'a Lexicon,
        store: &'a EmbeddingStore,
        cfg: TrainConfig,
        state: TrainState,
    ) -> Result<Self> {
        if state.params.d_in != store.dim() || state.senses.dim() != store.dim() {
            return Err(Error::DimMismatch {
                expected: store.dim(),
                got: state.params.d_in,
            });
        }
        Ok(Trainer {
            lex,
            store,
            cfg,
            state,
            reassignments: Vec::new(),
            zero_senses_skipped: 0,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn reassignments(&self) -> &[ReassignmentRecord] {
        &self.reassignments
    }

    pub fn zero_senses_skipped(&self) -> usize {
        self.zero_senses_skipped
    }

    pub fn run_phase1(&mut self) -> Result<Vec<EpochStats>> {
        self.run_phase(PhaseSpec::p1(), self.cfg.epochs_phase1)
    }

    pub fn run_phase2(&mut self) -> Result<Vec<EpochStats>> {
        self.run_phase(PhaseSpec::p2(), self.cfg.epochs_phase2)
    }

    pub fn run_phase3(&mut self) -> Result<Vec<EpochStats>> {
        self.run_phase(PhaseSpec::p3(), self.cfg.epochs_phase3)
    }

    #[cfg(test)]
    pub(crate) fn run_custom_phase(
        &mut self,
        spec: PhaseSpec,
        epochs: usize,
    ) -> Result<Vec<EpochStats>> {
        self.run_phase(spec, epochs)
    }

    /// Forward-only mean cosine between each in-scope sense vector and the
    /// encoder's output for its gloss, in word input mode.
    pub fn mean_cos_word_mode(&self, scope: Scope) -> Result<f64> {
        let built = build_instances(
            self.lex,
            self.store,
            &self.state.senses,
            scope,
            InputMode::Word,
            None,
            self.cfg.max_gloss_tokens,
        );
        if built.instances.is_empty() {
            return Err(Error::NoInstances("nothing to evaluate"));
        }
        let params = &self.state.params;
        let store = self.store;
        let senses = &self.state.senses;
        let cos: Vec<Result<f64>> = exec::map(&built.instances, |inst| {
            let views = resolve_views(inst, store, senses);
            let states = forward(params, &views)?;
            let target = senses.get(&inst.sense_id).expect("instance sense exists");
            Ok(-cosine_loss(&states.e_hat, target)?)
        });
        let cos = cos.into_iter().collect::<Result<Vec<f64>>>()?;
        Ok(cos.iter().sum::<f64>() / cos.len() as f64)
    }

    fn run_phase(&mut self, phase: PhaseSpec, epochs: usize) -> Result<Vec<EpochStats>> {
        let mut order_rng = ChaCha8Rng::seed_from_u64(
            self.cfg
                .seed
                .wrapping_add((phase.number as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );

        let mut instances = if phase.sense_inputs {
            Vec::new()
        } else {
            let built = build_instances(
                self.lex,
                self.store,
                &self.state.senses,
                phase.scope,
                InputMode::Word,
                None,
                self.cfg.max_gloss_tokens,
            );
            built.instances
        };
        if !phase.sense_inputs && instances.is_empty() {
            return Err(match phase.scope {
                Scope::Monosemous => Error::NoInstances("no monosemous senses with usable glosses"),
                Scope::All => Error::NoInstances("no senses with usable glosses"),
            });
        }

        let mut stats = Vec::with_capacity(epochs);
        for epoch in 0..epochs {
            if phase.sense_inputs {
                instances = self.reassign_and_build(epoch)?;
                if instances.is_empty() {
                    return Err(Error::NoInstances("no senses with usable glosses"));
                }
            }
            let (mean_loss, mean_cos) = self.run_epoch(phase, &instances, &mut order_rng)?;
            stats.push(EpochStats {
                phase: phase.number,
                epoch,
                mean_loss,
                mean_cos,
                instances: instances.len(),
            });
        }
        Ok(stats)
    }

    /// Start-of-epoch sense assignment over every gloss, with the current
    /// sense vectors, then instance building in sense input mode.
    fn reassign_and_build(&mut self, epoch: usize) -> Result<Vec<TrainInstance>> {
        let lex = self.lex;
        let store = self.store;
        let senses = &self.state.senses;
        let max_tokens = self.cfg.max_gloss_tokens;

        let per_entry: Vec<BTreeMap<usize, String>> = exec::map(lex.entries(), |entry| {
            let tokens: Vec<Token> = entry.gloss.iter().take(max_tokens).cloned().collect();
            let targets: Vec<usize> = tokens
                .iter()
                .enumerate()
                .filter(|(_, t)| lex.is_content_word(t))
                .map(|(i, _)| i)
                .collect();
            if targets.is_empty() {
                return BTreeMap::new();
            }
            let inst = ContextInstance::new(tokens, targets).expect("gloss tokens nonempty");
            s2c(&inst, lex, senses, store).assigned
        });

        let mut digest = Fnv1a::new();
        let mut n_assigned = 0usize;
        let mut map: AssignmentMap = HashMap::new();
        for (entry_idx, assigned) in per_entry.into_iter().enumerate() {
            for (pos, sid) in &assigned {
                digest.write_usize(entry_idx);
                digest.write_usize(*pos);
                digest.write_bytes(sid.as_bytes());
                n_assigned += 1;
            }
            if !assigned.is_empty() {
                map.insert(entry_idx, assigned);
            }
        }
        self.reassignments.push(ReassignmentRecord {
            epoch,
            digest: digest.finish(),
            n_assigned,
        });

        Ok(build_instances(
            lex,
            store,
            &self.state.senses,
            Scope::All,
            InputMode::Sense,
            Some(&map),
            max_tokens,
        )
        .instances)
    }

    fn run_epoch(
        &mut self,
        phase: PhaseSpec,
        instances: &[TrainInstance],
        order_rng: &mut ChaCha8Rng,
    ) -> Result<(f64, f64)> {
        let mut order: Vec<usize> = (0..instances.len()).collect();
        if self.cfg.shuffle {
            order.shuffle(order_rng);
        }

        let mut loss_sum = 0.0;
        for batch_ids in order.chunks(self.cfg.batch_size) {
            let batch: Vec<&TrainInstance> = batch_ids.iter().map(|&i| &instances[i]).collect();
            loss_sum += self.run_batch(phase, &batch)?;
        }
        let mean_loss = loss_sum / instances.len() as f64;
        Ok((mean_loss, -mean_loss))
    }

    fn run_batch(&mut self, phase: PhaseSpec, batch: &[&TrainInstance]) -> Result<f64> {
        let params = &self.state.params;
        let store = self.store;
        let senses = &self.state.senses;
        let want_target = phase.updates_senses;
        let want_inputs = phase.sense_inputs;

        let chunks: Vec<&[&TrainInstance]> = batch.chunks(GRAD_CHUNK).collect();
        let results: Vec<Result<ChunkGrads>> = exec::map(&chunks, |chunk| {
            compute_chunk(chunk, params, store, senses, want_target, want_inputs)
        });
        let results = results.into_iter().collect::<Result<Vec<ChunkGrads>>>()?;

        // reduce in chunk order
        let scale = 1.0 / batch.len() as f64;
        let mut model_grad = self.state.params.zeros_like();
        let mut sense_grads: BTreeMap<usize, Vector> = BTreeMap::new();
        let mut loss_sum = 0.0;
        for chunk in results {
            model_grad.add_assign(&chunk.model);
            loss_sum += chunk.loss_sum;
            for (idx, g) in chunk.senses {
                sense_grads
                    .entry(idx)
                    .and_modify(|acc| *acc += &g)
                    .or_insert(g);
            }
        }

        model_grad.scale(scale);
        if let Some(max_norm) = self.cfg.clip_norm {
            let norm = model_grad.global_norm();
            if norm > max_norm {
                model_grad.scale(max_norm / norm);
            }
        }
        self.state
            .model_opt
            .step_model(&mut self.state.params, &model_grad);

        if phase.updates_senses {
            let TrainState {
                senses, sense_opt, ..
            } = &mut self.state;
            for (idx, mut grad) in sense_grads {
                if senses.is_zero(idx) {
                    // untrainable by the cosine-of-zero convention
                    self.zero_senses_skipped += 1;
                    continue;
                }
                grad *= scale;
                sense_opt.step(
                    idx,
                    senses.vector_mut(idx).as_slice_mut().unwrap(),
                    grad.as_slice().unwrap(),
                );
            }
        }

        Ok(loss_sum)
    }
}

struct ChunkGrads {
    model: ModelParams,
    /// (sense index, raw gradient) in instance order: target gradients and,
    /// in sense input mode, input gradients.
    senses: Vec<(usize, Vector)>,
    loss_sum: f64,
}

fn compute_chunk(
    chunk: &[&TrainInstance],
    params: &ModelParams,
    store: &EmbeddingStore,
    senses: &SenseTable,
    want_target: bool,
    want_inputs: bool,
) -> Result<ChunkGrads> {
    let mut model = params.zeros_like();
    let mut sense_grads: Vec<(usize, Vector)> = Vec::new();
    let mut loss_sum = 0.0;

    for inst in chunk {
        let views = resolve_views(inst, store, senses);
        let target_idx = senses
            .index_of(&inst.sense_id)
            .expect("instance sense exists in table");
        let target = senses.vector(target_idx);

        let states = forward(params, &views)?;
        loss_sum += cosine_loss(&states.e_hat, target)?;
        let grads = backward(params, &states, &views, target)?;

        model.add_assign(&grads.params);
        if want_target {
            sense_grads.push((target_idx, grads.target));
        }
        if want_inputs {
            for (src, g) in inst.inputs.iter().zip(grads.inputs) {
                if let InputSource::Sense(sid) = src {
                    let idx = senses.index_of(sid).expect("input sense exists in table");
                    sense_grads.push((idx, g));
                }
            }
        }
    }

    Ok(ChunkGrads {
        model,
        senses: sense_grads,
        loss_sum,
    })
}

fn resolve_views<'v>(
    inst: &'v TrainInstance,
    store: &'v EmbeddingStore,
    senses: &'v SenseTable,
) -> Vec<ArrayView1<'v, f64>> {
    inst.inputs
        .iter()
        .map(|src| match src {
            InputSource::Word(t) => store.get(t).expect("word vector exists").view(),
            InputSource::Sense(sid) => senses.get(sid).expect("sense vector exists").view(),
        })
        .collect()
}

/// Tiny deterministic hash for reassignment digests.
struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    fn write_bytes(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= *b as u64;
            self.0 = self.0.wrapping_mul(0x100_0000_01b3);
        }
        self.write_u8(0xff);
    }

    fn write_u8(&mut self, b: u8) {
        self.0 ^= b as u64;
        self.0 = self.0.wrapping_mul(0x100_0000_01b3);
    }

    fn write_usize(&mut self, v: usize) {
        self.write_bytes(&v.to_le_bytes());
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Recompute the digest an epoch's [`ReassignmentRecord`] would carry for
/// the given assignments; lets tests verify re-assignment used the table
/// state they expect.
pub fn assignment_digest(per_entry: &[(usize, &BTreeMap<usize, String>)]) -> u64 {
    let mut digest = Fnv1a::new();
    for (entry_idx, assigned) in per_entry {
        for (pos, sid) in assigned.iter() {
            digest.write_usize(*entry_idx);
            digest.write_usize(*pos);
            digest.write_bytes(sid.as_bytes());
        }
    }
    digest.finish()
}
