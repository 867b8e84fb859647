//! Recurrent definition encoder: vanilla RNN, GRU, and LSTM cells, a final
//! linear projection into sense-embedding space, the cosine training loss,
//! full backpropagation through time (including gradients with respect to
//! the inputs and the target), an Adadelta optimizer, and a
//! finite-difference gradient checker.
//!
//! Cell equations are the standard formulations:
//!
//! * vanilla: `h_t = tanh(W_x x_t + W_h h_{t-1} + b)`
//! * GRU: update/reset gates with sigmoid, tanh candidate over the
//!   reset-gated state, `h_t = (1 - z_t) h_{t-1} + z_t cand_t`
//! * LSTM: input/forget/output gates, tanh candidate,
//!   `c_t = f c_{t-1} + i cand`, `h_t = o tanh(c_t)`
//!
//! Sequences are processed per instance (no padded batching); batches
//! parallelize across instances instead.

mod adadelta;
mod cells;
mod gradcheck;

pub use adadelta::{adadelta_update, AdadeltaConfig, AdadeltaState};
pub use gradcheck::{grad_check, grad_check_sized, GradCheckReport};

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vector};

/// Half-width of the uniform weight-initialization interval.
pub const INIT_RANGE: f64 = 0.012;

/// Which recurrent cell the encoder uses. Fixed at model creation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Vanilla,
    Gru,
    Lstm,
}

impl CellKind {
    pub fn name(self) -> &'static str {
        match self {
            CellKind::Vanilla => "vanilla",
            CellKind::Gru => "gru",
            CellKind::Lstm => "lstm",
        }
    }

    pub const ALL: [CellKind; 3] = [CellKind::Vanilla, CellKind::Gru, CellKind::Lstm];
}

/// One gate's affine block: input-to-hidden, hidden-to-hidden, bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateWeights {
    /// d_h × d_in
    pub w_x: Array2<f64>,
    /// d_h × d_h
    pub w_h: Array2<f64>,
    /// d_h
    pub b: Vector,
}

impl GateWeights {
    fn zeros(d_in: usize, d_h: usize) -> Self {
        GateWeights {
            w_x: Array2::zeros((d_h, d_in)),
            w_h: Array2::zeros((d_h, d_h)),
            b: Vector::zeros(d_h),
        }
    }

    /// `W_x x + W_h h + b`
    pub(crate) fn affine(&self, x: &ArrayView1<f64>, h: &Vector) -> Vector {
        self.w_x.dot(x) + self.w_h.dot(h) + &self.b
    }
}

/// Cell weights per kind. Gate order is fixed and determines the
/// initialization draw order and the checkpoint tensor order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CellWeights {
    Vanilla(GateWeights),
    Gru {
        update: GateWeights,
        reset: GateWeights,
        cand: GateWeights,
    },
    Lstm {
        input: GateWeights,
        forget: GateWeights,
        output: GateWeights,
        cand: GateWeights,
    },
}

impl CellWeights {
    fn zeros(kind: CellKind, d_in: usize, d_h: usize) -> Self {
        let g = || GateWeights::zeros(d_in, d_h);
        match kind {
            CellKind::Vanilla => CellWeights::Vanilla(g()),
            CellKind::Gru => CellWeights::Gru {
                update: g(),
                reset: g(),
                cand: g(),
            },
            CellKind::Lstm => CellWeights::Lstm {
                input: g(),
                forget: g(),
                output: g(),
                cand: g(),
            },
        }
    }

    fn gates_mut(&mut self) -> Vec<(&'static str, &mut GateWeights)> {
        match self {
            CellWeights::Vanilla(g) => vec![("cell", g)],
            CellWeights::Gru {
                update,
                reset,
                cand,
            } => vec![
                ("cell.update", update),
                ("cell.reset", reset),
                ("cell.cand", cand),
            ],
            CellWeights::Lstm {
                input,
                forget,
                output,
                cand,
            } => vec![
                ("cell.input", input),
                ("cell.forget", forget),
                ("cell.output", output),
                ("cell.cand", cand),
            ],
        }
    }

    fn gates(&self) -> Vec<(&'static str, &GateWeights)> {
        match self {
            CellWeights::Vanilla(g) => vec![("cell", g)],
            CellWeights::Gru {
                update,
                reset,
                cand,
            } => vec![
                ("cell.update", update),
                ("cell.reset", reset),
                ("cell.cand", cand),
            ],
            CellWeights::Lstm {
                input,
                forget,
                output,
                cand,
            } => vec![
                ("cell.input", input),
                ("cell.forget", forget),
                ("cell.output", output),
                ("cell.cand", cand),
            ],
        }
    }
}

/// Encoder parameters: recurrent cell weights plus the projection that
/// maps the final hidden state to sense-embedding space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: CellKind,
    pub d_in: usize,
    pub d_h: usize,
    pub d_out: usize,
    pub cell: CellWeights,
    /// d_out × d_h
    pub proj_w: Array2<f64>,
    /// d_out
    pub proj_b: Vector,
}

impl ModelParams {
    /// All-zero parameters with the given shape.
    pub fn zeros(kind: CellKind, d_in: usize, d_h: usize, d_out: usize) -> Self {
        assert!(d_in > 0 && d_h > 0 && d_out > 0, "dims must be positive");
        ModelParams {
            kind,
            d_in,
            d_h,
            d_out,
            cell: CellWeights::zeros(kind, d_in, d_h),
            proj_w: Array2::zeros((d_out, d_h)),
            proj_b: Vector::zeros(d_out),
        }
    }

    /// Zero container with the same shape; used to accumulate gradients.
    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.kind, self.d_in, self.d_h, self.d_out)
    }

    /// Named flat views of every tensor, in the canonical order used by
    /// the optimizer and the checkpoint format.
    pub fn tensor_slices(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::new();
        for (prefix, gate) in self.cell.gates() {
            out.push((format!("{prefix}.w_x"), gate.w_x.as_slice().unwrap()));
            out.push((format!("{prefix}.w_h"), gate.w_h.as_slice().unwrap()));
            out.push((format!("{prefix}.b"), gate.b.as_slice().unwrap()));
        }
        out.push(("proj.w".to_string(), self.proj_w.as_slice().unwrap()));
        out.push(("proj.b".to_string(), self.proj_b.as_slice().unwrap()));
        out
    }

    /// Mutable counterpart of [`tensor_slices`](Self::tensor_slices),
    /// identical order.
    pub fn tensor_slices_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out: Vec<(String, &mut [f64])> = Vec::new();
        for (prefix, gate) in self.cell.gates_mut() {
            out.push((format!("{prefix}.w_x"), gate.w_x.as_slice_mut().unwrap()));
            out.push((format!("{prefix}.w_h"), gate.w_h.as_slice_mut().unwrap()));
            out.push((format!("{prefix}.b"), gate.b.as_slice_mut().unwrap()));
        }
        out.push(("proj.w".to_string(), self.proj_w.as_slice_mut().unwrap()));
        out.push(("proj.b".to_string(), self.proj_b.as_slice_mut().unwrap()));
        out
    }

    /// Tensor shapes in canonical order (for checkpoint manifests).
    pub fn tensor_shapes(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        for (prefix, gate) in self.cell.gates() {
            out.push((format!("{prefix}.w_x"), gate.w_x.shape().to_vec()));
            out.push((format!("{prefix}.w_h"), gate.w_h.shape().to_vec()));
            out.push((format!("{prefix}.b"), vec![gate.b.len()]));
        }
        out.push(("proj.w".to_string(), self.proj_w.shape().to_vec()));
        out.push(("proj.b".to_string(), vec![self.proj_b.len()]));
        out
    }

    /// `self += other`, tensor by tensor. Shapes must match.
    pub fn add_assign(&mut self, other: &ModelParams) {
        let theirs = other.tensor_slices();
        for (i, (_, mine)) in self.tensor_slices_mut().into_iter().enumerate() {
            for (m, t) in mine.iter_mut().zip(theirs[i].1.iter()) {
                *m += *t;
            }
        }
    }

    /// Multiply every tensor by `c`.
    pub fn scale(&mut self, c: f64) {
        for (_, s) in self.tensor_slices_mut() {
            for v in s.iter_mut() {
                *v *= c;
            }
        }
    }

    /// Global L2 norm over all tensors (for optional gradient clipping).
    pub fn global_norm(&self) -> f64 {
        self.tensor_slices()
            .iter()
            .map(|(_, s)| s.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }
}

/// Draw initial parameters: every weight uniform in the open interval
/// `(-INIT_RANGE, INIT_RANGE)` from a seeded generator, every bias exactly
/// zero. The same seed reproduces the parameters bit for bit.
pub fn init_params(kind: CellKind, d_in: usize, d_h: usize, d_out: usize, seed: u64) -> ModelParams {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = ModelParams::zeros(kind, d_in, d_h, d_out);
    for (prefix, gate) in p.cell.gates_mut() {
        let _ = prefix;
        fill_uniform(&mut rng, gate.w_x.as_slice_mut().unwrap());
        fill_uniform(&mut rng, gate.w_h.as_slice_mut().unwrap());
    }
    fill_uniform(&mut rng, p.proj_w.as_slice_mut().unwrap());
    p
}

fn fill_uniform(rng: &mut ChaCha8Rng, slice: &mut [f64]) {
    for v in slice.iter_mut() {
        // random_range is half-open at the low end; reject the endpoint to
        // keep the interval open on both sides.
        *v = loop {
            let x = rng.random_range(-INIT_RANGE..INIT_RANGE);
            if x != -INIT_RANGE {
                break x;
            }
        };
    }
}

/// Per-step activations retained by [`forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardStates {
    kind: CellKind,
    n: usize,
    /// h_0..h_n (h_0 = 0)
    pub(crate) hidden: Vec<Vector>,
    pub(crate) gates: cells::GateStates,
    /// Projection output for the final hidden state.
    pub e_hat: Vector,
}

impl ForwardStates {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Final hidden state h_n.
    pub fn last_hidden(&self) -> &Vector {
        &self.hidden[self.n]
    }
}

/// Run the recurrence over `inputs` and project the final hidden state.
/// `h_0` (and `c_0` for LSTM) is zero. Deterministic: the same parameters
/// and inputs give a bit-identical result.
pub fn forward(p: &ModelParams, inputs: &[ArrayView1<f64>]) -> Result<ForwardStates> {
    if inputs.is_empty() {
        return Err(Error::EmptySequence);
    }
    for x in inputs {
        if x.len() != p.d_in {
            return Err(Error::DimMismatch {
                expected: p.d_in,
                got: x.len(),
            });
        }
    }
    let (hidden, gates) = cells::run_forward(p, inputs);
    let e_hat = p.proj_w.dot(&hidden[inputs.len()]) + &p.proj_b;
    Ok(ForwardStates {
        kind: p.kind,
        n: inputs.len(),
        hidden,
        gates,
        e_hat,
    })
}

/// Training loss for one instance: `-cos(e_hat, target)`.
pub fn cosine_loss(e_hat: &Vector, target: &Vector) -> Result<f64> {
    Ok(-crate::embeddings::cosine(e_hat, target)?)
}

/// Gradients of the cosine loss for one instance: with respect to every
/// model tensor (shaped like [`ModelParams`]), every input step, and the
/// target vector.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub params: ModelParams,
    /// One gradient per input step, each d_in.
    pub inputs: Vec<Vector>,
    /// Gradient with respect to the target sense embedding, d_out.
    pub target: Vector,
}

/// Exact analytic gradients of `cosine_loss` by backpropagation through
/// time, with no truncation. `states` must come from a [`forward`] call
/// with the same parameters and inputs.
pub fn backward(
    p: &ModelParams,
    states: &ForwardStates,
    inputs: &[ArrayView1<f64>],
    target: &Vector,
) -> Result<Gradients> {
    if states.kind != p.kind
        || states.n != inputs.len()
        || states.hidden.len() != inputs.len() + 1
        || states.hidden[0].len() != p.d_h
        || states.e_hat.len() != p.d_out
    {
        return Err(Error::StaleStates);
    }
    if target.len() != p.d_out {
        return Err(Error::DimMismatch {
            expected: p.d_out,
            got: target.len(),
        });
    }

    let (_cos, d_ehat, d_target) = neg_cosine_grads(&states.e_hat, target);

    // Projection: e_hat = proj_w · h_n + proj_b
    let mut grads = p.zeros_like();
    let h_n = states.last_hidden();
    add_outer(&mut grads.proj_w, &d_ehat, &h_n.view());
    grads.proj_b.assign(&d_ehat);
    let dh_n = p.proj_w.t().dot(&d_ehat);

    let (cell_grads, input_grads) = cells::run_backward(p, states, inputs, dh_n);
    grads.cell = cell_grads;

    Ok(Gradients {
        params: grads,
        inputs: input_grads,
        target: d_target,
    })
}

/// Value and gradients of `L = -cos(u, t)` with respect to `u` and `t`.
/// If either norm is zero the cosine is zero by convention and both
/// gradients vanish.
pub(crate) fn neg_cosine_grads(u: &Vector, t: &Vector) -> (f64, Vector, Vector) {
    let nu = u.dot(u).sqrt();
    let nt = t.dot(t).sqrt();
    if nu == 0.0 || nt == 0.0 {
        return (0.0, Vector::zeros(u.len()), Vector::zeros(t.len()));
    }
    let cos = u.dot(t) / (nu * nt);
    let du = -(t / (nu * nt) - &(u * (cos / (nu * nu))));
    let dt = -(u / (nu * nt) - &(t * (cos / (nt * nt))));
    (cos, du, dt)
}

/// acc += col ⊗ row
pub(crate) fn add_outer<S: ndarray::Data<Elem = f64>>(
    acc: &mut Array2<f64>,
    col: &Vector,
    row: &ndarray::ArrayBase<S, ndarray::Ix1>,
) {
    for (i, c) in col.iter().enumerate() {
        acc.row_mut(i).scaled_add(*c, row);
    }
}
