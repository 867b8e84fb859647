//! Per-kind recurrence and its exact backward pass.

use ndarray::ArrayView1;

use super::{add_outer, CellWeights, ForwardStates, GateWeights, ModelParams};
use crate::Vector;

/// Gate activations kept from the forward pass, per step (index t-1).
#[derive(Debug, Clone)]
pub(crate) enum GateStates {
    Vanilla,
    Gru {
        update: Vec<Vector>,
        reset: Vec<Vector>,
        cand: Vec<Vector>,
    },
    Lstm {
        /// c_0..c_n
        cell: Vec<Vector>,
        input: Vec<Vector>,
        forget: Vec<Vector>,
        output: Vec<Vector>,
        cand: Vec<Vector>,
    },
}

fn sigmoid(v: Vector) -> Vector {
    v.mapv_into(|x| 1.0 / (1.0 + (-x).exp()))
}

fn tanh(v: Vector) -> Vector {
    v.mapv_into(f64::tanh)
}

pub(crate) fn run_forward(
    p: &ModelParams,
    inputs: &[ArrayView1<f64>],
) -> (Vec<Vector>, GateStates) {
    let n = inputs.len();
    let mut hidden = Vec::with_capacity(n + 1);
    hidden.push(Vector::zeros(p.d_h));

    match &p.cell {
        CellWeights::Vanilla(gate) => {
            for x in inputs {
                let h = tanh(gate.affine(x, &hidden[hidden.len() - 1]));
                hidden.push(h);
            }
            (hidden, GateStates::Vanilla)
        }
        CellWeights::Gru {
            update,
            reset,
            cand,
        } => {
            let mut zs = Vec::with_capacity(n);
            let mut rs = Vec::with_capacity(n);
            let mut cs = Vec::with_capacity(n);
            for x in inputs {
                let h_prev = &hidden[hidden.len() - 1];
                let z = sigmoid(update.affine(x, h_prev));
                let r = sigmoid(reset.affine(x, h_prev));
                let gated = &r * h_prev;
                let c = tanh(cand.w_x.dot(x) + cand.w_h.dot(&gated) + &cand.b);
                let h = (1.0 - &z) * h_prev + &z * &c;
                zs.push(z);
                rs.push(r);
                cs.push(c);
                hidden.push(h);
            }
            (
                hidden,
                GateStates::Gru {
                    update: zs,
                    reset: rs,
                    cand: cs,
                },
            )
        }
        CellWeights::Lstm {
            input,
            forget,
            output,
            cand,
        } => {
            let mut cells = Vec::with_capacity(n + 1);
            cells.push(Vector::zeros(p.d_h));
            let mut is_ = Vec::with_capacity(n);
            let mut fs = Vec::with_capacity(n);
            let mut os = Vec::with_capacity(n);
            let mut gs = Vec::with_capacity(n);
            for x in inputs {
                let h_prev = &hidden[hidden.len() - 1];
                let c_prev = &cells[cells.len() - 1];
                let i = sigmoid(input.affine(x, h_prev));
                let f = sigmoid(forget.affine(x, h_prev));
                let o = sigmoid(output.affine(x, h_prev));
                let g = tanh(cand.affine(x, h_prev));
                let c = &f * c_prev + &i * &g;
                let h = &o * &c.mapv(f64::tanh);
                is_.push(i);
                fs.push(f);
                os.push(o);
                gs.push(g);
                cells.push(c);
                hidden.push(h);
            }
            (
                hidden,
                GateStates::Lstm {
                    cell: cells,
                    input: is_,
                    forget: fs,
                    output: os,
                    cand: gs,
                },
            )
        }
    }
}

/// Backpropagate `dh_n` (the loss gradient on the final hidden state)
/// through every step. Returns gradients for the cell weights and for
/// each input.
pub(crate) fn run_backward(
    p: &ModelParams,
    states: &ForwardStates,
    inputs: &[ArrayView1<f64>],
    dh_n: Vector,
) -> (CellWeights, Vec<Vector>) {
    let n = inputs.len();
    let mut grads = CellWeights::zeros(p.kind, p.d_in, p.d_h);
    let mut input_grads = vec![Vector::zeros(p.d_in); n];
    let hs = &states.hidden;

    match (&p.cell, &mut grads, &states.gates) {
        (CellWeights::Vanilla(gate), CellWeights::Vanilla(g), GateStates::Vanilla) => {
            let mut dh = dh_n;
            for t in (0..n).rev() {
                let h = &hs[t + 1];
                let da = &dh * &h.mapv(|v| 1.0 - v * v);
                accumulate_gate(g, &da, &inputs[t], &hs[t]);
                input_grads[t] = gate.w_x.t().dot(&da);
                dh = gate.w_h.t().dot(&da);
            }
        }
        (
            CellWeights::Gru {
                update,
                reset,
                cand,
            },
            CellWeights::Gru {
                update: g_update,
                reset: g_reset,
                cand: g_cand,
            },
            GateStates::Gru {
                update: zs,
                reset: rs,
                cand: cs,
            },
        ) => {
            let mut dh = dh_n;
            for t in (0..n).rev() {
                let h_prev = &hs[t];
                let (z, r, c) = (&zs[t], &rs[t], &cs[t]);

                // h = (1 - z) h_prev + z c
                let dz = &dh * &(c - h_prev);
                let dc = &dh * z;
                let mut dh_prev = &dh * &z.mapv(|v| 1.0 - v);

                // candidate sees the reset-gated state, not h_prev
                let da_c = &dc * &c.mapv(|v| 1.0 - v * v);
                let gated = r * h_prev;
                accumulate_gate(g_cand, &da_c, &inputs[t], &gated);
                input_grads[t] += &cand.w_x.t().dot(&da_c);
                let d_gated = cand.w_h.t().dot(&da_c);
                let dr = &d_gated * h_prev;
                dh_prev += &(&d_gated * r);

                let da_z = &dz * &z.mapv(|v| v * (1.0 - v));
                accumulate_gate(g_update, &da_z, &inputs[t], h_prev);
                input_grads[t] += &update.w_x.t().dot(&da_z);
                dh_prev += &update.w_h.t().dot(&da_z);

                let da_r = &dr * &r.mapv(|v| v * (1.0 - v));
                accumulate_gate(g_reset, &da_r, &inputs[t], h_prev);
                input_grads[t] += &reset.w_x.t().dot(&da_r);
                dh_prev += &reset.w_h.t().dot(&da_r);

                dh = dh_prev;
            }
        }
        (
            CellWeights::Lstm {
                input,
                forget,
                output,
                cand,
            },
            CellWeights::Lstm {
                input: g_input,
                forget: g_forget,
                output: g_output,
                cand: g_cand,
            },
            GateStates::Lstm {
                cell,
                input: is_,
                forget: fs,
                output: os,
                cand: gs,
            },
        ) => {
            let mut dh = dh_n;
            let mut dc = Vector::zeros(p.d_h);
            for t in (0..n).rev() {
                let h_prev = &hs[t];
                let c_prev = &cell[t];
                let c_t = &cell[t + 1];
                let (i, f, o, g) = (&is_[t], &fs[t], &os[t], &gs[t]);
                let tanh_c = c_t.mapv(f64::tanh);

                // h = o ⊙ tanh(c)
                let do_ = &dh * &tanh_c;
                dc += &(&dh * o * &tanh_c.mapv(|v| 1.0 - v * v));

                // c = f ⊙ c_prev + i ⊙ g
                let df = &dc * c_prev;
                let di = &dc * g;
                let dg = &dc * i;
                let dc_prev = &dc * f;

                let da_i = &di * &i.mapv(|v| v * (1.0 - v));
                let da_f = &df * &f.mapv(|v| v * (1.0 - v));
                let da_o = &do_ * &o.mapv(|v| v * (1.0 - v));
                let da_g = &dg * &g.mapv(|v| 1.0 - v * v);

                let mut dh_prev = Vector::zeros(p.d_h);
                for (gate, acc, da) in [
                    (input, &mut *g_input, &da_i),
                    (forget, &mut *g_forget, &da_f),
                    (output, &mut *g_output, &da_o),
                    (cand, &mut *g_cand, &da_g),
                ] {
                    accumulate_gate(acc, da, &inputs[t], h_prev);
                    input_grads[t] += &gate.w_x.t().dot(da);
                    dh_prev += &gate.w_h.t().dot(da);
                }

                dh = dh_prev;
                dc = dc_prev;
            }
        }
        _ => unreachable!("cell kind matches checked by caller"),
    }

    (grads, input_grads)
}

/// dW_x += da ⊗ x, dW_h += da ⊗ hidden_side, db += da.
fn accumulate_gate(g: &mut GateWeights, da: &Vector, x: &ArrayView1<f64>, hidden_side: &Vector) {
    add_outer(&mut g.w_x, da, x);
    add_outer(&mut g.w_h, da, &hidden_side.view());
    g.b += da;
}
