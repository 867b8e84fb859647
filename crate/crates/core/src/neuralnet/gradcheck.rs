//! Finite-difference verification of the backward pass.
//!
//! Builds small random instances, runs [`backward`], and compares every
//! gradient coordinate (parameters, inputs, target) against central
//! differences of the loss. The check instance draws weights from a wider
//! range than training initialization so the loss surface is well
//! conditioned for differencing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{backward, cosine_loss, forward, CellKind, ModelParams};
use crate::Vector;

const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub kind: CellKind,
    pub max_rel_error: f64,
    /// Coordinate with the largest relative error, e.g. `cell.update.w_x[3]`.
    pub worst_coord: String,
    /// Total number of coordinates compared.
    pub n_coords: usize,
}

impl GradCheckReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }
}

/// Check all three sequence lengths 1, 2, 12 at dimension 7.
pub fn grad_check(kind: CellKind, seed: u64) -> GradCheckReport {
    grad_check_sized(kind, seed, 7, &[1, 2, 12])
}

pub fn grad_check_sized(kind: CellKind, seed: u64, dim: usize, lens: &[usize]) -> GradCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GradCheckReport {
        kind,
        max_rel_error: 0.0,
        worst_coord: String::new(),
        n_coords: 0,
    };

    for &n in lens {
        let mut params = ModelParams::zeros(kind, dim, dim, dim);
        for (_, s) in params.tensor_slices_mut() {
            for v in s.iter_mut() {
                *v = rng.random_range(-0.5..0.5);
            }
        }
        let inputs: Vec<Vector> = (0..n)
            .map(|_| Vector::from_shape_fn(dim, |_| rng.random_range(-1.0..1.0)))
            .collect();
        let target = Vector::from_shape_fn(dim, |_| rng.random_range(-1.0..1.0));

        let views: Vec<_> = inputs.iter().map(|v| v.view()).collect();
        let states = forward(&params, &views).unwrap();
        let grads = backward(&params, &states, &views, &target).unwrap();

        let (max_err, worst, n_coords) =
            max_rel_error_against(&mut params, &inputs, &target, &grads);
        report.n_coords += n_coords;
        if max_err > report.max_rel_error {
            report.max_rel_error = max_err;
            report.worst_coord = format!("n={n}: {worst}");
        }
    }
    report
}

/// Compare the given analytic gradients against central differences at the
/// current point. Returns (max relative error, worst coordinate, count).
pub(crate) fn max_rel_error_against(
    params: &mut ModelParams,
    inputs: &[Vector],
    target: &Vector,
    grads: &super::Gradients,
) -> (f64, String, usize) {
    let mut inputs = inputs.to_vec();
    let mut target = target.clone();
    let mut max_err = 0.0f64;
    let mut worst = String::new();
    let mut count = 0usize;

    let eval = |p: &ModelParams, ins: &[Vector], tgt: &Vector| -> f64 {
        let views: Vec<_> = ins.iter().map(|v| v.view()).collect();
        let states = forward(p, &views).unwrap();
        cosine_loss(&states.e_hat, tgt).unwrap()
    };

    let mut record = |analytic: f64, numeric: f64, coord: String| {
        let rel = (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-6);
        count += 1;
        if rel > max_err {
            max_err = rel;
            worst = coord;
        }
    };

    // parameters
    let layout: Vec<(String, usize)> = params
        .tensor_shapes()
        .into_iter()
        .map(|(name, shape)| (name, shape.iter().product()))
        .collect();
    let grad_slices: Vec<Vec<f64>> = grads
        .params
        .tensor_slices()
        .into_iter()
        .map(|(_, s)| s.to_vec())
        .collect();
    for (slot, (name, len)) in layout.iter().enumerate() {
        for i in 0..*len {
            let orig = params.tensor_slices()[slot].1[i];
            params.tensor_slices_mut()[slot].1[i] = orig + FD_STEP;
            let lp = eval(params, &inputs, &target);
            params.tensor_slices_mut()[slot].1[i] = orig - FD_STEP;
            let lm = eval(params, &inputs, &target);
            params.tensor_slices_mut()[slot].1[i] = orig;
            record(grad_slices[slot][i], (lp - lm) / (2.0 * FD_STEP), format!("{name}[{i}]"));
        }
    }

    // inputs
    for t in 0..inputs.len() {
        for j in 0..inputs[t].len() {
            let orig = inputs[t][j];
            inputs[t][j] = orig + FD_STEP;
            let lp = eval(params, &inputs, &target);
            inputs[t][j] = orig - FD_STEP;
            let lm = eval(params, &inputs, &target);
            inputs[t][j] = orig;
            record(grads.inputs[t][j], (lp - lm) / (2.0 * FD_STEP), format!("input[{t}][{j}]"));
        }
    }

    // target
    for j in 0..target.len() {
        let orig = target[j];
        target[j] = orig + FD_STEP;
        let lp = eval(params, &inputs, &target);
        target[j] = orig - FD_STEP;
        let lm = eval(params, &inputs, &target);
        target[j] = orig;
        record(grads.target[j], (lp - lm) / (2.0 * FD_STEP), format!("target[{j}]"));
    }

    (max_err, worst, count)
}
