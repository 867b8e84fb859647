//! Checkpoint file format.
//!
//! Layout: the magic bytes `GVEC1`, a little-endian u64 with the manifest
//! length, the JSON manifest (cell kind, dims, tensor names/shapes/offsets,
//! optimizer hyperparameters, sense ids and provenance tags), then the raw
//! little-endian 32-bit float payloads in manifest order. Loading restores
//! training exactly except for the one-time f64→f32 rounding, so
//! save → load → save reproduces the second file byte for byte.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::neuralnet::{AdadeltaConfig, AdadeltaState, CellKind, ModelParams};
use crate::trainer::{Provenance, SenseTable, TrainState};
use crate::{Error, Result, Vector};

const MAGIC: &[u8; 5] = b"GVEC1";
const FORMAT: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: u32,
    cell: CellKind,
    d_in: usize,
    d_h: usize,
    d_out: usize,
    optimizer: AdadeltaConfig,
    tensors: Vec<TensorMeta>,
    senses: Vec<SenseMeta>,
}

#[derive(Serialize, Deserialize)]
struct TensorMeta {
    name: String,
    shape: Vec<usize>,
    /// Byte offset into the payload.
    offset: u64,
    /// Element count.
    len: u64,
}

#[derive(Serialize, Deserialize)]
struct SenseMeta {
    id: String,
    tag: Provenance,
}

pub fn save_checkpoint(path: &Path, state: &TrainState) -> Result<()> {
    let mut tensors: Vec<TensorMeta> = Vec::new();
    let mut payload: Vec<u8> = Vec::new();

    let mut push = |name: String, shape: Vec<usize>, data: &mut dyn Iterator<Item = f64>| {
        let offset = payload.len() as u64;
        let mut len = 0u64;
        for v in data {
            payload.extend_from_slice(&(v as f32).to_le_bytes());
            len += 1;
        }
        tensors.push(TensorMeta {
            name,
            shape,
            offset,
            len,
        });
    };

    let shapes = state.params.tensor_shapes();
    for (i, (name, slice)) in state.params.tensor_slices().into_iter().enumerate() {
        push(name, shapes[i].1.clone(), &mut slice.iter().copied());
    }
    for (i, (name, _)) in shapes.iter().enumerate() {
        let (eg2, _) = state.model_opt.slot(i);
        push(
            format!("opt.eg2.{name}"),
            shapes[i].1.clone(),
            &mut eg2.iter().copied(),
        );
    }
    for (i, (name, _)) in shapes.iter().enumerate() {
        let (_, ex2) = state.model_opt.slot(i);
        push(
            format!("opt.ex2.{name}"),
            shapes[i].1.clone(),
            &mut ex2.iter().copied(),
        );
    }

    let n = state.senses.len();
    let d = state.senses.dim();
    push(
        "senses.vectors".to_string(),
        vec![n, d],
        &mut (0..n).flat_map(|i| state.senses.vector(i).iter().copied().collect::<Vec<f64>>()),
    );
    push(
        "senses.eg2".to_string(),
        vec![n, d],
        &mut (0..n).flat_map(|i| state.sense_opt.slot(i).0.to_vec()),
    );
    push(
        "senses.ex2".to_string(),
        vec![n, d],
        &mut (0..n).flat_map(|i| state.sense_opt.slot(i).1.to_vec()),
    );

    let manifest = Manifest {
        format: FORMAT,
        cell: state.params.kind,
        d_in: state.params.d_in,
        d_h: state.params.d_h,
        d_out: state.params.d_out,
        optimizer: state.model_opt.config(),
        tensors,
        senses: (0..n)
            .map(|i| SenseMeta {
                id: state.senses.id(i).to_string(),
                tag: state.senses.tag(i),
            })
            .collect(),
    };
    let manifest_bytes =
        serde_json::to_vec(&manifest).map_err(|e| Error::Checkpoint(e.to_string()))?;

    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(MAGIC).map_err(|e| Error::io(path, e))?;
    w.write_all(&(manifest_bytes.len() as u64).to_le_bytes())
        .map_err(|e| Error::io(path, e))?;
    w.write_all(&manifest_bytes).map_err(|e| Error::io(path, e))?;
    w.write_all(&payload).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<TrainState> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;

    if bytes.len() < MAGIC.len() + 8 || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let mut len_bytes = [0u8; 8];
    len_bytes.copy_from_slice(&bytes[5..13]);
    let manifest_len = u64::from_le_bytes(len_bytes) as usize;
    let manifest_end = 13usize
        .checked_add(manifest_len)
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| Error::Checkpoint("truncated manifest".into()))?;
    let manifest: Manifest = serde_json::from_slice(&bytes[13..manifest_end])
        .map_err(|e| Error::Checkpoint(format!("manifest: {e}")))?;
    if manifest.format != FORMAT {
        return Err(Error::Checkpoint(format!(
            "unsupported format {}",
            manifest.format
        )));
    }
    let payload = &bytes[manifest_end..];

    let read_tensor = |meta: &TensorMeta| -> Result<Vec<f64>> {
        let start = meta.offset as usize;
        let byte_len = (meta.len as usize)
            .checked_mul(4)
            .ok_or_else(|| Error::Checkpoint("tensor length overflow".into()))?;
        let end = start
            .checked_add(byte_len)
            .filter(|&e| e <= payload.len())
            .ok_or_else(|| Error::Checkpoint(format!("truncated tensor {}", meta.name)))?;
        let expected: usize = meta.shape.iter().product();
        if expected != meta.len as usize {
            return Err(Error::Checkpoint(format!(
                "tensor {} shape/len mismatch",
                meta.name
            )));
        }
        Ok(payload[start..end]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect())
    };

    // Model parameters: names must match the canonical sequence exactly.
    let mut params = ModelParams::zeros(manifest.cell, manifest.d_in, manifest.d_h, manifest.d_out);
    let expected_names: Vec<String> = params
        .tensor_shapes()
        .into_iter()
        .map(|(name, _)| name)
        .collect();
    let n_model = expected_names.len();
    let want_tensors = 3 * n_model + 3;
    if manifest.tensors.len() != want_tensors {
        return Err(Error::Checkpoint(format!(
            "expected {want_tensors} tensors for a {} model, found {}",
            manifest.cell.name(),
            manifest.tensors.len()
        )));
    }
    for (slot, (_, dst)) in params.tensor_slices_mut().into_iter().enumerate() {
        let meta = &manifest.tensors[slot];
        if meta.name != expected_names[slot] {
            return Err(Error::Checkpoint(format!(
                "tensor {} out of order (expected {})",
                meta.name, expected_names[slot]
            )));
        }
        let data = read_tensor(meta)?;
        if data.len() != dst.len() {
            return Err(Error::Checkpoint(format!(
                "tensor {} wrong size",
                meta.name
            )));
        }
        dst.copy_from_slice(&data);
    }

    // Model optimizer accumulators.
    let mut model_eg2 = Vec::with_capacity(n_model);
    let mut model_ex2 = Vec::with_capacity(n_model);
    for slot in 0..n_model {
        let meta = &manifest.tensors[n_model + slot];
        if meta.name != format!("opt.eg2.{}", expected_names[slot]) {
            return Err(Error::Checkpoint(format!(
                "unexpected tensor {}",
                meta.name
            )));
        }
        model_eg2.push(read_tensor(meta)?);
        let meta = &manifest.tensors[2 * n_model + slot];
        if meta.name != format!("opt.ex2.{}", expected_names[slot]) {
            return Err(Error::Checkpoint(format!(
                "unexpected tensor {}",
                meta.name
            )));
        }
        model_ex2.push(read_tensor(meta)?);
    }
    let model_opt = AdadeltaState::from_parts(manifest.optimizer, model_eg2, model_ex2);

    // Sense table and its optimizer.
    let n_senses = manifest.senses.len();
    let d_out = manifest.d_out;
    let mut sense_parts = Vec::with_capacity(3);
    for (i, name) in ["senses.vectors", "senses.eg2", "senses.ex2"]
        .iter()
        .enumerate()
    {
        let meta = &manifest.tensors[3 * n_model + i];
        if meta.name != *name || meta.shape != vec![n_senses, d_out] {
            return Err(Error::Checkpoint(format!(
                "unexpected tensor {}",
                meta.name
            )));
        }
        sense_parts.push(read_tensor(meta)?);
    }
    let rows = |flat: &[f64]| -> Vec<Vec<f64>> {
        flat.chunks(d_out.max(1))
            .take(n_senses)
            .map(|c| c.to_vec())
            .collect()
    };
    let vectors: Vec<Vector> = rows(&sense_parts[0])
        .into_iter()
        .map(Vector::from_vec)
        .collect();
    let senses = SenseTable::from_parts(
        d_out,
        manifest.senses.iter().map(|s| s.id.clone()).collect(),
        vectors,
        manifest.senses.iter().map(|s| s.tag).collect(),
    )?;
    let sense_opt = AdadeltaState::from_parts(
        manifest.optimizer,
        rows(&sense_parts[1]),
        rows(&sense_parts[2]),
    );

    Ok(TrainState {
        params,
        senses,
        model_opt,
        sense_opt,
    })
}
