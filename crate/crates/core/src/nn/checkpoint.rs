//! Binary checkpoint format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic    8 bytes  "RPOOLNET"
//! version  u32      currently 1
//! n_sizes  u32      layer-size list length, then n_sizes × u32 sizes
//! params   f64 × N  per layer: weights row-major, then biases
//! opt_flag u8       0 = no optimizer block
//!   step u64, base_lr/lr_scale/lr_decay/beta1/beta2/eps f64,
//!   first-moment block, second-moment block (each shaped like params)
//! seed     u64
//! episode  u32
//! ```
//!
//! Round-trips are bit-exact; f64 payloads are stored as raw IEEE bits.

use super::{AdamState, Grads, LayerParams, MlpParams};
use crate::{Error, Result};
use std::path::Path;

const MAGIC: &[u8; 8] = b"RPOOLNET";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub episode: u32,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub params: MlpParams,
    pub adam: Option<AdamState>,
    pub meta: CheckpointMeta,
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    std::fs::write(path, encode(ckpt))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path)?;
    decode(&bytes)
}

pub fn encode(ckpt: &Checkpoint) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let sizes = ckpt.params.sizes();
    out.extend_from_slice(&(sizes.len() as u32).to_le_bytes());
    for s in &sizes {
        out.extend_from_slice(&(*s as u32).to_le_bytes());
    }
    write_param_block(&mut out, ckpt.params.layers());
    match &ckpt.adam {
        None => out.push(0),
        Some(adam) => {
            out.push(1);
            out.extend_from_slice(&adam.step.to_le_bytes());
            for v in [
                adam.base_lr,
                adam.lr_scale,
                adam.lr_decay,
                adam.beta1,
                adam.beta2,
                adam.eps,
            ] {
                out.extend_from_slice(&v.to_le_bytes());
            }
            write_grad_block(&mut out, &adam.m);
            write_grad_block(&mut out, &adam.v);
        }
    }
    out.extend_from_slice(&ckpt.meta.seed.to_le_bytes());
    out.extend_from_slice(&ckpt.meta.episode.to_le_bytes());
    out
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { bytes, at: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Checkpoint("bad magic header".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {version}"
        )));
    }
    let n_sizes = r.u32()? as usize;
    if n_sizes < 2 || n_sizes > 64 {
        return Err(Error::Checkpoint(format!("implausible size list {n_sizes}")));
    }
    let mut sizes = Vec::with_capacity(n_sizes);
    for _ in 0..n_sizes {
        sizes.push(r.u32()? as usize);
    }
    if sizes.iter().any(|&s| s == 0 || s > 1 << 20) {
        return Err(Error::Checkpoint("implausible layer size".into()));
    }
    let layers = read_param_block(&mut r, &sizes)?;
    let params = MlpParams::from_layers(layers);

    let adam = match r.u8()? {
        0 => None,
        1 => {
            let step = r.u64()?;
            let base_lr = r.f64()?;
            let lr_scale = r.f64()?;
            let lr_decay = r.f64()?;
            let beta1 = r.f64()?;
            let beta2 = r.f64()?;
            let eps = r.f64()?;
            let m = read_grad_block(&mut r, &sizes)?;
            let v = read_grad_block(&mut r, &sizes)?;
            Some(AdamState {
                m,
                v,
                step,
                base_lr,
                lr_scale,
                lr_decay,
                beta1,
                beta2,
                eps,
            })
        }
        other => {
            return Err(Error::Checkpoint(format!("bad optimizer flag {other}")));
        }
    };
    let seed = r.u64()?;
    let episode = r.u32()?;
    if r.at != bytes.len() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    Ok(Checkpoint {
        params,
        adam,
        meta: CheckpointMeta { seed, episode },
    })
}

fn write_param_block(out: &mut Vec<u8>, layers: &[LayerParams]) {
    for layer in layers {
        for v in layer.w.iter().chain(&layer.b) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
}

fn write_grad_block(out: &mut Vec<u8>, grads: &Grads) {
    for layer in &grads.layers {
        for v in layer.w.iter().chain(&layer.b) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
}

fn read_param_block(r: &mut Reader, sizes: &[usize]) -> Result<Vec<LayerParams>> {
    sizes
        .windows(2)
        .map(|pair| {
            let (in_dim, out_dim) = (pair[0], pair[1]);
            let mut w = Vec::with_capacity(in_dim * out_dim);
            for _ in 0..in_dim * out_dim {
                w.push(r.f64()?);
            }
            let mut b = Vec::with_capacity(out_dim);
            for _ in 0..out_dim {
                b.push(r.f64()?);
            }
            Ok(LayerParams {
                w,
                b,
                in_dim,
                out_dim,
            })
        })
        .collect()
}

fn read_grad_block(r: &mut Reader, sizes: &[usize]) -> Result<Grads> {
    let layers = read_param_block(r, sizes)?
        .into_iter()
        .map(|l| super::backward::LayerGrad { w: l.w, b: l.b })
        .collect();
    Ok(Grads { layers })
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.bytes.len() {
            return Err(Error::Checkpoint("truncated file".into()));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
