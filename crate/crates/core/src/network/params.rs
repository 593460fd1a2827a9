use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::arch::{Architecture, Layout};
use crate::error::{Error, Result};

/// Flat parameter vector together with its layout.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    pub flat: Vec<f64>,
    pub layout: Layout,
}

impl NetworkParams {
    pub fn zeros(arch: &Architecture) -> Self {
        let layout = arch.layout();
        NetworkParams {
            flat: vec![0.0; layout.total_len()],
            layout,
        }
    }

    pub fn from_flat(arch: &Architecture, flat: Vec<f64>) -> Result<Self> {
        let layout = arch.layout();
        if flat.len() != layout.total_len() {
            return Err(Error::LayoutMismatch {
                expected: layout.total_len(),
                got: flat.len(),
            });
        }
        Ok(NetworkParams { flat, layout })
    }

    pub fn check(&self, arch: &Architecture) -> Result<()> {
        let expected = arch.layout();
        if expected != self.layout || self.flat.len() != expected.total_len() {
            return Err(Error::LayoutMismatch {
                expected: expected.total_len(),
                got: self.flat.len(),
            });
        }
        Ok(())
    }

    /// Checkpoint: layout hash (u64 LE), value count (u64 LE), then f64 LE values.
    pub fn write_checkpoint(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(16 + 8 * self.flat.len());
        buf.extend_from_slice(&self.layout.hash().to_le_bytes());
        buf.extend_from_slice(&(self.flat.len() as u64).to_le_bytes());
        for v in &self.flat {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&buf).map_err(|e| Error::io(path, e))
    }

    pub fn read_checkpoint(arch: &Architecture, path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        let layout = arch.layout();
        if bytes.len() < 16 {
            return Err(Error::Parse(format!("{}: truncated checkpoint header", path.display())));
        }
        let word = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
        if word(0) != layout.hash() {
            return Err(Error::Parse(format!(
                "{}: layout hash {:#x} does not match architecture ({:#x})",
                path.display(),
                word(0),
                layout.hash()
            )));
        }
        let n = word(8) as usize;
        if n != layout.total_len() || bytes.len() != 16 + 8 * n {
            return Err(Error::LayoutMismatch {
                expected: layout.total_len(),
                got: n,
            });
        }
        let flat = bytes[16..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(NetworkParams { flat, layout })
    }
}

/// Glorot-uniform weights, zero biases; deterministic per seed.
pub fn init(arch: &Architecture, seed: u64) -> NetworkParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = NetworkParams::zeros(arch);
    for slice in &params.layout.slices {
        if slice.is_bias() {
            continue;
        }
        let (fan_in, fan_out) = slice.fans();
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        for v in &mut params.flat[slice.range()] {
            *v = rng.gen_range(-bound..bound);
        }
    }
    params
}
