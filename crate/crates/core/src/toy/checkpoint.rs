//! Checkpoint files: one line of JSON describing shapes and the synthesis
//! setup, then the parameters as little-endian `f64` values in
//! [`ToyModelParams::to_flat`] order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::toy::model::{ModelDims, ToyModelParams};
use crate::toy::synth::SynthesisSpec;

const FORMAT: &str = "toy-transducer-v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub dims: ModelDims,
    /// `(name, shape)` in storage order.
    pub tensors: Vec<(String, Vec<usize>)>,
    pub synthesis: SynthesisSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub params: ToyModelParams,
    pub synthesis: SynthesisSpec,
}

impl Checkpoint {
    fn header(&self) -> CheckpointHeader {
        let p = &self.params;
        let shape2 = |a: &ndarray::Array2<f64>| vec![a.nrows(), a.ncols()];
        CheckpointHeader {
            format: FORMAT.to_string(),
            dims: p.dims(),
            tensors: vec![
                ("enc_w".into(), shape2(&p.enc_w)),
                ("enc_b".into(), vec![p.enc_b.len()]),
                ("embed".into(), shape2(&p.embed)),
                ("proj_w".into(), shape2(&p.proj_w)),
                ("proj_b".into(), vec![p.proj_b.len()]),
            ],
            synthesis: self.synthesis.clone(),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec(&self.header())?;
        out.push(b'\n');
        for x in self.params.to_flat() {
            out.extend_from_slice(&x.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("missing header line".into()))?;
        let header: CheckpointHeader =
            serde_json::from_slice(&bytes[..nl]).map_err(|e| bad(format!("header: {e}")))?;
        if header.format != FORMAT {
            return Err(bad(format!("unsupported format {:?}", header.format)));
        }
        let body = &bytes[nl + 1..];
        if body.len() % 8 != 0 {
            return Err(bad(format!("body of {} bytes is not a whole number of f64", body.len())));
        }
        let values: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let params = ToyModelParams::from_flat(header.dims, &values)?;
        let ckpt = Checkpoint {
            params,
            synthesis: header.synthesis,
        };
        if ckpt.header().tensors != header.tensors {
            return Err(bad("tensor shapes do not match model dimensions".into()));
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}
