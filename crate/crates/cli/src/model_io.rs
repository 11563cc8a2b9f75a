//! Versioned binary model files.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      8 bytes  "AOSELM1\0" (version digit inside the magic)
//! scheme     u8       0 = norm, 1 = ros
//! activation u8       0 = sigmoid, 1 = tanh
//! ridge      f64
//! inputs     u64      d
//! hidden     u64      L
//! outputs    u64      m
//! blocks     u64      concept count, then per block: col_start u64,
//!                     width u64, gain f64
//! seeds      u64      count, then that many u64
//! matrices   A (d x L), bias (1 x L), K (L x L), beta (L x m), each as
//!            rows u64, cols u64, then rows*cols f64
//! crc        u32      CRC-32 over every preceding byte
//! ```
//!
//! Loads verify the checksum before parsing and re-validate all structural
//! invariants, so a loaded model is exactly as trustworthy as a trained one.

use std::path::Path;

use aoselm::model::{Activation, ElmModel, InitScheme};
use aoselm::{Mat, Model};
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"AOSELM1\0";

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model format version {0:?}")]
    Version(String),
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("malformed payload: {0}")]
    Malformed(String),
    #[error("model invariant violated: {0}")]
    Invalid(String),
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn matrix(&mut self, m: &Mat) {
        self.u64(m.rows() as u64);
        self.u64(m.cols() as u64);
        for &v in m.data() {
            self.f64(v);
        }
    }
}

/// Serializes a model (plus the seeds that produced it) to `path`.
pub fn save_model(model: &Model, seeds: &[u64], path: impl AsRef<Path>) -> Result<(), ModelIoError> {
    let mut w = Writer { buf: Vec::new() };
    w.buf.extend_from_slice(MAGIC);
    w.u8(match model.scheme() {
        InitScheme::Norm => 0,
        InitScheme::Ros => 1,
    });
    w.u8(match model.activation() {
        Activation::Sigmoid => 0,
        Activation::Tanh => 1,
    });
    w.f64(model.ridge());
    w.u64(model.input_dim() as u64);
    w.u64(model.hidden_count() as u64);
    w.u64(model.output_dim() as u64);
    w.u64(model.concepts().len() as u64);
    for block in model.concepts() {
        w.u64(block.col_start() as u64);
        w.u64(block.width() as u64);
        w.f64(block.gain());
    }
    w.u64(seeds.len() as u64);
    for &s in seeds {
        w.u64(s);
    }
    w.matrix(model.input_weights());
    let bias = Mat::from_vec(1, model.bias().len(), model.bias().to_vec())
        .map_err(|e| ModelIoError::Invalid(e.to_string()))?;
    w.matrix(&bias);
    w.matrix(model.autocorrelation());
    w.matrix(model.output_weights());
    let crc = crc32fast::hash(&w.buf);
    w.buf.extend_from_slice(&crc.to_le_bytes());
    std::fs::write(path, w.buf)?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], ModelIoError> {
        if self.pos + n > self.buf.len() {
            return Err(ModelIoError::Malformed(format!("truncated at {what}")));
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }
    fn u8(&mut self, what: &str) -> Result<u8, ModelIoError> {
        Ok(self.take(1, what)?[0])
    }
    fn u64(&mut self, what: &str) -> Result<u64, ModelIoError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn f64(&mut self, what: &str) -> Result<f64, ModelIoError> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn dim(&mut self, what: &str) -> Result<usize, ModelIoError> {
        let v = self.u64(what)?;
        usize::try_from(v)
            .ok()
            .filter(|&v| v <= (1 << 32))
            .ok_or_else(|| ModelIoError::Malformed(format!("{what} out of range: {v}")))
    }
    fn matrix(&mut self, what: &str) -> Result<Mat, ModelIoError> {
        let rows = self.dim(what)?;
        let cols = self.dim(what)?;
        let count = rows
            .checked_mul(cols)
            .ok_or_else(|| ModelIoError::Malformed(format!("{what} dimensions overflow")))?;
        let bytes = self.take(count * 8, what)?;
        let data: Vec<f64> =
            bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Mat::from_vec(rows, cols, data).map_err(|e| ModelIoError::Invalid(format!("{what}: {e}")))
    }
}

/// Loads a model and its recorded seeds, verifying checksum and invariants.
pub fn load_model(path: impl AsRef<Path>) -> Result<(Model, Vec<u64>), ModelIoError> {
    let buf = std::fs::read(path)?;
    if buf.len() < MAGIC.len() + 4 {
        return Err(ModelIoError::BadMagic);
    }
    if &buf[..6] != b"AOSELM" {
        return Err(ModelIoError::BadMagic);
    }
    if &buf[..8] != MAGIC {
        return Err(ModelIoError::Version(
            String::from_utf8_lossy(&buf[6..8]).trim_end_matches('\0').to_string(),
        ));
    }
    let (payload, crc_bytes) = buf.split_at(buf.len() - 4);
    let stored = u32::from_le_bytes(crc_bytes.try_into().unwrap());
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(ModelIoError::Checksum { stored, computed });
    }

    let mut r = Reader { buf: payload, pos: 8 };
    let scheme = match r.u8("scheme")? {
        0 => InitScheme::Norm,
        1 => InitScheme::Ros,
        v => return Err(ModelIoError::Malformed(format!("unknown scheme tag {v}"))),
    };
    let activation = match r.u8("activation")? {
        0 => Activation::Sigmoid,
        1 => Activation::Tanh,
        v => return Err(ModelIoError::Malformed(format!("unknown activation tag {v}"))),
    };
    let ridge = r.f64("ridge")?;
    let inputs = r.dim("inputs")?;
    let hidden = r.dim("hidden")?;
    let outputs = r.dim("outputs")?;
    let block_count = r.dim("block count")?;
    let mut blocks = Vec::with_capacity(block_count);
    for _ in 0..block_count {
        let col_start = r.dim("block start")?;
        let width = r.dim("block width")?;
        let gain = r.f64("block gain")?;
        blocks.push((col_start, width, gain));
    }
    let seed_count = r.dim("seed count")?;
    let mut seeds = Vec::with_capacity(seed_count);
    for _ in 0..seed_count {
        seeds.push(r.u64("seed")?);
    }
    let input_weights = r.matrix("input weights")?;
    let bias = r.matrix("bias")?;
    let autocorr = r.matrix("autocorrelation")?;
    let output_weights = r.matrix("output weights")?;
    if r.pos != payload.len() {
        return Err(ModelIoError::Malformed("trailing bytes after payload".into()));
    }
    if input_weights.shape() != (inputs, hidden)
        || bias.shape() != (1, hidden)
        || autocorr.shape() != (hidden, hidden)
        || output_weights.shape() != (hidden, outputs)
    {
        return Err(ModelIoError::Invalid("matrix shapes disagree with header".into()));
    }
    let model = ElmModel::from_parts(
        input_weights,
        bias.into_data(),
        autocorr,
        output_weights,
        ridge,
        activation,
        scheme,
        blocks,
    )
    .map_err(|e| ModelIoError::Invalid(e.to_string()))?;
    Ok((model, seeds))
}
