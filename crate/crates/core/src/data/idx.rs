//! IDX image/label file ingestion (big-endian headers, u8 payload).

use std::fs::File;
use std::io::{BufReader, ErrorKind, Read};
use std::path::Path;

use crate::scalar::Scalar;

use super::{DataError, ImageSet};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

fn read_u32<R: Read>(reader: &mut R, what: &'static str) -> Result<u32, DataError> {
    let mut buf = [0u8; 4];
    reader.read_exact(&mut buf).map_err(|e| map_eof(e, what))?;
    Ok(u32::from_be_bytes(buf))
}

fn map_eof(err: std::io::Error, what: &'static str) -> DataError {
    if err.kind() == ErrorKind::UnexpectedEof {
        DataError::Truncated(what)
    } else {
        DataError::Io(err)
    }
}

/// Loads an IDX image file; pixels are scaled from 0..=255 to `[-1, 1]`.
/// Returns the per-sample vectors and the (rows, cols) geometry.
pub fn load_idx_images<F: Scalar>(
    path: impl AsRef<Path>,
) -> Result<(Vec<Vec<F>>, (usize, usize)), DataError> {
    let mut reader = BufReader::new(File::open(path)?);
    let magic = read_u32(&mut reader, "magic")?;
    if magic != IMAGES_MAGIC {
        return Err(DataError::BadMagic { expected: IMAGES_MAGIC, got: magic });
    }
    let count = read_u32(&mut reader, "image count")? as usize;
    let rows = read_u32(&mut reader, "row count")? as usize;
    let cols = read_u32(&mut reader, "column count")? as usize;
    let per_image = rows.checked_mul(cols).ok_or(DataError::Overflow)?;
    let total = count.checked_mul(per_image).ok_or(DataError::Overflow)?;
    let mut payload = vec![0u8; total];
    reader.read_exact(&mut payload).map_err(|e| map_eof(e, "image payload"))?;
    let images = payload
        .chunks_exact(per_image)
        .map(|chunk| {
            chunk.iter().map(|&b| F::from_f64_lossy(b as f64 / 255.0 * 2.0 - 1.0)).collect()
        })
        .collect();
    Ok((images, (rows, cols)))
}

/// Loads an IDX label file.
pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>, DataError> {
    let mut reader = BufReader::new(File::open(path)?);
    let magic = read_u32(&mut reader, "magic")?;
    if magic != LABELS_MAGIC {
        return Err(DataError::BadMagic { expected: LABELS_MAGIC, got: magic });
    }
    let count = read_u32(&mut reader, "label count")? as usize;
    let mut payload = vec![0u8; count];
    reader.read_exact(&mut payload).map_err(|e| map_eof(e, "label payload"))?;
    Ok(payload)
}

impl<F: Scalar> ImageSet<F> {
    /// Loads a paired IDX image/label file into an image set.
    pub fn from_idx(
        images_path: impl AsRef<Path>,
        labels_path: impl AsRef<Path>,
    ) -> Result<Self, DataError> {
        let (images, _) = load_idx_images(images_path)?;
        let labels_u8 = load_idx_labels(labels_path)?;
        if images.len() != labels_u8.len() {
            return Err(DataError::WrongLength { expected: images.len(), got: labels_u8.len() });
        }
        let labels: Vec<usize> = labels_u8.into_iter().map(usize::from).collect();
        let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
        Ok(ImageSet { images, labels, classes })
    }
}
