//! Plain-text dataset interchange.
//!
//! Classification files carry a `f0,...,f{d-1},label` header with decimal
//! features and an integer class label; regression files carry `x,target`.
//! Output is UTF-8 with LF line endings.

use std::fs;
use std::path::Path;

use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

use super::DataError;

/// Writes a classification dataset (`inputs` is `d x N`).
pub fn write_classification<F: Scalar>(
    path: impl AsRef<Path>,
    inputs: &DenseMatrix<F>,
    labels: &[usize],
) -> Result<(), DataError> {
    if inputs.cols() != labels.len() {
        return Err(DataError::WrongLength { expected: inputs.cols(), got: labels.len() });
    }
    let d = inputs.rows();
    let mut out = String::new();
    for i in 0..d {
        out.push_str(&format!("f{i},"));
    }
    out.push_str("label\n");
    for j in 0..inputs.cols() {
        for i in 0..d {
            out.push_str(&format!("{},", fmt_scalar(inputs.get(i, j))));
        }
        out.push_str(&format!("{}\n", labels[j]));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes a regression dataset.
pub fn write_regression<F: Scalar>(
    path: impl AsRef<Path>,
    xs: &[F],
    ys: &[F],
) -> Result<(), DataError> {
    if xs.len() != ys.len() {
        return Err(DataError::WrongLength { expected: xs.len(), got: ys.len() });
    }
    let mut out = String::from("x,target\n");
    for (x, y) in xs.iter().zip(ys) {
        out.push_str(&format!("{},{}\n", fmt_scalar(*x), fmt_scalar(*y)));
    }
    fs::write(path, out)?;
    Ok(())
}

fn fmt_scalar<F: Scalar>(v: F) -> String {
    let f = v.to_f64().unwrap_or(f64::NAN);
    // shortest representation that round-trips f64
    format!("{f}")
}

/// Reads a classification dataset back into (`d x N` inputs, labels).
pub fn read_classification<F: Scalar>(
    path: impl AsRef<Path>,
) -> Result<(DenseMatrix<F>, Vec<usize>), DataError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or(DataError::Csv { line: 1, message: "empty file".into() })?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 2 || columns.last() != Some(&"label") {
        return Err(DataError::Csv { line: 1, message: "expected f0,...,label header".into() });
    }
    let d = columns.len() - 1;
    let mut features: Vec<F> = Vec::new();
    let mut labels = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 1 {
            return Err(DataError::Csv {
                line: idx + 1,
                message: format!("expected {} fields, got {}", d + 1, fields.len()),
            });
        }
        for field in &fields[..d] {
            let v: f64 = field.parse().map_err(|e| DataError::Csv {
                line: idx + 1,
                message: format!("bad feature {field:?}: {e}"),
            })?;
            features.push(F::from_f64_lossy(v));
        }
        let label: usize = fields[d].parse().map_err(|e| DataError::Csv {
            line: idx + 1,
            message: format!("bad label {:?}: {e}", fields[d]),
        })?;
        labels.push(label);
    }
    let n = labels.len();
    // stored row-per-sample above; transpose into column-per-sample
    let row_major = DenseMatrix::from_vec(n, d, features)
        .map_err(|e| DataError::Csv { line: 0, message: e.to_string() })?;
    Ok((row_major.transpose(), labels))
}

/// Reads a regression dataset back into (xs, targets).
pub fn read_regression<F: Scalar>(path: impl AsRef<Path>) -> Result<(Vec<F>, Vec<F>), DataError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) =
        lines.next().ok_or(DataError::Csv { line: 1, message: "empty file".into() })?;
    if header != "x,target" {
        return Err(DataError::Csv { line: 1, message: "expected x,target header".into() });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let parse = |field: Option<&str>, idx: usize| -> Result<f64, DataError> {
            field
                .ok_or(DataError::Csv { line: idx + 1, message: "missing field".into() })?
                .parse()
                .map_err(|e| DataError::Csv { line: idx + 1, message: format!("{e}") })
        };
        xs.push(F::from_f64_lossy(parse(fields.next(), idx)?));
        ys.push(F::from_f64_lossy(parse(fields.next(), idx)?));
    }
    Ok((xs, ys))
}
