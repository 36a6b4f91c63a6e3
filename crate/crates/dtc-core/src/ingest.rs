//! Tensor file I/O and the sliding-window correlation-tensor builder.
//!
//! The file format is deliberately dumb: a `DTNS` magic, a version, the
//! dimension vector, then the raw little-endian `f64` payload in the same
//! last-index-fastest order the in-memory buffer uses, so round-trips are
//! bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{DtcError, Result};
use crate::tensor::DenseTensor;

const MAGIC: &[u8; 4] = b"DTNS";
const VERSION: u16 = 1;

/// Write a tensor to `path` in the DTNS binary format.
pub fn write_tensor(t: &DenseTensor, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(t.order() as u16).to_le_bytes())?;
    for &d in t.dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for &v in t.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read a tensor from a DTNS file, validating magic, version, and length.
pub fn read_tensor(path: &Path) -> Result<DenseTensor> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| DtcError::MalformedFile("file shorter than header".into()))?;
    if &magic != MAGIC {
        return Err(DtcError::MalformedFile(format!(
            "bad magic {:?}, expected \"DTNS\"",
            magic
        )));
    }
    let mut u16buf = [0u8; 2];
    r.read_exact(&mut u16buf)
        .map_err(|_| DtcError::MalformedFile("missing version".into()))?;
    let version = u16::from_le_bytes(u16buf);
    if version != VERSION {
        return Err(DtcError::MalformedFile(format!(
            "unsupported version {}",
            version
        )));
    }
    r.read_exact(&mut u16buf)
        .map_err(|_| DtcError::MalformedFile("missing order".into()))?;
    let order = u16::from_le_bytes(u16buf) as usize;
    if order == 0 {
        return Err(DtcError::MalformedFile("order must be >= 1".into()));
    }
    let mut dims = Vec::with_capacity(order);
    let mut u64buf = [0u8; 8];
    for _ in 0..order {
        r.read_exact(&mut u64buf)
            .map_err(|_| DtcError::MalformedFile("truncated dimension list".into()))?;
        dims.push(u64::from_le_bytes(u64buf) as usize);
    }
    let expected: usize = dims.iter().product();
    let mut data = Vec::with_capacity(expected);
    let mut f64buf = [0u8; 8];
    loop {
        match r.read_exact(&mut f64buf) {
            Ok(()) => data.push(f64::from_le_bytes(f64buf)),
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
    }
    if data.len() != expected {
        return Err(DtcError::TruncatedPayload {
            expected,
            found: data.len(),
        });
    }
    DenseTensor::new(dims, data)
}

/// Sliding correlation-window layout over a `p x T_len` series matrix.
#[derive(Debug, Clone, Copy)]
pub struct WindowSpec {
    pub width: usize,
    pub step: usize,
}

impl WindowSpec {
    pub fn new(width: usize, step: usize) -> Self {
        Self { width, step }
    }

    /// Number of windows for a series of the given length.
    pub fn count(&self, t_len: usize) -> Result<usize> {
        if self.width < 2 || self.step == 0 {
            return Err(DtcError::InvalidParameter(format!(
                "window width {} / step {} invalid (need width >= 2, step >= 1)",
                self.width, self.step
            )));
        }
        if self.width > t_len {
            return Err(DtcError::InvalidParameter(format!(
                "window width {} exceeds series length {}",
                self.width, t_len
            )));
        }
        Ok((t_len - self.width) / self.step + 1)
    }
}

/// Result of [`sliding_corr`]: the `(p, p, t)` correlation tensor plus a
/// flag recording whether any window contained a zero-variance series
/// (whose off-diagonal correlations are set to 0 by convention).
#[derive(Debug, Clone)]
pub struct CorrTensor {
    pub tensor: DenseTensor,
    pub zero_variance_windows: usize,
}

/// Pearson correlation matrix of each sliding window, stacked on a third
/// mode.
pub fn sliding_corr(ts: &[Vec<f64>], spec: &WindowSpec) -> Result<CorrTensor> {
    let p = ts.len();
    if p < 2 {
        return Err(DtcError::EmptyInput(
            "need at least two series for correlations".into(),
        ));
    }
    let t_len = ts[0].len();
    for (i, row) in ts.iter().enumerate() {
        if row.len() != t_len {
            return Err(DtcError::DimMismatch(format!(
                "series {} has length {}, expected {}",
                i,
                row.len(),
                t_len
            )));
        }
    }
    let t = spec.count(t_len)?;
    let w = spec.width;
    let mut out = DenseTensor::zeros(vec![p, p, t])?;
    let mut flagged = 0usize;
    for k in 0..t {
        let lo = k * spec.step;
        let hi = lo + w;
        // centered windows and their standard deviations
        let mut centered: Vec<Vec<f64>> = Vec::with_capacity(p);
        let mut sd = Vec::with_capacity(p);
        for row in ts {
            let seg = &row[lo..hi];
            let mean = seg.iter().sum::<f64>() / w as f64;
            let c: Vec<f64> = seg.iter().map(|x| x - mean).collect();
            let s = (c.iter().map(|x| x * x).sum::<f64>() / (w as f64 - 1.0)).sqrt();
            centered.push(c);
            sd.push(s);
        }
        if sd.iter().any(|&s| s == 0.0) {
            flagged += 1;
        }
        let data = out.data_mut();
        for i in 0..p {
            for j in 0..p {
                let val = if i == j {
                    1.0
                } else if sd[i] == 0.0 || sd[j] == 0.0 {
                    0.0
                } else {
                    let cov = centered[i]
                        .iter()
                        .zip(&centered[j])
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                        / (w as f64 - 1.0);
                    cov / (sd[i] * sd[j])
                };
                data[(i * p + j) * t + k] = val;
            }
        }
    }
    Ok(CorrTensor {
        tensor: out,
        zero_variance_windows: flagged,
    })
}

/// Read a rectangular numeric CSV as a row-per-series matrix. A header row
/// is detected by a non-numeric first row and skipped.
pub fn import_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix_csv(&text)
}

pub fn parse_matrix_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let lines: Vec<&str> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .collect();
    if lines.is_empty() {
        return Err(DtcError::EmptyInput("CSV has no rows".into()));
    }
    let header_is_text = lines[0]
        .split(',')
        .any(|c| c.trim().parse::<f64>().is_err());
    let start = usize::from(header_is_text);
    if start >= lines.len() {
        return Err(DtcError::EmptyInput("CSV has only a header row".into()));
    }
    let mut out = Vec::with_capacity(lines.len() - start);
    let mut width = None;
    for (offset, line) in lines[start..].iter().enumerate() {
        let row_no = start + offset + 1; // 1-based, counting the header
        let mut row = Vec::new();
        for (col_idx, cell) in line.split(',').enumerate() {
            let v = cell.trim().parse::<f64>().map_err(|_| DtcError::CsvParse {
                row: row_no,
                col: col_idx + 1,
                value: cell.trim().to_string(),
            })?;
            row.push(v);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(DtcError::RaggedCsv {
                    row: row_no,
                    found: row.len(),
                    expected: w,
                })
            }
            _ => {}
        }
        out.push(row);
    }
    Ok(out)
}
