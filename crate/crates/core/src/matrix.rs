//! Dense square matrices and their text serialization.
//!
//! The text format is one line holding the size `M`, followed by `M` lines of `M`
//! space-separated decimals in row-major order. Positive infinity is written as
//! `inf`, which marks a non-edge in a distance matrix.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self::filled(n, 0.0)
    }

    pub fn filled(n: usize, value: f64) -> Self {
        SquareMatrix { n, data: vec![value; n * n] }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (row, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::NonSquare { row, len: r.len(), expected: n });
            }
            data.extend_from_slice(r);
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn from_flat(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::SizeMismatch { what: "flat matrix", got: data.len(), expected: n * n });
        }
        Ok(SquareMatrix { n, data })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Sets `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.set(i, j, v);
        self.set(j, i, v);
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.n).unwrap();
        for i in 0..self.n {
            let row = self.row(i);
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                write!(out, "{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str, path: &Path) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (lno, header) = lines.next().ok_or_else(|| perr(1, "missing size line".into()))?;
        let n: usize = header.trim().parse().map_err(|e| perr(lno + 1, format!("bad size {header:?}: {e}")))?;
        let mut data = Vec::with_capacity(n * n);
        for row in 0..n {
            let (lno, line) =
                lines.next().ok_or_else(|| perr(lno + 2 + row, format!("expected {n} rows, found {row}")))?;
            let before = data.len();
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|e| perr(lno + 1, format!("bad number {tok:?}: {e}")))?;
                if v.is_nan() {
                    return Err(perr(lno + 1, "NaN entry".into()));
                }
                data.push(v);
            }
            if data.len() - before != n {
                return Err(Error::NonSquare { row, len: data.len() - before, expected: n });
            }
        }
        if let Some((lno, _)) = lines.next() {
            return Err(perr(lno + 1, "trailing data after matrix".into()));
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_text(&text, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}
