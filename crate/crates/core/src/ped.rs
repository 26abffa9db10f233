//! Pyramid-error distance (PED) between receptive fields, and the pipeline
//! that turns pairwise distances into a sparse similarity matrix.

use rayon::prelude::*;

use crate::candidates::Rect;
use crate::error::{Error, Result};
use crate::graph::GroupIndex;
use crate::matrix::SquareMatrix;
use crate::nn::brute_nearest;

/// Grid sizes of the pyramid inside each receptive field.
pub const PYRAMID_LEVELS: [usize; 3] = [2, 3, 4];
/// `2² + 3² + 4²` cells.
pub const NUM_CELLS: usize = 29;
/// Distance charged when exactly one of two compared cells is empty.
pub const DEFAULT_EMPTY_PENALTY: f64 = 1.0;
pub const DEFAULT_SIGMA: f64 = 0.3;
pub const DEFAULT_PAIR_KEEP: usize = 3;

/// Index of cell `(cx, cy)` of pyramid level `level` (0, 1 or 2) in the
/// flattened `[2×2 | 3×3 | 4×4]` row-major layout.
pub fn cell_index(level: usize, cx: usize, cy: usize) -> usize {
    let offset: usize = PYRAMID_LEVELS[..level].iter().map(|g| g * g).sum();
    offset + cy * PYRAMID_LEVELS[level] + cx
}

/// A bag of equal-length descriptor vectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DescriptorSet {
    dim: usize,
    data: Vec<f64>,
}

impl DescriptorSet {
    pub fn empty(dim: usize) -> Self {
        DescriptorSet { dim, data: Vec::new() }
    }

    pub fn from_vectors<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Self> {
        let dim = vectors.first().map_or(0, |v| v.as_ref().len());
        let mut set = DescriptorSet::empty(dim);
        for v in vectors {
            set.push(v.as_ref())?;
        }
        Ok(set)
    }

    pub fn push(&mut self, v: &[f64]) -> Result<()> {
        if self.data.is_empty() && self.dim == 0 {
            self.dim = v.len();
        }
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, v.len()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("descriptor has a non-finite component".into()));
        }
        self.data.extend_from_slice(v);
        Ok(())
    }

    pub fn extend_from(&mut self, other: &DescriptorSet) -> Result<()> {
        if other.is_empty() {
            return Ok(());
        }
        if self.is_empty() && self.dim == 0 {
            self.dim = other.dim;
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        self.data.extend_from_slice(&other.data);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1))
    }
}

/// A window plus its 29 pyramid cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceptiveField {
    window: Rect,
    cells: Vec<DescriptorSet>,
}

impl ReceptiveField {
    pub fn new(window: Rect, cells: Vec<DescriptorSet>) -> Result<Self> {
        if cells.len() != NUM_CELLS {
            return Err(Error::SizeMismatch { what: "receptive field cells", got: cells.len(), expected: NUM_CELLS });
        }
        Ok(ReceptiveField { window, cells })
    }

    pub fn window(&self) -> Rect {
        self.window
    }

    pub fn center(&self) -> (f64, f64) {
        self.window.center()
    }

    pub fn cells(&self) -> &[DescriptorSet] {
        &self.cells
    }

    pub fn cell(&self, l: usize) -> &DescriptorSet {
        &self.cells[l]
    }

    /// Number of descriptors inside the window (each appears once per level).
    pub fn descriptor_count(&self) -> usize {
        self.cells[..4].iter().map(DescriptorSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(DescriptorSet::is_empty)
    }
}

fn mean_nearest(from: &DescriptorSet, to: &DescriptorSet) -> f64 {
    let total: f64 = from.iter().map(|x| brute_nearest(x, to.as_flat(), to.dim()).unwrap_or(0.0)).sum();
    total / from.len() as f64
}

/// Symmetric chamfer-style distance between two descriptor sets:
/// `½ mean_x min_y ‖x−y‖² + ½ mean_y min_x ‖x−y‖²`.
///
/// Two empty sets are at distance 0; one empty set against a nonempty one is
/// at distance `d_empty`.
pub fn set_distance(x: &DescriptorSet, y: &DescriptorSet, d_empty: f64) -> Result<f64> {
    match (x.is_empty(), y.is_empty()) {
        (true, true) => Ok(0.0),
        (true, false) | (false, true) => Ok(d_empty),
        (false, false) => {
            if x.dim() != y.dim() {
                return Err(Error::DimensionMismatch(x.dim(), y.dim()));
            }
            Ok(0.5 * mean_nearest(x, y) + 0.5 * mean_nearest(y, x))
        }
    }
}

/// Sum of [`set_distance`] over the 29 corresponding cells.
pub fn ped(a: &ReceptiveField, b: &ReceptiveField, d_empty: f64) -> Result<f64> {
    a.cells.iter().zip(&b.cells).try_fold(0.0, |acc, (x, y)| Ok(acc + set_distance(x, y, d_empty)?))
}

/// One-directional distance `mean_x min_p ‖x−p‖²` used against class pools.
/// An empty `x` is at distance 0; a nonempty `x` against an empty pool costs
/// `d_empty` per descriptor.
pub fn directed_distance(x: &DescriptorSet, pool: &DescriptorSet, d_empty: f64) -> Result<f64> {
    if x.is_empty() {
        return Ok(0.0);
    }
    if pool.is_empty() {
        return Ok(d_empty);
    }
    if x.dim() != pool.dim() {
        return Err(Error::DimensionMismatch(x.dim(), pool.dim()));
    }
    Ok(mean_nearest(x, pool))
}

/// `exp(-d / (2σ²))`; an infinite distance maps to 0.
pub fn kernelize(d: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::NonPositiveSigma(sigma));
    }
    if d.is_nan() || d < 0.0 {
        return Err(Error::NegativeDistance(d));
    }
    Ok((-d / (2.0 * sigma * sigma)).exp())
}

/// Divides every finite entry by the largest finite entry; returns that maximum.
/// A matrix whose finite entries are all zero is left untouched.
pub fn normalize_by_max(d: &mut SquareMatrix) -> f64 {
    let n = d.size();
    let max = d.as_slice().iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    if max > 0.0 {
        for i in 0..n {
            for j in 0..n {
                let v = d.get(i, j);
                if v.is_finite() {
                    d.set(i, j, v / max);
                }
            }
        }
    }
    max
}

/// Elementwise [`kernelize`] of a distance matrix, diagonal pinned to 1.
pub fn kernelize_matrix(d: &SquareMatrix, sigma: f64) -> Result<SquareMatrix> {
    let n = d.size();
    let mut s = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            s.set(i, j, if i == j { 1.0 } else { kernelize(d.get(i, j), sigma)? });
        }
    }
    Ok(s)
}

/// Max-normalizes a copy of `d` and kernelizes it.
pub fn similarity_from_distances(d: &SquareMatrix, sigma: f64) -> Result<SquareMatrix> {
    let mut d = d.clone();
    normalize_by_max(&mut d);
    kernelize_matrix(&d, sigma)
}

/// Keeps, per row, the `k` largest positive off-diagonal similarities (ties to
/// the smaller column) and symmetrizes by elementwise max.
pub fn sparsify_knn(s: &SquareMatrix, k: usize) -> Result<SquareMatrix> {
    let m = s.size();
    if k >= m {
        return Err(Error::KTooLarge { k, m });
    }
    let mut kept = SquareMatrix::zeros(m);
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(m);
    for i in 0..m {
        row.clear();
        row.extend((0..m).filter(|&j| j != i).map(|j| (j, s.get(i, j))).filter(|&(_, v)| v > 0.0));
        row.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for &(j, v) in row.iter().take(k) {
            kept.set(i, j, v);
        }
        kept.set(i, i, s.get(i, i));
    }
    let mut out = SquareMatrix::zeros(m);
    for i in 0..m {
        for j in 0..m {
            out.set(i, j, kept.get(i, j).max(kept.get(j, i)));
        }
    }
    Ok(out)
}

/// Zeroes every off-diagonal similarity below `threshold`.
pub fn sparsify_eps(s: &SquareMatrix, threshold: f64) -> SquareMatrix {
    let mut out = s.clone();
    for i in 0..s.size() {
        for j in 0..s.size() {
            if i != j && s.get(i, j) < threshold {
                out.set(i, j, 0.0);
            }
        }
    }
    out
}

/// Similarity threshold equivalent to dropping normalized distances above `eps`.
pub fn eps_similarity_threshold(eps: f64, sigma: f64) -> Result<f64> {
    kernelize(eps, sigma)
}

/// Keeps only the `m_keep` smallest distances between every pair of images.
///
/// Every other cross-image entry and every off-diagonal within-image entry
/// becomes `+∞` (a non-edge). Ties go to the smaller `(row, col)`.
pub fn pairwise_smooth(d: &SquareMatrix, groups: &GroupIndex, m_keep: usize) -> Result<SquareMatrix> {
    let m = d.size();
    if groups.len() != m {
        return Err(Error::SizeMismatch { what: "group index", got: groups.len(), expected: m });
    }
    if m_keep == 0 {
        return Err(Error::InvalidParameter("m_keep must be at least 1".into()));
    }
    let members: Vec<Vec<usize>> = (0..groups.num_groups()).map(|g| groups.members(g).collect()).collect();
    let mut out = SquareMatrix::filled(m, f64::INFINITY);
    for i in 0..m {
        out.set(i, i, d.get(i, i));
    }
    let mut block: Vec<(f64, usize, usize)> = Vec::new();
    for (ga, rows) in members.iter().enumerate() {
        for cols in &members[ga + 1..] {
            block.clear();
            for &i in rows {
                for &j in cols {
                    let v = d.get(i, j);
                    if v.is_finite() {
                        block.push((v, i.min(j), i.max(j)));
                    }
                }
            }
            block.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            for &(v, i, j) in block.iter().take(m_keep) {
                out.set_sym(i, j, v);
            }
        }
    }
    Ok(out)
}

/// Pairwise PED over all receptive fields, computed in parallel.
///
/// With `skip_within`, pairs from the same image are not computed and stay at
/// `+∞`; [`pairwise_smooth`] discards them anyway.
pub fn distance_matrix(
    fields: &[ReceptiveField],
    skip_within: Option<&GroupIndex>,
    d_empty: f64,
) -> Result<SquareMatrix> {
    let m = fields.len();
    if let Some(g) = skip_within {
        if g.len() != m {
            return Err(Error::SizeMismatch { what: "group index", got: g.len(), expected: m });
        }
    }
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (i + 1..m)
                .map(|j| match skip_within {
                    Some(g) if g.group_of(i) == g.group_of(j) => Ok(f64::INFINITY),
                    _ => ped(&fields[i], &fields[j], d_empty),
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut d = SquareMatrix::zeros(m);
    for (i, row) in rows.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            d.set_sym(i, i + 1 + off, v);
        }
    }
    Ok(d)
}
