//! Candidate similarity graph, image membership, and center-bias weights.

use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// Absolute tolerance for accepting a nearly symmetric input matrix.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Undirected, nonnegatively weighted graph over `M` candidates.
///
/// Row sums and the total weight are computed once at construction; the
/// objective only ever needs `r_i` and `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    weights: SquareMatrix,
    row_sums: Vec<f64>,
    total: f64,
}

impl SimilarityGraph {
    /// Validates and stores a dense weight matrix, symmetrizing it by averaging.
    pub fn from_dense(weights: SquareMatrix) -> Result<Self> {
        let m = weights.size();
        for i in 0..m {
            for j in 0..m {
                let v = weights.get(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if v < 0.0 {
                    return Err(Error::NegativeWeight { row: i, col: j, value: v });
                }
            }
        }
        let mut weights = weights;
        for i in 0..m {
            for j in i + 1..m {
                let (a, b) = (weights.get(i, j), weights.get(j, i));
                if (a - b).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::AsymmetryBeyondTolerance { row: i, col: j, a, b });
                }
                if a != b {
                    weights.set_sym(i, j, 0.5 * (a + b));
                }
            }
        }
        let row_sums: Vec<f64> = (0..m).map(|i| weights.row(i).iter().sum()).collect();
        let total = row_sums.iter().sum();
        Ok(SimilarityGraph { weights, row_sums, total })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::from_dense(SquareMatrix::from_rows(rows)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_dense(SquareMatrix::read(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.weights.write(path)
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.weights.size()
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights.get(i, j)
    }

    pub fn weights(&self) -> &SquareMatrix {
        &self.weights
    }

    /// `r_i = Σ_j s_ij`.
    #[inline]
    pub fn row_sum(&self, i: usize) -> f64 {
        self.row_sums[i]
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    /// `T = Σ_i r_i`.
    #[inline]
    pub fn total(&self) -> f64 {
        self.total
    }
}

/// Assignment of every candidate to the image it was cut from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupIndex {
    group_of: Vec<usize>,
    num_groups: usize,
}

impl GroupIndex {
    /// Every group in `0..=max` must be used at least once.
    pub fn new(group_of: Vec<usize>) -> Result<Self> {
        let num_groups = group_of.iter().max().map_or(0, |&g| g + 1);
        let mut seen = vec![false; num_groups];
        for &g in &group_of {
            seen[g] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidGroups(format!("group {missing} has no candidates")));
        }
        Ok(GroupIndex { group_of, num_groups })
    }

    /// `per_group` consecutive candidates per group, `groups` groups.
    pub fn contiguous(groups: usize, per_group: usize) -> Self {
        let group_of = (0..groups * per_group).map(|k| k / per_group).collect();
        GroupIndex { group_of, num_groups: if per_group == 0 { 0 } else { groups } }
    }

    /// Every candidate in its own group.
    pub fn singletons(m: usize) -> Self {
        GroupIndex { group_of: (0..m).collect(), num_groups: m }
    }

    #[inline]
    pub fn group_of(&self, candidate: usize) -> usize {
        self.group_of[candidate]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.group_of
    }

    pub fn len(&self) -> usize {
        self.group_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.group_of.is_empty()
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn members(&self, group: usize) -> impl Iterator<Item = usize> + '_ {
        self.group_of.iter().enumerate().filter(move |(_, &g)| g == group).map(|(k, _)| k)
    }
}

/// Per-candidate centrality weights `q_k ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterBias {
    q: Vec<f64>,
}

impl CenterBias {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = q.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("center weight {bad} outside [0, 1]")));
        }
        Ok(CenterBias { q })
    }

    pub fn zeros(m: usize) -> Self {
        CenterBias { q: vec![0.0; m] }
    }

    /// Gaussian centrality of each window center.
    ///
    /// `centers[k]` is in image coordinates of an image of size `dims[k]`. The
    /// distance to the image center is divided by half the image diagonal, so
    /// `q = exp(-d² / (2 σ_c²))` with `d ∈ [0, 1]`.
    pub fn from_positions(centers: &[(f64, f64)], dims: &[(f64, f64)], sigma_c: f64) -> Result<Self> {
        if !(sigma_c > 0.0) {
            return Err(Error::NonPositiveSigma(sigma_c));
        }
        if centers.len() != dims.len() {
            return Err(Error::SizeMismatch { what: "image dims", got: dims.len(), expected: centers.len() });
        }
        let q = centers
            .iter()
            .zip(dims)
            .map(|(&(x, y), &(w, h))| {
                if !(0.0..=w).contains(&x) || !(0.0..=h).contains(&y) {
                    return Err(Error::OutOfBoundsCenter { x, y, width: w, height: h });
                }
                let half_diag = 0.5 * w.hypot(h);
                let d = (x - 0.5 * w).hypot(y - 0.5 * h) / half_diag;
                Ok((-(d * d) / (2.0 * sigma_c * sigma_c)).exp())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CenterBias { q })
    }

    #[inline]
    pub fn weight(&self, k: usize) -> f64 {
        self.q[k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}
