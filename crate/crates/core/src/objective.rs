//! The selection objective `F(A) = H_τ(A) + λ₁ G(A) + λ₂ Σ_{i∈A} q_i`.
//!
//! `H_τ` is the similarity prior. With `α = τ - 1`, `β = τ` and `μ = 1 + τ T` it
//! collapses to `log(1 + (τ + 1) Σ_{i∈A} r_i)`, so the optimizer only tracks the
//! row-sum mass of the selection. The direct three-block definition is kept
//! here as a reference evaluation.

use crate::error::{Error, Result};
use crate::graph::{CenterBias, GroupIndex, SimilarityGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveParams {
    tau: f64,
    lambda1: f64,
    lambda2: f64,
}

impl ObjectiveParams {
    pub const DEFAULT_TAU: f64 = 2.0;
    pub const DEFAULT_LAMBDA1: f64 = 100.0;
    pub const DEFAULT_LAMBDA2: f64 = 0.0;

    pub fn new(tau: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(tau > 1.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("tau must be a finite value > 1, got {tau}")));
        }
        for (name, v) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(ObjectiveParams { tau, lambda1, lambda2 })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// `μ = 1 + τ T`.
    pub fn mu(&self, graph: &SimilarityGraph) -> f64 {
        1.0 + self.tau * graph.total()
    }
}

impl Default for ObjectiveParams {
    fn default() -> Self {
        ObjectiveParams { tau: Self::DEFAULT_TAU, lambda1: Self::DEFAULT_LAMBDA1, lambda2: Self::DEFAULT_LAMBDA2 }
    }
}

fn check_indices(m: usize, idx: &[usize]) -> Result<()> {
    match idx.iter().find(|&&i| i >= m) {
        Some(&index) => Err(Error::IndexOutOfRange { index, len: m }),
        None => Ok(()),
    }
}

fn mask_of(m: usize, set: &[usize]) -> Result<Vec<bool>> {
    check_indices(m, set)?;
    let mut mask = vec![false; m];
    for &i in set {
        mask[i] = true;
    }
    Ok(mask)
}

/// `h(S_{rows, cols}) = Σ_{i∈rows} Σ_{j∈cols} s_ij`.
pub fn h_sum(graph: &SimilarityGraph, rows: &[usize], cols: &[usize]) -> Result<f64> {
    check_indices(graph.size(), rows)?;
    check_indices(graph.size(), cols)?;
    Ok(rows.iter().map(|&i| cols.iter().map(|&j| graph.weight(i, j)).sum::<f64>()).sum())
}

/// `H_τ(A)` from its definition: `log(μ + h(A,A) - (τ-1) h(A,Ā) - τ h(Ā,Ā))`.
pub fn h_direct(graph: &SimilarityGraph, params: &ObjectiveParams, set: &[usize]) -> Result<f64> {
    let m = graph.size();
    let mask = mask_of(m, set)?;
    let inside: Vec<usize> = (0..m).filter(|&i| mask[i]).collect();
    let outside: Vec<usize> = (0..m).filter(|&i| !mask[i]).collect();
    let tau = params.tau;
    let arg = params.mu(graph) + h_sum(graph, &inside, &inside)?
        - (tau - 1.0) * h_sum(graph, &inside, &outside)?
        - tau * h_sum(graph, &outside, &outside)?;
    if !(arg > 0.0) {
        return Err(Error::NonPositiveLogArgument(arg));
    }
    Ok(arg.ln())
}

/// `H_τ(A)` from the row-sum mass `Σ_{i∈A} r_i` alone.
pub fn h_closed(params: &ObjectiveParams, rowsum_mass: f64) -> f64 {
    ((params.tau + 1.0) * rowsum_mass).ln_1p()
}

/// Balance term `G(A) = Σ_j log(|A_j| + 1)`.
pub fn balance(group_counts: &[usize]) -> f64 {
    group_counts.iter().map(|&c| (c as f64).ln_1p()).sum()
}

/// Running summary of a selection; everything the closed-form gain needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionState {
    selected: Vec<usize>,
    mask: Vec<bool>,
    rowsum_mass: f64,
    group_counts: Vec<usize>,
    center_mass: f64,
}

impl SelectionState {
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn contains(&self, k: usize) -> bool {
        self.mask[k]
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn rowsum_mass(&self) -> f64 {
        self.rowsum_mass
    }

    pub fn group_counts(&self) -> &[usize] {
        &self.group_counts
    }

    pub fn center_mass(&self) -> f64 {
        self.center_mass
    }
}

/// Objective bound to one problem instance.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    graph: &'a SimilarityGraph,
    groups: &'a GroupIndex,
    bias: &'a CenterBias,
    params: ObjectiveParams,
}

impl<'a> Objective<'a> {
    pub fn new(
        graph: &'a SimilarityGraph,
        groups: &'a GroupIndex,
        bias: &'a CenterBias,
        params: ObjectiveParams,
    ) -> Result<Self> {
        let m = graph.size();
        if groups.len() != m {
            return Err(Error::SizeMismatch { what: "group index", got: groups.len(), expected: m });
        }
        if bias.len() != m {
            return Err(Error::SizeMismatch { what: "center bias", got: bias.len(), expected: m });
        }
        Ok(Objective { graph, groups, bias, params })
    }

    pub fn size(&self) -> usize {
        self.graph.size()
    }

    pub fn graph(&self) -> &'a SimilarityGraph {
        self.graph
    }

    pub fn groups(&self) -> &'a GroupIndex {
        self.groups
    }

    pub fn bias(&self) -> &'a CenterBias {
        self.bias
    }

    pub fn params(&self) -> &ObjectiveParams {
        &self.params
    }

    pub fn empty_state(&self) -> SelectionState {
        SelectionState {
            selected: Vec::new(),
            mask: vec![false; self.size()],
            rowsum_mass: 0.0,
            group_counts: vec![0; self.groups.num_groups()],
            center_mass: 0.0,
        }
    }

    /// State after inserting `set` in order; duplicates are rejected.
    pub fn state_for(&self, set: &[usize]) -> Result<SelectionState> {
        let mut state = self.empty_state();
        for &a in set {
            self.insert(&mut state, a)?;
        }
        Ok(state)
    }

    pub fn insert(&self, state: &mut SelectionState, a: usize) -> Result<()> {
        check_indices(self.size(), &[a])?;
        if state.mask[a] {
            return Err(Error::AlreadySelected(a));
        }
        state.mask[a] = true;
        state.selected.push(a);
        state.rowsum_mass += self.graph.row_sum(a);
        state.group_counts[self.groups.group_of(a)] += 1;
        state.center_mass += self.bias.weight(a);
        Ok(())
    }

    /// `F` of the selection summarized by `state`.
    pub fn value(&self, state: &SelectionState) -> f64 {
        h_closed(&self.params, state.rowsum_mass)
            + self.params.lambda1 * balance(&state.group_counts)
            + self.params.lambda2 * state.center_mass
    }

    /// `F(A)` for an index set.
    pub fn evaluate(&self, set: &[usize]) -> Result<f64> {
        Ok(self.value(&self.state_for(set)?))
    }

    /// `F(A ∪ {a}) - F(A)`.
    pub fn marginal_gain(&self, state: &SelectionState, a: usize) -> Result<f64> {
        check_indices(self.size(), &[a])?;
        if state.mask[a] {
            return Err(Error::AlreadySelected(a));
        }
        Ok(self.gain(state, a))
    }

    /// Unchecked gain; `a` must be in range and unselected.
    #[inline]
    pub(crate) fn gain(&self, state: &SelectionState, a: usize) -> f64 {
        let p = &self.params;
        let delta = 1.0 + (p.tau + 1.0) * state.rowsum_mass;
        let similarity = ((p.tau + 1.0) * self.graph.row_sum(a) / delta).ln_1p();
        let c = state.group_counts[self.groups.group_of(a)] as f64;
        let balance = (1.0 / (c + 1.0)).ln_1p();
        similarity + p.lambda1 * balance + p.lambda2 * self.bias.weight(a)
    }
}
