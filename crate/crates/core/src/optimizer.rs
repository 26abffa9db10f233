//! Greedy maximization of the objective under `|A| ≤ K`.
//!
//! Both variants break ties on equal gains toward the smaller candidate index,
//! and the lazy variant reproduces the naive trajectory exactly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::Objective;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    /// Candidates in the order they were added.
    pub chosen: Vec<usize>,
    /// Marginal gain of each addition.
    pub gains: Vec<f64>,
    /// Objective value after each addition.
    pub objective_trace: Vec<f64>,
    /// Number of marginal-gain evaluations performed.
    pub evaluations: usize,
}

fn check_k(obj: &Objective<'_>, k: usize) -> Result<()> {
    let m = obj.size();
    if k == 0 || k > m {
        return Err(Error::KOutOfRange { k, m });
    }
    Ok(())
}

pub fn greedy_naive(obj: &Objective<'_>, k: usize) -> Result<SelectionResult> {
    check_k(obj, k)?;
    let m = obj.size();
    let mut state = obj.empty_state();
    let mut result = SelectionResult {
        chosen: Vec::with_capacity(k),
        gains: Vec::with_capacity(k),
        objective_trace: Vec::with_capacity(k),
        evaluations: 0,
    };
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for a in (0..m).filter(|&a| !state.contains(a)) {
            let g = obj.gain(&state, a);
            result.evaluations += 1;
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((a, g));
            }
        }
        let (a, g) = best.expect("k <= m leaves a candidate");
        obj.insert(&mut state, a)?;
        result.chosen.push(a);
        result.gains.push(g);
        result.objective_trace.push(obj.value(&state));
    }
    Ok(result)
}

/// Max-heap entry: an upper bound on a candidate's gain, valid since `iteration`.
#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    gain: f64,
    iteration: usize,
    index: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // larger gain first, then smaller index
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.total_cmp(&other.gain).then_with(|| other.index.cmp(&self.index))
    }
}

pub fn greedy_lazy(obj: &Objective<'_>, k: usize) -> Result<SelectionResult> {
    check_k(obj, k)?;
    let m = obj.size();
    let mut state = obj.empty_state();
    let mut result = SelectionResult {
        chosen: Vec::with_capacity(k),
        gains: Vec::with_capacity(k),
        objective_trace: Vec::with_capacity(k),
        evaluations: m,
    };
    let mut heap: BinaryHeap<HeapEntry> =
        (0..m).map(|index| HeapEntry { gain: obj.gain(&state, index), iteration: 0, index }).collect();

    for t in 0..k {
        let accepted = loop {
            let top = heap.pop().expect("k <= m leaves a candidate");
            if top.iteration == t {
                break top;
            }
            let fresh = HeapEntry { gain: obj.gain(&state, top.index), iteration: t, index: top.index };
            result.evaluations += 1;
            match heap.peek() {
                Some(next) if *next > fresh => heap.push(fresh),
                _ => break fresh,
            }
        };
        obj.insert(&mut state, accepted.index)?;
        result.chosen.push(accepted.index);
        result.gains.push(accepted.gain);
        result.objective_trace.push(obj.value(&state));
    }
    Ok(result)
}
