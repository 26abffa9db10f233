//! Three overlapping 2-D Gaussian clusters treated as pseudo-images, used to
//! visualize how greedy selection gravitates to the region they share.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{CenterBias, GroupIndex, SimilarityGraph};
use crate::matrix::SquareMatrix;
use crate::objective::{Objective, ObjectiveParams};
use crate::optimizer::{greedy_lazy, SelectionResult};
use crate::ped::{kernelize, normalize_by_max};

/// Vertices of an equilateral triangle centered on the origin.
pub const CLUSTER_MEANS: [(f64, f64); 3] = [(0.0, 0.5), (-0.433, -0.25), (0.433, -0.25)];
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PER_CLUSTER: usize = 60;
pub const DEFAULT_STD: f64 = 0.35;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticInstance {
    pub points: Vec<(f64, f64)>,
    pub clusters: GroupIndex,
    pub seed: u64,
    pub per_cluster: usize,
    pub std: f64,
}

/// Samples `per_cluster` points around each mean, cluster by cluster.
pub fn generate(seed: u64, per_cluster: usize, std: f64) -> Result<SyntheticInstance> {
    if per_cluster == 0 {
        return Err(Error::InvalidParameter("per_cluster must be at least 1".into()));
    }
    if !(std >= 0.0) || !std.is_finite() {
        return Err(Error::InvalidParameter(format!("std must be finite and >= 0, got {std}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(3 * per_cluster);
    for &(mx, my) in &CLUSTER_MEANS {
        for _ in 0..per_cluster {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            points.push((mx + std * dx, my + std * dy));
        }
    }
    Ok(SyntheticInstance { points, clusters: GroupIndex::contiguous(3, per_cluster), seed, per_cluster, std })
}

impl SyntheticInstance {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Kernelized, max-normalized Euclidean distances between the points.
    pub fn similarity_graph(&self, sigma: f64) -> Result<SimilarityGraph> {
        let m = self.points.len();
        let mut d = SquareMatrix::zeros(m);
        for i in 0..m {
            for j in i + 1..m {
                let (a, b) = (self.points[i], self.points[j]);
                d.set_sym(i, j, (a.0 - b.0).hypot(a.1 - b.1));
            }
        }
        normalize_by_max(&mut d);
        let mut s = SquareMatrix::zeros(m);
        for i in 0..m {
            for j in 0..m {
                s.set(i, j, if i == j { 1.0 } else { kernelize(d.get(i, j), sigma)? });
            }
        }
        SimilarityGraph::from_dense(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoParams {
    pub k: usize,
    pub tau: f64,
    pub lambda1: f64,
    pub sigma: f64,
    /// Also record every point's gain at every iteration.
    pub gain_field: bool,
}

impl Default for DemoParams {
    fn default() -> Self {
        DemoParams { k: 6, tau: 2.0, lambda1: 2.0, sigma: crate::ped::DEFAULT_SIGMA, gain_field: false }
    }
}

/// One point at one iteration of the gain field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainRow {
    pub iteration: usize,
    pub point: usize,
    /// `None` once the point has been selected.
    pub gain: Option<f64>,
    /// The point is chosen at this iteration.
    pub chosen: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoOutput {
    pub selection: SelectionResult,
    pub gain_field: Option<Vec<GainRow>>,
}

pub fn run_demo(instance: &SyntheticInstance, params: &DemoParams) -> Result<DemoOutput> {
    let graph = instance.similarity_graph(params.sigma)?;
    let bias = CenterBias::zeros(instance.len());
    let obj =
        Objective::new(&graph, &instance.clusters, &bias, ObjectiveParams::new(params.tau, params.lambda1, 0.0)?)?;
    let selection = greedy_lazy(&obj, params.k)?;

    let gain_field = if params.gain_field {
        let mut rows = Vec::with_capacity(params.k * instance.len());
        let mut state = obj.empty_state();
        for (t, &c) in selection.chosen.iter().enumerate() {
            for p in 0..instance.len() {
                let gain = (!state.contains(p)).then(|| obj.marginal_gain(&state, p)).transpose()?;
                rows.push(GainRow { iteration: t, point: p, gain, chosen: p == c });
            }
            obj.insert(&mut state, c)?;
        }
        Some(rows)
    } else {
        None
    };
    Ok(DemoOutput { selection, gain_field })
}

/// `point_id,cluster,x,y`
pub fn points_csv(instance: &SyntheticInstance) -> String {
    let mut out = String::from("point_id,cluster,x,y\n");
    for (i, &(x, y)) in instance.points.iter().enumerate() {
        writeln!(out, "{i},{},{x},{y}", instance.clusters.group_of(i)).unwrap();
    }
    out
}

/// `iteration,point_id,cluster,x,y,gain,selected`. `gain` is blank for points
/// selected at an earlier iteration; `selected` is 1 on the row of the point
/// chosen at that iteration, 2 for points chosen earlier, 0 otherwise.
pub fn gain_trace_csv(instance: &SyntheticInstance, rows: &[GainRow]) -> String {
    let mut out = String::from("iteration,point_id,cluster,x,y,gain,selected\n");
    for r in rows {
        let (x, y) = instance.points[r.point];
        let gain = r.gain.map(|g| g.to_string()).unwrap_or_default();
        let selected = match (r.chosen, r.gain) {
            (true, _) => 1,
            (false, None) => 2,
            (false, Some(_)) => 0,
        };
        writeln!(out, "{},{},{},{x},{y},{gain},{selected}", r.iteration, r.point, instance.clusters.group_of(r.point))
            .unwrap();
    }
    out
}
