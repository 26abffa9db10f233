//! Nonparametric RF-to-class classifier.
//!
//! Each class keeps 29 descriptor pools, one per pyramid cell, filled from the
//! cells of its selected receptive fields. A query image is cut into the same
//! window templates, and every window is scored against every class by the
//! mean nearest-pool-neighbor distance of its cell descriptors.

use serde::Serialize;

use crate::candidates::{ImageDescriptors, TemplateConfig};
use crate::error::{Error, Result};
use crate::graph::CenterBias;
use crate::nn::{brute_nearest, KdTree};
use crate::ped::{DescriptorSet, ReceptiveField, NUM_CELLS};

/// Nearest-neighbor strategy for pool lookups. Both are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NnBackend {
    #[default]
    BruteForce,
    KdTree,
}

/// Selected receptive fields of one class.
#[derive(Debug, Clone, Copy)]
pub struct ClassSelection<'a> {
    pub name: &'a str,
    pub fields: &'a [ReceptiveField],
    pub chosen: &'a [usize],
}

#[derive(Debug, Clone)]
pub struct ClassPools {
    classes: Vec<String>,
    pools: Vec<Vec<DescriptorSet>>,
    trees: Option<Vec<Vec<KdTree>>>,
}

/// Unions the cell-`l` descriptors of every chosen field into pool `l` of its class.
pub fn build_pools(selections: &[ClassSelection<'_>]) -> Result<ClassPools> {
    let mut classes = Vec::with_capacity(selections.len());
    let mut pools = Vec::with_capacity(selections.len());
    for sel in selections {
        let mut class_pools = vec![DescriptorSet::default(); NUM_CELLS];
        for &k in sel.chosen {
            let rf = sel.fields.get(k).ok_or(Error::IndexOutOfRange { index: k, len: sel.fields.len() })?;
            for (pool, cell) in class_pools.iter_mut().zip(rf.cells()) {
                pool.extend_from(cell)?;
            }
        }
        classes.push(sel.name.to_string());
        pools.push(class_pools);
    }
    Ok(ClassPools { classes, pools, trees: None })
}

impl ClassPools {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn pool(&self, class: usize, cell: usize) -> &DescriptorSet {
        &self.pools[class][cell]
    }

    pub fn backend(&self) -> NnBackend {
        if self.trees.is_some() {
            NnBackend::KdTree
        } else {
            NnBackend::BruteForce
        }
    }

    /// Switches the lookup structure; the scores do not change.
    pub fn with_backend(mut self, backend: NnBackend) -> Self {
        self.trees = match backend {
            NnBackend::BruteForce => None,
            NnBackend::KdTree => Some(
                self.pools
                    .iter()
                    .map(|cells| cells.iter().map(|p| KdTree::build(p.as_flat(), p.dim())).collect())
                    .collect(),
            ),
        };
        self
    }

    fn nearest(&self, class: usize, cell: usize, x: &[f64]) -> Option<f64> {
        match &self.trees {
            Some(trees) => trees[class][cell].nearest(x),
            None => {
                let p = &self.pools[class][cell];
                brute_nearest(x, p.as_flat(), p.dim())
            }
        }
    }

    fn check_nonempty(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::EmptyPools(None));
        }
        for (name, cells) in self.classes.iter().zip(&self.pools) {
            if cells.iter().all(DescriptorSet::is_empty) {
                return Err(Error::EmptyPools(Some(name.clone())));
            }
        }
        Ok(())
    }
}

/// `Σ_l mean_{x∈X_l} min_{p∈P_l^c} ‖x − p‖²`.
pub fn rf_to_class(query: &ReceptiveField, pools: &ClassPools, class: usize, d_empty: f64) -> Result<f64> {
    let mut total = 0.0;
    for (l, x) in query.cells().iter().enumerate() {
        if x.is_empty() {
            continue;
        }
        let pool = &pools.pools[class][l];
        if pool.is_empty() {
            total += d_empty;
            continue;
        }
        if pool.dim() != x.dim() {
            return Err(Error::DimensionMismatch(x.dim(), pool.dim()));
        }
        let sum: f64 = x.iter().map(|v| pools.nearest(class, l, v).expect("nonempty pool")).sum();
        total += sum / x.len() as f64;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictParams {
    pub lambda2: f64,
    pub sigma_c: f64,
    pub d_empty: f64,
    pub templates: TemplateConfig,
}

impl Default for PredictParams {
    fn default() -> Self {
        PredictParams {
            lambda2: 0.0,
            sigma_c: crate::candidates::DEFAULT_SIGMA_C,
            d_empty: crate::ped::DEFAULT_EMPTY_PENALTY,
            templates: TemplateConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassScore {
    pub class: String,
    pub score: f64,
    pub best_candidate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub query_id: String,
    pub class: String,
    pub class_index: usize,
    pub score: f64,
    pub best_candidate: usize,
    pub per_class: Vec<ClassScore>,
    /// Windows without descriptors; they score 0 against every class and are
    /// left out of the minimum.
    pub empty_candidates: usize,
}

/// `argmin_c min_k [rf_to_class(RF_k, c) + λ₂ (1 − q_k)]` over the query's windows.
pub fn predict(query: &ImageDescriptors, pools: &ClassPools, params: &PredictParams) -> Result<Prediction> {
    pools.check_nonempty()?;
    if query.is_empty() {
        return Err(Error::NoDescriptors(query.id().to_string()));
    }
    let rects = params.templates.templates(query.width(), query.height())?;
    let fields = rects.iter().map(|&r| crate::candidates::bin_descriptors(query, r)).collect::<Result<Vec<_>>>()?;
    let centers: Vec<(f64, f64)> = rects.iter().map(|r| r.center()).collect();
    let dims = vec![(query.width() as f64, query.height() as f64); rects.len()];
    let bias = CenterBias::from_positions(&centers, &dims, params.sigma_c)?;

    let usable: Vec<usize> = (0..fields.len()).filter(|&k| !fields[k].is_empty()).collect();
    if usable.is_empty() {
        return Err(Error::NoDescriptors(query.id().to_string()));
    }

    let mut per_class = Vec::with_capacity(pools.num_classes());
    for c in 0..pools.num_classes() {
        let mut best: Option<(f64, usize)> = None;
        for &k in &usable {
            let s = rf_to_class(&fields[k], pools, c, params.d_empty)? + params.lambda2 * (1.0 - bias.weight(k));
            if best.is_none_or(|(bs, _)| s < bs) {
                best = Some((s, k));
            }
        }
        let (score, k) = best.expect("usable is nonempty");
        per_class.push(ClassScore { class: pools.classes[c].clone(), score, best_candidate: k });
    }
    let (class_index, top) = per_class
        .iter()
        .enumerate()
        .fold(None::<(usize, &ClassScore)>, |acc, (c, s)| match acc {
            Some((_, b)) if b.score <= s.score => acc,
            _ => Some((c, s)),
        })
        .expect("at least one class");
    Ok(Prediction {
        query_id: query.id().to_string(),
        class: top.class.clone(),
        class_index,
        score: top.score,
        best_candidate: top.best_candidate,
        empty_candidates: fields.len() - usable.len(),
        per_class,
    })
}
