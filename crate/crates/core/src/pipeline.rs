//! Descriptor files in, selected windows and predictions out.

use serde::{Deserialize, Serialize};

use crate::candidates::{bin_descriptors, candidate_pool, CandidatePool, ImageDescriptors, Rect};
use crate::classifier::{build_pools, predict, ClassPools, ClassSelection, NnBackend, PredictParams, Prediction};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;
use crate::io::{load_image, Manifest};
use crate::objective::Objective;
use crate::optimizer::{greedy_lazy, SelectionResult};
use crate::ped::{distance_matrix, pairwise_smooth, similarity_from_distances, sparsify_eps, sparsify_knn};

pub const SELECT_LAMBDA1: f64 = crate::objective::ObjectiveParams::DEFAULT_LAMBDA1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub rank: usize,
    pub candidate: usize,
    pub image_id: String,
    pub template_id: usize,
    pub window: Rect,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySelection {
    pub category: String,
    pub num_images: usize,
    pub num_candidates: usize,
    pub evaluations: usize,
    pub objective: f64,
    pub records: Vec<SelectionRecord>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SelectionFile {
    pub categories: Vec<CategorySelection>,
}

/// PED distances, per-image-pair smoothing, max normalization, Gaussian
/// kernel, then kNN (and optionally ε) sparsification.
pub fn build_graph(pool: &CandidatePool, cfg: &RunConfig) -> Result<SimilarityGraph> {
    let n_images = pool.groups.num_groups();
    let d = distance_matrix(&pool.fields, Some(&pool.groups), cfg.d_empty)?;
    let d = pairwise_smooth(&d, &pool.groups, cfg.m_keep)?;
    let mut s = similarity_from_distances(&d, cfg.sigma)?;
    let knn_k = cfg.knn_k.unwrap_or(n_images);
    if knn_k < pool.len() {
        s = sparsify_knn(&s, knn_k)?;
    } else if cfg.knn_k.is_some() {
        return Err(Error::KTooLarge { k: knn_k, m: pool.len() });
    }
    if let Some(eps) = cfg.eps {
        s = sparsify_eps(&s, eps);
    }
    SimilarityGraph::from_dense(s)
}

pub struct CategoryRun {
    pub pool: CandidatePool,
    pub graph: SimilarityGraph,
    pub result: SelectionResult,
    pub selection: CategorySelection,
}

/// Runs selection over the images of one category.
pub fn select_category(name: &str, images: &[ImageDescriptors], cfg: &RunConfig) -> Result<CategoryRun> {
    if images.is_empty() {
        return Err(Error::EmptyCategory(name.to_string()));
    }
    cfg.validate()?;
    let pool = candidate_pool(images, &cfg.templates(), cfg.sigma_c)?;
    let graph = build_graph(&pool, cfg)?;
    let params = cfg.objective_params(SELECT_LAMBDA1)?;
    let obj = Objective::new(&graph, &pool.groups, &pool.bias, params)?;
    let k = cfg.k.unwrap_or(images.len());
    let result = greedy_lazy(&obj, k)?;
    let records = result
        .chosen
        .iter()
        .zip(&result.gains)
        .enumerate()
        .map(|(rank, (&candidate, &gain))| {
            let (image, template_id) = pool.locate(candidate);
            SelectionRecord {
                rank,
                candidate,
                image_id: images[image].id().to_string(),
                template_id,
                window: pool.fields[candidate].window(),
                gain,
            }
        })
        .collect();
    let selection = CategorySelection {
        category: name.to_string(),
        num_images: images.len(),
        num_candidates: pool.len(),
        evaluations: result.evaluations,
        objective: result.objective_trace.last().copied().unwrap_or(0.0),
        records,
    };
    Ok(CategoryRun { pool, graph, result, selection })
}

/// Loads every image of `category` from the manifest.
pub fn load_category(manifest: &Manifest, category: &str) -> Result<Vec<ImageDescriptors>> {
    manifest.category(category)?.images.iter().map(load_image).collect()
}

/// Builds class pools from the selected windows of each category.
pub fn pools_from_selections(
    categories: &[(String, Vec<ImageDescriptors>)],
    selections: &SelectionFile,
) -> Result<ClassPools> {
    let mut per_class = Vec::with_capacity(selections.categories.len());
    for sel in &selections.categories {
        let (_, images) = categories
            .iter()
            .find(|(name, _)| *name == sel.category)
            .ok_or_else(|| Error::Manifest(format!("selection names unknown category {:?}", sel.category)))?;
        let fields = sel
            .records
            .iter()
            .map(|r| {
                let img = images
                    .iter()
                    .find(|i| i.id() == r.image_id)
                    .ok_or_else(|| Error::Manifest(format!("selection names unknown image {:?}", r.image_id)))?;
                bin_descriptors(img, r.window)
            })
            .collect::<Result<Vec<_>>>()?;
        per_class.push((sel.category.clone(), fields));
    }
    let chosen: Vec<Vec<usize>> = per_class.iter().map(|(_, f)| (0..f.len()).collect()).collect();
    let entries: Vec<ClassSelection<'_>> =
        per_class.iter().zip(&chosen).map(|((name, fields), chosen)| ClassSelection { name, fields, chosen }).collect();
    build_pools(&entries)
}

pub fn predict_params(cfg: &RunConfig) -> PredictParams {
    PredictParams { lambda2: cfg.lambda2, sigma_c: cfg.sigma_c, d_empty: cfg.d_empty, templates: cfg.templates() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyOutput {
    pub predictions: Vec<Prediction>,
    /// Fraction of labeled queries predicted correctly; `None` without labels.
    pub accuracy: Option<f64>,
    pub labeled: usize,
}

/// Predicts every query; `labels[i]` is the known class of query `i`, if any.
pub fn classify_queries(
    pools: &ClassPools,
    queries: &[ImageDescriptors],
    labels: &[Option<String>],
    cfg: &RunConfig,
) -> Result<ClassifyOutput> {
    use rayon::prelude::*;
    let pools = pools.clone().with_backend(if cfg.kd_tree { NnBackend::KdTree } else { NnBackend::BruteForce });
    let params = predict_params(cfg);
    let predictions = queries.par_iter().map(|q| predict(q, &pools, &params)).collect::<Result<Vec<_>>>()?;
    let labeled: Vec<(&Prediction, &String)> =
        predictions.iter().zip(labels).filter_map(|(p, l)| l.as_ref().map(|l| (p, l))).collect();
    let accuracy = (!labeled.is_empty())
        .then(|| labeled.iter().filter(|(p, l)| p.class == **l).count() as f64 / labeled.len() as f64);
    Ok(ClassifyOutput { labeled: labeled.len(), predictions, accuracy })
}
