//! Collaborative receptive-field selection.
//!
//! Given the local descriptors of a set of images from one category, every
//! image is cut into a fixed set of candidate windows (receptive fields). A
//! similarity graph over all candidates is built from a pyramid-error
//! distance, and a monotone submodular objective is maximized with lazy
//! greedy search to pick the `K` windows that best cover what the images have
//! in common. The selected windows then serve as class prototypes for a
//! nonparametric nearest-neighbor classifier.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod candidates;
pub mod classifier;
pub mod cli;
pub mod config;
pub mod error;
pub mod graph;
pub mod io;
pub mod matrix;
pub mod nn;
pub mod objective;
pub mod optimizer;
pub mod ped;
pub mod pipeline;
pub mod synth;

pub use candidates::{bin_descriptors, candidate_pool, make_templates, ImageDescriptors, Rect, TemplateConfig};
pub use classifier::{build_pools, predict, rf_to_class, ClassPools, NnBackend, Prediction};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use graph::{CenterBias, GroupIndex, SimilarityGraph};
pub use matrix::SquareMatrix;
pub use objective::{Objective, ObjectiveParams, SelectionState};
pub use optimizer::{greedy_lazy, greedy_naive, SelectionResult};
pub use ped::{ped, set_distance, DescriptorSet, ReceptiveField};
