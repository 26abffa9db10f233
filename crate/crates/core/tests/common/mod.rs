#![allow(dead_code)]

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rfselect::io::format_descriptors;
use rfselect::{CenterBias, GroupIndex, ImageDescriptors, SimilarityGraph, SquareMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric nonnegative matrix with unit diagonal and weights in [0, 1).
pub fn random_graph(rng: &mut impl Rng, m: usize) -> SimilarityGraph {
    let mut s = SquareMatrix::zeros(m);
    for i in 0..m {
        s.set(i, i, 1.0);
        for j in i + 1..m {
            let v = if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() };
            s.set_sym(i, j, v);
        }
    }
    SimilarityGraph::from_dense(s).unwrap()
}

pub fn random_groups(rng: &mut impl Rng, m: usize) -> GroupIndex {
    let n = rng.random_range(1..=m);
    // first n candidates seed every group, the rest land anywhere
    let mut g: Vec<usize> = (0..m).map(|k| if k < n { k } else { rng.random_range(0..n) }).collect();
    for i in (1..m).rev() {
        let j = rng.random_range(0..=i);
        g.swap(i, j);
    }
    GroupIndex::new(g).unwrap()
}

pub fn random_bias(rng: &mut impl Rng, m: usize) -> CenterBias {
    CenterBias::new((0..m).map(|_| rng.random::<f64>()).collect()).unwrap()
}

/// Random subset of `0..m` as a sorted index list.
pub fn random_subset(rng: &mut impl Rng, m: usize, p: f64) -> Vec<usize> {
    (0..m).filter(|_| rng.random_bool(p)).collect()
}

/// Image whose descriptors cluster around the `class`-th unit axis.
pub fn toy_image(id: &str, class: usize, seed: u64, count: usize, dim: usize, size: u32) -> ImageDescriptors {
    let mut rng = rng(seed);
    let points: Vec<(f64, f64, Vec<f64>)> = (0..count)
        .map(|_| {
            let x = rng.random_range(0.0..size as f64);
            let y = rng.random_range(0.0..size as f64);
            let v: Vec<f64> =
                (0..dim).map(|d| if d == class { 1.0 } else { 0.0 } + rng.random_range(-0.05..0.05)).collect();
            (x, y, v)
        })
        .collect();
    ImageDescriptors::from_points(id, size, size, &points).unwrap().l2_normalized()
}

/// A manifest with one category per class and `queries` labeled queries per class.
pub fn write_toy_dataset(dir: &Path, classes: usize, train: usize, queries: usize, labeled: bool) {
    let mut manifest = String::new();
    for c in 0..classes {
        manifest.push_str(&format!("[[category]]\nname = \"class{c}\"\n\n"));
        for i in 0..train {
            let id = format!("c{c}_train{i}");
            let img = toy_image(&id, c, (c * 1000 + i) as u64, 12, 6, 48);
            fs::write(dir.join(format!("{id}.txt")), format_descriptors(&img)).unwrap();
            manifest.push_str(&format!(
                "[[category.image]]\nid = \"{id}\"\nwidth = 48\nheight = 48\ndescriptors = \"{id}.txt\"\n\n"
            ));
        }
    }
    for c in 0..classes {
        for i in 0..queries {
            let id = format!("c{c}_query{i}");
            let img = toy_image(&id, c, (50_000 + c * 1000 + i) as u64, 12, 6, 48);
            fs::write(dir.join(format!("{id}.txt")), format_descriptors(&img)).unwrap();
            manifest
                .push_str(&format!("[[query]]\nid = \"{id}\"\nwidth = 48\nheight = 48\ndescriptors = \"{id}.txt\"\n"));
            if labeled {
                manifest.push_str(&format!("label = \"class{c}\"\n"));
            }
            manifest.push('\n');
        }
    }
    fs::write(dir.join("manifest.toml"), manifest).unwrap();
}
