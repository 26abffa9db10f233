//! Receptive-field window templates and pyramid binning of image descriptors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CenterBias, GroupIndex};
use crate::ped::{cell_index, DescriptorSet, ReceptiveField, NUM_CELLS, PYRAMID_LEVELS};

pub const MIN_IMAGE_SIDE: u32 = 16;
pub const DEFAULT_SCALES: [f64; 4] = [0.50, 0.65, 0.80, 0.95];
pub const DEFAULT_ANCHORS: usize = 8;
pub const DEFAULT_SIGMA_C: f64 = 0.5;

/// Axis-aligned window in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: u32,
    pub y0: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn center(&self) -> (f64, f64) {
        (self.x0 as f64 + self.w as f64 / 2.0, self.y0 as f64 + self.h as f64 / 2.0)
    }

    pub fn fits_in(&self, width: u32, height: u32) -> bool {
        self.w > 0 && self.h > 0 && self.x0 + self.w <= width && self.y0 + self.h <= height
    }
}

/// Window scales and the per-axis anchor count; `scales.len() · anchors²`
/// templates per image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateConfig {
    pub scales: Vec<f64>,
    pub anchors: usize,
}

impl Default for TemplateConfig {
    fn default() -> Self {
        TemplateConfig { scales: DEFAULT_SCALES.to_vec(), anchors: DEFAULT_ANCHORS }
    }
}

impl TemplateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() {
            return Err(Error::InvalidParameter("at least one template scale is required".into()));
        }
        if let Some(s) = self.scales.iter().find(|&&s| !(s > 0.0 && s <= 1.0)) {
            return Err(Error::InvalidParameter(format!("template scale {s} outside (0, 1]")));
        }
        if self.anchors == 0 {
            return Err(Error::InvalidParameter("anchors must be at least 1".into()));
        }
        Ok(())
    }

    pub fn per_image(&self) -> usize {
        self.scales.len() * self.anchors * self.anchors
    }

    /// Scale-major, then row-major (anchor row `j`, then column `i`).
    pub fn templates(&self, width: u32, height: u32) -> Result<Vec<Rect>> {
        self.validate()?;
        if width < MIN_IMAGE_SIDE || height < MIN_IMAGE_SIDE {
            return Err(Error::ImageTooSmall { width, height });
        }
        let steps = (self.anchors - 1) as f64;
        let anchor = |i: usize, slack: u32| -> u32 {
            if self.anchors == 1 {
                (slack as f64 / 2.0).round() as u32
            } else {
                (i as f64 * slack as f64 / steps).round() as u32
            }
        };
        let mut rects = Vec::with_capacity(self.per_image());
        for &f in &self.scales {
            let w = ((f * width as f64).round() as u32).clamp(1, width);
            let h = ((f * height as f64).round() as u32).clamp(1, height);
            for j in 0..self.anchors {
                for i in 0..self.anchors {
                    rects.push(Rect { x0: anchor(i, width - w), y0: anchor(j, height - h), w, h });
                }
            }
        }
        Ok(rects)
    }
}

/// The 256 default templates.
pub fn make_templates(width: u32, height: u32) -> Result<Vec<Rect>> {
    TemplateConfig::default().templates(width, height)
}

/// Precomputed local descriptors of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageDescriptors {
    id: String,
    width: u32,
    height: u32,
    positions: Vec<(f64, f64)>,
    descriptors: DescriptorSet,
}

impl ImageDescriptors {
    pub fn new(
        id: impl Into<String>,
        width: u32,
        height: u32,
        positions: Vec<(f64, f64)>,
        descriptors: DescriptorSet,
    ) -> Result<Self> {
        let id = id.into();
        if positions.len() != descriptors.len() {
            return Err(Error::SizeMismatch {
                what: "descriptor positions",
                got: positions.len(),
                expected: descriptors.len(),
            });
        }
        for &(x, y) in &positions {
            if !(x >= 0.0 && x < width as f64 && y >= 0.0 && y < height as f64) {
                return Err(Error::InvalidParameter(format!(
                    "descriptor at ({x}, {y}) outside the {width}x{height} image {id}"
                )));
            }
        }
        Ok(ImageDescriptors { id, width, height, positions, descriptors })
    }

    /// Builds from `(x, y, vector)` triples.
    pub fn from_points<V: AsRef<[f64]>>(
        id: impl Into<String>,
        width: u32,
        height: u32,
        points: &[(f64, f64, V)],
    ) -> Result<Self> {
        let mut descriptors = DescriptorSet::empty(points.first().map_or(0, |p| p.2.as_ref().len()));
        for p in points {
            descriptors.push(p.2.as_ref())?;
        }
        Self::new(id, width, height, points.iter().map(|p| (p.0, p.1)).collect(), descriptors)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.descriptors.dim()
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn descriptors(&self) -> &DescriptorSet {
        &self.descriptors
    }

    /// Copy with every descriptor scaled to unit L2 norm (zero vectors kept).
    pub fn l2_normalized(&self) -> Self {
        let mut out = DescriptorSet::empty(self.descriptors.dim());
        let mut buf = Vec::with_capacity(self.descriptors.dim());
        for v in self.descriptors.iter() {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            buf.clear();
            buf.extend(v.iter().map(|x| if norm > 0.0 { x / norm } else { *x }));
            out.push(&buf).expect("same dimension");
        }
        ImageDescriptors { descriptors: out, ..self.clone() }
    }
}

/// Assigns the descriptors inside `rect` to the 29 pyramid cells.
pub fn bin_descriptors(img: &ImageDescriptors, rect: Rect) -> Result<ReceptiveField> {
    if !rect.fits_in(img.width, img.height) {
        return Err(Error::RectOutOfBounds {
            x0: rect.x0,
            y0: rect.y0,
            w: rect.w,
            h: rect.h,
            width: img.width,
            height: img.height,
        });
    }
    let dim = img.dim();
    let mut cells = vec![DescriptorSet::empty(dim); NUM_CELLS];
    let (x0, y0, w, h) = (rect.x0 as f64, rect.y0 as f64, rect.w as f64, rect.h as f64);
    for (&(x, y), v) in img.positions.iter().zip(img.descriptors.iter()) {
        if x < x0 || x >= x0 + w || y < y0 || y >= y0 + h {
            continue;
        }
        for (level, &g) in PYRAMID_LEVELS.iter().enumerate() {
            let cx = ((g as f64 * (x - x0) / w).floor() as usize).min(g - 1);
            let cy = ((g as f64 * (y - y0) / h).floor() as usize).min(g - 1);
            cells[cell_index(level, cx, cy)].push(v)?;
        }
    }
    ReceptiveField::new(rect, cells)
}

/// All candidates of a set of images, in image-major order.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    pub fields: Vec<ReceptiveField>,
    pub groups: GroupIndex,
    pub bias: CenterBias,
    pub per_image: usize,
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// `(image, template)` of candidate `k`.
    pub fn locate(&self, k: usize) -> (usize, usize) {
        (k / self.per_image, k % self.per_image)
    }
}

/// Image-major candidates with their image membership and center weights.
pub fn candidate_pool(images: &[ImageDescriptors], templates: &TemplateConfig, sigma_c: f64) -> Result<CandidatePool> {
    if images.is_empty() {
        return Err(Error::InvalidParameter("candidate pool needs at least one image".into()));
    }
    if !(sigma_c > 0.0) {
        return Err(Error::NonPositiveSigma(sigma_c));
    }
    if let Some(dim) = images.iter().find(|i| !i.is_empty()).map(ImageDescriptors::dim) {
        if let Some(bad) = images.iter().find(|i| !i.is_empty() && i.dim() != dim) {
            return Err(Error::DimensionMismatch(dim, bad.dim()));
        }
    }
    let per_image = templates.per_image();
    type Binned = (Vec<ReceptiveField>, Vec<(f64, f64)>, Vec<(f64, f64)>);
    let binned: Vec<Binned> = images
        .par_iter()
        .map(|img| {
            let rects = templates.templates(img.width, img.height)?;
            let fields = rects.iter().map(|&r| bin_descriptors(img, r)).collect::<Result<Vec<_>>>()?;
            let centers = rects.iter().map(Rect::center).collect();
            let dims = vec![(img.width as f64, img.height as f64); rects.len()];
            Ok((fields, centers, dims))
        })
        .collect::<Result<_>>()?;
    let mut fields = Vec::with_capacity(per_image * images.len());
    let mut centers = Vec::with_capacity(per_image * images.len());
    let mut dims = Vec::with_capacity(per_image * images.len());
    for (f, c, d) in binned {
        fields.extend(f);
        centers.extend(c);
        dims.extend(d);
    }
    let bias = CenterBias::from_positions(&centers, &dims, sigma_c)?;
    Ok(CandidatePool { fields, groups: GroupIndex::contiguous(images.len(), per_image), bias, per_image })
}
