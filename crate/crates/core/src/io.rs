//! Dataset manifest and descriptor files.
//!
//! A manifest is TOML:
//!
//! ```toml
//! [[category]]
//! name = "faces"
//!
//! [[category.image]]
//! id = "face_001"
//! width = 150
//! height = 150
//! descriptors = "faces/face_001.txt"   # relative to the manifest
//!
//! [[query]]
//! id = "q_001"
//! width = 150
//! height = 150
//! descriptors = "queries/q_001.txt"
//! label = "faces"                      # optional
//! ```
//!
//! A descriptor file holds one descriptor per line: `x y v1 v2 ... vp`.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::candidates::ImageDescriptors;
use crate::error::{Error, Result};
use crate::ped::DescriptorSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageEntry {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub descriptors: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryEntry {
    pub name: String,
    #[serde(default, rename = "image")]
    pub images: Vec<ImageEntry>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default, rename = "category")]
    pub categories: Vec<CategoryEntry>,
    #[serde(default, rename = "query", skip_serializing_if = "Vec::is_empty")]
    pub queries: Vec<ImageEntry>,
}

impl Manifest {
    /// Parses and validates; descriptor paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut m: Manifest = toml::from_str(text).map_err(|e| Error::Manifest(e.message().to_string()))?;
        let mut names = HashSet::new();
        for cat in &mut m.categories {
            if !names.insert(cat.name.clone()) {
                return Err(Error::Manifest(format!("duplicate category {:?}", cat.name)));
            }
            let mut ids = HashSet::new();
            for img in &mut cat.images {
                if !ids.insert(img.id.clone()) {
                    return Err(Error::Manifest(format!("duplicate image id {:?} in {:?}", img.id, cat.name)));
                }
                img.descriptors = base.join(&img.descriptors);
            }
        }
        let mut ids = HashSet::new();
        for q in &mut m.queries {
            if !ids.insert(q.id.clone()) {
                return Err(Error::Manifest(format!("duplicate query id {:?}", q.id)));
            }
            q.descriptors = base.join(&q.descriptors);
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn category(&self, name: &str) -> Result<&CategoryEntry> {
        self.categories
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::Manifest(format!("no category named {name:?}")))
    }
}

/// Parses `x y v1 ... vp` lines; blank lines and `#` comments are skipped.
pub fn parse_descriptors(text: &str, path: &Path) -> Result<(Vec<(f64, f64)>, DescriptorSet)> {
    let mut positions = Vec::new();
    let mut set = DescriptorSet::default();
    let mut buf = Vec::new();
    for (lno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let perr = |msg: String| Error::Parse { path: path.to_path_buf(), line: lno + 1, msg };
        buf.clear();
        for tok in line.split_whitespace() {
            buf.push(tok.parse::<f64>().map_err(|e| perr(format!("bad number {tok:?}: {e}")))?);
        }
        if buf.len() < 3 {
            return Err(perr("expected x, y and at least one descriptor component".into()));
        }
        set.push(&buf[2..]).map_err(|e| perr(e.to_string()))?;
        positions.push((buf[0], buf[1]));
    }
    Ok((positions, set))
}

/// Reads an image's descriptors and scales them to unit L2 norm.
pub fn load_image(entry: &ImageEntry) -> Result<ImageDescriptors> {
    let text = fs::read_to_string(&entry.descriptors).map_err(|e| Error::io(&entry.descriptors, e))?;
    let (positions, set) = parse_descriptors(&text, &entry.descriptors)?;
    Ok(ImageDescriptors::new(entry.id.clone(), entry.width, entry.height, positions, set)?.l2_normalized())
}

/// Inverse of [`parse_descriptors`] for an image's raw vectors.
pub fn format_descriptors(img: &ImageDescriptors) -> String {
    let mut out = String::new();
    for (&(x, y), v) in img.positions().iter().zip(img.descriptors().iter()) {
        out.push_str(&format!("{x} {y}"));
        for c in v {
            out.push_str(&format!(" {c}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_descriptor_lines() {
        let (pos, set) = parse_descriptors("# header\n1 2 3 4\n\n5.5 6 0 1\n", Path::new("d.txt")).unwrap();
        assert_eq!(pos, vec![(1.0, 2.0), (5.5, 6.0)]);
        assert_eq!(set.dim(), 2);
        assert_eq!(set.as_flat(), &[3.0, 4.0, 0.0, 1.0]);
        assert!(parse_descriptors("1 2\n", Path::new("d")).is_err());
        assert!(parse_descriptors("1 2 3\n1 2 3 4\n", Path::new("d")).is_err());
        assert!(parse_descriptors("1 2 x\n", Path::new("d")).is_err());
    }

    #[test]
    fn manifest_resolves_paths_and_rejects_duplicates() {
        let text = r#"
            [[category]]
            name = "a"
            [[category.image]]
            id = "i1"
            width = 20
            height = 30
            descriptors = "a/i1.txt"

            [[query]]
            id = "q"
            width = 20
            height = 20
            descriptors = "q.txt"
        "#;
        let m = Manifest::parse(text, Path::new("/data")).unwrap();
        assert_eq!(m.categories[0].images[0].descriptors, PathBuf::from("/data/a/i1.txt"));
        assert_eq!(m.queries[0].label, None);
        assert!(m.category("a").is_ok());
        assert!(matches!(m.category("b"), Err(Error::Manifest(_))));

        let dup = "[[category]]\nname = \"a\"\n[[category]]\nname = \"a\"\n";
        assert!(Manifest::parse(dup, Path::new(".")).is_err());
        assert!(Manifest::parse("[[category]]\nname = \"a\"\ncolor = 1\n", Path::new(".")).is_err());
    }

    #[test]
    fn load_normalizes() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("d.txt"), "1 1 3 4\n").unwrap();
        let entry =
            ImageEntry { id: "x".into(), width: 16, height: 16, descriptors: dir.path().join("d.txt"), label: None };
        let img = load_image(&entry).unwrap();
        assert_eq!(img.descriptors().as_flat(), &[0.6, 0.8]);
        assert_eq!(format_descriptors(&img), "1 1 0.6 0.8\n");
    }
}
