//! End-to-end training-set construction: normalize, optionally simulate
//! print-and-scan, augment, write images, record a manifest.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::annotation::{sidecar_path, FaceAnnotation};
use super::manifest::{Manifest, ManifestRow};
use super::transform::{augment_each, normalize, AugmentationPlan};
use crate::error::{Error, Result};
use crate::io::{encode_png, load_image};
use crate::label::Label;
use crate::pns::{simulate_pns, PnsParams};
use crate::rng::derive_seed;

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "ppm", "pgm"];

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub plan: AugmentationPlan,
    /// Print-and-scan simulation applied to each normalized image before augmentation.
    pub pns: Option<PnsParams>,
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
struct SourceImage {
    path: PathBuf,
    label: Label,
}

/// Image files in `dir` (by extension), sorted by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(dir.to_path_buf()),
        _ => Error::io(dir, e),
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if is_image && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Keeps `n` of `items`, chosen by a seeded draw and returned in their original order.
fn subsample<T: Clone>(items: &[T], n: usize, seed: u64) -> Vec<T> {
    if items.len() <= n {
        return items.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = rand::seq::index::sample(&mut rng, items.len(), n).into_vec();
    keep.sort_unstable();
    keep.into_iter().map(|i| items[i].clone()).collect()
}

fn source_key(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().replace('.', "_"))
        .unwrap_or_default()
}

/// Builds a balanced, augmented training set from two class directories.
///
/// Every image needs an annotation sidecar. The larger class is subsampled
/// to the size of the smaller one. Images are written as PNG under
/// `out_dir/<label>/`, and the returned manifest lists them in input order.
pub fn build_training_set(genuine_dir: &Path, morphed_dir: &Path, opts: &BuildOptions) -> Result<Manifest> {
    if let Some(p) = &opts.pns {
        p.validate()?;
    }
    let mut classes = Vec::new();
    for (label, dir) in [(Label::Genuine, genuine_dir), (Label::Morphed, morphed_dir)] {
        let files = list_images(dir)?;
        if files.is_empty() {
            return Err(Error::InvalidData(format!(
                "no {label} images in {}",
                dir.display()
            )));
        }
        for f in &files {
            if !sidecar_path(f).is_file() {
                return Err(Error::InvalidAnnotation(format!(
                    "missing annotation {}",
                    sidecar_path(f).display()
                )));
            }
        }
        classes.push((label, files));
    }
    let n = classes.iter().map(|(_, f)| f.len()).min().unwrap_or(0);
    let mut sources = Vec::with_capacity(2 * n);
    for (label, files) in &classes {
        let kept = subsample(files, n, derive_seed(opts.seed, label.code(), u64::MAX));
        sources.extend(kept.into_iter().map(|path| SourceImage { path, label: *label }));
    }

    for label in Label::ALL {
        let dir = opts.out_dir.join(label.as_str());
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }

    let per_image: Vec<Result<Vec<ManifestRow>>> = sources
        .par_iter()
        .enumerate()
        .map(|(i, src)| process_one(src, i, opts))
        .collect();

    let mut manifest = Manifest::default();
    for rows in per_image {
        manifest.rows.extend(rows?);
    }
    manifest.validate()?;
    Ok(manifest)
}

fn process_one(src: &SourceImage, index: usize, opts: &BuildOptions) -> Result<Vec<ManifestRow>> {
    let img = load_image(&src.path)?;
    let ann = FaceAnnotation::load(sidecar_path(&src.path))?;
    let normalized = normalize(&img, &ann)?;
    let face = match &opts.pns {
        Some(params) => {
            let params = PnsParams {
                seed: derive_seed(opts.seed ^ params.seed, src.label.code(), index as u64),
                ..params.clone()
            };
            simulate_pns(&normalized.image, &params)?
        }
        None => normalized.image,
    };

    let key = source_key(&src.path);
    let source_ids = if ann.source_ids.is_empty() {
        vec![key.clone()]
    } else {
        ann.source_ids.clone()
    };
    let mut rows = Vec::with_capacity(opts.plan.multiplicity());
    augment_each(&face, &normalized.annotation, &opts.plan, |out| {
        let rel = format!("{}/{}__{}.png", src.label.as_str(), key, out.transform.file_tag());
        let path = opts.out_dir.join(&rel);
        std::fs::write(&path, encode_png(&out.image)?).map_err(|e| Error::io(&path, e))?;
        rows.push(ManifestRow {
            output_path: rel,
            label: src.label,
            source_ids: source_ids.clone(),
            alpha: match src.label {
                Label::Morphed => ann.alpha,
                Label::Genuine => None,
            },
            transform: out.transform.to_string(),
            pns_applied: opts.pns.is_some(),
            padded: normalized.padded,
        });
        Ok(())
    })?;
    Ok(rows)
}
