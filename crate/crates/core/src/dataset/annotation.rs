//! Per-image annotation sidecars.
//!
//! Each image `face.png` may carry a `face.json` next to it:
//!
//! ```json
//! {
//!   "left_eye": [141.0, 180.5],
//!   "right_eye": [291.0, 181.0],
//!   "nose_tip": [216.0, 260.0],
//!   "points": [[120.0, 150.0], [300.0, 152.0]],
//!   "tags": ["brow_l", "brow_r"],
//!   "source_ids": ["subj04", "subj17"],
//!   "alpha": 0.3
//! }
//! ```
//!
//! Only the three named points are required for normalization. `points`
//! (with optional `tags`) holds the morphing landmarks; `source_ids` and
//! `alpha` describe where a morph came from.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{LandmarkSet, Point2};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct SidecarFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left_eye: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right_eye: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nose_tip: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tags: Option<Vec<Option<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source_ids: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
}

fn point([x, y]: [f64; 2]) -> Point2 {
    Point2::new(x, y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceAnnotation {
    pub left_eye: Point2,
    pub right_eye: Point2,
    pub nose_tip: Point2,
    pub landmarks: Option<LandmarkSet>,
    pub source_ids: Vec<String>,
    pub alpha: Option<f64>,
}

impl FaceAnnotation {
    pub fn new(left_eye: Point2, right_eye: Point2, nose_tip: Point2) -> Self {
        FaceAnnotation {
            left_eye,
            right_eye,
            nose_tip,
            landmarks: None,
            source_ids: Vec::new(),
            alpha: None,
        }
    }

    pub fn eye_distance(&self) -> f64 {
        self.left_eye.distance(self.right_eye)
    }

    /// Checks the annotation against an image of `width` x `height` pixels.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        let d = self.eye_distance();
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidAnnotation(format!("eye distance {d}")));
        }
        for (name, p) in [
            ("left_eye", self.left_eye),
            ("right_eye", self.right_eye),
            ("nose_tip", self.nose_tip),
        ] {
            let inside = p.is_finite()
                && p.x >= 0.0
                && p.y >= 0.0
                && p.x <= (width - 1) as f64
                && p.y <= (height - 1) as f64;
            if !inside {
                return Err(Error::InvalidAnnotation(format!(
                    "{name} ({}, {}) outside {width}x{height} image",
                    p.x, p.y
                )));
            }
        }
        Ok(())
    }

    /// Applies `p -> scale * p + offset` to every point.
    pub fn transformed(&self, scale: f64, offset: Point2) -> FaceAnnotation {
        self.map(|p| Point2::new(scale * p.x + offset.x, scale * p.y + offset.y))
    }

    pub fn map(&self, f: impl Fn(Point2) -> Point2) -> FaceAnnotation {
        let landmarks = self.landmarks.as_ref().map(|set| {
            LandmarkSet::with_tags(set.points().iter().map(|&p| f(p)).collect(), set.tags().to_vec())
                .expect("mapping preserves point count")
        });
        FaceAnnotation {
            left_eye: f(self.left_eye),
            right_eye: f(self.right_eye),
            nose_tip: f(self.nose_tip),
            landmarks,
            source_ids: self.source_ids.clone(),
            alpha: self.alpha,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SidecarFile = serde_json::from_str(text)?;
        let need = |v: Option<[f64; 2]>, name: &str| {
            v.map(point)
                .ok_or_else(|| Error::InvalidAnnotation(format!("missing '{name}'")))
        };
        let landmarks = landmarks_from(&file)?;
        Ok(FaceAnnotation {
            left_eye: need(file.left_eye, "left_eye")?,
            right_eye: need(file.right_eye, "right_eye")?,
            nose_tip: need(file.nose_tip, "nose_tip")?,
            landmarks,
            source_ids: file.source_ids.unwrap_or_default(),
            alpha: file.alpha,
        })
    }

    pub fn to_json(&self) -> String {
        let xy = |p: Point2| [p.x, p.y];
        let file = SidecarFile {
            left_eye: Some(xy(self.left_eye)),
            right_eye: Some(xy(self.right_eye)),
            nose_tip: Some(xy(self.nose_tip)),
            points: self
                .landmarks
                .as_ref()
                .map(|s| s.points().iter().map(|&p| xy(p)).collect()),
            tags: self
                .landmarks
                .as_ref()
                .filter(|s| s.tags().iter().any(Option::is_some))
                .map(|s| s.tags().to_vec()),
            source_ids: (!self.source_ids.is_empty()).then(|| self.source_ids.clone()),
            alpha: self.alpha,
        };
        serde_json::to_string_pretty(&file).expect("sidecar serialization is infallible")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        FaceAnnotation::from_json(&read_text(path)?)
            .map_err(|e| Error::InvalidAnnotation(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
        _ => Error::io(path, e),
    })
}

fn landmarks_from(file: &SidecarFile) -> Result<Option<LandmarkSet>> {
    let Some(points) = &file.points else {
        return Ok(None);
    };
    let pts: Vec<Point2> = points.iter().copied().map(point).collect();
    let set = match &file.tags {
        Some(tags) => LandmarkSet::with_tags(pts, tags.clone())?,
        None => LandmarkSet::new(pts)?,
    };
    Ok(Some(set))
}

/// Reads morphing landmarks from a sidecar.
///
/// Uses the `points` array when present, otherwise the three named points in
/// the order left eye, right eye, nose tip.
pub fn load_landmarks(path: impl AsRef<Path>) -> Result<LandmarkSet> {
    let path = path.as_ref();
    let file: SidecarFile = serde_json::from_str(&read_text(path)?)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if let Some(set) = landmarks_from(&file)? {
        return Ok(set);
    }
    match (file.left_eye, file.right_eye, file.nose_tip) {
        (Some(l), Some(r), Some(n)) => LandmarkSet::with_tags(
            vec![point(l), point(r), point(n)],
            ["left_eye", "right_eye", "nose_tip"]
                .map(|t| Some(t.to_string()))
                .to_vec(),
        ),
        _ => Err(Error::InvalidAnnotation(format!(
            "{}: no 'points' and no named landmarks",
            path.display()
        ))),
    }
}

/// `dir/face.png` -> `dir/face.json`.
pub fn sidecar_path(image: &Path) -> PathBuf {
    image.with_extension("json")
}
