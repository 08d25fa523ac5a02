//! Geometric normalization and data augmentation.

use std::fmt;

use rayon::prelude::*;

use super::annotation::FaceAnnotation;
use crate::error::{Error, Result};
use crate::raster::{Point2, Raster};

pub const NORMALIZED_WIDTH: usize = 350;
pub const NORMALIZED_HEIGHT: usize = 400;
/// Interocular distance after normalization, in pixels.
pub const TARGET_EYE_DISTANCE: f64 = 150.0;

/// Output position of the nose tip in a normalized frame.
pub const NOSE_ANCHOR: Point2 = Point2::new(
    (NORMALIZED_WIDTH / 2) as f64,
    (NORMALIZED_HEIGHT / 2) as f64,
);

#[derive(Debug, Clone)]
pub struct Normalized {
    pub image: Raster,
    pub annotation: FaceAnnotation,
    /// Part of the crop fell outside the scaled source and was filled black.
    pub padded: bool,
}

/// Scales to a 150 px eye distance and crops 350x400 around the nose tip.
pub fn normalize(img: &Raster, ann: &FaceAnnotation) -> Result<Normalized> {
    ann.validate(img.width(), img.height())?;
    let scale = TARGET_EYE_DISTANCE / ann.eye_distance();
    let origin = Point2::new(
        scale * ann.nose_tip.x - NOSE_ANCHOR.x,
        scale * ann.nose_tip.y - NOSE_ANCHOR.y,
    );
    let (sw, sh) = (img.width() as f64, img.height() as f64);
    let channels = img.channels();
    let (w, h) = (NORMALIZED_WIDTH, NORMALIZED_HEIGHT);

    let mut data = vec![0u8; w * h * channels];
    let padded_rows: Vec<bool> = data
        .par_chunks_mut(w * channels)
        .enumerate()
        .map(|(v, row)| {
            let mut padded = false;
            let sy = (origin.y + v as f64) / scale;
            for u in 0..w {
                let sx = (origin.x + u as f64) / scale;
                if sx < -0.5 || sy < -0.5 || sx >= sw - 0.5 || sy >= sh - 0.5 {
                    padded = true;
                    continue;
                }
                for c in 0..channels {
                    row[u * channels + c] = crate::raster::quantize_sample(img.sample_bilinear(sx, sy, c));
                }
            }
            padded
        })
        .collect();

    Ok(Normalized {
        image: Raster::new(w, h, channels, data)?,
        annotation: ann.transformed(scale, Point2::new(-origin.x, -origin.y)),
        padded: padded_rows.into_iter().any(|p| p),
    })
}

/// Bilinear rotation by `degrees` about `center` followed by an integer shift,
/// with replicated borders. Positive angles turn the content counter-clockwise
/// on screen.
pub fn rotate_translate(img: &Raster, center: Point2, degrees: f64, shift: (i32, i32)) -> Raster {
    if degrees == 0.0 && shift == (0, 0) {
        return img.clone();
    }
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let (sin, cos) = degrees.to_radians().sin_cos();
    let mut data = vec![0u8; w * h * ch];
    data.par_chunks_mut(w * ch).enumerate().for_each(|(y, row)| {
        for x in 0..w {
            // undo the shift, then rotate back about the centre
            let qx = x as f64 - f64::from(shift.0);
            let qy = y as f64 - f64::from(shift.1);
            let (dx, dy) = (qx - center.x, qy - center.y);
            let sx = qx + (dx * (cos - 1.0) - dy * sin);
            let sy = qy + (dx * sin + dy * (cos - 1.0));
            for c in 0..ch {
                row[x * ch + c] = crate::raster::quantize_sample(img.sample_bilinear(sx, sy, c));
            }
        }
    });
    Raster::new(w, h, ch, data).expect("same shape as the input")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Mirroring x rotation x translation.
    Au,
    /// Mirroring x rotation x multi-crop.
    Mc,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "au" => Ok(Scheme::Au),
            "mc" => Ok(Scheme::Mc),
            other => Err(Error::Parse(format!("unknown scheme '{other}' (au|mc)"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Au => "au",
            Scheme::Mc => "mc",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CropRegion {
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
    Center,
}

impl CropRegion {
    pub const ALL: [CropRegion; 5] = [
        CropRegion::TopLeft,
        CropRegion::TopRight,
        CropRegion::BottomLeft,
        CropRegion::BottomRight,
        CropRegion::Center,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            CropRegion::TopLeft => "tl",
            CropRegion::TopRight => "tr",
            CropRegion::BottomLeft => "bl",
            CropRegion::BottomRight => "br",
            CropRegion::Center => "c",
        }
    }

    /// Top-left corner of a `crop` window inside a `frame`.
    pub fn origin(self, frame: (usize, usize), crop: (usize, usize)) -> (usize, usize) {
        let (dx, dy) = (frame.0 - crop.0, frame.1 - crop.1);
        match self {
            CropRegion::TopLeft => (0, 0),
            CropRegion::TopRight => (dx, 0),
            CropRegion::BottomLeft => (0, dy),
            CropRegion::BottomRight => (dx, dy),
            CropRegion::Center => (dx / 2, dy / 2),
        }
    }
}

/// One step of the expansion: mirror state, rotation, then translation or crop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub mirror: bool,
    pub rotation: f64,
    pub shift: (i32, i32),
    pub crop: Option<CropRegion>,
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mirror={};rot={}", u8::from(self.mirror), self.rotation)?;
        match self.crop {
            Some(region) => write!(f, ";crop={}", region.tag()),
            None => write!(f, ";tx={};ty={}", self.shift.0, self.shift.1),
        }
    }
}

impl Transform {
    /// Filename-safe form of the descriptor.
    pub fn file_tag(&self) -> String {
        let mut s = format!("m{}_r{}", u8::from(self.mirror), self.rotation);
        match self.crop {
            Some(region) => s.push_str(&format!("_c{}", region.tag())),
            None => s.push_str(&format!("_x{}_y{}", self.shift.0, self.shift.1)),
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationPlan {
    pub scheme: Scheme,
    pub mirror: Vec<bool>,
    pub rotations: Vec<f64>,
    pub translations: Vec<(i32, i32)>,
    pub crop_size: Option<(usize, usize)>,
}

pub const ROTATIONS_DEG: [f64; 3] = [-5.0, 0.0, 5.0];
pub const SHIFTS_PX: [i32; 3] = [-1, 0, 1];

impl AugmentationPlan {
    pub fn au() -> Self {
        AugmentationPlan {
            scheme: Scheme::Au,
            mirror: vec![false, true],
            rotations: ROTATIONS_DEG.to_vec(),
            translations: SHIFTS_PX
                .iter()
                .flat_map(|&tx| SHIFTS_PX.iter().map(move |&ty| (tx, ty)))
                .collect(),
            crop_size: None,
        }
    }

    pub fn mc(crop_size: (usize, usize)) -> Self {
        AugmentationPlan {
            scheme: Scheme::Mc,
            mirror: vec![false, true],
            rotations: ROTATIONS_DEG.to_vec(),
            translations: vec![(0, 0)],
            crop_size: Some(crop_size),
        }
    }

    pub fn for_scheme(scheme: Scheme, crop_size: (usize, usize)) -> Self {
        match scheme {
            Scheme::Au => AugmentationPlan::au(),
            Scheme::Mc => AugmentationPlan::mc(crop_size),
        }
    }

    /// A single identity transform.
    pub fn identity() -> Self {
        AugmentationPlan {
            scheme: Scheme::Au,
            mirror: vec![false],
            rotations: vec![0.0],
            translations: vec![(0, 0)],
            crop_size: None,
        }
    }

    /// Every transform in canonical order: mirror outermost, then rotation,
    /// then translation (Au) or crop region (Mc).
    pub fn transforms(&self) -> Vec<Transform> {
        let mut out = Vec::with_capacity(self.multiplicity());
        for &mirror in &self.mirror {
            for &rotation in &self.rotations {
                match self.scheme {
                    Scheme::Au => out.extend(self.translations.iter().map(|&shift| Transform {
                        mirror,
                        rotation,
                        shift,
                        crop: None,
                    })),
                    Scheme::Mc => out.extend(CropRegion::ALL.iter().map(|&region| Transform {
                        mirror,
                        rotation,
                        shift: (0, 0),
                        crop: Some(region),
                    })),
                }
            }
        }
        out
    }

    /// Outputs per input image.
    pub fn multiplicity(&self) -> usize {
        let inner = match self.scheme {
            Scheme::Au => self.translations.len(),
            Scheme::Mc => CropRegion::ALL.len(),
        };
        self.mirror.len() * self.rotations.len() * inner
    }
}

#[derive(Debug, Clone)]
pub struct Augmented {
    pub image: Raster,
    pub transform: Transform,
}

/// Expands one normalized face into every transform of `plan`.
pub fn augment(img: &Raster, ann: &FaceAnnotation, plan: &AugmentationPlan) -> Result<Vec<Augmented>> {
    let mut out = Vec::with_capacity(plan.multiplicity());
    augment_each(img, ann, plan, |a| {
        out.push(a);
        Ok(())
    })?;
    Ok(out)
}

/// Like [`augment`] but hands each output to `sink` as soon as it is produced.
pub fn augment_each(
    img: &Raster,
    ann: &FaceAnnotation,
    plan: &AugmentationPlan,
    mut sink: impl FnMut(Augmented) -> Result<()>,
) -> Result<()> {
    let frame = (NORMALIZED_WIDTH, NORMALIZED_HEIGHT);
    if img.dims() != frame {
        return Err(Error::DimensionMismatch(format!(
            "augmentation expects a {}x{} normalized image, got {}x{}",
            frame.0,
            frame.1,
            img.width(),
            img.height()
        )));
    }
    if plan.scheme == Scheme::Mc {
        let crop = plan
            .crop_size
            .ok_or_else(|| Error::InvalidParameter("multi-crop plan without crop size".into()))?;
        if crop.0 == 0 || crop.1 == 0 || crop.0 > frame.0 || crop.1 > frame.1 {
            return Err(Error::InvalidParameter(format!(
                "crop {}x{} does not fit in {}x{}",
                crop.0, crop.1, frame.0, frame.1
            )));
        }
    }

    let mirrored = img.mirror();
    let mirrored_nose = Point2::new((frame.0 - 1) as f64 - ann.nose_tip.x, ann.nose_tip.y);
    for t in plan.transforms() {
        let (src, nose) = if t.mirror {
            (&mirrored, mirrored_nose)
        } else {
            (img, ann.nose_tip)
        };
        let moved = rotate_translate(src, nose, t.rotation, t.shift);
        let image = match (t.crop, plan.crop_size) {
            (Some(region), Some(size)) => {
                let (x0, y0) = region.origin(frame, size);
                moved.crop(x0, y0, size.0, size.1)?
            }
            _ => moved,
        };
        sink(Augmented { image, transform: t })?;
    }
    Ok(())
}
