//! Face normalization, augmentation and training-set assembly.

mod annotation;
mod build;
mod manifest;
mod transform;

pub use annotation::{load_landmarks, sidecar_path, FaceAnnotation};
pub use build::{build_training_set, list_images, BuildOptions};
pub use manifest::{Manifest, ManifestRow, MANIFEST_HEADER};
pub use transform::{
    augment, augment_each, normalize, rotate_translate, AugmentationPlan, Augmented, CropRegion,
    Normalized, Scheme, Transform, NORMALIZED_HEIGHT, NORMALIZED_WIDTH, NOSE_ANCHOR, ROTATIONS_DEG,
    SHIFTS_PX, TARGET_EYE_DISTANCE,
};
