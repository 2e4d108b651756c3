//! Dataset preparation: class collapse, stratified splitting, stretch
//! resize and the flip/rotate/color augmentation pipeline.

mod augment;
mod color;
mod dataset;
mod geometry;
mod split;

use std::path::PathBuf;

use thiserror::Error;

use crate::annotation::LabelError;

pub use augment::{augment_dataset, collapse_classes, AugmentOutput, AugmentSpec, VariantRecord};
pub use color::{color_jitter, color_jitter_pixels, JitterFactors};
pub use dataset::{read_split_dir, write_split_dir, Dataset, ImageRef, LabeledImage, IMAGE_EXTENSIONS};
pub use geometry::{flip_h, flip_v, resize_stretch, rotate90, stretch_pixels, GeometricOp, Rotation};
pub use split::{stratified_split, SmallStratum, SplitOutcome, SplitRatios};

#[derive(Debug, Error)]
pub enum PrepError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Image { path: PathBuf, source: image::ImageError },
    #[error("{path}: {source}")]
    Label { path: PathBuf, source: LabelError },
    #[error("expected directory {0}")]
    MissingLayout(PathBuf),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("split ratios {0} must be positive and sum to 1")]
    InvalidRatios(String),
    #[error("invalid augmentation settings: {0}")]
    InvalidSpec(String),
    #[error("invalid item: {0}")]
    InvalidItem(String),
}
