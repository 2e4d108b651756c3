//! Stretch resize and the dihedral transforms (mirrors and quarter turns),
//! applied to pixels and boxes together.

use image::imageops::{self, FilterType};
use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::{LabeledImage, PrepError};
use crate::annotation::NormalizedBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometricOp {
    Identity,
    FlipH,
    FlipV,
    RotateCw,
    RotateCcw,
    Rotate180,
}

impl GeometricOp {
    pub const ALL: [GeometricOp; 6] = [
        GeometricOp::Identity,
        GeometricOp::FlipH,
        GeometricOp::FlipV,
        GeometricOp::RotateCw,
        GeometricOp::RotateCcw,
        GeometricOp::Rotate180,
    ];

    pub fn inverse(self) -> Self {
        match self {
            GeometricOp::RotateCw => GeometricOp::RotateCcw,
            GeometricOp::RotateCcw => GeometricOp::RotateCw,
            other => other,
        }
    }

    pub fn swaps_axes(self) -> bool {
        matches!(self, GeometricOp::RotateCw | GeometricOp::RotateCcw)
    }

    pub fn apply_box(self, b: &NormalizedBox) -> NormalizedBox {
        let (c, x, y, w, h) = (b.class_id(), b.cx(), b.cy(), b.w(), b.h());
        match self {
            GeometricOp::Identity => *b,
            GeometricOp::FlipH => NormalizedBox::from_grid(c, 1.0 - x, y, w, h),
            GeometricOp::FlipV => NormalizedBox::from_grid(c, x, 1.0 - y, w, h),
            GeometricOp::RotateCw => NormalizedBox::from_grid(c, 1.0 - y, x, h, w),
            GeometricOp::RotateCcw => NormalizedBox::from_grid(c, y, 1.0 - x, h, w),
            GeometricOp::Rotate180 => NormalizedBox::from_grid(c, 1.0 - x, 1.0 - y, w, h),
        }
    }

    pub fn apply_image(self, img: &RgbImage) -> RgbImage {
        match self {
            GeometricOp::Identity => img.clone(),
            GeometricOp::FlipH => imageops::flip_horizontal(img),
            GeometricOp::FlipV => imageops::flip_vertical(img),
            GeometricOp::RotateCw => imageops::rotate90(img),
            GeometricOp::RotateCcw => imageops::rotate270(img),
            GeometricOp::Rotate180 => imageops::rotate180(img),
        }
    }

    pub fn apply(self, item: &LabeledImage) -> Result<LabeledImage, PrepError> {
        let pixels = self.apply_image(&*item.pixels()?);
        let boxes = item.boxes.iter().map(|b| self.apply_box(b)).collect();
        Ok(item.with_pixels(pixels, boxes))
    }
}

pub fn flip_h(item: &LabeledImage) -> Result<LabeledImage, PrepError> {
    GeometricOp::FlipH.apply(item)
}

pub fn flip_v(item: &LabeledImage) -> Result<LabeledImage, PrepError> {
    GeometricOp::FlipV.apply(item)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rotation {
    Cw,
    Ccw,
    R180,
}

pub fn rotate90(item: &LabeledImage, direction: Rotation) -> Result<LabeledImage, PrepError> {
    let op = match direction {
        Rotation::Cw => GeometricOp::RotateCw,
        Rotation::Ccw => GeometricOp::RotateCcw,
        Rotation::R180 => GeometricOp::Rotate180,
    };
    op.apply(item)
}

/// Anisotropic resize to exactly `target`. Normalized boxes are invariant
/// under a stretch, so only the pixels change.
pub fn resize_stretch(item: &LabeledImage, target: (u32, u32)) -> Result<LabeledImage, PrepError> {
    let (tw, th) = target;
    if tw == 0 || th == 0 {
        return Err(PrepError::InvalidSpec(format!("resize target {tw}x{th} must be positive")));
    }
    if (item.width, item.height) == target {
        return Ok(item.clone());
    }
    let resized = imageops::resize(&*item.pixels()?, tw, th, FilterType::Triangle);
    Ok(item.with_pixels(resized, item.boxes.clone()))
}

/// Plain-pixel counterpart of [`resize_stretch`], used by the session engine.
pub fn stretch_pixels(img: &RgbImage, target: (u32, u32)) -> RgbImage {
    if img.dimensions() == target {
        img.clone()
    } else {
        imageops::resize(img, target.0, target.1, FilterType::Triangle)
    }
}
