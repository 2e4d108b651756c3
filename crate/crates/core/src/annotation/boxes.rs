use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for boxes whose edges spill past the image border.
///
/// Edges within this distance of the border are clamped onto it; anything
/// further out is rejected.
pub const EDGE_TOLERANCE: f64 = 1e-6;

/// Coordinates are snapped to multiples of `2^-40`.
///
/// On this grid `1 - x`, `x / 2` and axis swaps are exact in `f64`, so the
/// mirror and quarter-turn transforms compose to bit-exact identities.
const GRID: f64 = 1_099_511_627_776.0;

fn snap(v: f64) -> f64 {
    (v * GRID).round() / GRID
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => f.write_str("x"),
            Axis::Y => f.write_str("y"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoxError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("{axis} center {value} outside [0, 1]")]
    CenterOutOfRange { axis: Axis, value: f64 },
    #[error("{axis} extent {value} outside (0, 1]")]
    ExtentOutOfRange { axis: Axis, value: f64 },
    #[error("{axis} edges [{low}, {high}] extend past the image")]
    EdgeOutOfBounds { axis: Axis, low: f64, high: f64 },
}

/// A class id plus a center-format bounding box in normalized image
/// coordinates.
///
/// Construction validates the box and snaps coordinates onto a fine dyadic
/// grid; every value of this type satisfies the box invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox", into = "RawBox")]
pub struct NormalizedBox {
    class_id: u32,
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
}

#[derive(Serialize, Deserialize)]
struct RawBox {
    class_id: u32,
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
}

impl TryFrom<RawBox> for NormalizedBox {
    type Error = BoxError;

    fn try_from(r: RawBox) -> Result<Self, BoxError> {
        NormalizedBox::new(r.class_id, r.cx, r.cy, r.w, r.h)
    }
}

impl From<NormalizedBox> for RawBox {
    fn from(b: NormalizedBox) -> Self {
        RawBox {
            class_id: b.class_id,
            cx: b.cx,
            cy: b.cy,
            w: b.w,
            h: b.h,
        }
    }
}

fn check_axis(axis: Axis, center: f64, extent: f64) -> Result<(f64, f64), BoxError> {
    if !(0.0..=1.0).contains(&center) {
        return Err(BoxError::CenterOutOfRange { axis, value: center });
    }
    if !(extent > 0.0 && extent <= 1.0) {
        return Err(BoxError::ExtentOutOfRange { axis, value: extent });
    }
    let low = center - extent / 2.0;
    let high = center + extent / 2.0;
    if low < -EDGE_TOLERANCE || high > 1.0 + EDGE_TOLERANCE {
        return Err(BoxError::EdgeOutOfBounds { axis, low, high });
    }
    if low >= 0.0 && high <= 1.0 {
        return Ok((snap(center), snap(extent)));
    }
    let (low, high) = (low.max(0.0), high.min(1.0));
    let (center, extent) = (snap((low + high) / 2.0), snap(high - low));
    if extent <= 0.0 {
        return Err(BoxError::ExtentOutOfRange { axis, value: extent });
    }
    Ok((center, extent))
}

impl NormalizedBox {
    pub fn new(class_id: u32, cx: f64, cy: f64, w: f64, h: f64) -> Result<Self, BoxError> {
        if ![cx, cy, w, h].iter().all(|v| v.is_finite()) {
            return Err(BoxError::NonFinite);
        }
        let (cx, w) = check_axis(Axis::X, cx, w)?;
        let (cy, h) = check_axis(Axis::Y, cy, h)?;
        Ok(Self { class_id, cx, cy, w, h })
    }

    /// Builds a box from corner coordinates `(x1, y1)`–`(x2, y2)`.
    pub fn from_corners(class_id: u32, x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, BoxError> {
        Self::new(class_id, (x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1)
    }

    /// Trusted constructor for transforms that map grid values to grid
    /// values without leaving the unit square.
    pub(crate) fn from_grid(class_id: u32, cx: f64, cy: f64, w: f64, h: f64) -> Self {
        debug_assert_eq!(snap(cx), cx);
        debug_assert_eq!(snap(w), w);
        Self { class_id, cx, cy, w, h }
    }

    pub fn class_id(&self) -> u32 {
        self.class_id
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }

    pub fn cy(&self) -> f64 {
        self.cy
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn with_class(self, class_id: u32) -> Self {
        Self { class_id, ..self }
    }

    /// `(x1, y1, x2, y2)` in normalized coordinates.
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        let (hw, hh) = (self.w / 2.0, self.h / 2.0);
        (self.cx - hw, self.cy - hh, self.cx + hw, self.cy + hh)
    }

    pub fn area(&self) -> f64 {
        let (x1, y1, x2, y2) = self.corners();
        (x2 - x1) * (y2 - y1)
    }

    /// Pixel-space corners for an image of the given size.
    pub fn to_pixels(&self, width: u32, height: u32) -> (f64, f64, f64, f64) {
        let (x1, y1, x2, y2) = self.corners();
        let (w, h) = (width as f64, height as f64);
        (x1 * w, y1 * h, x2 * w, y2 * h)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassMapError {
    #[error("class list is empty")]
    Empty,
    #[error("duplicate class name {0:?}")]
    Duplicate(String),
}

/// Ordered class names; the position of a name is its class id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ClassMap {
    names: Vec<String>,
}

impl TryFrom<Vec<String>> for ClassMap {
    type Error = ClassMapError;

    fn try_from(names: Vec<String>) -> Result<Self, ClassMapError> {
        ClassMap::new(names)
    }
}

impl From<ClassMap> for Vec<String> {
    fn from(m: ClassMap) -> Self {
        m.names
    }
}

impl ClassMap {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, ClassMapError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(ClassMapError::Empty);
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(ClassMapError::Duplicate(name.clone()));
            }
        }
        Ok(Self { names })
    }

    pub fn single(name: impl Into<String>) -> Self {
        Self { names: vec![name.into()] }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_single_class(&self) -> bool {
        self.names.len() == 1
    }

    pub fn name(&self, class_id: u32) -> Option<&str> {
        self.names.get(class_id as usize).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|n| n == name).map(|i| i as u32)
    }

    pub fn contains_id(&self, class_id: u32) -> bool {
        (class_id as usize) < self.names.len()
    }
}
