use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::color::{color_jitter, JitterFactors};
use super::geometry::{resize_stretch, GeometricOp};
use super::{Dataset, LabeledImage, PrepError};
use crate::annotation::ClassMap;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentSpec {
    pub variants_per_image: u32,
    /// Saturation factor drawn from `1 ± saturation_range`.
    pub saturation_range: f64,
    pub brightness_range: f64,
    pub exposure_range: f64,
    /// Geometric ops a variant may draw besides the identity.
    pub geometric_ops: Vec<GeometricOp>,
    pub target_size: (u32, u32),
    pub seed: u64,
}

impl Default for AugmentSpec {
    fn default() -> Self {
        Self {
            variants_per_image: 3,
            saturation_range: 0.25,
            brightness_range: 0.15,
            exposure_range: 0.10,
            geometric_ops: vec![
                GeometricOp::FlipH,
                GeometricOp::FlipV,
                GeometricOp::RotateCw,
                GeometricOp::RotateCcw,
                GeometricOp::Rotate180,
            ],
            target_size: (640, 640),
            seed: 0,
        }
    }
}

impl AugmentSpec {
    pub fn validate(&self) -> Result<(), PrepError> {
        if self.variants_per_image == 0 {
            return Err(PrepError::InvalidSpec("variants_per_image must be at least 1".into()));
        }
        for (name, r) in [
            ("saturation", self.saturation_range),
            ("brightness", self.brightness_range),
            ("exposure", self.exposure_range),
        ] {
            if !(0.0..1.0).contains(&r) {
                return Err(PrepError::InvalidSpec(format!("{name} range {r} must be in [0, 1)")));
            }
        }
        if self.target_size.0 == 0 || self.target_size.1 == 0 {
            return Err(PrepError::InvalidSpec("target size must be positive".into()));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut SplitMix64) -> (GeometricOp, JitterFactors) {
        let choices = self.geometric_ops.len() as u64 + 1;
        let k = rng.below(choices) as usize;
        let op = if k == 0 { GeometricOp::Identity } else { self.geometric_ops[k - 1] };
        let mut factor = |r: f64| if r == 0.0 { 1.0 } else { rng.uniform(1.0 - r, 1.0 + r) };
        let factors = JitterFactors {
            saturation: factor(self.saturation_range),
            brightness: factor(self.brightness_range),
            exposure: factor(self.exposure_range),
        };
        (op, factors)
    }
}

/// What was applied to produce one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRecord {
    pub source: String,
    pub name: String,
    pub op: GeometricOp,
    pub factors: JitterFactors,
}

#[derive(Debug, Clone)]
pub struct AugmentOutput {
    /// Resized originals followed, per original, by its variants.
    pub dataset: Dataset,
    pub originals: usize,
    pub variants: usize,
    pub records: Vec<VariantRecord>,
}

/// Resizes every image to the target and adds `variants_per_image`
/// augmented copies per original, named `<stem>_aug<k>`.
///
/// Each item draws from its own substream keyed by its index, so the
/// output does not depend on how the work is scheduled.
pub fn augment_dataset(ds: &Dataset, spec: &AugmentSpec) -> Result<AugmentOutput, PrepError> {
    spec.validate()?;
    let per_item: Vec<(Vec<LabeledImage>, Vec<VariantRecord>)> = ds
        .items
        .par_iter()
        .enumerate()
        .map(|(index, item)| {
            let base = resize_stretch(item, spec.target_size)?;
            let mut rng = SplitMix64::derive(spec.seed, index as u64);
            let mut out = vec![base.clone()];
            let mut records = Vec::new();
            for k in 1..=spec.variants_per_image {
                let (op, factors) = spec.draw(&mut rng);
                let mut variant = color_jitter(&op.apply(&base)?, &factors)?;
                variant.name = format!("{}_aug{k}", item.name);
                records.push(VariantRecord { source: item.name.clone(), name: variant.name.clone(), op, factors });
                out.push(variant);
            }
            Ok((out, records))
        })
        .collect::<Result<_, PrepError>>()?;

    let originals = ds.len();
    let mut items = Vec::with_capacity(originals * (1 + spec.variants_per_image as usize));
    let mut records = Vec::new();
    for (group, recs) in per_item {
        items.extend(group);
        records.extend(recs);
    }
    let variants = records.len();
    Ok(AugmentOutput { dataset: Dataset { class_map: ds.class_map.clone(), items }, originals, variants, records })
}

/// Relabels every box as class 0 of a single-class map named `target_name`.
pub fn collapse_classes(ds: &Dataset, target_name: &str) -> Dataset {
    let items = ds
        .items
        .iter()
        .map(|item| LabeledImage { boxes: item.boxes.iter().map(|b| b.with_class(0)).collect(), ..item.clone() })
        .collect();
    Dataset { class_map: ClassMap::single(target_name), items }
}
