use super::{Dataset, LabeledImage, PrepError};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self { train: 0.70, val: 0.15, test: 0.15 }
    }
}

impl SplitRatios {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self, PrepError> {
        let r = Self { train, val, test };
        let parts = [train, val, test];
        if parts.iter().any(|p| !p.is_finite() || *p <= 0.0) || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(PrepError::InvalidRatios(format!("{train},{val},{test}")));
        }
        Ok(r)
    }

    /// Item counts for a stratum of `n` by largest remainder: floors first,
    /// leftovers to the biggest fractional parts, ties in train/val/test
    /// order. Every count is within one item of its exact share.
    pub fn allocate(&self, n: usize) -> [usize; 3] {
        let exact = [self.train, self.val, self.test].map(|r| r * n as f64);
        let mut counts = exact.map(|e| e.floor() as usize);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let (fa, fb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        let assigned: usize = counts.iter().sum();
        for &k in order.iter().cycle().take(n.saturating_sub(assigned)) {
            counts[k] += 1;
        }
        counts
    }
}

/// A stratum too small to be represented in every split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallStratum {
    /// Dominant class of the stratum; `None` for images without boxes.
    pub class_id: Option<u32>,
    pub items: usize,
}

#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
    pub warnings: Vec<SmallStratum>,
}

/// Partitions `ds` by dominant class so each stratum keeps the ratios.
///
/// Within a split, items keep their original relative order.
pub fn stratified_split(ds: &Dataset, ratios: SplitRatios, seed: u64) -> Result<SplitOutcome, PrepError> {
    if ds.is_empty() {
        return Err(PrepError::EmptyDataset);
    }
    let mut strata: Vec<(Option<u32>, Vec<usize>)> = Vec::new();
    for (i, item) in ds.items.iter().enumerate() {
        let key = item.dominant_class();
        match strata.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(i),
            None => strata.push((key, vec![i])),
        }
    }
    strata.sort_by_key(|(k, _)| k.map_or(0, |c| c as u64 + 1));

    let mut assignment = vec![0u8; ds.len()];
    let mut warnings = Vec::new();
    for (key, mut members) in strata {
        if members.len() < 3 {
            log::warn!("stratum {key:?} has only {} item(s); assigning to train first", members.len());
            warnings.push(SmallStratum { class_id: key, items: members.len() });
        }
        let stream = key.map_or(u64::MAX, u64::from);
        SplitMix64::derive(seed, stream).shuffle(&mut members);
        let [n_train, n_val, _] = ratios.allocate(members.len());
        for (pos, idx) in members.into_iter().enumerate() {
            assignment[idx] = if pos < n_train {
                0
            } else if pos < n_train + n_val {
                1
            } else {
                2
            };
        }
    }

    let pick = |split: u8| -> Vec<LabeledImage> {
        ds.items
            .iter()
            .zip(&assignment)
            .filter(|(_, a)| **a == split)
            .map(|(item, _)| item.clone())
            .collect()
    };
    let with = |items| Dataset { class_map: ds.class_map.clone(), items };
    Ok(SplitOutcome { train: with(pick(0)), val: with(pick(1)), test: with(pick(2)), warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{ClassMap, NormalizedBox};
    use image::RgbImage;

    fn ds(classes: &[u32]) -> Dataset {
        let items = classes
            .iter()
            .enumerate()
            .map(|(i, c)| {
                LabeledImage::in_memory(
                    format!("img{i}"),
                    RgbImage::new(1, 1),
                    vec![NormalizedBox::new(*c, 0.5, 0.5, 0.5, 0.5).unwrap()],
                )
            })
            .collect();
        Dataset::new(ClassMap::new((0..13).map(|i| format!("c{i}"))).unwrap(), items).unwrap()
    }

    #[test]
    fn hundred_items_split_70_15_15() {
        let out = stratified_split(&ds(&[0; 100]), SplitRatios::default(), 1).unwrap();
        assert_eq!((out.train.len(), out.val.len(), out.test.len()), (70, 15, 15));
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn single_item_goes_to_train_with_warning() {
        let out = stratified_split(&ds(&[4]), SplitRatios::default(), 1).unwrap();
        assert_eq!((out.train.len(), out.val.len(), out.test.len()), (1, 0, 0));
        assert_eq!(out.warnings, vec![SmallStratum { class_id: Some(4), items: 1 }]);
    }

    #[test]
    fn two_strata_respect_ratios() {
        let mut classes = vec![0; 40];
        classes.extend([1; 60]);
        let out = stratified_split(&ds(&classes), SplitRatios::default(), 5).unwrap();
        let count = |d: &Dataset, c: u32| d.items.iter().filter(|i| i.boxes[0].class_id() == c).count();
        assert_eq!([count(&out.train, 0), count(&out.val, 0), count(&out.test, 0)], [28, 6, 6]);
        assert_eq!([count(&out.train, 1), count(&out.val, 1), count(&out.test, 1)], [42, 9, 9]);
    }

    #[test]
    fn allocation_sums_and_bounds() {
        let r = SplitRatios::default();
        for n in 0..500 {
            let c = r.allocate(n);
            assert_eq!(c.iter().sum::<usize>(), n);
            for (k, share) in [0.7, 0.15, 0.15].iter().enumerate() {
                assert!((c[k] as f64 - share * n as f64).abs() <= 1.0, "n={n} {c:?}");
            }
        }
        assert_eq!(r.allocate(2), [2, 0, 0]);
    }

    #[test]
    fn invalid_ratios_and_empty() {
        assert!(SplitRatios::new(0.7, 0.2, 0.2).is_err());
        assert!(SplitRatios::new(1.0, 0.0, 0.0).is_err());
        let empty = Dataset::new(ClassMap::single("Plant"), vec![]).unwrap();
        assert!(matches!(stratified_split(&empty, SplitRatios::default(), 0), Err(PrepError::EmptyDataset)));
    }
}
