use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use image::RgbImage;

use super::PrepError;
use crate::annotation::{parse_label_file, serialize_labels, ClassMap, NormalizedBox};

pub const IMAGE_EXTENSIONS: [&str; 5] = ["jpg", "jpeg", "png", "bmp", "webp"];

/// Where an item's pixels live.
#[derive(Debug, Clone)]
pub enum ImageRef {
    File(PathBuf),
    Memory(Arc<RgbImage>),
}

/// An image plus its annotations.
#[derive(Debug, Clone)]
pub struct LabeledImage {
    /// File stem used when the item is written out.
    pub name: String,
    /// Extension (without dot) used when the item is written out.
    pub ext: String,
    pub image: ImageRef,
    pub width: u32,
    pub height: u32,
    pub boxes: Vec<NormalizedBox>,
}

impl LabeledImage {
    pub fn in_memory(name: impl Into<String>, pixels: RgbImage, boxes: Vec<NormalizedBox>) -> Self {
        let (width, height) = pixels.dimensions();
        assert!(width > 0 && height > 0, "image must have positive dimensions");
        Self {
            name: name.into(),
            ext: "png".into(),
            image: ImageRef::Memory(Arc::new(pixels)),
            width,
            height,
            boxes,
        }
    }

    /// Decoded pixels, reading the file if the image is not in memory.
    pub fn pixels(&self) -> Result<Arc<RgbImage>, PrepError> {
        match &self.image {
            ImageRef::Memory(px) => Ok(Arc::clone(px)),
            ImageRef::File(path) => image::open(path)
                .map(|img| Arc::new(img.to_rgb8()))
                .map_err(|source| PrepError::Image { path: path.clone(), source }),
        }
    }

    /// Same annotations, new in-memory pixels.
    pub(crate) fn with_pixels(&self, pixels: RgbImage, boxes: Vec<NormalizedBox>) -> Self {
        let (width, height) = pixels.dimensions();
        Self {
            name: self.name.clone(),
            ext: self.ext.clone(),
            image: ImageRef::Memory(Arc::new(pixels)),
            width,
            height,
            boxes,
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.{}", self.name, self.ext)
    }

    /// Class with the most boxes on this image; ties go to the smaller id.
    pub fn dominant_class(&self) -> Option<u32> {
        let mut counts: Vec<(u32, usize)> = Vec::new();
        for b in &self.boxes {
            match counts.iter_mut().find(|(c, _)| *c == b.class_id()) {
                Some((_, n)) => *n += 1,
                None => counts.push((b.class_id(), 1)),
            }
        }
        counts
            .into_iter()
            .max_by(|(ca, na), (cb, nb)| na.cmp(nb).then(cb.cmp(ca)))
            .map(|(c, _)| c)
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub class_map: ClassMap,
    pub items: Vec<LabeledImage>,
}

impl Dataset {
    pub fn new(class_map: ClassMap, items: Vec<LabeledImage>) -> Result<Self, PrepError> {
        let ds = Self { class_map, items };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<(), PrepError> {
        for item in &self.items {
            if item.width == 0 || item.height == 0 {
                return Err(PrepError::InvalidItem(format!("{} has zero size", item.name)));
            }
            if let Some(b) = item.boxes.iter().find(|b| !self.class_map.contains_id(b.class_id())) {
                return Err(PrepError::InvalidItem(format!(
                    "{} has class {} outside the {}-class map",
                    item.name,
                    b.class_id(),
                    self.class_map.len()
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn box_count(&self) -> usize {
        self.items.iter().map(|i| i.boxes.len()).sum()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PrepError + '_ {
    move |source| PrepError::Io { path: path.to_path_buf(), source }
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Reads an `images/` + `labels/` directory pair. Images without a label
/// file are treated as background (no boxes). Items are sorted by file name.
pub fn read_split_dir(root: &Path, class_map: &ClassMap) -> Result<Dataset, PrepError> {
    let images_dir = root.join("images");
    let labels_dir = root.join("labels");
    if !images_dir.is_dir() {
        return Err(PrepError::MissingLayout(images_dir));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(&images_dir)
        .map_err(io_err(&images_dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_image(p))
        .collect();
    paths.sort();

    let mut items = Vec::with_capacity(paths.len());
    for path in paths {
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let ext = path.extension().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let (width, height) =
            image::image_dimensions(&path).map_err(|source| PrepError::Image { path: path.clone(), source })?;
        let label_path = labels_dir.join(format!("{name}.txt"));
        let boxes = if label_path.is_file() {
            let text = fs::read_to_string(&label_path).map_err(io_err(&label_path))?;
            parse_label_file(&text, class_map.len())
                .map_err(|source| PrepError::Label { path: label_path.clone(), source })?
        } else {
            Vec::new()
        };
        items.push(LabeledImage { name, ext, image: ImageRef::File(path), width, height, boxes });
    }
    Dataset::new(class_map.clone(), items)
}

/// Writes `images/` and `labels/` under `root`. File-backed images whose
/// size is unchanged are copied byte for byte; in-memory images are encoded
/// according to their extension.
pub fn write_split_dir(ds: &Dataset, root: &Path) -> Result<(), PrepError> {
    let images_dir = root.join("images");
    let labels_dir = root.join("labels");
    fs::create_dir_all(&images_dir).map_err(io_err(&images_dir))?;
    fs::create_dir_all(&labels_dir).map_err(io_err(&labels_dir))?;
    for item in &ds.items {
        let dest = images_dir.join(item.file_name());
        match &item.image {
            ImageRef::File(src) => {
                fs::copy(src, &dest).map_err(io_err(src))?;
            }
            ImageRef::Memory(px) => {
                px.save(&dest).map_err(|source| PrepError::Image { path: dest.clone(), source })?;
            }
        }
        let label = labels_dir.join(format!("{}.txt", item.name));
        fs::write(&label, serialize_labels(&item.boxes)).map_err(io_err(&label))?;
    }
    Ok(())
}
