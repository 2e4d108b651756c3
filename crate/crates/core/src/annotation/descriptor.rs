//! The `data.yaml` dataset descriptor used by YOLO training layouts.

use std::collections::BTreeMap;

use serde::Deserialize;
use thiserror::Error;

use super::boxes::{ClassMap, ClassMapError};

#[derive(Debug, Error)]
pub enum DescriptorError {
    #[error("descriptor is not valid YAML: {0}")]
    Syntax(#[from] serde_yaml::Error),
    #[error("descriptor is missing key `{0}`")]
    MissingKey(&'static str),
    #[error("`names` map keys must be 0..{0} without gaps")]
    SparseNames(usize),
    #[error("`nc` is {nc} but `names` lists {names} classes")]
    CountMismatch { nc: usize, names: usize },
    #[error(transparent)]
    Classes(#[from] ClassMapError),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Names {
    List(Vec<String>),
    Map(BTreeMap<usize, String>),
}

#[derive(Deserialize)]
struct RawDescriptor {
    path: Option<String>,
    train: Option<String>,
    val: Option<String>,
    test: Option<String>,
    nc: Option<usize>,
    names: Option<Names>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetConfig {
    pub root: Option<String>,
    pub class_map: ClassMap,
    pub train: String,
    pub val: String,
    pub test: String,
}

pub fn load_dataset_config(text: &str) -> Result<DatasetConfig, DescriptorError> {
    let raw: RawDescriptor = serde_yaml::from_str(text)?;
    let names = match raw.names.ok_or(DescriptorError::MissingKey("names"))? {
        Names::List(v) => v,
        Names::Map(m) => {
            if m.keys().copied().ne(0..m.len()) {
                return Err(DescriptorError::SparseNames(m.len()));
            }
            m.into_values().collect()
        }
    };
    if let Some(nc) = raw.nc {
        if nc != names.len() {
            return Err(DescriptorError::CountMismatch { nc, names: names.len() });
        }
    }
    Ok(DatasetConfig {
        root: raw.path,
        class_map: ClassMap::new(names)?,
        train: raw.train.ok_or(DescriptorError::MissingKey("train"))?,
        val: raw.val.ok_or(DescriptorError::MissingKey("val"))?,
        test: raw.test.ok_or(DescriptorError::MissingKey("test"))?,
    })
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

impl DatasetConfig {
    /// Standard layout: `<split>/images` relative to the descriptor.
    pub fn standard(class_map: ClassMap) -> Self {
        Self {
            root: None,
            class_map,
            train: "train/images".into(),
            val: "val/images".into(),
            test: "test/images".into(),
        }
    }

    pub fn to_yaml(&self) -> String {
        let mut out = String::new();
        if let Some(root) = &self.root {
            out.push_str(&format!("path: {}\n", quote(root)));
        }
        out.push_str(&format!("train: {}\n", quote(&self.train)));
        out.push_str(&format!("val: {}\n", quote(&self.val)));
        out.push_str(&format!("test: {}\n", quote(&self.test)));
        out.push_str(&format!("nc: {}\n", self.class_map.len()));
        let names: Vec<String> = self.class_map.names().iter().map(|n| quote(n)).collect();
        out.push_str(&format!("names: [{}]\n", names.join(", ")));
        out
    }
}
