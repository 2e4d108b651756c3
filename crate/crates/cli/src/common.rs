use std::fs;
use std::path::{Path, PathBuf};

use fieldlabel_core::annotation::{load_dataset_config, ClassMap};
use thiserror::Error;

/// Exit code 1 for bad input, 2 for failures while doing the work.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

pub fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

pub fn require_dir(path: &Path, what: &str) -> CliResult<()> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(invalid(format!("{what} {} is not a directory", path.display())))
    }
}

pub fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(invalid(format!("{what} {} is not a file", path.display())))
    }
}

/// An output path must not be an existing file (for directories) or an
/// existing directory (for files).
pub fn require_output_dir(path: &Path) -> CliResult<()> {
    if path.exists() && !path.is_dir() {
        return Err(invalid(format!("output {} exists and is not a directory", path.display())));
    }
    Ok(())
}

pub fn require_output_file(path: &Path) -> CliResult<()> {
    if path.is_dir() {
        return Err(invalid(format!("output {} is a directory", path.display())));
    }
    Ok(())
}

pub fn write(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| runtime(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

/// `640x480` or `640` for a square.
pub fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let parse = |t: &str| t.trim().parse::<u32>().ok().filter(|v| *v > 0);
    let size = match s.split_once(['x', 'X']) {
        Some((w, h)) => parse(w).zip(parse(h)),
        None => parse(s).map(|v| (v, v)),
    };
    size.ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))
}

/// Class names from `--classes`, `--names`, or the first `data.yaml`
/// found in `search`.
pub fn resolve_class_map(classes: Option<&str>, names: Option<&Path>, search: &[PathBuf]) -> CliResult<Option<ClassMap>> {
    if let Some(list) = classes {
        let names: Vec<&str> = list.split(',').map(str::trim).collect();
        return ClassMap::new(names).map(Some).map_err(|e| invalid(format!("--classes: {e}")));
    }
    let from_yaml = |path: &Path| -> CliResult<ClassMap> {
        let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        load_dataset_config(&text).map(|c| c.class_map).map_err(|e| invalid(format!("{}: {e}", path.display())))
    };
    if let Some(path) = names {
        require_file(path, "--names")?;
        return from_yaml(path).map(Some);
    }
    for dir in search {
        let candidate = dir.join("data.yaml");
        if candidate.is_file() {
            log::info!("class names from {}", candidate.display());
            return from_yaml(&candidate).map(Some);
        }
    }
    Ok(None)
}
