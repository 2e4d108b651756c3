//! Crash-safe frame persistence.
//!
//! A save writes the label to a hidden temp file, writes the image to a
//! hidden temp file, renames the image into place and only then renames the
//! label. An interrupted save can therefore leave a final image whose label
//! is still a temp file (or missing), never a final label without its
//! image. [`recover_session_dir`] resolves those leftovers.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use image::RgbImage;

use super::SessionError;

pub const IMAGES_DIR: &str = "images";
pub const LABELS_DIR: &str = "labels";
const TEMP_SUFFIX: &str = ".tmp";

/// Steps of a save at which a test can simulate a crash.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultPoint {
    AfterLabelTemp,
    AfterImageTemp,
    AfterImageRename,
}

impl FaultPoint {
    pub const ALL: [FaultPoint; 3] = [FaultPoint::AfterLabelTemp, FaultPoint::AfterImageTemp, FaultPoint::AfterImageRename];
}

pub fn frame_stem(frame_id: u64) -> String {
    format!("frame_{frame_id}")
}

fn temp_path(dir: &Path, file: &str) -> PathBuf {
    dir.join(format!(".{file}{TEMP_SUFFIX}"))
}

fn write_synced(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    f.sync_all()
}

pub(crate) fn encode_jpeg(image: &RgbImage) -> Result<Vec<u8>, SessionError> {
    let mut bytes = Vec::new();
    image::codecs::jpeg::JpegEncoder::new_with_quality(&mut bytes, 95)
        .encode_image(image)
        .map_err(|e| SessionError::Persist(e.to_string()))?;
    Ok(bytes)
}

/// Writes `frame_<id>.jpg` and `frame_<id>.txt` under `session_dir`.
pub(crate) fn save_frame(
    session_dir: &Path,
    frame_id: u64,
    jpeg: &[u8],
    label_text: &str,
    fault: Option<FaultPoint>,
) -> Result<(PathBuf, PathBuf), SessionError> {
    let stem = frame_stem(frame_id);
    let (images, labels) = (session_dir.join(IMAGES_DIR), session_dir.join(LABELS_DIR));
    let (image_name, label_name) = (format!("{stem}.jpg"), format!("{stem}.txt"));
    let (image_tmp, label_tmp) = (temp_path(&images, &image_name), temp_path(&labels, &label_name));
    let (image_final, label_final) = (images.join(&image_name), labels.join(&label_name));
    let check = |point| if fault == Some(point) { Err(SessionError::InjectedFault(point)) } else { Ok(()) };

    write_synced(&label_tmp, label_text.as_bytes())?;
    check(FaultPoint::AfterLabelTemp)?;
    write_synced(&image_tmp, jpeg)?;
    check(FaultPoint::AfterImageTemp)?;
    fs::rename(&image_tmp, &image_final)?;
    check(FaultPoint::AfterImageRename)?;
    fs::rename(&label_tmp, &label_final)?;
    Ok((image_final, label_final))
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct RecoveryReport {
    /// Saves finished by moving a complete label temp file into place.
    pub completed: Vec<String>,
    /// Images removed because their label was never written.
    pub removed_images: Vec<String>,
    /// Labels removed because their image is missing.
    pub removed_labels: Vec<String>,
    pub removed_temp_files: usize,
}

fn stems_with_ext(dir: &Path, ext: &str) -> io::Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with('.') || path.extension().and_then(|e| e.to_str()) != Some(ext) {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            out.push((stem.to_string(), path.clone()));
        }
    }
    out.sort();
    Ok(out)
}

/// Restores the image/label pairing invariant after a crash.
///
/// Every final image ends up with a final label (rolled forward from its
/// temp file when one survived) or is deleted; orphan labels and all
/// remaining temp files are removed.
pub fn recover_session_dir(session_dir: &Path) -> Result<RecoveryReport, SessionError> {
    let (images, labels) = (session_dir.join(IMAGES_DIR), session_dir.join(LABELS_DIR));
    let mut report = RecoveryReport::default();
    for (stem, image_path) in stems_with_ext(&images, "jpg")? {
        let label_name = format!("{stem}.txt");
        if labels.join(&label_name).exists() {
            continue;
        }
        let tmp = temp_path(&labels, &label_name);
        if tmp.exists() {
            fs::rename(&tmp, labels.join(&label_name))?;
            report.completed.push(stem);
        } else {
            fs::remove_file(&image_path)?;
            report.removed_images.push(stem);
        }
    }
    for (stem, label_path) in stems_with_ext(&labels, "txt")? {
        if !images.join(format!("{stem}.jpg")).exists() {
            fs::remove_file(&label_path)?;
            report.removed_labels.push(stem);
        }
    }
    for dir in [&images, &labels] {
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
            if name.starts_with('.') && name.ends_with(TEMP_SUFFIX) {
                fs::remove_file(&path)?;
                report.removed_temp_files += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join(IMAGES_DIR)).unwrap();
        fs::create_dir(dir.path().join(LABELS_DIR)).unwrap();
        dir
    }

    #[test]
    fn clean_save() {
        let dir = layout();
        let (img, lbl) = save_frame(dir.path(), 3, b"jpeg", "0 0.5 0.5 0.1 0.1\n", None).unwrap();
        assert!(img.ends_with("images/frame_3.jpg") && lbl.ends_with("labels/frame_3.txt"));
        assert_eq!(fs::read_to_string(lbl).unwrap(), "0 0.5 0.5 0.1 0.1\n");
        assert_eq!(recover_session_dir(dir.path()).unwrap(), RecoveryReport::default());
    }

    #[test]
    fn each_fault_point_recovers_to_a_consistent_pair_state() {
        for point in FaultPoint::ALL {
            let dir = layout();
            let err = save_frame(dir.path(), 1, b"jpeg", "0 0.5 0.5 0.1 0.1\n", Some(point)).unwrap_err();
            assert!(matches!(err, SessionError::InjectedFault(p) if p == point));
            let report = recover_session_dir(dir.path()).unwrap();
            let image = dir.path().join("images/frame_1.jpg").exists();
            let label = dir.path().join("labels/frame_1.txt").exists();
            assert_eq!(image, label, "{point:?}");
            assert_eq!(image, point == FaultPoint::AfterImageRename, "{point:?}");
            assert_eq!(report.completed.len(), usize::from(image));
            let leftovers = fs::read_dir(dir.path().join("labels")).unwrap().count()
                + fs::read_dir(dir.path().join("images")).unwrap().count();
            assert_eq!(leftovers, 2 * usize::from(image));
        }
    }
}
