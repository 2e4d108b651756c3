use std::fs;
use std::path::Path;
use std::time::Duration;

use fieldlabel_core::annotation::{parse_label_file, ClassMap};
use fieldlabel_core::detect::{MockBackend, MockScript};
use fieldlabel_core::session::{
    live_source, parse_latency_csv, CommandEffect, Disposition, OperatorCommand, Outcome, Session, SessionConfig,
    SessionError, SourceSpec,
};
use image::{Rgb, RgbImage};

const INPUT: (u32, u32) = (16, 16);

fn write_frames(dir: &Path, n: usize) {
    fs::create_dir_all(dir).unwrap();
    for i in 0..n {
        let img = RgbImage::from_fn(12, 9, |x, y| Rgb([(x * 20) as u8, (y * 25) as u8, (i * 10) as u8]));
        img.save(dir.join(format!("img_{i:03}.png"))).unwrap();
    }
}

fn session(root: &Path, frames: usize, script: &str, classes: &[&str]) -> Session {
    let src = root.join("frames");
    write_frames(&src, frames);
    let map = ClassMap::new(classes.iter().copied()).unwrap();
    let script = MockScript::parse(script, map.len()).unwrap();
    let cfg = SessionConfig::new(SourceSpec::Directory(src), root.join("out"), map);
    Session::start(cfg, Box::new(MockBackend::new(script, INPUT))).unwrap()
}

const TWO_BOXES: &str = "* 0 | 0 0.3 0.3 0.2 0.2 0.9 | 1 0.7 0.7 0.2 0.2 0.8\n";
const TWO_PLANTS: &str = "* 0 | 0 0.3 0.3 0.2 0.2 0.9 | 0 0.7 0.7 0.2 0.2 0.8\n";

#[test]
fn directory_source_exposes_every_frame() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = session(tmp.path(), 10, "* 0\n", &["plant"]);
    assert_eq!(s.source_len(), Some(10));
    let mut ids = Vec::new();
    while let Some(rec) = s.process_next().unwrap() {
        assert_eq!(rec.outcome, Outcome::NonDetection);
        ids.push(rec.frame_id);
        s.apply_command(rec.frame_id, OperatorCommand::Skip).unwrap();
    }
    assert_eq!(ids, (0..10).collect::<Vec<u64>>());
    let dir = s.dir();
    assert!(dir.join("images").is_dir() && dir.join("labels").is_dir() && dir.join("manifest.json").is_file());
}

#[test]
fn missing_directory_is_a_source_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = SessionConfig::new(SourceSpec::Directory(tmp.path().join("nope")), tmp.path().join("out"), ClassMap::single("plant"));
    let script = MockScript::parse("* 0\n", 1).unwrap();
    let err = Session::start(cfg, Box::new(MockBackend::new(script, INPUT))).err().unwrap();
    assert!(matches!(err, SessionError::SourceUnavailable(_)));
}

#[test]
fn restart_gets_a_fresh_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let a = session(tmp.path(), 1, "* 0\n", &["plant"]);
    let b = session(tmp.path(), 1, "* 0\n", &["plant"]);
    assert_ne!(a.dir(), b.dir());
    assert_eq!(a.dir().parent(), b.dir().parent());
    assert!(a.dir().join("manifest.json").is_file() && b.dir().join("manifest.json").is_file());
}

#[test]
fn save_writes_parseable_labels_and_skip_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = session(tmp.path(), 2, TWO_PLANTS, &["plant"]);
    let rec = s.process_next().unwrap().unwrap();
    assert_eq!(rec.outcome, Outcome::Detection);
    assert_eq!(rec.detections.len(), 2);
    let CommandEffect::Saved { image, label } = s.apply_command(0, OperatorCommand::Save).unwrap() else {
        panic!("expected a save");
    };
    let boxes = parse_label_file(&fs::read_to_string(&label).unwrap(), 1).unwrap();
    assert_eq!(boxes.len(), 2);
    assert!(boxes.iter().all(|b| b.class_id() == 0), "single-class sessions write the active class");
    assert_eq!(image::open(&image).unwrap().to_rgb8().dimensions(), INPUT);

    s.process_next().unwrap().unwrap();
    s.apply_command(1, OperatorCommand::Skip).unwrap();
    assert!(!s.dir().join("images/frame_1.jpg").exists());
    assert!(!s.dir().join("labels/frame_1.txt").exists());
    assert_eq!(s.record(0).unwrap().disposition, Disposition::Saved);
    assert_eq!(s.record(1).unwrap().disposition, Disposition::Skipped);
}

#[test]
fn set_class_relabels_in_multi_class_session() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = session(tmp.path(), 1, TWO_BOXES, &["crop", "weed"]);
    s.process_next().unwrap();
    assert_eq!(s.apply_command(0, OperatorCommand::SetClass { class_id: 1 }).unwrap(), CommandEffect::ClassSet(1));
    assert!(matches!(s.apply_command(0, OperatorCommand::SetClass { class_id: 2 }), Err(SessionError::InvalidClass(2))));
    s.apply_command(0, OperatorCommand::Save).unwrap();
    let text = fs::read_to_string(s.dir().join("labels/frame_0.txt")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.starts_with("1 ")));
}

#[test]
fn multi_class_keeps_per_detection_classes() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = session(tmp.path(), 1, TWO_BOXES, &["crop", "weed"]);
    s.process_next().unwrap();
    s.apply_command(0, OperatorCommand::Save).unwrap();
    let boxes = parse_label_file(&fs::read_to_string(s.dir().join("labels/frame_0.txt")).unwrap(), 2).unwrap();
    let classes: Vec<u32> = boxes.iter().map(|b| b.class_id()).collect();
    assert_eq!(classes, vec![0, 1]);
}

#[test]
fn edits_apply_to_the_pending_frame() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = session(tmp.path(), 1, TWO_PLANTS, &["plant"]);
    s.process_next().unwrap();
    let adjust = OperatorCommand::AdjustBox { index: 1, cx: 0.5, cy: 0.5, w: 0.5, h: 0.25 };
    s.apply_command(0, adjust).unwrap();
    let bad = OperatorCommand::AdjustBox { index: 0, cx: 0.95, cy: 0.5, w: 0.5, h: 0.25 };
    assert!(matches!(s.apply_command(0, bad), Err(SessionError::InvalidBox(_))));
    assert!(matches!(
        s.apply_command(0, OperatorCommand::DeleteBox { index: 5 }),
        Err(SessionError::InvalidBoxIndex { index: 5, len: 2 })
    ));
    s.apply_command(0, OperatorCommand::DeleteBox { index: 0 }).unwrap();
    s.apply_command(0, OperatorCommand::Save).unwrap();
    let text = fs::read_to_string(s.dir().join("labels/frame_0.txt")).unwrap();
    assert_eq!(text, "0 0.500000 0.500000 0.500000 0.250000\n");
    // The record keeps what the detector produced.
    assert_eq!(s.record(0).unwrap().detections.len(), 2);
}

#[test]
fn stale_and_pending_frames_are_guarded() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = session(tmp.path(), 3, TWO_PLANTS, &["plant"]);
    assert!(matches!(
        s.apply_command(0, OperatorCommand::Save),
        Err(SessionError::StaleFrame { requested: 0, pending: None })
    ));
    s.process_next().unwrap();
    assert!(matches!(s.process_next(), Err(SessionError::PendingFrame(0))));
    s.apply_command(0, OperatorCommand::Skip).unwrap();
    s.process_next().unwrap();
    assert!(matches!(
        s.apply_command(0, OperatorCommand::Save),
        Err(SessionError::StaleFrame { requested: 0, pending: Some(1) })
    ));
    assert!(!s.dir().join("labels/frame_0.txt").exists() && !s.dir().join("labels/frame_1.txt").exists());
}

#[test]
fn injected_delay_is_measured() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = session(tmp.path(), 1, "* 50\n", &["plant"]);
    let rec = s.process_next().unwrap().unwrap();
    assert!((50.0..=70.0).contains(&rec.inference_latency_ms), "{}", rec.inference_latency_ms);
}

#[test]
fn timeouts_are_recorded_as_errors_and_excluded() {
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("frames");
    write_frames(&src, 4);
    let map = ClassMap::single("plant");
    let script = MockScript::parse("1 80\n3 80 | 0 0.5 0.5 0.2 0.2 0.9\n* 1 | 0 0.5 0.5 0.2 0.2 0.9\n", 1).unwrap();
    let mut cfg = SessionConfig::new(SourceSpec::Directory(src), tmp.path().join("out"), map);
    cfg.detector.deadline = Some(Duration::from_millis(30));
    cfg.auto_save = true;
    let mut s = Session::start(cfg, Box::new(MockBackend::new(script, INPUT))).unwrap();
    let mut outcomes = Vec::new();
    while let Some(rec) = s.process_next().unwrap() {
        outcomes.push(rec.outcome);
    }
    assert_eq!(outcomes, vec![Outcome::Detection, Outcome::Error, Outcome::Detection, Outcome::Error]);
    let stats = s.stats();
    assert_eq!(stats.error_frames, 2);
    assert_eq!(stats.detection_frames + stats.non_detection_frames + stats.error_frames, stats.frames_processed);
    assert_eq!(stats.latency.count, 2);
    assert!(stats.latency.max_ms < 30.0);
    assert_eq!(stats.frames_saved, 2);
    assert!(s.dir().join("labels/frame_2.txt").exists() && !s.dir().join("images/frame_1.jpg").exists());
}

#[test]
fn stop_is_idempotent_and_writes_one_row_per_frame() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = session(tmp.path(), 5, "0 0 | 0 0.5 0.5 0.2 0.2 0.9\n* 0\n", &["plant"]);
    while let Some(rec) = s.process_next().unwrap() {
        s.apply_command(rec.frame_id, OperatorCommand::Skip).unwrap();
    }
    let first = s.stop().unwrap();
    let text = fs::read_to_string(&first).unwrap();
    fs::write(&first, "tampered").unwrap();
    let second = s.stop().unwrap();
    assert_eq!(first, second);
    assert_eq!(fs::read_to_string(&second).unwrap(), "tampered", "second stop must not rewrite");
    let rows = parse_latency_csv(&text).unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0].outcome, Outcome::Detection);
    assert!(matches!(s.process_next(), Err(SessionError::Stopped)));
    assert!(s.dir().join("stats.json").is_file());
}

#[test]
fn quit_stops_the_session() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = session(tmp.path(), 2, "* 0\n", &["plant"]);
    s.process_next().unwrap();
    let effect = s.apply_command(99, OperatorCommand::Quit).unwrap();
    assert!(matches!(effect, CommandEffect::Stopped { ref report } if report.ends_with("session.csv")));
    assert!(!s.is_running());
    assert_eq!(s.stats().frames_pending, 1);
}

#[test]
fn empty_session_reports_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = session(tmp.path(), 0, "* 0\n", &["plant"]);
    assert!(s.process_next().unwrap().is_none());
    let r = s.report();
    assert_eq!(r.stats.frames_processed, 0);
    assert_eq!(r.stats.latency.mean_ms, 0.0);
    assert_eq!(r.csv(), "frame_id,outcome,latency_ms,disposition\n");
}

#[test]
fn live_source_session() {
    let tmp = tempfile::tempdir().unwrap();
    let (feed, source) = live_source();
    let cfg = SessionConfig::new(SourceSpec::Live, tmp.path().join("out"), ClassMap::single("plant"));
    let script = MockScript::parse("* 0 | 0 0.5 0.5 0.2 0.2 0.9\n", 1).unwrap();
    let mut s = Session::start_with_source(cfg, Box::new(source), Box::new(MockBackend::new(script, INPUT))).unwrap();
    for v in [10u8, 20, 30] {
        feed.push(RgbImage::from_pixel(4, 4, Rgb([v, v, v])));
    }
    feed.close();
    let rec = s.process_next().unwrap().unwrap();
    assert_eq!(rec.source_name, "live_3");
    assert_eq!(feed.dropped(), 2);
    s.apply_command(rec.frame_id, OperatorCommand::Save).unwrap();
    assert!(s.process_next().unwrap().is_none());
}
