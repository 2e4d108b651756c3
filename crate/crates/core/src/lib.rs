//! Real-time, operator-in-the-loop annotation for YOLO-format datasets,
//! with the dataset preparation, evaluation and statistics tooling used to
//! judge the resulting labels.

pub mod annotation;
pub mod detect;
pub mod prep;
pub mod rng;
pub mod eval;
pub mod stats;
pub mod session;
