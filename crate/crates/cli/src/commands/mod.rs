pub mod annotate;
pub mod augment;
pub mod compare;
pub mod evaluate;
pub mod prep;
pub mod report;
