//! YOLO label files, the dataset descriptor and the box/class types shared
//! by every other module.

mod boxes;
mod descriptor;
mod label_file;

pub use boxes::{Axis, BoxError, ClassMap, ClassMapError, NormalizedBox, EDGE_TOLERANCE};
pub use descriptor::{load_dataset_config, DatasetConfig, DescriptorError};
pub use label_file::{parse_label_file, serialize_labels, LabelError, LabelErrorKind};

pub(crate) use label_file::{parse_box_fields, parse_number, records, write_box};
