//! Dataset and checkpoint files, splits and synthetic graphs.

pub mod checkpoint;
pub mod format;
pub mod splits;
pub mod synthetic;

pub use checkpoint::{format_checkpoint, load_checkpoint_into, parse_checkpoint, read_checkpoint, save_checkpoint};
pub use format::{format_graph, load_graph, parse_graph, save_graph};
pub use splits::{make_splits, random_splits};
pub use synthetic::{gen_planted_partition, MultiLabelPartition};
