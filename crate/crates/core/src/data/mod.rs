//! Canonical data types, file ingestion, bias augmentation, grouped
//! splitting and reader subset selection.

mod io;
mod split;
mod subset;
mod table;

pub use io::{load_feature_table, load_label_table, write_feature_table, write_label_table};
pub(crate) use io::{create, csv_reader, write_provenance};
pub use split::{grouped_kfold, grouped_split, subsample_women, DatasetSplit, Fold};
pub use subset::{select_subset, LabelMode, SubsetKind, SubsetSelection, SubsetSpec, DEFAULT_MIN_IMAGES};
pub use table::{FeatureTable, ImageRecord, LabelEntry, LabelTable, Side, View};
