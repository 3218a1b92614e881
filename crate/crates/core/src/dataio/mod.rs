//! Tabular data: schemas, loading, normalization, splitting, and fair
//! augmentation into similar sub-populations.

mod augment;
mod ctrip;
mod dataset;
mod load;
mod normalize;
mod prepared;
mod schema;
mod split;

pub use augment::{
    augment, enumerate_subpopulation, AugmentMode, AugmentationStrategy, SubPopulation,
};
pub use ctrip::{
    ctrip_schema, synth_ctrip, synth_ctrip_with_noise, DEFAULT_HABIT_NOISE, HOTEL_COLUMNS,
};
pub use dataset::{Dataset, Label, Record};
pub use load::{load_dataset, parse_dataset};
pub use normalize::{normalize, MinMaxScaler};
pub use prepared::{read_dataset, write_augmented, write_dataset};
pub use schema::{ColumnKind, ColumnRole, ColumnSpec, LabelArity, SchemaConfig, SensitiveDomain};
pub use split::{permutation, split};
