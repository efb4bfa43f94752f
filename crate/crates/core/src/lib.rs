pub mod classifier;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod experiments;
pub mod feature;
pub mod gaze_features;
pub mod label;
pub mod linguistic_features;
pub mod measure;
pub mod synthetic;
pub mod tagger;

pub use error::{Error, Result};
pub use label::Label;
