pub mod cli;
pub mod csvio;
pub mod error;
pub mod excursion_laws;
pub mod levy_model;
pub mod mc_oracle;
pub mod scale_fn;
pub mod special_fns;

pub use error::{Error, Result};
pub use levy_model::LevyModel;
