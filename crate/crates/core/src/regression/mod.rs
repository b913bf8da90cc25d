//! Cross-sectional conditional-expectation estimators.

mod inflation;
mod least_squares;
mod loess;

pub use inflation::{expected_inflation, InflationEstimator, InflationFit, DEFAULT_LEVEL_FLOOR};
pub use least_squares::{regress_now, BasisFn, BasisSpec, LinearFit};
pub use loess::{fit_surfaces, tricube_weight, LoessModel, LoessSurface};
