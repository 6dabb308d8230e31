//! Readers for ranking and ratings data files.

pub mod ratings;
pub mod svmlight;

pub use ratings::{parse_ratings, RatingsTriple};
pub use svmlight::{parse_svmlight_bytes, parse_svmlight_ranking};
