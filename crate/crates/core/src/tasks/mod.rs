//! Concrete prediction tasks: each supplies contexts, admissible objects, a
//! joint feature map and its maximizer.

pub mod adversary;
pub mod item;
pub mod ranking;
pub mod synth;

pub use adversary::{AdversaryState, AdversaryTask, Sign};
pub use item::{ItemContext, ItemTask};
pub use ranking::{Ranking, RankingContext, RankingTask};
