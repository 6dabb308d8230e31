//! Online learning from preference-improvement feedback.
//!
//! A learner presents the object maximizing its current linear utility; a
//! (simulated) user answers with an object of higher true utility; the
//! learner moves its weights toward the difference of the two joint feature
//! vectors. This crate provides the learners ([`learners`]), the tasks they
//! act on ([`tasks`]), user simulators ([`feedback`]), regret accounting and
//! bounds ([`metrics`]), and an experiment harness ([`experiment`]) that
//! writes CSV regret traces.

pub mod config;
pub mod error;
pub mod experiment;
pub mod feedback;
pub mod fit;
pub mod io;
pub mod learners;
pub mod metrics;
pub mod rng;
pub mod tasks;
pub mod vector;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use experiment::{run_experiment, simulate, SeedTrace};
pub use learners::{Learner, LearnerKind, LearnerState};
pub use vector::{dot, scale_add, utility, FeatureVector, GroundTruthUtility, Task};
