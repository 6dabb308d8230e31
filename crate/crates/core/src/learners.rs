//! Online learners driven by preference-improvement feedback.
//!
//! All three variants share one round interface: [`Learner::present`] picks
//! the object maximizing the current linear score, and
//! [`Learner::observe`] consumes the feature vectors of the feedback and of
//! the presented object. Utilities and the hidden parameter never reach a
//! learner.

use crate::error::{Error, Result};
use crate::vector::{scale_add, FeatureVector, Task};

/// Weight vector and round counter.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerState {
    pub w: FeatureVector,
    /// 1-based index of the round about to be played.
    pub t: usize,
    /// Rounds on which the weight vector actually changed.
    pub update_count: usize,
}

impl LearnerState {
    pub fn new(dim: usize) -> Self {
        LearnerState {
            w: FeatureVector::zeros(dim),
            t: 1,
            update_count: 0,
        }
    }

    fn advance(&self, w: FeatureVector) -> LearnerState {
        let changed = w != self.w;
        LearnerState {
            w,
            t: self.t + 1,
            update_count: self.update_count + usize::from(changed),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchConfig {
    pub k: usize,
}

impl BatchConfig {
    pub fn new(k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::config("batch period k must be at least 1"));
        }
        Ok(BatchConfig { k })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexLearnerConfig {
    /// Bound on the magnitude of the loss subderivatives.
    pub g: f64,
    /// Radius of the Euclidean ball the weights are projected onto.
    pub rho: f64,
}

impl ConvexLearnerConfig {
    pub fn new(g: f64, rho: f64) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::config(format!("G must be positive, got {g}")));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::config(format!("rho must be positive, got {rho}")));
        }
        Ok(ConvexLearnerConfig { g, rho })
    }

    /// Diameter of the projection set.
    pub fn diameter(&self) -> f64 {
        2.0 * self.rho
    }
}

impl Default for ConvexLearnerConfig {
    fn default() -> Self {
        ConvexLearnerConfig { g: 1.0, rho: 1.0 }
    }
}

/// `w_{t+1} = w_t + φ(x_t, ȳ_t) - φ(x_t, y_t)`.
pub fn perceptron_update(
    state: &LearnerState,
    phi_bar: &FeatureVector,
    phi: &FeatureVector,
) -> Result<LearnerState> {
    let w = state.w.add(&phi_bar.sub(phi)?)?;
    Ok(state.advance(w))
}

/// Euclidean projection onto the ball of radius `rho` centred at the origin.
pub fn project_ball(u: &FeatureVector, rho: f64) -> Result<FeatureVector> {
    let norm = u.norm();
    if norm <= rho {
        return Ok(u.clone());
    }
    u.scaled(rho / norm)
}

/// One round of the convex variant: a `G/√t` step along the feedback
/// direction followed by projection onto the ball.
pub fn convex_step(
    state: &LearnerState,
    config: &ConvexLearnerConfig,
    phi_bar: &FeatureVector,
    phi: &FeatureVector,
) -> Result<LearnerState> {
    let eta = 1.0 / (state.t as f64).sqrt();
    let w_bar = scale_add(&state.w, eta * config.g, &phi_bar.sub(phi)?)?;
    let w = project_ball(&w_bar, config.rho)?;
    Ok(state.advance(w))
}

/// Perceptron that buffers its per-round differences and applies their sum
/// every `k` rounds, presenting with the last applied weights in between.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchState {
    pub learner: LearnerState,
    pending: FeatureVector,
}

impl BatchState {
    pub fn new(dim: usize) -> Self {
        BatchState {
            learner: LearnerState::new(dim),
            pending: FeatureVector::zeros(dim),
        }
    }

    pub fn pending(&self) -> &FeatureVector {
        &self.pending
    }
}

/// Buffers `φ(ȳ) - φ(y)` and flushes the buffer into the weights on rounds
/// `t ≡ 0 (mod k)`.
pub fn batch_update(
    state: &BatchState,
    config: &BatchConfig,
    phi_bar: &FeatureVector,
    phi: &FeatureVector,
) -> Result<BatchState> {
    if config.k < 1 {
        return Err(Error::config("batch period k must be at least 1"));
    }
    let pending = state.pending.add(&phi_bar.sub(phi)?)?;
    let t = state.learner.t;
    if t.is_multiple_of(config.k) {
        let w = state.learner.w.add(&pending)?;
        Ok(BatchState {
            learner: state.learner.advance(w),
            pending: FeatureVector::zeros(pending.dim()),
        })
    } else {
        let w = state.learner.w.clone();
        Ok(BatchState {
            learner: state.learner.advance(w),
            pending,
        })
    }
}

/// Which learner to run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LearnerKind {
    Perceptron,
    Batch(BatchConfig),
    Convex(ConvexLearnerConfig),
}

impl LearnerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerKind::Perceptron => "perceptron",
            LearnerKind::Batch(_) => "batch",
            LearnerKind::Convex(_) => "convex",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Learner {
    Perceptron(LearnerState),
    Batch(BatchState, BatchConfig),
    Convex(LearnerState, ConvexLearnerConfig),
}

impl Learner {
    pub fn new(kind: LearnerKind, dim: usize) -> Self {
        match kind {
            LearnerKind::Perceptron => Learner::Perceptron(LearnerState::new(dim)),
            LearnerKind::Batch(cfg) => Learner::Batch(BatchState::new(dim), cfg),
            LearnerKind::Convex(cfg) => Learner::Convex(LearnerState::new(dim), cfg),
        }
    }

    pub fn state(&self) -> &LearnerState {
        match self {
            Learner::Perceptron(s) | Learner::Convex(s, _) => s,
            Learner::Batch(b, _) => &b.learner,
        }
    }

    pub fn weights(&self) -> &FeatureVector {
        &self.state().w
    }

    pub fn present<T: Task>(&self, task: &T, ctx: &T::Context) -> Result<T::Object> {
        task.argmax(self.weights(), ctx)
    }

    pub fn observe(&mut self, phi_bar: &FeatureVector, phi: &FeatureVector) -> Result<()> {
        match self {
            Learner::Perceptron(s) => *s = perceptron_update(s, phi_bar, phi)?,
            Learner::Batch(b, cfg) => *b = batch_update(b, cfg, phi_bar, phi)?,
            Learner::Convex(s, cfg) => *s = convex_step(s, cfg, phi_bar, phi)?,
        }
        Ok(())
    }
}
