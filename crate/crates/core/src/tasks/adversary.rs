//! The adversarial construction that forces `Ω(1/√T)` average regret on any
//! coactive learner.
//!
//! Contexts are the basis vectors `e_1..e_T`, objects are `±1` and
//! `φ(e_t, y) = y·e_t`. The user always answers with the opposite sign, and
//! once the horizon is reached the hidden parameter is fixed to
//! `w_* = -(y_1, ..., y_T)/√T`, making every feedback the optimum and every
//! round cost exactly `2/√T`.

use crate::error::{Error, Result};
use crate::vector::{FeatureVector, GroundTruthUtility, Task};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    /// Canonical order used for tie-breaking.
    pub const ALL: [Sign; 2] = [Sign::Minus, Sign::Plus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AdversaryTask {
    horizon: usize,
}

impl AdversaryTask {
    pub fn new(horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::config("adversary horizon must be at least 1"));
        }
        Ok(AdversaryTask { horizon })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

impl Task for AdversaryTask {
    /// 0-based round index `t`, standing for the context `e_{t+1}`.
    type Context = usize;
    type Object = Sign;

    fn dimension(&self) -> usize {
        self.horizon
    }

    fn norm_bound(&self) -> f64 {
        1.0
    }

    fn features(&self, ctx: &usize, y: &Sign) -> Result<FeatureVector> {
        if *ctx >= self.horizon {
            return Err(Error::Inadmissible(format!("context e_{} beyond horizon {}", ctx + 1, self.horizon)));
        }
        let mut phi = FeatureVector::basis(self.horizon, *ctx);
        if *y == Sign::Minus {
            phi = phi.scaled(-1.0)?;
        }
        Ok(phi)
    }

    fn argmax(&self, w: &FeatureVector, ctx: &usize) -> Result<Sign> {
        if w.dim() != self.horizon {
            return Err(Error::DimensionMismatch {
                left: w.dim(),
                right: self.horizon,
            });
        }
        if *ctx >= self.horizon {
            return Err(Error::Inadmissible(format!("context e_{} beyond horizon {}", ctx + 1, self.horizon)));
        }
        // y·w_t is maximized by the sign of w_t; zero ties go to Minus.
        Ok(if w[*ctx] > 0.0 { Sign::Plus } else { Sign::Minus })
    }
}

/// Records the learner's outputs and answers each with its negation.
#[derive(Clone, Debug)]
pub struct AdversaryState {
    horizon: usize,
    outputs: Vec<Sign>,
}

impl AdversaryState {
    pub fn new(horizon: usize) -> Self {
        AdversaryState {
            horizon,
            outputs: Vec::with_capacity(horizon),
        }
    }

    pub fn rounds_played(&self) -> usize {
        self.outputs.len()
    }

    /// Feedback `-y_t` for the learner's output `y_t`.
    pub fn next(&mut self, learner_output: Sign) -> Result<Sign> {
        if self.outputs.len() >= self.horizon {
            return Err(Error::HorizonExceeded {
                horizon: self.horizon,
            });
        }
        self.outputs.push(learner_output);
        Ok(learner_output.flip())
    }

    /// `w_* = [-y_1/√T, ..., -y_T/√T]`, available once all `T` rounds are in.
    pub fn w_star(&self) -> Result<GroundTruthUtility> {
        if self.outputs.len() != self.horizon {
            return Err(Error::config(format!(
                "adversary finalized after {} of {} rounds",
                self.outputs.len(),
                self.horizon
            )));
        }
        let scale = 1.0 / (self.horizon as f64).sqrt();
        let w = self.outputs.iter().map(|y| -y.value() * scale).collect();
        Ok(GroundTruthUtility::new(FeatureVector::new(w)?))
    }
}
