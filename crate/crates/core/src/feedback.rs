//! Simulated users. Each model turns the presented object into a feedback
//! object using the hidden utility (or noisy labels standing in for it).

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::tasks::item::{ItemContext, ItemTask};
use crate::tasks::ranking::{sort_by_scores, Ranking, RankingContext, RankingTask};
use crate::vector::{GroundTruthUtility, Task};

/// Number of documents a ranking user promotes to the top.
pub const PROMOTED: usize = 5;
/// Number of leading documents a noisy ranking user inspects.
pub const INSPECTED: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UserModelKind {
    StrictAlpha,
    NoisyRelevance,
    RatingIncrement,
    ExpectedAlpha,
}

impl UserModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            UserModelKind::StrictAlpha => "strict_alpha",
            UserModelKind::NoisyRelevance => "noisy_relevance",
            UserModelKind::RatingIncrement => "rating_increment",
            UserModelKind::ExpectedAlpha => "expected_alpha",
        }
    }
}

impl fmt::Display for UserModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UserModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict_alpha" => Ok(UserModelKind::StrictAlpha),
            "noisy_relevance" => Ok(UserModelKind::NoisyRelevance),
            "rating_increment" => Ok(UserModelKind::RatingIncrement),
            "expected_alpha" => Ok(UserModelKind::ExpectedAlpha),
            other => Err(Error::config(format!("unknown user model '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UserModelConfig {
    pub kind: UserModelKind,
    pub alpha: f64,
    /// Probability of giving strict feedback; used by `expected_alpha` only.
    pub improve_prob: f64,
}

impl UserModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.improve_prob) {
            return Err(Error::config(format!(
                "improve_prob must lie in [0, 1], got {}",
                self.improve_prob
            )));
        }
        Ok(())
    }
}

/// Whether `ȳ` meets the strict α-informative condition.
pub fn is_alpha_informative(alpha: f64, u_star: f64, u_y: f64, u_ybar: f64) -> bool {
    u_ybar - u_y >= alpha * (u_star - u_y)
}

/// Slack `ξ = max(0, α(U* - U(y)) - (U(ȳ) - U(y)))`.
pub fn compute_slack(alpha: f64, u_star: f64, u_y: f64, u_ybar: f64) -> f64 {
    (alpha * (u_star - u_y) - (u_ybar - u_y)).max(0.0)
}

/// Index of the candidate with the smallest utility that still satisfies
/// the strict α-informative condition; ties go to the lowest index.
pub fn min_improving_candidate(utilities: &[f64], u_y: f64, u_star: f64, alpha: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &u) in utilities.iter().enumerate() {
        if is_alpha_informative(alpha, u_star, u_y, u) && best.is_none_or(|(_, b)| u < b) {
            best = Some((i, u));
        }
    }
    best.map(|(i, _)| i)
}

/// Tasks that can simulate a strictly α-informative user.
pub trait StrictAlphaFeedback: Task {
    fn strict_alpha_feedback(
        &self,
        alpha: f64,
        truth: &GroundTruthUtility,
        ctx: &Self::Context,
        y: &Self::Object,
    ) -> Result<Self::Object>;
}

/// `y` with the given documents moved to the top, in the order given, and the
/// remaining documents keeping their relative order.
fn promote(y: &Ranking, promoted: &[usize]) -> Ranking {
    let mut out = Vec::with_capacity(y.len());
    out.extend_from_slice(promoted);
    out.extend(y.0.iter().copied().filter(|d| !promoted.contains(d)));
    Ranking(out)
}

impl StrictAlphaFeedback for RankingTask {
    /// Walks down the presented list; after each inspected document the user
    /// tries placing the (at most five) best documents seen so far on top,
    /// ordered by true score, and stops at the first such ranking that is
    /// strictly α-informative. If none qualifies the optimal ranking is
    /// returned.
    fn strict_alpha_feedback(
        &self,
        alpha: f64,
        truth: &GroundTruthUtility,
        ctx: &RankingContext,
        y: &Ranking,
    ) -> Result<Ranking> {
        let y_star = truth.best(self, ctx)?;
        let u_star = truth.utility(self, ctx, &y_star)?;
        let u_y = truth.utility(self, ctx, y)?;
        let scores = self.scores(truth.weights(), ctx)?;

        for seen in 1..=y.len() {
            let prefix = &y.0[..seen];
            let prefix_scores: Vec<f64> = prefix.iter().map(|&d| scores[d]).collect();
            let promoted: Vec<usize> = sort_by_scores(&prefix_scores)
                .into_iter()
                .take(PROMOTED)
                .map(|i| prefix[i])
                .collect();
            let candidate = promote(y, &promoted);
            let u = truth.utility(self, ctx, &candidate)?;
            if is_alpha_informative(alpha, u_star, u_y, u) {
                return Ok(candidate);
            }
        }
        Ok(y_star)
    }
}

impl StrictAlphaFeedback for ItemTask {
    /// The available item with the smallest utility that is still strictly
    /// α-informative relative to the best available item.
    fn strict_alpha_feedback(
        &self,
        alpha: f64,
        truth: &GroundTruthUtility,
        ctx: &ItemContext,
        y: &usize,
    ) -> Result<usize> {
        let y_star = truth.best(self, ctx)?;
        let u_star = truth.utility(self, ctx, &y_star)?;
        let u_y = truth.utility(self, ctx, y)?;
        let candidates: Vec<usize> = ctx.available_indices().collect();
        let utilities = candidates
            .iter()
            .map(|j| truth.utility(self, ctx, j))
            .collect::<Result<Vec<f64>>>()?;
        Ok(min_improving_candidate(&utilities, u_y, u_star, alpha)
            .map(|i| candidates[i])
            .unwrap_or(y_star))
    }
}

/// Two-point stochastic user: strict α feedback with probability
/// `improve_prob`, otherwise the presented object unchanged. The expected
/// gain is `improve_prob · α`-informative.
pub fn expected_alpha_feedback<T: StrictAlphaFeedback, R: Rng + ?Sized>(
    cfg: &UserModelConfig,
    truth: &GroundTruthUtility,
    task: &T,
    ctx: &T::Context,
    y: &T::Object,
    rng: &mut R,
) -> Result<T::Object> {
    if rng.gen_bool(cfg.improve_prob) {
        task.strict_alpha_feedback(cfg.alpha, truth, ctx, y)
    } else {
        Ok(y.clone())
    }
}

/// Inspects the first ten positions of `y` and moves the five most relevant
/// inspected documents to the top in descending relevance; ties keep their
/// presented order.
pub fn noisy_relevance_feedback(labels: &[u8], y: &Ranking) -> Result<Ranking> {
    if let Some(&bad) = y.0.iter().find(|&&d| d >= labels.len()) {
        return Err(Error::Inadmissible(format!("document {bad} has no relevance label")));
    }
    let mut inspected: Vec<usize> = y.0.iter().copied().take(INSPECTED).collect();
    inspected.sort_by_key(|&d| std::cmp::Reverse(labels[d]));
    inspected.truncate(PROMOTED);
    Ok(promote(y, &inspected))
}

/// Nearest allowed rating, halves away from zero, clamped to `1..=5`.
pub fn round_rating(score: f64) -> u8 {
    score.round().clamp(1.0, 5.0) as u8
}

/// The lowest-index available item rated exactly one above the presented
/// item, or the presented item itself when none exists or it is already
/// rated 5.
pub fn rating_increment_feedback(ratings: &[u8], ctx: &ItemContext, presented: usize) -> Result<usize> {
    let current = *ratings
        .get(presented)
        .ok_or_else(|| Error::Inadmissible(format!("item {presented} has no rating")))?;
    if current >= 5 {
        return Ok(presented);
    }
    Ok(ctx
        .available_indices()
        .find(|&j| ratings.get(j) == Some(&(current + 1)))
        .unwrap_or(presented))
}
