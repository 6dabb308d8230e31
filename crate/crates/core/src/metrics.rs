//! Regret accounting, the regret bounds the learners are checked against,
//! convex loss instances, and DCG.

use crate::error::{Error, Result};
use crate::feedback::compute_slack;
use crate::vector::{GroundTruthUtility, Task};

/// Instantaneous regret `U(x, y*) - U(x, y)`.
pub fn regret_step<T: Task>(
    truth: &GroundTruthUtility,
    task: &T,
    ctx: &T::Context,
    y: &T::Object,
) -> Result<f64> {
    let y_star = truth.best(task, ctx)?;
    Ok(truth.utility(task, ctx, &y_star)? - truth.utility(task, ctx, y)?)
}

/// Average-regret bound of the preference perceptron after `t` rounds:
/// `Σξ/(αT) + 2R‖w_*‖/(α√T)`.
pub fn theorem1_bound(alpha: f64, slack_sum: f64, r: f64, w_star_norm: f64, t: usize) -> f64 {
    batch_bound(alpha, slack_sum, r, w_star_norm, t, 1)
}

/// The same bound for updates applied every `k` rounds; the constant term
/// grows by `√k`.
pub fn batch_bound(alpha: f64, slack_sum: f64, r: f64, w_star_norm: f64, t: usize, k: usize) -> f64 {
    let t = t as f64;
    slack_sum / (alpha * t) + 2.0 * r * w_star_norm * (k as f64).sqrt() / (alpha * t.sqrt())
}

/// Expected-regret bound under expected α-informative feedback. Identical in
/// form to [`theorem1_bound`], taking expected slacks.
pub fn corollary1_bound(alpha: f64, expected_slack_sum: f64, r: f64, w_star_norm: f64, t: usize) -> f64 {
    theorem1_bound(alpha, expected_slack_sum, r, w_star_norm, t)
}

/// Average convex-loss bound of the projected variant:
///
/// `(1/T)Σc(0) + 2GΣξ/(αT) + (1/α)(|B|G/(2√T) + |B|G/T + 4R²G/√T)`.
pub fn theorem2_bound(
    alpha: f64,
    slack_sum: f64,
    g: f64,
    ball_diameter: f64,
    r: f64,
    t: usize,
    baseline_loss_sum: f64,
) -> f64 {
    let tf = t as f64;
    let sqrt_t = tf.sqrt();
    baseline_loss_sum / tf
        + 2.0 * g * slack_sum / (alpha * tf)
        + (ball_diameter * g / (2.0 * sqrt_t) + ball_diameter * g / tf + 4.0 * r * r * g / sqrt_t) / alpha
}

/// Non-increasing convex losses on the utility difference
/// `θ = U(y) - U(y*) ≤ 0`. The learner never evaluates these.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvexLoss {
    /// `max(0, -θ)`
    Hinge,
    /// `log(1 + e^{-θ})`
    Logistic,
}

impl ConvexLoss {
    pub const ALL: [ConvexLoss; 2] = [ConvexLoss::Hinge, ConvexLoss::Logistic];

    pub fn value(&self, theta: f64) -> f64 {
        match self {
            ConvexLoss::Hinge => (-theta).max(0.0),
            ConvexLoss::Logistic => {
                // log(1 + e^{-θ}) without overflow for very negative θ.
                let z = -theta;
                if z > 0.0 {
                    z + (-z).exp().ln_1p()
                } else {
                    z.exp().ln_1p()
                }
            }
        }
    }

    /// Bound on `|c'(θ)|`.
    pub fn subgradient_bound(&self) -> f64 {
        1.0
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConvexLoss::Hinge => "hinge",
            ConvexLoss::Logistic => "logistic",
        }
    }
}

/// Evaluation cutoff for DCG; the utility itself stops at five positions.
pub const DEFAULT_DCG_DEPTH: usize = 10;

/// `Σ_{i=1}^{min(k, len)} r(y_i) / log₂(i + 1)`.
pub fn dcg_at_k(relevances: &[f64], ranking: &[usize], k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::config("DCG cutoff k must be at least 1"));
    }
    let mut dcg = 0.0;
    for (i, &doc) in ranking.iter().take(k).enumerate() {
        let rel = relevances
            .get(doc)
            .ok_or_else(|| Error::Inadmissible(format!("document {doc} has no relevance")))?;
        dcg += rel / ((i + 2) as f64).log2();
    }
    Ok(dcg)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Which theoretical bound the trace reports in its `bound_theorem1` column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundKind {
    Perceptron,
    Batch { k: usize },
}

/// Average convex losses and their bounds for one round.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexColumns {
    pub loss_avg: Vec<f64>,
    pub bound: Vec<f64>,
}

/// One row of a regret trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub round: usize,
    pub regret_inst: f64,
    pub regret_avg: f64,
    pub bound_theorem1: f64,
    pub norm_w: f64,
    /// Cumulative slack `Σ_{τ≤t} ξ_τ(a)` for each grid value `a`.
    pub slack_sums: Vec<f64>,
    pub convex: Option<ConvexColumns>,
}

/// Utilities observed in one round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundUtilities {
    pub u_y: f64,
    pub u_ybar: f64,
    pub u_star: f64,
}

impl RoundUtilities {
    pub fn regret(&self) -> f64 {
        self.u_star - self.u_y
    }
}

/// Convex-loss settings for a trace of the projected learner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexTracking {
    pub ball_diameter: f64,
}

/// Running regret accounting for a single run.
#[derive(Clone, Debug)]
pub struct RegretTrace {
    alpha: f64,
    alpha_grid: Vec<f64>,
    norm_bound: f64,
    w_star_norm: f64,
    bound: BoundKind,
    convex: Option<ConvexTracking>,
    cumulative: f64,
    slack_sums: Vec<f64>,
    slack_at_alpha: f64,
    loss_sums: [f64; 2],
    rows: Vec<TraceRow>,
}

impl RegretTrace {
    pub fn new(
        alpha: f64,
        alpha_grid: Vec<f64>,
        norm_bound: f64,
        w_star_norm: f64,
        bound: BoundKind,
        convex: Option<ConvexTracking>,
    ) -> Self {
        let n = alpha_grid.len();
        RegretTrace {
            alpha,
            alpha_grid,
            norm_bound,
            w_star_norm,
            bound,
            convex,
            cumulative: 0.0,
            slack_sums: vec![0.0; n],
            slack_at_alpha: 0.0,
            loss_sums: [0.0; 2],
            rows: Vec::new(),
        }
    }

    pub fn alpha_grid(&self) -> &[f64] {
        &self.alpha_grid
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<TraceRow> {
        self.rows
    }

    pub fn is_convex(&self) -> bool {
        self.convex.is_some()
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn w_star_norm(&self) -> f64 {
        self.w_star_norm
    }

    /// Total slack at the configured α so far.
    pub fn slack_sum(&self) -> f64 {
        self.slack_at_alpha
    }

    pub fn record(&mut self, u: RoundUtilities, norm_w: f64) -> &TraceRow {
        let round = self.rows.len() + 1;
        let regret = u.regret();
        self.cumulative += regret;
        for (sum, &a) in self.slack_sums.iter_mut().zip(&self.alpha_grid) {
            *sum += compute_slack(a, u.u_star, u.u_y, u.u_ybar);
        }
        self.slack_at_alpha += compute_slack(self.alpha, u.u_star, u.u_y, u.u_ybar);

        let k = match self.bound {
            BoundKind::Perceptron => 1,
            BoundKind::Batch { k } => k,
        };
        let bound = batch_bound(self.alpha, self.slack_at_alpha, self.norm_bound, self.w_star_norm, round, k);

        let convex = self.convex.map(|c| {
            let theta = u.u_y - u.u_star;
            let mut loss_avg = Vec::with_capacity(2);
            let mut bounds = Vec::with_capacity(2);
            for (i, loss) in ConvexLoss::ALL.iter().enumerate() {
                self.loss_sums[i] += loss.value(theta);
                loss_avg.push(self.loss_sums[i] / round as f64);
                bounds.push(theorem2_bound(
                    self.alpha,
                    self.slack_at_alpha,
                    loss.subgradient_bound(),
                    c.ball_diameter,
                    self.norm_bound,
                    round,
                    round as f64 * loss.value(0.0),
                ));
            }
            ConvexColumns {
                loss_avg,
                bound: bounds,
            }
        });

        self.rows.push(TraceRow {
            round,
            regret_inst: regret,
            regret_avg: self.cumulative / round as f64,
            bound_theorem1: bound,
            norm_w,
            slack_sums: self.slack_sums.clone(),
            convex,
        });
        self.rows.last().expect("row just pushed")
    }
}

/// Default α grid `0.1, 0.2, ..., 1.0`.
pub fn default_alpha_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::ranking::{Ranking, RankingContext, RankingTask};
    use crate::vector::FeatureVector;

    fn fv(v: &[f64]) -> FeatureVector {
        FeatureVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn theorem1_examples() {
        assert!((theorem1_bound(1.0, 0.0, 1.0, 1.0, 400) - 0.1).abs() < 1e-15);
        let b1 = theorem1_bound(1.0, 3.0, 1.5, 0.7, 50);
        let b01 = theorem1_bound(0.1, 3.0, 1.5, 0.7, 50);
        assert!((b01 - 10.0 * b1).abs() < 1e-12);
        let plain = theorem1_bound(1.0, 0.0, 1.0, 1.0, 100);
        assert!((batch_bound(1.0, 0.0, 1.0, 1.0, 100, 4) - 2.0 * plain).abs() < 1e-15);
        assert_eq!(corollary1_bound(0.5, 2.0, 1.0, 1.0, 10), theorem1_bound(0.5, 2.0, 1.0, 1.0, 10));
    }

    #[test]
    fn theorem2_examples() {
        // 0 + 0 + (2/(2·100) + 2/10⁴ + 4/100) = 0.01 + 0.0002 + 0.04
        let b = theorem2_bound(1.0, 0.0, 1.0, 2.0, 1.0, 10_000, 0.0);
        assert!((b - 0.0502).abs() < 1e-15);

        let t = 100_000_000;
        let base = theorem2_bound(1.0, 0.0, 1.0, 2.0, 1.0, t, 0.5 * t as f64);
        assert!((base - 0.5).abs() < 1e-3);

        let full = theorem2_bound(1.0, 5.0, 1.0, 2.0, 1.0, 100, 0.0);
        let half = theorem2_bound(0.5, 5.0, 1.0, 2.0, 1.0, 100, 0.0);
        assert!((half - 2.0 * full).abs() < 1e-12);
    }

    #[test]
    fn dcg_examples() {
        assert_eq!(dcg_at_k(&[5.0, 0.0, 0.0], &[0, 1, 2], DEFAULT_DCG_DEPTH).unwrap(), 5.0);
        assert_eq!(dcg_at_k(&[0.0; 4], &[3, 1, 2, 0], 10).unwrap(), 0.0);
        let d = dcg_at_k(&[3.0, 2.0], &[0, 1], 2).unwrap();
        assert!((d - (3.0 + 2.0 / 3f64.log2())).abs() < 1e-15);
        assert!((d - 4.2619).abs() < 1e-4);
        assert!(dcg_at_k(&[1.0], &[0], 0).is_err());
    }

    #[test]
    fn ranking_regret_example() {
        let ctx = RankingContext::new(1, vec![fv(&[1.0, 0.0]), fv(&[0.0, 1.0])], None).unwrap();
        let task = RankingTask::new(2, 5, std::slice::from_ref(&ctx)).unwrap();
        let truth = GroundTruthUtility::new(fv(&[1.0, 0.0]));
        let r = regret_step(&truth, &task, &ctx, &Ranking(vec![1, 0])).unwrap();
        assert!((r - (1.0 - 1.0 / 3f64.log2())).abs() < 1e-15);
        assert!((r - 0.3691).abs() < 1e-4);
        assert_eq!(regret_step(&truth, &task, &ctx, &Ranking(vec![0, 1])).unwrap(), 0.0);
    }

    #[test]
    fn convex_losses() {
        assert_eq!(ConvexLoss::Hinge.value(-2.5), 2.5);
        assert_eq!(ConvexLoss::Hinge.value(0.0), 0.0);
        assert!((ConvexLoss::Logistic.value(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((ConvexLoss::Logistic.value(-800.0) - 800.0).abs() < 1e-9);
        // Non-increasing with slope in [-1, 0].
        for loss in ConvexLoss::ALL {
            let mut prev = loss.value(-10.0);
            for i in -99..=100 {
                let v = loss.value(i as f64 / 10.0);
                assert!(v <= prev + 1e-15);
                assert!(prev - v <= 0.1 + 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..50).map(|t| (t as f64, 3.0 / (t as f64).sqrt())).collect();
        assert!((loglog_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert!(loglog_slope(&[(1.0, 1.0)]).is_none());
    }

    #[test]
    fn trace_accounting() {
        let mut tr = RegretTrace::new(1.0, vec![0.5, 1.0], 1.0, 1.0, BoundKind::Perceptron, None);
        tr.record(RoundUtilities { u_y: 2.0, u_ybar: 6.0, u_star: 10.0 }, 0.3);
        let row = tr.record(RoundUtilities { u_y: 1.0, u_ybar: 1.0, u_star: 1.0 }, 0.4).clone();
        assert_eq!(row.round, 2);
        assert_eq!(row.regret_inst, 0.0);
        assert_eq!(row.regret_avg, 4.0);
        assert_eq!(row.slack_sums, vec![0.0, 4.0]);
        assert!((row.bound_theorem1 - (4.0 / 2.0 + 2.0 / 2f64.sqrt())).abs() < 1e-15);
        assert!(row.convex.is_none());
    }
}
