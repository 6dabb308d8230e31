//! Experiment orchestration: builds the task data once per configuration,
//! runs the observe / present / feedback / update loop for every seed, and
//! writes per-seed and aggregate regret traces.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use log::info;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, TaskKind};
use crate::error::{Error, Result};
use crate::feedback::{
    compute_slack, expected_alpha_feedback, noisy_relevance_feedback, rating_increment_feedback, round_rating,
    StrictAlphaFeedback, UserModelConfig, UserModelKind,
};
use crate::fit::{factorize_ratings, fit_least_squares};
use crate::io::{parse_ratings, parse_svmlight_ranking, RatingsTriple};
use crate::learners::{Learner, LearnerKind};
use crate::metrics::{BoundKind, ConvexLoss, ConvexTracking, RegretTrace, RoundUtilities, TraceRow};
use crate::rng::{seeded, SimRng, Stream};
use crate::tasks::synth::{synthetic_ranking, synthetic_ratings};
use crate::tasks::{AdversaryState, AdversaryTask, ItemContext, ItemTask, RankingContext, RankingTask};
use crate::vector::{dot, FeatureVector, GroundTruthUtility, Task};

/// Per-round record of what the simulated user did. Utilities are visible to
/// metrics only.
#[derive(Clone, Debug, PartialEq)]
pub struct FeedbackEvent {
    pub round: usize,
    pub context_id: u64,
    /// Whether the feedback object differs from the presented one.
    pub improved_object: bool,
    pub u_y: f64,
    pub u_ybar: f64,
    pub u_star: f64,
    /// Slack at the configured α.
    pub slack: f64,
    /// `w_tᵀ(φ(x, ȳ) - φ(x, y))` before the update; never positive.
    pub inner: f64,
    /// `‖w_{t+1}‖²` after the update.
    pub w_norm_sq: f64,
    /// Candidate pool size before the round (item task only).
    pub available: Option<usize>,
}

/// Everything one seed produced.
#[derive(Clone, Debug)]
pub struct SeedTrace {
    pub seed: u64,
    pub alpha_grid: Vec<f64>,
    pub convex: bool,
    pub norm_bound: f64,
    pub w_star_norm: f64,
    pub rows: Vec<TraceRow>,
    pub events: Vec<FeedbackEvent>,
    /// Set when the run stopped early; `rows` then hold the completed prefix.
    pub aborted: Option<String>,
}

struct ItemUser {
    ctx: ItemContext,
    truth: GroundTruthUtility,
    ratings: Vec<u8>,
}

/// Task data shared by all seeds of one configuration.
enum Prepared {
    Ranking {
        task: RankingTask,
        contexts: Vec<RankingContext>,
        truth: GroundTruthUtility,
    },
    Item {
        task: ItemTask,
        users: Vec<ItemUser>,
    },
    Adversary {
        task: AdversaryTask,
    },
}

fn ranking_truth(cfg: &ExperimentConfig, contexts: &[RankingContext], planted: Option<FeatureVector>) -> Result<GroundTruthUtility> {
    // Strict users follow the planted parameter when there is one; label-driven
    // users are scored against the least-squares fit to the labels.
    if let (Some(p), false) = (planted, cfg.user == UserModelKind::NoisyRelevance) {
        return Ok(GroundTruthUtility::new(p));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for c in contexts {
        let labels = c
            .labels
            .as_ref()
            .ok_or_else(|| Error::config(format!("query {} has no relevance labels", c.query_id)))?;
        xs.extend(c.documents.iter().cloned());
        ys.extend(labels.iter().map(|&l| l as f64));
    }
    Ok(GroundTruthUtility::new(fit_least_squares(&xs, &ys, cfg.ridge_lambda)?))
}

fn prepare_ranking(cfg: &ExperimentConfig) -> Result<Prepared> {
    let p = &cfg.ranking;
    let (contexts, planted) = match &p.data {
        Some(path) => {
            let file = fs::File::open(path)?;
            (parse_svmlight_ranking(BufReader::new(file))?, None)
        }
        None => {
            let mut rng = seeded(cfg.data_seed, Stream::Data);
            let s = synthetic_ranking(&mut rng, p.queries, p.docs, p.dim, p.label_noise)?;
            (s.contexts, Some(s.planted))
        }
    };
    if contexts.is_empty() {
        return Err(Error::config("ranking data has no queries"));
    }
    let dim = contexts[0].documents[0].dim();
    let task = RankingTask::new(dim, p.depth, &contexts)?;
    let truth = ranking_truth(cfg, &contexts, planted)?;
    Ok(Prepared::Ranking { task, contexts, truth })
}

fn prepare_items(cfg: &ExperimentConfig) -> Result<Prepared> {
    let p = &cfg.item;
    let triples: Vec<RatingsTriple> = match &p.data {
        Some(path) => parse_ratings(BufReader::new(fs::File::open(path)?), &p.delimiter)?,
        None => {
            let mut rng = seeded(cfg.data_seed, Stream::Data);
            synthetic_ratings(&mut rng, p.users, p.items, p.planted_rank, p.density, p.noise)
        }
    };
    // Users in order of first appearance; the first half trains the item
    // embedding, the second half are the simulated users.
    let mut user_order: Vec<u64> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for t in &triples {
        if seen.insert(t.user) {
            user_order.push(t.user);
        }
    }
    if user_order.len() < 2 {
        return Err(Error::config("item task needs ratings from at least two users"));
    }
    let half = user_order.len() / 2;
    let train_users: std::collections::HashSet<u64> = user_order[..half].iter().copied().collect();
    let train: Vec<RatingsTriple> = triples.iter().filter(|t| train_users.contains(&t.user)).copied().collect();
    let emb = factorize_ratings(&train, p.rank, p.reg, p.als_iters, cfg.data_seed)?;
    let ctx = ItemContext::new(emb.item_ids.clone(), emb.item_factors.clone())?;
    let task = ItemTask::new(&ctx)?;
    let index: std::collections::HashMap<u64, usize> =
        emb.item_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

    let mut users = Vec::new();
    for &uid in &user_order[half..] {
        let observed: Vec<(usize, u8)> = triples
            .iter()
            .filter(|t| t.user == uid)
            .filter_map(|t| index.get(&t.item).map(|&j| (j, t.rating)))
            .collect();
        if observed.is_empty() {
            continue;
        }
        let xs: Vec<FeatureVector> = observed.iter().map(|&(j, _)| ctx.item(j).clone()).collect();
        let ys: Vec<f64> = observed.iter().map(|&(_, r)| r as f64).collect();
        let w = fit_least_squares(&xs, &ys, cfg.ridge_lambda.max(f64::MIN_POSITIVE))?;
        let mut ratings = (0..ctx.len())
            .map(|j| dot(&w, ctx.item(j)).map(round_rating))
            .collect::<Result<Vec<u8>>>()?;
        for &(j, r) in &observed {
            ratings[j] = r;
        }
        users.push(ItemUser {
            ctx: ctx.clone(),
            truth: GroundTruthUtility::new(w),
            ratings,
        });
    }
    if users.is_empty() {
        return Err(Error::config("no simulated users have ratings on embedded items"));
    }
    Ok(Prepared::Item { task, users })
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    match cfg.task {
        TaskKind::Ranking => prepare_ranking(cfg),
        TaskKind::Item => prepare_items(cfg),
        TaskKind::Adversary => Ok(Prepared::Adversary {
            task: AdversaryTask::new(cfg.horizon)?,
        }),
    }
}

/// Round bookkeeping shared by all tasks.
struct Recorder {
    trace: RegretTrace,
    events: Vec<FeedbackEvent>,
    alpha: f64,
}

impl Recorder {
    fn new(cfg: &ExperimentConfig, kind: LearnerKind, norm_bound: f64, w_star_norm: f64) -> Self {
        let (bound, convex) = match kind {
            LearnerKind::Perceptron => (BoundKind::Perceptron, None),
            LearnerKind::Batch(b) => (BoundKind::Batch { k: b.k }, None),
            LearnerKind::Convex(c) => (
                BoundKind::Perceptron,
                Some(ConvexTracking {
                    ball_diameter: c.diameter(),
                }),
            ),
        };
        Recorder {
            trace: RegretTrace::new(cfg.alpha, cfg.alpha_grid.clone(), norm_bound, w_star_norm, bound, convex),
            events: Vec::with_capacity(cfg.horizon),
            alpha: cfg.alpha,
        }
    }

    fn record(
        &mut self,
        context_id: u64,
        improved_object: bool,
        u: RoundUtilities,
        inner: f64,
        w_norm_sq: f64,
        available: Option<usize>,
    ) {
        self.trace.record(u, w_norm_sq.sqrt());
        self.events.push(FeedbackEvent {
            round: self.events.len() + 1,
            context_id,
            improved_object,
            u_y: u.u_y,
            u_ybar: u.u_ybar,
            u_star: u.u_star,
            slack: compute_slack(self.alpha, u.u_star, u.u_y, u.u_ybar),
            inner,
            w_norm_sq,
            available,
        });
    }

    fn finish(self, seed: u64, aborted: Option<String>) -> SeedTrace {
        SeedTrace {
            seed,
            alpha_grid: self.trace.alpha_grid().to_vec(),
            convex: self.trace.is_convex(),
            norm_bound: self.trace.norm_bound(),
            w_star_norm: self.trace.w_star_norm(),
            rows: self.trace.into_rows(),
            events: self.events,
            aborted,
        }
    }
}

/// Plays one round given the presented and feedback objects: evaluates
/// utilities, checks the argmax condition and updates the learner.
fn play_round<T: Task>(
    task: &T,
    learner: &mut Learner,
    truth: &GroundTruthUtility,
    ctx: &T::Context,
    y: &T::Object,
    ybar: &T::Object,
) -> Result<(RoundUtilities, f64)> {
    let phi = task.features(ctx, y)?;
    let phi_bar = task.features(ctx, ybar)?;
    let y_star = truth.best(task, ctx)?;
    let u = RoundUtilities {
        u_y: dot(truth.weights(), &phi)?,
        u_ybar: dot(truth.weights(), &phi_bar)?,
        u_star: truth.utility(task, ctx, &y_star)?,
    };
    let inner = dot(learner.weights(), &phi_bar.sub(&phi)?)?;
    learner.observe(&phi_bar, &phi)?;
    Ok((u, inner))
}

fn strict_or_expected<T: StrictAlphaFeedback>(
    user: &UserModelConfig,
    truth: &GroundTruthUtility,
    task: &T,
    ctx: &T::Context,
    y: &T::Object,
    rng: &mut SimRng,
) -> Result<T::Object> {
    match user.kind {
        UserModelKind::StrictAlpha => task.strict_alpha_feedback(user.alpha, truth, ctx, y),
        UserModelKind::ExpectedAlpha => expected_alpha_feedback(user, truth, task, ctx, y, rng),
        other => Err(Error::config(format!("user model '{other}' is not a utility-driven user"))),
    }
}

fn run_ranking(
    cfg: &ExperimentConfig,
    seed: u64,
    task: &RankingTask,
    contexts: &[RankingContext],
    truth: &GroundTruthUtility,
    rec: &mut Recorder,
) -> Result<()> {
    let kind = cfg.learner_kind()?;
    let user = cfg.user_model();
    let mut learner = Learner::new(kind, task.dimension());
    let mut order_rng = seeded(seed, Stream::Order);
    let mut user_rng = seeded(seed, Stream::User);
    let mut order: Vec<usize> = Vec::new();

    for t in 0..cfg.horizon {
        // A fresh permutation of the queries for every pass over them.
        if t % contexts.len() == 0 {
            order = (0..contexts.len()).collect();
            order.shuffle(&mut order_rng);
        }
        let ctx = &contexts[order[t % contexts.len()]];
        let y = learner.present(task, ctx)?;
        let ybar = match user.kind {
            UserModelKind::NoisyRelevance => {
                let labels = ctx
                    .labels
                    .as_ref()
                    .ok_or_else(|| Error::config(format!("query {} has no labels", ctx.query_id)))?;
                noisy_relevance_feedback(labels, &y)?
            }
            _ => strict_or_expected(&user, truth, task, ctx, &y, &mut user_rng)?,
        };
        let (u, inner) = play_round(task, &mut learner, truth, ctx, &y, &ybar)?;
        rec.record(ctx.query_id, ybar != y, u, inner, learner.weights().norm_squared(), None);
    }
    Ok(())
}

fn run_items(cfg: &ExperimentConfig, seed: u64, task: &ItemTask, user_data: &ItemUser, rec: &mut Recorder) -> Result<()> {
    let kind = cfg.learner_kind()?;
    let user = cfg.user_model();
    let mut learner = Learner::new(kind, task.dimension());
    let mut user_rng = seeded(seed, Stream::User);
    let mut ctx = user_data.ctx.clone();
    let truth = &user_data.truth;

    for _ in 0..cfg.horizon {
        if ctx.available_count() == 0 {
            return Err(Error::EmptyCandidates);
        }
        let available = ctx.available_count();
        let y = learner.present(task, &ctx)?;
        let ybar = match user.kind {
            UserModelKind::RatingIncrement => rating_increment_feedback(&user_data.ratings, &ctx, y)?,
            _ => strict_or_expected(&user, truth, task, &ctx, &y, &mut user_rng)?,
        };
        let (u, inner) = play_round(task, &mut learner, truth, &ctx, &y, &ybar)?;
        rec.record(ctx.id(y), ybar != y, u, inner, learner.weights().norm_squared(), Some(available));
        ctx.remove(y);
        ctx.remove(ybar);
    }
    Ok(())
}

fn run_adversary(cfg: &ExperimentConfig, task: &AdversaryTask, rec: &mut Recorder) -> Result<()> {
    let kind = cfg.learner_kind()?;
    let mut learner = Learner::new(kind, task.dimension());
    let mut adversary = AdversaryState::new(task.horizon());
    let mut played = Vec::with_capacity(task.horizon());

    for t in 0..task.horizon() {
        let y = learner.present(task, &t)?;
        let ybar = adversary.next(y)?;
        let phi = task.features(&t, &y)?;
        let phi_bar = task.features(&t, &ybar)?;
        let inner = dot(learner.weights(), &phi_bar.sub(&phi)?)?;
        learner.observe(&phi_bar, &phi)?;
        played.push((y, ybar, inner, learner.weights().norm_squared()));
    }

    // Utilities are only defined once the adversary has fixed w_*.
    let truth = adversary.w_star()?;
    for (t, (y, ybar, inner, w_norm_sq)) in played.into_iter().enumerate() {
        let u = RoundUtilities {
            u_y: truth.utility(task, &t, &y)?,
            u_ybar: truth.utility(task, &t, &ybar)?,
            u_star: truth.utility(task, &t, &truth.best(task, &t)?)?,
        };
        rec.record(t as u64, true, u, inner, w_norm_sq, None);
    }
    Ok(())
}

fn run_prepared(cfg: &ExperimentConfig, prepared: &Prepared, seed: u64) -> Result<SeedTrace> {
    let kind = cfg.learner_kind()?;
    let (rec, outcome) = match prepared {
        Prepared::Ranking { task, contexts, truth } => {
            let mut rec = Recorder::new(cfg, kind, task.norm_bound(), truth.norm());
            let out = run_ranking(cfg, seed, task, contexts, truth, &mut rec);
            (rec, out)
        }
        Prepared::Item { task, users } => {
            let user = &users[(seed % users.len() as u64) as usize];
            let mut rec = Recorder::new(cfg, kind, task.norm_bound(), user.truth.norm());
            let out = run_items(cfg, seed, task, user, &mut rec);
            (rec, out)
        }
        Prepared::Adversary { task } => {
            let mut rec = Recorder::new(cfg, kind, task.norm_bound(), 1.0);
            let out = run_adversary(cfg, task, &mut rec);
            (rec, out)
        }
    };
    let aborted = outcome.err().map(|e| {
        let msg = format!("round {}: {e}", rec.events.len() + 1);
        log::error!("seed {seed} aborted at {msg}");
        msg
    });
    Ok(rec.finish(seed, aborted))
}

/// Runs every seed of the configuration in memory. Seeds run in parallel;
/// results come back in configuration order.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Vec<SeedTrace>> {
    cfg.validate()?;
    let prepared = prepare(cfg)?;
    cfg.seeds.par_iter().map(|&s| run_prepared(cfg, &prepared, s)).collect()
}

/// Column names of a per-seed trace file.
pub fn trace_header(alpha_grid: &[f64], convex: bool) -> Vec<String> {
    let mut cols: Vec<String> = ["round", "regret_inst", "regret_avg", "bound_theorem1", "norm_w"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend(alpha_grid.iter().map(|a| format!("slack_sum_alpha_{a}")));
    if convex {
        for loss in ConvexLoss::ALL {
            cols.push(format!("loss_{}_avg", loss.name()));
            cols.push(format!("bound_theorem2_{}", loss.name()));
        }
    }
    cols
}

/// Numeric columns of a row, aligned with [`trace_header`] after `round`.
pub fn row_values(row: &TraceRow) -> Vec<f64> {
    let mut v = vec![row.regret_inst, row.regret_avg, row.bound_theorem1, row.norm_w];
    v.extend(&row.slack_sums);
    if let Some(c) = &row.convex {
        for (l, b) in c.loss_avg.iter().zip(&c.bound) {
            v.push(*l);
            v.push(*b);
        }
    }
    v
}

/// 17 significant digits, enough to reload every `f64` bit for bit.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trace<W: Write>(mut out: W, trace: &SeedTrace) -> std::io::Result<()> {
    writeln!(out, "{}", trace_header(&trace.alpha_grid, trace.convex).join(","))?;
    for row in &trace.rows {
        let mut line = row.round.to_string();
        for v in row_values(row) {
            line.push(',');
            line.push_str(&fmt_num(v));
        }
        writeln!(out, "{line}")?;
    }
    if let Some(msg) = &trace.aborted {
        writeln!(out, "# aborted: {msg}")?;
    }
    Ok(())
}

/// Mean and standard error across seeds, per round and column.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateTrace {
    pub columns: Vec<String>,
    pub rounds: Vec<usize>,
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
}

impl AggregateTrace {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Mean of `name` at every round.
    pub fn mean_of(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.column(name)?;
        Some(self.mean.iter().map(|r| r[c]).collect())
    }
}

/// Averages complete traces. Rounds are truncated to the shortest trace.
pub fn aggregate(traces: &[SeedTrace]) -> Result<AggregateTrace> {
    let first = traces.first().ok_or_else(|| Error::config("no traces to aggregate"))?;
    let columns: Vec<String> = trace_header(&first.alpha_grid, first.convex)[1..].to_vec();
    let n_rounds = traces.iter().map(|t| t.rows.len()).min().unwrap_or(0);
    let n = traces.len() as f64;
    let mut rounds = Vec::with_capacity(n_rounds);
    let mut mean = Vec::with_capacity(n_rounds);
    let mut stderr = Vec::with_capacity(n_rounds);
    for r in 0..n_rounds {
        let vals: Vec<Vec<f64>> = traces.iter().map(|t| row_values(&t.rows[r])).collect();
        let m: Vec<f64> = (0..columns.len())
            .map(|c| vals.iter().map(|v| v[c]).sum::<f64>() / n)
            .collect();
        let se: Vec<f64> = (0..columns.len())
            .map(|c| {
                if traces.len() < 2 {
                    return 0.0;
                }
                let var = vals.iter().map(|v| (v[c] - m[c]).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            })
            .collect();
        rounds.push(traces[0].rows[r].round);
        mean.push(m);
        stderr.push(se);
    }
    Ok(AggregateTrace {
        columns,
        rounds,
        mean,
        stderr,
    })
}

pub fn write_aggregate<W: Write>(mut out: W, agg: &AggregateTrace) -> std::io::Result<()> {
    let mut header = vec!["round".to_string()];
    for c in &agg.columns {
        header.push(format!("{c}_mean"));
        header.push(format!("{c}_se"));
    }
    writeln!(out, "{}", header.join(","))?;
    for ((round, m), se) in agg.rounds.iter().zip(&agg.mean).zip(&agg.stderr) {
        let mut line = round.to_string();
        for (a, b) in m.iter().zip(se) {
            line.push(',');
            line.push_str(&fmt_num(*a));
            line.push(',');
            line.push_str(&fmt_num(*b));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// What [`run_experiment`] wrote.
#[derive(Debug)]
pub struct ExperimentOutput {
    pub traces: Vec<SeedTrace>,
    pub aggregate: AggregateTrace,
    pub files: Vec<PathBuf>,
}

pub fn seed_trace_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("seed_{seed}.csv"))
}

/// Runs the configuration and writes `seed_<s>.csv` per seed,
/// `aggregate.csv`, and the resolved `config.txt` into `cfg.out`.
///
/// A seed that aborts mid-run still gets its partial trace (flagged with a
/// trailing `# aborted:` line) and the call returns an error.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let traces = simulate(cfg)?;
    fs::create_dir_all(&cfg.out)?;
    let mut files = Vec::new();

    let config_path = cfg.out.join("config.txt");
    fs::write(&config_path, cfg.to_text())?;
    files.push(config_path);

    for t in &traces {
        let path = seed_trace_path(&cfg.out, t.seed);
        let mut buf = Vec::new();
        write_trace(&mut buf, t)?;
        fs::write(&path, buf)?;
        files.push(path);
    }
    if let Some(t) = traces.iter().find(|t| t.aborted.is_some()) {
        return Err(Error::Aborted {
            seed: t.seed,
            msg: t.aborted.clone().unwrap_or_default(),
        });
    }

    let agg = aggregate(&traces)?;
    let agg_path = cfg.out.join("aggregate.csv");
    let mut buf = Vec::new();
    write_aggregate(&mut buf, &agg)?;
    fs::write(&agg_path, buf)?;
    files.push(agg_path);
    info!("wrote {} files to {}", files.len(), cfg.out.display());

    Ok(ExperimentOutput {
        traces,
        aggregate: agg,
        files,
    })
}
