//! Experiment configuration.
//!
//! The on-disk form is a flat `key = value` file; `#` starts a comment.
//! [`ExperimentConfig::to_text`] writes every key in a fixed order, and
//! parsing that text gives back the same configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::feedback::{UserModelConfig, UserModelKind};
use crate::fit::DEFAULT_RIDGE;
use crate::learners::{BatchConfig, ConvexLearnerConfig, LearnerKind};
use crate::metrics::default_alpha_grid;
use crate::tasks::ranking::UTILITY_DEPTH;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskKind {
    Ranking,
    Item,
    Adversary,
}

impl TaskKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::Ranking => "ranking",
            TaskKind::Item => "item",
            TaskKind::Adversary => "adversary",
        }
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ranking" => Ok(TaskKind::Ranking),
            "item" => Ok(TaskKind::Item),
            "adversary" => Ok(TaskKind::Adversary),
            other => Err(Error::config(format!("unknown task '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LearnerName {
    Perceptron,
    Batch,
    Convex,
}

impl LearnerName {
    pub fn as_str(&self) -> &'static str {
        match self {
            LearnerName::Perceptron => "perceptron",
            LearnerName::Batch => "batch",
            LearnerName::Convex => "convex",
        }
    }
}

impl FromStr for LearnerName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perceptron" => Ok(LearnerName::Perceptron),
            "batch" => Ok(LearnerName::Batch),
            "convex" => Ok(LearnerName::Convex),
            other => Err(Error::config(format!("unknown learner '{other}'"))),
        }
    }
}

/// Ranking task parameters. With `data` unset, queries are synthesized.
#[derive(Clone, Debug, PartialEq)]
pub struct RankingParams {
    pub queries: usize,
    pub docs: usize,
    pub dim: usize,
    pub depth: usize,
    pub label_noise: f64,
    pub data: Option<PathBuf>,
}

impl Default for RankingParams {
    fn default() -> Self {
        RankingParams {
            queries: 50,
            docs: 20,
            dim: 10,
            depth: UTILITY_DEPTH,
            label_noise: 0.5,
            data: None,
        }
    }
}

/// Item task parameters. With `data` unset, a low-rank ratings matrix is
/// synthesized.
#[derive(Clone, Debug, PartialEq)]
pub struct ItemParams {
    pub users: usize,
    pub items: usize,
    pub planted_rank: usize,
    pub density: f64,
    pub noise: f64,
    pub rank: usize,
    pub reg: f64,
    pub als_iters: usize,
    pub data: Option<PathBuf>,
    pub delimiter: String,
}

impl Default for ItemParams {
    fn default() -> Self {
        ItemParams {
            users: 200,
            items: 3200,
            planted_rank: 5,
            density: 0.05,
            noise: 0.3,
            rank: 16,
            reg: 0.1,
            als_iters: 10,
            data: None,
            delimiter: "::".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub learner: LearnerName,
    pub user: UserModelKind,
    pub alpha: f64,
    pub improve_prob: f64,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    pub alpha_grid: Vec<f64>,
    pub out: PathBuf,
    pub data_seed: u64,
    pub ridge_lambda: f64,
    pub batch_k: usize,
    pub convex_g: f64,
    pub convex_rho: f64,
    pub ranking: RankingParams,
    pub item: ItemParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            task: TaskKind::Ranking,
            learner: LearnerName::Perceptron,
            user: UserModelKind::StrictAlpha,
            alpha: 1.0,
            improve_prob: 1.0,
            horizon: 1000,
            seeds: vec![0],
            alpha_grid: default_alpha_grid(),
            out: PathBuf::from("traces"),
            data_seed: 0,
            ridge_lambda: DEFAULT_RIDGE,
            batch_k: 1,
            convex_g: 1.0,
            convex_rho: 1.0,
            ranking: RankingParams::default(),
            item: ItemParams::default(),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("bad value '{value}' for '{key}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

/// Seeds as a comma list; `a..b` expands to the half-open range.
fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = parse_value("seeds", a.trim())?;
            let b: u64 = parse_value("seeds", b.trim())?;
            if b.saturating_sub(a) > 1_000_000 {
                return Err(Error::config(format!("seed range '{part}' too large")));
            }
            seeds.extend(a..b);
        } else {
            seeds.push(parse_value("seeds", part)?);
        }
    }
    Ok(seeds)
}

fn parse_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn escape(value: &str) -> String {
    value.replace('\\', "\\\\").replace('\t', "\\t")
}

fn unescape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    let mut chars = value.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('t') => out.push('\t'),
                Some(other) => out.push(other),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn path_text(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "task" => self.task = v.parse()?,
            "learner" => self.learner = v.parse()?,
            "user" => self.user = v.parse()?,
            "alpha" => self.alpha = parse_value(key, v)?,
            "improve_prob" => self.improve_prob = parse_value(key, v)?,
            "T" => self.horizon = parse_value(key, v)?,
            "seeds" => self.seeds = parse_seeds(v)?,
            "alpha_grid" => self.alpha_grid = parse_list(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "data_seed" => self.data_seed = parse_value(key, v)?,
            "ridge_lambda" => self.ridge_lambda = parse_value(key, v)?,
            "batch_k" => self.batch_k = parse_value(key, v)?,
            "convex_g" => self.convex_g = parse_value(key, v)?,
            "convex_rho" => self.convex_rho = parse_value(key, v)?,
            "ranking_queries" => self.ranking.queries = parse_value(key, v)?,
            "ranking_docs" => self.ranking.docs = parse_value(key, v)?,
            "ranking_dim" => self.ranking.dim = parse_value(key, v)?,
            "ranking_depth" => self.ranking.depth = parse_value(key, v)?,
            "ranking_label_noise" => self.ranking.label_noise = parse_value(key, v)?,
            "ranking_data" => self.ranking.data = parse_path(v),
            "item_users" => self.item.users = parse_value(key, v)?,
            "item_items" => self.item.items = parse_value(key, v)?,
            "item_planted_rank" => self.item.planted_rank = parse_value(key, v)?,
            "item_density" => self.item.density = parse_value(key, v)?,
            "item_noise" => self.item.noise = parse_value(key, v)?,
            "item_rank" => self.item.rank = parse_value(key, v)?,
            "item_reg" => self.item.reg = parse_value(key, v)?,
            "item_als_iters" => self.item.als_iters = parse_value(key, v)?,
            "item_data" => self.item.data = parse_path(v),
            "item_delimiter" => self.item.delimiter = unescape(v),
            other => return Err(Error::config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parses a config file body on top of the defaults. Later lines win.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            };
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, "expected 'key = value'"))?;
            self.set(key, value).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        }
        Ok(())
    }

    /// Canonical text form with every key.
    pub fn to_text(&self) -> String {
        let r = &self.ranking;
        let it = &self.item;
        let pairs: Vec<(&str, String)> = vec![
            ("task", self.task.as_str().into()),
            ("learner", self.learner.as_str().into()),
            ("user", self.user.as_str().into()),
            ("alpha", self.alpha.to_string()),
            ("improve_prob", self.improve_prob.to_string()),
            ("T", self.horizon.to_string()),
            ("seeds", join(&self.seeds)),
            ("alpha_grid", join(&self.alpha_grid)),
            ("out", self.out.display().to_string()),
            ("data_seed", self.data_seed.to_string()),
            ("ridge_lambda", self.ridge_lambda.to_string()),
            ("batch_k", self.batch_k.to_string()),
            ("convex_g", self.convex_g.to_string()),
            ("convex_rho", self.convex_rho.to_string()),
            ("ranking_queries", r.queries.to_string()),
            ("ranking_docs", r.docs.to_string()),
            ("ranking_dim", r.dim.to_string()),
            ("ranking_depth", r.depth.to_string()),
            ("ranking_label_noise", r.label_noise.to_string()),
            ("ranking_data", path_text(&r.data)),
            ("item_users", it.users.to_string()),
            ("item_items", it.items.to_string()),
            ("item_planted_rank", it.planted_rank.to_string()),
            ("item_density", it.density.to_string()),
            ("item_noise", it.noise.to_string()),
            ("item_rank", it.rank.to_string()),
            ("item_reg", it.reg.to_string()),
            ("item_als_iters", it.als_iters.to_string()),
            ("item_data", path_text(&it.data)),
            ("item_delimiter", escape(&it.delimiter)),
        ];
        let mut out = String::new();
        for (k, v) in pairs {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    pub fn user_model(&self) -> UserModelConfig {
        UserModelConfig {
            kind: self.user,
            alpha: self.alpha,
            improve_prob: self.improve_prob,
        }
    }

    pub fn learner_kind(&self) -> Result<LearnerKind> {
        Ok(match self.learner {
            LearnerName::Perceptron => LearnerKind::Perceptron,
            LearnerName::Batch => LearnerKind::Batch(BatchConfig::new(self.batch_k)?),
            LearnerName::Convex => LearnerKind::Convex(ConvexLearnerConfig::new(self.convex_g, self.convex_rho)?),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.user_model().validate()?;
        self.learner_kind()?;
        if self.horizon == 0 {
            return Err(Error::config("T must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("at least one seed is required"));
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return Err(Error::config(format!("alpha grid value {a} outside (0, 1]")));
        }
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return Err(Error::config("ridge_lambda must be >= 0"));
        }
        let user_ok = matches!(
            (self.task, self.user),
            (TaskKind::Adversary, _)
                | (_, UserModelKind::StrictAlpha | UserModelKind::ExpectedAlpha)
                | (TaskKind::Ranking, UserModelKind::NoisyRelevance)
                | (TaskKind::Item, UserModelKind::RatingIncrement)
        );
        if !user_ok {
            return Err(Error::config(format!(
                "user model '{}' does not apply to task '{}'",
                self.user,
                self.task.as_str()
            )));
        }
        match self.task {
            TaskKind::Ranking => {
                let r = &self.ranking;
                if r.depth == 0 {
                    return Err(Error::config("ranking_depth must be at least 1"));
                }
                if r.data.is_none() && (r.queries == 0 || r.docs == 0 || r.dim == 0) {
                    return Err(Error::config("synthetic ranking needs queries, docs and dim >= 1"));
                }
                if !(r.label_noise >= 0.0 && r.label_noise.is_finite()) {
                    return Err(Error::config("ranking_label_noise must be >= 0"));
                }
            }
            TaskKind::Item => {
                let it = &self.item;
                if it.rank == 0 || it.als_iters == 0 {
                    return Err(Error::config("item_rank and item_als_iters must be >= 1"));
                }
                if !(it.reg >= 0.0 && it.reg.is_finite()) {
                    return Err(Error::config("item_reg must be >= 0"));
                }
                if it.data.is_none() {
                    if it.users < 2 || it.items == 0 || it.planted_rank == 0 {
                        return Err(Error::config("synthetic items need >= 2 users, >= 1 item, planted rank >= 1"));
                    }
                    if !(it.density > 0.0 && it.density <= 1.0) {
                        return Err(Error::config("item_density must lie in (0, 1]"));
                    }
                    if !(it.noise >= 0.0 && it.noise.is_finite()) {
                        return Err(Error::config("item_noise must be >= 0"));
                    }
                }
                if it.delimiter.is_empty() {
                    return Err(Error::config("item_delimiter must not be empty"));
                }
            }
            TaskKind::Adversary => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_text();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
        assert_eq!(ExperimentConfig::parse(&text).unwrap().to_text(), text);
    }

    #[test]
    fn parses_comments_ranges_and_escapes() {
        let text = "# header\ntask = item   # trailing\nseeds = 0..3, 10\nitem_delimiter = \\t\nalpha=0.5\n\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.task, TaskKind::Item);
        assert_eq!(cfg.seeds, vec![0, 1, 2, 10]);
        assert_eq!(cfg.item.delimiter, "\t");
        assert_eq!(cfg.alpha, 0.5);
        let again = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn errors_name_the_line() {
        match ExperimentConfig::parse("task = ranking\nbogus = 1\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match ExperimentConfig::parse("alpha\n") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(ExperimentConfig::parse("T = -3\n").is_err());
    }

    #[test]
    fn validation() {
        let ok = ExperimentConfig::default();
        assert!(ok.validate().is_ok());
        let bad = |f: &dyn Fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(&|c| c.alpha = 0.0));
        assert!(bad(&|c| c.horizon = 0));
        assert!(bad(&|c| c.seeds.clear()));
        assert!(bad(&|c| c.user = UserModelKind::RatingIncrement));
        assert!(bad(&|c| {
            c.task = TaskKind::Item;
            c.user = UserModelKind::NoisyRelevance;
        }));
        assert!(bad(&|c| {
            c.learner = LearnerName::Batch;
            c.batch_k = 0;
        }));
        assert!(bad(&|c| {
            c.learner = LearnerName::Convex;
            c.convex_rho = 0.0;
        }));
        assert!(bad(&|c| c.alpha_grid = vec![0.5, 1.5]));
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        (
            prop_oneof![Just(TaskKind::Ranking), Just(TaskKind::Item), Just(TaskKind::Adversary)],
            prop_oneof![Just(LearnerName::Perceptron), Just(LearnerName::Batch), Just(LearnerName::Convex)],
            0.001f64..=1.0,
            0.0f64..=1.0,
            1usize..100_000,
            proptest::collection::vec(any::<u64>(), 1..5),
            proptest::collection::vec(0.001f64..=1.0, 0..5),
            (any::<u64>(), 0.0f64..1.0, 1usize..64, 0.01f64..10.0),
            ("[a-z]{1,8}", prop_oneof![Just("::".to_string()), Just("\t".to_string()), Just(",".to_string())]),
        )
            .prop_map(|(task, learner, alpha, p, t, seeds, grid, (ds, ridge, k, g), (out, delim))| {
                let mut c = ExperimentConfig {
                    task,
                    learner,
                    alpha,
                    improve_prob: p,
                    horizon: t,
                    seeds,
                    alpha_grid: grid,
                    data_seed: ds,
                    ridge_lambda: ridge,
                    batch_k: k,
                    convex_g: g,
                    out: PathBuf::from(out),
                    ..ExperimentConfig::default()
                };
                c.item.delimiter = delim;
                c
            })
    }

    proptest! {
        #[test]
        fn text_round_trip(cfg in arb_config()) {
            let text = cfg.to_text();
            let parsed = ExperimentConfig::parse(&text).unwrap();
            prop_assert_eq!(&parsed, &cfg);
            prop_assert_eq!(parsed.to_text(), text);
        }
    }
}
