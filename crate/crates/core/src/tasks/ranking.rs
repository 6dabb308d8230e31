//! Top-k ranking with a position-discounted joint feature map.
//!
//! `φ(q, y) = Σ_{i=1}^{k} x_{y_i} / log₂(i + 1)` over the first `k = depth`
//! positions (default 5). Maximizing `wᵀφ` is a sort of the documents by
//! `wᵀx`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::vector::{dot, FeatureVector, Task};

/// Default number of positions entering the utility.
pub const UTILITY_DEPTH: usize = 5;

/// Position discount `1 / log₂(position + 1)` for a 1-based position.
pub fn discount(position: usize) -> f64 {
    1.0 / ((position + 1) as f64).log2()
}

/// Sum of the first `depth` position discounts.
pub fn discount_sum(depth: usize) -> f64 {
    (1..=depth).map(discount).sum()
}

/// One query with its candidate documents.
#[derive(Clone, Debug, PartialEq)]
pub struct RankingContext {
    pub query_id: u64,
    pub documents: Vec<FeatureVector>,
    /// Graded relevance labels in `0..=4`, one per document, when known.
    pub labels: Option<Vec<u8>>,
}

impl RankingContext {
    pub fn new(query_id: u64, documents: Vec<FeatureVector>, labels: Option<Vec<u8>>) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        let dim = documents[0].dim();
        if let Some(bad) = documents.iter().find(|d| d.dim() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: bad.dim(),
            });
        }
        if let Some(l) = &labels {
            if l.len() != documents.len() {
                return Err(Error::config(format!(
                    "query {query_id}: {} labels for {} documents",
                    l.len(),
                    documents.len()
                )));
            }
        }
        Ok(RankingContext {
            query_id,
            documents,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn max_doc_norm(&self) -> f64 {
        self.documents.iter().map(FeatureVector::norm).fold(0.0, f64::max)
    }
}

/// An ordering of documents, stored as 0-based document indices; entry `i`
/// is the document shown at position `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ranking(pub Vec<usize>);

impl Ranking {
    pub fn identity(n: usize) -> Self {
        Ranking((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks the ranking is a duplicate-free prefix of a permutation of
    /// `n_docs` documents covering at least `min(depth, n_docs)` positions.
    pub fn validate(&self, n_docs: usize, depth: usize) -> Result<()> {
        let need = depth.min(n_docs);
        if self.0.len() < need {
            return Err(Error::Inadmissible(format!(
                "ranking has {} positions, need {need}",
                self.0.len()
            )));
        }
        let mut seen = vec![false; n_docs];
        for &d in &self.0 {
            if d >= n_docs {
                return Err(Error::Inadmissible(format!("document {d} out of range 0..{n_docs}")));
            }
            if std::mem::replace(&mut seen[d], true) {
                return Err(Error::Inadmissible(format!("document {d} repeated")));
            }
        }
        Ok(())
    }
}

/// Sorts document indices by descending score, ties by lowest index.
pub fn sort_by_scores(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

#[derive(Clone, Debug)]
pub struct RankingTask {
    dim: usize,
    depth: usize,
    norm_bound: f64,
}

impl RankingTask {
    /// Builds the task for a set of queries, deriving `R` as
    /// `discount_sum(depth) * max_doc_norm`.
    pub fn new(dim: usize, depth: usize, contexts: &[RankingContext]) -> Result<Self> {
        if depth == 0 {
            return Err(Error::config("ranking depth must be at least 1"));
        }
        let mut max_norm: f64 = 0.0;
        for ctx in contexts {
            if ctx.documents[0].dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: ctx.documents[0].dim(),
                });
            }
            max_norm = max_norm.max(ctx.max_doc_norm());
        }
        Ok(RankingTask {
            dim,
            depth,
            norm_bound: discount_sum(depth) * max_norm,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn scores(&self, w: &FeatureVector, ctx: &RankingContext) -> Result<Vec<f64>> {
        ctx.documents.iter().map(|d| dot(w, d)).collect()
    }
}

impl Task for RankingTask {
    type Context = RankingContext;
    type Object = Ranking;

    fn dimension(&self) -> usize {
        self.dim
    }

    fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    fn features(&self, ctx: &RankingContext, y: &Ranking) -> Result<FeatureVector> {
        y.validate(ctx.len(), self.depth)?;
        let mut phi = FeatureVector::zeros(self.dim);
        for (i, &doc) in y.0.iter().take(self.depth).enumerate() {
            phi.axpy(discount(i + 1), &ctx.documents[doc])?;
        }
        Ok(phi)
    }

    fn argmax(&self, w: &FeatureVector, ctx: &RankingContext) -> Result<Ranking> {
        if ctx.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        Ok(Ranking(sort_by_scores(&self.scores(w, ctx)?)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::utility;
    use proptest::prelude::*;

    fn fv(v: &[f64]) -> FeatureVector {
        FeatureVector::new(v.to_vec()).unwrap()
    }

    /// Contexts whose document features are one-hot-free scalars so that
    /// `w = [1]` makes each document's score its own value.
    fn scalar_ctx(scores: &[f64]) -> RankingContext {
        RankingContext::new(1, scores.iter().map(|&s| fv(&[s])).collect(), None).unwrap()
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn features_two_docs() {
        let ctx = RankingContext::new(1, vec![fv(&[1.0, 0.0]), fv(&[0.0, 1.0])], None).unwrap();
        let task = RankingTask::new(2, UTILITY_DEPTH, std::slice::from_ref(&ctx)).unwrap();
        let phi = task.features(&ctx, &Ranking(vec![0, 1])).unwrap();
        assert_eq!(phi[0], 1.0);
        assert!((phi[1] - 1.0 / 3f64.log2()).abs() < 1e-15);
        assert!((phi[1] - 0.6309).abs() < 1e-4);
    }

    #[test]
    fn features_single_and_zero_docs() {
        let ctx = RankingContext::new(1, vec![fv(&[0.3, -0.2])], None).unwrap();
        let task = RankingTask::new(2, UTILITY_DEPTH, std::slice::from_ref(&ctx)).unwrap();
        assert_eq!(task.features(&ctx, &Ranking(vec![0])).unwrap(), fv(&[0.3, -0.2]));

        let zeros = RankingContext::new(1, vec![fv(&[0.0, 0.0]); 4], None).unwrap();
        for p in permutations(4) {
            assert!(task.features(&zeros, &Ranking(p)).unwrap().is_zero());
        }
    }

    #[test]
    fn three_doc_utility_in_sorted_order() {
        // 0.9/log2(2) + 0.5/log2(3) + 0.1/log2(4)
        let expected = 0.9 + 0.5 / 3f64.log2() + 0.1 / 2.0;
        assert!((expected - 1.26546).abs() < 1e-5);
        let ctx = scalar_ctx(&[0.9, 0.5, 0.1]);
        let task = RankingTask::new(1, UTILITY_DEPTH, std::slice::from_ref(&ctx)).unwrap();
        let u = utility(&fv(&[1.0]), &task, &ctx, &Ranking(vec![0, 1, 2])).unwrap();
        assert!((u - expected).abs() < 1e-12);
    }

    #[test]
    fn invalid_rankings_rejected() {
        let ctx = scalar_ctx(&[0.1, 0.2, 0.3]);
        let task = RankingTask::new(1, UTILITY_DEPTH, std::slice::from_ref(&ctx)).unwrap();
        assert!(task.features(&ctx, &Ranking(vec![0, 0, 1])).is_err());
        assert!(task.features(&ctx, &Ranking(vec![0, 1, 3])).is_err());
        assert!(task.features(&ctx, &Ranking(vec![0, 1])).is_err());
    }

    #[test]
    fn argmax_examples() {
        let ctx = scalar_ctx(&[0.5, 0.9, 0.1]);
        let task = RankingTask::new(1, UTILITY_DEPTH, std::slice::from_ref(&ctx)).unwrap();
        assert_eq!(task.argmax(&fv(&[1.0]), &ctx).unwrap(), Ranking(vec![1, 0, 2]));
        assert_eq!(task.argmax(&fv(&[0.0]), &ctx).unwrap(), Ranking::identity(3));
        let flat = scalar_ctx(&[0.4, 0.4, 0.4, 0.4]);
        assert_eq!(task.argmax(&fv(&[1.0]), &flat).unwrap(), Ranking::identity(4));
    }

    #[test]
    fn argmax_matches_exhaustive_search_for_three_docs() {
        let ctx = scalar_ctx(&[0.5, 0.9, 0.1]);
        let task = RankingTask::new(1, UTILITY_DEPTH, std::slice::from_ref(&ctx)).unwrap();
        let w = fv(&[1.0]);
        let best = permutations(3)
            .into_iter()
            .map(Ranking)
            .max_by(|a, b| {
                let ua = utility(&w, &task, &ctx, a).unwrap();
                let ub = utility(&w, &task, &ctx, b).unwrap();
                ua.partial_cmp(&ub).unwrap()
            })
            .unwrap();
        assert_eq!(best, Ranking(vec![1, 0, 2]));
        assert_eq!(task.argmax(&w, &ctx).unwrap(), best);
    }

    #[test]
    fn norm_bound_covers_sampled_features() {
        let ctx = RankingContext::new(
            7,
            (0..7).map(|i| fv(&[(i as f64).sin(), (i as f64).cos()])).collect(),
            None,
        )
        .unwrap();
        let task = RankingTask::new(2, UTILITY_DEPTH, std::slice::from_ref(&ctx)).unwrap();
        for p in permutations(7).into_iter().step_by(13) {
            assert!(task.features(&ctx, &Ranking(p)).unwrap().norm() <= task.norm_bound() + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn argmax_beats_every_permutation(
            docs in (1usize..=6).prop_flat_map(|n| proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 3), n)),
            w in proptest::collection::vec(-2.0f64..2.0, 3),
        ) {
            let ctx = RankingContext::new(0, docs.iter().map(|d| fv(d)).collect(), None).unwrap();
            let task = RankingTask::new(3, UTILITY_DEPTH, std::slice::from_ref(&ctx)).unwrap();
            let w = fv(&w);
            let best = utility(&w, &task, &ctx, &task.argmax(&w, &ctx).unwrap()).unwrap();
            for p in permutations(ctx.len()) {
                let u = utility(&w, &task, &ctx, &Ranking(p)).unwrap();
                prop_assert!(best >= u - 1e-12);
            }
        }

        #[test]
        fn promoting_higher_scored_doc_never_hurts(
            scores in proptest::collection::vec(-1.0f64..1.0, 2..8),
            i in 0usize..8, j in 0usize..8,
        ) {
            let n = scores.len();
            let (i, j) = (i % n, j % n);
            prop_assume!(i < j);
            let ctx = scalar_ctx(&scores);
            let task = RankingTask::new(1, UTILITY_DEPTH, std::slice::from_ref(&ctx)).unwrap();
            let w = fv(&[1.0]);
            let base = Ranking::identity(n);
            let mut swapped = base.0.clone();
            swapped.swap(i, j);
            let swapped = Ranking(swapped);
            let (lo, hi) = if scores[j] > scores[i] { (&base, &swapped) } else { (&swapped, &base) };
            let u_lo = utility(&w, &task, &ctx, lo).unwrap();
            let u_hi = utility(&w, &task, &ctx, hi).unwrap();
            prop_assert!(u_hi >= u_lo - 1e-12);
        }
    }
}
