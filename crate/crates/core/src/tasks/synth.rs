//! Synthetic stand-ins for ranking and ratings datasets.

use rand::Rng;

use crate::error::Result;
use crate::feedback::round_rating;
use crate::io::RatingsTriple;
use crate::rng::normal;
use crate::tasks::ranking::RankingContext;
use crate::vector::FeatureVector;

/// Uniform draw from the unit sphere in `dim` dimensions.
pub fn unit_sphere<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| normal(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub struct SyntheticRanking {
    pub contexts: Vec<RankingContext>,
    /// Unit-norm parameter used to generate the labels.
    pub planted: FeatureVector,
}

/// Queries with unit-norm documents and a planted unit-norm parameter.
/// Labels are `clamp(round(2 + 2√dim·wᵀx + noise·N(0,1)), 0, 4)`, so the
/// label spread is comparable across dimensions.
pub fn synthetic_ranking<R: Rng + ?Sized>(
    rng: &mut R,
    queries: usize,
    docs: usize,
    dim: usize,
    label_noise: f64,
) -> Result<SyntheticRanking> {
    let planted = FeatureVector::new(unit_sphere(rng, dim))?;
    let scale = 2.0 * (dim as f64).sqrt();
    let mut contexts = Vec::with_capacity(queries);
    for q in 0..queries {
        let mut documents = Vec::with_capacity(docs);
        let mut labels = Vec::with_capacity(docs);
        for _ in 0..docs {
            let x = FeatureVector::new(unit_sphere(rng, dim))?;
            let score = planted.dot(&x)?;
            let raw = 2.0 + scale * score + label_noise * normal(rng);
            labels.push(raw.round().clamp(0.0, 4.0) as u8);
            documents.push(x);
        }
        contexts.push(RankingContext::new(q as u64, documents, Some(labels))?);
    }
    Ok(SyntheticRanking { contexts, planted })
}

/// A sparse low-rank ratings matrix. Each user and item gets a Gaussian
/// factor scaled so that their inner product has unit variance; a rating is
/// `round(3 + 1.2·uᵀv + noise·N(0,1))` clamped to `1..=5`, observed with
/// probability `density`. Every user rates at least one item.
pub fn synthetic_ratings<R: Rng + ?Sized>(
    rng: &mut R,
    users: usize,
    items: usize,
    rank: usize,
    density: f64,
    noise: f64,
) -> Vec<RatingsTriple> {
    let scale = (rank as f64).powf(-0.25);
    let factor = |rng: &mut R| -> Vec<f64> { (0..rank).map(|_| normal(rng) * scale).collect() };
    let user_f: Vec<Vec<f64>> = (0..users).map(|_| factor(rng)).collect();
    let item_f: Vec<Vec<f64>> = (0..items).map(|_| factor(rng)).collect();

    let mut out = Vec::new();
    for (u, uf) in user_f.iter().enumerate() {
        let start = out.len();
        for (m, mf) in item_f.iter().enumerate() {
            let observed = rng.gen_bool(density);
            let score: f64 = uf.iter().zip(mf).map(|(a, b)| a * b).sum();
            let jitter = noise * normal(rng);
            if observed {
                out.push(RatingsTriple {
                    user: u as u64,
                    item: m as u64,
                    rating: round_rating(3.0 + 1.2 * score + jitter),
                    timestamp: None,
                });
            }
        }
        if out.len() == start && items > 0 {
            let m = rng.gen_range(0..items);
            let score: f64 = uf.iter().zip(&item_f[m]).map(|(a, b)| a * b).sum();
            out.push(RatingsTriple {
                user: u as u64,
                item: m as u64,
                rating: round_rating(3.0 + 1.2 * score),
                timestamp: None,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded, Stream};

    #[test]
    fn ranking_shapes_and_norms() {
        let mut rng = seeded(4, Stream::Data);
        let s = synthetic_ranking(&mut rng, 3, 7, 5, 0.5).unwrap();
        assert_eq!(s.contexts.len(), 3);
        assert!((s.planted.norm() - 1.0).abs() < 1e-12);
        for c in &s.contexts {
            assert_eq!(c.len(), 7);
            assert!(c.labels.as_ref().unwrap().iter().all(|&l| l <= 4));
            for d in &c.documents {
                assert!((d.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ratings_in_range_and_every_user_present() {
        let mut rng = seeded(2, Stream::Data);
        let t = synthetic_ratings(&mut rng, 30, 40, 3, 0.02, 0.3);
        assert!(t.iter().all(|r| (1..=5).contains(&r.rating)));
        for u in 0..30 {
            assert!(t.iter().any(|r| r.user == u));
        }
    }
}
