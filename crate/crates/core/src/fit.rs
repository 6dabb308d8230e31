//! Ground-truth fitting: ridge least squares for utility parameters and an
//! alternating-least-squares factorization that produces item embeddings
//! from a ratings matrix.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::RatingsTriple;
use crate::vector::FeatureVector;

/// Default ridge strength for ground-truth fits.
pub const DEFAULT_RIDGE: f64 = 1e-6;

/// `argmin_w Σ (wᵀx_i - r_i)² + λ‖w‖²`.
///
/// Solved as an ordinary least-squares problem on the stacked system
/// `[X; √λ I] w ≈ [r; 0]` through an SVD, which avoids squaring the
/// condition number. With `λ = 0` a rank-deficient design is rejected.
pub fn fit_least_squares(features: &[FeatureVector], targets: &[f64], ridge_lambda: f64) -> Result<FeatureVector> {
    if features.is_empty() {
        return Err(Error::Degenerate("no examples".into()));
    }
    if features.len() != targets.len() {
        return Err(Error::config(format!(
            "{} feature vectors for {} targets",
            features.len(),
            targets.len()
        )));
    }
    if !(ridge_lambda >= 0.0 && ridge_lambda.is_finite()) {
        return Err(Error::config(format!("ridge lambda must be >= 0, got {ridge_lambda}")));
    }
    if let Some(t) = targets.iter().find(|t| !t.is_finite()) {
        return Err(Error::NonFinite(format!("target {t}")));
    }
    let d = features[0].dim();
    if let Some(bad) = features.iter().find(|f| f.dim() != d) {
        return Err(Error::DimensionMismatch {
            left: d,
            right: bad.dim(),
        });
    }
    let n = features.len();
    let rows = if ridge_lambda > 0.0 { n + d } else { n };
    let mut a = DMatrix::<f64>::zeros(rows, d);
    let mut b = DVector::<f64>::zeros(rows);
    for (i, (x, &r)) in features.iter().zip(targets).enumerate() {
        for (j, &v) in x.as_slice().iter().enumerate() {
            a[(i, j)] = v;
        }
        b[i] = r;
    }
    if ridge_lambda > 0.0 {
        let s = ridge_lambda.sqrt();
        for j in 0..d {
            a[(n + j, j)] = s;
        }
    }

    let svd = a.svd(true, true);
    let max_sv = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = max_sv * f64::EPSILON * rows.max(d) as f64;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < d {
        return Err(Error::Degenerate(format!(
            "design has rank {rank} < {d}; set ridge lambda > 0"
        )));
    }
    let w = svd
        .solve(&b, tol)
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    FeatureVector::new(w.iter().copied().collect())
}

/// Low-rank user and item factors.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub user_ids: Vec<u64>,
    pub item_ids: Vec<u64>,
    pub user_factors: Vec<FeatureVector>,
    pub item_factors: Vec<FeatureVector>,
}

impl Factorization {
    pub fn item_index(&self, id: u64) -> Option<usize> {
        self.item_ids.iter().position(|&i| i == id)
    }

    pub fn user_index(&self, id: u64) -> Option<usize> {
        self.user_ids.iter().position(|&u| u == id)
    }

    /// Root-mean-square error over the given (observed) triples. Triples
    /// referring to unknown users or items are skipped.
    pub fn rmse(&self, triples: &[RatingsTriple]) -> f64 {
        let users: HashMap<u64, usize> = self.user_ids.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let items: HashMap<u64, usize> = self.item_ids.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let mut sum = 0.0;
        let mut n = 0usize;
        for t in triples {
            if let (Some(&u), Some(&m)) = (users.get(&t.user), items.get(&t.item)) {
                let pred: f64 = self.user_factors[u]
                    .as_slice()
                    .iter()
                    .zip(self.item_factors[m].as_slice())
                    .map(|(a, b)| a * b)
                    .sum();
                sum += (pred - t.rating as f64).powi(2);
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            (sum / n as f64).sqrt()
        }
    }
}

/// Solves `(Σ v vᵀ + reg I) x = Σ r v` for one row of factors.
fn solve_row(neighbors: &[(usize, f64)], other: &[DVector<f64>], rank: usize, reg: f64) -> DVector<f64> {
    let mut a = DMatrix::<f64>::identity(rank, rank) * reg;
    let mut b = DVector::<f64>::zeros(rank);
    for &(j, r) in neighbors {
        let v = &other[j];
        a.ger(1.0, v, v, 1.0);
        b.axpy(r, v, 1.0);
    }
    if let Some(chol) = a.clone().cholesky() {
        return chol.solve(&b);
    }
    // Singular when reg = 0 and the row has too few observations; take the
    // minimum-norm solution.
    a.svd(true, true)
        .solve(&b, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(rank))
}

/// Alternating least squares on the observed entries of the user × item
/// rating matrix. Item factors start from a seeded uniform draw; each sweep
/// solves all users against fixed items, then all items against fixed users.
pub fn factorize_ratings(
    triples: &[RatingsTriple],
    rank: usize,
    reg: f64,
    iters: usize,
    seed: u64,
) -> Result<Factorization> {
    if triples.is_empty() {
        return Err(Error::config("no ratings to factorize"));
    }
    if rank < 1 {
        return Err(Error::config("factorization rank must be at least 1"));
    }
    if !(reg >= 0.0 && reg.is_finite()) {
        return Err(Error::config(format!("regularization must be >= 0, got {reg}")));
    }

    let mut user_ids = Vec::new();
    let mut item_ids = Vec::new();
    let mut user_idx = HashMap::new();
    let mut item_idx = HashMap::new();
    for t in triples {
        user_idx.entry(t.user).or_insert_with(|| {
            user_ids.push(t.user);
            user_ids.len() - 1
        });
        item_idx.entry(t.item).or_insert_with(|| {
            item_ids.push(t.item);
            item_ids.len() - 1
        });
    }
    let mut by_user: Vec<Vec<(usize, f64)>> = vec![Vec::new(); user_ids.len()];
    let mut by_item: Vec<Vec<(usize, f64)>> = vec![Vec::new(); item_ids.len()];
    for t in triples {
        let (u, m) = (user_idx[&t.user], item_idx[&t.item]);
        by_user[u].push((m, t.rating as f64));
        by_item[m].push((u, t.rating as f64));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (rank as f64).sqrt();
    let mut items: Vec<DVector<f64>> = (0..item_ids.len())
        .map(|_| DVector::from_fn(rank, |_, _| rng.gen_range(-1.0..1.0) * scale))
        .collect();
    let mut users: Vec<DVector<f64>> = vec![DVector::zeros(rank); user_ids.len()];

    for _ in 0..iters.max(1) {
        for (u, row) in by_user.iter().enumerate() {
            users[u] = solve_row(row, &items, rank, reg);
        }
        for (m, col) in by_item.iter().enumerate() {
            items[m] = solve_row(col, &users, rank, reg);
        }
    }

    let to_fv = |v: &DVector<f64>| FeatureVector::new(v.iter().copied().collect());
    Ok(Factorization {
        user_ids,
        item_ids,
        user_factors: users.iter().map(to_fv).collect::<Result<_>>()?,
        item_factors: items.iter().map(to_fv).collect::<Result<_>>()?,
    })
}
