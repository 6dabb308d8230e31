use coactive::fit::{factorize_ratings, fit_least_squares};
use coactive::io::RatingsTriple;
use coactive::FeatureVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solves `(XᵀX + λI) w = Xᵀr` by Gaussian elimination with partial pivoting.
fn normal_equations_oracle(x: &[Vec<f64>], r: &[f64], lambda: f64) -> Vec<f64> {
    let d = x[0].len();
    let mut a = vec![vec![0.0; d + 1]; d];
    for (row, &t) in x.iter().zip(r) {
        for i in 0..d {
            for j in 0..d {
                a[i][j] += row[i] * row[j];
            }
            a[i][d] += row[i] * t;
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += lambda;
    }
    for col in 0..d {
        let pivot = (col..d).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
        a.swap(col, pivot);
        for row in col + 1..d {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (x, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
        }
    }
    let mut w = vec![0.0; d];
    for i in (0..d).rev() {
        let s: f64 = (i + 1..d).map(|j| a[i][j] * w[j]).sum();
        w[i] = (a[i][d] - s) / a[i][i];
    }
    w
}

#[test]
fn least_squares_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for lambda in [0.0, 1e-6, 0.5] {
        let x: Vec<Vec<f64>> = (0..20).map(|_| (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let r: Vec<f64> = (0..20).map(|_| rng.gen_range(1.0..5.0)).collect();
        let fv: Vec<FeatureVector> = x.iter().map(|v| FeatureVector::new(v.clone()).unwrap()).collect();
        let got = fit_least_squares(&fv, &r, lambda).unwrap();
        let want = normal_equations_oracle(&x, &r, lambda);
        for (g, w) in got.as_slice().iter().zip(&want) {
            assert!((g - w).abs() < 1e-8, "lambda {lambda}: {g} vs {w}");
        }
    }
}

#[test]
fn least_squares_recovers_noiseless_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = [0.7, -1.2, 0.05];
    let x: Vec<FeatureVector> = (0..30)
        .map(|_| FeatureVector::new((0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap())
        .collect();
    let r: Vec<f64> = x.iter().map(|v| v.as_slice().iter().zip(&w).map(|(a, b)| a * b).sum()).collect();
    let got = fit_least_squares(&x, &r, 0.0).unwrap();
    for (g, t) in got.as_slice().iter().zip(&w) {
        assert!((g - t).abs() < 1e-10);
    }
}

/// Rank-3 integer matrix `r = u·v` with `u = (1, a, b)`, `v = (c, d, e)`,
/// constructed so every entry lands in `1..=5`.
#[test]
fn als_fits_planted_rank_three_matrix() {
    let users: Vec<[f64; 3]> = (0..12).map(|i| [1.0, (i % 2) as f64, ((i / 2) % 2) as f64]).collect();
    let items: Vec<[f64; 3]> = (0..15)
        .map(|j| [1.0 + (j % 3) as f64, ((j / 3) % 2) as f64, ((j / 6) % 2) as f64])
        .collect();
    let mut triples = Vec::new();
    for (u, uf) in users.iter().enumerate() {
        for (m, mf) in items.iter().enumerate() {
            let r: f64 = uf.iter().zip(mf).map(|(a, b)| a * b).sum();
            assert!((1.0..=5.0).contains(&r));
            triples.push(RatingsTriple {
                user: u as u64,
                item: 100 + m as u64,
                rating: r as u8,
                timestamp: None,
            });
        }
    }
    let f = factorize_ratings(&triples, 3, 0.0, 200, 3).unwrap();
    assert!(f.rmse(&triples) < 1e-3, "rmse {}", f.rmse(&triples));
    assert_eq!(f.item_factors.len(), items.len());
    assert_eq!(f.item_index(100), Some(0));
}
