//! Aggregation of correlated information sources.
//!
//! Sources `ξ^i_t = σ_i X t + B^i_t` with noise correlation `ρ` carry exactly
//! the same information about `X` as the single process
//! `ξ_t = Σ_i w_i ξ^i_t = σ X t + B_t`, where
//!
//! ```text
//! σ² = σᵀ ρ⁻¹ σ,      w = ρ⁻¹ σ / σ
//! ```
//!
//! The effective noise `B = Σ w_i B^i` is a standard Brownian motion because
//! `wᵀ ρ w = 1`. The gradient `∂σ/∂σ_k` equals `w_k`, so the effective rate
//! rises with `σ_k` exactly where the corresponding weight is positive.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest admissible eigenvalue of the correlation matrix.
pub const MIN_EIGENVALUE: f64 = 1e-10;
const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregationError {
    #[error("need at least one source")]
    Empty,

    #[error("correlation matrix must be {n}x{n}")]
    Shape { n: usize },

    #[error("source rates must be finite and non-negative (source {index}: {value})")]
    InvalidRate { index: usize, value: f64 },

    #[error("correlation matrix must be symmetric with unit diagonal (entry {row},{col})")]
    NotCorrelationMatrix { row: usize, col: usize },

    #[error("sources {row} and {col} are perfectly correlated (rho = {rho})")]
    PerfectCorrelation { row: usize, col: usize, rho: f64 },

    #[error("correlation matrix is not positive definite (smallest eigenvalue {min_eigenvalue})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
}

/// A validated set of information sources.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSet {
    rates: DVector<f64>,
    correlation: DMatrix<f64>,
}

impl SourceSet {
    pub fn new(rates: Vec<f64>, correlation: Vec<Vec<f64>>) -> Result<Self, AggregationError> {
        let n = rates.len();
        if n == 0 {
            return Err(AggregationError::Empty);
        }
        if correlation.len() != n || correlation.iter().any(|r| r.len() != n) {
            return Err(AggregationError::Shape { n });
        }
        for (index, &value) in rates.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(AggregationError::InvalidRate { index, value });
            }
        }
        for (row, values) in correlation.iter().enumerate() {
            for (col, &r) in values.iter().enumerate() {
                let ok = if row == col {
                    (r - 1.0).abs() <= SYMMETRY_TOLERANCE
                } else {
                    r.is_finite() && (r - correlation[col][row]).abs() <= SYMMETRY_TOLERANCE
                };
                if !ok {
                    return Err(AggregationError::NotCorrelationMatrix { row, col });
                }
                if row != col && r.abs() >= 1.0 {
                    return Err(AggregationError::PerfectCorrelation { row, col, rho: r });
                }
            }
        }
        let correlation = DMatrix::from_fn(n, n, |i, j| correlation[i][j]);
        let min_eigenvalue = correlation
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if !(min_eigenvalue > MIN_EIGENVALUE) {
            return Err(AggregationError::NotPositiveDefinite { min_eigenvalue });
        }
        Ok(SourceSet {
            rates: DVector::from_vec(rates),
            correlation,
        })
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn rates(&self) -> &[f64] {
        self.rates.as_slice()
    }

    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        self.correlation[(i, j)]
    }
}

/// The single information process equivalent to a set of sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveChannel {
    pub sigma: f64,
    /// `B_t = Σ w_i B^i_t`; also `ξ_t = Σ w_i ξ^i_t`.
    pub noise_weights: Vec<f64>,
}

impl EffectiveChannel {
    /// `∂σ/∂σ_k` for every source.
    pub fn rate_sensitivity(&self) -> &[f64] {
        &self.noise_weights
    }

    /// Whether raising source `k`'s rate raises the effective rate.
    pub fn increases_with(&self, k: usize) -> bool {
        self.noise_weights.get(k).is_some_and(|&w| w > 0.0)
    }

    /// Combines observed source values into the effective process value.
    pub fn combine(&self, source_values: &[f64]) -> f64 {
        self.noise_weights
            .iter()
            .zip(source_values)
            .map(|(w, v)| w * v)
            .sum()
    }
}

/// Two sources, by splitting the second into the part explained by the first
/// and an independent remainder with rate `σ̄ = (σ₂ − ρσ₁)/√(1−ρ²)`.
pub fn aggregate_two(
    sigma1: f64,
    sigma2: f64,
    rho: f64,
) -> Result<EffectiveChannel, AggregationError> {
    for (index, value) in [(0, sigma1), (1, sigma2)] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(AggregationError::InvalidRate { index, value });
        }
    }
    if !(rho.abs() < 1.0) {
        return Err(AggregationError::PerfectCorrelation {
            row: 0,
            col: 1,
            rho,
        });
    }
    let root = (1.0 - rho * rho).sqrt();
    let sigma_bar = (sigma2 - rho * sigma1) / root;
    let sigma = (sigma1 * sigma1 + sigma_bar * sigma_bar).sqrt();
    if sigma == 0.0 {
        return Ok(EffectiveChannel {
            sigma,
            noise_weights: vec![1.0, 0.0],
        });
    }
    // B = (σ₁B¹ + σ̄B̄)/σ with B̄ = (B² − ρB¹)/√(1−ρ²)
    let w2 = sigma_bar / (root * sigma);
    let w1 = sigma1 / sigma - rho * w2;
    Ok(EffectiveChannel {
        sigma,
        noise_weights: vec![w1, w2],
    })
}

/// General case: `σ² = σᵀρ⁻¹σ`, `w = ρ⁻¹σ/σ`.
pub fn aggregate_n(sources: &SourceSet) -> Result<EffectiveChannel, AggregationError> {
    let n = sources.len();
    let chol =
        sources
            .correlation
            .clone()
            .cholesky()
            .ok_or(AggregationError::NotPositiveDefinite {
                min_eigenvalue: 0.0,
            })?;
    let precision_rates = chol.solve(&sources.rates);
    let sigma = sources.rates.dot(&precision_rates).max(0.0).sqrt();
    if sigma == 0.0 {
        let mut noise_weights = vec![0.0; n];
        noise_weights[0] = 1.0;
        return Ok(EffectiveChannel {
            sigma,
            noise_weights,
        });
    }
    Ok(EffectiveChannel {
        sigma,
        noise_weights: precision_rates.iter().map(|v| v / sigma).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn quad_form(w: &[f64], rho: &[Vec<f64>]) -> f64 {
        let mut s = 0.0;
        for i in 0..w.len() {
            for j in 0..w.len() {
                s += w[i] * rho[i][j] * w[j];
            }
        }
        s
    }

    #[test]
    fn independent_equal_sources_add_in_quadrature() {
        let c = aggregate_two(1.0, 1.0, 0.0).unwrap();
        assert!((c.sigma - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn highly_correlated_pair() {
        let c = aggregate_two(1.0, 1.0, 0.99).unwrap();
        let want = 2.0 * (1.0 - 0.99) / (1.0 - 0.99 * 0.99);
        assert!((c.sigma * c.sigma - want).abs() < 1e-12);
        assert!((c.sigma * c.sigma - 1.005).abs() < 1e-3);
    }

    #[test]
    fn redundant_second_source_adds_nothing() {
        let c = aggregate_two(1.7, 0.3 * 1.7, 0.3).unwrap();
        assert!((c.sigma - 1.7).abs() < 1e-14);
    }

    #[test]
    fn pair_rejects_perfect_correlation() {
        assert!(matches!(
            aggregate_two(1.0, 1.0, 1.0),
            Err(AggregationError::PerfectCorrelation { .. })
        ));
        assert!(matches!(
            SourceSet::new(vec![1.0, 1.0], vec![vec![1.0, -1.0], vec![-1.0, 1.0]]),
            Err(AggregationError::PerfectCorrelation { .. })
        ));
    }

    #[test]
    fn identity_correlation_three_four_five() {
        let s = SourceSet::new(vec![3.0, 4.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(aggregate_n(&s).unwrap().sigma, 5.0);
    }

    #[test]
    fn diagonal_correlation_sums_squares() {
        let rates = vec![0.5, 1.5, 2.0, 0.25];
        let rho = (0..4)
            .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let c = aggregate_n(&SourceSet::new(rates.clone(), rho).unwrap()).unwrap();
        let want: f64 = rates.iter().map(|r| r * r).sum();
        assert!((c.sigma * c.sigma - want).abs() < 1e-14);
    }

    #[test]
    fn rejects_malformed_matrices() {
        assert!(matches!(
            SourceSet::new(vec![1.0, 1.0], vec![vec![1.0, 0.2], vec![0.3, 1.0]]),
            Err(AggregationError::NotCorrelationMatrix { .. })
        ));
        assert!(matches!(
            SourceSet::new(vec![1.0, 1.0], vec![vec![1.0, 0.2]]),
            Err(AggregationError::Shape { .. })
        ));
        // pairwise fine, jointly indefinite
        let rho = vec![
            vec![1.0, 0.9, -0.9],
            vec![0.9, 1.0, 0.9],
            vec![-0.9, 0.9, 1.0],
        ];
        assert!(matches!(
            SourceSet::new(vec![1.0; 3], rho),
            Err(AggregationError::NotPositiveDefinite { .. })
        ));
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
        // Normalized Gram matrix of random vectors plus a ridge.
        let vecs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n + 2).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let mut g = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                g[i][j] = vecs[i]
                    .iter()
                    .zip(&vecs[j])
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
            }
            g[i][i] += 0.5;
        }
        let d: Vec<f64> = (0..n).map(|i| g[i][i].sqrt()).collect();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 1.0 } else { g[i][j] / (d[i] * d[j]) })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let rho = random_spd(&mut rng, 3);
            let rates: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..2.0)).collect();
            let c = aggregate_n(&SourceSet::new(rates.clone(), rho.clone()).unwrap()).unwrap();
            for k in 0..3 {
                let h = 1e-6;
                let mut up = rates.clone();
                up[k] += h;
                let mut down = rates.clone();
                down[k] -= h;
                let s_up = aggregate_n(&SourceSet::new(up, rho.clone()).unwrap())
                    .unwrap()
                    .sigma;
                let s_dn = aggregate_n(&SourceSet::new(down, rho.clone()).unwrap())
                    .unwrap()
                    .sigma;
                let fd = (s_up - s_dn) / (2.0 * h);
                assert!((fd - c.rate_sensitivity()[k]).abs() < 1e-6);
                if c.increases_with(k) {
                    assert!(s_up > c.sigma);
                }
            }
        }
    }

    #[test]
    fn pair_posterior_equals_effective_posterior() {
        // Binary X in {0, 1}; compare the Bayes posterior from the two
        // correlated observations against the single effective process.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (s1, s2, rho, p0) = (0.8, 1.3, 0.4, 0.35);
        let c = aggregate_two(s1, s2, rho).unwrap();
        let inv_det = 1.0 / (1.0 - rho * rho);
        for _ in 0..200 {
            let t: f64 = rng.random_range(0.1..3.0);
            let x = if rng.random::<f64>() < p0 { 0.0 } else { 1.0 };
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let b1 = t.sqrt() * z1;
            let b2 = t.sqrt() * (rho * z1 + (1.0 - rho * rho).sqrt() * z2);
            let xi1 = s1 * x * t + b1;
            let xi2 = s2 * x * t + b2;

            let loglik2 = |xv: f64| {
                let (d1, d2) = (xi1 - s1 * xv * t, xi2 - s2 * xv * t);
                -(d1 * d1 - 2.0 * rho * d1 * d2 + d2 * d2) * inv_det / (2.0 * t)
            };
            let (a, b) = (p0.ln() + loglik2(0.0), (1.0 - p0).ln() + loglik2(1.0));
            let joint = 1.0 / (1.0 + (b - a).exp());

            let xi = c.combine(&[xi1, xi2]);
            let loglik1 = |xv: f64| -(xi - c.sigma * xv * t).powi(2) / (2.0 * t);
            let (a, b) = (p0.ln() + loglik1(0.0), (1.0 - p0).ln() + loglik1(1.0));
            let single = 1.0 / (1.0 + (b - a).exp());
            assert!((joint - single).abs() < 1e-10, "{joint} vs {single}");
        }
    }

    proptest! {
        #[test]
        fn pair_formula_agrees_with_quadratic_form(s1 in 0.0f64..5.0, s2 in 0.0f64..5.0, rho in -0.98f64..0.98) {
            let pair = aggregate_two(s1, s2, rho).unwrap();
            let m = vec![vec![1.0, rho], vec![rho, 1.0]];
            let general = aggregate_n(&SourceSet::new(vec![s1, s2], m.clone()).unwrap()).unwrap();
            let closed = (s1 * s1 + s2 * s2 - 2.0 * rho * s1 * s2) / (1.0 - rho * rho);
            prop_assert!((pair.sigma - general.sigma).abs() < 1e-12 * (1.0 + pair.sigma));
            prop_assert!((pair.sigma * pair.sigma - closed).abs() < 1e-10 * (1.0 + closed));
            if general.sigma > 0.0 {
                prop_assert!((quad_form(&general.noise_weights, &m) - 1.0).abs() < 1e-10);
                let signal: f64 = general.noise_weights.iter().zip([s1, s2]).map(|(w, s)| w * s).sum();
                prop_assert!((signal - general.sigma).abs() < 1e-10);
                for (a, b) in pair.noise_weights.iter().zip(&general.noise_weights) {
                    prop_assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }
}
