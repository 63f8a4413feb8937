//! Estimating the information flow rate, either from the volatility of a
//! poll series or by inverting a target win probability.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ElectionModel, InfoSchedule, ModelError};
use crate::outcome::win_probabilities;
use crate::roots::{bisect, bisect_boundary};

/// Rows of a poll series must sum to one within this.
pub const SUPPORT_SUM_TOLERANCE: f64 = 1e-6;

/// Scan range and resolution for [`implied_sigma`].
pub const IMPLIED_SIGMA_MIN: f64 = 1e-4;
pub const IMPLIED_SIGMA_MAX: f64 = 1e3;
pub const IMPLIED_SIGMA_SCAN_POINTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("need at least 3 observations, got {0}")]
    TooFewObservations(usize),

    #[error("observation times must be strictly increasing (row {row})")]
    NonIncreasingTimes { row: usize },

    #[error("row {row} has {len} support values, expected {expected}")]
    ShapeMismatch {
        row: usize,
        len: usize,
        expected: usize,
    },

    #[error("row {row} is not a probability vector")]
    InvalidSupport { row: usize },

    #[error("candidate index {index} out of range for {n} candidates")]
    CandidateOutOfRange { index: usize, n: usize },

    #[error("target probability {0} is outside [0, 1]")]
    InvalidTarget(f64),

    #[error(
        "target {target} is not attained for sigma in [{}, {}]; scanned range is [{min}, {max}]",
        IMPLIED_SIGMA_MIN,
        IMPLIED_SIGMA_MAX
    )]
    Unattainable { target: f64, min: f64, max: f64 },
}

/// Observed support rates over time, treated as exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PollSeries {
    times: Vec<f64>,
    supports: Vec<Vec<f64>>,
    positions: Vec<f64>,
}

impl PollSeries {
    pub fn new(
        times: Vec<f64>,
        supports: Vec<Vec<f64>>,
        positions: Vec<f64>,
    ) -> Result<Self, CalibrationError> {
        if times.len() < 3 {
            return Err(CalibrationError::TooFewObservations(times.len()));
        }
        if supports.len() != times.len() {
            return Err(CalibrationError::ShapeMismatch {
                row: supports.len().min(times.len()),
                len: 0,
                expected: positions.len(),
            });
        }
        if !times.iter().all(|t| t.is_finite()) {
            return Err(CalibrationError::NonIncreasingTimes { row: 0 });
        }
        if let Some(row) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(CalibrationError::NonIncreasingTimes { row: row + 1 });
        }
        for (row, s) in supports.iter().enumerate() {
            if s.len() != positions.len() {
                return Err(CalibrationError::ShapeMismatch {
                    row,
                    len: s.len(),
                    expected: positions.len(),
                });
            }
            let sum: f64 = s.iter().sum();
            if s.iter().any(|&v| !(0.0..=1.0).contains(&v))
                || (sum - 1.0).abs() > SUPPORT_SUM_TOLERANCE
            {
                return Err(CalibrationError::InvalidSupport { row });
            }
        }
        Ok(PollSeries {
            times,
            supports,
            positions,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn supports(&self) -> &[Vec<f64>] {
        &self.supports
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoricEstimate {
    pub sigma: f64,
    /// `σ̂ / √(2 n_eff)`.
    pub std_error: f64,
    pub n_increments: usize,
    /// `(Σ d_s)² / Σ d_s²` for the per-step loadings `d_s`.
    pub effective_increments: f64,
    /// Set when the supports never move, in which case `sigma` is 0.
    pub degenerate: bool,
}

/// Quadratic variation of the supports normalized by the loading
/// `Σ_i π_i² (x_i − x̄)² Δt`, with the loading taken at the start of each
/// step.
pub fn estimate_sigma_historic(series: &PollSeries) -> HistoricEstimate {
    let x = &series.positions;
    let mut qv = 0.0;
    let mut loads = Vec::with_capacity(series.len() - 1);
    for s in 0..series.len() - 1 {
        let (a, b) = (&series.supports[s], &series.supports[s + 1]);
        let dt = series.times[s + 1] - series.times[s];
        qv += a.iter().zip(b).map(|(u, v)| (v - u) * (v - u)).sum::<f64>();
        let mean: f64 = a.iter().zip(x).map(|(p, xi)| p * xi).sum();
        loads.push(
            a.iter()
                .zip(x)
                .map(|(p, xi)| (p * (xi - mean)).powi(2))
                .sum::<f64>()
                * dt,
        );
    }
    let total: f64 = loads.iter().sum();
    let total_sq: f64 = loads.iter().map(|d| d * d).sum();
    let n_eff = if total_sq > 0.0 {
        total * total / total_sq
    } else {
        0.0
    };
    if qv == 0.0 || total == 0.0 {
        return HistoricEstimate {
            sigma: 0.0,
            std_error: 0.0,
            n_increments: loads.len(),
            effective_increments: n_eff,
            degenerate: true,
        };
    }
    let sigma = (qv / total).sqrt();
    HistoricEstimate {
        sigma,
        std_error: sigma / (2.0 * n_eff).sqrt(),
        n_increments: loads.len(),
        effective_increments: n_eff,
        degenerate: false,
    }
}

/// An interval of rates on which the win probability equals the target
/// exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpliedSigma {
    /// Every rate found, ascending. A plateau contributes its upper end.
    pub solutions: Vec<f64>,
    pub plateaus: Vec<Plateau>,
}

impl ImpliedSigma {
    /// Whether `sigma` is within `tol` of a solution or inside a plateau.
    pub fn contains(&self, sigma: f64, tol: f64) -> bool {
        self.solutions.iter().any(|s| (s - sigma).abs() <= tol)
            || self
                .plateaus
                .iter()
                .any(|p| p.lower - tol <= sigma && sigma <= p.upper + tol)
    }
}

/// Constant rates at which `candidate` wins with probability `target`,
/// keeping the positions, polls and horizon of `skeleton`. The win
/// probability need not be monotone in the rate, so the scan reports every
/// crossing it finds.
pub fn implied_sigma(
    skeleton: &ElectionModel,
    candidate: usize,
    target: f64,
) -> Result<ImpliedSigma, CalibrationError> {
    let n = skeleton.num_candidates();
    if candidate >= n {
        return Err(CalibrationError::CandidateOutOfRange {
            index: candidate,
            n,
        });
    }
    if !(0.0..=1.0).contains(&target) {
        return Err(CalibrationError::InvalidTarget(target));
    }
    let win = |sigma: f64| -> f64 {
        let m = skeleton
            .with_schedule(InfoSchedule::Constant(sigma))
            .expect("positive finite rate");
        win_probabilities(&m).win[candidate]
    };
    let gap = |sigma: f64| win(sigma) - target;
    let at_target = |sigma: f64| gap(sigma) == 0.0;

    let steps = (IMPLIED_SIGMA_SCAN_POINTS - 1) as f64;
    let span = (IMPLIED_SIGMA_MAX / IMPLIED_SIGMA_MIN).ln();
    let grid: Vec<f64> = (0..IMPLIED_SIGMA_SCAN_POINTS)
        .map(|j| IMPLIED_SIGMA_MIN * (span * j as f64 / steps).exp())
        .collect();
    let values: Vec<f64> = grid.par_iter().map(|&s| win(s)).collect();
    let gaps: Vec<f64> = values.iter().map(|v| v - target).collect();

    let mut solutions = Vec::new();
    let mut plateaus = Vec::new();
    let mut j = 0;
    while j < grid.len() {
        if gaps[j] == 0.0 {
            let start = j;
            while j + 1 < grid.len() && gaps[j + 1] == 0.0 {
                j += 1;
            }
            let lower = if start == 0 {
                grid[0]
            } else {
                bisect_boundary(|s| !at_target(s), grid[start - 1], grid[start], 0.0)
            };
            let upper = if j + 1 == grid.len() {
                grid[j]
            } else {
                bisect_boundary(at_target, grid[j], grid[j + 1], 0.0)
            };
            if upper - lower > 1e-8 * upper {
                plateaus.push(Plateau { lower, upper });
            }
            solutions.push(upper);
        } else if j + 1 < grid.len()
            && gaps[j + 1] != 0.0
            && gaps[j].signum() != gaps[j + 1].signum()
        {
            solutions.push(bisect(gap, grid[j], grid[j + 1], 0.0));
        }
        j += 1;
    }

    if solutions.is_empty() {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Err(CalibrationError::Unattainable { target, min, max });
    }
    Ok(ImpliedSigma {
        solutions,
        plateaus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::{posterior_paths, simulate_paths};
    use crate::strategy::dead_zone_sigma_bound;

    fn three_way(sigma: f64) -> ElectionModel {
        ElectionModel::with_constant_rate(vec![1.0, 2.0, 3.0], vec![0.38, 0.26, 0.36], 1.0, sigma)
            .unwrap()
    }

    fn simulated_series(sigma: f64, seed: u64) -> PollSeries {
        let m = three_way(sigma);
        let e = simulate_paths(&m, 1, 10_000, seed).unwrap();
        let b = posterior_paths(&e, &m).unwrap();
        PollSeries::new(
            e.times.clone(),
            b.support[0].clone(),
            m.positions().to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn series_validation() {
        let x = vec![1.0, 2.0];
        let row = vec![0.5, 0.5];
        assert!(matches!(
            PollSeries::new(vec![0.0, 1.0], vec![row.clone(); 2], x.clone()),
            Err(CalibrationError::TooFewObservations(2))
        ));
        assert!(matches!(
            PollSeries::new(vec![0.0, 1.0, 1.0], vec![row.clone(); 3], x.clone()),
            Err(CalibrationError::NonIncreasingTimes { row: 2 })
        ));
        assert!(matches!(
            PollSeries::new(
                vec![0.0, 1.0, 2.0],
                vec![row.clone(), vec![0.6, 0.5], row.clone()],
                x.clone()
            ),
            Err(CalibrationError::InvalidSupport { row: 1 })
        ));
        assert!(PollSeries::new(
            vec![0.0, 1.0, 2.0],
            vec![row.clone(), vec![0.6, 0.4 + 5e-7], row],
            x
        )
        .is_ok());
    }

    #[test]
    fn constant_series_is_degenerate() {
        let s =
            PollSeries::new(vec![0.0, 0.5, 1.0], vec![vec![0.3, 0.7]; 3], vec![0.0, 1.0]).unwrap();
        let e = estimate_sigma_historic(&s);
        assert_eq!(e.sigma, 0.0);
        assert!(e.degenerate);
    }

    #[test]
    fn recovers_simulated_rate() {
        let e = estimate_sigma_historic(&simulated_series(1.0, 1));
        assert!((0.95..=1.05).contains(&e.sigma), "sigma = {}", e.sigma);
        assert!(e.std_error > 0.0 && e.std_error < 0.05);
        let e = estimate_sigma_historic(&simulated_series(0.25, 2));
        assert!((0.2375..=0.2625).contains(&e.sigma), "sigma = {}", e.sigma);
    }

    #[test]
    fn two_candidate_inversion() {
        let m =
            ElectionModel::with_constant_rate(vec![0.0, 1.0], vec![0.55, 0.45], 1.0 / 52.0, 1.0)
                .unwrap();
        let r = implied_sigma(&m, 0, 0.8868).unwrap();
        assert_eq!(r.solutions.len(), 1);
        assert!((r.solutions[0] - 1.2).abs() < 0.01, "{:?}", r.solutions);
        // the large-rate limit is the poll itself; in floating point it is
        // reached exactly at the top of the scan, or not at all
        match implied_sigma(&m, 0, 0.55) {
            Err(CalibrationError::Unattainable { min, .. }) => assert!(min > 0.55),
            Ok(r) => assert!(r.solutions.iter().all(|&s| s > 100.0), "{r:?}"),
            Err(e) => panic!("{e}"),
        }
        assert!(matches!(
            implied_sigma(&m, 0, 0.5),
            Err(CalibrationError::Unattainable { .. })
        ));
        assert!(matches!(
            implied_sigma(&m, 0, 1.5),
            Err(CalibrationError::InvalidTarget(_))
        ));
    }

    #[test]
    fn round_trip() {
        for sigma in [0.3, 0.9, 2.5, 40.0] {
            let target = win_probabilities(&three_way(sigma)).win[0];
            let r = implied_sigma(&three_way(1.0), 0, target).unwrap();
            assert!(r.contains(sigma, 1e-6), "sigma {sigma}: {:?}", r.solutions);
        }
    }

    #[test]
    fn dead_zone_plateau_reports_bound() {
        let bound = dead_zone_sigma_bound(&[1.0, 2.0, 3.0], &[0.38, 0.26, 0.36], 1.0)
            .unwrap()
            .sigma
            .unwrap();
        let r = implied_sigma(&three_way(1.0), 1, 0.0).unwrap();
        assert_eq!(r.plateaus.len(), 1);
        assert_eq!(r.plateaus[0].lower, IMPLIED_SIGMA_MIN);
        assert!((r.plateaus[0].upper - bound).abs() < 1e-9);
        assert!(r.solutions.iter().any(|s| (s - bound).abs() < 1e-9));
    }
}
