//! Strategy analytics: dead zones, maximal attainable support and parameter
//! sweeps over the information flow rate, current polls and positions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ElectionModel, InfoSchedule, ModelError};
use crate::outcome::{ordering_partition, outcome_from_partition};
use crate::roots::{bisect, bisect_boundary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("candidate index {index} out of range for {n} candidates")]
    CandidateOutOfRange { index: usize, n: usize },

    #[error("this analysis needs exactly three candidates, got {0}")]
    RequiresThreeCandidates(usize),

    #[error("candidate {0} has zero support; the rate bound is undefined")]
    ZeroPrior(usize),

    #[error("candidate {0} is not an interior candidate")]
    NotInteriorCandidate(usize),

    #[error("no supported candidate on one side of candidate {0}; the optimum is at infinity")]
    NoBracket(usize),

    #[error("variant {index} has {len} positions, expected {expected}")]
    VariantLength {
        index: usize,
        len: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeadZoneMethod {
    /// No cell of the ordering partition ranks the candidate first.
    DirectThreshold,
    /// The rate sits below the closed-form bound for the centre candidate.
    ClosedFormBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeadZoneReport {
    pub candidate: usize,
    pub is_dead: bool,
    /// Largest constant rate below which the centre of three candidates can
    /// never win; only filled in for that configuration.
    pub sigma_bound: Option<f64>,
    pub method: DeadZoneMethod,
}

/// Whether candidate `k` is ranked first on no part of the signal line.
pub fn is_dead_zone(model: &ElectionModel, k: usize) -> Result<DeadZoneReport, StrategyError> {
    check_index(model, k)?;
    let is_dead = !ordering_partition(model).can_win(k);
    Ok(DeadZoneReport {
        candidate: k,
        is_dead,
        sigma_bound: centre_bound(model, k)?,
        method: DeadZoneMethod::DirectThreshold,
    })
}

/// Dead-zone verdict for the centre of three candidates from the rate bound
/// alone.
pub fn dead_zone_by_bound(model: &ElectionModel) -> Result<DeadZoneReport, StrategyError> {
    let n = model.num_candidates();
    if n != 3 {
        return Err(StrategyError::RequiresThreeCandidates(n));
    }
    let sigma = model.schedule().constant_rate();
    let bound = dead_zone_sigma_bound(model.positions(), model.priors(), model.horizon())?;
    let is_dead = match (sigma, bound.closed_form) {
        (Some(s), Some(b)) => s < b,
        _ => false,
    };
    Ok(DeadZoneReport {
        candidate: 1,
        is_dead,
        sigma_bound: bound.sigma,
        method: DeadZoneMethod::ClosedFormBound,
    })
}

fn centre_bound(model: &ElectionModel, k: usize) -> Result<Option<f64>, StrategyError> {
    if model.num_candidates() != 3 || k != 1 || model.schedule().constant_rate().is_none() {
        return Ok(None);
    }
    if model.priors().contains(&0.0) {
        return Ok(None);
    }
    Ok(dead_zone_sigma_bound(model.positions(), model.priors(), model.horizon())?.sigma)
}

/// Rate bound for the centre-candidate dead zone, computed two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeadZoneBound {
    /// Supremum of the rates at which `z_12 > z_31 > z_23`, found by
    /// bisection on the threshold ordering itself. `None` if no rate works.
    pub sigma: Option<f64>,
    /// The same bound from the closed-form expression in the gaps
    /// `ω_ij = x_j − x_i`.
    pub closed_form: Option<f64>,
}

/// Bound on a constant information flow rate below which the centre of
/// three candidates has zero probability of winning.
pub fn dead_zone_sigma_bound(
    positions: &[f64],
    priors: &[f64],
    horizon: f64,
) -> Result<DeadZoneBound, StrategyError> {
    if positions.len() != 3 || priors.len() != 3 {
        return Err(StrategyError::RequiresThreeCandidates(positions.len()));
    }
    if let Some(i) = priors.iter().position(|&p| p == 0.0) {
        return Err(StrategyError::ZeroPrior(i));
    }
    let model =
        ElectionModel::with_constant_rate(positions.to_vec(), priors.to_vec(), horizon, 1.0)?;
    let (x, p, t) = (model.positions(), model.priors(), model.horizon());

    let z = |sigma: f64, k: usize, j: usize| {
        (p[j] / p[k]).ln() / (sigma * (x[k] - x[j])) + 0.5 * sigma * (x[k] + x[j]) * t
    };
    let dead = |sigma: f64| {
        let (z12, z31, z23) = (z(sigma, 0, 1), z(sigma, 2, 0), z(sigma, 1, 2));
        z12 > z31 && z31 > z23
    };

    let lo = 1e-9;
    let sigma = if dead(lo) {
        let mut hi = 1e3;
        while dead(hi) && hi < 1e150 {
            hi *= 2.0;
        }
        Some(bisect_boundary(dead, lo, hi, 0.0))
    } else {
        None
    };

    let w = |i: usize, j: usize| x[j] - x[i];
    let prefactor = 2.0 / (w(0, 1) * w(1, 2) * w(2, 0) * t);
    let first = w(0, 1) * (p[0] / p[2]).ln() - w(0, 2) * (p[0] / p[1]).ln();
    let second = w(2, 1) * (p[0] / p[2]).ln() - w(0, 2) * (p[2] / p[1]).ln();
    let squared = prefactor * first.min(second);
    let closed_form = (squared > 0.0).then(|| squared.sqrt());

    Ok(DeadZoneBound { sigma, closed_form })
}

/// Where an interior candidate's election-day support peaks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxSupportReport {
    pub candidate: usize,
    /// Maximizing terminal signal (accumulated-signal units); `±inf` for a
    /// candidate with nobody supported beyond it.
    pub y_star: f64,
    /// `y_star / σ` for constant schedules.
    pub xi_star: Option<f64>,
    pub pi_max: f64,
    /// `|Σ_j π_j (x_j − x_k)|` at `y_star`.
    pub residual: f64,
}

/// Solves `Σ_j (x_j − x_k) p_j exp(x_j y − ½ x_j² V) = 0` for an interior
/// candidate `k`. The equation is divided through by the normalizer, which
/// turns it into `x̄(y) = x_k` with `x̄` the posterior mean label; `x̄` is
/// increasing in `y`, so the root is unique.
pub fn max_support_point(
    model: &ElectionModel,
    k: usize,
) -> Result<MaxSupportReport, StrategyError> {
    let n = check_index(model, k)?;
    if k == 0 || k == n - 1 {
        return Err(StrategyError::NotInteriorCandidate(k));
    }
    let p = model.priors();
    if !p[..k].iter().any(|&v| v > 0.0) || !p[k + 1..].iter().any(|&v| v > 0.0) {
        return Err(StrategyError::NoBracket(k));
    }
    let x = model.positions();
    let v = model.terminal_variance();
    let xk = x[k];
    let g = |y: f64| -> f64 {
        model
            .support_at(y, v)
            .iter()
            .zip(x)
            .map(|(pi, xj)| pi * (xj - xk))
            .sum()
    };

    let min_p = p.iter().copied().filter(|&q| q > 0.0).fold(1.0, f64::min);
    let max_x2 = x.iter().map(|xi| xi * xi).fold(0.0, f64::max);
    let reach = 10.0 * (min_p.ln().abs() + max_x2 * v).max(1.0);
    let (mut lo, mut hi) = (-reach, reach);
    let mut tries = 0;
    while g(lo) >= 0.0 || g(hi) <= 0.0 {
        tries += 1;
        if tries > 60 {
            return Err(StrategyError::NoBracket(k));
        }
        lo *= 2.0;
        hi *= 2.0;
    }
    let y_star = bisect(g, lo, hi, 0.0);
    let support = model.support_at(y_star, v);
    Ok(MaxSupportReport {
        candidate: k,
        y_star,
        xi_star: model.schedule().constant_rate().map(|s| y_star / s),
        pi_max: support[k],
        residual: g(y_star).abs(),
    })
}

/// Maximal attainable election-day support for any candidate. Candidates
/// with no supported rival on one side approach full support at infinity.
pub fn max_attainable_support(
    model: &ElectionModel,
    k: usize,
) -> Result<MaxSupportReport, StrategyError> {
    let n = check_index(model, k)?;
    let p = model.priors();
    let left = p[..k].iter().any(|&v| v > 0.0);
    let right = p[k + 1..].iter().any(|&v| v > 0.0);
    if left && right {
        return max_support_point(model, k);
    }
    let _ = n;
    let y_star = match (left, right) {
        (false, false) => 0.0,
        (false, true) => f64::NEG_INFINITY,
        _ => f64::INFINITY,
    };
    Ok(MaxSupportReport {
        candidate: k,
        y_star,
        xi_star: model.schedule().constant_rate().map(|s| y_star / s),
        pi_max: if p[k] > 0.0 { 1.0 } else { 0.0 },
        residual: 0.0,
    })
}

fn check_index(model: &ElectionModel, k: usize) -> Result<usize, StrategyError> {
    let n = model.num_candidates();
    if k >= n {
        return Err(StrategyError::CandidateOutOfRange { index: k, n });
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    WinProbability,
    WinProbabilityGain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Grid coordinates, matching [`SweepTable::parameters`].
    pub params: Vec<f64>,
    /// One entry per candidate.
    pub values: Vec<f64>,
    /// Candidates that are ranked first nowhere at this grid point. Empty
    /// for gain sweeps.
    pub cannot_win: Vec<bool>,
}

/// Win probabilities (or their changes) over a parameter grid, in grid
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub kind: SweepKind,
    pub parameters: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Grid points at which `candidate` has identically zero win probability.
    pub fn zero_mask(&self, candidate: usize) -> Vec<bool> {
        self.rows
            .iter()
            .map(|r| r.cannot_win.get(candidate).copied().unwrap_or(false))
            .collect()
    }

    pub fn column(&self, candidate: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.values[candidate]).collect()
    }
}

/// `0.05, 0.10, …, 3.00`.
pub fn default_sigma_grid() -> Vec<f64> {
    (1..=60).map(|i| i as f64 * 0.05).collect()
}

/// All prior vectors on the simplex with coordinates `i / divisions`,
/// keeping those whose every entry is at least `min_prior`. Ordered
/// lexicographically by `p_1`, then `p_2`, and so on.
pub fn simplex_grid(n: usize, divisions: usize, min_prior: f64) -> Vec<Vec<f64>> {
    fn fill(n: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            fill(n, left - c, prefix, out);
            prefix.pop();
        }
    }
    if n == 0 || divisions == 0 {
        return Vec::new();
    }
    let mut counts = Vec::new();
    fill(n, divisions, &mut Vec::with_capacity(n), &mut counts);
    let d = divisions as f64;
    counts
        .into_iter()
        .map(|c| c.into_iter().map(|k| k as f64 / d).collect::<Vec<f64>>())
        .filter(|p| p.iter().all(|&v| v >= min_prior - 1e-12))
        .collect()
}

fn win_row(model: &ElectionModel, params: Vec<f64>) -> SweepRow {
    let partition = ordering_partition(model);
    let out = outcome_from_partition(model, &partition);
    let cannot_win = (0..model.num_candidates())
        .map(|k| !partition.can_win(k))
        .collect();
    SweepRow {
        params,
        values: out.win,
        cannot_win,
    }
}

/// Win probabilities at each constant rate in `sigma_grid`.
pub fn sweep_sigma(model: &ElectionModel, sigma_grid: &[f64]) -> Result<SweepTable, StrategyError> {
    let rows = sigma_grid
        .par_iter()
        .map(|&sigma| {
            let m = model.with_schedule(InfoSchedule::Constant(sigma))?;
            Ok(win_row(&m, vec![sigma]))
        })
        .collect::<Result<Vec<_>, StrategyError>>()?;
    Ok(SweepTable {
        kind: SweepKind::WinProbability,
        parameters: vec!["sigma".into()],
        rows,
    })
}

/// Change in win probabilities when positions move from the base model's to
/// each variant, at every rate in `sigma_grid`. Rows are grouped by variant.
pub fn sweep_positions(
    base: &ElectionModel,
    variants: &[Vec<f64>],
    sigma_grid: &[f64],
) -> Result<SweepTable, StrategyError> {
    let n = base.num_candidates();
    for (index, v) in variants.iter().enumerate() {
        if v.len() != n {
            return Err(StrategyError::VariantLength {
                index,
                len: v.len(),
                expected: n,
            });
        }
        base.with_positions(v.clone())?;
    }
    let points: Vec<(usize, f64)> = (0..variants.len())
        .flat_map(|i| sigma_grid.iter().map(move |&s| (i, s)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(i, sigma)| {
            let schedule = InfoSchedule::Constant(sigma);
            let reference =
                crate::outcome::win_probabilities(&base.with_schedule(schedule.clone())?);
            let moved = ElectionModel::new(
                variants[i].clone(),
                base.priors().to_vec(),
                base.horizon(),
                schedule,
            )?;
            let shifted = crate::outcome::win_probabilities(&moved);
            Ok(SweepRow {
                params: vec![i as f64, sigma],
                values: shifted
                    .win
                    .iter()
                    .zip(&reference.win)
                    .map(|(a, b)| a - b)
                    .collect(),
                cannot_win: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>, StrategyError>>()?;
    Ok(SweepTable {
        kind: SweepKind::WinProbabilityGain,
        parameters: vec!["variant".into(), "sigma".into()],
        rows,
    })
}

/// Win probabilities over a grid of current polls, for each rate in
/// `sigmas`. Rows are grouped by rate, then follow `grid` order.
pub fn sweep_priors(
    positions: &[f64],
    horizon: f64,
    sigmas: &[f64],
    grid: &[Vec<f64>],
) -> Result<SweepTable, StrategyError> {
    let n = positions.len();
    let points: Vec<(f64, &Vec<f64>)> = sigmas
        .iter()
        .flat_map(|&s| grid.iter().map(move |p| (s, p)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(sigma, priors)| {
            let m = ElectionModel::with_constant_rate(
                positions.to_vec(),
                priors.clone(),
                horizon,
                sigma,
            )?;
            let mut params = priors.clone();
            params.push(sigma);
            Ok(win_row(&m, params))
        })
        .collect::<Result<Vec<_>, StrategyError>>()?;
    let mut parameters: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
    parameters.push("sigma".into());
    Ok(SweepTable {
        kind: SweepKind::WinProbability,
        parameters,
        rows,
    })
}
