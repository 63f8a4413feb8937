//! Seeded Monte Carlo: information paths, support and win-probability
//! trajectories, and a terminal-draw oracle for the closed-form outcome
//! probabilities.
//!
//! Path `i` draws from ChaCha8 seeded with `seed` on stream `i`, so an
//! ensemble is the same whatever the thread count or scheduling.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{argmax_low_index, log_weights, ElectionModel, ModelError};
use crate::outcome::{win_probabilities, Ranking};

/// Minimum ensemble size for [`monte_carlo_win_probabilities`].
pub const MIN_ORACLE_PATHS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("ensemble was generated from a different model")]
    ModelMismatch,

    #[error("need at least {min} paths, got {got}")]
    TooFewPaths { got: usize, min: usize },

    #[error("need at least one time step")]
    NoSteps,
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

fn latent_sampler(model: &ElectionModel) -> WeightedIndex<f64> {
    WeightedIndex::new(model.priors()).expect("priors are a valid probability vector")
}

/// Simulated accumulated-signal paths `Y_t` on an even time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub n_paths: usize,
    pub n_steps: usize,
    pub dt: f64,
    pub seed: u64,
    /// `n_steps + 1` grid times from 0 to the horizon.
    pub times: Vec<f64>,
    /// `V(0, t)` at each grid time.
    pub variances: Vec<f64>,
    /// Sampled candidate index per path.
    pub latent: Vec<usize>,
    /// `signal_paths[i][s]` is `Y` at `times[s]` on path `i`.
    pub signal_paths: Vec<Vec<f64>>,
    model: ElectionModel,
}

impl PathEnsemble {
    pub fn model(&self) -> &ElectionModel {
        &self.model
    }
}

/// Draws `n_paths` signal paths. Each step adds
/// `X·V(t, t+dt) + √V(t, t+dt)·Z`, which is the exact transition for any
/// deterministic rate schedule.
pub fn simulate_paths(
    model: &ElectionModel,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
) -> Result<PathEnsemble, SimulationError> {
    if n_paths == 0 {
        return Err(SimulationError::TooFewPaths { got: 0, min: 1 });
    }
    if n_steps == 0 {
        return Err(SimulationError::NoSteps);
    }
    let horizon = model.horizon();
    let dt = horizon / n_steps as f64;
    let mut times: Vec<f64> = (0..n_steps).map(|s| s as f64 * dt).collect();
    times.push(horizon);
    let step_var: Vec<f64> = times
        .windows(2)
        .map(|w| model.schedule().integrated_variance(w[0], w[1]))
        .collect();
    let variances: Vec<f64> = times
        .iter()
        .map(|&t| model.schedule().integrated_variance(0.0, t))
        .collect();

    let sampler = latent_sampler(model);
    let x = model.positions();
    let (latent, signal_paths): (Vec<usize>, Vec<Vec<f64>>) = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let k = sampler.sample(&mut rng);
            let mut y = 0.0;
            let mut path = Vec::with_capacity(n_steps + 1);
            path.push(y);
            for &v in &step_var {
                let z: f64 = StandardNormal.sample(&mut rng);
                y += x[k] * v + v.sqrt() * z;
                path.push(y);
            }
            (k, path)
        })
        .unzip();

    Ok(PathEnsemble {
        n_paths,
        n_steps,
        dt,
        seed,
        times,
        variances,
        latent,
        signal_paths,
        model: model.clone(),
    })
}

/// Support and, optionally, conditional win-probability trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryBundle {
    pub times: Vec<f64>,
    /// `support[i][s][j]` is `π_j` at `times[s]` on path `i`.
    pub support: Vec<Vec<Vec<f64>>>,
    /// Same layout as `support`.
    pub win_probability: Option<Vec<Vec<Vec<f64>>>>,
}

fn check_model(ensemble: &PathEnsemble, model: &ElectionModel) -> Result<(), SimulationError> {
    if ensemble.model != *model {
        return Err(SimulationError::ModelMismatch);
    }
    Ok(())
}

fn support_path(ensemble: &PathEnsemble, path: &[f64]) -> Vec<Vec<f64>> {
    path.iter()
        .zip(&ensemble.variances)
        .map(|(&y, &v)| ensemble.model.support_at(y, v))
        .collect()
}

/// Support rates along every path, from the closed-form posterior.
pub fn posterior_paths(
    ensemble: &PathEnsemble,
    model: &ElectionModel,
) -> Result<TrajectoryBundle, SimulationError> {
    check_model(ensemble, model)?;
    let support = ensemble
        .signal_paths
        .par_iter()
        .map(|path| support_path(ensemble, path))
        .collect();
    Ok(TrajectoryBundle {
        times: ensemble.times.clone(),
        support,
        win_probability: None,
    })
}

/// Support rates plus the win probabilities conditional on each path's
/// history. On election day the win vector is one-hot on the leader.
pub fn winprob_paths(
    ensemble: &PathEnsemble,
    model: &ElectionModel,
) -> Result<TrajectoryBundle, SimulationError> {
    check_model(ensemble, model)?;
    let n = model.num_candidates();
    let last = ensemble.n_steps;
    let rows = ensemble
        .signal_paths
        .par_iter()
        .map(|path| {
            let support = support_path(ensemble, path);
            let mut wins = Vec::with_capacity(last + 1);
            for (&y, &t) in path[..last].iter().zip(&ensemble.times) {
                let rest = model.condition_on_history(y, t)?;
                wins.push(win_probabilities(&rest).win);
            }
            let mut one_hot = vec![0.0; n];
            one_hot[argmax_low_index(&support[last])] = 1.0;
            wins.push(one_hot);
            Ok((support, wins))
        })
        .collect::<Result<Vec<_>, SimulationError>>()?;
    let (support, wins) = rows.into_iter().unzip();
    Ok(TrajectoryBundle {
        times: ensemble.times.clone(),
        support,
        win_probability: Some(wins),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimate {
    pub count: u64,
    pub frequency: f64,
    /// `√(f(1−f)/n)`.
    pub std_error: f64,
}

impl FrequencyEstimate {
    fn new(count: u64, n: u64) -> Self {
        let f = count as f64 / n as f64;
        FrequencyEstimate {
            count,
            frequency: f,
            std_error: (f * (1.0 - f) / n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingEstimate {
    pub ranking: Ranking,
    pub estimate: FrequencyEstimate,
}

/// Monte Carlo tallies of election-day rankings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub n_paths: u64,
    pub seed: u64,
    /// Observed rankings only, in lexicographic order.
    pub orderings: Vec<OrderingEstimate>,
    pub win: Vec<FrequencyEstimate>,
    /// Paths whose top two supports were exactly equal; the lower index was
    /// ranked first.
    pub ties: u64,
}

impl MonteCarloEstimate {
    /// Estimate for `ranking`, with a zero count when it was never observed.
    pub fn ordering(&self, ranking: &[usize]) -> FrequencyEstimate {
        self.orderings
            .iter()
            .find(|o| o.ranking.as_slice() == ranking)
            .map(|o| o.estimate.clone())
            .unwrap_or_else(|| FrequencyEstimate::new(0, self.n_paths))
    }
}

#[derive(Default)]
struct Tally {
    orderings: BTreeMap<Vec<usize>, u64>,
    ties: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for (k, c) in other.orderings {
            *self.orderings.entry(k).or_insert(0) += c;
        }
        self.ties += other.ties;
        self
    }
}

/// Ranks by descending log-weight, lower index first among equals.
fn rank_by_weight(weights: &[f64]) -> (Vec<usize>, bool) {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let tied = order.len() > 1 && weights[order[0]] == weights[order[1]];
    (order, tied)
}

/// Frequencies of every election-day ranking from `n_paths` exact draws of
/// the terminal signal `Y_T = X·V + √V·Z`.
pub fn monte_carlo_win_probabilities(
    model: &ElectionModel,
    n_paths: usize,
    seed: u64,
) -> Result<MonteCarloEstimate, SimulationError> {
    if n_paths < MIN_ORACLE_PATHS {
        return Err(SimulationError::TooFewPaths {
            got: n_paths,
            min: MIN_ORACLE_PATHS,
        });
    }
    let sampler = latent_sampler(model);
    let (x, p) = (model.positions(), model.priors());
    let v = model.terminal_variance();
    let sd = v.sqrt();

    const CHUNK: usize = 1 << 14;
    let n_chunks = n_paths.div_ceil(CHUNK);
    let tally = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut t = Tally::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_paths) {
                let mut rng = path_rng(seed, i);
                let k = sampler.sample(&mut rng);
                let z: f64 = StandardNormal.sample(&mut rng);
                let y = x[k] * v + sd * z;
                let (order, tied) = rank_by_weight(&log_weights(x, p, y, v));
                t.ties += tied as u64;
                *t.orderings.entry(order).or_insert(0) += 1;
            }
            t
        })
        .reduce(Tally::default, Tally::merge);

    let n = n_paths as u64;
    let mut win_counts = vec![0u64; x.len()];
    for (order, &c) in &tally.orderings {
        win_counts[order[0]] += c;
    }
    Ok(MonteCarloEstimate {
        n_paths: n,
        seed,
        orderings: tally
            .orderings
            .into_iter()
            .map(|(order, c)| OrderingEstimate {
                ranking: Ranking::new(order, x.len()).expect("sorted indices form a permutation"),
                estimate: FrequencyEstimate::new(c, n),
            })
            .collect(),
        win: win_counts
            .into_iter()
            .map(|c| FrequencyEstimate::new(c, n))
            .collect(),
        ties: tally.ties,
    })
}
