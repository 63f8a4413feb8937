//! Election forecasting under a signal-plus-noise information model.
//!
//! Voters receive noisy information about which candidate is the "right"
//! choice; current polls are the prior, and the support rates on election
//! day are the Bayesian posterior after a further stretch of information.
//! The crate computes the exact probability of every election-day ranking,
//! and builds strategy analysis, source aggregation, Monte Carlo checks and
//! calibration on top of that.

// negated comparisons double as NaN rejection
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregation;
pub mod calibration;
pub mod model;
pub mod normal;
pub mod outcome;
mod roots;
pub mod simulation;
pub mod strategy;

pub use aggregation::{aggregate_n, aggregate_two, AggregationError, EffectiveChannel, SourceSet};
pub use calibration::{
    estimate_sigma_historic, implied_sigma, CalibrationError, HistoricEstimate, ImpliedSigma,
    Plateau, PollSeries,
};
pub use model::{
    effective_variance, EffectiveVariance, ElectionModel, InfoSchedule, ModelError,
    PosteriorDistribution,
};
pub use outcome::{
    crossing_threshold, interval_probability, ordering_partition, ordering_probability,
    two_candidate_win_probability, win_probabilities, CrossingThreshold, OrderingPartition,
    OutcomeError, OutcomeProbabilities, PartitionCell, Ranking, RankingProbability,
};
pub use simulation::{
    monte_carlo_win_probabilities, posterior_paths, simulate_paths, winprob_paths,
    FrequencyEstimate, MonteCarloEstimate, OrderingEstimate, PathEnsemble, SimulationError,
    TrajectoryBundle,
};
pub use strategy::{
    dead_zone_by_bound, dead_zone_sigma_bound, default_sigma_grid, is_dead_zone,
    max_attainable_support, max_support_point, simplex_grid, sweep_positions, sweep_priors,
    sweep_sigma, DeadZoneBound, DeadZoneMethod, DeadZoneReport, MaxSupportReport, StrategyError,
    SweepKind, SweepRow, SweepTable,
};
