//! Election-day ordering probabilities.
//!
//! On election day the log-weight of candidate `i` is a straight line in the
//! terminal signal, `ln p_i + x_i Y_T − ½ x_i² V`. Two lines cross at a single
//! threshold, so the real line splits into intervals on each of which the
//! ranking of support rates is fixed. Under the reference measure where `Y_T`
//! is centred Gaussian, the probability of an interval is a mixture of normal
//! masses:
//!
//! ```text
//! P(a < Y_T < b) = Σ_j p_j [N((b − x_j V)/√V) − N((a − x_j V)/√V)]
//! ```
//!
//! Rankings are found by evaluating the posterior inside each interval, so the
//! same code handles any number of candidates.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{log_weights, ElectionModel};
use crate::normal;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OutcomeError {
    #[error("candidate index {index} out of range for {n} candidates")]
    CandidateOutOfRange { index: usize, n: usize },

    #[error("a crossing threshold needs two distinct candidates, got {0} twice")]
    SameCandidate(usize),

    #[error("interval ({a}, {b}) is empty or not ordered")]
    InvalidInterval { a: f64, b: f64 },

    #[error("not a permutation of {n} candidates: {ranking:?}")]
    InvalidPermutation { ranking: Vec<usize>, n: usize },

    #[error("two-candidate formula needs 0 < p < 1, got {0}")]
    DegeneratePrior(f64),

    #[error("{name} must be positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// A strict ordering of candidates, highest election-day support first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ranking(Vec<usize>);

impl Ranking {
    pub fn new(order: Vec<usize>, n: usize) -> Result<Self, OutcomeError> {
        let mut seen = vec![false; n];
        let valid = order.len() == n
            && order.iter().all(|&c| {
                if c < n && !seen[c] {
                    seen[c] = true;
                    true
                } else {
                    false
                }
            });
        if valid {
            Ok(Ranking(order))
        } else {
            Err(OutcomeError::InvalidPermutation { ranking: order, n })
        }
    }

    pub fn winner(&self) -> usize {
        self.0[0]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Position of `candidate` in the ranking (0 = first).
    pub fn place_of(&self, candidate: usize) -> Option<usize> {
        self.0.iter().position(|&c| c == candidate)
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" > ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Value of the terminal signal at which candidates `k` and `j` tie.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingThreshold {
    pub k: usize,
    pub j: usize,
    /// Threshold in accumulated-signal units. Infinite when one of the two
    /// has no support, NaN when both have none.
    pub value: f64,
}

impl CrossingThreshold {
    /// The threshold on `ξ_T` itself, available for constant schedules.
    pub fn in_xi_units(&self, model: &ElectionModel) -> Option<f64> {
        model.schedule().constant_rate().map(|s| self.value / s)
    }
}

/// Threshold between `k` and `j`; symmetric in its arguments bit for bit.
pub fn crossing_threshold(
    model: &ElectionModel,
    k: usize,
    j: usize,
) -> Result<CrossingThreshold, OutcomeError> {
    let n = model.num_candidates();
    for index in [k, j] {
        if index >= n {
            return Err(OutcomeError::CandidateOutOfRange { index, n });
        }
    }
    if k == j {
        return Err(OutcomeError::SameCandidate(k));
    }
    let value = threshold_value(model, k.min(j), k.max(j), model.terminal_variance());
    Ok(CrossingThreshold { k, j, value })
}

// `lo < hi` so that x_hi > x_lo.
fn threshold_value(model: &ElectionModel, lo: usize, hi: usize, v: f64) -> f64 {
    let (x, p) = (model.positions(), model.priors());
    (p[lo] / p[hi]).ln() / (x[hi] - x[lo]) + 0.5 * (x[hi] + x[lo]) * v
}

/// One interval of the partition together with its ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionCell {
    pub lower: f64,
    pub upper: f64,
    pub ranking: Ranking,
}

/// Partition of the terminal-signal line into intervals of fixed ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingPartition {
    boundaries: Vec<f64>,
    cells: Vec<PartitionCell>,
    degenerate_tie: bool,
}

impl OrderingPartition {
    /// Finite cell boundaries in increasing order.
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn cells(&self) -> &[PartitionCell] {
        &self.cells
    }

    /// Set when two thresholds coincided exactly or a cell sample hit a tie.
    /// Probabilities are unaffected; rankings at the tie resolve to the
    /// lower candidate index.
    pub fn degenerate_tie(&self) -> bool {
        self.degenerate_tie
    }

    pub fn cell_for(&self, ranking: &Ranking) -> Option<&PartitionCell> {
        self.cells.iter().find(|c| &c.ranking == ranking)
    }

    /// Whether any cell ranks `candidate` first.
    pub fn can_win(&self, candidate: usize) -> bool {
        self.cells.iter().any(|c| c.ranking.winner() == candidate)
    }
}

pub fn ordering_partition(model: &ElectionModel) -> OrderingPartition {
    let n = model.num_candidates();
    let v = model.terminal_variance();
    let priors = model.priors();

    let mut raw = Vec::with_capacity(n * (n - 1) / 2);
    for lo in 0..n {
        for hi in lo + 1..n {
            if priors[lo] > 0.0 && priors[hi] > 0.0 {
                let t = threshold_value(model, lo, hi, v);
                if t.is_finite() {
                    raw.push(t);
                }
            }
        }
    }
    raw.sort_by(f64::total_cmp);
    let before = raw.len();
    raw.dedup();
    let mut degenerate_tie = raw.len() != before;

    let mut samples = Vec::with_capacity(raw.len() + 1);
    match (raw.first(), raw.last()) {
        (Some(&first), Some(&last)) => {
            samples.push((f64::NEG_INFINITY, first, first - (1.0 + first.abs())));
            for w in raw.windows(2) {
                samples.push((w[0], w[1], 0.5 * (w[0] + w[1])));
            }
            samples.push((last, f64::INFINITY, last + (1.0 + last.abs())));
        }
        _ => samples.push((f64::NEG_INFINITY, f64::INFINITY, 0.0)),
    }

    let mut cells: Vec<PartitionCell> = Vec::with_capacity(samples.len());
    for (lower, upper, y) in samples {
        let (ranking, tied) = ranking_at(model, y, v);
        degenerate_tie |= tied;
        match cells.last_mut() {
            Some(prev) if prev.ranking == ranking => prev.upper = upper,
            _ => cells.push(PartitionCell {
                lower,
                upper,
                ranking,
            }),
        }
    }
    let boundaries = cells.iter().skip(1).map(|c| c.lower).collect();
    OrderingPartition {
        boundaries,
        cells,
        degenerate_tie,
    }
}

fn ranking_at(model: &ElectionModel, y: f64, v: f64) -> (Ranking, bool) {
    let w = log_weights(model.positions(), model.priors(), y, v);
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| {
        w[b].partial_cmp(&w[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let tied = order
        .windows(2)
        .any(|p| w[p[0]].is_finite() && w[p[0]] == w[p[1]]);
    (Ranking(order), tied)
}

/// `P(a < Y_T < b)` under the model; infinite endpoints allowed.
pub fn interval_probability(model: &ElectionModel, a: f64, b: f64) -> Result<f64, OutcomeError> {
    if a.is_nan() || b.is_nan() || a > b {
        return Err(OutcomeError::InvalidInterval { a, b });
    }
    Ok(mixture_mass(model, model.terminal_variance(), a, b))
}

fn mixture_mass(model: &ElectionModel, v: f64, a: f64, b: f64) -> f64 {
    let sd = v.sqrt();
    model
        .positions()
        .iter()
        .zip(model.priors())
        .filter(|(_, &p)| p > 0.0)
        .map(|(&x, &p)| {
            let mean = x * v;
            p * normal::interval((a - mean) / sd, (b - mean) / sd)
        })
        .sum()
}

/// Probability that election-day support is ranked exactly as `ranking`.
pub fn ordering_probability(model: &ElectionModel, ranking: &[usize]) -> Result<f64, OutcomeError> {
    let ranking = Ranking::new(ranking.to_vec(), model.num_candidates())?;
    let partition = ordering_partition(model);
    Ok(partition
        .cell_for(&ranking)
        .map(|c| mixture_mass(model, model.terminal_variance(), c.lower, c.upper))
        .unwrap_or(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingProbability {
    pub ranking: Ranking,
    pub probability: f64,
}

/// Probabilities of every realizable ranking, plus per-candidate win
/// probabilities under first-past-the-post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProbabilities {
    /// Realizable rankings in partition order; any ranking not listed has
    /// probability zero.
    pub orderings: Vec<RankingProbability>,
    pub win: Vec<f64>,
    pub degenerate_tie: bool,
}

impl OutcomeProbabilities {
    pub fn ordering(&self, ranking: &[usize]) -> f64 {
        self.orderings
            .iter()
            .find(|o| o.ranking.as_slice() == ranking)
            .map(|o| o.probability)
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.orderings.iter().map(|o| o.probability).sum()
    }
}

pub fn win_probabilities(model: &ElectionModel) -> OutcomeProbabilities {
    outcome_from_partition(model, &ordering_partition(model))
}

/// Same as [`win_probabilities`] when the partition is already at hand.
pub fn outcome_from_partition(
    model: &ElectionModel,
    partition: &OrderingPartition,
) -> OutcomeProbabilities {
    let v = model.terminal_variance();
    let mut win = vec![0.0; model.num_candidates()];
    let orderings = partition
        .cells()
        .iter()
        .map(|c| {
            let probability = mixture_mass(model, v, c.lower, c.upper);
            win[c.ranking.winner()] += probability;
            RankingProbability {
                ranking: c.ranking.clone(),
                probability,
            }
        })
        .collect();
    OutcomeProbabilities {
        orderings,
        win,
        degenerate_tie: partition.degenerate_tie(),
    }
}

/// Two candidates labelled 0 and 1; `p` is the support of candidate 0.
/// Returns `p N(d⁺) + (1 − p) N(d⁻)` with
/// `d± = (ln(p/(1−p)) ± ½σ²T) / (σ√T)`.
pub fn two_candidate_win_probability(
    p: f64,
    sigma: f64,
    horizon: f64,
) -> Result<f64, OutcomeError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(OutcomeError::DegeneratePrior(p));
    }
    for (name, value) in [("sigma", sigma), ("horizon", horizon)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(OutcomeError::InvalidParameter { name, value });
        }
    }
    let v = sigma * sigma * horizon;
    let sd = v.sqrt();
    let log_odds = (p / (1.0 - p)).ln();
    let d_plus = (log_odds + 0.5 * v) / sd;
    let d_minus = (log_odds - 0.5 * v) / sd;
    Ok(p * normal::cdf(d_plus) + (1.0 - p) * normal::cdf(d_minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(x: &[f64], p: &[f64], t: f64, sigma: f64) -> ElectionModel {
        ElectionModel::with_constant_rate(x.to_vec(), p.to_vec(), t, sigma).unwrap()
    }

    fn three_way(sigma: f64) -> ElectionModel {
        model(&[1.0, 2.0, 3.0], &[0.38, 0.26, 0.36], 1.0, sigma)
    }

    // Brute-force ranking of candidates from the support vector itself.
    fn brute_ranking(m: &ElectionModel, y: f64) -> Vec<usize> {
        let s = m.support_at(y, m.terminal_variance());
        let mut idx: Vec<usize> = (0..s.len()).collect();
        idx.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap().then(a.cmp(&b)));
        idx
    }

    #[test]
    fn threshold_three_way_unit_rate() {
        // z_12 = [ln(0.26/0.38) + ½(1 − 4)] / (1 − 2)
        let want = ((0.26f64 / 0.38).ln() - 1.5) / -1.0;
        let z = crossing_threshold(&three_way(1.0), 0, 1).unwrap();
        assert!((z.value - want).abs() < 1e-14);
        assert!((z.value - 1.8795).abs() < 1e-4);
    }

    #[test]
    fn threshold_in_xi_units_at_quarter_rate() {
        let m = three_way(0.25);
        let z = |k, j| {
            crossing_threshold(&m, k, j)
                .unwrap()
                .in_xi_units(&m)
                .unwrap()
        };
        assert!((z(0, 1) - 1.893).abs() < 1e-3);
        assert!((z(2, 0) - 0.608).abs() < 1e-3);
        assert!((z(1, 2) + 0.677).abs() < 1e-3);
    }

    #[test]
    fn threshold_equal_priors_is_midpoint() {
        let m = model(&[1.0, 2.0, 3.0], &[1.0 / 3.0; 3], 1.0, 1.0);
        for (k, j) in [(0, 1), (1, 2), (0, 2)] {
            let z = crossing_threshold(&m, k, j).unwrap().value;
            let x = m.positions();
            assert!((z - 0.5 * (x[k] + x[j])).abs() < 1e-15);
        }
    }

    #[test]
    fn threshold_with_zero_prior_is_infinite() {
        let m = model(&[1.0, 2.0, 3.0], &[0.5, 0.5, 0.0], 1.0, 1.0);
        assert_eq!(crossing_threshold(&m, 2, 1).unwrap().value, f64::INFINITY);
        assert!(crossing_threshold(&m, 1, 1).is_err());
        assert!(crossing_threshold(&m, 0, 3).is_err());
    }

    #[test]
    fn two_candidate_partition_has_one_boundary() {
        let m = model(&[0.0, 1.0], &[0.6, 0.4], 1.0, 1.0);
        let part = ordering_partition(&m);
        assert_eq!(part.boundaries().len(), 1);
        assert_eq!(part.cells().len(), 2);
        assert_eq!(part.cells()[0].ranking.as_slice(), &[0, 1]);
        assert_eq!(part.cells()[1].ranking.as_slice(), &[1, 0]);
    }

    #[test]
    fn centre_candidate_has_no_cell_at_low_rate() {
        let part = ordering_partition(&three_way(0.25));
        assert!(!part.can_win(1));
        assert!(ordering_partition(&three_way(1.0)).can_win(1));
    }

    #[test]
    fn equal_priors_partition_matches_grid_scan() {
        let m = model(&[1.0, 2.0, 3.0], &[1.0 / 3.0; 3], 1.0, 1.0);
        let part = ordering_partition(&m);
        assert_eq!(part.cells().len(), 4);

        let mut scanned: Vec<Vec<usize>> = Vec::new();
        for i in 0..=10_000 {
            let y = -20.0 + 40.0 * i as f64 / 10_000.0;
            let r = brute_ranking(&m, y);
            if scanned.last() != Some(&r) {
                scanned.push(r);
            }
        }
        let cells: Vec<Vec<usize>> = part
            .cells()
            .iter()
            .map(|c| c.ranking.as_slice().to_vec())
            .collect();
        assert_eq!(cells, scanned);
    }

    #[test]
    fn interval_probability_examples() {
        let m = three_way(1.0);
        let whole = interval_probability(&m, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!((whole - 1.0).abs() < 1e-15);
        assert!(matches!(
            interval_probability(&m, 1.0, 0.0),
            Err(OutcomeError::InvalidInterval { .. })
        ));

        let single = model(&[1.0, 2.0, 3.0], &[0.0, 1.0, 0.0], 2.0, 0.7);
        let v = single.terminal_variance();
        let half = interval_probability(&single, f64::NEG_INFINITY, 2.0 * v).unwrap();
        assert!((half - 0.5).abs() < 1e-15);
    }

    #[test]
    fn far_right_tail_is_positive_and_monotone() {
        let m = three_way(1.0);
        let v = m.terminal_variance();
        let start = 10.0 * v.sqrt() + 3.0 * v;
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let a = start + 0.25 * i as f64;
            let p = interval_probability(&m, a, f64::INFINITY).unwrap();
            assert!(p > 0.0);
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn dead_orderings_are_exactly_zero() {
        let m = three_way(0.25);
        assert_eq!(ordering_probability(&m, &[1, 0, 2]).unwrap(), 0.0);
        assert_eq!(ordering_probability(&m, &[1, 2, 0]).unwrap(), 0.0);
        assert_eq!(win_probabilities(&m).win[1], 0.0);
        assert!(win_probabilities(&three_way(1.0)).win[1] > 0.0);
    }

    #[test]
    fn rejects_non_permutations() {
        let m = three_way(1.0);
        assert!(matches!(
            ordering_probability(&m, &[0, 0, 1]),
            Err(OutcomeError::InvalidPermutation { .. })
        ));
        assert!(ordering_probability(&m, &[0, 1]).is_err());
        assert!(ordering_probability(&m, &[0, 1, 3]).is_err());
    }

    #[test]
    fn six_three_candidate_cases_match_threshold_table() {
        // The classical table: each of the six orderings occupies the interval
        // bounded by the pairwise thresholds, or nothing.
        for &(sigma, p) in &[
            (0.25, [0.38, 0.26, 0.36]),
            (1.0, [0.38, 0.26, 0.36]),
            (1.0, [0.2, 0.5, 0.3]),
            (2.0, [0.1, 0.2, 0.7]),
        ] {
            let m = model(&[1.0, 2.0, 3.0], &p, 1.0, sigma);
            let z = |k, j| crossing_threshold(&m, k, j).unwrap().value;
            let (z12, z23, z31) = (z(0, 1), z(1, 2), z(2, 0));
            let ip = |a: f64, b: f64| {
                if a < b {
                    interval_probability(&m, a, b).unwrap()
                } else {
                    0.0
                }
            };
            let ninf = f64::NEG_INFINITY;
            let table = [
                (vec![0, 1, 2], ip(ninf, z12.min(z23))),
                (vec![0, 2, 1], ip(z23, z31)),
                (vec![1, 0, 2], ip(z12, z31)),
                (vec![1, 2, 0], ip(z31, z23)),
                (vec![2, 0, 1], ip(z31, z12)),
                (vec![2, 1, 0], ip(z12.max(z23), f64::INFINITY)),
            ];
            let out = win_probabilities(&m);
            for (ranking, want) in table {
                let got = out.ordering(&ranking);
                assert!((got - want).abs() < 1e-14, "{ranking:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn two_candidate_reference_values() {
        let p = two_candidate_win_probability(0.55, 1.2, 1.0 / 52.0).unwrap();
        assert!((p - 0.8868).abs() < 5e-4, "{p}");
        let p = two_candidate_win_probability(0.55, 0.5, 1.0 / 52.0).unwrap();
        assert!((p - 0.9981).abs() < 5e-4, "{p}");
        for sigma in [0.1, 1.0, 7.0] {
            let p = two_candidate_win_probability(0.5, sigma, 0.3).unwrap();
            assert!((p - 0.5).abs() < 1e-15);
        }
        assert!(matches!(
            two_candidate_win_probability(1.0, 1.0, 1.0),
            Err(OutcomeError::DegeneratePrior(_))
        ));
        assert!(two_candidate_win_probability(0.4, -1.0, 1.0).is_err());
    }

    #[test]
    fn reflection_symmetry() {
        let m = model(&[-1.0, 0.0, 1.0], &[1.0 / 3.0; 3], 1.0, 0.8);
        let w = win_probabilities(&m).win;
        assert!((w[0] - w[2]).abs() < 1e-14);
    }

    #[test]
    fn single_supported_candidate_wins_surely() {
        let m = model(&[1.0, 2.0, 3.0], &[1.0, 0.0, 0.0], 1.0, 1.0);
        let out = win_probabilities(&m);
        assert_eq!(out.win, vec![1.0, 0.0, 0.0]);
        assert_eq!(out.orderings.len(), 1);
    }

    #[test]
    fn vanishing_rate_favours_poll_leader() {
        let m = model(&[1.0, 2.0, 3.0, 4.0], &[0.2, 0.35, 0.3, 0.15], 1.0, 1e-4);
        assert!(win_probabilities(&m).win[1] > 1.0 - 1e-9);
    }

    fn arb_model() -> impl Strategy<Value = ElectionModel> {
        (2usize..6)
            .prop_flat_map(|n| {
                (
                    -3.0f64..3.0,
                    prop::collection::vec(0.05f64..2.0, n - 1),
                    prop::collection::vec(0.01f64..1.0, n),
                    0.05f64..3.0,
                    0.05f64..2.0,
                )
            })
            .prop_map(|(start, gaps, weights, sigma, horizon)| {
                let mut positions = vec![start];
                for g in gaps {
                    positions.push(positions.last().unwrap() + g);
                }
                let s: f64 = weights.iter().sum();
                let priors = weights.iter().map(|w| w / s).collect();
                ElectionModel::with_constant_rate(positions, priors, horizon, sigma).unwrap()
            })
    }

    proptest! {
        #[test]
        fn orderings_sum_to_one(m in arb_model()) {
            let out = win_probabilities(&m);
            prop_assert!((out.total() - 1.0).abs() < 1e-10);
            let w: f64 = out.win.iter().sum();
            prop_assert!((w - 1.0).abs() < 1e-10);
            prop_assert!(out.orderings.iter().all(|o| o.probability >= 0.0));
        }

        #[test]
        fn thresholds_are_symmetric(m in arb_model(), a in 0usize..5, b in 0usize..5) {
            let n = m.num_candidates();
            let (k, j) = (a % n, b % n);
            prop_assume!(k != j);
            let u = crossing_threshold(&m, k, j).unwrap().value;
            let w = crossing_threshold(&m, j, k).unwrap().value;
            prop_assert_eq!(u.to_bits(), w.to_bits());
        }

        #[test]
        fn neighbouring_cells_differ_by_one_swap(m in arb_model()) {
            let part = ordering_partition(&m);
            prop_assume!(!part.degenerate_tie());
            for w in part.cells().windows(2) {
                let (a, b) = (w[0].ranking.as_slice(), w[1].ranking.as_slice());
                let diff: Vec<usize> = (0..a.len()).filter(|&i| a[i] != b[i]).collect();
                prop_assert_eq!(diff.len(), 2);
                prop_assert_eq!(diff[1], diff[0] + 1);
            }
            let first = part.cells().first().unwrap().ranking.as_slice();
            let last = part.cells().last().unwrap().ranking.as_slice();
            prop_assert_eq!(first[0], 0);
            prop_assert_eq!(last[0], m.num_candidates() - 1);
        }

        #[test]
        fn cell_rankings_agree_with_posterior(m in arb_model(), u in 0.0f64..1.0) {
            let part = ordering_partition(&m);
            for c in part.cells() {
                let lo = if c.lower.is_finite() { c.lower } else { c.upper - 10.0 };
                let hi = if c.upper.is_finite() { c.upper } else { c.lower + 10.0 };
                let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (-5.0, 5.0) };
                let y = lo + (hi - lo) * (0.05 + 0.9 * u);
                prop_assert_eq!(brute_ranking(&m, y), c.ranking.as_slice().to_vec());
            }
        }

        #[test]
        fn two_candidate_formula_matches_engine(p in 0.01f64..0.99, sigma in 0.05f64..4.0, t in 0.01f64..3.0) {
            let m = model(&[0.0, 1.0], &[p, 1.0 - p], t, sigma);
            let closed = two_candidate_win_probability(p, sigma, t).unwrap();
            prop_assert!((closed - win_probabilities(&m).win[0]).abs() < 1e-12);
        }
    }
}
