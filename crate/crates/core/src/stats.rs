//! Poisson photon-counting discrimination and the threshold/duration/
//! efficiency optimizations built on it.
//!
//! A realization is classified as initial T0 when the detected count reaches
//! the integer threshold `N_T`, otherwise as initial S. With Poisson counts
//! of means `lambda_T` and `lambda_S`, the error probabilities are
//!
//! ```text
//! P_T,F = P(X < N_T | lambda_T)      (false negative)
//! P_S,F = P(X >= N_T | lambda_S)     (false positive)
//! F     = 1 - (P_T,F + P_S,F) / 2
//! ```
//!
//! The false-negative sum includes the zero-count term: detecting fewer than
//! `N_T` photons includes detecting none.

use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::protocol::PhotonBudget;

/// Readout fidelity above which one realization is usable directly.
pub const SINGLE_SHOT_THRESHOLD: f64 = 0.8;

/// Integer photon-count threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdPolicy {
    pub n_threshold: u32,
}

impl ThresholdPolicy {
    pub fn new(n_threshold: u32) -> Result<Self> {
        if n_threshold < 1 {
            return Err(CoreError::InvalidParameter {
                name: "n_threshold",
                constraint: "must be >= 1",
                value: n_threshold as f64,
            });
        }
        Ok(Self { n_threshold })
    }
}

/// Fidelity of one threshold decision together with its error components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityResult {
    pub fidelity: f64,
    pub p_false_negative: f64,
    pub p_false_positive: f64,
    pub threshold: u32,
    pub lambda_t: f64,
    pub lambda_s: f64,
}

/// `P(X < n)` for `X ~ Poisson(lambda)`, via the stable term recurrence
/// `term_{k+1} = term_k * lambda / (k+1)` starting from `e^-lambda`. No
/// factorials are formed, so there is no overflow for any reasonable `n`.
pub fn poisson_cdf_below(lambda: f64, n: u32) -> f64 {
    debug_assert!(lambda >= 0.0);
    let mut term = (-lambda).exp();
    let mut sum = 0.0;
    for k in 0..n {
        sum += term;
        term *= lambda / (k + 1) as f64;
    }
    sum.min(1.0)
}

/// Eq.-of-merit fidelity for one threshold. Computed as
/// `1/2 + (cdf(lambda_S) - cdf(lambda_T)) / 2`, which is algebraically the
/// definition above and returns exactly 0.5 when the two means coincide.
pub fn readout_fidelity(lambda_t: f64, lambda_s: f64, policy: ThresholdPolicy) -> FidelityResult {
    let n = policy.n_threshold;
    let cdf_t = poisson_cdf_below(lambda_t, n);
    let cdf_s = poisson_cdf_below(lambda_s, n);
    FidelityResult {
        fidelity: 0.5 + 0.5 * (cdf_s - cdf_t),
        p_false_negative: cdf_t,
        p_false_positive: 1.0 - cdf_s,
        threshold: n,
        lambda_t,
        lambda_s,
    }
}

/// Best fidelity over thresholds `1..=n_max` by exhaustive scan; ties break
/// toward the smaller threshold.
pub fn optimal_threshold(lambda_t: f64, lambda_s: f64, n_max: u32) -> FidelityResult {
    debug_assert!(n_max >= 1);
    let mut best = readout_fidelity(lambda_t, lambda_s, ThresholdPolicy { n_threshold: 1 });
    for n in 2..=n_max {
        let cand = readout_fidelity(lambda_t, lambda_s, ThresholdPolicy { n_threshold: n });
        if cand.fidelity > best.fidelity {
            best = cand;
        }
    }
    best
}

/// Best fidelity over an explicit threshold list (ties toward the earlier
/// entry). The list must be non-empty.
pub fn optimal_threshold_over(lambda_t: f64, lambda_s: f64, thresholds: &[u32]) -> FidelityResult {
    assert!(!thresholds.is_empty(), "threshold list must be non-empty");
    let mut best = readout_fidelity(lambda_t, lambda_s, ThresholdPolicy { n_threshold: thresholds[0] });
    for &n in &thresholds[1..] {
        let cand = readout_fidelity(lambda_t, lambda_s, ThresholdPolicy { n_threshold: n });
        if cand.fidelity > best.fidelity {
            best = cand;
        }
    }
    best
}

/// Fidelity over a `(t_readout, eta)` grid.
#[derive(Debug, Clone)]
pub struct FidelityMap {
    pub t_readout: Vec<f64>,
    pub eta: Vec<f64>,
    /// `results[i][j]` belongs to `(t_readout[i], eta[j])`.
    pub results: Vec<Vec<FidelityResult>>,
}

impl FidelityMap {
    pub fn fidelities(&self) -> Vec<Vec<f64>> {
        self.results
            .iter()
            .map(|row| row.iter().map(|r| r.fidelity).collect())
            .collect()
    }
}

fn map_over_grid<E, S>(
    t_grid: &[f64],
    eta_grid: &[f64],
    evaluator: E,
    score: S,
) -> Result<FidelityMap>
where
    E: Fn(f64, f64) -> Result<PhotonBudget> + Sync,
    S: Fn(&PhotonBudget) -> FidelityResult + Sync,
{
    let points: Vec<(usize, usize)> = (0..t_grid.len())
        .flat_map(|i| (0..eta_grid.len()).map(move |j| (i, j)))
        .collect();
    let evaluated: Vec<Result<FidelityResult>> = points
        .par_iter()
        .map(|&(i, j)| {
            let budget = evaluator(t_grid[i], eta_grid[j]).map_err(|e| {
                CoreError::GridPointFailed {
                    t: t_grid[i],
                    eta: eta_grid[j],
                    source: Box::new(e),
                }
            })?;
            Ok(score(&budget))
        })
        .collect();

    let mut results = vec![Vec::with_capacity(eta_grid.len()); t_grid.len()];
    for ((i, _), r) in points.into_iter().zip(evaluated) {
        results[i].push(r?);
    }
    Ok(FidelityMap {
        t_readout: t_grid.to_vec(),
        eta: eta_grid.to_vec(),
        results,
    })
}

/// Evaluate the photon budget and fidelity at a fixed threshold over the
/// grid. Points are independent, evaluated in parallel, and assembled in
/// grid order, so the output does not depend on scheduling. Evaluator errors
/// abort with the failing grid point attached, lexicographically first.
pub fn fidelity_map<E>(
    t_grid: &[f64],
    eta_grid: &[f64],
    evaluator: E,
    policy: ThresholdPolicy,
) -> Result<FidelityMap>
where
    E: Fn(f64, f64) -> Result<PhotonBudget> + Sync,
{
    map_over_grid(t_grid, eta_grid, evaluator, |b| {
        readout_fidelity(b.lambda_t, b.lambda_s, policy)
    })
}

/// As [`fidelity_map`], but each point carries its best threshold in
/// `1..=n_max`.
pub fn optimal_fidelity_map<E>(
    t_grid: &[f64],
    eta_grid: &[f64],
    evaluator: E,
    n_max: u32,
) -> Result<FidelityMap>
where
    E: Fn(f64, f64) -> Result<PhotonBudget> + Sync,
{
    map_over_grid(t_grid, eta_grid, evaluator, |b| {
        optimal_threshold(b.lambda_t, b.lambda_s, n_max)
    })
}

/// True where the (max-over-threshold) fidelity exceeds the single-shot
/// criterion `F > 0.8`.
pub fn single_shot_region(fidelities: &[Vec<f64>]) -> Vec<Vec<bool>> {
    fidelities
        .iter()
        .map(|row| row.iter().map(|&f| f > SINGLE_SHOT_THRESHOLD).collect())
        .collect()
}

/// Relative precision of the efficiency bisection; two significant figures.
pub const ETA_BISECTION_REL_PRECISION: f64 = 1e-2;

/// Smallest collection efficiency that still allows single-shot readout.
///
/// For each candidate `eta`, the fidelity is maximized over the readout
/// durations in `t_grid` and thresholds `1..=n_max`; the transition of that
/// maximum through 0.8 is bracketed by `(eta_lo, eta_hi)` and located by
/// bisection in log-eta to relative precision `rel_precision`. Returns the
/// feasible (upper) end of the final bracket.
pub fn min_efficiency_single_shot<E>(
    budget_at: E,
    t_grid: &[f64],
    n_max: u32,
    eta_lo: f64,
    eta_hi: f64,
    rel_precision: f64,
) -> Result<f64>
where
    E: Fn(f64, f64) -> Result<PhotonBudget>,
{
    let max_f = |eta: f64| -> Result<f64> {
        let mut best = 0.0f64;
        for &t in t_grid {
            let b = budget_at(t, eta)?;
            best = best.max(optimal_threshold(b.lambda_t, b.lambda_s, n_max).fidelity);
        }
        Ok(best)
    };
    let f_lo = max_f(eta_lo)?;
    let f_hi = max_f(eta_hi)?;
    if f_lo > SINGLE_SHOT_THRESHOLD || f_hi <= SINGLE_SHOT_THRESHOLD {
        return Err(CoreError::BracketFailure {
            eta_lo,
            f_lo,
            eta_hi,
            f_hi,
        });
    }
    let (mut lo, mut hi) = (eta_lo, eta_hi);
    while hi / lo > 1.0 + rel_precision {
        let mid = (lo * hi).sqrt();
        if max_f(mid)? > SINGLE_SHOT_THRESHOLD {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
