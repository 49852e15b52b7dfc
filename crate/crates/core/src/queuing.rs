//! Guard-channel loss model for the femtocell channel pool.
//!
//! The pool has `N` channels. New calls originating in the femtocell are
//! admitted only while fewer than `K` channels are busy; macrocell-to-femtocell
//! handover calls are admitted while any channel is free. Occupancy is a
//! birth-death chain whose stationary law has a product form, which this
//! module evaluates directly. [`ctmc_oracle`] solves the same chain through a
//! generic linear solve and exists to cross-check the product form.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueuingError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("occupancy {occupancy} outside 0..={channels}")]
    OccupancyOutOfRange { occupancy: usize, channels: usize },
    #[error("empty sweep table")]
    EmptyTable,
    #[error("no guard threshold satisfies P_D <= {target} (best P_D = {best})")]
    Infeasible { target: f64, best: f64 },
    #[error("generator matrix is singular")]
    SingularGenerator,
}

/// Parameters of the femtocell channel pool. Rates are per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardChannelParams {
    /// N
    pub num_channels: usize,
    /// K: new calls are blocked once occupancy reaches this value.
    pub guard_threshold: usize,
    /// λ_nf
    pub new_call_rate: f64,
    /// λ_hm
    pub handover_rate: f64,
    /// μ
    pub service_rate: f64,
}

impl GuardChannelParams {
    pub fn new(
        num_channels: usize,
        guard_threshold: usize,
        new_call_rate: f64,
        handover_rate: f64,
        service_rate: f64,
    ) -> Result<Self, QueuingError> {
        let params = Self {
            num_channels,
            guard_threshold,
            new_call_rate,
            handover_rate,
            service_rate,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), QueuingError> {
        if self.num_channels == 0 {
            return Err(QueuingError::InvalidParams("N must be at least 1".into()));
        }
        if self.guard_threshold > self.num_channels {
            return Err(QueuingError::InvalidParams(format!(
                "K = {} exceeds N = {}",
                self.guard_threshold, self.num_channels
            )));
        }
        if !(self.service_rate > 0.0 && self.service_rate.is_finite()) {
            return Err(QueuingError::InvalidParams("service rate must be positive".into()));
        }
        for (name, rate) in [("new call", self.new_call_rate), ("handover", self.handover_rate)] {
            if !(rate >= 0.0 && rate.is_finite()) {
                return Err(QueuingError::InvalidParams(format!(
                    "{name} rate must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }

    /// Same traffic with a different guard threshold.
    pub fn with_guard_threshold(&self, k: usize) -> Result<Self, QueuingError> {
        let params = Self {
            guard_threshold: k,
            ..*self
        };
        params.validate()?;
        Ok(params)
    }

    /// Total offered load (λ_nf + λ_hm) / μ in erlangs.
    pub fn offered_load(&self) -> f64 {
        (self.new_call_rate + self.handover_rate) / self.service_rate
    }
}

/// Stationary occupancy probabilities `p[0..=N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    probabilities: Vec<f64>,
}

impl StationaryDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn num_channels(&self) -> usize {
        self.probabilities.len() - 1
    }

    /// Mean number of busy channels.
    pub fn carried_load(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| i as f64 * p)
            .sum()
    }

    /// Largest componentwise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.probabilities.len(), other.probabilities.len());
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockingReport {
    /// P_B
    pub new_call_blocking: f64,
    /// P_D
    pub handover_blocking: f64,
    /// Mean busy channels divided by N.
    pub utilization: f64,
    /// Mean busy channels, in erlangs.
    pub carried_load: f64,
}

/// Total arrival rate seen in occupancy state `j`.
pub fn arrival_rate(params: &GuardChannelParams, occupancy: usize) -> Result<f64, QueuingError> {
    let n = params.num_channels;
    if occupancy > n {
        return Err(QueuingError::OccupancyOutOfRange {
            occupancy,
            channels: n,
        });
    }
    Ok(state_arrival_rate(params, occupancy))
}

fn state_arrival_rate(params: &GuardChannelParams, j: usize) -> f64 {
    if j < params.guard_threshold {
        params.new_call_rate + params.handover_rate
    } else if j < params.num_channels {
        params.handover_rate
    } else {
        0.0
    }
}

// Weights are rescaled whenever they grow past this bound.
const RESCALE_AT: f64 = 1e150;

/// Product-form stationary distribution of the guard-channel chain.
pub fn stationary_distribution(params: &GuardChannelParams) -> StationaryDistribution {
    let n = params.num_channels;
    let mut weights = Vec::with_capacity(n + 1);
    weights.push(1.0_f64);
    for j in 0..n {
        let ratio = state_arrival_rate(params, j) / ((j + 1) as f64 * params.service_rate);
        let next = weights[j] * ratio;
        weights.push(next);
        if next > RESCALE_AT {
            weights.iter_mut().for_each(|w| *w /= next);
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    StationaryDistribution {
        probabilities: weights,
    }
}

/// P_B: probability that occupancy is at least K.
pub fn new_call_blocking(params: &GuardChannelParams) -> f64 {
    new_call_blocking_from(&stationary_distribution(params), params.guard_threshold)
}

/// P_D: probability that every channel is busy.
pub fn handover_blocking(params: &GuardChannelParams) -> f64 {
    *stationary_distribution(params)
        .probabilities
        .last()
        .expect("distribution has N + 1 states")
}

fn new_call_blocking_from(dist: &StationaryDistribution, k: usize) -> f64 {
    dist.probabilities[k..].iter().sum::<f64>().min(1.0)
}

pub fn blocking_report(params: &GuardChannelParams) -> BlockingReport {
    let dist = stationary_distribution(params);
    report_from(&dist, params.guard_threshold)
}

fn report_from(dist: &StationaryDistribution, k: usize) -> BlockingReport {
    let carried_load = dist.carried_load();
    BlockingReport {
        new_call_blocking: new_call_blocking_from(dist, k),
        handover_blocking: dist.probabilities[dist.num_channels()],
        utilization: carried_load / dist.num_channels() as f64,
        carried_load,
    }
}

/// Erlang-B blocking for offered load `a` on `n` channels.
pub fn erlang_b(offered_load: f64, channels: usize) -> f64 {
    (1..=channels).fold(1.0, |b, j| {
        let ab = offered_load * b;
        ab / (j as f64 + ab)
    })
}

/// Stationary distribution by a dense linear solve of `πQ = 0, Σπ = 1`.
///
/// Intended for moderate `N` (a few hundred states); cost is cubic.
pub fn ctmc_oracle(params: &GuardChannelParams) -> Result<StationaryDistribution, QueuingError> {
    params.validate()?;
    let states = params.num_channels + 1;
    let mut generator = DMatrix::<f64>::zeros(states, states);
    for i in 0..states {
        if i + 1 < states {
            generator[(i, i + 1)] = state_arrival_rate(params, i);
        }
        if i > 0 {
            generator[(i, i - 1)] = i as f64 * params.service_rate;
        }
        let out: f64 = generator.row(i).iter().sum();
        generator[(i, i)] = -out;
    }
    // Solve Qᵀπ = 0 with the last balance equation replaced by normalization.
    let mut system = generator.transpose();
    system.row_mut(states - 1).fill(1.0);
    let mut rhs = DVector::<f64>::zeros(states);
    rhs[states - 1] = 1.0;
    let solution = system
        .lu()
        .solve(&rhs)
        .ok_or(QueuingError::SingularGenerator)?;
    Ok(StationaryDistribution {
        probabilities: solution.iter().map(|p| p.max(0.0)).collect(),
    })
}

/// One row of a guard-threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub guard_threshold: usize,
    pub report: BlockingReport,
}

/// Evaluates every guard threshold `K = 0..=N` for the traffic in `base`.
/// The guard threshold of `base` is ignored.
pub fn sweep_guard_threshold(base: &GuardChannelParams) -> Result<Vec<SweepRow>, QueuingError> {
    let base = base.with_guard_threshold(base.num_channels)?;
    (0..=base.num_channels)
        .map(|k| {
            let params = base.with_guard_threshold(k)?;
            Ok(SweepRow {
                guard_threshold: k,
                report: blocking_report(&params),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizationCriterion {
    /// Largest K whose handover blocking does not exceed `target`.
    MaxKWithinTarget { target: f64 },
    /// Largest K for which reserving one more guard channel (K -> K-1) buys
    /// less than `ratio_threshold` relative P_D reduction per percentage
    /// point of utilization given up.
    MarginalTradeoff { ratio_threshold: f64 },
}

/// One evaluated candidate in the optimizer trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionStep {
    pub guard_threshold: usize,
    /// P_D for the target criterion, tradeoff ratio for the marginal one.
    pub score: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KChoice {
    pub guard_threshold: usize,
    pub trace: Vec<CriterionStep>,
}

pub fn optimize_k(
    table: &[SweepRow],
    criterion: OptimizationCriterion,
) -> Result<KChoice, QueuingError> {
    if table.is_empty() {
        return Err(QueuingError::EmptyTable);
    }
    let mut rows = table.to_vec();
    // Candidates are visited from the largest K down so ties go to larger K.
    rows.sort_by_key(|r| std::cmp::Reverse(r.guard_threshold));
    let mut trace = Vec::with_capacity(rows.len());

    match criterion {
        OptimizationCriterion::MaxKWithinTarget { target } => {
            for row in &rows {
                let satisfied = row.report.handover_blocking <= target;
                trace.push(CriterionStep {
                    guard_threshold: row.guard_threshold,
                    score: row.report.handover_blocking,
                    satisfied,
                });
                if satisfied {
                    return Ok(KChoice {
                        guard_threshold: row.guard_threshold,
                        trace,
                    });
                }
            }
            let best = rows
                .iter()
                .map(|r| r.report.handover_blocking)
                .fold(f64::INFINITY, f64::min);
            Err(QueuingError::Infeasible { target, best })
        }
        OptimizationCriterion::MarginalTradeoff { ratio_threshold } => {
            for pair in rows.windows(2) {
                let (upper, lower) = (&pair[0], &pair[1]);
                let ratio = tradeoff_ratio(&upper.report, &lower.report);
                let satisfied = ratio < ratio_threshold;
                trace.push(CriterionStep {
                    guard_threshold: upper.guard_threshold,
                    score: ratio,
                    satisfied,
                });
                if satisfied {
                    return Ok(KChoice {
                        guard_threshold: upper.guard_threshold,
                        trace,
                    });
                }
            }
            // Every decrement paid off: the smallest K in the table.
            let last = rows.last().expect("non-empty");
            trace.push(CriterionStep {
                guard_threshold: last.guard_threshold,
                score: 0.0,
                satisfied: true,
            });
            Ok(KChoice {
                guard_threshold: last.guard_threshold,
                trace,
            })
        }
    }
}

/// Relative P_D reduction per percentage point of utilization lost when
/// moving from `upper` (larger K) to `lower`.
fn tradeoff_ratio(upper: &BlockingReport, lower: &BlockingReport) -> f64 {
    let relative_gain = if upper.handover_blocking > 0.0 {
        (upper.handover_blocking - lower.handover_blocking) / upper.handover_blocking
    } else {
        0.0
    };
    let points_lost = (upper.utilization - lower.utilization) * 100.0;
    if points_lost > 0.0 {
        relative_gain / points_lost
    } else if relative_gain > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}
