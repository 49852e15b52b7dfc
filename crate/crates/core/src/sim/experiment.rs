//! Unnecessary-handover experiment.
//!
//! Every femtocell entry samples a velocity, an entry angle and the
//! remaining call life. The predicted dwell handed to the admission rule is
//! the chord residence time; an accepted handover counts as unnecessary when
//! the user leaves again within the return window or the call ends within
//! the termination window. Both windows start at handover execution.

use rayon::prelude::*;
use thiserror::Error;

use super::{substream, Z95};
use crate::admission::{decide, CacThresholds, Decision, HandoverContext};
use crate::mobility::{residence_time, FemtocellGeometry, MobilityError, MobilityParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Mobility(#[from] MobilityError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Windows {
    /// Seconds; leaving sooner than this makes the handover unnecessary.
    pub return_window: f64,
    /// Seconds; a call ending sooner than this makes the handover unnecessary.
    pub termination_window: f64,
}

impl Default for Windows {
    fn default() -> Self {
        Self {
            return_window: 40.0,
            termination_window: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub geometry: FemtocellGeometry,
    pub mobility: MobilityParams,
    pub thresholds: CacThresholds,
    /// Access points generating entries; each owns one random substream.
    pub num_faps: u32,
    /// Total entry events, split as evenly as possible across access points.
    pub trials: u64,
    pub seed: u64,
    pub windows: Windows,
}

pub const DEFAULT_SEED: u64 = 20_100_101;

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            geometry: FemtocellGeometry::default(),
            mobility: MobilityParams::default(),
            thresholds: CacThresholds::default(),
            num_faps: 150,
            trials: 150_000,
            seed: DEFAULT_SEED,
            windows: Windows::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        FemtocellGeometry::new(self.geometry.radius)?;
        self.mobility.validate()?;
        let bad = |msg: &str| Err(SimError::InvalidScenario(msg.to_string()));
        if self.num_faps == 0 {
            return bad("at least one access point is required");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if !(self.windows.return_window > 0.0 && self.windows.termination_window > 0.0) {
            return bad("unnecessary-handover windows must be positive");
        }
        if !(self.thresholds.min_dwell >= 0.0) {
            return bad("threshold time must be non-negative");
        }
        if !(self.thresholds.velocity_threshold > 0.0) {
            return bad("velocity threshold must be positive");
        }
        Ok(())
    }

    pub fn with_min_dwell(&self, min_dwell: f64) -> Self {
        let mut config = *self;
        config.thresholds.min_dwell = min_dwell;
        config
    }

    fn entries_for(&self, fap: u32) -> u64 {
        let n = u64::from(self.num_faps);
        self.trials / n + u64::from(u64::from(fap) < self.trials % n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    NotPerformed,
    Necessary,
    UnnecessaryReturn,
    UnnecessaryTermination,
}

impl Classification {
    pub fn is_unnecessary(&self) -> bool {
        matches!(
            self,
            Classification::UnnecessaryReturn | Classification::UnnecessaryTermination
        )
    }
}

/// Classifies an executed handover.
pub fn classify_outcome(residence: f64, call_remaining: f64, windows: &Windows) -> Classification {
    if call_remaining < residence && call_remaining < windows.termination_window {
        Classification::UnnecessaryTermination
    } else if residence <= call_remaining && residence < windows.return_window {
        Classification::UnnecessaryReturn
    } else {
        Classification::Necessary
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub classification: Classification,
    pub residence: f64,
    pub call_remaining: f64,
    pub decision: Decision,
}

/// Counts over a batch of entries. Merging is commutative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AggregateStats {
    pub entries: u64,
    pub handovers: u64,
    pub necessary: u64,
    pub unnecessary_return: u64,
    pub unnecessary_termination: u64,
    /// Accepted entries whose call was still alive when the user left the cell,
    /// i.e. that produced a femto-to-macro handover as well.
    pub return_handovers: u64,
}

impl AggregateStats {
    pub fn record(&mut self, outcome: &TrialOutcome) {
        self.entries += 1;
        match outcome.classification {
            Classification::NotPerformed => return,
            Classification::Necessary => self.necessary += 1,
            Classification::UnnecessaryReturn => self.unnecessary_return += 1,
            Classification::UnnecessaryTermination => self.unnecessary_termination += 1,
        }
        self.handovers += 1;
        if outcome.call_remaining >= outcome.residence {
            self.return_handovers += 1;
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.entries += other.entries;
        self.handovers += other.handovers;
        self.necessary += other.necessary;
        self.unnecessary_return += other.unnecessary_return;
        self.unnecessary_termination += other.unnecessary_termination;
        self.return_handovers += other.return_handovers;
        self
    }

    pub fn unnecessary(&self) -> u64 {
        self.unnecessary_return + self.unnecessary_termination
    }

    pub fn rejected(&self) -> u64 {
        self.entries - self.handovers
    }

    /// Handovers in both directions.
    pub fn total_handover_events(&self) -> u64 {
        self.handovers + self.return_handovers
    }

    /// `None` when no handover was accepted.
    pub fn unnecessary_fraction(&self) -> Option<f64> {
        (self.handovers > 0).then(|| self.unnecessary() as f64 / self.handovers as f64)
    }

    /// Normal-approximation 95% half-width of the unnecessary fraction.
    pub fn ci95_halfwidth(&self) -> Option<f64> {
        let p = self.unnecessary_fraction()?;
        Some(Z95 * (p * (1.0 - p) / self.handovers as f64).sqrt())
    }
}

fn outcome_for(
    config: &ScenarioConfig,
    velocity: f64,
    residence: f64,
    call_remaining: f64,
) -> TrialOutcome {
    let ctx = HandoverContext {
        predicted_dwell: residence,
        velocity,
        cir: None,
    };
    let decision = decide(&ctx, &config.thresholds);
    let classification = if decision.accepted() {
        classify_outcome(residence, call_remaining, &config.windows)
    } else {
        Classification::NotPerformed
    };
    TrialOutcome {
        classification,
        residence,
        call_remaining,
        decision,
    }
}

fn for_each_outcome(config: &ScenarioConfig, fap: u32, mut f: impl FnMut(TrialOutcome)) {
    let sampler = config.mobility.sampler();
    let mut rng = substream(config.seed, u64::from(fap));
    for _ in 0..config.entries_for(fap) {
        let draw = sampler.sample(&mut rng);
        let residence = residence_time(&config.geometry, &draw).expect("sampled velocity is positive");
        f(outcome_for(config, draw.velocity, residence, draw.call_remaining));
    }
}

/// Per-entry outcomes generated by access point `fap`, in draw order.
pub fn trial_outcomes(config: &ScenarioConfig, fap: u32) -> Result<Vec<TrialOutcome>, SimError> {
    config.validate()?;
    let mut out = Vec::with_capacity(config.entries_for(fap) as usize);
    for_each_outcome(config, fap, |o| out.push(o));
    Ok(out)
}

pub fn run_unnecessary_handover_experiment(config: &ScenarioConfig) -> Result<AggregateStats, SimError> {
    config.validate()?;
    Ok((0..config.num_faps)
        .into_par_iter()
        .map(|fap| {
            let mut stats = AggregateStats::default();
            for_each_outcome(config, fap, |o| stats.record(&o));
            stats
        })
        .reduce(AggregateStats::default, AggregateStats::merge))
}

/// Runs the experiment once per threshold time with the same seed, so every
/// setting sees the same entries.
pub fn sweep_threshold_time(
    config: &ScenarioConfig,
    threshold_times: &[f64],
) -> Result<Vec<(f64, AggregateStats)>, SimError> {
    threshold_times
        .iter()
        .map(|&t| Ok((t, run_unnecessary_handover_experiment(&config.with_min_dwell(t))?)))
        .collect()
}
