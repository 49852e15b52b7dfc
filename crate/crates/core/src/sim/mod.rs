//! Monte Carlo and discrete-event harnesses.
//!
//! [`experiment`] replays femtocell entries through the admission rule and
//! classifies each accepted handover. [`des`] simulates the guard-channel
//! loss system arrival by arrival, as an event-level check on the closed
//! forms in [`crate::queuing`].

pub mod des;
pub mod experiment;

pub use des::{run_blocking_des, DesReport};
pub use experiment::{
    classify_outcome, run_unnecessary_handover_experiment, sweep_threshold_time, trial_outcomes,
    AggregateStats, Classification, ScenarioConfig, TrialOutcome, Windows,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random stream `stream` derived from a master seed.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Two-sided 95% normal quantile.
pub(crate) const Z95: f64 = 1.959_963_984_540_054;
