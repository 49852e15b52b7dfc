//! Event-driven simulation of the guard-channel loss system.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::substream;
use crate::admission::{guard_admission, Admission, CallClass};
use crate::queuing::{GuardChannelParams, QueuingError};

/// Statistics are accumulated in this many equal time batches; standard
/// errors come from the spread between batches.
const BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Departure(f64);

impl Eq for Departure {}

impl PartialOrd for Departure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Departure {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ClassCounts {
    arrivals: u64,
    blocked: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassEstimate {
    pub arrivals: u64,
    pub blocked: u64,
    /// `None` when the class saw no arrivals.
    pub blocking: Option<f64>,
    /// Batch-means standard error of `blocking`.
    pub std_error: Option<f64>,
}

impl ClassEstimate {
    fn from_batches(batches: &[ClassCounts]) -> Self {
        let arrivals: u64 = batches.iter().map(|b| b.arrivals).sum();
        let blocked: u64 = batches.iter().map(|b| b.blocked).sum();
        if arrivals == 0 {
            return Self {
                arrivals,
                blocked,
                blocking: None,
                std_error: None,
            };
        }
        let p = blocked as f64 / arrivals as f64;
        // Ratio estimator variance across batches.
        let b = batches.len() as f64;
        let ss: f64 = batches
            .iter()
            .map(|c| (c.blocked as f64 - p * c.arrivals as f64).powi(2))
            .sum();
        let se = (b / (b - 1.0) * ss).sqrt() / arrivals as f64;
        Self {
            arrivals,
            blocked,
            blocking: Some(p),
            std_error: Some(se),
        }
    }

    /// |estimate - reference| in standard errors; `None` if undefined.
    pub fn z_score(&self, reference: f64) -> Option<f64> {
        let (p, se) = (self.blocking?, self.std_error?);
        if se > 0.0 {
            Some((p - reference).abs() / se)
        } else if p == reference {
            Some(0.0)
        } else {
            Some(f64::INFINITY)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesReport {
    pub new_calls: ClassEstimate,
    pub handovers: ClassEstimate,
    /// Time-averaged busy channels divided by N.
    pub utilization: f64,
    /// Length of the observation period after warm-up, seconds.
    pub observed: f64,
}

fn next_arrival<R: Rng>(rate: Option<&Exp<f64>>, now: f64, rng: &mut R) -> f64 {
    rate.map_or(f64::INFINITY, |d| now + d.sample(rng))
}

/// Simulates Poisson arrivals of both call classes with exponential holding
/// times up to `horizon` seconds. The first `min(20/μ, horizon/10)` seconds
/// are discarded as warm-up.
pub fn run_blocking_des(
    params: &GuardChannelParams,
    horizon: f64,
    seed: u64,
) -> Result<DesReport, QueuingError> {
    params.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(QueuingError::InvalidParams("horizon must be positive".into()));
    }
    let mut rng = substream(seed, 0);
    let exp = |rate: f64| (rate > 0.0).then(|| Exp::new(rate).expect("positive rate"));
    let new_gap = exp(params.new_call_rate);
    let handover_gap = exp(params.handover_rate);
    let holding = Exp::new(params.service_rate).expect("validated service rate");

    let warmup = (20.0 / params.service_rate).min(horizon / 10.0);
    let batch_len = (horizon - warmup) / BATCHES as f64;
    let batch_of = |t: f64| (((t - warmup) / batch_len) as usize).min(BATCHES - 1);

    let mut new_counts = [ClassCounts::default(); BATCHES];
    let mut handover_counts = [ClassCounts::default(); BATCHES];
    let mut busy: BinaryHeap<Reverse<Departure>> = BinaryHeap::new();
    let mut busy_area = 0.0;
    let mut now = 0.0;
    let mut next_new = next_arrival(new_gap.as_ref(), now, &mut rng);
    let mut next_handover = next_arrival(handover_gap.as_ref(), now, &mut rng);

    loop {
        let next_departure = busy.peek().map_or(f64::INFINITY, |Reverse(d)| d.0);
        let t = next_new.min(next_handover).min(next_departure);
        let t_clamped = t.min(horizon);
        if t_clamped > warmup {
            busy_area += busy.len() as f64 * (t_clamped - now.max(warmup));
        }
        if t >= horizon {
            break;
        }
        now = t;

        if t == next_departure {
            busy.pop();
            continue;
        }
        let class = if t == next_new {
            next_new = next_arrival(new_gap.as_ref(), now, &mut rng);
            CallClass::New
        } else {
            next_handover = next_arrival(handover_gap.as_ref(), now, &mut rng);
            CallClass::Handover
        };
        let admission = guard_admission(busy.len(), params, class);
        if admission == Admission::Accept {
            busy.push(Reverse(Departure(now + holding.sample(&mut rng))));
        }
        if now >= warmup {
            let counts = match class {
                CallClass::New => &mut new_counts[batch_of(now)],
                CallClass::Handover => &mut handover_counts[batch_of(now)],
            };
            counts.arrivals += 1;
            counts.blocked += u64::from(admission == Admission::Reject);
        }
    }

    let observed = horizon - warmup;
    Ok(DesReport {
        new_calls: ClassEstimate::from_batches(&new_counts),
        handovers: ClassEstimate::from_batches(&handover_counts),
        utilization: busy_area / (observed * params.num_channels as f64),
        observed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::queuing::blocking_report;

    #[test]
    fn no_handover_traffic_leaves_handover_blocking_undefined() {
        let p = GuardChannelParams::new(4, 3, 0.5, 0.0, 1.0).unwrap();
        let r = run_blocking_des(&p, 2e4, 3).unwrap();
        assert_eq!(r.handovers.arrivals, 0);
        assert_eq!(r.handovers.blocking, None);
        assert!(r.new_calls.blocking.is_some());
    }

    #[test]
    fn identical_rules_block_alike_without_guard() {
        let p = GuardChannelParams::new(5, 5, 2.0, 2.0, 1.0).unwrap();
        let r = run_blocking_des(&p, 5e4, 11).unwrap();
        let (pb, pd) = (r.new_calls.blocking.unwrap(), r.handovers.blocking.unwrap());
        let se = (r.new_calls.std_error.unwrap().powi(2) + r.handovers.std_error.unwrap().powi(2)).sqrt();
        assert!((pb - pd).abs() < 4.0 * se, "pb={pb} pd={pd} se={se}");
    }

    #[test]
    fn agrees_with_closed_form_on_small_pool() {
        let p = GuardChannelParams::new(3, 2, 1.5, 0.8, 1.0).unwrap();
        let exact = blocking_report(&p);
        let r = run_blocking_des(&p, 1e5, 5).unwrap();
        assert!(r.new_calls.z_score(exact.new_call_blocking).unwrap() < 3.0);
        assert!(r.handovers.z_score(exact.handover_blocking).unwrap() < 3.0);
        assert!((r.utilization - exact.utilization).abs() < 0.01);
    }

    #[test]
    fn same_seed_same_report() {
        let p = GuardChannelParams::new(3, 2, 1.5, 0.8, 1.0).unwrap();
        assert_eq!(run_blocking_des(&p, 1e4, 9).unwrap(), run_blocking_des(&p, 1e4, 9).unwrap());
    }

    #[test]
    fn rejects_bad_horizon() {
        let p = GuardChannelParams::new(3, 2, 1.5, 0.8, 1.0).unwrap();
        assert!(run_blocking_des(&p, 0.0, 1).is_err());
    }
}
