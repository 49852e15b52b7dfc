//! Admission decisions for macrocell-to-femtocell handovers and the
//! per-arrival guard-channel rule.

use crate::mobility::KMH;
use crate::queuing::GuardChannelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacThresholds {
    /// T: seconds the femto signal must stay usable. Zero disables the check.
    pub min_dwell: f64,
    /// m/s, compared strictly.
    pub velocity_threshold: f64,
    /// dB
    pub cir_threshold: f64,
    /// dBm. Only reaches the decision through the predicted dwell.
    pub rssi_threshold: f64,
}

impl Default for CacThresholds {
    fn default() -> Self {
        Self {
            min_dwell: 0.0,
            velocity_threshold: 10.0 * KMH,
            cir_threshold: 0.0,
            rssi_threshold: -100.0,
        }
    }
}

/// Carrier-to-interference ratios, in dB, on both layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirReadings {
    pub femto: f64,
    pub macro_cell: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoverContext {
    /// Seconds the femto signal is expected to stay above the RSSI threshold.
    pub predicted_dwell: f64,
    /// m/s
    pub velocity: f64,
    /// `None` disables the CIR check (factor forced to 1).
    pub cir: Option<CirReadings>,
}

/// The three factors of the decision parameter. `x()` is their product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decision {
    pub signal: bool,
    pub velocity: bool,
    pub cir: bool,
}

impl Decision {
    pub fn x(&self) -> u8 {
        u8::from(self.signal) * u8::from(self.velocity) * u8::from(self.cir)
    }

    pub fn accepted(&self) -> bool {
        self.x() == 1
    }
}

pub fn signal_factor(ctx: &HandoverContext, th: &CacThresholds) -> bool {
    ctx.predicted_dwell >= th.min_dwell
}

pub fn velocity_factor(ctx: &HandoverContext, th: &CacThresholds) -> bool {
    ctx.velocity < th.velocity_threshold
}

pub fn cir_factor(ctx: &HandoverContext, th: &CacThresholds) -> bool {
    match ctx.cir {
        Some(cir) => cir.femto >= th.cir_threshold || cir.femto >= cir.macro_cell,
        None => true,
    }
}

/// A rejected handover keeps the call on the macrocell; nothing is dropped.
pub fn decide(ctx: &HandoverContext, th: &CacThresholds) -> Decision {
    Decision {
        signal: signal_factor(ctx, th),
        velocity: velocity_factor(ctx, th),
        cir: cir_factor(ctx, th),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CallClass {
    New,
    Handover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Admission {
    Accept,
    Reject,
}

/// New calls need occupancy below K, handover calls below N.
pub fn guard_admission(occupancy: usize, params: &GuardChannelParams, class: CallClass) -> Admission {
    let limit = match class {
        CallClass::New => params.guard_threshold,
        CallClass::Handover => params.num_channels,
    };
    if occupancy < limit {
        Admission::Accept
    } else {
        Admission::Reject
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::queuing::arrival_rate;

    fn ctx(dwell: f64, velocity: f64, cir: Option<(f64, f64)>) -> HandoverContext {
        HandoverContext {
            predicted_dwell: dwell,
            velocity,
            cir: cir.map(|(femto, macro_cell)| CirReadings { femto, macro_cell }),
        }
    }

    fn with_t(t: f64) -> CacThresholds {
        CacThresholds {
            min_dwell: t,
            cir_threshold: 15.0,
            ..CacThresholds::default()
        }
    }

    #[test]
    fn signal_examples() {
        assert!(signal_factor(&ctx(25.0, 0.1, None), &with_t(20.0)));
        assert!(!signal_factor(&ctx(15.0, 0.1, None), &with_t(20.0)));
        for dwell in [0.0, 1e-9, 3.0, 1e6] {
            assert!(signal_factor(&ctx(dwell, 0.1, None), &with_t(0.0)));
        }
    }

    #[test]
    fn velocity_examples() {
        let th = CacThresholds::default();
        assert!(velocity_factor(&ctx(1.0, 0.5 * KMH, None), &th));
        assert!(!velocity_factor(&ctx(1.0, 11.0 * KMH, None), &th));
        assert!(!velocity_factor(&ctx(1.0, th.velocity_threshold, None), &th));
    }

    #[test]
    fn cir_examples() {
        let th = with_t(0.0);
        assert!(cir_factor(&ctx(1.0, 0.1, Some((20.0, 25.0))), &th));
        assert!(cir_factor(&ctx(1.0, 0.1, Some((10.0, 8.0))), &th));
        assert!(!cir_factor(&ctx(1.0, 0.1, Some((10.0, 12.0))), &th));
        assert!(cir_factor(&ctx(1.0, 0.1, None), &th));
    }

    #[test]
    fn decision_truth_table() {
        let th = with_t(10.0);
        for signal in [false, true] {
            for velocity in [false, true] {
                for cir in [false, true] {
                    let c = ctx(
                        if signal { 15.0 } else { 5.0 },
                        if velocity { 0.3 } else { 5.0 },
                        Some(if cir { (20.0, 0.0) } else { (10.0, 12.0) }),
                    );
                    let d = decide(&c, &th);
                    assert_eq!((d.signal, d.velocity, d.cir), (signal, velocity, cir));
                    let expected = u8::from(signal && velocity && cir);
                    assert_eq!(d.x(), expected);
                    assert_eq!(d.accepted(), expected == 1);
                }
            }
        }
    }

    #[test]
    fn table_defaults_accept_slow_long_dwell() {
        let d = decide(&ctx(15.0, 0.3, Some((16.0, 20.0))), &with_t(10.0));
        assert_eq!(d.x(), 1);
    }

    #[test]
    fn guard_admission_examples() {
        let p = GuardChannelParams::new(10, 8, 0.1, 0.075, 1.0 / 120.0).unwrap();
        assert_eq!(guard_admission(7, &p, CallClass::New), Admission::Accept);
        assert_eq!(guard_admission(8, &p, CallClass::New), Admission::Reject);
        assert_eq!(guard_admission(8, &p, CallClass::Handover), Admission::Accept);
        assert_eq!(guard_admission(10, &p, CallClass::Handover), Admission::Reject);
    }

    #[test]
    fn guard_admission_agrees_with_arrival_rates() {
        for k in 0..=6 {
            let p = GuardChannelParams::new(6, k, 0.4, 0.3, 1.0).unwrap();
            for j in 0..=6 {
                let rate = arrival_rate(&p, j).unwrap();
                let new_ok = guard_admission(j, &p, CallClass::New) == Admission::Accept;
                let ho_ok = guard_admission(j, &p, CallClass::Handover) == Admission::Accept;
                let expected = f64::from(u8::from(new_ok)) * 0.4 + f64::from(u8::from(ho_ok)) * 0.3;
                assert!((rate - expected).abs() < 1e-15, "K={k} j={j}");
            }
        }
    }
}
