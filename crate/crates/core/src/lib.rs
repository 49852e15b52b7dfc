//! Handover control toolkit for integrated femtocell/macrocell WCDMA networks.
//!
//! * [`queuing`]: guard-channel blocking analysis of the femtocell channel pool.
//! * [`mobility`]: femtocell entry sampling and residence times.
//! * [`admission`]: the handover admission decision and the guard-channel rule.
//! * [`signaling`]: executable handover call flows and trace checks.
//! * [`sim`]: Monte Carlo and discrete-event harnesses.
//! * [`config`] and [`report`]: scenario files, CSV output and the CLI driver.

pub mod admission;
pub mod config;
pub mod mobility;
pub mod queuing;
pub mod report;
pub mod signaling;
pub mod sim;
