//! Femtocell entry events and straight-line residence times.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Exp, Uniform};
use thiserror::Error;

/// km/h to m/s.
pub const KMH: f64 = 1.0 / 3.6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MobilityError {
    #[error("femtocell radius must be positive, got {0}")]
    Radius(f64),
    #[error("mean velocity must be positive, got {0}")]
    MeanVelocity(f64),
    #[error("mean call life must be positive, got {0}")]
    MeanCallLife(f64),
    #[error("velocity must be positive to cross a cell, got {0}")]
    Stationary(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FemtocellGeometry {
    /// Coverage radius in meters.
    pub radius: f64,
}

impl FemtocellGeometry {
    pub fn new(radius: f64) -> Result<Self, MobilityError> {
        if radius > 0.0 && radius.is_finite() {
            Ok(Self { radius })
        } else {
            Err(MobilityError::Radius(radius))
        }
    }
}

impl Default for FemtocellGeometry {
    fn default() -> Self {
        Self { radius: 10.0 }
    }
}

/// Velocity and remaining call life are exponential with the given means;
/// the entry angle is uniform over the half-plane facing the access point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityParams {
    /// m/s
    pub mean_velocity: f64,
    /// Seconds of call remaining at femtocell entry.
    pub mean_call_life: f64,
}

impl MobilityParams {
    pub fn new(mean_velocity: f64, mean_call_life: f64) -> Result<Self, MobilityError> {
        let params = Self {
            mean_velocity,
            mean_call_life,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), MobilityError> {
        if !(self.mean_velocity > 0.0 && self.mean_velocity.is_finite()) {
            return Err(MobilityError::MeanVelocity(self.mean_velocity));
        }
        if !(self.mean_call_life > 0.0 && self.mean_call_life.is_finite()) {
            return Err(MobilityError::MeanCallLife(self.mean_call_life));
        }
        Ok(())
    }

    /// Builds a reusable sampler. Panics on invalid params; call
    /// [`MobilityParams::validate`] first when the values are untrusted.
    pub fn sampler(&self) -> EntrySampler {
        EntrySampler {
            velocity: Exp::new(1.0 / self.mean_velocity).expect("validated mean velocity"),
            call_life: Exp::new(1.0 / self.mean_call_life).expect("validated mean call life"),
            angle: Uniform::new(-FRAC_PI_2, FRAC_PI_2).expect("finite range"),
        }
    }
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            mean_velocity: 1.0 * KMH,
            mean_call_life: 90.0,
        }
    }
}

/// One femtocell entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityDraw {
    /// m/s
    pub velocity: f64,
    /// Radians from the ray toward the access point, in (-π/2, π/2).
    pub entry_angle: f64,
    /// Seconds.
    pub call_remaining: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct EntrySampler {
    velocity: Exp<f64>,
    call_life: Exp<f64>,
    angle: Uniform<f64>,
}

impl EntrySampler {
    /// Draws velocity, then angle, then call life. The order is part of the
    /// reproducibility contract.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> MobilityDraw {
        let velocity = loop {
            let v = self.velocity.sample(rng);
            if v > 0.0 {
                break v;
            }
        };
        let entry_angle = loop {
            let theta = self.angle.sample(rng);
            if theta > -FRAC_PI_2 {
                break theta;
            }
        };
        MobilityDraw {
            velocity,
            entry_angle,
            call_remaining: self.call_life.sample(rng),
        }
    }
}

pub fn sample_entry<R: Rng + ?Sized>(params: &MobilityParams, rng: &mut R) -> MobilityDraw {
    params.sampler().sample(rng)
}

/// Time spent crossing the cell along a straight chord: `2 r cos θ / v`.
pub fn residence_time(geom: &FemtocellGeometry, draw: &MobilityDraw) -> Result<f64, MobilityError> {
    if !(draw.velocity > 0.0) {
        return Err(MobilityError::Stationary(draw.velocity));
    }
    if draw.entry_angle.abs() >= FRAC_PI_2 {
        return Ok(0.0);
    }
    Ok((2.0 * geom.radius * draw.entry_angle.cos() / draw.velocity).max(0.0))
}

/// Relative handover-frequency indicator `v sin θ / r`. Unitless and only
/// meaningful for comparisons between settings.
pub fn relative_handover_frequency(radius: f64, velocity: f64, angle: f64) -> f64 {
    velocity * angle.sin() / radius
}
