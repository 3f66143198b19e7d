use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gravity used by default in the model.
pub const DEFAULT_GRAVITY: f64 = 9.81;

/// Standard gravity, used for `g` unit conversions at the I/O boundary.
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Lumped constants of the payload-on-frame model `m·ẍ + c·ẋ + k·x = m·g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactParams {
    /// Payload mass, kg.
    pub mass: f64,
    /// Equivalent damping, N·s/m.
    pub damping: f64,
    /// Equivalent stiffness, N/m.
    pub stiffness: f64,
    /// Gravitational acceleration, m/s².
    pub gravity: f64,
}

impl ImpactParams {
    pub fn new(mass: f64, damping: f64, stiffness: f64) -> Result<Self> {
        Self::with_gravity(mass, damping, stiffness, DEFAULT_GRAVITY)
    }

    pub fn with_gravity(mass: f64, damping: f64, stiffness: f64, gravity: f64) -> Result<Self> {
        let p = Self {
            mass,
            damping,
            stiffness,
            gravity,
        };
        p.validate()?;
        Ok(p)
    }

    /// The fitted flexible frame: 241 g, c = 46, k = 7040.
    pub fn reference() -> Self {
        Self {
            mass: 0.241,
            damping: 46.0,
            stiffness: 7040.0,
            gravity: DEFAULT_GRAVITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.mass, self.damping, self.stiffness, self.gravity]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Config(format!("non-finite model parameter in {self:?}")));
        }
        if self.mass <= 0.0 {
            return Err(Error::Config(format!("mass must be > 0, got {}", self.mass)));
        }
        if self.stiffness <= 0.0 {
            return Err(Error::Config(format!(
                "stiffness must be > 0, got {}",
                self.stiffness
            )));
        }
        if self.damping < 0.0 {
            return Err(Error::Config(format!(
                "damping must be >= 0, got {}",
                self.damping
            )));
        }
        if self.gravity < 0.0 {
            return Err(Error::Config(format!(
                "gravity must be >= 0, got {}",
                self.gravity
            )));
        }
        Ok(())
    }

    /// Undamped natural frequency `sqrt(k/m)`, rad/s.
    pub fn natural_frequency(&self) -> f64 {
        (self.stiffness / self.mass).sqrt()
    }

    /// `2·sqrt(k·m)`.
    pub fn critical_damping(&self) -> f64 {
        2.0 * (self.stiffness * self.mass).sqrt()
    }

    /// `ζ = c / (2·sqrt(k·m))`.
    pub fn damping_ratio(&self) -> f64 {
        self.damping / self.critical_damping()
    }

    /// Static compression under the payload's own weight.
    pub fn static_deflection(&self) -> f64 {
        self.mass * self.gravity / self.stiffness
    }

    pub fn with_damping(self, damping: f64) -> Self {
        Self { damping, ..self }
    }

    pub fn with_stiffness(self, stiffness: f64) -> Self {
        Self { stiffness, ..self }
    }
}

/// A vertical free-fall crash landing and the sensor that records it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropScenario {
    /// Free-fall height above first frame-ground contact, m.
    pub drop_altitude: f64,
    /// Compression stroke available before the payload hits the ground, m.
    pub clearance: f64,
    /// Accelerometer bandwidth, Hz.
    pub sensor_cutoff: f64,
    /// Trajectory and sensor sample rate, Hz.
    pub sample_rate: f64,
}

impl Default for DropScenario {
    fn default() -> Self {
        Self {
            drop_altitude: 0.0,
            clearance: Self::DEFAULT_CLEARANCE,
            sensor_cutoff: Self::DEFAULT_SENSOR_CUTOFF,
            sample_rate: Self::DEFAULT_SAMPLE_RATE,
        }
    }
}

impl DropScenario {
    pub const DEFAULT_CLEARANCE: f64 = 0.016;
    pub const DEFAULT_SENSOR_CUTOFF: f64 = 500.0;
    pub const DEFAULT_SAMPLE_RATE: f64 = 20_000.0;

    pub fn from_altitude(drop_altitude: f64) -> Self {
        Self {
            drop_altitude,
            ..Self::default()
        }
    }

    pub fn at_altitude(self, drop_altitude: f64) -> Self {
        Self {
            drop_altitude,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [
            self.drop_altitude,
            self.clearance,
            self.sensor_cutoff,
            self.sample_rate,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Config(format!("non-finite scenario value in {self:?}")));
        }
        if self.drop_altitude < 0.0 {
            return Err(Error::Config(format!(
                "drop altitude must be >= 0, got {}",
                self.drop_altitude
            )));
        }
        if self.clearance <= 0.0 {
            return Err(Error::Config(format!(
                "clearance must be > 0, got {}",
                self.clearance
            )));
        }
        if self.sensor_cutoff <= 0.0 {
            return Err(Error::Config(format!(
                "sensor cutoff must be > 0, got {}",
                self.sensor_cutoff
            )));
        }
        if self.sample_rate <= 2.0 * self.sensor_cutoff {
            return Err(Error::Config(format!(
                "sample rate {} Hz must exceed twice the sensor cutoff {} Hz",
                self.sample_rate, self.sensor_cutoff
            )));
        }
        Ok(())
    }
}
