use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Slack used when testing membership, so angles computed exactly on a
/// boundary (e.g. `atan2(1, 1)` against `pi/4`) count as inside.
pub const DI_TOLERANCE: f64 = 1e-9;

/// Closed interval of directions `[theta_min, theta_max]` with diameter
/// strictly between 0 and pi.
///
/// Membership is decided modulo 2*pi. Because the diameter is below pi, any
/// set of directions inside the interval has a unique representative in
/// `[theta_min, theta_max]`, so plain arithmetic means and differences of
/// representatives are well defined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionalInterval {
    theta_min: f64,
    theta_max: f64,
}

impl DirectionalInterval {
    pub fn new(theta_min: f64, theta_max: f64) -> Result<Self> {
        if !theta_min.is_finite() || !theta_max.is_finite() {
            return Err(Error::validation("di", "bounds must be finite"));
        }
        let diameter = theta_max - theta_min;
        if !(diameter > 0.0 && diameter < PI) {
            return Err(Error::validation(
                "di",
                format!("diameter {diameter} must lie in (0, pi)"),
            ));
        }
        Ok(DirectionalInterval {
            theta_min,
            theta_max,
        })
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn diameter(&self) -> f64 {
        self.theta_max - self.theta_min
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.theta_min + self.theta_max)
    }

    /// Representative of `angle` modulo 2*pi. Inside angles (within
    /// [`DI_TOLERANCE`]) map into `[theta_min, theta_max]`, and angles already
    /// in the interval are returned unchanged. Outside angles map into
    /// `(theta_max, theta_min + 2pi)`.
    pub fn representative(&self, angle: f64) -> f64 {
        if angle >= self.theta_min && angle <= self.theta_max {
            return angle;
        }
        let candidate = self.theta_min + (angle - self.theta_min).rem_euclid(2.0 * PI);
        if candidate <= self.theta_max {
            candidate
        } else if candidate <= self.theta_max + DI_TOLERANCE {
            self.theta_max
        } else if candidate - 2.0 * PI >= self.theta_min - DI_TOLERANCE {
            self.theta_min
        } else {
            candidate
        }
    }

    pub fn contains(&self, angle: f64) -> bool {
        self.representative(angle) <= self.theta_max
    }
}
