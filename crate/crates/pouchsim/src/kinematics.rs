//! Underarm wedge kinematics and virtual-work torque.
//!
//! The inflated pouch acts as a wedge between torso and arm. The supporting
//! cell is modeled as a cylinder of radius `h/2` inscribed between the two
//! lines meeting at the shoulder joint; with its center a distance `d` from
//! the joint, tangency gives the shoulder angle
//!
//! ```text
//! theta = 2 * asin(h / (2 d))
//! ```
//!
//! For a multi-cell actuator the innermost cell governs the contact, so the
//! effective distance is the calibrated anchor offset plus half the chord of
//! one cell (the chord shrinks as the pouch inflates).

use crate::actuator::{
    cell_chord, cell_chord_deriv, cell_volume, cell_volume_deriv, stack_height, stack_height_deriv,
    ActuatorDesign,
};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Shoulder angle produced by a pouch of thickness `h` whose supporting cell
/// center sits `contact_distance` from the joint. Saturates at `h >= 2d`,
/// where the tangency construction degenerates; the angle is clamped to the
/// fold-flat limit and flagged.
pub fn shoulder_angle_from_thickness(thickness: f64, contact_distance: f64) -> (f64, bool) {
    if thickness <= 0.0 {
        return (0.0, false);
    }
    let arg = thickness / (2.0 * contact_distance);
    if arg >= 1.0 {
        (PI, true)
    } else {
        (2.0 * arg.asin(), false)
    }
}

/// Strict variant: saturation is an error.
pub fn shoulder_angle_strict(thickness: f64, contact_distance: f64) -> Result<f64> {
    let (angle, saturated) = shoulder_angle_from_thickness(thickness, contact_distance);
    if saturated {
        return Err(Error::Saturated {
            thickness,
            contact: contact_distance,
        });
    }
    Ok(angle)
}

/// Wedge contact model: anchor offset from the joint to the inner edge of
/// the inflatable span, m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WedgeContact {
    pub offset: f64,
}

/// Design-phase default anchor offset, m. Rig calibration replaces it.
pub const DEFAULT_CONTACT_OFFSET: f64 = 0.035;

impl Default for WedgeContact {
    fn default() -> Self {
        WedgeContact {
            offset: DEFAULT_CONTACT_OFFSET,
        }
    }
}

impl WedgeContact {
    pub fn new(offset: f64) -> Result<Self> {
        if !(offset > 0.0) {
            return Err(Error::Domain("contact offset must be positive".into()));
        }
        Ok(WedgeContact { offset })
    }

    /// Distance from the joint to the supporting cell center at fill state
    /// `theta_a`, m.
    pub fn contact_distance(&self, design: &ActuatorDesign, theta_a: f64) -> Result<f64> {
        Ok(self.offset + 0.5 * cell_chord(design, theta_a)?)
    }

    /// Shoulder angle at fill state `theta_a`; saturation is clamped and
    /// flagged.
    pub fn shoulder_angle(&self, design: &ActuatorDesign, theta_a: f64) -> Result<(f64, bool)> {
        let h = stack_height(design, theta_a)?;
        let d = self.contact_distance(design, theta_a)?;
        Ok(shoulder_angle_from_thickness(h, d))
    }

    /// Largest shoulder angle the design can reach (at full inflation), rad.
    pub fn max_shoulder_angle(&self, design: &ActuatorDesign) -> Result<f64> {
        Ok(self.shoulder_angle(design, FRAC_PI_2)?.0)
    }

    /// d(theta)/d(theta_a) at fill state `theta_a`.
    pub fn dtheta_dtheta_a(&self, design: &ActuatorDesign, theta_a: f64) -> Result<f64> {
        let h = stack_height(design, theta_a)?;
        let d = self.contact_distance(design, theta_a)?;
        let r = 0.5 * h;
        let u = r / d;
        if u >= 1.0 {
            return Err(Error::Saturated {
                thickness: h,
                contact: d,
            });
        }
        let r_prime = 0.5 * stack_height_deriv(design, theta_a)?;
        let d_prime = 0.5 * cell_chord_deriv(design, theta_a)?;
        let u_prime = (r_prime * d - r * d_prime) / (d * d);
        Ok(2.0 * u_prime / (1.0 - u * u).sqrt())
    }

    /// Inverts the wedge map: the fill state `theta_a` at which the shoulder
    /// angle equals `theta`. Returns `None` when `theta` exceeds the design's
    /// reachable range.
    pub fn invert(&self, design: &ActuatorDesign, theta: f64) -> Result<Option<f64>> {
        if theta <= 0.0 {
            return Ok(Some(0.0));
        }
        if theta > self.max_shoulder_angle(design)? {
            return Ok(None);
        }
        let mut lo = 0.0;
        let mut hi = FRAC_PI_2;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.shoulder_angle(design, mid)?.0 < theta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(0.5 * (lo + hi)))
    }
}

/// Quasi-static lift torque of the idealized arc-section pouch, N*m:
/// `tau = P * (dV/dtheta_a) / (dtheta/dtheta_a)` with both derivatives in
/// closed form.
pub fn lift_torque(
    design: &ActuatorDesign,
    theta_a: f64,
    pressure: f64,
    wedge: &WedgeContact,
) -> Result<f64> {
    if pressure < 0.0 {
        return Err(Error::Domain("pressure must be nonnegative".into()));
    }
    let dv = cell_volume_deriv(design, theta_a)?;
    let dtheta = wedge.dtheta_dtheta_a(design, theta_a)?;
    if dtheta.abs() < 1e-14 {
        return Err(Error::TorqueSingularity(theta_a));
    }
    Ok(pressure * dv / dtheta)
}

/// Idealized enclosed volume at the fill state where the shoulder angle is
/// `theta` (used by the virtual-work consistency check).
pub fn volume_at_shoulder_angle(
    design: &ActuatorDesign,
    theta: f64,
    wedge: &WedgeContact,
) -> Result<Option<f64>> {
    match wedge.invert(design, theta)? {
        None => Ok(None),
        Some(theta_a) => Ok(Some(cell_volume(design, theta_a)?)),
    }
}
