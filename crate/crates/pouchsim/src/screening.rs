//! Design-space screening: for each of the 20 variants, the pressure needed
//! to statically hold a target shoulder angle, the membrane stress at that
//! operating point, and a viability ranking.
//!
//! Ranking picks one champion per cell-count family before second choices:
//! within a family designs are ordered by stress margin then torque (the
//! widest wins both), families are ordered by their champion's margin, and
//! the final list interleaves families round-robin. This mirrors how
//! variants are down-selected for hardware: the best of each viable family
//! goes to the bench, not five near-identical widths.

use crate::actuator::{arc_radius, design_space, ActuatorDesign};
use crate::error::{Error, Result};
use crate::exec;
use crate::kinematics::WedgeContact;
use crate::materials::FabricMaterial;
use crate::pneumatics::{PneumaticConfig, PRESSURE_ENVELOPE};
use crate::rig::ArmModel;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Screening inputs and environment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScreenTargets {
    /// Shoulder angle the actuator must hold statically, rad.
    pub theta_target: f64,
    /// Supply pressure limit, Pa.
    pub supply_pressure: f64,
    /// Safety factor applied to the fabric yield strength.
    pub safety_factor: f64,
    /// Design-phase wedge contact (pre-calibration prior).
    pub contact: WedgeContact,
    pub material: FabricMaterial,
    pub arm: ArmModel,
    pub board: PneumaticConfig,
}

impl Default for ScreenTargets {
    fn default() -> Self {
        ScreenTargets {
            theta_target: 45.0f64.to_radians(),
            supply_pressure: PRESSURE_ENVELOPE,
            safety_factor: 2.0,
            contact: WedgeContact::default(),
            material: FabricMaterial::nylon_oxford(),
            arm: ArmModel::default(),
            board: PneumaticConfig::default(),
        }
    }
}

impl ScreenTargets {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_target > 0.0 && self.theta_target < std::f64::consts::PI) {
            return Err(Error::Config("theta_target outside (0, pi)".into()));
        }
        if !(self.supply_pressure > 0.0) {
            return Err(Error::Config("supply_pressure must be positive".into()));
        }
        if !(self.safety_factor >= 1.0) {
            return Err(Error::Config("safety_factor must be >= 1".into()));
        }
        self.material.validate()?;
        self.arm.validate()?;
        self.board.validate()
    }
}

/// Why a design failed the screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfeasibleReason {
    /// The wedge geometry cannot reach the target angle at full inflation.
    UnreachableAngle,
    /// Holding the target would need more than the supply pressure.
    PressureExceedsSupply,
    /// Membrane stress at the operating point exceeds yield / safety factor.
    StressExceedsAllowable,
}

/// Screen outcome for one design.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScreeningResult {
    pub design: ActuatorDesign,
    /// Pressure that statically holds the target angle, Pa (NaN when the
    /// angle is unreachable).
    pub required_pressure: f64,
    /// Hoop stress at the operating point and required pressure, Pa.
    pub hoop_stress: f64,
    /// Stack thickness at full inflation, m.
    pub max_thickness: f64,
    /// Torque headroom at the supply pressure over the gravity load, N*m.
    pub lift_torque_margin: f64,
    pub feasible: bool,
    pub reason: Option<InfeasibleReason>,
    /// 1-based rank; feasible designs first.
    pub rank: usize,
}

/// Pneumatic torque per unit gauge pressure at fill state `theta_a`, with
/// the calibrated linear capacity model: `dV/dtheta = capacity / (pi/2) /
/// (dtheta/dtheta_a)`.
pub fn torque_per_pressure(
    design: &ActuatorDesign,
    theta_a: f64,
    contact: &WedgeContact,
    board: &PneumaticConfig,
) -> Result<f64> {
    let dtheta = contact.dtheta_dtheta_a(design, theta_a.max(1e-9))?;
    if dtheta <= 1e-12 {
        return Err(Error::TorqueSingularity(theta_a));
    }
    Ok(board.capacity(design) / FRAC_PI_2 / dtheta)
}

/// Pressure that statically holds `theta_target`, by bisection on pressure
/// to 1 Pa absolute. `None` when the design cannot reach the angle.
pub fn required_pressure(
    design: &ActuatorDesign,
    targets: &ScreenTargets,
) -> Result<Option<(f64, f64)>> {
    let theta_a = match targets.contact.invert(design, targets.theta_target)? {
        Some(ta) => ta,
        None => return Ok(None),
    };
    let tpp = torque_per_pressure(design, theta_a, &targets.contact, &targets.board)?;
    let load = targets.arm.gravity_torque(targets.theta_target);
    let balance = |p: f64| p * tpp - load;
    // bracket generously above the supply so over-pressure designs resolve
    let mut lo = 0.0;
    let mut hi = 64.0 * targets.supply_pressure;
    if balance(hi) < 0.0 {
        return Ok(Some((f64::INFINITY, theta_a)));
    }
    while hi - lo > 1.0 {
        let mid = 0.5 * (lo + hi);
        if balance(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some((0.5 * (lo + hi), theta_a)))
}

/// Largest static shoulder angle the design settles at under constant gauge
/// pressure `p`, rad; bisection on the fill state of the torque balance.
pub fn achieved_static_angle(
    design: &ActuatorDesign,
    pressure: f64,
    targets: &ScreenTargets,
) -> Result<f64> {
    let balance = |theta_a: f64| -> Result<f64> {
        let tpp = torque_per_pressure(design, theta_a, &targets.contact, &targets.board)?;
        let theta = targets.contact.shoulder_angle(design, theta_a)?.0;
        Ok(pressure * tpp - targets.arm.gravity_torque(theta))
    };
    let mut lo = 1e-6;
    let mut hi = FRAC_PI_2 - 1e-9;
    if balance(lo)? < 0.0 {
        return Ok(0.0);
    }
    if balance(hi)? > 0.0 {
        return targets.contact.max_shoulder_angle(design);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if balance(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(targets.contact.shoulder_angle(design, 0.5 * (lo + hi))?.0)
}

/// Screens the full 20-variant design space.
pub fn screen_designs(targets: &ScreenTargets) -> Result<Vec<ScreeningResult>> {
    targets.validate()?;
    let designs = design_space();
    let allowable = targets.material.yield_strength / targets.safety_factor;

    let evaluated: Vec<Result<ScreeningResult>> = exec::map(designs, |design| {
        let max_thickness = crate::actuator::stack_height(&design, FRAC_PI_2)?;
        match required_pressure(&design, targets)? {
            None => Ok(ScreeningResult {
                max_thickness,
                required_pressure: f64::NAN,
                hoop_stress: f64::NAN,
                lift_torque_margin: f64::NAN,
                feasible: false,
                reason: Some(InfeasibleReason::UnreachableAngle),
                rank: 0,
                design,
            }),
            Some((p_req, theta_a)) => {
                let stress =
                    p_req * arc_radius(&design, theta_a)? / targets.material.wall_thickness;
                let tpp = torque_per_pressure(&design, theta_a, &targets.contact, &targets.board)?;
                let margin_torque = (targets.supply_pressure - p_req) * tpp;
                let (feasible, reason) = if p_req > targets.supply_pressure {
                    (false, Some(InfeasibleReason::PressureExceedsSupply))
                } else if stress > allowable {
                    (false, Some(InfeasibleReason::StressExceedsAllowable))
                } else {
                    (true, None)
                };
                Ok(ScreeningResult {
                    max_thickness,
                    required_pressure: p_req,
                    hoop_stress: stress,
                    lift_torque_margin: margin_torque,
                    feasible,
                    reason,
                    rank: 0,
                    design,
                })
            }
        }
    });
    let mut results: Vec<ScreeningResult> = evaluated.into_iter().collect::<Result<_>>()?;

    if !results.iter().any(|r| r.feasible) {
        return Err(Error::Degenerate(
            "no design can reach the target angle".into(),
        ));
    }

    // family-champion interleaved ranking over the feasible set
    let mut families: Vec<Vec<usize>> = Vec::new();
    for n in 1..=4u32 {
        let mut idx: Vec<usize> = results
            .iter()
            .enumerate()
            .filter(|(_, r)| r.feasible && r.design.n_cells == n)
            .map(|(i, _)| i)
            .collect();
        // lower stress = larger margin; torque breaks ties
        idx.sort_by(|&a, &b| {
            results[a]
                .hoop_stress
                .partial_cmp(&results[b].hoop_stress)
                .unwrap()
                .then(
                    results[b]
                        .lift_torque_margin
                        .partial_cmp(&results[a].lift_torque_margin)
                        .unwrap(),
                )
        });
        if !idx.is_empty() {
            families.push(idx);
        }
    }
    families.sort_by(|a, b| {
        results[a[0]]
            .hoop_stress
            .partial_cmp(&results[b[0]].hoop_stress)
            .unwrap()
            .then(
                results[b[0]]
                    .lift_torque_margin
                    .partial_cmp(&results[a[0]].lift_torque_margin)
                    .unwrap(),
            )
    });
    let mut order: Vec<usize> = Vec::new();
    let deepest = families.iter().map(|f| f.len()).max().unwrap_or(0);
    for round in 0..deepest {
        for family in &families {
            if let Some(&i) = family.get(round) {
                order.push(i);
            }
        }
    }
    for (rank, &i) in order.iter().enumerate() {
        results[i].rank = rank + 1;
    }
    // infeasible designs trail in family order
    let mut next = order.len() + 1;
    for r in results.iter_mut() {
        if !r.feasible {
            r.rank = next;
            next += 1;
        }
    }
    results.sort_by_key(|r| r.rank);
    Ok(results)
}
