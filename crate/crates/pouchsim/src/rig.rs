//! Infant-scale arm rig on an abduction-constrained joint: trial dynamics,
//! static force measurement, and rig calibration.
//!
//! The arm obeys `I*theta_dd = tau_act - m*g*c*sin(theta) - b*theta_d`,
//! integrated with RK4 at 1 ms and coupled to the pneumatic line each step.
//! The pouch drives the arm through a contact capacitance: air admitted
//! beyond what fits under the current arm pose raises the gauge pressure,
//! and the pressurized pouch pushes with `tau = gauge * dV/dtheta` where `V`
//! is the pneumatic volume that fits the wedge at the present pose.

use crate::actuator::{stack_height, ActuatorDesign};
use crate::error::{Error, Result};
use crate::kinematics::WedgeContact;
use crate::pneumatics::{PhaseSchedule, PneumaticConfig, PumpConfig, PRESSURE_ENVELOPE};
use crate::GRAVITY;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Rigid-arm model with the calibrated wedge contact offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmModel {
    /// Upper-arm length, m.
    pub arm_length: f64,
    /// Arm mass, kg.
    pub mass: f64,
    /// Center-of-mass distance from the joint, m.
    pub com_distance: f64,
    /// Rotational inertia about the joint, kg*m^2.
    pub inertia: f64,
    /// Viscous damping, N*m*s/rad.
    pub damping: f64,
    /// Anchor offset of the wedge contact, m (calibrated).
    pub contact_offset: f64,
    /// Pose at which the blocked-arm force is read, rad.
    pub force_pose: f64,
}

impl ArmModel {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("arm_length", self.arm_length),
            ("mass", self.mass),
            ("com_distance", self.com_distance),
            ("inertia", self.inertia),
            ("damping", self.damping),
            ("contact_offset", self.contact_offset),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive")));
            }
        }
        if self.com_distance >= self.arm_length {
            return Err(Error::Domain(
                "com_distance must be below arm_length".into(),
            ));
        }
        if self.inertia < self.mass * self.com_distance * self.com_distance {
            return Err(Error::Domain(
                "inertia below the point-mass lower bound".into(),
            ));
        }
        Ok(())
    }

    pub fn wedge(&self) -> WedgeContact {
        WedgeContact {
            offset: self.contact_offset,
        }
    }

    /// Gravity torque about the joint at pose `theta`, N*m.
    pub fn gravity_torque(&self, theta: f64) -> f64 {
        self.mass * GRAVITY * self.com_distance * theta.sin()
    }
}

impl Default for ArmModel {
    fn default() -> Self {
        // midpoint of the 6-24 month upper-arm anthropometric band, mass and
        // inertia chosen as configurable defaults (reported in output
        // headers), damping near-critical so the free arm settles without
        // visible oscillation
        let mass = 0.30;
        let arm_length = 0.165;
        let com_distance = 0.45 * arm_length;
        ArmModel {
            arm_length,
            mass,
            com_distance,
            inertia: 1.15 * mass * com_distance * com_distance,
            damping: 0.039,
            contact_offset: 0.04,
            force_pose: 5.0f64.to_radians(),
        }
    }
}

/// Per-trial stochastic perturbations, all seeded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Relative spread of the pump flow.
    pub cv_flow: f64,
    /// Relative spread of the contact offset.
    pub cv_contact: f64,
    /// Multiplicative torque perturbation gain; scaled by the inflated
    /// column's height-to-width aspect ratio, so taller cells wobble more.
    pub instability_gain: f64,
}

impl NoiseModel {
    pub fn zero() -> Self {
        NoiseModel {
            cv_flow: 0.0,
            cv_contact: 0.0,
            instability_gain: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cv_flow < 0.0 || self.cv_contact < 0.0 || self.instability_gain < 0.0 {
            return Err(Error::Domain("noise parameters must be nonnegative".into()));
        }
        Ok(())
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            cv_flow: 0.02,
            cv_contact: 0.01,
            instability_gain: 0.03,
        }
    }
}

/// One 60 Hz trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub theta: f64,
    pub omega: f64,
    pub x: f64,
    pub y: f64,
}

/// End-effector trajectory on a uniform 60 Hz grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub sample_rate: f64,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn positions(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.x, s.y)).collect()
    }
}

pub const TRIAL_SCHEMA_VERSION: u32 = 1;

/// Persisted outcome of one simulated trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub schema_version: u32,
    pub design_id: String,
    pub duty: f64,
    pub trial_index: u32,
    pub schedule: PhaseSchedule,
    pub rng_seed: u64,
    pub trajectory: Trajectory,
    /// Gauge pressure at 60 Hz, Pa.
    pub pressure_trace: Vec<f64>,
    /// Delivered end-effector lift force at 60 Hz, N.
    pub force_trace: Vec<f64>,
    pub max_angle: f64,
    /// Mean gauge pressure over the hold phase, Pa.
    pub hold_pressure: f64,
    /// Blocked-arm load-cell reading at the reference pose, N.
    pub static_force: f64,
    pub flags: Vec<String>,
}

impl TrialRecord {
    pub fn id(&self) -> String {
        format!("{}-d{:03}-t{:02}", self.design_id, self.duty as u32, self.trial_index)
    }
}

/// Everything one trial needs besides its seed.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub design: ActuatorDesign,
    pub arm: ArmModel,
    pub pump: PumpConfig,
    pub board: PneumaticConfig,
    pub schedule: PhaseSchedule,
    pub noise: NoiseModel,
    /// Terminal fill fraction at which the inflate valve closes (emulates
    /// the duty-specific protocol timing); 1.0 runs to capacity.
    pub fill_target: f64,
    pub trial_index: u32,
    pub sample_rate: f64,
}

impl TrialConfig {
    pub fn new(design: ActuatorDesign, duty: f64) -> Result<Self> {
        Ok(TrialConfig {
            design,
            arm: ArmModel::default(),
            pump: PumpConfig::new(duty)?,
            board: PneumaticConfig::default(),
            schedule: PhaseSchedule::default(),
            noise: NoiseModel::default(),
            fill_target: 1.0,
            trial_index: 0,
            sample_rate: 60.0,
        })
    }
}

const DT: f64 = 1e-3;

/// Pouch-arm coupling snapshot used inside the integrator.
struct Coupling<'a> {
    design: &'a ActuatorDesign,
    wedge: WedgeContact,
    capacity: f64,
    capacitance: f64,
    torque_mult: f64,
    theta_max: f64,
    /// Warm start for the wedge inversion; consecutive integrator stages
    /// evaluate at nearby poses.
    theta_a_guess: std::cell::Cell<f64>,
}

impl Coupling<'_> {
    /// Pouch arc state that exactly fits the wedge at arm pose `theta`;
    /// Newton iteration on the closed-form wedge map with a bisection
    /// fallback.
    fn theta_a_fit(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        if theta >= self.theta_max {
            return FRAC_PI_2;
        }
        let angle_at = |ta: f64| -> f64 {
            self.wedge
                .shoulder_angle(self.design, ta)
                .map(|(a, _)| a)
                .unwrap_or(std::f64::consts::PI)
        };
        let mut ta = self.theta_a_guess.get().clamp(1e-9, FRAC_PI_2 - 1e-9);
        let mut converged = false;
        for _ in 0..12 {
            let f = angle_at(ta) - theta;
            if f.abs() < 1e-13 {
                converged = true;
                break;
            }
            let d = match self.wedge.dtheta_dtheta_a(self.design, ta) {
                Ok(d) if d > 1e-12 => d,
                _ => break,
            };
            ta = (ta - f / d).clamp(1e-9, FRAC_PI_2 - 1e-9);
        }
        if !converged {
            let mut lo = 0.0;
            let mut hi = FRAC_PI_2;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if angle_at(mid) < theta {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            ta = 0.5 * (lo + hi);
        }
        self.theta_a_guess.set(ta);
        ta
    }

    /// Pouch arc state, gauge pressure, and actuation torque at pose
    /// `theta` with `v_air` admitted; one wedge inversion per call.
    fn state(&self, v_air: f64, theta: f64) -> (f64, f64, f64) {
        let ta = self.theta_a_fit(theta);
        let v_fit = self.capacity * ta / FRAC_PI_2;
        let gauge = (self.capacitance * (v_air - v_fit)).clamp(0.0, PRESSURE_ENVELOPE);
        // the pouch cannot push past full inflation or through slack contact
        if ta >= FRAC_PI_2 || gauge <= 0.0 {
            return (ta, gauge, 0.0);
        }
        let dtheta = match self.wedge.dtheta_dtheta_a(self.design, ta.max(1e-9)) {
            Ok(d) if d > 1e-12 => d,
            _ => return (ta, gauge, 0.0),
        };
        let dv_dtheta = self.capacity / FRAC_PI_2 / dtheta;
        (ta, gauge, self.torque_mult * gauge * dv_dtheta)
    }

    fn gauge(&self, v_air: f64, theta: f64) -> f64 {
        self.state(v_air, theta).1
    }

    fn torque(&self, v_air: f64, theta: f64) -> f64 {
        self.state(v_air, theta).2
    }
}

/// Runs one seeded trial.
pub fn simulate_trial(cfg: &TrialConfig, seed: u64) -> Result<TrialRecord> {
    cfg.arm.validate()?;
    cfg.pump.validate()?;
    cfg.board.validate()?;
    cfg.schedule.validate()?;
    cfg.noise.validate()?;
    if !(cfg.fill_target > 0.0 && cfg.fill_target <= 1.0) {
        return Err(Error::Config("fill_target must lie in (0, 1]".into()));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let z_flow: f64 = StandardNormal.sample(&mut rng);
    let z_contact: f64 = StandardNormal.sample(&mut rng);
    let z_instability: f64 = StandardNormal.sample(&mut rng);
    let z_measure: f64 = StandardNormal.sample(&mut rng);

    let flow_mult = (1.0 + cfg.noise.cv_flow * z_flow).clamp(0.5, 1.5);
    let contact = (cfg.arm.contact_offset * (1.0 + cfg.noise.cv_contact * z_contact)).max(1e-3);
    let h_full = stack_height(&cfg.design, FRAC_PI_2)?;
    let aspect = h_full / cfg.design.width;
    let torque_mult =
        (1.0 + cfg.noise.instability_gain * aspect * z_instability).clamp(0.2, 2.0);
    // the wobble of the inflated column at the read instant; a separate
    // draw from the trial-mean bias, which the static balance absorbs
    let aspect_hold =
        stack_height(&cfg.design, cfg.fill_target * FRAC_PI_2)? / cfg.design.width;
    let measure_mult =
        (1.0 + cfg.noise.instability_gain * aspect_hold * z_measure).clamp(0.2, 2.0);

    let wedge = WedgeContact { offset: contact };
    let coupling = Coupling {
        design: &cfg.design,
        theta_max: wedge.max_shoulder_angle(&cfg.design)?,
        wedge,
        capacity: cfg.board.capacity(&cfg.design),
        capacitance: cfg.board.capacitance,
        torque_mult,
        theta_a_guess: std::cell::Cell::new(0.1),
    };

    let total_time = cfg.schedule.total();
    let n_steps = (total_time / DT).round() as usize;
    let mut theta = 0.0f64;
    let mut omega = 0.0f64;
    let mut v_air = 0.0f64;
    let mut cutoff = false;
    let mut flags: Vec<String> = Vec::new();

    let q_pump = flow_mult
        * cfg.pump.flow_efficiency
        * cfg.pump.q_max
        * (cfg.pump.duty / 100.0);
    let pump_on = cfg.pump.duty >= cfg.pump.duty_deadband;

    let mut t_hist = Vec::with_capacity(n_steps + 1);
    let mut theta_hist = Vec::with_capacity(n_steps + 1);
    let mut omega_hist = Vec::with_capacity(n_steps + 1);
    let mut gauge_hist = Vec::with_capacity(n_steps + 1);
    let mut torque_hist = Vec::with_capacity(n_steps + 1);
    let mut hold_gauge_sum = 0.0;
    let mut hold_gauge_count = 0usize;

    let record_state =
        |t: f64,
         theta: f64,
         omega: f64,
         gauge: f64,
         torque: f64,
         t_hist: &mut Vec<f64>,
         theta_hist: &mut Vec<f64>,
         omega_hist: &mut Vec<f64>,
         gauge_hist: &mut Vec<f64>,
         torque_hist: &mut Vec<f64>| {
            t_hist.push(t);
            theta_hist.push(theta);
            omega_hist.push(omega);
            gauge_hist.push(gauge);
            torque_hist.push(torque);
        };

    let (_, g0, tau0) = coupling.state(v_air, theta);
    record_state(
        0.0,
        theta,
        omega,
        g0,
        tau0,
        &mut t_hist,
        &mut theta_hist,
        &mut omega_hist,
        &mut gauge_hist,
        &mut torque_hist,
    );

    for step in 0..n_steps {
        let t = step as f64 * DT;
        // the protocol watches the pouch, not the air bookkeeping: the
        // inflate valve closes when the inflated shape reaches the target
        // state (air spent on contact pressurization does not count)
        let (ta_now, gauge_now, _) = coupling.state(v_air, theta);
        let pouch_fill = ta_now / FRAC_PI_2;

        // valve protocol: inflate window with an early close at the fill
        // target, then hold, then vent
        let inflating = t < cfg.schedule.inflate_time && pouch_fill < cfg.fill_target && !cutoff;
        let venting = t >= cfg.schedule.inflate_time + cfg.schedule.hold_time;
        if venting {
            cutoff = false; // vent releases the latch
        }

        if pump_on {
            if inflating {
                let derate = (1.0 - gauge_now / PRESSURE_ENVELOPE).max(0.0);
                v_air += q_pump * derate * DT;
            } else if venting && v_air > 0.0 {
                let derate = (1.0 + gauge_now / PRESSURE_ENVELOPE).max(0.0);
                v_air = (v_air - q_pump * derate * DT).max(0.0);
            }
        }
        if coupling.gauge(v_air, theta) >= cfg.board.cutoff_pressure && !venting {
            if !cutoff && !flags.iter().any(|f| f == "cutoff") {
                flags.push("cutoff".into());
            }
            cutoff = true;
        }

        // RK4 on (theta, omega) with v_air frozen over the step
        let accel = |th: f64, om: f64| -> f64 {
            (coupling.torque(v_air, th) - cfg.arm.gravity_torque(th) - cfg.arm.damping * om)
                / cfg.arm.inertia
        };
        let k1t = omega;
        let k1o = accel(theta, omega);
        let k2t = omega + 0.5 * DT * k1o;
        let k2o = accel(theta + 0.5 * DT * k1t, omega + 0.5 * DT * k1o);
        let k3t = omega + 0.5 * DT * k2o;
        let k3o = accel(theta + 0.5 * DT * k2t, omega + 0.5 * DT * k2o);
        let k4t = omega + DT * k3o;
        let k4o = accel(theta + DT * k3t, omega + DT * k3o);
        theta += DT / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        omega += DT / 6.0 * (k1o + 2.0 * k2o + 2.0 * k3o + k4o);

        let t_next = t + DT;
        if theta.abs() > std::f64::consts::PI {
            return Err(Error::Diverged {
                time: t_next,
                theta,
            });
        }

        let (_, gauge, torque) = coupling.state(v_air, theta);
        let in_hold = t_next >= cfg.schedule.inflate_time
            && t_next < cfg.schedule.inflate_time + cfg.schedule.hold_time;
        if in_hold {
            hold_gauge_sum += gauge;
            hold_gauge_count += 1;
        }
        record_state(
            t_next,
            theta,
            omega,
            gauge,
            torque,
            &mut t_hist,
            &mut theta_hist,
            &mut omega_hist,
            &mut gauge_hist,
            &mut torque_hist,
        );
    }

    // resample onto the uniform output grid
    let n_out = (total_time * cfg.sample_rate).floor() as usize;
    let interp = |hist: &[f64], t: f64| -> f64 {
        let pos = t / DT;
        let i = (pos.floor() as usize).min(hist.len() - 2);
        let frac = pos - i as f64;
        hist[i] * (1.0 - frac) + hist[i + 1] * frac
    };
    let mut samples = Vec::with_capacity(n_out + 1);
    let mut pressure_trace = Vec::with_capacity(n_out + 1);
    let mut force_trace = Vec::with_capacity(n_out + 1);
    for k in 0..=n_out {
        let t = k as f64 / cfg.sample_rate;
        let th = interp(&theta_hist, t);
        samples.push(TrajectorySample {
            t,
            theta: th,
            omega: interp(&omega_hist, t),
            x: cfg.arm.arm_length * th.sin(),
            y: cfg.arm.arm_length * (1.0 - th.cos()),
        });
        pressure_trace.push(interp(&gauge_hist, t));
        force_trace.push(interp(&torque_hist, t) / cfg.arm.arm_length);
    }

    let max_angle = samples.iter().map(|s| s.theta).fold(0.0f64, f64::max);
    let hold_pressure = if hold_gauge_count > 0 {
        hold_gauge_sum / hold_gauge_count as f64
    } else {
        0.0
    };

    // blocked-arm load-cell analog at the reference pose
    let mut arm_t = cfg.arm;
    arm_t.contact_offset = contact;
    let static_force =
        measure_mult * measure_static_force(&cfg.design, hold_pressure, &arm_t, &cfg.board)?;

    Ok(TrialRecord {
        schema_version: TRIAL_SCHEMA_VERSION,
        design_id: cfg.design.id(),
        duty: cfg.pump.duty,
        trial_index: cfg.trial_index,
        schedule: cfg.schedule,
        rng_seed: seed,
        trajectory: Trajectory {
            sample_rate: cfg.sample_rate,
            samples,
        },
        pressure_trace,
        force_trace,
        max_angle,
        hold_pressure,
        static_force,
        flags,
    })
}

/// Force the actuator exerts at the end-effector with the arm blocked at
/// the reference pose, N: `F = tau(theta0, P) / arm_length`, linear in `P`.
pub fn measure_static_force(
    design: &ActuatorDesign,
    pressure: f64,
    arm: &ArmModel,
    board: &PneumaticConfig,
) -> Result<f64> {
    if pressure < 0.0 {
        return Err(Error::Domain("pressure must be nonnegative".into()));
    }
    let wedge = arm.wedge();
    let theta_a = wedge
        .invert(design, arm.force_pose)?
        .ok_or_else(|| Error::Domain("force pose beyond the design's reach".into()))?;
    let dtheta = wedge.dtheta_dtheta_a(design, theta_a.max(1e-9))?;
    let dv_dtheta = board.capacity(design) / FRAC_PI_2 / dtheta;
    Ok(pressure * dv_dtheta / arm.arm_length)
}

/// Reference mean shoulder angles (degrees) per design x duty used for rig
/// calibration: rows are 1-cell then 2-cell, columns 50/75/100% duty.
pub const REFERENCE_ANGLE_TARGETS_DEG: [[f64; 3]; 2] =
    [[41.92, 53.40, 63.89], [34.43, 39.87, 41.89]];

/// Duty levels matching the target columns.
pub const DUTY_LEVELS: [f64; 3] = [50.0, 75.0, 100.0];

/// Calibration output: shared contact offset plus per-duty terminal fills.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigFit {
    pub contact_offset: f64,
    /// Terminal fill fraction per duty column.
    pub fills: [f64; 3],
    /// Signed residuals in degrees, `[design][duty]`.
    pub residuals_deg: [[f64; 3]; 2],
    pub max_abs_residual_deg: f64,
}

const OFFSET_BOUNDS: (f64, f64) = (0.04, 0.15);

fn golden_min(mut lo: f64, mut hi: f64, tol: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let inv_phi = 0.618_033_988_749_894_9;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Minimizes `f` over `[lo, hi]` by a coarse grid followed by golden-section
/// refinement around the best bracket.
fn grid_golden_min(lo: f64, hi: f64, grid: usize, tol: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..=grid {
        let x = lo + (hi - lo) * i as f64 / grid as f64;
        let v = f(x);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let step = (hi - lo) / grid as f64;
    let b_lo = (lo + step * (best_i as f64 - 1.0)).max(lo);
    let b_hi = (lo + step * (best_i as f64 + 1.0)).min(hi);
    golden_min(b_lo, b_hi, tol, f)
}

/// Least-squares fit of the shared contact offset and the three per-duty
/// terminal fill fractions against a 2x3 table of target angles (degrees).
///
/// Any cell residual above 8 degrees is a calibration failure and is
/// reported as an error rather than returned silently.
pub fn fit_rig_parameters(targets_deg: &[[f64; 3]; 2]) -> Result<RigFit> {
    let designs = [
        ActuatorDesign::new(1, 50.80e-3)?,
        ActuatorDesign::new(2, 50.80e-3)?,
    ];
    let targets: Vec<[f64; 2]> = (0..3)
        .map(|j| [targets_deg[0][j].to_radians(), targets_deg[1][j].to_radians()])
        .collect();

    let angle = |design: &ActuatorDesign, fill: f64, offset: f64| -> f64 {
        let wedge = WedgeContact { offset };
        wedge
            .shoulder_angle(design, fill * FRAC_PI_2)
            .map(|(a, _)| a)
            .unwrap_or(std::f64::consts::PI)
    };

    // per-duty SSE profiled over the fill, for a given offset
    let duty_sse = |offset: f64, j: usize| -> (f64, f64) {
        let obj = |fill: f64| -> f64 {
            let mut sse = 0.0;
            for (d, design) in designs.iter().enumerate() {
                let r = angle(design, fill, offset) - targets[j][d];
                sse += r * r;
            }
            sse
        };
        let fill = grid_golden_min(1e-3, 1.0, 128, 1e-10, &obj);
        (fill, obj(fill))
    };

    let outer = |offset: f64| -> f64 { (0..3).map(|j| duty_sse(offset, j).1).sum() };
    let offset = grid_golden_min(OFFSET_BOUNDS.0, OFFSET_BOUNDS.1, 96, 1e-9, &outer);

    let mut fills = [0.0; 3];
    for (j, fill) in fills.iter_mut().enumerate() {
        *fill = duty_sse(offset, j).0;
    }

    let mut residuals_deg = [[0.0; 3]; 2];
    let mut max_abs = 0.0f64;
    for (d, design) in designs.iter().enumerate() {
        for j in 0..3 {
            let r = (angle(design, fills[j], offset) - targets[j][d]).to_degrees();
            residuals_deg[d][j] = r;
            max_abs = max_abs.max(r.abs());
        }
    }
    if max_abs > 8.0 {
        return Err(Error::Calibration(format!(
            "residual {max_abs:.2} deg exceeds the 8 deg gate; residuals {residuals_deg:?}"
        )));
    }
    Ok(RigFit {
        contact_offset: offset,
        fills,
        residuals_deg,
        max_abs_residual_deg: max_abs,
    })
}
