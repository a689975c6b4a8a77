//! Off-body pneumatic control board: PWM-scaled pump flow, valve routing,
//! two-phase pressure evolution, and the automatic pressure cutoff.
//!
//! Filling is kinematic until the pouch reaches its geometric capacity;
//! continued inflow then pressurizes the sealed volume against a pneumatic
//! capacitance until the cutoff latches. Venting mirrors the same law
//! against the vacuum side of the envelope.

use crate::actuator::{cell_volume, ActuatorDesign};
use crate::error::{Error, Result};
use crate::PSI;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Board pressure envelope, Pa (+/- 7.5 psi).
pub const PRESSURE_ENVELOPE: f64 = 7.5 * PSI;

/// Default automatic-cutoff pressure, Pa (6.5 psi, below the envelope so the
/// stop fires before the board limit).
pub const DEFAULT_CUTOFF_PRESSURE: f64 = 6.5 * PSI;

/// Default pneumatic capacitance, Pa per m^3 of air admitted past capacity.
/// Calibrated jointly with [`DEFAULT_CAPACITY_FACTOR`] against the reported
/// full-inflation times.
pub const DEFAULT_CAPACITANCE: f64 = 2.78e9;

/// Fraction of the ideal arc-extrusion volume the sealed pouch actually
/// admits. The flat-pattern pouch pillows in both directions and is squeezed
/// by the arm, so its pneumatic capacity is well below the extruded
/// cross-section ideal.
pub const DEFAULT_CAPACITY_FACTOR: f64 = 0.109;

/// Nominal pump free-flow rate, m^3/s (2 L/min).
pub const PUMP_FLOW_RATE: f64 = 2.0e-3 / 60.0;

/// Longest admissible integration step, s.
pub const MAX_STEP: f64 = 0.010;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValveMode {
    Inflate,
    Hold,
    Vent,
}

/// Pump configuration: nominal flow, PWM duty, and the calibrated flow
/// efficiency that absorbs tubing and valve losses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpConfig {
    /// Free-flow rate, m^3/s.
    pub q_max: f64,
    /// Duty cycle, percent in [0, 100].
    pub duty: f64,
    /// Duty below which the pump does not turn on, percent.
    pub duty_deadband: f64,
    /// Calibrated flow efficiency, in (0, 1].
    pub flow_efficiency: f64,
}

impl PumpConfig {
    pub fn new(duty: f64) -> Result<Self> {
        let cfg = PumpConfig {
            q_max: PUMP_FLOW_RATE,
            duty,
            duty_deadband: 20.0,
            flow_efficiency: 0.9,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.duty) {
            return Err(Error::Config(format!("duty {} outside [0, 100]", self.duty)));
        }
        if !(self.flow_efficiency > 0.0 && self.flow_efficiency <= 1.0) {
            return Err(Error::Config("flow_efficiency must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Board-level constants: capacity model, capacitance, and cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PneumaticConfig {
    /// Pneumatic capacity as a fraction of the ideal geometric volume.
    pub capacity_factor: f64,
    /// Pressure rise per unit over-capacity air volume, Pa/m^3.
    pub capacitance: f64,
    /// Cutoff pressure, Pa.
    pub cutoff_pressure: f64,
}

impl Default for PneumaticConfig {
    fn default() -> Self {
        PneumaticConfig {
            capacity_factor: DEFAULT_CAPACITY_FACTOR,
            capacitance: DEFAULT_CAPACITANCE,
            cutoff_pressure: DEFAULT_CUTOFF_PRESSURE,
        }
    }
}

impl PneumaticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacity_factor > 0.0 && self.capacity_factor <= 1.0) {
            return Err(Error::Config("capacity_factor must lie in (0, 1]".into()));
        }
        if !(self.capacitance > 0.0) {
            return Err(Error::Config("capacitance must be positive".into()));
        }
        if !(self.cutoff_pressure > 0.0 && self.cutoff_pressure <= PRESSURE_ENVELOPE) {
            return Err(Error::Config(
                "cutoff_pressure must lie in (0, envelope]".into(),
            ));
        }
        Ok(())
    }

    /// Pneumatic capacity of a design, m^3.
    pub fn capacity(&self, design: &ActuatorDesign) -> f64 {
        self.capacity_factor * cell_volume(design, FRAC_PI_2).expect("pi/2 is in range")
    }

    /// Air volume equivalent of pressurizing from 0 to the cutoff at the
    /// flow-derated rate; closed form of the exponential pressure rise.
    pub fn pressurization_equivalent_volume(&self) -> f64 {
        (PRESSURE_ENVELOPE / self.capacitance)
            * (PRESSURE_ENVELOPE / (PRESSURE_ENVELOPE - self.cutoff_pressure)).ln()
    }
}

/// Instantaneous pneumatic state of one actuator line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PneumaticState {
    pub valve_mode: ValveMode,
    /// Kinematic fill fraction in [0, 1]; maps to the pouch arc state as
    /// `theta_a = fill_fraction * pi/2`.
    pub fill_fraction: f64,
    /// Gauge pressure, Pa, within +/- the envelope.
    pub gauge_pressure: f64,
    pub cutoff_engaged: bool,
}

impl PneumaticState {
    pub fn new() -> Self {
        PneumaticState {
            valve_mode: ValveMode::Hold,
            fill_fraction: 0.0,
            gauge_pressure: 0.0,
            cutoff_engaged: false,
        }
    }

    /// Arc half-angle of the pouch at this fill, rad.
    pub fn theta_a(&self) -> f64 {
        self.fill_fraction * FRAC_PI_2
    }

    /// Switches the valve; VENT releases the cutoff latch.
    pub fn set_mode(&mut self, mode: ValveMode) {
        self.valve_mode = mode;
        if mode == ValveMode::Vent {
            self.cutoff_engaged = false;
        }
    }
}

impl Default for PneumaticState {
    fn default() -> Self {
        Self::new()
    }
}

/// Pump inflow toward the actuator, m^3/s. Zero below the duty deadband or
/// once the cutoff has latched; otherwise the nominal PWM-scaled rate
/// derated linearly by the back pressure.
pub fn effective_flow(cfg: &PumpConfig, state: &PneumaticState) -> f64 {
    if cfg.duty < cfg.duty_deadband || state.cutoff_engaged {
        return 0.0;
    }
    let derate = 1.0 - state.gauge_pressure / PRESSURE_ENVELOPE;
    (cfg.flow_efficiency * cfg.q_max * (cfg.duty / 100.0) * derate).max(0.0)
}

/// Vent outflow magnitude, m^3/s; the mirror of [`effective_flow`] against
/// the vacuum side of the envelope.
pub fn effective_vent_flow(cfg: &PumpConfig, state: &PneumaticState) -> f64 {
    if cfg.duty < cfg.duty_deadband {
        return 0.0;
    }
    let derate = 1.0 + state.gauge_pressure / PRESSURE_ENVELOPE;
    (cfg.flow_efficiency * cfg.q_max * (cfg.duty / 100.0) * derate).max(0.0)
}

/// Advances the line by `dt` seconds.
pub fn step(
    state: &PneumaticState,
    design: &ActuatorDesign,
    pump: &PumpConfig,
    board: &PneumaticConfig,
    dt: f64,
) -> Result<PneumaticState> {
    if !(dt > 0.0 && dt <= MAX_STEP) {
        return Err(Error::Domain(format!(
            "dt {dt} s outside (0, {MAX_STEP}]"
        )));
    }
    let capacity = board.capacity(design);
    let mut next = *state;
    match state.valve_mode {
        ValveMode::Hold => {}
        ValveMode::Inflate => {
            let mut air = effective_flow(pump, state) * dt;
            if air > 0.0 {
                if next.gauge_pressure < 0.0 {
                    // recover from vacuum before any filling
                    let relief = (-next.gauge_pressure / board.capacitance).min(air);
                    next.gauge_pressure += board.capacitance * relief;
                    air -= relief;
                }
                if next.fill_fraction < 1.0 && air > 0.0 {
                    let room = (1.0 - next.fill_fraction) * capacity;
                    let used = air.min(room);
                    next.fill_fraction += used / capacity;
                    air -= used;
                    if next.fill_fraction > 1.0 - 1e-15 {
                        next.fill_fraction = 1.0;
                    }
                }
                if air > 0.0 {
                    next.gauge_pressure += board.capacitance * air;
                }
            }
        }
        ValveMode::Vent => {
            let mut air = effective_vent_flow(pump, state) * dt;
            if air > 0.0 {
                if next.gauge_pressure > 0.0 {
                    let relief = (next.gauge_pressure / board.capacitance).min(air);
                    next.gauge_pressure -= board.capacitance * relief;
                    air -= relief;
                }
                if next.fill_fraction > 0.0 && air > 0.0 {
                    let held = next.fill_fraction * capacity;
                    let used = air.min(held);
                    next.fill_fraction -= used / capacity;
                    air -= used;
                    if next.fill_fraction < 1e-15 {
                        next.fill_fraction = 0.0;
                    }
                }
                if air > 0.0 {
                    next.gauge_pressure -= board.capacitance * air;
                }
            }
        }
    }
    next.gauge_pressure = next
        .gauge_pressure
        .clamp(-PRESSURE_ENVELOPE, PRESSURE_ENVELOPE);
    if next.gauge_pressure >= board.cutoff_pressure {
        next.cutoff_engaged = true;
    }
    Ok(next)
}

/// Free-inflation time from empty until the cutoff latches, by stepping the
/// board model at `dt`.
pub fn simulate_time_to_cutoff(
    design: &ActuatorDesign,
    pump: &PumpConfig,
    board: &PneumaticConfig,
    dt: f64,
) -> Result<f64> {
    let mut state = PneumaticState::new();
    state.set_mode(ValveMode::Inflate);
    let mut t = 0.0;
    let limit = 600.0;
    while !state.cutoff_engaged {
        state = step(&state, design, pump, board, dt)?;
        t += dt;
        if t > limit {
            return Err(Error::Convergence("simulate_time_to_cutoff"));
        }
    }
    Ok(t)
}

/// Closed-form model of the same quantity; the kinematic fill is linear in
/// time and the pressurization tail follows the exponential derated rise.
pub fn model_time_to_cutoff(
    design: &ActuatorDesign,
    pump: &PumpConfig,
    board: &PneumaticConfig,
    eta: f64,
) -> f64 {
    let q0 = eta * pump.q_max * (pump.duty / 100.0);
    (board.capacity(design) + board.pressurization_equivalent_volume()) / q0
}

/// One full-inflation observation: design, duty (%), measured time (s).
#[derive(Debug, Clone)]
pub struct InflationObservation {
    pub design: ActuatorDesign,
    pub duty: f64,
    pub time: f64,
}

/// Result of the flow-efficiency fit.
#[derive(Debug, Clone)]
pub struct FlowCalibration {
    pub eta: f64,
    /// Per-observation relative residuals (model - observed)/observed.
    pub residuals: Vec<f64>,
    pub max_abs_residual: f64,
}

/// Least-squares flow efficiency over a set of full-inflation observations.
///
/// The model time is `K(design, duty) / eta`, so the unconstrained optimum
/// is `sum(K^2) / sum(K t)`, clamped into (0, 1].
pub fn calibrate_flow_efficiency(
    observations: &[InflationObservation],
    board: &PneumaticConfig,
) -> Result<FlowCalibration> {
    if observations.len() < 2 {
        return Err(Error::Degenerate(
            "flow calibration needs at least 2 observations".into(),
        ));
    }
    let mut sum_k2 = 0.0;
    let mut sum_kt = 0.0;
    let mut ks = Vec::with_capacity(observations.len());
    for (i, obs) in observations.iter().enumerate() {
        if !(obs.time > 0.0) {
            return Err(Error::Degenerate(format!(
                "observation {i} has non-positive time"
            )));
        }
        let mut pump = PumpConfig::new(obs.duty)?;
        pump.flow_efficiency = 1.0;
        if obs.duty < pump.duty_deadband {
            return Err(Error::Degenerate(format!(
                "observation {i} duty below the pump deadband"
            )));
        }
        let k = model_time_to_cutoff(&obs.design, &pump, board, 1.0);
        sum_k2 += k * k;
        sum_kt += k * obs.time;
        ks.push(k);
    }
    if sum_kt <= 0.0 {
        return Err(Error::Degenerate("observations have no usable signal".into()));
    }
    let eta = (sum_k2 / sum_kt).min(1.0);
    let residuals: Vec<f64> = ks
        .iter()
        .zip(observations)
        .map(|(k, obs)| (k / eta - obs.time) / obs.time)
        .collect();
    let max_abs_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(FlowCalibration {
        eta,
        residuals,
        max_abs_residual,
    })
}

/// The paper-reported full-inflation times for the two down-selected
/// designs at {50, 75, 100}% duty.
pub fn reference_inflation_observations() -> Vec<InflationObservation> {
    let d1 = ActuatorDesign::new(1, 50.80e-3).unwrap();
    let d2 = ActuatorDesign::new(2, 50.80e-3).unwrap();
    let times = [
        (d1.clone(), 50.0, 4.5),
        (d1.clone(), 75.0, 3.5),
        (d1, 100.0, 2.7),
        (d2.clone(), 50.0, 3.5),
        (d2.clone(), 75.0, 2.5),
        (d2, 100.0, 2.0),
    ];
    times
        .into_iter()
        .map(|(design, duty, time)| InflationObservation { design, duty, time })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    /// Inflation window, s (protocol grid: 1-5 s).
    pub inflate_time: f64,
    /// Hold at terminal fill, s.
    pub hold_time: f64,
    /// Deflation window, s (protocol grid: 1-5 s).
    pub deflate_time: f64,
}

impl PhaseSchedule {
    pub fn new(inflate_time: f64, hold_time: f64, deflate_time: f64) -> Result<Self> {
        let s = PhaseSchedule {
            inflate_time,
            hold_time,
            deflate_time,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.inflate_time > 0.0 && self.hold_time > 0.0 && self.deflate_time > 0.0) {
            return Err(Error::Config("phase times must be positive".into()));
        }
        Ok(())
    }

    /// True when inflate/deflate lie on the 1 s protocol grid in [1, 5].
    pub fn on_protocol_grid(&self) -> bool {
        let on_grid = |t: f64| {
            (1.0..=5.0).contains(&t) && (t - t.round()).abs() < 1e-9
        };
        on_grid(self.inflate_time) && on_grid(self.deflate_time)
    }

    pub fn total(&self) -> f64 {
        self.inflate_time + self.hold_time + self.deflate_time
    }
}

impl Default for PhaseSchedule {
    fn default() -> Self {
        PhaseSchedule {
            inflate_time: 5.0,
            hold_time: 1.0,
            deflate_time: 5.0,
        }
    }
}
