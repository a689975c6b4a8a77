//! Run configuration: TOML file plus `POUCHSIM_`-prefixed environment
//! overrides, shared by every CLI subcommand.

use crate::error::{Error, Result};
use crate::kinematics::WedgeContact;
use crate::materials::FabricMaterial;
use crate::pneumatics::{PhaseSchedule, PneumaticConfig, PumpConfig, PRESSURE_ENVELOPE};
use crate::rig::{ArmModel, NoiseModel, REFERENCE_ANGLE_TARGETS_DEG};
use crate::screening::ScreenTargets;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BatteryConfig {
    pub duties: Vec<f64>,
    pub trials_per_condition: u32,
    pub master_seed: u64,
    /// Rig-calibration targets, degrees, `[design][duty]` for the 1- and
    /// 2-cell reference designs.
    pub angle_targets_deg: [[f64; 3]; 2],
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            duties: vec![50.0, 75.0, 100.0],
            trials_per_condition: 30,
            master_seed: 42,
            angle_targets_deg: REFERENCE_ANGLE_TARGETS_DEG,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreenConfig {
    pub theta_target_deg: f64,
    pub supply_pressure_pa: f64,
    pub safety_factor: f64,
    /// Design-phase contact offset prior, m.
    pub contact_offset: f64,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        ScreenConfig {
            theta_target_deg: 45.0,
            supply_pressure_pa: PRESSURE_ENVELOPE,
            safety_factor: 2.0,
            contact_offset: WedgeContact::default().offset,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RunConfig {
    pub arm: ArmModel,
    pub pump: PumpConfig,
    pub board: PneumaticConfig,
    pub noise: NoiseModel,
    pub schedule: PhaseSchedule,
    pub material: FabricMaterial,
    pub battery: BatteryConfig,
    pub screen: ScreenConfig,
    pub output_dir: String,
}

impl Default for PumpConfig {
    fn default() -> Self {
        PumpConfig::new(100.0).expect("default duty is valid")
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        cfg.apply_env_overrides(std::env::vars());
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_env() -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_env_overrides(std::env::vars());
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `POUCHSIM_*` overrides; unparseable values are ignored.
    pub fn apply_env_overrides(&mut self, vars: impl Iterator<Item = (String, String)>) {
        for (key, value) in vars {
            match key.as_str() {
                "POUCHSIM_SEED" => {
                    if let Ok(v) = value.parse() {
                        self.battery.master_seed = v;
                    }
                }
                "POUCHSIM_TRIALS" => {
                    if let Ok(v) = value.parse() {
                        self.battery.trials_per_condition = v;
                    }
                }
                "POUCHSIM_OUT" => self.output_dir = value,
                "POUCHSIM_THETA_TARGET" => {
                    if let Ok(v) = value.parse() {
                        self.screen.theta_target_deg = v;
                    }
                }
                _ => {}
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.arm.validate()?;
        self.pump.validate()?;
        self.board.validate()?;
        self.noise.validate()?;
        self.schedule.validate()?;
        self.material.validate()?;
        if self.battery.duties.is_empty() {
            return Err(Error::Config("battery.duties must not be empty".into()));
        }
        for &d in &self.battery.duties {
            if !(0.0..=100.0).contains(&d) {
                return Err(Error::Config(format!("duty {d} outside [0, 100]")));
            }
        }
        if self.battery.trials_per_condition < 1 {
            return Err(Error::Config("trials_per_condition must be >= 1".into()));
        }
        if !(self.screen.theta_target_deg > 0.0 && self.screen.theta_target_deg < 180.0) {
            return Err(Error::Config("screen.theta_target_deg outside (0, 180)".into()));
        }
        if !(self.screen.safety_factor >= 1.0) {
            return Err(Error::Config("screen.safety_factor must be >= 1".into()));
        }
        Ok(())
    }

    pub fn screen_targets(&self) -> ScreenTargets {
        ScreenTargets {
            theta_target: self.screen.theta_target_deg.to_radians(),
            supply_pressure: self.screen.supply_pressure_pa,
            safety_factor: self.screen.safety_factor,
            contact: WedgeContact {
                offset: self.screen.contact_offset,
            },
            material: self.material.clone(),
            arm: self.arm,
            board: self.board,
        }
    }
}
