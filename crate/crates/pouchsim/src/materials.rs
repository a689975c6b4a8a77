//! Fabric material records used for membrane stress screening and mass
//! estimates.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Heat-sealable coated fabric, described by its bulk mechanical and thermal
/// properties plus the single-layer wall thickness of the sealed membrane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FabricMaterial {
    /// Elastic modulus, Pa.
    pub elastic_modulus: f64,
    /// Poisson's ratio, dimensionless, in (0, 0.5).
    pub poisson_ratio: f64,
    /// Shear modulus, Pa.
    pub shear_modulus: f64,
    /// Mass density, kg/m^3.
    pub mass_density: f64,
    /// Tensile strength, Pa.
    pub tensile_strength: f64,
    /// Compressive strength, Pa.
    pub compressive_strength: f64,
    /// Yield strength, Pa.
    pub yield_strength: f64,
    /// Thermal expansion coefficient, 1/K.
    pub thermal_expansion: f64,
    /// Thermal conductivity, W/(m*K).
    pub thermal_conductivity: f64,
    /// Specific heat, J/(kg*K).
    pub specific_heat: f64,
    /// Single-layer membrane thickness, m.
    pub wall_thickness: f64,
}

impl FabricMaterial {
    /// 200-denier nylon-Oxford fabric with a heat-sealable TPU coating.
    ///
    /// The 0.4 mm wall thickness is the coated two-side-sealable sheet; it
    /// also reproduces the 3.8-8.2 g actuator mass band when combined with
    /// the two-layer wrap construction.
    pub fn nylon_oxford() -> Self {
        FabricMaterial {
            elastic_modulus: 4.98e8,
            poisson_ratio: 0.35,
            shear_modulus: 1.844e8,
            mass_density: 757.58,
            tensile_strength: 17_520.0,
            compressive_strength: 1.03421e8,
            yield_strength: 5.8605e7,
            thermal_expansion: 1.0e-6,
            thermal_conductivity: 0.53,
            specific_heat: 1386.0,
            wall_thickness: 4.0e-4,
        }
    }

    /// Validates the physical invariants of the record.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("elastic_modulus", self.elastic_modulus),
            ("shear_modulus", self.shear_modulus),
            ("mass_density", self.mass_density),
            ("tensile_strength", self.tensile_strength),
            ("compressive_strength", self.compressive_strength),
            ("yield_strength", self.yield_strength),
            ("thermal_expansion", self.thermal_expansion),
            ("thermal_conductivity", self.thermal_conductivity),
            ("specific_heat", self.specific_heat),
            ("wall_thickness", self.wall_thickness),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Domain(format!("{name} must be strictly positive")));
            }
        }
        if !(self.poisson_ratio > 0.0 && self.poisson_ratio < 0.5) {
            return Err(Error::Domain("poisson_ratio must lie in (0, 0.5)".into()));
        }
        if self.yield_strength > self.compressive_strength {
            return Err(Error::Domain(
                "yield_strength must not exceed compressive_strength".into(),
            ));
        }
        Ok(())
    }
}

impl Default for FabricMaterial {
    fn default() -> Self {
        Self::nylon_oxford()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_fabric_is_valid() {
        FabricMaterial::nylon_oxford().validate().unwrap();
    }

    #[test]
    fn poisson_out_of_range_rejected() {
        let mut m = FabricMaterial::nylon_oxford();
        m.poisson_ratio = 0.5;
        assert!(m.validate().is_err());
        m.poisson_ratio = -0.1;
        assert!(m.validate().is_err());
    }

    #[test]
    fn yield_above_compressive_rejected() {
        let mut m = FabricMaterial::nylon_oxford();
        m.yield_strength = m.compressive_strength * 1.01;
        assert!(m.validate().is_err());
    }
}
