//! Parameterized pouch actuator family and inflation cross-section geometry.
//!
//! Each actuator is a 254 mm strip with 50.8 mm anchor areas on both sides
//! and a 152.4 mm inflatable span divided into 1-4 equal cells. When a cell
//! is pressurized, the inextensible membrane bulges into two circular arcs;
//! the arc half-angle `theta_a` in [0, pi/2] parameterizes the inflation
//! state from flat (0) to a full circle (pi/2).

use crate::error::{Error, Result};
use crate::materials::FabricMaterial;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Total actuator length, m.
pub const TOTAL_LENGTH: f64 = 0.254;
/// Inflatable span, m.
pub const INFLATABLE_LENGTH: f64 = 0.1524;
/// Anchor area length per side, m.
pub const ANCHOR_LENGTH: f64 = 0.0508;
/// Reference pocket height used by the shell-based geometry, m. Recorded for
/// traceability; not used by the flat-fabric pouch kinematics.
pub const POCKET_HEIGHT_REF: f64 = 0.009;

/// The five candidate widths, m.
pub const WIDTHS: [f64; 5] = [50.80e-3, 44.45e-3, 38.10e-3, 31.75e-3, 25.40e-3];

/// Default fraction of the nominal width left inflatable after seams.
pub const DEFAULT_EFFECTIVE_WIDTH_FACTOR: f64 = 0.85;

/// One member of the actuator design family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorDesign {
    /// Number of inflatable cells, 1-4.
    pub n_cells: u32,
    /// Nominal width, m (one of [`WIDTHS`]).
    pub width: f64,
    /// Total strip length, m.
    pub total_length: f64,
    /// Inflatable span, m.
    pub inflatable_length: f64,
    /// Anchor length per side, m.
    pub anchor_length: f64,
    /// Length of one cell, m.
    pub cell_length: f64,
    /// Reference pocket height, m.
    pub pocket_height_ref: f64,
    /// Seam allowance: fraction of width that actually inflates, in (0, 1].
    pub effective_width_factor: f64,
}

impl ActuatorDesign {
    /// Builds a design with the fixed family dimensions.
    pub fn new(n_cells: u32, width: f64) -> Result<Self> {
        let design = ActuatorDesign {
            n_cells,
            width,
            total_length: TOTAL_LENGTH,
            inflatable_length: INFLATABLE_LENGTH,
            anchor_length: ANCHOR_LENGTH,
            cell_length: INFLATABLE_LENGTH / n_cells as f64,
            pocket_height_ref: POCKET_HEIGHT_REF,
            effective_width_factor: DEFAULT_EFFECTIVE_WIDTH_FACTOR,
        };
        design.validate()?;
        Ok(design)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.n_cells) {
            return Err(Error::Domain(format!(
                "n_cells must be 1-4, got {}",
                self.n_cells
            )));
        }
        if !WIDTHS.iter().any(|w| (w - self.width).abs() < 1e-12) {
            return Err(Error::Domain(format!(
                "width {} m is not one of the five family widths",
                self.width
            )));
        }
        let len_sum = self.inflatable_length + 2.0 * self.anchor_length;
        if (self.total_length - len_sum).abs() > 1e-12 {
            return Err(Error::Domain(
                "total_length must equal inflatable_length + 2*anchor_length".into(),
            ));
        }
        if (self.cell_length * self.n_cells as f64 - self.inflatable_length).abs() > 1e-12 {
            return Err(Error::Domain(
                "cell_length * n_cells must equal inflatable_length".into(),
            ));
        }
        if !(self.effective_width_factor > 0.0 && self.effective_width_factor <= 1.0) {
            return Err(Error::Domain(
                "effective_width_factor must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Stable identifier, e.g. `1cell-w50.80`.
    pub fn id(&self) -> String {
        format!("{}cell-w{:.2}", self.n_cells, self.width * 1e3)
    }

    /// Mass estimate from fabric density and strip area, kg. The strip is a
    /// wrapped-around sheet, so two layers cover the full footprint.
    pub fn mass_estimate(&self, material: &FabricMaterial) -> f64 {
        2.0 * material.mass_density * self.total_length * self.width * material.wall_thickness
    }
}

/// Cross-section of one inflated cell: two circular arcs of combined
/// perimeter `2 * cell_length` bulging symmetrically about the flat plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PouchSection {
    /// Arc half-angle, rad, in [0, pi/2].
    pub arc_half_angle: f64,
    /// Section height (membrane-to-membrane), m.
    pub height: f64,
    /// Chord length (flat extent of the inflated cell), m.
    pub chord: f64,
    /// Cross-section area, m^2.
    pub cross_area: f64,
    /// Arc radius, m (infinite at the flat limit).
    pub radius: f64,
}

/// Small-angle threshold below which the closed forms switch to series to
/// avoid catastrophic cancellation.
const SERIES_THRESHOLD: f64 = 1e-4;

/// Height of the two-arc section divided by cell length: (1-cos t)/t.
fn height_ratio(theta_a: f64) -> f64 {
    if theta_a == 0.0 {
        0.0
    } else if theta_a < SERIES_THRESHOLD {
        theta_a / 2.0 - theta_a.powi(3) / 24.0
    } else {
        // 1 - cos t = 2 sin^2(t/2), stable for small t
        2.0 * (theta_a / 2.0).sin().powi(2) / theta_a
    }
}

/// Chord divided by cell length: sin(t)/t.
fn chord_ratio(theta_a: f64) -> f64 {
    if theta_a == 0.0 {
        1.0
    } else {
        theta_a.sin() / theta_a
    }
}

/// Cross-area divided by cell length squared: (t - sin t cos t) / (2 t^2).
fn area_ratio(theta_a: f64) -> f64 {
    if theta_a == 0.0 {
        0.0
    } else if theta_a < SERIES_THRESHOLD {
        theta_a / 3.0 - theta_a.powi(3) / 15.0
    } else {
        let t = theta_a;
        (t - 0.5 * (2.0 * t).sin()) / (2.0 * t * t)
    }
}

/// d(area_ratio)/d(theta_a) = (sin 2t - t - t cos 2t) / (2 t^3).
fn area_ratio_deriv(theta_a: f64) -> f64 {
    if theta_a < SERIES_THRESHOLD {
        1.0 / 3.0 - theta_a * theta_a / 5.0
    } else {
        let t = theta_a;
        ((2.0 * t).sin() - t - t * (2.0 * t).cos()) / (2.0 * t.powi(3))
    }
}

/// d(height_ratio)/d(theta_a) = (t sin t - (1 - cos t)) / t^2.
fn height_ratio_deriv(theta_a: f64) -> f64 {
    if theta_a < SERIES_THRESHOLD {
        0.5 - theta_a * theta_a / 8.0
    } else {
        let t = theta_a;
        (t * t.sin() - 2.0 * (t / 2.0).sin().powi(2)) / (t * t)
    }
}

/// d(chord_ratio)/d(theta_a) = (t cos t - sin t) / t^2.
fn chord_ratio_deriv(theta_a: f64) -> f64 {
    if theta_a < SERIES_THRESHOLD {
        -theta_a / 3.0
    } else {
        let t = theta_a;
        (t * t.cos() - t.sin()) / (t * t)
    }
}

fn check_theta_a(theta_a: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta_a) {
        return Err(Error::Domain(format!(
            "arc half-angle {theta_a} rad outside [0, pi/2]"
        )));
    }
    Ok(())
}

/// Cross-section geometry of one cell of length `cell_length` at inflation
/// state `theta_a`.
pub fn pouch_geometry(cell_length: f64, theta_a: f64) -> Result<PouchSection> {
    check_theta_a(theta_a)?;
    if !(cell_length > 0.0) {
        return Err(Error::Domain("cell_length must be positive".into()));
    }
    let radius = if theta_a == 0.0 {
        f64::INFINITY
    } else {
        cell_length / (2.0 * theta_a)
    };
    Ok(PouchSection {
        arc_half_angle: theta_a,
        height: cell_length * height_ratio(theta_a),
        chord: cell_length * chord_ratio(theta_a),
        cross_area: cell_length * cell_length * area_ratio(theta_a),
        radius,
    })
}

/// Stack thickness of the design at inflation state `theta_a`, m. All cells
/// share identical cell lengths, so every cell has this height.
pub fn stack_height(design: &ActuatorDesign, theta_a: f64) -> Result<f64> {
    check_theta_a(theta_a)?;
    Ok(design.cell_length * height_ratio(theta_a))
}

/// d(height)/d(theta_a) for one cell, m/rad.
pub fn stack_height_deriv(design: &ActuatorDesign, theta_a: f64) -> Result<f64> {
    check_theta_a(theta_a)?;
    Ok(design.cell_length * height_ratio_deriv(theta_a))
}

/// Chord length of one cell at `theta_a`, m.
pub fn cell_chord(design: &ActuatorDesign, theta_a: f64) -> Result<f64> {
    check_theta_a(theta_a)?;
    Ok(design.cell_length * chord_ratio(theta_a))
}

/// d(chord)/d(theta_a) for one cell, m/rad.
pub fn cell_chord_deriv(design: &ActuatorDesign, theta_a: f64) -> Result<f64> {
    check_theta_a(theta_a)?;
    Ok(design.cell_length * chord_ratio_deriv(theta_a))
}

/// Total enclosed volume of the design at `theta_a`, m^3:
/// `n_cells * A(theta_a) * width * effective_width_factor`.
pub fn cell_volume(design: &ActuatorDesign, theta_a: f64) -> Result<f64> {
    check_theta_a(theta_a)?;
    let a = design.cell_length * design.cell_length * area_ratio(theta_a);
    Ok(design.n_cells as f64 * a * design.width * design.effective_width_factor)
}

/// Closed-form d(volume)/d(theta_a), m^3/rad.
pub fn cell_volume_deriv(design: &ActuatorDesign, theta_a: f64) -> Result<f64> {
    check_theta_a(theta_a)?;
    let da = design.cell_length * design.cell_length * area_ratio_deriv(theta_a);
    Ok(design.n_cells as f64 * da * design.width * design.effective_width_factor)
}

/// Membrane arc radius of one cell at `theta_a`, m. Diverges at the flat
/// limit, where hoop stress is undefined.
pub fn arc_radius(design: &ActuatorDesign, theta_a: f64) -> Result<f64> {
    check_theta_a(theta_a)?;
    if theta_a == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(design.cell_length / (2.0 * theta_a))
}

/// Thin-wall hoop stress of the pressurized membrane, Pa:
/// `sigma = P * R(theta_a) / wall_thickness`.
pub fn hoop_stress(
    design: &ActuatorDesign,
    theta_a: f64,
    pressure: f64,
    material: &FabricMaterial,
) -> Result<f64> {
    if pressure < 0.0 {
        return Err(Error::Domain("pressure must be nonnegative".into()));
    }
    Ok(pressure * arc_radius(design, theta_a)? / material.wall_thickness)
}

/// The full 20-variant design space: {1..4 cells} x five widths.
pub fn design_space() -> Vec<ActuatorDesign> {
    let mut designs = Vec::with_capacity(20);
    for n in 1..=4 {
        for &w in &WIDTHS {
            designs.push(ActuatorDesign::new(n, w).expect("family dimensions are valid"));
        }
    }
    designs
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Independent oracle: numerical arc perimeter and 2D segment area by
    /// midpoint quadrature over the arc parameterization.
    fn numeric_section(cell_length: f64, theta_a: f64, n: usize) -> (f64, f64) {
        if theta_a == 0.0 {
            return (2.0 * cell_length, 0.0);
        }
        let r = cell_length / (2.0 * theta_a);
        // One arc spans angle 2*theta_a; integrate arc length and the area
        // between the arc and its chord, then double for the two membranes.
        let mut arc_len = 0.0;
        let mut seg_area = 0.0;
        let dphi = 2.0 * theta_a / n as f64;
        for i in 0..n {
            let phi = -theta_a + (i as f64 + 0.5) * dphi;
            arc_len += r * dphi;
            // height of the arc above the chord at angle phi
            let y = r * (phi.cos() - theta_a.cos());
            // horizontal step along the chord
            let dx = r * phi.cos() * dphi;
            seg_area += y * dx;
        }
        (2.0 * arc_len, 2.0 * seg_area)
    }

    #[test]
    fn design_space_has_twenty_variants() {
        let ds = design_space();
        assert_eq!(ds.len(), 20);
        assert!(ds.iter().all(|d| (d.total_length - 0.254).abs() < 1e-15));
        let one_cell: Vec<_> = ds.iter().filter(|d| d.n_cells == 1).collect();
        assert_eq!(one_cell.len(), 5);
        for d in &one_cell {
            assert!((d.cell_length - 0.15240).abs() < 1e-12);
        }
        let four_cell: Vec<_> = ds.iter().filter(|d| d.n_cells == 4).collect();
        for d in &four_cell {
            assert!((d.cell_length - 0.03810).abs() < 1e-12);
        }
    }

    #[test]
    fn full_inflation_matches_circle() {
        // At theta_a = pi/2 the section is a circle of diameter 2*Lc/pi.
        let s = pouch_geometry(0.1524, PI / 2.0).unwrap();
        assert!((s.height - 0.09702).abs() < 5e-6, "h = {}", s.height);
        assert!((s.chord - 0.09702).abs() < 5e-6);
        let s2 = pouch_geometry(0.0762, PI / 2.0).unwrap();
        assert!((s2.height - 0.04851).abs() < 5e-6);
        // Cross-checked against the quadrature oracle.
        let (perim, area) = numeric_section(0.1524, PI / 2.0, 400_000);
        assert!((perim - 2.0 * 0.1524).abs() < 1e-9);
        assert!((s.cross_area - area).abs() / area < 1e-9);
        assert!((s.cross_area - 0.1524 * 0.1524 / PI).abs() < 1e-12);
    }

    #[test]
    fn flat_limit() {
        let s = pouch_geometry(0.1524, 0.0).unwrap();
        assert_eq!(s.height, 0.0);
        assert_eq!(s.chord, 0.1524);
        assert_eq!(s.cross_area, 0.0);
        assert!(s.radius.is_infinite());
    }

    #[test]
    fn theta_out_of_range_is_domain_error() {
        assert!(pouch_geometry(0.1, -0.1).is_err());
        assert!(pouch_geometry(0.1, PI / 2.0 + 0.01).is_err());
    }

    #[test]
    fn one_cell_full_volume() {
        // A = Lc^2/pi; V = A * w for factor 1.0.
        let mut d = ActuatorDesign::new(1, 50.80e-3).unwrap();
        d.effective_width_factor = 1.0;
        let v = cell_volume(&d, PI / 2.0).unwrap();
        assert!((v - 3.756e-4).abs() < 5e-7, "v = {v}");
    }

    #[test]
    fn volume_zero_when_flat_and_halves_with_two_cells() {
        for d in design_space() {
            assert_eq!(cell_volume(&d, 0.0).unwrap(), 0.0);
        }
        let d1 = ActuatorDesign::new(1, 50.80e-3).unwrap();
        let d2 = ActuatorDesign::new(2, 50.80e-3).unwrap();
        let v1 = cell_volume(&d1, PI / 2.0).unwrap();
        let v2 = cell_volume(&d2, PI / 2.0).unwrap();
        assert!((v2 - v1 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn volume_derivative_matches_finite_difference() {
        let d = ActuatorDesign::new(1, 50.80e-3).unwrap();
        for &ta in &[0.3, 0.8, 1.4] {
            let h = 1e-6;
            let fd =
                (cell_volume(&d, ta + h).unwrap() - cell_volume(&d, ta - h).unwrap()) / (2.0 * h);
            let cf = cell_volume_deriv(&d, ta).unwrap();
            assert!((cf - fd).abs() / fd.abs() < 1e-6, "theta_a={ta}: {cf} vs {fd}");
        }
    }

    #[test]
    fn hoop_stress_linear_and_radius_pinned() {
        let d = ActuatorDesign::new(1, 50.80e-3).unwrap();
        let m = FabricMaterial::nylon_oxford();
        assert_eq!(hoop_stress(&d, 1.0, 0.0, &m).unwrap(), 0.0);
        let s1 = hoop_stress(&d, 0.9, 1000.0, &m).unwrap();
        let s2 = hoop_stress(&d, 0.9, 2000.0, &m).unwrap();
        assert!((s2 - 2.0 * s1).abs() < 1e-9);
        // 1-cell at pi/2: R = 0.1524/pi
        let r = arc_radius(&d, PI / 2.0).unwrap();
        assert!((r - 0.1524 / PI).abs() < 1e-15);
        let sp = hoop_stress(&d, PI / 2.0, 1.0, &m).unwrap();
        assert!((sp - r / m.wall_thickness).abs() < 1e-9);
    }

    #[test]
    fn hoop_stress_increases_with_cell_length() {
        let m = FabricMaterial::nylon_oxford();
        let ta = 0.9;
        let p = 1000.0;
        let mut prev = f64::INFINITY;
        for n in 1..=4 {
            let d = ActuatorDesign::new(n, 50.80e-3).unwrap();
            let s = hoop_stress(&d, ta, p, &m).unwrap();
            assert!(s < prev);
            prev = s;
        }
    }

    #[test]
    fn mass_band_cross_check() {
        // Thinnest ~3.8 g, widest ~8.2 g, within +/-20%.
        let m = FabricMaterial::nylon_oxford();
        let thin = ActuatorDesign::new(1, 25.40e-3).unwrap().mass_estimate(&m);
        let wide = ActuatorDesign::new(1, 50.80e-3).unwrap().mass_estimate(&m);
        assert!(thin >= 3.8e-3 * 0.8 && thin <= 3.8e-3 * 1.2, "thin = {thin}");
        assert!(wide >= 8.2e-3 * 0.8 && wide <= 8.2e-3 * 1.2, "wide = {wide}");
    }

    proptest! {
        #[test]
        fn perimeter_conserved(theta_a in 0.0..FRAC_PI_2) {
            // The two arcs have combined length 2*Lc by construction; the
            // quadrature reconstruction must agree to 1e-12 relative.
            let lc = 0.1524;
            let (perim, _) = numeric_section(lc, theta_a, 1000);
            prop_assert!((perim - 2.0 * lc).abs() / (2.0 * lc) < 1e-12);
        }

        #[test]
        fn area_and_height_increase_chord_decreases(
            a in 0.01..FRAC_PI_2, b in 0.01..FRAC_PI_2
        ) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            let s_lo = pouch_geometry(0.1524, lo).unwrap();
            let s_hi = pouch_geometry(0.1524, hi).unwrap();
            prop_assert!(s_hi.cross_area > s_lo.cross_area);
            prop_assert!(s_hi.height > s_lo.height);
            prop_assert!(s_hi.chord < s_lo.chord);
        }

        #[test]
        fn volume_monotone_in_theta(
            n in 1u32..=4, wi in 0usize..5, a in 0.0..FRAC_PI_2, b in 0.0..FRAC_PI_2
        ) {
            let d = ActuatorDesign::new(n, WIDTHS[wi]).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(cell_volume(&d, hi).unwrap() >= cell_volume(&d, lo).unwrap());
        }
    }
}
