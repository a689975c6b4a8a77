//! The reproducible trial battery: 2 designs x 3 duties x N seeded trials,
//! run over the worker pool, plus the summary statistics that mirror the
//! evaluation tables.

use crate::actuator::ActuatorDesign;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::exec;
use crate::ingest::axis_speed_values;
use crate::metrics::{
    butterworth2_zero_lag, path_length, sparc, CvRecord, SmoothnessTriple, SparcConfig,
    SpeedProfile,
};
use crate::rig::{fit_rig_parameters, simulate_trial, RigFit, TrialConfig, TrialRecord};
use crate::stats::{tukey_hsd, two_way_anova, AnovaTable, TukeyComparison};
use serde::{Deserialize, Serialize};

/// Splitmix64 mix used for counter-based per-trial seed derivation.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-trial seed from the master seed and the trial's
/// coordinates in the battery grid.
pub fn trial_seed(master: u64, design_idx: usize, duty_idx: usize, trial_idx: u32) -> u64 {
    let counter = ((design_idx as u64) << 40) | ((duty_idx as u64) << 32) | trial_idx as u64;
    splitmix64(master ^ splitmix64(counter))
}

/// Scalar metrics of one trial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub trial_id: String,
    pub max_angle_deg: f64,
    pub path_length: f64,
    pub static_force: f64,
    pub sparc_abduction: SmoothnessTriple,
    pub sparc_adduction: SmoothnessTriple,
}

/// Summary of one (design, duty) condition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub design_id: String,
    pub duty: f64,
    pub n_trials: usize,
    pub angle_deg: CvRecord,
    pub force: CvRecord,
    pub path_length: CvRecord,
    pub sparc_abduction_mean: SmoothnessTriple,
    pub sparc_abduction_sd: [f64; 3],
    pub sparc_adduction_mean: SmoothnessTriple,
    pub sparc_adduction_sd: [f64; 3],
    pub trial_ids: Vec<String>,
}

/// Full battery outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatteryRun {
    pub fit: RigFit,
    pub records: Vec<TrialRecord>,
    pub metrics: Vec<TrialMetrics>,
    pub summaries: Vec<ConditionSummary>,
    pub anova_angle: AnovaTable,
    pub anova_force: AnovaTable,
    pub anova_path: AnovaTable,
    pub tukey_duty_angle: Vec<TukeyComparison>,
    pub diverged: Vec<String>,
}

/// The two down-selected reference designs.
pub fn battery_designs() -> Result<Vec<ActuatorDesign>> {
    Ok(vec![
        ActuatorDesign::new(1, 50.80e-3)?,
        ActuatorDesign::new(2, 50.80e-3)?,
    ])
}

/// Derives the per-axis speed profiles and SPARC triple for a slice of the
/// trajectory: x and y from end-effector velocities, z from the joint rate
/// (the planar gyro axis). Signals are low-pass filtered before the
/// magnitude is taken.
fn sparc_triple(
    record: &TrialRecord,
    range: std::ops::Range<usize>,
    fc: f64,
    cfg: &SparcConfig,
) -> Result<SmoothnessTriple> {
    let fs = record.trajectory.sample_rate;
    let samples = &record.trajectory.samples[range];
    let xs: Vec<f64> = samples.iter().map(|s| s.x).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.y).collect();
    let omegas: Vec<f64> = samples.iter().map(|s| s.omega).collect();

    let speed_x = axis_speed_values(&xs, fs);
    let speed_y = axis_speed_values(&ys, fs);

    let mut triple = [0.0; 3];
    for (i, raw) in [speed_x, speed_y, omegas].into_iter().enumerate() {
        let filtered = butterworth2_zero_lag(&raw, fs, fc)?;
        let speeds: Vec<f64> = filtered.iter().map(|v| v.abs()).collect();
        triple[i] = sparc(&SpeedProfile::new(fs, speeds)?, cfg)?;
    }
    Ok(SmoothnessTriple {
        s_x: triple[0],
        s_y: triple[1],
        s_z: triple[2],
    })
}

/// Computes the scalar metrics of one record.
pub fn trial_metrics(record: &TrialRecord) -> Result<TrialMetrics> {
    let fs = record.trajectory.sample_rate;
    let split = ((record.schedule.inflate_time + record.schedule.hold_time) * fs) as usize;
    let n = record.trajectory.samples.len();
    if split + 4 > n {
        return Err(Error::Degenerate(
            "trajectory too short for phase-wise metrics".into(),
        ));
    }
    let sparc_cfg = SparcConfig::default();
    let fc = 5.0;
    Ok(TrialMetrics {
        trial_id: record.id(),
        max_angle_deg: record.max_angle.to_degrees(),
        path_length: path_length(&record.trajectory.positions())?,
        static_force: record.static_force,
        sparc_abduction: sparc_triple(record, 0..split, fc, &sparc_cfg)?,
        sparc_adduction: sparc_triple(record, split..n, fc, &sparc_cfg)?,
    })
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs the full battery described by `config` on `jobs` workers.
pub fn run_battery(config: &RunConfig, jobs: Option<usize>) -> Result<BatteryRun> {
    config.validate()?;
    let fit = fit_rig_parameters(&config.battery.angle_targets_deg)?;
    let designs = battery_designs()?;
    let duties = &config.battery.duties;
    let trials = config.battery.trials_per_condition;

    let mut specs: Vec<(TrialConfig, u64)> = Vec::new();
    for (di, design) in designs.iter().enumerate() {
        for (ji, &duty) in duties.iter().enumerate() {
            for k in 0..trials {
                let mut trial = TrialConfig::new(design.clone(), duty)?;
                trial.arm = config.arm;
                trial.arm.contact_offset = fit.contact_offset;
                trial.pump.flow_efficiency = config.pump.flow_efficiency;
                trial.pump.duty_deadband = config.pump.duty_deadband;
                trial.pump.q_max = config.pump.q_max;
                trial.board = config.board;
                trial.schedule = config.schedule;
                trial.noise = config.noise;
                trial.fill_target = fit.fills[ji.min(fit.fills.len() - 1)];
                trial.trial_index = k;
                specs.push((
                    trial,
                    trial_seed(config.battery.master_seed, di, ji, k),
                ));
            }
        }
    }

    let outcomes: Vec<std::result::Result<TrialRecord, String>> =
        exec::with_jobs(jobs, move || {
            exec::map(specs, |(trial, seed)| {
                simulate_trial(&trial, seed).map_err(|e| e.to_string())
            })
        });

    let mut records = Vec::new();
    let mut diverged = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => diverged.push(format!("trial {i}: {e}")),
        }
    }

    summarize(fit, records, diverged)
}

/// Rebuilds the derived statistics from persisted records (the `report`
/// path); the rig fit is recomputed from the configured targets.
pub fn rebuild_from_records(config: &RunConfig, records: Vec<TrialRecord>) -> Result<BatteryRun> {
    let fit = fit_rig_parameters(&config.battery.angle_targets_deg)?;
    summarize(fit, records, Vec::new())
}

/// Computes metrics, per-condition summaries, ANOVA tables, and the Tukey
/// comparison from a set of records.
pub fn summarize(
    fit: RigFit,
    records: Vec<TrialRecord>,
    diverged: Vec<String>,
) -> Result<BatteryRun> {
    if records.is_empty() {
        return Err(Error::Degenerate("no trial records to summarize".into()));
    }
    let metrics: Vec<TrialMetrics> = records
        .iter()
        .map(trial_metrics)
        .collect::<Result<_>>()?;

    let mut design_ids: Vec<String> = records.iter().map(|r| r.design_id.clone()).collect();
    design_ids.sort();
    design_ids.dedup();
    let mut duties: Vec<f64> = records.iter().map(|r| r.duty).collect();
    duties.sort_by(|a, b| a.partial_cmp(b).unwrap());
    duties.dedup();

    // condition summaries in (design, duty) order
    let mut summaries = Vec::new();
    for design_id in &design_ids {
        for &duty in &duties {
            let sel: Vec<(&TrialRecord, &TrialMetrics)> = records
                .iter()
                .zip(&metrics)
                .filter(|(r, _)| &r.design_id == design_id && r.duty == duty)
                .collect();
            if sel.len() < 2 {
                continue;
            }
            let angles: Vec<f64> = sel.iter().map(|(_, m)| m.max_angle_deg).collect();
            let forces: Vec<f64> = sel.iter().map(|(_, m)| m.static_force).collect();
            let paths: Vec<f64> = sel.iter().map(|(_, m)| m.path_length).collect();
            let collect_axis = |pick: &dyn Fn(&TrialMetrics) -> f64| -> (f64, f64) {
                let vals: Vec<f64> = sel.iter().map(|(_, m)| pick(m)).collect();
                mean_sd(&vals)
            };
            let abd_x = collect_axis(&|m| m.sparc_abduction.s_x);
            let abd_y = collect_axis(&|m| m.sparc_abduction.s_y);
            let abd_z = collect_axis(&|m| m.sparc_abduction.s_z);
            let add_x = collect_axis(&|m| m.sparc_adduction.s_x);
            let add_y = collect_axis(&|m| m.sparc_adduction.s_y);
            let add_z = collect_axis(&|m| m.sparc_adduction.s_z);
            summaries.push(ConditionSummary {
                design_id: design_id.clone(),
                duty,
                n_trials: sel.len(),
                angle_deg: CvRecord::from_samples(&angles)?,
                force: CvRecord::from_samples(&forces)?,
                path_length: CvRecord::from_samples(&paths)?,
                sparc_abduction_mean: SmoothnessTriple {
                    s_x: abd_x.0,
                    s_y: abd_y.0,
                    s_z: abd_z.0,
                },
                sparc_abduction_sd: [abd_x.1, abd_y.1, abd_z.1],
                sparc_adduction_mean: SmoothnessTriple {
                    s_x: add_x.0,
                    s_y: add_y.0,
                    s_z: add_z.0,
                },
                sparc_adduction_sd: [add_x.1, add_y.1, add_z.1],
                trial_ids: sel.iter().map(|(r, _)| r.id()).collect(),
            });
        }
    }

    // balanced factorial layout for the ANOVA tables
    let gather = |pick: &dyn Fn(&TrialMetrics) -> f64| -> Vec<Vec<Vec<f64>>> {
        design_ids
            .iter()
            .map(|design_id| {
                duties
                    .iter()
                    .map(|&duty| {
                        records
                            .iter()
                            .zip(&metrics)
                            .filter(|(r, _)| &r.design_id == design_id && r.duty == duty)
                            .map(|(_, m)| pick(m))
                            .collect()
                    })
                    .collect()
            })
            .collect()
    };
    let anova_angle = two_way_anova(&gather(&|m| m.max_angle_deg))?;
    let anova_force = two_way_anova(&gather(&|m| m.static_force))?;
    let anova_path = two_way_anova(&gather(&|m| m.path_length))?;

    // Tukey over duty groups for the angle metric, using the ANOVA error
    // mean square as the common variance estimate
    let mut duty_means = Vec::new();
    let mut n_per_duty = 0usize;
    for &duty in &duties {
        let vals: Vec<f64> = records
            .iter()
            .zip(&metrics)
            .filter(|(r, _)| r.duty == duty)
            .map(|(_, m)| m.max_angle_deg)
            .collect();
        n_per_duty = vals.len();
        duty_means.push(vals.iter().sum::<f64>() / vals.len() as f64);
    }
    let tukey_duty_angle = tukey_hsd(
        &duty_means,
        anova_angle.error.mean_sq.max(1e-12),
        n_per_duty,
        anova_angle.error.df,
    )?;

    Ok(BatteryRun {
        fit,
        records,
        metrics,
        summaries,
        anova_angle,
        anova_force,
        anova_path,
        tukey_duty_angle,
        diverged,
    })
}
