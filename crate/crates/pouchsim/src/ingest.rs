//! CSV ingestion of external IMU and marker logs, timestamp-jitter
//! resampling, and the analysis pipeline shared with the simulator.
//!
//! Schemas:
//! - IMU:    `t,gx,gy,gz,ax,ay,az` (s, rad/s, m/s^2), nominal 60 Hz
//! - marker: `t,x,y` (s, m)

use crate::error::{Error, Result};
use crate::metrics::{
    butterworth2_zero_lag, path_length, sparc, CvRecord, SparcConfig, SpeedProfile,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const IMU_HEADER: &str = "t,gx,gy,gz,ax,ay,az";
pub const MARKER_HEADER: &str = "t,x,y";

/// Relative timestamp jitter above which a log is resampled.
pub const JITTER_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    pub gyro: [f64; 3],
    pub accel: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkerSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

fn parse_rows(path: &Path, header: &str) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let columns: Vec<&str> = header.split(',').collect();
    match lines.next() {
        Some(h) if h.trim() == header => {}
        Some(h) => {
            return Err(Error::Schema {
                row: 1,
                column: h.trim().to_string(),
                message: format!("expected header `{header}`"),
            })
        }
        None => {
            return Err(Error::Schema {
                row: 1,
                column: String::new(),
                message: "empty file".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(Error::Schema {
                row: row_no,
                column: format!("{} fields", fields.len()),
                message: format!("expected {} columns", columns.len()),
            });
        }
        let mut parsed = Vec::with_capacity(fields.len());
        for (field, name) in fields.iter().zip(&columns) {
            let v: f64 = field.trim().parse().map_err(|_| Error::Schema {
                row: row_no,
                column: name.to_string(),
                message: format!("`{}` is not a number", field.trim()),
            })?;
            parsed.push(v);
        }
        rows.push(parsed);
    }
    if rows.is_empty() {
        return Err(Error::Schema {
            row: 2,
            column: String::new(),
            message: "no data rows".into(),
        });
    }
    Ok(rows)
}

pub fn read_imu_csv(path: &Path) -> Result<Vec<ImuSample>> {
    Ok(parse_rows(path, IMU_HEADER)?
        .into_iter()
        .map(|r| ImuSample {
            t: r[0],
            gyro: [r[1], r[2], r[3]],
            accel: [r[4], r[5], r[6]],
        })
        .collect())
}

pub fn read_marker_csv(path: &Path) -> Result<Vec<MarkerSample>> {
    Ok(parse_rows(path, MARKER_HEADER)?
        .into_iter()
        .map(|r| MarkerSample {
            t: r[0],
            x: r[1],
            y: r[2],
        })
        .collect())
}

/// Checks grid uniformity; when jitter exceeds [`JITTER_TOLERANCE`] the
/// channels are linearly resampled onto a uniform grid. Returns the
/// (possibly new) time axis, the channels, and whether resampling happened.
pub fn uniform_grid(
    times: &[f64],
    channels: &[Vec<f64>],
) -> Result<(Vec<f64>, Vec<Vec<f64>>, bool)> {
    if times.len() < 2 {
        return Err(Error::Degenerate("need at least 2 samples".into()));
    }
    let n = times.len();
    let span = times[n - 1] - times[0];
    if !(span > 0.0) {
        return Err(Error::Degenerate("timestamps do not advance".into()));
    }
    let dt_nominal = span / (n - 1) as f64;
    let mut max_jitter = 0.0f64;
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        if dt <= 0.0 {
            return Err(Error::Degenerate("non-monotone timestamps".into()));
        }
        max_jitter = max_jitter.max((dt - dt_nominal).abs() / dt_nominal);
    }
    if max_jitter <= JITTER_TOLERANCE {
        return Ok((times.to_vec(), channels.to_vec(), false));
    }
    // linear resample onto the nominal grid
    let new_times: Vec<f64> = (0..n).map(|i| times[0] + i as f64 * dt_nominal).collect();
    let mut new_channels = Vec::with_capacity(channels.len());
    for ch in channels {
        let mut out = Vec::with_capacity(n);
        let mut j = 0usize;
        for &t in &new_times {
            while j + 2 < n && times[j + 1] < t {
                j += 1;
            }
            let t0 = times[j];
            let t1 = times[j + 1];
            let frac = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
            out.push(ch[j] * (1.0 - frac) + ch[j + 1] * frac);
        }
        new_channels.push(out);
    }
    Ok((new_times, new_channels, true))
}

/// Forward-difference speed samples of one position axis, length n-1.
pub fn axis_speed_values(positions: &[f64], fs: f64) -> Vec<f64> {
    positions.windows(2).map(|w| (w[1] - w[0]) * fs).collect()
}

/// How the per-axis smoothness is aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SparcMode {
    /// One value per gyro axis.
    PerAxis,
    /// One value for the resultant angular speed.
    Resultant,
}

/// Metrics extracted from one IMU log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImuAnalysis {
    pub resampled: bool,
    /// Per-axis smoothness; `None` for an axis with no usable signal.
    pub sparc_axes: [Option<f64>; 3],
    pub sparc_resultant: Option<f64>,
}

/// Metrics extracted from one marker log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkerAnalysis {
    pub resampled: bool,
    pub path_length: f64,
    pub max_angle_deg: f64,
    /// Smoothness of the x/y marker-velocity profiles.
    pub sparc_xy: [Option<f64>; 2],
}

fn sparc_of_speed(raw: &[f64], fs: f64, fc: f64, cfg: &SparcConfig) -> Result<Option<f64>> {
    if raw.len() < 4 {
        return Ok(None);
    }
    let filtered = butterworth2_zero_lag(raw, fs, fc)?;
    let speeds: Vec<f64> = filtered.iter().map(|v| v.abs()).collect();
    if speeds.iter().cloned().fold(0.0f64, f64::max) <= 1e-12 {
        return Ok(None);
    }
    Ok(Some(sparc(&SpeedProfile::new(fs, speeds)?, cfg)?))
}

/// Filters and scores one IMU log.
pub fn analyze_imu(samples: &[ImuSample], fc: f64, cfg: &SparcConfig) -> Result<ImuAnalysis> {
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let channels: Vec<Vec<f64>> = (0..3)
        .map(|a| samples.iter().map(|s| s.gyro[a]).collect())
        .collect();
    let (times, channels, resampled) = uniform_grid(&times, &channels)?;
    let fs = (times.len() - 1) as f64 / (times[times.len() - 1] - times[0]);

    let mut sparc_axes = [None; 3];
    for (a, ch) in channels.iter().enumerate() {
        sparc_axes[a] = sparc_of_speed(ch, fs, fc, cfg)?;
    }
    let resultant: Vec<f64> = (0..channels[0].len())
        .map(|i| {
            (channels[0][i] * channels[0][i]
                + channels[1][i] * channels[1][i]
                + channels[2][i] * channels[2][i])
                .sqrt()
        })
        .collect();
    let sparc_resultant = sparc_of_speed(&resultant, fs, fc, cfg)?;
    Ok(ImuAnalysis {
        resampled,
        sparc_axes,
        sparc_resultant,
    })
}

/// Filters and scores one marker log. `arm_length` converts positions to
/// the shoulder angle.
pub fn analyze_marker(
    samples: &[MarkerSample],
    arm_length: f64,
    fc: f64,
    cfg: &SparcConfig,
) -> Result<MarkerAnalysis> {
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let channels = vec![
        samples.iter().map(|s| s.x).collect::<Vec<f64>>(),
        samples.iter().map(|s| s.y).collect::<Vec<f64>>(),
    ];
    let (times, channels, resampled) = uniform_grid(&times, &channels)?;
    let fs = (times.len() - 1) as f64 / (times[times.len() - 1] - times[0]);

    let points: Vec<(f64, f64)> = channels[0]
        .iter()
        .zip(&channels[1])
        .map(|(&x, &y)| (x, y))
        .collect();
    let pl = path_length(&points)?;
    let max_angle = points
        .iter()
        .map(|&(x, y)| x.atan2(arm_length - y))
        .fold(f64::NEG_INFINITY, f64::max);

    let mut sparc_xy = [None; 2];
    for (a, ch) in channels.iter().enumerate() {
        let speeds = axis_speed_values(ch, fs);
        sparc_xy[a] = sparc_of_speed(&speeds, fs, fc, cfg)?;
    }
    Ok(MarkerAnalysis {
        resampled,
        path_length: pl,
        max_angle_deg: max_angle.to_degrees(),
        sparc_xy,
    })
}

/// CV across per-trial values, skipping missing entries.
pub fn cv_across_trials(values: &[Option<f64>]) -> Option<CvRecord> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.len() < 2 {
        return None;
    }
    CvRecord::from_samples(&present).ok()
}

/// Serializes one simulated trial into the external CSV schemas (full
/// float precision, so ingest-vs-simulated parity is exact).
pub fn export_trial_csvs(record: &crate::rig::TrialRecord) -> (String, String) {
    let mut imu = String::from(IMU_HEADER);
    imu.push('\n');
    let mut marker = String::from(MARKER_HEADER);
    marker.push('\n');
    for s in &record.trajectory.samples {
        imu.push_str(&format!("{},0,0,{},0,0,0\n", s.t, s.omega));
        marker.push_str(&format!("{},{},{}\n", s.t, s.x, s.y));
    }
    (imu, marker)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn rejects_empty_and_misheadered_files() {
        let f = write_tmp("");
        assert!(matches!(
            read_imu_csv(f.path()),
            Err(Error::Schema { row: 1, .. })
        ));
        let f = write_tmp("time,gx\n1,2\n");
        assert!(read_imu_csv(f.path()).is_err());
    }

    #[test]
    fn schema_error_names_row_and_column() {
        let f = write_tmp("t,x,y\n0,0.1,0.2\n0.016,oops,0.2\n");
        match read_marker_csv(f.path()) {
            Err(Error::Schema { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "x");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn marker_round_trip() {
        let f = write_tmp("t,x,y\n0,0.0,0.0\n0.016,0.01,0.002\n");
        let rows = read_marker_csv(f.path()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].x, 0.01);
    }

    #[test]
    fn jitter_below_tolerance_left_alone() {
        let times: Vec<f64> = (0..100).map(|i| i as f64 / 60.0).collect();
        let ch = vec![times.clone()];
        let (_, _, resampled) = uniform_grid(&times, &ch).unwrap();
        assert!(!resampled);
    }

    #[test]
    fn heavy_jitter_triggers_resampling() {
        let mut times: Vec<f64> = (0..100).map(|i| i as f64 / 60.0).collect();
        times[50] += 0.004; // ~24% of one interval
        let values: Vec<f64> = times.iter().map(|t| t * 2.0).collect();
        let (new_t, new_ch, resampled) = uniform_grid(&times, &[values]).unwrap();
        assert!(resampled);
        // channel was linear in time, so resampling reproduces linearity
        for (t, v) in new_t.iter().zip(&new_ch[0]) {
            assert!((v - 2.0 * t).abs() < 1e-9);
        }
    }

    #[test]
    fn stationary_marker_file_has_zero_path() {
        let mut body = String::from("t,x,y\n");
        for i in 0..60 {
            body.push_str(&format!("{},0.05,0.02\n", i as f64 / 60.0));
        }
        let f = write_tmp(&body);
        let samples = read_marker_csv(f.path()).unwrap();
        let a = analyze_marker(&samples, 0.165, 5.0, &SparcConfig::default()).unwrap();
        assert_eq!(a.path_length, 0.0);
        assert!(a.sparc_xy[0].is_none() && a.sparc_xy[1].is_none());
    }

    #[test]
    fn imu_analysis_skips_dead_axes() {
        let samples: Vec<ImuSample> = (0..120)
            .map(|i| {
                let t = i as f64 / 60.0;
                ImuSample {
                    t,
                    gyro: [0.0, 0.0, (2.0 * std::f64::consts::PI * t).sin().abs()],
                    accel: [0.0; 3],
                }
            })
            .collect();
        let a = analyze_imu(&samples, 5.0, &SparcConfig::default()).unwrap();
        assert!(a.sparc_axes[0].is_none());
        assert!(a.sparc_axes[1].is_none());
        assert!(a.sparc_axes[2].unwrap() < 0.0);
        assert!(a.sparc_resultant.unwrap() < 0.0);
    }

    #[test]
    fn cv_across_trials_skips_missing() {
        let vals = vec![Some(2.0), None, Some(2.2), Some(1.8)];
        let cv = cv_across_trials(&vals).unwrap();
        assert!((cv.mean - 2.0).abs() < 1e-12);
        assert!(cv_across_trials(&[Some(1.0), None]).is_none());
    }
}
