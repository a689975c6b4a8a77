//! Kinematic evaluation metrics: zero-lag Butterworth filtering, spectral
//! arc-length smoothness, path length, and coefficient of variation.

use crate::error::{Error, Result};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

/// Nonnegative speed samples at a fixed rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedProfile {
    pub sample_rate: f64,
    pub values: Vec<f64>,
}

impl SpeedProfile {
    pub fn new(sample_rate: f64, values: Vec<f64>) -> Result<Self> {
        if !(sample_rate > 0.0) {
            return Err(Error::Domain("sample_rate must be positive".into()));
        }
        if values.len() < 4 {
            return Err(Error::Degenerate(
                "speed profile needs at least 4 samples".into(),
            ));
        }
        if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::Domain(
                "speed profile values must be finite and nonnegative".into(),
            ));
        }
        Ok(SpeedProfile {
            sample_rate,
            values,
        })
    }
}

/// Per-axis smoothness values; negative, closer to zero is smoother.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessTriple {
    pub s_x: f64,
    pub s_y: f64,
    pub s_z: f64,
}

impl SmoothnessTriple {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("s_x", self.s_x), ("s_y", self.s_y), ("s_z", self.s_z)] {
            if !v.is_finite() || v >= 0.0 {
                return Err(Error::Domain(format!("{name} must be finite and negative")));
            }
        }
        Ok(())
    }
}

/// Second-order zero-lag Butterworth low-pass.
///
/// Bilinear transform with prewarping, step-response initial conditions, and
/// odd-reflection edge padding. The forward-backward pass is averaged with
/// its mirror (backward-forward), which makes time-reversal symmetry exact
/// in floating point while keeping the same squared magnitude response.
pub fn butterworth2_zero_lag(signal: &[f64], fs: f64, fc: f64) -> Result<Vec<f64>> {
    if !(fs > 0.0) {
        return Err(Error::Domain("fs must be positive".into()));
    }
    if !(fc > 0.0 && fc < fs / 2.0) {
        return Err(Error::Domain(format!(
            "cutoff {fc} Hz must lie in (0, Nyquist = {} Hz)",
            fs / 2.0
        )));
    }
    if signal.len() < 2 {
        return Ok(signal.to_vec());
    }

    // analog prototype warped onto the bilinear frequency axis
    let omega = (std::f64::consts::PI * fc / fs).tan();
    let k1 = std::f64::consts::SQRT_2 * omega;
    let k2 = omega * omega;
    let a0 = 1.0 + k1 + k2;
    let b = [k2 / a0, 2.0 * k2 / a0, k2 / a0];
    let a = [1.0, 2.0 * (k2 - 1.0) / a0, (1.0 - k1 + k2) / a0];

    let fwd = filtfilt_once(&b, &a, signal);
    let mirrored: Vec<f64> = signal.iter().rev().cloned().collect();
    let mut bwd = filtfilt_once(&b, &a, &mirrored);
    bwd.reverse();
    Ok(fwd.iter().zip(&bwd).map(|(p, q)| 0.5 * (p + q)).collect())
}

fn filtfilt_once(b: &[f64; 3], a: &[f64; 3], signal: &[f64]) -> Vec<f64> {
    let pad = 9.min(signal.len() - 1);
    let padded = reflect_pad(signal, pad);
    let fwd = lfilter_with_step_ic(b, a, &padded);
    let mut rev: Vec<f64> = fwd.into_iter().rev().collect();
    rev = lfilter_with_step_ic(b, a, &rev);
    rev.reverse();
    rev[pad..rev.len() - pad].to_vec()
}

/// Odd (antisymmetric) reflection about the end samples.
fn reflect_pad(x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        out.push(2.0 * x[0] - x[i]);
    }
    out.extend_from_slice(x);
    for i in 1..=pad {
        out.push(2.0 * x[n - 1] - x[n - 1 - i]);
    }
    out
}

/// Direct-form II transposed filter with initial state matching the
/// steady-state response to a step of the first sample.
fn lfilter_with_step_ic(b: &[f64; 3], a: &[f64; 3], x: &[f64]) -> Vec<f64> {
    // steady-state unit-step state: z0 = 1 - b0, z1 = b2 - a2
    let x0 = x[0];
    let mut z0 = (1.0 - b[0]) * x0;
    let mut z1 = (b[2] - a[2]) * x0;
    let mut out = Vec::with_capacity(x.len());
    for &xi in x {
        let y = b[0] * xi + z0;
        z0 = b[1] * xi - a[1] * y + z1;
        z1 = b[2] * xi - a[2] * y;
        out.push(y);
    }
    out
}

/// Squared magnitude response of the analog second-order Butterworth
/// prototype at frequency `f` for cutoff `fc`: 1 / (1 + (f/fc)^4).
pub fn butterworth2_magnitude_sq(f: f64, fc: f64) -> f64 {
    1.0 / (1.0 + (f / fc).powi(4))
}

/// Configuration for the spectral arc-length computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparcConfig {
    /// Normalized magnitude below which spectrum content is ignored when
    /// choosing the adaptive cutoff.
    pub amp_threshold: f64,
    /// Upper bound on the adaptive cutoff frequency, Hz.
    pub f_max: f64,
    /// Zero-padding factor: the DFT length is the next power of two at or
    /// above `padding_factor * len`.
    pub padding_factor: usize,
}

impl Default for SparcConfig {
    fn default() -> Self {
        SparcConfig {
            amp_threshold: 0.05,
            f_max: 10.0,
            padding_factor: 4,
        }
    }
}

/// Spectral arc length of a speed profile: the negative arc length of the
/// zero-frequency-normalized magnitude spectrum over [0, adaptive cutoff],
/// with frequency rescaled onto [0, 1].
pub fn sparc(profile: &SpeedProfile, cfg: &SparcConfig) -> Result<f64> {
    let max = profile.values.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Err(Error::Degenerate(
            "smoothness undefined for an all-zero profile".into(),
        ));
    }
    let n = profile.values.len();
    let nfft = (cfg.padding_factor * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = profile
        .values
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)).take(nfft - n))
        .collect();
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);

    let df = profile.sample_rate / nfft as f64;
    let half = nfft / 2;
    let dc = buf[0].norm();
    if dc <= 0.0 {
        return Err(Error::Degenerate("zero spectral mass at DC".into()));
    }
    let mags: Vec<f64> = buf[..=half].iter().map(|c| c.norm() / dc).collect();

    // adaptive cutoff: the largest bin at or below f_max whose normalized
    // magnitude still clears the threshold
    let mut max_idx = ((cfg.f_max / df).floor() as usize).min(half);
    if max_idx == 0 {
        return Err(Error::Degenerate("f_max below spectral resolution".into()));
    }
    while max_idx > 0 && mags[max_idx] < cfg.amp_threshold {
        max_idx -= 1;
    }
    if max_idx == 0 {
        max_idx = 1;
    }
    let f_cut = max_idx as f64 * df;

    let mut arc = 0.0;
    for i in 1..=max_idx {
        let dfreq = df / f_cut;
        let dmag = mags[i] - mags[i - 1];
        arc += (dfreq * dfreq + dmag * dmag).sqrt();
    }
    Ok(-arc)
}

/// Cumulative Euclidean length of a planar point sequence, m.
pub fn path_length(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Degenerate("path length needs at least 2 samples".into()));
    }
    Ok(points
        .windows(2)
        .map(|w| {
            let dx = w[1].0 - w[0].0;
            let dy = w[1].1 - w[0].1;
            (dx * dx + dy * dy).sqrt()
        })
        .sum())
}

/// Mean, sample standard deviation (n-1), and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvRecord {
    pub mean: f64,
    pub sd: f64,
    pub cv: f64,
}

impl CvRecord {
    /// From raw samples; errors on fewer than 2 samples or zero mean.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Degenerate("cv needs at least 2 samples".into()));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        Self::from_mean_sd(mean, var.sqrt())
    }

    pub fn from_mean_sd(mean: f64, sd: f64) -> Result<Self> {
        if mean == 0.0 {
            return Err(Error::Degenerate("cv undefined for zero mean".into()));
        }
        Ok(CvRecord {
            mean,
            sd,
            cv: sd / mean,
        })
    }
}
