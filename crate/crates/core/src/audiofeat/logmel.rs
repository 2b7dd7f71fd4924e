use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use super::wav::PcmClip;
use crate::error::{Error, Result};
use crate::ndcore::Tensor2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogMelConfig {
    pub sample_rate: u32,
    pub fft_size: usize,
    pub hop: usize,
    pub mel_bins: usize,
    pub fmin: f64,
    /// Upper edge in Hz; `None` means Nyquist.
    pub fmax: Option<f64>,
    pub log_floor: f64,
    pub clip_seconds: f64,
}

impl Default for LogMelConfig {
    fn default() -> Self {
        Self {
            sample_rate: 16000,
            fft_size: 1024,
            hop: 512,
            mel_bins: 64,
            fmin: 0.0,
            fmax: None,
            log_floor: 1e-10,
            clip_seconds: 10.0,
        }
    }
}

impl LogMelConfig {
    pub fn fmax_hz(&self) -> f64 {
        self.fmax.unwrap_or(self.sample_rate as f64 / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        let nyquist = self.sample_rate as f64 / 2.0;
        let fmax = self.fmax_hz();
        if self.sample_rate == 0 || self.fft_size < 2 || self.hop == 0 || self.mel_bins == 0 {
            return Err(Error::InvalidArgument(
                "sample rate, fft size, hop and mel bins must be positive".into(),
            ));
        }
        if self.hop > self.fft_size {
            return Err(Error::InvalidArgument(format!(
                "hop {} exceeds fft size {}",
                self.hop, self.fft_size
            )));
        }
        if !(0.0 <= self.fmin && self.fmin < fmax && fmax <= nyquist) {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= fmin < fmax <= {nyquist}, got fmin={} fmax={fmax}",
                self.fmin
            )));
        }
        if !(self.log_floor > 0.0) || !(self.clip_seconds > 0.0) {
            return Err(Error::InvalidArgument(
                "log floor and clip length must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn frame_count(&self, len: usize) -> Option<usize> {
        frame_count(len, self.fft_size, self.hop)
    }
}

/// `1 + ⌊(len − fft)/hop⌋`, or `None` when the clip is shorter than a frame.
pub fn frame_count(len: usize, fft_size: usize, hop: usize) -> Option<usize> {
    if len < fft_size || hop == 0 {
        None
    } else {
        Some(1 + (len - fft_size) / hop)
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Periodic Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Triangular HTK-scale filters, `mel_bins × (fft/2 + 1)`, peak weight 1.
pub fn mel_filterbank(cfg: &LogMelConfig) -> Tensor2 {
    let nbins = cfg.fft_size / 2 + 1;
    let lo = hz_to_mel(cfg.fmin);
    let hi = hz_to_mel(cfg.fmax_hz());
    let edges: Vec<f64> = (0..cfg.mel_bins + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (cfg.mel_bins + 1) as f64))
        .collect();
    let bin_hz = cfg.sample_rate as f64 / cfg.fft_size as f64;
    let mut fb = Tensor2::zeros(cfg.mel_bins, nbins);
    for m in 0..cfg.mel_bins {
        let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
        for k in 0..nbins {
            let f = k as f64 * bin_hz;
            let w = if f > left && f <= center {
                (f - left) / (center - left)
            } else if f > center && f < right {
                (right - f) / (right - center)
            } else {
                0.0
            };
            fb.set(m, k, w);
        }
    }
    fb
}

/// Power spectrogram `|STFT|²` of a Hann-windowed clip, frames × (fft/2 + 1).
pub fn stft_power(clip: &PcmClip, cfg: &LogMelConfig) -> Result<Tensor2> {
    let frames = cfg.frame_count(clip.samples.len()).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "clip of {} samples is shorter than one {}-sample frame",
            clip.samples.len(),
            cfg.fft_size
        ))
    })?;
    let n = cfg.fft_size;
    let nbins = n / 2 + 1;
    let window = hann(n);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let mut out = Tensor2::zeros(frames, nbins);
    for f in 0..frames {
        let start = f * cfg.hop;
        for (i, c) in buf.iter_mut().enumerate() {
            *c = Complex::new(clip.samples[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        let row = out.row_mut(f);
        for k in 0..nbins {
            row[k] = buf[k].norm_sqr();
        }
    }
    Ok(out)
}

/// Log-mel features, frames × mel bins: `ln(mel power + floor)`.
pub fn logmel(clip: &PcmClip, cfg: &LogMelConfig) -> Result<Tensor2> {
    cfg.validate()?;
    if clip.sample_rate != cfg.sample_rate {
        return Err(Error::UnsupportedAudio(format!(
            "clip at {} Hz, config expects {} Hz",
            clip.sample_rate, cfg.sample_rate
        )));
    }
    let power = stft_power(clip, cfg)?;
    let fb = mel_filterbank(cfg);
    let mut out = Tensor2::zeros(power.rows(), cfg.mel_bins);
    for f in 0..power.rows() {
        let p = power.row(f);
        for m in 0..cfg.mel_bins {
            let e: f64 = fb.row(m).iter().zip(p).map(|(w, x)| w * x).sum();
            out.set(f, m, (e + cfg.log_floor).ln());
        }
    }
    out.ensure_finite("log-mel features")?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mel_scale_roundtrip() {
        for hz in [0.0, 100.0, 1000.0, 8000.0] {
            assert!((mel_to_hz(hz_to_mel(hz)) - hz).abs() < 1e-9);
        }
        assert!((hz_to_mel(1000.0) - 999.9855).abs() < 1e-3);
    }

    #[test]
    fn config_validation() {
        assert!(LogMelConfig::default().validate().is_ok());
        let bad = LogMelConfig {
            hop: 2048,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = LogMelConfig {
            fmin: 9000.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = LogMelConfig {
            fmax: Some(9000.0),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn short_clip_errors() {
        let cfg = LogMelConfig::default();
        let clip = PcmClip::new(16000, vec![0.0; 1000]).unwrap();
        assert!(logmel(&clip, &cfg).is_err());
    }

    #[test]
    fn rate_mismatch_errors() {
        let cfg = LogMelConfig::default();
        let clip = PcmClip::new(22050, vec![0.0; 4096]).unwrap();
        assert!(matches!(
            logmel(&clip, &cfg),
            Err(Error::UnsupportedAudio(_))
        ));
    }

    #[test]
    fn filters_are_nonnegative_and_peak_at_most_one() {
        let fb = mel_filterbank(&LogMelConfig::default());
        assert!(fb.data().iter().all(|&w| (0.0..=1.0).contains(&w)));
        for m in 0..fb.rows() {
            assert!(fb.row(m).iter().any(|&w| w > 0.0), "empty filter {m}");
        }
    }
}
