use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mono PCM audio with samples in [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcmClip {
    pub sample_rate: u32,
    pub samples: Vec<f64>,
}

impl PcmClip {
    pub fn new(sample_rate: u32, samples: Vec<f64>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidArgument(
                "sample rate must be positive".into(),
            ));
        }
        Ok(Self {
            sample_rate,
            samples,
        })
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

fn decode_reader<R: std::io::Read>(reader: hound::WavReader<R>) -> Result<PcmClip> {
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedAudio(format!(
            "{:?} {}-bit samples, need 16-bit PCM",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    if spec.channels != 1 {
        return Err(Error::UnsupportedAudio(format!(
            "{} channels, need mono",
            spec.channels
        )));
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| f64::from(v) / 32768.0))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Decode(e.to_string()))?;
    PcmClip::new(spec.sample_rate, samples)
}

/// Reads a 16-bit mono PCM WAV file.
pub fn read_wav(path: &Path) -> Result<PcmClip> {
    let reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Decode(format!("{}: {other}", path.display())),
    })?;
    decode_reader(reader)
}

pub fn read_wav_bytes(bytes: &[u8]) -> Result<PcmClip> {
    let reader = hound::WavReader::new(std::io::Cursor::new(bytes))
        .map_err(|e| Error::Decode(e.to_string()))?;
    decode_reader(reader)
}

/// Reads a clip and rejects it unless it is at `expected_rate`.
pub fn read_wav_at(path: &Path, expected_rate: u32) -> Result<PcmClip> {
    let clip = read_wav(path)?;
    if clip.sample_rate != expected_rate {
        return Err(Error::UnsupportedAudio(format!(
            "{}: sample rate {} Hz, expected {expected_rate} Hz",
            path.display(),
            clip.sample_rate
        )));
    }
    Ok(clip)
}

/// Encodes samples as 16-bit mono PCM, clamping to the representable range.
pub fn encode_wav(clip: &PcmClip) -> Result<Vec<u8>> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut cursor = std::io::Cursor::new(Vec::new());
    {
        let mut w =
            hound::WavWriter::new(&mut cursor, spec).map_err(|e| Error::Decode(e.to_string()))?;
        for &s in &clip.samples {
            let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
            w.write_sample(v)
                .map_err(|e| Error::Decode(e.to_string()))?;
        }
        w.finalize().map_err(|e| Error::Decode(e.to_string()))?;
    }
    Ok(cursor.into_inner())
}

/// Cuts or zero-pads to exactly `sample_rate × seconds` samples,
/// keeping the start of the clip.
pub fn trim_pad(clip: &PcmClip, seconds: f64) -> Result<PcmClip> {
    if !(seconds > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "clip length must be positive, got {seconds}"
        )));
    }
    let target = (clip.sample_rate as f64 * seconds).round() as usize;
    let mut samples = clip.samples.clone();
    samples.resize(target, 0.0);
    Ok(PcmClip {
        sample_rate: clip.sample_rate,
        samples,
    })
}
