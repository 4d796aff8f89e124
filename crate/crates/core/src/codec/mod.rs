//! Audio containers and codecs: WAV (PCM16 and IMA-ADPCM, mono), the ADPCM
//! block codec itself, and a signal-to-noise measure for round-trip checks.

pub mod ima;
pub mod wav;

use std::path::Path;

use thiserror::Error;

pub use ima::{decode_adpcm, encode_adpcm, AdpcmBlock, STEP_TABLE};
pub use wav::{parse_wav, write_wav, CodecTag, WavFormatDescriptor};

pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;
/// Block size used by common voice recorders for 16 kHz mono IMA-ADPCM.
pub const DEFAULT_ADPCM_BLOCK_ALIGN: u16 = 256;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("malformed RIFF: {0}")]
    MalformedRiff(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("truncated data: {0}")]
    TruncatedData(String),
    #[error("inconsistent descriptor: {0}")]
    InconsistentDescriptor(String),
    #[error("invalid ADPCM block: {0}")]
    InvalidBlock(String),
    #[error("invalid block size {0}")]
    InvalidBlockSize(usize),
    #[error("length mismatch: reference has {reference} samples, test has {test}")]
    LengthMismatch { reference: usize, test: usize },
    #[error("reference signal is empty or all zero")]
    SilentReference,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Decoded mono audio: 16-bit samples at a fixed rate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AudioStream {
    pub samples: Vec<i16>,
    pub sample_rate: u32,
}

impl AudioStream {
    pub fn new(samples: Vec<i16>, sample_rate: u32) -> Self {
        assert!(sample_rate > 0, "sample rate must be positive");
        Self { samples, sample_rate }
    }

    pub fn channel_count(&self) -> u16 {
        1
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Largest absolute amplitude; `i16::MIN` counts as 32768.
    pub fn peak(&self) -> u16 {
        self.samples.iter().map(|s| s.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn slice(&self, start: usize, end: usize) -> AudioStream {
        AudioStream::new(self.samples[start..end].to_vec(), self.sample_rate)
    }

    /// Parses a WAV file and decodes it whatever its codec.
    pub fn from_wav_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let (format, payload) = parse_wav(bytes)?;
        let samples = match format.codec {
            CodecTag::Pcm16 => wav::samples_from_pcm16(&payload),
            CodecTag::ImaAdpcm => {
                let blocks = ima::blocks_from_payload(&payload, format.block_align as usize)?;
                decode_adpcm(&blocks)
            }
        };
        let mut samples = samples;
        if let Some(frames) = format.sample_frames {
            samples.truncate(frames as usize);
        }
        Ok(Self::new(samples, format.sample_rate))
    }

    pub fn to_pcm16_wav(&self) -> Vec<u8> {
        write_wav(
            &WavFormatDescriptor::pcm16(self.sample_rate),
            &wav::pcm16_payload(&self.samples),
        )
        .expect("PCM16 descriptor is always consistent")
    }

    /// Encodes to an IMA-ADPCM WAV. The last block is zero-padded to `block_align`;
    /// a `fact` chunk records the true sample count so decoding drops the padding.
    pub fn to_adpcm_wav(&self, block_align: u16) -> Result<Vec<u8>, CodecError> {
        let frames = u32::try_from(self.len())
            .map_err(|_| CodecError::InconsistentDescriptor("stream exceeds u32 samples".into()))?;
        let format = WavFormatDescriptor::ima_adpcm(self.sample_rate, block_align).with_sample_frames(frames);
        format.validate(None)?;
        let blocks = encode_adpcm(&self.samples, format.samples_per_block as usize)?;
        let payload = ima::payload_from_blocks(&blocks, block_align as usize)?;
        write_wav(&format, &payload)
    }

    pub fn read_wav(path: impl AsRef<Path>) -> Result<Self, CodecError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| CodecError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_wav_bytes(&bytes)
    }

    pub fn write_pcm16_wav(&self, path: impl AsRef<Path>) -> Result<(), CodecError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_pcm16_wav()).map_err(|source| CodecError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Signal-to-noise ratio in dB, `10·log10(Σref² / Σ(ref−test)²)`.
/// Identical inputs give `f64::INFINITY`.
pub fn snr_db(reference: &[i16], test: &[i16]) -> Result<f64, CodecError> {
    if reference.len() != test.len() {
        return Err(CodecError::LengthMismatch {
            reference: reference.len(),
            test: test.len(),
        });
    }
    let signal: f64 = reference.iter().map(|&r| (r as f64).powi(2)).sum();
    if signal == 0.0 {
        return Err(CodecError::SilentReference);
    }
    let noise: f64 = reference
        .iter()
        .zip(test)
        .map(|(&r, &t)| (r as f64 - t as f64).powi(2))
        .sum();
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / noise).log10())
}
