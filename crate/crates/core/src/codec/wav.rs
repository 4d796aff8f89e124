//! Canonical RIFF/WAVE reading and writing: `fmt `, optional `fact`, and `data`
//! chunks, mono only. Unknown chunks are skipped on read and never written.

use serde::{Deserialize, Serialize};

use super::ima::BLOCK_HEADER_LEN;
use super::CodecError;

pub const FORMAT_PCM: u16 = 0x0001;
pub const FORMAT_IMA_ADPCM: u16 = 0x0011;

/// Size of a PCM16 file with an empty data chunk.
pub const PCM_HEADER_LEN: usize = 44;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodecTag {
    Pcm16,
    ImaAdpcm,
}

impl CodecTag {
    pub fn format_tag(self) -> u16 {
        match self {
            CodecTag::Pcm16 => FORMAT_PCM,
            CodecTag::ImaAdpcm => FORMAT_IMA_ADPCM,
        }
    }

    pub fn bits_per_sample(self) -> u16 {
        match self {
            CodecTag::Pcm16 => 16,
            CodecTag::ImaAdpcm => 4,
        }
    }
}

/// The `fmt ` chunk contents this crate understands. For PCM16 the block is one
/// sample: `block_align` = 2 and `samples_per_block` = 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WavFormatDescriptor {
    pub codec: CodecTag,
    pub sample_rate: u32,
    pub bits_per_sample: u16,
    pub block_align: u16,
    pub samples_per_block: u16,
    /// Sample count from the `fact` chunk. ADPCM files need it when the last
    /// block is padded.
    #[serde(default)]
    pub sample_frames: Option<u32>,
}

impl WavFormatDescriptor {
    pub fn pcm16(sample_rate: u32) -> Self {
        Self {
            codec: CodecTag::Pcm16,
            sample_rate,
            bits_per_sample: 16,
            block_align: 2,
            samples_per_block: 1,
            sample_frames: None,
        }
    }

    pub fn ima_adpcm(sample_rate: u32, block_align: u16) -> Self {
        Self {
            codec: CodecTag::ImaAdpcm,
            sample_rate,
            bits_per_sample: 4,
            block_align,
            samples_per_block: adpcm_samples_per_block(block_align),
            sample_frames: None,
        }
    }

    pub fn with_sample_frames(self, frames: u32) -> Self {
        Self {
            sample_frames: Some(frames),
            ..self
        }
    }

    /// Samples a payload of `payload_len` bytes can hold.
    pub fn capacity(&self, payload_len: usize) -> usize {
        payload_len / self.block_align.max(1) as usize * self.samples_per_block as usize
    }

    fn byte_rate(&self) -> u32 {
        match self.codec {
            CodecTag::Pcm16 => self.sample_rate * 2,
            CodecTag::ImaAdpcm => {
                let blocks_per_sec =
                    self.sample_rate as u64 * self.block_align as u64 / self.samples_per_block.max(1) as u64;
                blocks_per_sec as u32
            }
        }
    }

    /// Checks the internal consistency rules and, when given, the payload length.
    pub fn validate(&self, payload_len: Option<usize>) -> Result<(), CodecError> {
        let fail = |msg: String| Err(CodecError::InconsistentDescriptor(msg));
        if self.sample_rate == 0 {
            return fail("sample rate must be positive".into());
        }
        if self.bits_per_sample != self.codec.bits_per_sample() {
            return fail(format!(
                "{:?} requires {} bits per sample, got {}",
                self.codec,
                self.codec.bits_per_sample(),
                self.bits_per_sample
            ));
        }
        match self.codec {
            CodecTag::Pcm16 => {
                if self.block_align != 2 || self.samples_per_block != 1 {
                    return fail("PCM16 mono uses block_align 2, one sample per block".into());
                }
                if let Some(len) = payload_len {
                    if len % 2 != 0 {
                        return fail(format!("PCM16 payload of {len} bytes is not whole samples"));
                    }
                }
            }
            CodecTag::ImaAdpcm => {
                if (self.block_align as usize) <= BLOCK_HEADER_LEN {
                    return fail(format!(
                        "ADPCM block_align {} leaves no room for data",
                        self.block_align
                    ));
                }
                if self.samples_per_block != adpcm_samples_per_block(self.block_align) {
                    return fail(format!(
                        "ADPCM block_align {} implies {} samples per block, descriptor says {}",
                        self.block_align,
                        adpcm_samples_per_block(self.block_align),
                        self.samples_per_block
                    ));
                }
                if let Some(len) = payload_len {
                    if len % self.block_align as usize != 0 {
                        return fail(format!(
                            "ADPCM payload of {len} bytes is not a multiple of block_align {}",
                            self.block_align
                        ));
                    }
                }
            }
        }
        if let (Some(frames), Some(len)) = (self.sample_frames, payload_len) {
            if frames as usize > self.capacity(len) {
                return fail(format!(
                    "fact chunk claims {frames} samples, payload holds {}",
                    self.capacity(len)
                ));
            }
        }
        Ok(())
    }
}

/// Mono IMA-ADPCM: the header sample plus two samples per remaining byte.
pub fn adpcm_samples_per_block(block_align: u16) -> u16 {
    (block_align.saturating_sub(BLOCK_HEADER_LEN as u16)) * 2 + 1
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], CodecError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                CodecError::TruncatedData(format!(
                    "{what}: need {n} bytes at offset {}, file has {}",
                    self.pos,
                    self.bytes.len()
                ))
            })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Parses a mono PCM16 or IMA-ADPCM WAV file into its format and raw data payload.
pub fn parse_wav(bytes: &[u8]) -> Result<(WavFormatDescriptor, Vec<u8>), CodecError> {
    let mut reader = Reader { bytes, pos: 0 };
    let header = reader
        .take(12, "RIFF header")
        .map_err(|_| CodecError::MalformedRiff(format!("RIFF header: file is only {} bytes", bytes.len())))?;
    if &header[0..4] != b"RIFF" {
        return Err(CodecError::MalformedRiff(format!(
            "RIFF header: bad magic {:?}",
            String::from_utf8_lossy(&header[0..4])
        )));
    }
    if &header[8..12] != b"WAVE" {
        return Err(CodecError::MalformedRiff(format!(
            "RIFF header: form type {:?} is not WAVE",
            String::from_utf8_lossy(&header[8..12])
        )));
    }
    let riff_len = u32_at(header, 4) as usize;
    if riff_len < 4 {
        return Err(CodecError::MalformedRiff(format!(
            "RIFF header: chunk size {riff_len} too small"
        )));
    }

    let mut format: Option<WavFormatDescriptor> = None;
    let mut frames = None;
    let mut payload = None;
    while reader.remaining() >= 8 && payload.is_none() {
        let chunk_header = reader.take(8, "chunk header")?;
        let id: [u8; 4] = chunk_header[0..4].try_into().expect("4-byte id");
        let len = u32_at(chunk_header, 4) as usize;
        let name = String::from_utf8_lossy(&id).into_owned();
        match &id {
            b"fmt " => {
                let body = reader.take(len, "fmt chunk")?;
                format = Some(parse_fmt(body)?);
            }
            b"fact" => {
                let body = reader.take(len, "fact chunk")?;
                if body.len() < 4 {
                    return Err(CodecError::MalformedRiff(format!(
                        "fact chunk: {} bytes, need 4",
                        body.len()
                    )));
                }
                frames = Some(u32_at(body, 0));
            }
            b"data" => {
                if format.is_none() {
                    return Err(CodecError::MalformedRiff("data chunk: appears before fmt chunk".into()));
                }
                payload = Some(reader.take(len, "data chunk")?.to_vec());
            }
            _ => {
                reader
                    .take(len, &format!("{name} chunk"))
                    .map_err(|_| CodecError::MalformedRiff(format!("{name} chunk: size {len} overruns file")))?;
            }
        }
        // Chunks are word-aligned; tolerate a missing pad byte at end of file.
        if len % 2 == 1 && reader.remaining() > 0 {
            reader.pos += 1;
        }
    }

    let mut format = format.ok_or_else(|| CodecError::MalformedRiff("fmt chunk: missing".into()))?;
    let payload = payload.ok_or_else(|| CodecError::MalformedRiff("data chunk: missing".into()))?;
    format.sample_frames = frames;
    if let Some(frames) = frames {
        if frames as usize > format.capacity(payload.len()) {
            return Err(CodecError::MalformedRiff(format!(
                "fact chunk: {frames} samples but data chunk holds {}",
                format.capacity(payload.len())
            )));
        }
    }
    Ok((format, payload))
}

fn parse_fmt(body: &[u8]) -> Result<WavFormatDescriptor, CodecError> {
    if body.len() < 16 {
        return Err(CodecError::MalformedRiff(format!(
            "fmt chunk: {} bytes, need at least 16",
            body.len()
        )));
    }
    let tag = u16_at(body, 0);
    let channels = u16_at(body, 2);
    let sample_rate = u32_at(body, 4);
    let block_align = u16_at(body, 12);
    let bits = u16_at(body, 14);

    if channels != 1 {
        return Err(CodecError::UnsupportedFormat(format!(
            "fmt chunk: {channels} channels, only mono is supported"
        )));
    }
    if sample_rate == 0 {
        return Err(CodecError::MalformedRiff("fmt chunk: sample rate 0".into()));
    }
    match tag {
        FORMAT_PCM => {
            if bits != 16 {
                return Err(CodecError::UnsupportedFormat(format!(
                    "fmt chunk: PCM with {bits} bits per sample"
                )));
            }
            if block_align != 2 {
                return Err(CodecError::MalformedRiff(format!(
                    "fmt chunk: PCM16 mono block_align {block_align}"
                )));
            }
            Ok(WavFormatDescriptor::pcm16(sample_rate))
        }
        FORMAT_IMA_ADPCM => {
            if bits != 4 {
                return Err(CodecError::UnsupportedFormat(format!(
                    "fmt chunk: IMA-ADPCM with {bits} bits per sample"
                )));
            }
            let descriptor = WavFormatDescriptor::ima_adpcm(sample_rate, block_align);
            if body.len() >= 20 {
                let declared = u16_at(body, 18);
                if declared != descriptor.samples_per_block {
                    return Err(CodecError::MalformedRiff(format!(
                        "fmt chunk: samples_per_block {declared} inconsistent with block_align {block_align}"
                    )));
                }
            }
            descriptor
                .validate(None)
                .map_err(|e| CodecError::MalformedRiff(format!("fmt chunk: {e}")))?;
            Ok(descriptor)
        }
        other => Err(CodecError::UnsupportedFormat(format!(
            "fmt chunk: codec tag {other:#06x}"
        ))),
    }
}

/// Writes a canonical WAV file: RIFF header, `fmt `, `fact` when the sample
/// count is set, `data`.
pub fn write_wav(descriptor: &WavFormatDescriptor, payload: &[u8]) -> Result<Vec<u8>, CodecError> {
    descriptor.validate(Some(payload.len()))?;
    let mut fmt = Vec::with_capacity(20);
    fmt.extend_from_slice(&descriptor.codec.format_tag().to_le_bytes());
    fmt.extend_from_slice(&1u16.to_le_bytes());
    fmt.extend_from_slice(&descriptor.sample_rate.to_le_bytes());
    fmt.extend_from_slice(&descriptor.byte_rate().to_le_bytes());
    fmt.extend_from_slice(&descriptor.block_align.to_le_bytes());
    fmt.extend_from_slice(&descriptor.bits_per_sample.to_le_bytes());
    if descriptor.codec == CodecTag::ImaAdpcm {
        fmt.extend_from_slice(&2u16.to_le_bytes());
        fmt.extend_from_slice(&descriptor.samples_per_block.to_le_bytes());
    }

    let data_len =
        u32::try_from(payload.len()).map_err(|_| CodecError::InconsistentDescriptor("payload exceeds 4 GiB".into()))?;
    let pad = payload.len() % 2;
    let fact_len = if descriptor.sample_frames.is_some() { 12 } else { 0 };
    let riff_len = 4 + (8 + fmt.len()) + fact_len + (8 + payload.len() + pad);
    let mut out = Vec::with_capacity(8 + riff_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(riff_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&(fmt.len() as u32).to_le_bytes());
    out.extend_from_slice(&fmt);
    if let Some(frames) = descriptor.sample_frames {
        out.extend_from_slice(b"fact");
        out.extend_from_slice(&4u32.to_le_bytes());
        out.extend_from_slice(&frames.to_le_bytes());
    }
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    out.extend_from_slice(payload);
    if pad == 1 {
        out.push(0);
    }
    Ok(out)
}

pub fn pcm16_payload(samples: &[i16]) -> Vec<u8> {
    samples.iter().flat_map(|s| s.to_le_bytes()).collect()
}

pub fn samples_from_pcm16(payload: &[u8]) -> Vec<i16> {
    payload
        .chunks_exact(2)
        .map(|pair| i16::from_le_bytes([pair[0], pair[1]]))
        .collect()
}
