//! IMA-ADPCM 4-bit codec (mono).
//!
//! Each block starts with a 4-byte header: little-endian predictor (the first
//! output sample), step index, one reserved byte. Nibbles follow, two per byte,
//! low nibble first.

use super::CodecError;

#[rustfmt::skip]
pub const INDEX_TABLE: [i8; 16] = [
    -1, -1, -1, -1, 2, 4, 6, 8,
    -1, -1, -1, -1, 2, 4, 6, 8,
];

#[rustfmt::skip]
pub const STEP_TABLE: [i32; 89] = [
    7, 8, 9, 10, 11, 12, 13, 14, 16, 17,
    19, 21, 23, 25, 28, 31, 34, 37, 41, 45,
    50, 55, 60, 66, 73, 80, 88, 97, 107, 118,
    130, 143, 157, 173, 190, 209, 230, 253, 279, 307,
    337, 371, 408, 449, 494, 544, 598, 658, 724, 796,
    876, 963, 1060, 1166, 1282, 1411, 1552, 1707, 1878, 2066,
    2272, 2499, 2749, 3024, 3327, 3660, 4026, 4428, 4871, 5358,
    5894, 6484, 7132, 7845, 8630, 9493, 10442, 11487, 12635, 13899,
    15289, 16818, 18500, 20350, 22385, 24623, 27086, 29794, 32767,
];

pub const MAX_STEP_INDEX: u8 = 88;
pub const BLOCK_HEADER_LEN: usize = 4;

/// One IMA-ADPCM block: the header state plus the 4-bit codes that follow it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdpcmBlock {
    predictor: i16,
    step_index: u8,
    nibbles: Vec<u8>,
}

impl AdpcmBlock {
    pub fn new(predictor: i16, step_index: u8, nibbles: Vec<u8>) -> Result<Self, CodecError> {
        if step_index > MAX_STEP_INDEX {
            return Err(CodecError::InvalidBlock(format!(
                "step index {step_index} outside [0, {MAX_STEP_INDEX}]"
            )));
        }
        if let Some(bad) = nibbles.iter().find(|&&n| n > 0x0f) {
            return Err(CodecError::InvalidBlock(format!("nibble value {bad} exceeds 15")));
        }
        Ok(Self {
            predictor,
            step_index,
            nibbles,
        })
    }

    pub fn predictor(&self) -> i16 {
        self.predictor
    }

    pub fn step_index(&self) -> u8 {
        self.step_index
    }

    pub fn nibbles(&self) -> &[u8] {
        &self.nibbles
    }

    /// Number of PCM samples this block decodes to (header sample included).
    pub fn sample_count(&self) -> usize {
        1 + self.nibbles.len()
    }

    /// Serialized size: header plus nibbles rounded up to whole bytes.
    pub fn byte_len(&self) -> usize {
        BLOCK_HEADER_LEN + self.nibbles.len().div_ceil(2)
    }

    /// Appends the block's wire form to `out`. An odd trailing nibble is paired with a zero.
    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.predictor.to_le_bytes());
        out.push(self.step_index);
        out.push(0);
        for pair in self.nibbles.chunks(2) {
            let lo = pair[0];
            let hi = pair.get(1).copied().unwrap_or(0);
            out.push(lo | (hi << 4));
        }
    }

    /// Parses one block from its wire form. Every payload byte after the header yields two nibbles.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        if bytes.len() < BLOCK_HEADER_LEN {
            return Err(CodecError::TruncatedData(format!(
                "ADPCM block of {} bytes is shorter than its {BLOCK_HEADER_LEN}-byte header",
                bytes.len()
            )));
        }
        let predictor = i16::from_le_bytes([bytes[0], bytes[1]]);
        let nibbles = bytes[BLOCK_HEADER_LEN..]
            .iter()
            .flat_map(|&b| [b & 0x0f, b >> 4])
            .collect();
        Self::new(predictor, bytes[2], nibbles)
    }
}

/// Running decoder state shared by the decoder and the encoder's reconstruction loop.
#[derive(Clone, Copy, Debug)]
struct ImaState {
    predictor: i32,
    step_index: i32,
}

impl ImaState {
    fn step(&self) -> i32 {
        STEP_TABLE[self.step_index as usize]
    }

    /// Value the decoder would produce for `nibble`, without advancing.
    fn reconstruct(&self, nibble: u8) -> i32 {
        let step = self.step();
        let mut diff = step >> 3;
        if nibble & 4 != 0 {
            diff += step;
        }
        if nibble & 2 != 0 {
            diff += step >> 1;
        }
        if nibble & 1 != 0 {
            diff += step >> 2;
        }
        let next = if nibble & 8 != 0 {
            self.predictor - diff
        } else {
            self.predictor + diff
        };
        next.clamp(i16::MIN as i32, i16::MAX as i32)
    }

    fn advance(&mut self, nibble: u8) -> i16 {
        self.predictor = self.reconstruct(nibble);
        self.step_index = (self.step_index + INDEX_TABLE[nibble as usize] as i32).clamp(0, MAX_STEP_INDEX as i32);
        self.predictor as i16
    }
}

/// Decodes a sequence of blocks to 16-bit PCM. Blocks are independent: each one
/// restarts from its own header.
pub fn decode_adpcm(blocks: &[AdpcmBlock]) -> Vec<i16> {
    let total = blocks.iter().map(AdpcmBlock::sample_count).sum();
    let mut out = Vec::with_capacity(total);
    for block in blocks {
        let mut state = ImaState {
            predictor: block.predictor as i32,
            step_index: block.step_index as i32,
        };
        out.push(block.predictor);
        out.extend(block.nibbles.iter().map(|&n| state.advance(n)));
    }
    out
}

/// Greedy encoder: every sample takes the nibble whose reconstruction is nearest
/// to it, given the decoder state so far. The last block may be short.
///
/// The step index carries over from block to block; the first block's index is
/// the smallest whose step covers the opening sample-to-sample difference.
pub fn encode_adpcm(samples: &[i16], samples_per_block: usize) -> Result<Vec<AdpcmBlock>, CodecError> {
    if samples_per_block < 2 {
        return Err(CodecError::InvalidBlockSize(samples_per_block));
    }
    let mut blocks = Vec::with_capacity(samples.len().div_ceil(samples_per_block));
    let mut step_index = match samples {
        [a, b, ..] => initial_step_index((*b as i32 - *a as i32).abs()),
        _ => 0,
    };
    for chunk in samples.chunks(samples_per_block) {
        let mut state = ImaState {
            predictor: chunk[0] as i32,
            step_index,
        };
        let mut nibbles = Vec::with_capacity(chunk.len() - 1);
        for &target in &chunk[1..] {
            let nibble = nearest_nibble(&state, target as i32);
            state.advance(nibble);
            nibbles.push(nibble);
        }
        blocks.push(AdpcmBlock {
            predictor: chunk[0],
            step_index: step_index as u8,
            nibbles,
        });
        step_index = state.step_index;
    }
    Ok(blocks)
}

fn initial_step_index(first_diff: i32) -> i32 {
    STEP_TABLE
        .iter()
        .position(|&step| step >= first_diff)
        .unwrap_or(MAX_STEP_INDEX as usize) as i32
}

fn nearest_nibble(state: &ImaState, target: i32) -> u8 {
    // Ties go to the lower code, which also keeps the step from growing.
    (0u8..16)
        .min_by_key(|&n| ((state.reconstruct(n) - target).abs(), n & 7, n))
        .unwrap_or(0)
}

/// Splits a raw data payload into blocks of `block_align` bytes. A trailing partial
/// block is decoded as far as it goes, provided it still holds a full header.
pub fn blocks_from_payload(payload: &[u8], block_align: usize) -> Result<Vec<AdpcmBlock>, CodecError> {
    if block_align <= BLOCK_HEADER_LEN {
        return Err(CodecError::InvalidBlockSize(block_align));
    }
    payload.chunks(block_align).map(AdpcmBlock::from_bytes).collect()
}

/// Serializes blocks into a payload whose length is a multiple of `block_align`.
/// Short blocks are padded with zero nibbles.
pub fn payload_from_blocks(blocks: &[AdpcmBlock], block_align: usize) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::with_capacity(blocks.len() * block_align);
    for block in blocks {
        if block.byte_len() > block_align {
            return Err(CodecError::InvalidBlockSize(block_align));
        }
        let start = out.len();
        block.write_bytes(&mut out);
        out.resize(start + block_align, 0);
    }
    Ok(out)
}
