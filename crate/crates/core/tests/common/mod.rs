//! Reference implementations for the integration tests. Nothing here calls
//! into the library; each function is written straight from the definitions.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a brute-force scan reports.
#[derive(Debug, PartialEq, Eq)]
pub struct Scan {
    pub positions: Vec<usize>,
    pub candidates: usize,
    pub ops: u64,
}

/// Scans every start index in order. A start whose sample magnitude exceeds
/// `a` is a candidate; a candidate window of `t` samples is a marker when at
/// least `p` percent of it is above `a` and its signs flip at most once.
/// After a marker the scan jumps `tr` further than the usual single step.
pub fn brute_force_detect(x: &[i16], a: u32, t: usize, p: u32, tr: usize) -> Scan {
    let mut positions = Vec::new();
    let mut candidates = 0;
    let mut ops = 0u64;
    if x.len() < t {
        return Scan {
            positions,
            candidates,
            ops,
        };
    }
    let last = x.len() - t;
    let mut i = 0;
    loop {
        if i > last {
            break;
        }
        ops += 1;
        let magnitude = (x[i] as i32).unsigned_abs();
        if magnitude > a {
            candidates += 1;
            ops += t as u64;
            let window = &x[i..i + t];
            let loud = window.iter().filter(|v| (**v as i32).unsigned_abs() > a).count();
            let nonzero: Vec<bool> = window.iter().filter(|v| **v != 0).map(|v| *v > 0).collect();
            let flips = nonzero.windows(2).filter(|w| w[0] != w[1]).count();
            if loud * 100 >= p as usize * t && flips <= 1 {
                positions.push(i);
                i += tr;
            }
        }
        i += 1;
    }
    Scan {
        positions,
        candidates,
        ops,
    }
}

pub const IMA_STEPS: [i32; 89] = [
    7, 8, 9, 10, 11, 12, 13, 14, 16, 17, 19, 21, 23, 25, 28, 31, 34, 37, 41, 45, 50, 55, 60, 66, 73, 80, 88, 97, 107,
    118, 130, 143, 157, 173, 190, 209, 230, 253, 279, 307, 337, 371, 408, 449, 494, 544, 598, 658, 724, 796, 876, 963,
    1060, 1166, 1282, 1411, 1552, 1707, 1878, 2066, 2272, 2499, 2749, 3024, 3327, 3660, 4026, 4428, 4871, 5358, 5894,
    6484, 7132, 7845, 8630, 9493, 10442, 11487, 12635, 13899, 15289, 16818, 18500, 20350, 22385, 24623, 27086, 29794,
    32767,
];

pub const IMA_INDEX_ADJUST: [i32; 8] = [-1, -1, -1, -1, 2, 4, 6, 8];

/// Decodes one IMA block given its header fields and nibbles. Returns the
/// samples and, for each one, the step size that produced it (0 for the header sample).
pub fn straight_line_decode(predictor: i16, step_index: u8, nibbles: &[u8]) -> (Vec<i16>, Vec<i32>) {
    let mut sample = predictor as i32;
    let mut index = step_index as i32;
    let mut out = vec![predictor];
    let mut steps = vec![0];
    for &n in nibbles {
        let step = IMA_STEPS[index as usize];
        let mut diff = step / 8;
        if n & 4 != 0 {
            diff += step;
        }
        if n & 2 != 0 {
            diff += step / 2;
        }
        if n & 1 != 0 {
            diff += step / 4;
        }
        if n & 8 != 0 {
            sample -= diff;
        } else {
            sample += diff;
        }
        sample = sample.clamp(-32768, 32767);
        index = (index + IMA_INDEX_ADJUST[(n & 7) as usize]).clamp(0, 88);
        out.push(sample as i16);
        steps.push(step);
    }
    (out, steps)
}

/// Reads an IMA WAV data payload block by block with the oracle decoder.
pub fn decode_payload(payload: &[u8], block_align: usize) -> Vec<i16> {
    let mut out = Vec::new();
    for block in payload.chunks(block_align) {
        let predictor = i16::from_le_bytes([block[0], block[1]]);
        let nibbles: Vec<u8> = block[4..].iter().flat_map(|b| [b & 0x0f, b >> 4]).collect();
        out.extend(straight_line_decode(predictor, block[2], &nibbles).0);
    }
    out
}

pub fn sine(freq: f64, amplitude: f64, len: usize, rate: f64) -> Vec<i16> {
    (0..len)
        .map(|i| (amplitude * 32767.0 * (std::f64::consts::TAU * freq * i as f64 / rate).sin()).round() as i16)
        .collect()
}

pub fn snr(reference: &[i16], test: &[i16]) -> f64 {
    let signal: f64 = reference.iter().map(|&v| (v as f64).powi(2)).sum();
    let noise: f64 = reference
        .iter()
        .zip(test)
        .map(|(&r, &t)| (r as f64 - t as f64).powi(2))
        .sum();
    10.0 * (signal / noise).log10()
}

/// A marker-like burst written from scratch: `first` samples near `+hi`, then
/// `second` samples near `-lo`, then a linear fade.
pub fn crude_marker(rng: &mut ChaCha8Rng, hi: i16, lo: i16, first: usize, second: usize, fade: usize) -> Vec<i16> {
    let mut v = Vec::with_capacity(first + second + fade);
    let jitter = |rng: &mut ChaCha8Rng, base: i16| {
        let spread = (base as i32 / 20).max(1);
        (base as i32 + rng.gen_range(-spread..=spread)).clamp(-32768, 32767) as i16
    };
    for _ in 0..first {
        v.push(jitter(rng, hi));
    }
    for _ in 0..second {
        v.push(jitter(rng, -lo));
    }
    for k in 0..fade {
        v.push((-(lo as f64) * (1.0 - (k + 1) as f64 / fade as f64)) as i16);
    }
    v
}

/// Random stream mixing noise, loud bursts, alternating spikes and marker-like
/// transients, so that candidates are both accepted and rejected.
pub fn random_stream(seed: u64, max_len: usize) -> Vec<i16> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = rng.gen_range(0..=max_len);
    let mut x = Vec::with_capacity(len);
    while x.len() < len {
        match rng.gen_range(0..6) {
            0 | 1 => {
                let n = rng.gen_range(1..3_000);
                let floor = rng.gen_range(0..2_000i16);
                x.extend((0..n).map(|_| rng.gen_range(-floor..=floor)));
            }
            2 => {
                let (hi, lo) = (rng.gen_range(25_000..=32_767), rng.gen_range(20_000..=32_767));
                let (f, s) = (rng.gen_range(10..80), rng.gen_range(10..80));
                let fade = rng.gen_range(0..200);
                let mut m = crude_marker(&mut rng, hi, lo, f, s, fade);
                if rng.gen_bool(0.5) {
                    m.iter_mut().for_each(|v| *v = v.saturating_neg());
                }
                x.extend(m);
            }
            3 => {
                let n = rng.gen_range(1..200);
                x.extend((0..n).map(|k| if k % 2 == 0 { 30_000 } else { -30_000 }));
            }
            4 => {
                let n = rng.gen_range(1..400);
                x.extend((0..n).map(|_| rng.gen_range(i16::MIN..=i16::MAX)));
            }
            _ => {
                let n = rng.gen_range(1..120);
                let level = rng.gen_range(26_000..=32_767i16);
                x.extend((0..n).map(|k| if k % 7 == 3 { 0 } else { level }));
            }
        }
    }
    x.truncate(len);
    x
}
