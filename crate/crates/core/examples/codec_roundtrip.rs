// Encode a tone to IMA-ADPCM, write it as a WAV, read it back and measure the loss.

use std::error::Error;

use markerseg::codec::{parse_wav, snr_db, AudioStream, CodecTag};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let rate = 16_000;
    let tone: Vec<i16> = (0..rate)
        .map(|i| (0.6 * 32767.0 * (std::f64::consts::TAU * 300.0 * i as f64 / rate as f64).sin()) as i16)
        .collect();
    let stream = AudioStream::new(tone, rate as u32);

    let pcm = stream.to_pcm16_wav();
    let adpcm = stream.to_adpcm_wav(256)?;
    let (format, payload) = parse_wav(&adpcm)?;
    assert_eq!(format.codec, CodecTag::ImaAdpcm);
    println!(
        "{} samples: PCM16 {} bytes, IMA-ADPCM {} bytes ({} per block, {} blocks)",
        stream.len(),
        pcm.len(),
        adpcm.len(),
        format.samples_per_block,
        payload.len() / format.block_align as usize
    );

    let back = AudioStream::from_wav_bytes(&adpcm)?;
    assert_eq!(back.len(), stream.len());
    println!("round-trip SNR {:.1} dB", snr_db(&stream.samples, &back.samples)?);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
