// Cut a session into phonemes and write each one as its own WAV.

use std::error::Error;

use markerseg::segmenter::{export_segments, KindFilter};
use markerseg::synthgen::{generate_recording, RecordingScript};
use markerseg::{detect_markers, segment_stream, DetectionParams, SegmentKind, SilenceParams};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (stream, truth) = generate_recording(&RecordingScript {
        phoneme_count: 4,
        seed: 3,
        pause_rate: 0.5,
        ..Default::default()
    })?;
    let params = DetectionParams::default();
    let markers = detect_markers(&stream.samples, &params).positions;
    let seg = segment_stream(&stream.samples, &markers, params.tr, &SilenceParams::default())?;
    for s in &seg.segments {
        println!("{:>8} {:>7}..{:<7}", s.kind.as_str(), s.start, s.end);
    }
    println!("pauses inside phonemes: {}", truth.anomalies.len());

    let dir = std::env::temp_dir().join(format!("markerseg-split-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let files = export_segments(
        &stream,
        &seg.segments,
        KindFilter::Only(SegmentKind::Phoneme),
        &dir,
        "phoneme_{n}.wav",
    )?;
    println!("wrote {} files to {}", files.len(), dir.display());
    assert_eq!(files.len(), 4);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
