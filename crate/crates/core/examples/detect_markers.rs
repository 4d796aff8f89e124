// Generate a recording session and score the detector against its ground truth.

use std::error::Error;

use markerseg::synthgen::{evaluate_detection, generate_recording, RecordingScript};
use markerseg::{detect_markers, DetectionParams};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let script = RecordingScript {
        phoneme_count: 12,
        seed: 7,
        ..Default::default()
    };
    let (stream, truth) = generate_recording(&script)?;
    let params = DetectionParams::default();
    let result = detect_markers(&stream.samples, &params);
    let report = evaluate_detection(&truth, &result, 5);

    println!(
        "{:.1} s, {} markers found ({} candidates, {} ops for {} samples)",
        stream.duration_secs(),
        result.positions.len(),
        result.candidates_evaluated,
        result.op_count,
        result.stream_len
    );
    println!(
        "recall {:.3}, precision {:.3}, position errors {:?}",
        report.recall, report.precision, report.position_errors
    );
    assert_eq!(report.recall, 1.0);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
