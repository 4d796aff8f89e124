// Render the switch transient and see how it sits against the detector threshold.

use std::error::Error;

use markerseg::adm::{is_marker_window, DetectionParams};
use markerseg::marker::{default_template, synthesize_marker};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let params = DetectionParams::default();
    for (label, template) in [
        ("measured", default_template()),
        ("x1.1", default_template().scaled(1.1)),
    ] {
        let marker = synthesize_marker(&template, 0.0, 0)?;
        let loud = marker[..params.t]
            .iter()
            .filter(|s| s.unsigned_abs() as u32 > params.a)
            .count();
        println!(
            "{label:>8}: a1={} a2={} len={} first={} last={} above {} in first {}: {}/{} -> marker: {}",
            template.a1,
            template.a2,
            marker.len(),
            marker[0],
            marker[marker.len() - 1],
            params.a,
            params.t,
            loud,
            params.t,
            is_marker_window(&marker, 0, &params)?
        );
    }

    let jittered = synthesize_marker(&default_template().scaled(1.1), 0.05, 42)?;
    println!("with 5% jitter: {:?}...", &jittered[..6]);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
