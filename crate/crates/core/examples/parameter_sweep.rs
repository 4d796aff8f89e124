// Try a small grid of detector settings on a synthetic corpus.

use std::error::Error;

use markerseg::analysis::{parameter_sweep, precision_by_window, SweepGrid};
use markerseg::synthgen::{generate_corpus, RecordingScript};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let script = RecordingScript {
        phoneme_count: 20,
        seed: 11,
        marker_noise: 0.05,
        ..Default::default()
    };
    let corpus = generate_corpus(&script, 3)?;
    let grid = SweepGrid {
        threshold_a: vec![20_000, 27_000],
        window_t: vec![5, 50, 200],
        percent_p: vec![75],
        skip_tr: vec![350],
    };
    let rows = parameter_sweep(&grid, &corpus, 5)?;
    println!("    a   t   p   tr  recall precision      ops");
    for r in &rows {
        println!(
            "{:>5} {:>3} {:>3} {:>4} {:>7.3} {:>9.3} {:>8}",
            r.threshold_a, r.window_t, r.percent_p, r.skip_tr, r.recall, r.precision, r.op_count
        );
    }
    for (t, precision) in precision_by_window(&rows) {
        println!("t={t:>3}: mean precision {precision:.3}");
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
