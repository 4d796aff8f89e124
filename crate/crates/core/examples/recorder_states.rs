// Walk the recorder through a normal cycle, an early press and a pause.

use std::error::Error;

use markerseg::marker::{simulate, step_state, RecorderEvent, RecorderState};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    use RecorderEvent::*;
    let paths: [(&str, &[RecorderEvent]); 3] = [
        ("normal", &[VcvaTimeout, Press, Settle, Release, Settle]),
        ("early press", &[Press, Settle, Release, Settle]),
        ("pause", &[VcvaTimeout, Press, Settle, Pause, Resume, Release, Settle]),
    ];
    for (name, events) in paths {
        let trace = simulate(RecorderState::S1, events)?;
        let states: Vec<String> = trace.iter().map(|s| format!("{s:?}")).collect();
        println!("{name:>12}: {}", states.join(" -> "));
        assert_eq!(trace.last(), Some(&RecorderState::S1));
    }

    // Releasing before the switch settled is not a legal move.
    let err = step_state(RecorderState::S23, Release).unwrap_err();
    println!("rejected: {err}");
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
