use serde::{Deserialize, Serialize};

use super::MarkerError;

/// Recorder states while the therapist operates the switch.
///
/// `S1` idle with the microphone shorted (recorded as silence), `S2` recording
/// paused by voice activation, `S23` the press transient, `S3` live microphone,
/// `S31` the release transient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RecorderState {
    S1,
    S2,
    S23,
    S3,
    S31,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecorderEvent {
    Press,
    Release,
    VcvaTimeout,
    Pause,
    Resume,
    /// The switch transient has died out.
    Settle,
}

impl RecorderState {
    /// States whose samples are a marker transient.
    pub fn is_transient(self) -> bool {
        matches!(self, RecorderState::S23 | RecorderState::S31)
    }

    /// States that leave samples in the file (everything but the paused state).
    pub fn is_recorded(self) -> bool {
        self != RecorderState::S2
    }
}

pub fn step_state(current: RecorderState, event: RecorderEvent) -> Result<RecorderState, MarkerError> {
    use RecorderEvent::*;
    use RecorderState::*;
    match (current, event) {
        (S1, VcvaTimeout) => Ok(S2),
        (S1, Press) | (S2, Press) => Ok(S23),
        (S23, Settle) => Ok(S3),
        (S3, Release) => Ok(S31),
        (S3, Pause) => Ok(S1),
        (S1, Resume) => Ok(S3),
        (S31, Settle) => Ok(S1),
        (state, event) => Err(MarkerError::IllegalTransition { state, event }),
    }
}

/// Runs `events` from `start` and returns every state visited, `start` included.
pub fn simulate(start: RecorderState, events: &[RecorderEvent]) -> Result<Vec<RecorderState>, MarkerError> {
    let mut trace = Vec::with_capacity(events.len() + 1);
    trace.push(start);
    let mut state = start;
    for &event in events {
        state = step_state(state, event)?;
        trace.push(state);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use RecorderEvent::*;
    use RecorderState::*;

    #[test]
    fn press_from_paused_opens_marker() {
        assert_eq!(step_state(S2, Press), Ok(S23));
    }

    #[test]
    fn early_press_skips_pause() {
        assert_eq!(step_state(S1, Press), Ok(S23));
    }

    #[test]
    fn pronunciation_pause_returns_to_idle_without_marker() {
        assert_eq!(step_state(S3, Pause), Ok(S1));
        assert_eq!(simulate(S3, &[Pause, Resume]).unwrap(), vec![S3, S1, S3]);
    }

    #[test]
    fn release_in_idle_is_illegal() {
        assert_eq!(
            step_state(S1, Release),
            Err(MarkerError::IllegalTransition {
                state: S1,
                event: Release
            })
        );
    }

    #[test]
    fn full_cycle() {
        let trace = simulate(S1, &[VcvaTimeout, Press, Settle, Release, Settle]).unwrap();
        assert_eq!(trace, vec![S1, S2, S23, S3, S31, S1]);
    }

    #[test]
    fn transition_table_is_exact() {
        let states = [S1, S2, S23, S3, S31];
        let events = [Press, Release, VcvaTimeout, Pause, Resume, Settle];
        let legal: usize = states
            .iter()
            .flat_map(|&s| events.iter().map(move |&e| step_state(s, e)))
            .filter(Result::is_ok)
            .count();
        assert_eq!(legal, 8);
    }

    fn any_event() -> impl Strategy<Value = RecorderEvent> {
        prop::sample::select(vec![Press, Release, VcvaTimeout, Pause, Resume, Settle])
    }

    proptest! {
        #[test]
        fn release_transient_always_follows_live_state(events in prop::collection::vec(any_event(), 0..60)) {
            let mut state = S1;
            for e in events {
                if let Ok(next) = step_state(state, e) {
                    if next == S31 {
                        prop_assert_eq!(state, S3);
                    }
                    state = next;
                }
            }
        }

        #[test]
        fn round_trips_through_live_state_emit_marker_pairs(events in prop::collection::vec(any_event(), 0..80)) {
            // Track each excursion S1 -> ... -> S3 -> ... -> S1 and check which transients it produced.
            let mut state = S1;
            let mut excursion: Vec<RecorderState> = Vec::new();
            for e in events {
                let Ok(next) = step_state(state, e) else { continue };
                excursion.push(next);
                if next == S1 {
                    let through_live = excursion.contains(&S3);
                    // Either half of the S3-S1-S3 pause path: leaving via Pause or entering via Resume.
                    let paused = excursion.windows(2).any(|w| w == [S3, S1]) || excursion.first() == Some(&S3);
                    if through_live && !paused {
                        let opened = excursion.iter().position(|&s| s == S23);
                        let closed = excursion.iter().rposition(|&s| s == S31);
                        prop_assert!(matches!((opened, closed), (Some(o), Some(c)) if o < c));
                    }
                    excursion.clear();
                }
                state = next;
            }
        }
    }
}
