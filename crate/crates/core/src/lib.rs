//! Phoneme extraction from switch-marked speech recordings.
//!
//! Recordings are 16 kHz mono WAV files, PCM16 or IMA-ADPCM. A hardware switch
//! leaves a short step-response transient (a *marker*) in the audio each time
//! it is pressed or released, so every utterance is bracketed by a marker pair
//! and consecutive utterances are separated by marker, silence, marker.
//!
//! * [`codec`] reads and writes the WAV container and the IMA-ADPCM codec.
//! * [`marker`] models the transient and the recorder's state graph.
//! * [`adm`] is the marker detector, instrumented with exact operation counts.
//! * [`segmenter`] turns marker positions into phoneme/silence/marker segments.
//! * [`synthgen`] renders synthetic recordings with ground truth.
//! * [`analysis`] checks the detector's cost model and sweeps its parameters.
//! * [`commands`] is the batch pipeline used by the `markerseg` binary.
//!
//! ```
//! use markerseg::adm::{detect_markers, DetectionParams};
//! use markerseg::synthgen::{generate_recording, RecordingScript};
//!
//! let (stream, truth) = generate_recording(&RecordingScript::default()).unwrap();
//! let found = detect_markers(&stream.samples, &DetectionParams::default());
//! assert_eq!(found.positions, truth.marker_positions);
//! ```

pub mod adm;
pub mod analysis;
pub mod codec;
pub mod commands;
pub mod marker;
pub mod segmenter;
pub mod synthgen;

pub use adm::{detect_markers, DetectionParams, DetectionResult};
pub use codec::AudioStream;
pub use segmenter::{segment_stream, Segment, SegmentKind, SilenceParams};
