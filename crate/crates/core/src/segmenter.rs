//! Splitting a recording into phoneme, silence and marker segments.
//!
//! Phonemes are delimited by marker pairs: an opening marker (switch pressed),
//! the utterance, a closing marker (switch released). Consecutive phonemes are
//! separated by marker, silence, marker. Each marker occupies `marker_len`
//! samples from its detected start; the gaps between markers are labeled as
//! follows.
//!
//! * A gap holding a silence run of at least `min_len` samples is silence, and
//!   the marker after it opens a phoneme.
//! * Otherwise a gap after an opening marker is a phoneme, however many short
//!   pauses it contains.
//! * Otherwise a gap after a closing marker is silence (the switch was pressed
//!   again before voice activation paused the recorder).
//!
//! The region before the first marker is silence if it is entirely quiet or
//! holds a long silence run; otherwise the recording started mid-phoneme and
//! the first marker closes it. The region after the last marker follows the gap
//! rules; a phoneme left open at the end of the stream produces a warning.
//!
//! Nothing here tells the child's voice from the therapist's. The switch
//! wiring keeps the therapist out of the recording.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{AudioStream, CodecError};
use crate::marker::FULL_SCALE;

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("markers at {first} and {second} are closer than marker_len {marker_len}")]
    MarkerOverlap {
        first: usize,
        second: usize,
        marker_len: usize,
    },
    #[error("marker at {position} lies outside the {len}-sample stream")]
    MarkerOutOfRange { position: usize, len: usize },
    #[error("invalid segmentation parameters: {0}")]
    InvalidParams(String),
    #[error("segment [{start}, {end}) is invalid for a {len}-sample stream")]
    InvalidSegment { start: usize, end: usize, len: usize },
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Phoneme,
    Silence,
    Marker,
}

impl SegmentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SegmentKind::Phoneme => "phoneme",
            SegmentKind::Silence => "silence",
            SegmentKind::Marker => "marker",
        }
    }
}

/// Half-open sample range `[start, end)` with its label and its ordinal among
/// segments of the same kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub kind: SegmentKind,
    pub index: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Silence detection: samples with magnitude at or below `max_abs` are quiet,
/// and a quiet run of `min_len` samples is a silence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SilenceParams {
    pub max_abs: u16,
    pub min_len: usize,
}

impl Default for SilenceParams {
    fn default() -> Self {
        Self {
            // Same 5% band the marker tail settles into.
            max_abs: (0.05 * FULL_SCALE) as u16,
            // One second at 16 kHz.
            min_len: 16_000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    pub segments: Vec<Segment>,
    pub warnings: Vec<String>,
}

impl Segmentation {
    pub fn of_kind(&self, kind: SegmentKind) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(move |s| s.kind == kind)
    }

    pub fn phoneme_count(&self) -> usize {
        self.of_kind(SegmentKind::Phoneme).count()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Opening,
    Closing,
}

/// Labels the whole stream given marker start positions (ascending).
pub fn segment_stream(
    samples: &[i16],
    markers: &[usize],
    marker_len: usize,
    silence: &SilenceParams,
) -> Result<Segmentation, SegmentError> {
    if marker_len == 0 {
        return Err(SegmentError::InvalidParams("marker_len must be at least 1".into()));
    }
    if silence.min_len == 0 {
        return Err(SegmentError::InvalidParams("silence min_len must be at least 1".into()));
    }
    let len = samples.len();
    for pair in markers.windows(2) {
        if pair[1] < pair[0] + marker_len {
            return Err(SegmentError::MarkerOverlap {
                first: pair[0],
                second: pair[1],
                marker_len,
            });
        }
    }
    if let Some(&position) = markers.iter().find(|&&m| m >= len) {
        return Err(SegmentError::MarkerOutOfRange { position, len });
    }

    let mut builder = Builder::default();
    let has_long_silence =
        |start: usize, end: usize| longest_quiet_run(&samples[start..end], silence.max_abs) >= silence.min_len;

    let Some(&first) = markers.first() else {
        builder.push(
            0,
            len,
            SegmentKind::Silence.or_phoneme(is_quiet_region(samples, silence)),
        );
        return Ok(builder.finish());
    };

    let leading_quiet = is_quiet_region(&samples[..first], silence);
    builder.push(0, first, SegmentKind::Silence.or_phoneme(leading_quiet));
    let mut role = if leading_quiet { Role::Opening } else { Role::Closing };

    for (k, &start) in markers.iter().enumerate() {
        let marker_end = (start + marker_len).min(len);
        builder.push(start, marker_end, SegmentKind::Marker);
        let gap_end = markers.get(k + 1).copied().unwrap_or(len);
        let is_last = k + 1 == markers.len();

        let gap_kind = if has_long_silence(marker_end, gap_end) {
            role = Role::Opening;
            SegmentKind::Silence
        } else if role == Role::Opening {
            role = Role::Closing;
            if is_last && marker_end < gap_end {
                builder.warnings.push(format!(
                    "recording ends inside a phoneme opened by the marker at {start} (odd marker count)"
                ));
            }
            SegmentKind::Phoneme
        } else {
            role = Role::Opening;
            SegmentKind::Silence
        };
        builder.push(marker_end, gap_end, gap_kind);
    }
    Ok(builder.finish())
}

impl SegmentKind {
    fn or_phoneme(self, quiet: bool) -> SegmentKind {
        if quiet {
            self
        } else {
            SegmentKind::Phoneme
        }
    }
}

fn is_quiet_region(samples: &[i16], silence: &SilenceParams) -> bool {
    samples.iter().all(|s| s.unsigned_abs() <= silence.max_abs)
        || longest_quiet_run(samples, silence.max_abs) >= silence.min_len
}

fn longest_quiet_run(samples: &[i16], max_abs: u16) -> usize {
    let mut best = 0;
    let mut run = 0;
    for s in samples {
        if s.unsigned_abs() <= max_abs {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

#[derive(Default)]
struct Builder {
    segments: Vec<Segment>,
    counts: [usize; 3],
    warnings: Vec<String>,
}

impl Builder {
    fn push(&mut self, start: usize, end: usize, kind: SegmentKind) {
        if start >= end {
            return;
        }
        let slot = &mut self.counts[kind as usize];
        self.segments.push(Segment {
            start,
            end,
            kind,
            index: *slot,
        });
        *slot += 1;
    }

    fn finish(self) -> Segmentation {
        Segmentation {
            segments: self.segments,
            warnings: self.warnings,
        }
    }
}

/// Which segment kinds [`export_segments`] writes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindFilter {
    Only(SegmentKind),
    All,
}

impl KindFilter {
    fn accepts(self, kind: SegmentKind) -> bool {
        match self {
            KindFilter::Only(k) => k == kind,
            KindFilter::All => true,
        }
    }
}

/// Expands `{n}` (ordinal within kind) and `{kind}` in a file name pattern.
pub fn render_name(pattern: &str, segment: &Segment) -> String {
    pattern
        .replace("{n}", &segment.index.to_string())
        .replace("{kind}", segment.kind.as_str())
}

/// Writes each selected segment to `dir` as a PCM16 WAV at the stream's rate.
/// Returns the written paths in segment order.
pub fn export_segments(
    stream: &AudioStream,
    segments: &[Segment],
    filter: KindFilter,
    dir: impl AsRef<Path>,
    pattern: &str,
) -> Result<Vec<PathBuf>, SegmentError> {
    let dir = dir.as_ref();
    let selected: Vec<&Segment> = segments.iter().filter(|s| filter.accepts(s.kind)).collect();
    for s in &selected {
        if s.start >= s.end || s.end > stream.len() {
            return Err(SegmentError::InvalidSegment {
                start: s.start,
                end: s.end,
                len: stream.len(),
            });
        }
    }
    if selected.is_empty() {
        return Ok(Vec::new());
    }
    std::fs::create_dir_all(dir).map_err(|source| SegmentError::IoFailure {
        path: dir.display().to_string(),
        source,
    })?;

    let mut written = Vec::with_capacity(selected.len());
    for segment in selected {
        let path = dir.join(render_name(pattern, segment));
        let bytes = stream.slice(segment.start, segment.end).to_pcm16_wav();
        std::fs::write(&path, bytes).map_err(|source| SegmentError::IoFailure {
            path: path.display().to_string(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}
