//! Batch pipeline behind the `markerseg` binary.
//!
//! Every command takes a [`RunConfig`] and explicit paths, writes its data to
//! files, and returns a summary the caller prints. Configuration comes from an
//! optional TOML file; command-line flags are applied on top by the binary.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adm::{detect_markers, AdmError, DetectionParams, DetectionResult};
use crate::analysis::{
    fit_linear_complexity, parameter_sweep, precision_by_window, rejection_stream, verify_best_case, verify_worst_case,
    write_sweep_csv, AnalysisError, ComplexityReport, SweepGrid, SweepRow,
};
use crate::codec::{AudioStream, CodecError, DEFAULT_ADPCM_BLOCK_ALIGN};
use crate::marker::{MarkerError, MarkerTemplate};
use crate::segmenter::{
    export_segments, segment_stream, KindFilter, Segment, SegmentError, SegmentKind, SilenceParams,
};
use crate::synthgen::{evaluate_detection, generate_corpus, DetectionReport, GroundTruth, RecordingScript, SynthError};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Detection(#[from] AdmError),
    #[error(transparent)]
    Marker(#[from] MarkerError),
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Json { path: String, message: String },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

/// Everything a run needs. Unset keys keep the built-in defaults, which are
/// the optimal detector settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub detection: DetectionParams,
    pub silence: SilenceParams,
    pub template: MarkerTemplate,
    pub script: RecordingScript,
    pub sweep: SweepGrid,
    /// Samples attributed to each marker when segmenting; defaults to `skip_tr`.
    pub marker_len: Option<usize>,
    /// Matching tolerance for evaluation, in samples.
    pub tolerance: usize,
    pub sessions: usize,
    pub report_format: ReportFormat,
    pub block_align: u16,
    pub bench_sizes: Vec<usize>,
    /// Input files processed concurrently by `detect`.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            detection: DetectionParams::default(),
            silence: SilenceParams::default(),
            template: MarkerTemplate::default(),
            script: RecordingScript::default(),
            sweep: SweepGrid::default(),
            marker_len: None,
            tolerance: 5,
            sessions: 1,
            report_format: ReportFormat::Csv,
            block_align: DEFAULT_ADPCM_BLOCK_ALIGN,
            bench_sizes: vec![100_000, 200_000, 400_000, 800_000],
            workers: 1,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CommandError> {
        toml::from_str(text).map_err(|e| CommandError::Config(e.to_string()))
    }

    /// Reads `path` if given, otherwise returns the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self, CommandError> {
        match path {
            Some(path) => Self::from_toml(&read_text(path)?),
            None => Ok(Self::default()),
        }
    }

    pub fn marker_len(&self) -> usize {
        self.marker_len.unwrap_or(self.detection.tr)
    }

    /// The generator script with the configured template applied.
    pub fn recording_script(&self) -> RecordingScript {
        RecordingScript {
            template: self.template,
            ..self.script.clone()
        }
    }

    pub fn validate(&self) -> Result<(), CommandError> {
        self.detection.validate()?;
        self.template.validate()?;
        if self.marker_len() == 0 {
            return Err(CommandError::Config("marker_len must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(CommandError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CommandError + '_ {
    move |source| CommandError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn read_text(path: &Path) -> Result<String, CommandError> {
    std::fs::read_to_string(path).map_err(io_error(path))
}

fn write_bytes(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CommandError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_error(parent))?;
    }
    std::fs::write(path, bytes).map_err(io_error(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CommandError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CommandError::Json {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    write_bytes(path, text + "\n")
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CommandError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CommandError::Json {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StreamSummary {
    pub samples: usize,
    pub sample_rate: u32,
    pub duration_secs: f64,
    pub peak: u16,
}

impl StreamSummary {
    fn of(stream: &AudioStream) -> Self {
        Self {
            samples: stream.len(),
            sample_rate: stream.sample_rate,
            duration_secs: stream.duration_secs(),
            peak: stream.peak(),
        }
    }
}

/// Decodes a PCM16 or IMA-ADPCM WAV and writes it back as PCM16.
pub fn decode(input: &Path, output: &Path) -> Result<StreamSummary, CommandError> {
    let stream = AudioStream::read_wav(input)?;
    write_bytes(output, stream.to_pcm16_wav())?;
    Ok(StreamSummary::of(&stream))
}

/// Encodes any supported WAV to IMA-ADPCM with `block_align`-byte blocks.
pub fn encode(input: &Path, output: &Path, block_align: u16) -> Result<StreamSummary, CommandError> {
    let stream = AudioStream::read_wav(input)?;
    write_bytes(output, stream.to_adpcm_wav(block_align)?)?;
    Ok(StreamSummary::of(&stream))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDetection {
    pub input: String,
    pub sample_rate: u32,
    pub params: DetectionParams,
    pub result: DetectionResult,
}

/// Runs the detector on each input, `config.workers` files at a time. Results
/// keep input order. With `output`, all results are written there as one JSON array.
pub fn detect(
    inputs: &[PathBuf],
    config: &RunConfig,
    output: Option<&Path>,
) -> Result<Vec<FileDetection>, CommandError> {
    config.validate()?;
    let run = |path: &PathBuf| -> Result<FileDetection, CommandError> {
        let stream = AudioStream::read_wav(path)?;
        Ok(FileDetection {
            input: path.display().to_string(),
            sample_rate: stream.sample_rate,
            params: config.detection,
            result: detect_markers(&stream.samples, &config.detection),
        })
    };
    let per_worker = inputs.len().div_ceil(config.workers).max(1);
    let results: Vec<Result<FileDetection, CommandError>> = if config.workers == 1 || inputs.len() < 2 {
        inputs.iter().map(run).collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = inputs
                .chunks(per_worker)
                .map(|group| scope.spawn(move || group.iter().map(run).collect::<Vec<_>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("detection worker panicked"))
                .collect()
        })
    };
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = output {
        write_json(path, &results)?;
    }
    Ok(results)
}

/// Everything needed to reproduce a split run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub input: String,
    pub sample_rate: u32,
    pub stream_len: usize,
    pub params: DetectionParams,
    pub silence: SilenceParams,
    pub marker_len: usize,
    pub markers: Vec<usize>,
    pub segments: Vec<Segment>,
    pub phoneme_files: Vec<String>,
    pub warnings: Vec<String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";
pub const PHONEME_PATTERN: &str = "phoneme_{n}.wav";

/// Detects markers, segments the stream, and writes one WAV per phoneme plus
/// `manifest.json` into `out_dir`.
pub fn split(input: &Path, out_dir: &Path, config: &RunConfig) -> Result<SplitManifest, CommandError> {
    config.validate()?;
    let stream = AudioStream::read_wav(input)?;
    let detection = detect_markers(&stream.samples, &config.detection);
    let marker_len = config.marker_len();
    let segmentation = segment_stream(&stream.samples, &detection.positions, marker_len, &config.silence)?;
    std::fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;
    let files = export_segments(
        &stream,
        &segmentation.segments,
        KindFilter::Only(SegmentKind::Phoneme),
        out_dir,
        PHONEME_PATTERN,
    )?;

    let mut warnings = segmentation.warnings.clone();
    if files.is_empty() {
        warnings.push(format!("no phonemes found in {}", input.display()));
    }
    let manifest = SplitManifest {
        input: input.display().to_string(),
        sample_rate: stream.sample_rate,
        stream_len: stream.len(),
        params: config.detection,
        silence: config.silence,
        marker_len,
        markers: detection.positions,
        segments: segmentation.segments,
        phoneme_files: files
            .iter()
            .map(|p| {
                p.file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default()
            })
            .collect(),
        warnings,
    };
    write_json(&out_dir.join(MANIFEST_NAME), &manifest)?;
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SynthSession {
    pub wav: PathBuf,
    pub truth_text: PathBuf,
    pub truth_json: PathBuf,
    pub samples: usize,
    pub markers: usize,
}

/// Writes `config.sessions` recordings as `session_NNN.wav` with their ground
/// truth as `session_NNN.truth.txt` and `session_NNN.truth.json`.
pub fn synth(config: &RunConfig, out_dir: &Path) -> Result<Vec<SynthSession>, CommandError> {
    let corpus = generate_corpus(&config.recording_script(), config.sessions)?;
    let mut sessions = Vec::with_capacity(corpus.len());
    for (k, (stream, truth)) in corpus.into_iter().enumerate() {
        let stem = format!("session_{k:03}");
        let wav = out_dir.join(format!("{stem}.wav"));
        let truth_text = out_dir.join(format!("{stem}.truth.txt"));
        let truth_json = out_dir.join(format!("{stem}.truth.json"));
        write_bytes(&wav, stream.to_pcm16_wav())?;
        write_bytes(&truth_text, truth.to_text())?;
        write_json(&truth_json, &truth)?;
        sessions.push(SynthSession {
            wav,
            truth_text,
            truth_json,
            samples: stream.len(),
            markers: truth.marker_positions.len(),
        });
    }
    Ok(sessions)
}

/// Detects markers in `input` and scores them against a ground-truth JSON file.
pub fn evaluate(
    input: &Path,
    truth: &Path,
    config: &RunConfig,
    output: Option<&Path>,
) -> Result<DetectionReport, CommandError> {
    config.validate()?;
    let stream = AudioStream::read_wav(input)?;
    let truth: GroundTruth = read_json(truth)?;
    let result = detect_markers(&stream.samples, &config.detection);
    let report = evaluate_detection(&truth, &result, config.tolerance);
    if let Some(path) = output {
        write_json(path, &report)?;
    }
    Ok(report)
}

/// Generates a corpus from the configured script and evaluates every grid point on it.
pub fn sweep(config: &RunConfig, output: Option<&Path>) -> Result<Vec<SweepRow>, CommandError> {
    let corpus = generate_corpus(&config.recording_script(), config.sessions)?;
    let rows = parameter_sweep(&config.sweep, &corpus, config.tolerance)?;
    if let Some(path) = output {
        match config.report_format {
            ReportFormat::Csv => {
                let mut buffer = Vec::new();
                write_sweep_csv(&rows, &mut buffer)?;
                write_bytes(path, buffer)?;
            }
            ReportFormat::Json => {
                #[derive(Serialize)]
                struct SweepSummary<'a> {
                    rows: &'a [SweepRow],
                    precision_by_window: Vec<(usize, f64)>,
                }
                write_json(
                    path,
                    &SweepSummary {
                        rows: &rows,
                        precision_by_window: precision_by_window(&rows),
                    },
                )?;
            }
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchSummary {
    pub best_case: ComplexityReport,
    pub worst_case: ComplexityReport,
    pub linear: ComplexityReport,
}

/// Complexity runs: best case on all-accepted streams, worst case on
/// all-rejected streams, and linearity on synthetic recordings. Writes one CSV
/// per part and `summary.json` into `out_dir`.
pub fn bench(config: &RunConfig, out_dir: &Path) -> Result<BenchSummary, CommandError> {
    config.validate()?;
    let params = &config.detection;
    let script = config.recording_script();
    let template = script.marker_template();

    let best_cases: Vec<(usize, usize)> = config
        .bench_sizes
        .iter()
        .flat_map(|&s| [1usize, 2, 5].map(|per_100k| (s, per_100k * s / 100_000)))
        .collect();
    let best_case = verify_best_case(&best_cases, params, &template)?;

    let high = (params.a as i64 + 1_000).min(i16::MAX as i64) as i16;
    let streams: Vec<Vec<i16>> = config
        .bench_sizes
        .iter()
        .map(|&s| rejection_stream(s, high, 0, 1, 0))
        .collect();
    let worst_case = verify_worst_case(&streams, params)?;
    let linear = fit_linear_complexity(&config.bench_sizes, &script, params)?;

    std::fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;
    for (name, report) in [
        ("best_case", &best_case),
        ("worst_case", &worst_case),
        ("linear", &linear),
    ] {
        let mut buffer = Vec::new();
        report.write_csv(&mut buffer)?;
        write_bytes(&out_dir.join(format!("{name}.csv")), buffer)?;
    }
    let summary = BenchSummary {
        best_case,
        worst_case,
        linear,
    };
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(summary)
}
