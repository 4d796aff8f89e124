use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use markerseg::commands::{self, CommandError, ReportFormat, RunConfig};

#[derive(Parser)]
#[command(
    name = "markerseg",
    version,
    about = "Split switch-marked speech recordings into phonemes"
)]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode a PCM16 or IMA-ADPCM WAV to PCM16.
    Decode { input: PathBuf, output: PathBuf },
    /// Encode a WAV to IMA-ADPCM.
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        block_align: Option<u16>,
    },
    /// Detect markers in one or more recordings.
    Detect {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Write results as JSON.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        detection: DetectionFlags,
    },
    /// Detect, segment, and export phonemes plus a manifest.
    Split {
        input: PathBuf,
        out_dir: PathBuf,
        #[command(flatten)]
        detection: DetectionFlags,
        #[command(flatten)]
        segmentation: SegmentFlags,
    },
    /// Generate synthetic recordings with ground truth.
    Synth {
        out_dir: PathBuf,
        #[command(flatten)]
        script: ScriptFlags,
    },
    /// Score detection on a recording against its ground-truth JSON.
    Evaluate {
        input: PathBuf,
        truth: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        tolerance: Option<usize>,
        #[command(flatten)]
        detection: DetectionFlags,
    },
    /// Evaluate a parameter grid on a synthetic corpus.
    Sweep {
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        threshold_a: Option<Vec<u32>>,
        #[arg(long, value_delimiter = ',')]
        window_t: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        percent_p: Option<Vec<u32>>,
        #[arg(long, value_delimiter = ',')]
        skip_tr: Option<Vec<usize>>,
        #[arg(long)]
        tolerance: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[command(flatten)]
        script: ScriptFlags,
    },
    /// Operation-count complexity runs.
    Bench {
        out_dir: PathBuf,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[command(flatten)]
        detection: DetectionFlags,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct DetectionFlags {
    #[arg(long)]
    threshold_a: Option<u32>,
    #[arg(long)]
    window_t: Option<usize>,
    #[arg(long)]
    percent_p: Option<u32>,
    #[arg(long)]
    skip_tr: Option<usize>,
}

#[derive(Args)]
struct SegmentFlags {
    #[arg(long)]
    marker_len: Option<usize>,
    #[arg(long)]
    silence_max_abs: Option<u16>,
    #[arg(long)]
    silence_min_len: Option<usize>,
}

#[derive(Args)]
struct ScriptFlags {
    #[arg(long)]
    phonemes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sessions: Option<usize>,
    #[arg(long)]
    marker_scale: Option<f64>,
    #[arg(long)]
    marker_noise: Option<f64>,
    #[arg(long)]
    early_press_rate: Option<f64>,
    #[arg(long)]
    pause_rate: Option<f64>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl DetectionFlags {
    fn apply(self, config: &mut RunConfig) {
        set(&mut config.detection.a, self.threshold_a);
        set(&mut config.detection.t, self.window_t);
        set(&mut config.detection.p, self.percent_p);
        set(&mut config.detection.tr, self.skip_tr);
    }
}

impl SegmentFlags {
    fn apply(self, config: &mut RunConfig) {
        if self.marker_len.is_some() {
            config.marker_len = self.marker_len;
        }
        set(&mut config.silence.max_abs, self.silence_max_abs);
        set(&mut config.silence.min_len, self.silence_min_len);
    }
}

impl ScriptFlags {
    fn apply(self, config: &mut RunConfig) {
        set(&mut config.script.phoneme_count, self.phonemes);
        set(&mut config.script.seed, self.seed);
        set(&mut config.sessions, self.sessions);
        set(&mut config.script.marker_scale, self.marker_scale);
        set(&mut config.script.marker_noise, self.marker_noise);
        set(&mut config.script.early_press_rate, self.early_press_rate);
        set(&mut config.script.pause_rate, self.pause_rate);
    }
}

fn run(cli: Cli) -> Result<(), CommandError> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Decode { input, output } => {
            let s = commands::decode(&input, &output)?;
            println!(
                "{}: {} samples, {:.3} s at {} Hz, peak {}",
                output.display(),
                s.samples,
                s.duration_secs,
                s.sample_rate,
                s.peak
            );
        }
        Command::Encode {
            input,
            output,
            block_align,
        } => {
            set(&mut config.block_align, block_align);
            let s = commands::encode(&input, &output, config.block_align)?;
            println!(
                "{}: {} samples at {} Hz, block_align {}",
                output.display(),
                s.samples,
                s.sample_rate,
                config.block_align
            );
        }
        Command::Detect {
            inputs,
            output,
            workers,
            detection,
        } => {
            detection.apply(&mut config);
            set(&mut config.workers, workers);
            for file in commands::detect(&inputs, &config, output.as_deref())? {
                let r = &file.result;
                println!(
                    "{}: {} markers, {} candidates, {} ops over {} samples",
                    file.input,
                    r.positions.len(),
                    r.candidates_evaluated,
                    r.op_count,
                    r.stream_len
                );
                for p in &r.positions {
                    println!("  {p}");
                }
            }
        }
        Command::Split {
            input,
            out_dir,
            detection,
            segmentation,
        } => {
            detection.apply(&mut config);
            segmentation.apply(&mut config);
            let manifest = commands::split(&input, &out_dir, &config)?;
            println!(
                "{}: {} markers, {} phonemes",
                input.display(),
                manifest.markers.len(),
                manifest.phoneme_files.len()
            );
            for s in &manifest.segments {
                println!("  {:>8} {:>10} {:>10}", s.kind.as_str(), s.start, s.end);
            }
            warn_all(&manifest.warnings);
        }
        Command::Synth { out_dir, script } => {
            script.apply(&mut config);
            for session in commands::synth(&config, &out_dir)? {
                println!(
                    "{}: {} samples, {} markers",
                    session.wav.display(),
                    session.samples,
                    session.markers
                );
            }
        }
        Command::Evaluate {
            input,
            truth,
            output,
            tolerance,
            detection,
        } => {
            detection.apply(&mut config);
            set(&mut config.tolerance, tolerance);
            let r = commands::evaluate(&input, &truth, &config, output.as_deref())?;
            println!(
                "recall {:.4} ({}/{}), precision {:.4} ({}/{})",
                r.recall, r.matched, r.true_count, r.precision, r.matched, r.detected_count
            );
        }
        Command::Sweep {
            output,
            threshold_a,
            window_t,
            percent_p,
            skip_tr,
            tolerance,
            format,
            script,
        } => {
            script.apply(&mut config);
            set(&mut config.sweep.threshold_a, threshold_a);
            set(&mut config.sweep.window_t, window_t);
            set(&mut config.sweep.percent_p, percent_p);
            set(&mut config.sweep.skip_tr, skip_tr);
            set(&mut config.tolerance, tolerance);
            if let Some(f) = format {
                config.report_format = match f {
                    Format::Csv => ReportFormat::Csv,
                    Format::Json => ReportFormat::Json,
                };
            }
            let rows = commands::sweep(&config, output.as_deref())?;
            println!("threshold_a window_t percent_p skip_tr   recall precision op_count");
            for r in &rows {
                println!(
                    "{:>11} {:>8} {:>9} {:>7} {:>8.4} {:>9.4} {:>8}",
                    r.threshold_a, r.window_t, r.percent_p, r.skip_tr, r.recall, r.precision, r.op_count
                );
            }
        }
        Command::Bench {
            out_dir,
            sizes,
            detection,
        } => {
            detection.apply(&mut config);
            set(&mut config.bench_sizes, sizes);
            let summary = commands::bench(&config, &out_dir)?;
            let fit = summary.linear.linear_fit.expect("linear report carries a fit");
            println!(
                "best case residuals {:?}",
                dedup(&summary.best_case.best_case_residuals)
            );
            println!(
                "linear fit: slope {:.6}, R² {:.6}; a = {:.2e}, b = {:.2e}",
                fit.slope, fit.r_squared, summary.linear.fitted_a, summary.linear.fitted_b
            );
            println!("reports written to {}", out_dir.display());
        }
    }
    Ok(())
}

fn dedup(values: &[i64]) -> Vec<i64> {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
