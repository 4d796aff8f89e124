use std::path::Path;
use std::process::Command;

use markerseg::codec::{snr_db, AudioStream};
use markerseg::commands::{self, RunConfig, MANIFEST_NAME};
use markerseg::synthgen::{generate_recording, RecordingScript};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_markerseg"))
}

fn write_recording(path: &Path, phonemes: usize, seed: u64) {
    let (stream, _) = generate_recording(&RecordingScript {
        phoneme_count: phonemes,
        seed,
        ..Default::default()
    })
    .unwrap();
    stream.write_pcm16_wav(path).unwrap();
}

#[test]
fn adpcm_decode_keeps_sample_count() {
    let dir = tempfile::tempdir().unwrap();
    let pcm = dir.path().join("in.wav");
    let adpcm = dir.path().join("in.adpcm.wav");
    let out = dir.path().join("out.wav");
    write_recording(&pcm, 2, 1);
    commands::encode(&pcm, &adpcm, 256).unwrap();
    let summary = commands::decode(&adpcm, &out).unwrap();
    let original = AudioStream::read_wav(&pcm).unwrap();
    assert_eq!(summary.samples, original.len());
    assert_eq!(AudioStream::read_wav(&out).unwrap().len(), original.len());
}

#[test]
fn decode_encode_decode_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let pcm = dir.path().join("in.wav");
    write_recording(&pcm, 3, 2);
    let first = dir.path().join("a.adpcm.wav");
    let decoded = dir.path().join("a.wav");
    let second = dir.path().join("b.adpcm.wav");
    let redecoded = dir.path().join("b.wav");
    commands::encode(&pcm, &first, 256).unwrap();
    commands::decode(&first, &decoded).unwrap();
    commands::encode(&decoded, &second, 256).unwrap();
    commands::decode(&second, &redecoded).unwrap();
    let a = AudioStream::read_wav(&decoded).unwrap();
    let b = AudioStream::read_wav(&redecoded).unwrap();
    let snr = snr_db(&a.samples, &b.samples).unwrap();
    assert!(snr >= 30.0, "{snr:.2} dB");
}

#[test]
fn corrupted_header_names_the_chunk() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.wav");
    write_recording(&good, 1, 3);
    let mut bytes = std::fs::read(&good).unwrap();
    // Claim a 4-byte fmt chunk.
    bytes[16..20].copy_from_slice(&4u32.to_le_bytes());
    let bad = dir.path().join("bad.wav");
    std::fs::write(&bad, &bytes).unwrap();
    let out = bin()
        .args(["decode"])
        .arg(&bad)
        .arg(dir.path().join("o.wav"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("fmt chunk"), "{stderr}");
    assert!(out.stdout.is_empty());
}

#[test]
fn split_five_phonemes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("rec.wav");
    write_recording(&input, 5, 8);
    let out_dir = dir.path().join("split");
    let manifest = commands::split(&input, &out_dir, &RunConfig::default()).unwrap();
    assert_eq!(manifest.markers.len(), 10);
    assert_eq!(manifest.phoneme_files.len(), 5);
    for name in &manifest.phoneme_files {
        assert!(AudioStream::read_wav(out_dir.join(name)).is_ok());
    }
    let on_disk: commands::SplitManifest = commands::read_json(&out_dir.join(MANIFEST_NAME)).unwrap();
    assert_eq!(on_disk, manifest);
    assert_eq!(on_disk.params, RunConfig::default().detection);
}

#[test]
fn split_silence_warns() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("quiet.wav");
    AudioStream::new(vec![0; 32_000], 16_000)
        .write_pcm16_wav(&input)
        .unwrap();
    let out_dir = dir.path().join("split");
    let out = bin().arg("split").arg(&input).arg(&out_dir).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no phonemes"));
    let manifest: commands::SplitManifest = commands::read_json(&out_dir.join(MANIFEST_NAME)).unwrap();
    assert!(manifest.phoneme_files.is_empty());
    assert!(manifest.markers.is_empty());
}

#[test]
fn split_shorter_than_window() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tiny.wav");
    AudioStream::new(vec![30_000; 20], 16_000)
        .write_pcm16_wav(&input)
        .unwrap();
    let manifest = commands::split(&input, &dir.path().join("split"), &RunConfig::default()).unwrap();
    assert!(manifest.markers.is_empty());
}

#[test]
fn synth_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = bin()
            .args(["synth", "--phonemes", "4", "--seed", "77", "--sessions", "2"])
            .arg(dir.path().join(name))
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    run("a");
    run("b");
    for file in [
        "session_000.wav",
        "session_001.wav",
        "session_000.truth.txt",
        "session_001.truth.json",
    ] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let a = std::fs::read(dir.path().join("a/session_000.wav")).unwrap();
    let b = std::fs::read(dir.path().join("a/session_001.wav")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn evaluate_perfect_detection() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig::default();
    config.script.phoneme_count = 6;
    let sessions = commands::synth(&config, dir.path()).unwrap();
    let report_path = dir.path().join("report.json");
    let report = commands::evaluate(&sessions[0].wav, &sessions[0].truth_json, &config, Some(&report_path)).unwrap();
    assert_eq!(report.recall, 1.0);
    assert_eq!(report.true_count, 12);
    let text = std::fs::read_to_string(&report_path).unwrap();
    assert!(text.contains("\"recall\": 1.0"));
}

fn sweep_config(t: usize, a: u32) -> RunConfig {
    let mut config = RunConfig::from_toml("sessions = 4\n[script]\nphoneme_count = 25\nseed = 5").unwrap();
    config.sweep.window_t = vec![t];
    config.sweep.threshold_a = vec![a];
    config.sweep.percent_p = vec![75];
    config.sweep.skip_tr = vec![350];
    config
}

#[test]
fn sweep_single_optimal_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let rows = commands::sweep(&sweep_config(50, 27_000), Some(&out)).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].recall >= 0.97, "{}", rows[0].recall);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("threshold_a,window_t,percent_p,skip_tr"));
}

#[test]
fn sweep_long_window_loses_recall() {
    let optimal = commands::sweep(&sweep_config(50, 27_000), None).unwrap()[0].recall;
    let long = commands::sweep(&sweep_config(200, 27_000), None).unwrap()[0].recall;
    assert!(long < optimal, "t=200 recall {long} vs {optimal}");
}

#[test]
fn sweep_threshold_above_everything() {
    let row = &commands::sweep(&sweep_config(50, 32_767), None).unwrap()[0];
    assert_eq!(row.recall, 0.0);
    assert_eq!(row.candidates, 0);
}

#[test]
fn detect_workers_keep_input_order() {
    let dir = tempfile::tempdir().unwrap();
    let inputs: Vec<_> = (0..4)
        .map(|k| {
            let p = dir.path().join(format!("r{k}.wav"));
            write_recording(&p, k + 1, k as u64);
            p
        })
        .collect();
    let mut config = RunConfig::default();
    let serial = commands::detect(&inputs, &config, None).unwrap();
    config.workers = 3;
    let json = dir.path().join("detect.json");
    let parallel = commands::detect(&inputs, &config, Some(&json)).unwrap();
    assert_eq!(serial, parallel);
    for (k, file) in parallel.iter().enumerate() {
        assert_eq!(file.result.positions.len(), 2 * (k + 1));
    }
    assert!(json.exists());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "[detection]\nthreshold_a = 32000\n").unwrap();
    let input = dir.path().join("rec.wav");
    write_recording(&input, 2, 4);
    let run = |extra: &[&str]| {
        let out = bin()
            .arg("--config")
            .arg(&config)
            .arg("detect")
            .arg(&input)
            .args(extra)
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    assert!(run(&[]).contains(": 0 markers"));
    assert!(run(&["--threshold-a", "27000"]).contains(": 4 markers"));
}

#[test]
fn bad_config_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "[detection]\nwindow = 5\n").unwrap();
    let out = bin().arg("--config").arg(&config).args(["sweep"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("config"));
}

#[test]
fn bench_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        bench_sizes: vec![50_000, 100_000, 200_000, 400_000],
        ..RunConfig::default()
    };
    let summary = commands::bench(&config, dir.path()).unwrap();
    assert!(summary.best_case.best_case_residuals.iter().all(|&r| r == -49));
    for name in ["best_case.csv", "worst_case.csv", "linear.csv", "summary.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}
