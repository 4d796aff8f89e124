macro_rules! example {
    ($module:ident, $file:literal, $test:ident) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $test() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example!(codec_roundtrip, "codec_roundtrip.rs", codec_roundtrip_runs);
example!(recorder_states, "recorder_states.rs", recorder_states_runs);
example!(synthesize_marker, "synthesize_marker.rs", synthesize_marker_runs);
example!(detect_markers, "detect_markers.rs", detect_markers_runs);
example!(split_phonemes, "split_phonemes.rs", split_phonemes_runs);
example!(complexity_report, "complexity_report.rs", complexity_report_runs);
example!(parameter_sweep, "parameter_sweep.rs", parameter_sweep_runs);
