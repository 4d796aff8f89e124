//! Operation-count analysis of the detector.
//!
//! The detector's cost model is exact. Under [`CountingRule`] every run on a
//! stream of `s` samples costs
//!
//! ```text
//! ops = (s - t + 1) - m·tr + c·t
//! ```
//!
//! where `c` candidates were evaluated and `m` of them accepted, provided every
//! post-acceptance skip lands inside the scanned range. All-accepted streams
//! (`c = m`) give the best case `s - m·(tr - t)` up to the loop-bound constant
//! `1 - t`. All-rejected streams (`m = 0`) give the worst case
//! `(s - t + 1) + c·t`: each rejection costs `t` extra operations.
//!
//! The worst case is also commonly stated as the product `s·c·t`. That form
//! does not follow from an additive per-candidate excess, so reports carry it
//! next to the measured count without using it for any check.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adm::{detect_markers, AdmError, DetectionParams, DetectionResult};
use crate::codec::AudioStream;
use crate::marker::{synthesize_marker, MarkerError, MarkerTemplate};
use crate::synthgen::{evaluate_detection, generate_recording, GroundTruth, RecordingScript, SynthError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("stream construction failed: {0}")]
    ConstructionFailed(String),
    #[error("insufficient sizes: {0}")]
    InsufficientSizes(String),
    #[error("parameter grid has no valid points")]
    EmptyGrid,
    #[error(transparent)]
    Params(#[from] AdmError),
    #[error(transparent)]
    Marker(#[from] MarkerError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("report output failed: {0}")]
    Output(String),
}

/// The counting contract the detector's `op_count` implements.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CountingRule;

impl CountingRule {
    pub const DESCRIPTION: &'static str = "one elementary operation = one sample inspection; \
        each index visited by the scan costs 1; each candidate evaluation costs t; \
        an acceptance skips the next tr indices";

    /// Predicted count for a run that evaluated `evaluated` candidates and
    /// accepted `accepted` of them, assuming no skip ran past the end of the scan.
    pub fn expected_op_count(
        &self,
        stream_len: usize,
        params: &DetectionParams,
        accepted: usize,
        evaluated: usize,
    ) -> i64 {
        if stream_len < params.t {
            return 0;
        }
        let visited = (stream_len - params.t + 1) as i64 - (accepted * params.tr) as i64;
        visited + (evaluated * params.t) as i64
    }
}

/// Returns the counting rule the detector is instrumented with.
pub fn op_count_semantics() -> CountingRule {
    CountingRule
}

/// One instrumented run, with the closed-form predictions beside it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRun {
    pub s: usize,
    pub m: usize,
    pub c: usize,
    pub op_count: u64,
    /// [`CountingRule`] prediction from `(s, m, c)`.
    pub rule_prediction: i64,
    /// Best-case form `s - m·(tr - t)`.
    pub best_case_formula: i64,
    /// Worst-case product form `s·c·t`.
    pub worst_case_product: u64,
}

impl ComplexityRun {
    fn from_result(result: &DetectionResult, params: &DetectionParams) -> Self {
        let s = result.stream_len;
        let m = result.candidates_accepted;
        let c = result.candidates_evaluated;
        Self {
            s,
            m,
            c,
            op_count: result.op_count,
            rule_prediction: CountingRule.expected_op_count(s, params, m, c),
            best_case_formula: s as i64 - (m * (params.tr - params.t)) as i64,
            worst_case_product: (s as u64) * (c as u64) * (params.t as u64),
        }
    }

    pub fn best_case_residual(&self) -> i64 {
        self.op_count as i64 - self.best_case_formula
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub params: DetectionParams,
    pub runs: Vec<ComplexityRun>,
    /// `op_count - (s - m·(tr - t))` per run.
    pub best_case_residuals: Vec<i64>,
    /// Accepted markers per sample over all runs.
    pub fitted_a: f64,
    /// Evaluated candidates per sample over all runs.
    pub fitted_b: f64,
    pub linear_fit: Option<LinearFit>,
    pub notes: Vec<String>,
}

impl ComplexityReport {
    fn new(
        params: DetectionParams,
        runs: Vec<ComplexityRun>,
        linear_fit: Option<LinearFit>,
        notes: Vec<String>,
    ) -> Self {
        let total_s: usize = runs.iter().map(|r| r.s).sum();
        let ratio = |n: usize| if total_s == 0 { 0.0 } else { n as f64 / total_s as f64 };
        Self {
            params,
            best_case_residuals: runs.iter().map(ComplexityRun::best_case_residual).collect(),
            fitted_a: ratio(runs.iter().map(|r| r.m).sum()),
            fitted_b: ratio(runs.iter().map(|r| r.c).sum()),
            runs,
            linear_fit,
            notes,
        }
    }

    /// One CSV row per run.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), AnalysisError> {
        let mut writer = csv::Writer::from_writer(out);
        for run in &self.runs {
            writer
                .serialize(run)
                .map_err(|e| AnalysisError::Output(e.to_string()))?;
        }
        writer.flush().map_err(|e| AnalysisError::Output(e.to_string()))
    }
}

/// Silence with `m` noise-free markers spread so that every skip stays inside
/// the scan and nothing but the marker starts exceeds the threshold.
pub fn best_case_stream(
    s: usize,
    m: usize,
    params: &DetectionParams,
    template: &MarkerTemplate,
) -> Result<Vec<i16>, AnalysisError> {
    let marker = synthesize_marker(template, 0.0, 0)?;
    let mut stream = vec![0i16; s];
    if m == 0 {
        return Ok(stream);
    }
    let span = s
        .checked_sub(params.t + params.tr)
        .ok_or_else(|| AnalysisError::ConstructionFailed(format!("stream of {s} samples cannot hold one full skip")))?;
    let spacing = span / m;
    if m > 1 && spacing <= params.tr.max(marker.len()) {
        return Err(AnalysisError::ConstructionFailed(format!(
            "{m} markers do not fit in {s} samples at skip {}",
            params.tr
        )));
    }
    for k in 0..m {
        let at = k * spacing;
        let end = (at + marker.len()).min(s);
        stream[at..end].copy_from_slice(&marker[..end - at]);
    }
    Ok(stream)
}

/// Runs the detector on constructed all-accepted streams, one per `(s, m)` case.
pub fn verify_best_case(
    cases: &[(usize, usize)],
    params: &DetectionParams,
    template: &MarkerTemplate,
) -> Result<ComplexityReport, AnalysisError> {
    params.validate()?;
    let mut runs = Vec::with_capacity(cases.len());
    for &(s, m) in cases {
        let stream = best_case_stream(s, m, params, template)?;
        let result = detect_markers(&stream, params);
        if result.candidates_evaluated != m || result.candidates_accepted != m {
            return Err(AnalysisError::ConstructionFailed(format!(
                "s={s}, m={m}: {} candidates evaluated, {} accepted",
                result.candidates_evaluated, result.candidates_accepted
            )));
        }
        runs.push(ComplexityRun::from_result(&result, params));
    }
    let notes = vec![format!(
        "best case: op_count = s - m(tr - t) + (1 - t); the constant {} comes from the scan stopping at s - t",
        1 - params.t as i64
    )];
    Ok(ComplexityReport::new(*params, runs, None, notes))
}

/// Alternating-sign samples: `on` samples at magnitude `high`, then `off` at `low`, repeating.
/// Every window of two or more samples has many sign changes, so no candidate is accepted.
pub fn rejection_stream(s: usize, high: i16, low: i16, on: usize, off: usize) -> Vec<i16> {
    let period = (on + off).max(1);
    (0..s)
        .map(|i| {
            let magnitude = if i % period < on { high } else { low };
            if i % 2 == 0 {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect()
}

/// Runs the detector on all-rejected streams.
pub fn verify_worst_case(streams: &[Vec<i16>], params: &DetectionParams) -> Result<ComplexityReport, AnalysisError> {
    params.validate()?;
    let mut runs = Vec::with_capacity(streams.len());
    for stream in streams {
        let result = detect_markers(stream, params);
        if result.candidates_accepted != 0 {
            return Err(AnalysisError::ConstructionFailed(format!(
                "{} of {} candidates accepted in a rejection stream",
                result.candidates_accepted, result.candidates_evaluated
            )));
        }
        runs.push(ComplexityRun::from_result(&result, params));
    }
    let notes = vec![
        "worst case: measured op_count = (s - t + 1) + c·t; each rejected candidate adds t".to_string(),
        "worst_case_product (s·c·t) is listed for comparison only; it is quadratic in s while the measured count is linear"
            .to_string(),
    ];
    Ok(ComplexityReport::new(*params, runs, None, notes))
}

/// Ordinary least squares of `y` on `x`.
pub fn least_squares(points: &[(f64, f64)]) -> LinearFit {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|p| (p.1 - (intercept + slope * p.0)).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

fn check_sizes(sizes: &[usize]) -> Result<(), AnalysisError> {
    if sizes.len() < 4 {
        return Err(AnalysisError::InsufficientSizes(format!(
            "need at least 4 sizes, got {}",
            sizes.len()
        )));
    }
    let min = *sizes.iter().min().expect("nonempty");
    let max = *sizes.iter().max().expect("nonempty");
    if min == 0 || max < 8 * min {
        return Err(AnalysisError::InsufficientSizes(format!(
            "sizes must span at least 8x (got {min}..{max})"
        )));
    }
    Ok(())
}

/// Fits op_count against stream length over prefixes of one synthetic recording
/// long enough for the largest size.
pub fn fit_linear_complexity(
    sizes: &[usize],
    script: &RecordingScript,
    params: &DetectionParams,
) -> Result<ComplexityReport, AnalysisError> {
    check_sizes(sizes)?;
    params.validate()?;
    let longest = *sizes.iter().max().expect("checked");
    let mut long_script = script.clone();
    let cycle = script.silence_len_range[1] + script.phoneme_len_range[1] + 2 * script.marker_template().settle_samples;
    long_script.phoneme_count = longest / cycle.max(1) + 2;
    let (mut stream, _) = generate_recording(&long_script)?;
    while stream.len() < longest {
        long_script.phoneme_count *= 2;
        stream = generate_recording(&long_script)?.0;
    }
    fit_on_prefixes(sizes, &stream.samples, params)
}

/// Same fit on prefixes of a caller-supplied stream.
pub fn fit_on_prefixes(
    sizes: &[usize],
    samples: &[i16],
    params: &DetectionParams,
) -> Result<ComplexityReport, AnalysisError> {
    check_sizes(sizes)?;
    params.validate()?;
    let runs: Vec<ComplexityRun> = sizes
        .iter()
        .map(|&s| {
            let prefix = samples.get(..s).ok_or_else(|| {
                AnalysisError::InsufficientSizes(format!("size {s} exceeds the {}-sample stream", samples.len()))
            })?;
            Ok(ComplexityRun::from_result(&detect_markers(prefix, params), params))
        })
        .collect::<Result<_, AnalysisError>>()?;
    let fit = least_squares(&runs.iter().map(|r| (r.s as f64, r.op_count as f64)).collect::<Vec<_>>());
    let notes = vec![format!(
        "op_count ~ {:.6}·s + {:.1} (R² = {:.6})",
        fit.slope, fit.intercept, fit.r_squared
    )];
    Ok(ComplexityReport::new(*params, runs, Some(fit), notes))
}

/// Grid over the four detector parameters. Combinations with `tr < t` are skipped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub threshold_a: Vec<u32>,
    pub window_t: Vec<usize>,
    pub percent_p: Vec<u32>,
    pub skip_tr: Vec<usize>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self::single(&DetectionParams::default())
    }
}

impl SweepGrid {
    pub fn single(params: &DetectionParams) -> Self {
        Self {
            threshold_a: vec![params.a],
            window_t: vec![params.t],
            percent_p: vec![params.p],
            skip_tr: vec![params.tr],
        }
    }

    pub fn points(&self) -> Vec<DetectionParams> {
        let mut points = Vec::new();
        for &a in &self.threshold_a {
            for &t in &self.window_t {
                for &p in &self.percent_p {
                    for &tr in &self.skip_tr {
                        if let Ok(params) = DetectionParams::new(a, t, p, tr) {
                            points.push(params);
                        }
                    }
                }
            }
        }
        points
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold_a: u32,
    pub window_t: usize,
    pub percent_p: u32,
    pub skip_tr: usize,
    pub recall: f64,
    pub precision: f64,
    pub true_markers: usize,
    pub detected: usize,
    pub matched: usize,
    pub candidates: usize,
    pub op_count: u64,
}

impl SweepRow {
    pub fn params(&self) -> DetectionParams {
        DetectionParams {
            a: self.threshold_a,
            t: self.window_t,
            p: self.percent_p,
            tr: self.skip_tr,
        }
    }
}

/// Evaluates every grid point on the whole corpus. Rows are ranked by recall,
/// then precision (both descending), then op_count, then parameters.
pub fn parameter_sweep(
    grid: &SweepGrid,
    corpus: &[(AudioStream, GroundTruth)],
    tolerance: usize,
) -> Result<Vec<SweepRow>, AnalysisError> {
    let points = grid.points();
    if points.is_empty() {
        return Err(AnalysisError::EmptyGrid);
    }
    let mut rows: Vec<SweepRow> = points
        .iter()
        .map(|params| sweep_point(params, corpus, tolerance))
        .collect();
    rows.sort_by(|x, y| {
        y.recall
            .total_cmp(&x.recall)
            .then(y.precision.total_cmp(&x.precision))
            .then(x.op_count.cmp(&y.op_count))
            .then(x.params().cmp(&y.params()))
    });
    Ok(rows)
}

fn sweep_point(params: &DetectionParams, corpus: &[(AudioStream, GroundTruth)], tolerance: usize) -> SweepRow {
    let mut row = SweepRow {
        threshold_a: params.a,
        window_t: params.t,
        percent_p: params.p,
        skip_tr: params.tr,
        recall: 1.0,
        precision: 1.0,
        true_markers: 0,
        detected: 0,
        matched: 0,
        candidates: 0,
        op_count: 0,
    };
    for (stream, truth) in corpus {
        let result = detect_markers(&stream.samples, params);
        let report = evaluate_detection(truth, &result, tolerance);
        row.true_markers += report.true_count;
        row.detected += report.detected_count;
        row.matched += report.matched;
        row.candidates += result.candidates_evaluated;
        row.op_count += result.op_count;
    }
    if row.true_markers > 0 {
        row.recall = row.matched as f64 / row.true_markers as f64;
    }
    if row.detected > 0 {
        row.precision = row.matched as f64 / row.detected as f64;
    }
    row
}

/// Mean precision per window length, ascending in `t`. Short windows are where
/// isolated spikes get through.
pub fn precision_by_window(rows: &[SweepRow]) -> Vec<(usize, f64)> {
    let mut windows: Vec<usize> = rows.iter().map(|r| r.window_t).collect();
    windows.sort_unstable();
    windows.dedup();
    windows
        .into_iter()
        .map(|t| {
            let precisions: Vec<f64> = rows.iter().filter(|r| r.window_t == t).map(|r| r.precision).collect();
            (t, precisions.iter().sum::<f64>() / precisions.len() as f64)
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), AnalysisError> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| AnalysisError::Output(e.to_string()))?;
    }
    writer.flush().map_err(|e| AnalysisError::Output(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marker::default_template;

    fn optimal() -> DetectionParams {
        DetectionParams::default()
    }

    fn hot_template() -> MarkerTemplate {
        default_template().scaled(1.1)
    }

    #[test]
    fn silence_counts_the_loop_bound() {
        let r = detect_markers(&vec![0; 100_000], &optimal());
        assert_eq!(r.op_count, 100_000 - 50 + 1);
        assert_eq!(
            op_count_semantics().expected_op_count(100_000, &optimal(), 0, 0),
            99_951
        );
    }

    #[test]
    fn one_acceptance_nets_minus_skip_plus_window() {
        let rule = op_count_semantics();
        assert_eq!(
            rule.expected_op_count(20_000, &optimal(), 1, 1),
            (20_000 - 50 + 1) - (350 - 50)
        );
        assert_eq!(
            rule.expected_op_count(20_000, &optimal(), 0, 7),
            (20_000 - 50 + 1) + 7 * 50
        );
        assert_eq!(rule.expected_op_count(49, &optimal(), 0, 0), 0);
    }

    #[test]
    fn best_case_at_one_hundred_thousand() {
        let report = verify_best_case(&[(100_000, 10)], &optimal(), &hot_template()).unwrap();
        assert_eq!(report.runs[0].op_count, 96_951);
        assert_eq!(report.best_case_residuals, vec![1 - 50]);
    }

    #[test]
    fn best_case_without_markers() {
        let report = verify_best_case(&[(50_000, 0)], &optimal(), &hot_template()).unwrap();
        assert_eq!(report.runs[0].op_count, 50_000 - 50 + 1);
    }

    #[test]
    fn doubling_markers_saves_a_skip_each() {
        let report = verify_best_case(&[(200_000, 20), (200_000, 40)], &optimal(), &hot_template()).unwrap();
        let saved = report.runs[0].op_count - report.runs[1].op_count;
        assert_eq!(saved, 20 * (350 - 50));
    }

    #[test]
    fn best_case_rejects_undetectable_template() {
        // At the measured amplitudes the markers never clear the optimal threshold.
        let err = verify_best_case(&[(100_000, 5)], &optimal(), &default_template()).unwrap_err();
        assert!(matches!(err, AnalysisError::ConstructionFailed(_)));
        let err = verify_best_case(&[(1_000, 5)], &optimal(), &hot_template()).unwrap_err();
        assert!(matches!(err, AnalysisError::ConstructionFailed(_)));
    }

    #[test]
    fn worst_case_hand_trace() {
        let stream = rejection_stream(1_000, 30_000, 0, 1, 0);
        let report = verify_worst_case(&[stream], &optimal()).unwrap();
        let run = &report.runs[0];
        assert_eq!(run.c, 951);
        assert_eq!(run.op_count, 951 * 51);
        assert_eq!(run.worst_case_product, 1_000 * 951 * 50);
    }

    #[test]
    fn worst_case_with_unreachable_threshold() {
        let stream = rejection_stream(1_000, 30_000, 0, 1, 0);
        let params = DetectionParams { a: 31_000, ..optimal() };
        let report = verify_worst_case(&[stream], &params).unwrap();
        assert_eq!(report.runs[0].c, 0);
        assert_eq!(report.runs[0].op_count, 951);
    }

    #[test]
    fn halved_density_halves_candidates() {
        let full = verify_worst_case(&[rejection_stream(10_000, 30_000, 100, 1, 0)], &optimal()).unwrap();
        let half = verify_worst_case(&[rejection_stream(10_000, 30_000, 100, 1, 1)], &optimal()).unwrap();
        let (cf, ch) = (full.runs[0].c as i64, half.runs[0].c as i64);
        assert!((2 * ch - cf).abs() <= 2, "full {cf}, half {ch}");
    }

    #[test]
    fn least_squares_recovers_a_line() {
        let fit = least_squares(&[(1.0, 3.0), (2.0, 5.0), (3.0, 7.0), (10.0, 21.0)]);
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn silence_grows_one_op_per_sample() {
        let silence = vec![0i16; 800_000];
        let report = fit_on_prefixes(&[100_000, 200_000, 400_000, 800_000], &silence, &optimal()).unwrap();
        let fit = report.linear_fit.unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!((fit.intercept + 49.0).abs() < 1e-6);
    }

    #[test]
    fn size_requirements() {
        let s = RecordingScript::default();
        assert!(matches!(
            fit_linear_complexity(&[1, 2, 8], &s, &optimal()),
            Err(AnalysisError::InsufficientSizes(_))
        ));
        assert!(matches!(
            fit_linear_complexity(&[10, 20, 40, 79], &s, &optimal()),
            Err(AnalysisError::InsufficientSizes(_))
        ));
    }

    #[test]
    fn grid_skips_invalid_points() {
        let grid = SweepGrid {
            threshold_a: vec![27_000],
            window_t: vec![50, 400],
            percent_p: vec![75],
            skip_tr: vec![350],
        };
        assert_eq!(grid.points().len(), 1);
        let empty = SweepGrid {
            window_t: vec![400],
            ..grid
        };
        assert!(matches!(parameter_sweep(&empty, &[], 5), Err(AnalysisError::EmptyGrid)));
    }

    #[test]
    fn precision_is_averaged_per_window() {
        let row = |t, precision| SweepRow {
            threshold_a: 1,
            window_t: t,
            percent_p: 1,
            skip_tr: t,
            recall: 1.0,
            precision,
            true_markers: 0,
            detected: 0,
            matched: 0,
            candidates: 0,
            op_count: 0,
        };
        let rows = [row(50, 1.0), row(10, 0.5), row(50, 0.5), row(10, 0.25)];
        assert_eq!(precision_by_window(&rows), vec![(10, 0.375), (50, 0.75)]);
    }
}
