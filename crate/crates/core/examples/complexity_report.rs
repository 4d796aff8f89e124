// Count detector operations on best-case, worst-case and realistic streams.

use std::error::Error;

use markerseg::analysis::{
    fit_linear_complexity, op_count_semantics, rejection_stream, verify_best_case, verify_worst_case, CountingRule,
};
use markerseg::synthgen::RecordingScript;
use markerseg::DetectionParams;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let params = DetectionParams::default();
    let script = RecordingScript::default();
    let rule = op_count_semantics();
    println!("{}", CountingRule::DESCRIPTION);

    let best = verify_best_case(
        &[(100_000, 0), (100_000, 10), (100_000, 100)],
        &params,
        &script.marker_template(),
    )?;
    for r in &best.runs {
        assert_eq!(r.op_count as i64, rule.expected_op_count(r.s, &params, r.m, r.c));
        println!(
            "best   s={:>6} m={:>3}: ops {:>6}, s - m(tr - t) = {:>6}",
            r.s, r.m, r.op_count, r.best_case_formula
        );
    }

    let worst = verify_worst_case(&[rejection_stream(10_000, 30_000, 0, 1, 0)], &params)?;
    let r = &worst.runs[0];
    println!(
        "worst  s={} c={}: ops {}, s*c*t would be {}",
        r.s, r.c, r.op_count, r.worst_case_product
    );

    let linear = fit_linear_complexity(&[50_000, 100_000, 200_000, 400_000], &script, &params)?;
    let fit = linear.linear_fit.expect("fit");
    println!(
        "linear: slope {:.4}, R^2 {:.6}, a {:.2e}, b {:.2e}",
        fit.slope, fit.r_squared, linear.fitted_a, linear.fitted_b
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
