//! `X_1` under the rescaled measure equals `a^H X_{1/a}` pathwise, and in law
//! the unit increment matches `2^{-H} X_2`.

use harmstable::analysis::ks_two_sample;
use harmstable::harmonizable::{process_value, simulate_increments};
use harmstable::{JumpMeasure, ModelParams, RngStream};

#[test]
fn pathwise_rescaling() {
    let p = ModelParams::new(1.2, 0.75).unwrap();
    let mut rng = RngStream::new(31, 0);
    let jm = JumpMeasure::build(1.2, 10.0, 3000, &mut rng).unwrap();
    let wide = jm.rescaled(0.5).unwrap();
    assert_eq!(wide.half_width(), 20.0);
    let lhs = process_value(&wide, 1, &p).unwrap();
    let rhs = process_value(&jm, 2, &p).unwrap() * 2f64.powf(-p.hurst);
    assert!((lhs - rhs).norm() < 1e-10 * rhs.norm());
}

#[test]
fn unit_increment_matches_scaled_two_step_value() {
    let p = ModelParams::new(1.2, 0.75).unwrap();
    let reps = 2000;
    let y0: Vec<f64> = (0..reps)
        .map(|k| {
            let mut rng = RngStream::new(41, k);
            let jm = JumpMeasure::build(1.2, 10.0, 2000, &mut rng).unwrap();
            simulate_increments(&jm, 1, &p).unwrap().increments[0].re
        })
        .collect();
    let x2: Vec<f64> = (0..reps)
        .map(|k| {
            let mut rng = RngStream::new(41, reps + k);
            let jm = JumpMeasure::build(1.2, 5.0, 2000, &mut rng).unwrap();
            process_value(&jm, 2, &p).unwrap().re * 2f64.powf(-p.hurst)
        })
        .collect();
    let d = ks_two_sample(&y0, &x2).unwrap();
    assert!(d < 0.05, "D = {d}");
}
