use horizon_bench_web::{norm_curve, reward_cost_curve, rollout, tolerance_curve};

#[test]
fn norm_curve_rows() {
    let c = norm_curve(0.5, -1.0, 1.0, 5).unwrap();
    assert_eq!(c.len(), 20);
    // x = 0 sits in the middle row: value 0, slope 0, curvature 1/p
    assert_eq!(&c[8..12], &[0.0, 0.0, 0.0, 2.0]);
    let q = norm_curve(0.0, 2.0, 2.0, 2).unwrap();
    assert_eq!(&q[..4], &[2.0, 2.0, 2.0, 1.0]);
}

#[test]
fn reward_cost_curve_ends_at_zero() {
    let c = reward_cost_curve(1.0, 0.1, 11).unwrap();
    assert_eq!(c.len(), 22);
    assert_eq!(c[21], 0.0);
    assert!(c.chunks(2).collect::<Vec<_>>().windows(2).all(|w| w[0][1] >= w[1][1]));
}

#[test]
fn tolerance_curve_is_one_inside_bounds() {
    let c = tolerance_curve(-0.5, 0.5, 1.0, true, 0.1, -1.5, 1.5, 7);
    let ys: Vec<f64> = c.chunks(2).map(|r| r[1]).collect();
    assert_eq!(ys[3], 1.0);
    assert!((ys[0] - 0.1).abs() < 1e-12);
}

#[test]
fn short_stand_rollout() {
    let r = rollout("stand", "ours", 0.2, 1, 0).unwrap();
    assert_eq!(r.len(), 50);
    assert!(r.chunks(5).all(|row| row[1] > 1.0 && (0.0..=1.0).contains(&row[4])));
}
