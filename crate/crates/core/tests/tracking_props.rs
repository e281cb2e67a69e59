use proptest::prelude::*;
use roadwork_core::tracking::{detection_threshold, ThresholdParams};

#[test]
fn threshold_non_increasing_on_speed_grid() {
    let p = ThresholdParams::default();
    let mut prev = u32::MAX;
    for i in 1..=1000 {
        let v = i as f64 * 0.1;
        let t = detection_threshold(v, &p).unwrap();
        assert!(t <= prev, "threshold rose at {v} m/s");
        assert!((2..=5).contains(&t));
        prev = t;
    }
}

proptest! {
    #[test]
    fn threshold_in_range_and_monotone(a in 0.0..1e4f64, b in 0.0..1e4f64) {
        let p = ThresholdParams::default();
        let (lo, hi) = (a.min(b), a.max(b));
        let (tl, th) = (detection_threshold(lo, &p).unwrap(), detection_threshold(hi, &p).unwrap());
        prop_assert!((2..=5).contains(&tl));
        prop_assert!(th <= tl);
    }
}
