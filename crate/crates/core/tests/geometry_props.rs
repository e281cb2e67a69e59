use proptest::prelude::*;
use roadwork_core::geometry::{
    convex_hull, cross, distance_to_convex_hull, iou, normalize_angle, signed_area, PixelBox, Pose2D,
    RigidTransform3D, UtmAnchor, WorldPoint,
};

fn coord() -> impl Strategy<Value = f64> {
    -500.0..500.0f64
}

fn pixel_box() -> impl Strategy<Value = PixelBox> {
    (0.0..600.0f64, 0.0..300.0f64, 0.0..200.0f64, 0.0..200.0f64)
        .prop_map(|(x, y, w, h)| PixelBox::new(x, y, x + w, y + h).unwrap())
}

fn rotation(yaw: f64, pitch: f64) -> [[f64; 3]; 3] {
    let (sy, cy) = yaw.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let rz = [[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]];
    let ry = [[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]];
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = (0..3).map(|k| rz[i][k] * ry[k][j]).sum();
        }
    }
    r
}

proptest! {
    #[test]
    fn pose_round_trip(x in coord(), y in coord(), h in -10.0..10.0f64, px in coord(), py in coord()) {
        let pose = Pose2D::new(x, y, h);
        let back = pose.inverse_transform_point(pose.transform_point([px, py]));
        prop_assert!((back[0] - px).abs() < 1e-9 && (back[1] - py).abs() < 1e-9);
        let id = pose.compose(&pose.inverse());
        prop_assert!(id.x.abs() < 1e-9 && id.y.abs() < 1e-9 && id.heading.abs() < 1e-12);
    }

    #[test]
    fn angles_normalize_into_half_open_interval(a in -100.0..100.0f64) {
        let n = normalize_angle(a);
        prop_assert!(n > -std::f64::consts::PI && n <= std::f64::consts::PI);
        prop_assert!(((a - n) / std::f64::consts::TAU - ((a - n) / std::f64::consts::TAU).round()).abs() < 1e-9);
    }

    #[test]
    fn rigid_transform_inverse_round_trip(
        yaw in -3.0..3.0f64, pitch in -1.5..1.5f64,
        t in prop::array::uniform3(-10.0..10.0f64),
        p in prop::array::uniform3(-100.0..100.0f64),
    ) {
        let tf = RigidTransform3D::new(rotation(yaw, pitch), t).unwrap();
        let back = tf.inverse().apply(tf.apply(p));
        for i in 0..3 {
            prop_assert!((back[i] - p[i]).abs() < 1e-9);
        }
        let id = tf.compose(&tf.inverse());
        prop_assert!(id.apply(p).iter().zip(p).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn utm_round_trip(e in 200_000.0..800_000.0f64, n in 0.0..9_000_000.0f64, off in -3.0..3.0f64, x in coord(), y in coord()) {
        let a = UtmAnchor::new(e, n, "32U".into(), off).unwrap();
        let p = WorldPoint::new(x, y);
        let back = a.to_local(a.to_utm(&p));
        prop_assert!((back.x - x).abs() < 1e-6 && (back.y - y).abs() < 1e-6);
        // rigid: distances preserved
        let q = WorldPoint::new(y, x);
        let (pu, qu) = (a.to_utm(&p), a.to_utm(&q));
        let d = ((pu[0] - qu[0]).powi(2) + (pu[1] - qu[1]).powi(2)).sqrt();
        prop_assert!((d - p.distance(&q)).abs() < 1e-6);
    }

    #[test]
    fn iou_is_symmetric_and_bounded(a in pixel_box(), b in pixel_box()) {
        let v = iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, iou(&b, &a));
        if a.area() > 0.0 {
            prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
        }
        // never above the smaller/larger area ratio
        let (lo, hi) = (a.area().min(b.area()), a.area().max(b.area()));
        if hi > 0.0 {
            prop_assert!(v <= lo / hi + 1e-12);
        }
    }

    #[test]
    fn hull_is_convex_and_contains_inputs(pts in prop::collection::vec((coord(), coord()), 3..40)) {
        let points: Vec<WorldPoint> = pts.iter().map(|&(x, y)| WorldPoint::new(x, y)).collect();
        let hull = convex_hull(&points);
        prop_assert!(hull.len() <= points.len());
        prop_assert!(hull.iter().all(|h| points.contains(h)));
        if hull.len() >= 3 {
            prop_assert!(signed_area(&hull) > 0.0);
            let n = hull.len();
            for i in 0..n {
                let turn = cross(hull[i].xy(), hull[(i + 1) % n].xy(), hull[(i + 2) % n].xy());
                prop_assert!(turn > 0.0);
            }
            for p in &points {
                prop_assert!(distance_to_convex_hull(&hull, p, 1e-9) <= 1e-9);
            }
        }
    }
}
