//! Ready-made scenarios used by tests and the `examples/` configs.

use roadwork_core::ObjectClass;

use super::scenario::{DetectorModel, PathVertex, Scenario, ScenarioObject};

/// Default drive speed, m/s (50 km/h).
pub const URBAN_SPEED: f64 = 13.89;

fn straight(length: f64, speed: f64) -> Vec<PathVertex> {
    vec![
        PathVertex { x: 0.0, y: 0.0, speed },
        PathVertex { x: length, y: 0.0, speed },
    ]
}

fn base(seed: u64, sigma: f64, length: f64, objects: Vec<ScenarioObject>) -> Scenario {
    Scenario {
        seed,
        lidar_noise_sigma: sigma,
        lidar_hz: 10.0,
        camera_hz: 10.0,
        lidar_range: 80.0,
        path: straight(length, URBAN_SPEED),
        objects,
        detector: DetectorModel::default(),
        calibration: Default::default(),
        utm_anchor: None,
    }
}

fn panel(x: f64, y: f64, site: &str) -> ScenarioObject {
    ScenarioObject::rect(Some(ObjectClass::PanelPassLeft), x, y, x + 0.3, y + 0.3, Some(site))
}

/// 300 m along +x past two sites on the left: a transverse barrier followed
/// by five panels, then two chained barriers followed by three panels.
pub fn two_site_drive(seed: u64, sigma: f64) -> Scenario {
    let mut objects = vec![ScenarioObject::rect(Some(ObjectClass::Barrier), 58.0, 3.0, 58.3, 5.0, Some("A"))];
    objects.extend([63.0, 73.0, 83.0, 93.0, 103.0].map(|x| panel(x, 3.0, "A")));
    objects.push(ScenarioObject::rect(Some(ObjectClass::Barrier), 170.0, 3.0, 172.5, 3.3, Some("B")));
    objects.push(ScenarioObject::rect(Some(ObjectClass::Barrier), 173.0, 3.0, 175.5, 3.3, Some("B")));
    objects.extend([180.0, 190.0, 200.0].map(|x| panel(x, 3.0, "B")));
    base(seed, sigma, 300.0, objects)
}

/// One panel 40 m ahead on the left.
pub fn single_panel(seed: u64, sigma: f64) -> Scenario {
    base(seed, sigma, 150.0, vec![panel(40.0, 3.0, "A")])
}

/// Panels every 3 m over 200 m on the left plus parked cars on the right:
/// well over ten objects per LiDAR frame and one site with more than fifty
/// members.
pub fn stress_drive(seed: u64) -> Scenario {
    let mut objects: Vec<ScenarioObject> = (0..67).map(|i| panel(20.0 + 3.0 * i as f64, 3.0, "S")).collect();
    objects.extend((0..20).map(|i| {
        let x = 15.0 + 11.0 * i as f64;
        ScenarioObject::rect(None, x, -4.5, x + 4.5, -2.7, None)
    }));
    let mut sc = base(seed, 0.10, 320.0, objects);
    sc.detector = DetectorModel::perfect();
    sc
}
