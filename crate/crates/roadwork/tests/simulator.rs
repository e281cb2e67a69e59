use roadwork::outputs::SiteDocument;
use roadwork::replay::run_replay;
use roadwork::simulator::{evaluate, generate_streams, presets, DetectorModel, Evaluation, Scenario};
use roadwork_core::EngineConfig;

fn closed_loop(sc: &Scenario) -> (Vec<SiteDocument>, Evaluation) {
    let streams = generate_streams(sc).unwrap();
    let mut docs = Vec::new();
    run_replay(&EngineConfig::default(), &streams.events(), None, |out| {
        docs.extend(out.finished.iter().map(SiteDocument::from));
        Ok(())
    })
    .unwrap();
    let eval = evaluate(&docs, &streams.ground_truth).unwrap();
    (docs, eval)
}

#[test]
fn noiseless_single_panel_is_recovered_exactly() {
    let mut sc = presets::single_panel(1, 0.0);
    sc.detector = DetectorModel::perfect();
    let (docs, eval) = closed_loop(&sc);
    assert_eq!(docs.len(), 1);
    assert!(eval.missed.is_empty());
    assert!(eval.mean.unwrap() <= 1e-6, "{}", eval.to_table());
}

#[test]
fn noiseless_two_site_drive() {
    let mut sc = presets::two_site_drive(1, 0.0);
    sc.detector = DetectorModel::perfect();
    let (docs, eval) = closed_loop(&sc);
    assert_eq!(docs.len(), 2, "{docs:#?}");
    assert_eq!(eval.corners.len(), 6);
    assert!(eval.mean.unwrap() <= 1e-6, "{}", eval.to_table());
    assert_eq!(docs[0].class_counts.barrier, 1);
    assert_eq!(docs[0].class_counts.panel_pass_left, 5);
    assert_eq!(docs[1].class_counts.barrier, 2);
    assert_eq!(docs[1].class_counts.panel_pass_left, 3);
}

#[test]
fn noisy_drive_stays_under_half_a_meter() {
    let (docs, eval) = closed_loop(&presets::two_site_drive(3, 0.10));
    println!("{}", eval.to_table());
    assert_eq!(docs.len(), 2);
    assert!(eval.mean.unwrap() <= 0.5);
}

#[test]
fn same_seed_same_streams() {
    let a = generate_streams(&presets::two_site_drive(9, 0.1)).unwrap();
    let b = generate_streams(&presets::two_site_drive(9, 0.1)).unwrap();
    assert_eq!(a, b);
    let c = generate_streams(&presets::two_site_drive(10, 0.1)).unwrap();
    assert_ne!(a.lidar, c.lidar);
}

#[test]
fn blind_detector_forms_no_sites() {
    let mut sc = presets::two_site_drive(1, 0.1);
    sc.detector.near_probability = 0.0;
    sc.detector.far_probability = 0.0;
    let streams = generate_streams(&sc).unwrap();
    assert!(streams.detections.is_empty());
    let stats = run_replay(&EngineConfig::default(), &streams.events(), None, |_| Ok(())).unwrap();
    assert_eq!(stats.summary.count, 0);
}
