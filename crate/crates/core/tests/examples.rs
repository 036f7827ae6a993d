//! Runs every example at a small size.

#[path = "../examples/cold_plasma.rs"]
mod cold_plasma;
#[path = "../examples/charge_conservation.rs"]
mod charge_conservation;
#[path = "../examples/deck_roundtrip.rs"]
mod deck_roundtrip;
#[path = "../examples/gyro_orbit.rs"]
mod gyro_orbit;
#[path = "../examples/moving_window.rs"]
mod moving_window;
#[path = "../examples/parallel_determinism.rs"]
mod parallel_determinism;
#[path = "../examples/report_io.rs"]
mod report_io;
#[path = "../examples/tile_sort.rs"]
mod tile_sort;
#[path = "../examples/warm_plasma.rs"]
mod warm_plasma;
#[path = "../examples/weibel.rs"]
mod weibel;

#[test]
fn cold() {
    assert!(cold_plasma::demo(0.032, 20).unwrap());
}

#[test]
fn charge() {
    let (worst, segments) = charge_conservation::demo(2000).unwrap();
    assert!(worst <= 1e-12);
    assert!(segments.iter().all(|&n| n > 0));
}

#[test]
fn deck() {
    let text = deck_roundtrip::demo().unwrap();
    assert!(text.contains("[species \"beam\"]"));
}

#[test]
fn gyro() {
    assert!(gyro_orbit::demo().iter().all(|&o| o > 1.9));
}

#[test]
fn window() {
    let (shifts, counts) = moving_window::demo(30).unwrap();
    assert_eq!(shifts, 21);
    let n0 = counts[0] as f64;
    assert!(counts.iter().all(|&n| (n as f64 - n0).abs() <= 0.05 * n0));
}

#[test]
fn determinism() {
    let (identical, fast, naive) = parallel_determinism::demo(0.032, 10).unwrap();
    assert!(identical);
    assert!(fast < 1e-12 && naive < 1e-12);
}

#[test]
fn report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = report_io::demo(dir.path()).unwrap();
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn sort() {
    let (fixture, _) = tile_sort::demo(5000).unwrap();
    assert_eq!(fixture, 8);
}

#[test]
fn warm() {
    let drift = warm_plasma::demo(0.032, 20).unwrap();
    assert!(drift.abs() < 1e-3, "{drift}");
}

#[test]
fn weibel_reports() {
    let dir = tempfile::tempdir().unwrap();
    let series = weibel::demo(0.032, 20, dir.path().to_str()).unwrap();
    assert_eq!(series.iter().map(|s| s.0).collect::<Vec<_>>(), vec![0, 10, 20]);
    assert_eq!(series[0].1, 0.0);
    assert!(series[2].1 > 0.0);
    assert!(std::fs::read_dir(dir.path()).unwrap().count() >= 3 * 4);
}
