use segpaint_web::{category_names, Scene};

#[test]
fn every_listed_category_builds() {
    for name in category_names().split(',') {
        let s = Scene::new(name, 2, 0).unwrap();
        let v = s.vertices();
        let n = v.len() / 3;
        assert_eq!(v.len() % 3, 0);
        assert!(s.faces().iter().all(|&i| (i as usize) < n));
        let offsets = s.stroke_offsets();
        assert_eq!(offsets[0], 0);
        assert_eq!(*offsets.last().unwrap() as usize * 3, s.stroke_points().len());
        assert!(offsets.windows(2).all(|w| w[0] < w[1]));
        assert!(s.scale() > 0.0);
    }
}

#[test]
fn unknown_category_is_an_error() {
    assert!(Scene::new("teapots", 0, 0).is_err());
}

#[test]
fn budget_caps_pose_count() {
    let s = Scene::new("cuboids", 1, 120).unwrap();
    assert_eq!(*s.stroke_offsets().last().unwrap(), 120);
    assert_eq!(s.stroke_offsets().len(), 7);
}

#[test]
fn paint_then_threshold() {
    let mut s = Scene::new("windows", 3, 200).unwrap();
    assert!(s.threshold().is_err());
    let t = s.paint(45.0, 0.5).unwrap();
    assert_eq!(t.len(), s.vertices().len() / 3);
    assert!(t.iter().any(|&v| v > 0.0));
    assert!(s.threshold().unwrap() > 0.0);
    assert!(s.paint(95.0, 0.5).is_err());
}

#[test]
fn zero_threshold_leaves_segments_apart() {
    let s = Scene::new("cuboids", 1, 120).unwrap();
    let l = s.link(4, 1, 0.0, 0.0, 0).unwrap();
    assert_eq!(l.stroke_count(), l.segment_count());
    assert!(l.coverage().is_nan());
}

#[test]
fn noiseless_linking_recovers_coverage() {
    let mut s = Scene::new("cuboids", 1, 300).unwrap();
    s.paint(45.0, 0.5).unwrap();
    let l = s.link(4, 1, 0.15, 0.0, 0).unwrap();
    assert!(l.stroke_count() < l.segment_count());
    assert!(l.coverage() > 90.0, "coverage {}", l.coverage());
}

#[test]
fn linking_is_deterministic_and_validated() {
    let s = Scene::new("containers", 0, 400).unwrap();
    let a = s.link(5, 2, 0.2, 0.01, 9).unwrap();
    let b = s.link(5, 2, 0.2, 0.01, 9).unwrap();
    assert_eq!(a.points(), b.points());
    assert_eq!(a.offsets(), b.offsets());
    assert!(s.link(1, 0, 0.1, 0.0, 0).is_err());
    assert!(s.link(4, 4, 0.1, 0.0, 0).is_err());
    assert!(s.link(4, 1, -1.0, 0.0, 0).is_err());
}
