use fluidq_web::{busy_density_native, qstar_cdfs_native, scale_curve_native};

#[test]
fn scale_curve_pairs() {
    let v = scale_curve_native("brownian:c=0.5", 0.0, 2.0, 3).unwrap();
    assert_eq!(v.len(), 6);
    assert_eq!((v[0], v[1]), (0.0, 1.0));
    assert!((v[3] - 6.9185806204450937508).abs() < 1e-12);
    assert!(scale_curve_native("brownian:c=0.5", 0.0, -1.0, 3).is_err());
    assert!(scale_curve_native("nope", 0.0, 1.0, 3).is_err());
}

#[test]
fn cdfs_are_ordered_probabilities() {
    let v = qstar_cdfs_native("tempered_stable:phi=1,gamma=2,nu=0.5", 4.0, 9).unwrap();
    assert_eq!(v.len(), 27);
    for row in v.chunks(3) {
        assert!((0.0..=1.0).contains(&row[1]) && (0.0..=1.0).contains(&row[2]));
    }
    assert!(v.chunks(3).collect::<Vec<_>>().windows(2).all(|w| w[1][1] >= w[0][1]));
}

#[test]
fn densities_for_three_c() {
    let v = busy_density_native(&[0.2, 0.5, 0.8], 10.0, 21).unwrap();
    assert_eq!(v.len(), 20 * 4);
    assert!(v.chunks(4).all(|r| r[1..].iter().all(|d| *d > 0.0)));
    assert!(busy_density_native(&[1.0], 10.0, 21).is_err());
}
