use pbit_core::stats::{activation_grid, sigmoid_sweep};

#[test]
fn transfer_curve_is_monotone_up_to_noise() {
    let points = sigmoid_sweep(100_000, &activation_grid(), 31);
    assert_eq!(points.len(), 64);
    for w in points.windows(2) {
        assert!(w[1].mean >= w[0].mean - 0.005, "{:?} then {:?}", w[0], w[1]);
    }
    assert!(points[0].mean < 1e-3);
    assert!(points[63].mean > 1.0 - 1e-3);
}

#[test]
fn transfer_curve_tracks_tanh() {
    for p in sigmoid_sweep(100_000, &activation_grid(), 32) {
        let ideal = (p.input.tanh() + 1.0) / 2.0;
        assert!((p.mean - ideal).abs() < 0.01, "u = {}: {} vs {}", p.input, p.mean, ideal);
    }
}
