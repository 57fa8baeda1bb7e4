use hetnet_web::{association_sweep, distance_pdf, monte_carlo_association};

#[test]
fn sweep_rows_sum_to_one() {
    let v = association_sweep(4.0, 1.0, 50.0, 5).unwrap_or_else(|_| panic!("sweep failed"));
    assert_eq!(v.len(), 20);
    for r in v.chunks(4) {
        assert!((r[1] + r[2] + r[3] - 1.0).abs() < 1e-9);
    }
    assert!((v[16] - 50.0).abs() < 1e-9);
}

#[test]
fn pdf_rows_cover_the_support() {
    let v = distance_pdf(2.0, 10.0, 4, "scell", 50).unwrap_or_else(|_| panic!("pdf failed"));
    assert_eq!(v.len(), 102);
    let dx = v[2];
    let mass: f64 = v.chunks(2).map(|r| r[1] * dx).sum();
    assert!((mass - 1.0).abs() < 0.02, "{mass}");
}

#[test]
fn monte_carlo_has_no_case3() {
    let v = monte_carlo_association(4.0, 10.0, 2_000, 1, 0.0).unwrap_or_else(|_| panic!("mc failed"));
    assert_eq!(v[2], 0.0);
    assert!((v[0] + v[1] + v[3] - 1.0).abs() < 1e-12);
}
