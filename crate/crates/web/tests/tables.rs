use pds_web::{restoring_table, seat_pdf_table, spectrum_table};

#[test]
fn spectrum_columns_have_equal_length() {
    let t = spectrum_table(1.582e-4, 1.0, 64).unwrap();
    assert_eq!(t.len(), 128);
    assert!(t[64..].iter().all(|s| *s >= 0.0));
}

#[test]
fn restoring_curves_are_continuous() {
    let t = restoring_table(3.461, 0.036, 0.035, 0.634, 0.01, 0.2, 401).unwrap();
    let piecewise = &t[802..];
    let jumps = piecewise.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    assert!(jumps < 0.634 * 0.4 / 400.0 + 1e-12);
    assert_eq!(t[0], -t[400]);
}

#[test]
fn invalid_spring_is_rejected() {
    assert!(restoring_table(1.0, 0.1, 0.1, 0.1, 0.0, 1.0, 10).is_err());
}

#[test]
fn seat_pdf_is_normalized() {
    let t = seat_pdf_table(0.01, 0.021, 3.461).unwrap();
    let n = (t.len() - 1) / 2;
    let (r, p) = (&t[1..=n], &t[n + 1..]);
    let mass: f64 = p.iter().sum::<f64>() * (r[1] - r[0]);
    assert!((mass - 1.0).abs() < 1e-3);
    assert!(t[0] > 0.0 && t[0] < 0.1);
}
