//! Floating-point text formatting shared by the CSV writers.

/// Formats `x` with 17 significant decimal digits, enough to reproduce the
/// exact binary value when parsed back with `str::parse::<f64>()`.
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::float17;

    #[test]
    fn round_trips_exactly() {
        let values = [
            0.0,
            1.0,
            -1.0,
            0.1,
            std::f64::consts::PI,
            1.0 / 3.0,
            6.02e23,
            5e-324,
            f64::MAX,
            f64::INFINITY,
        ];
        for &v in &values {
            let back: f64 = float17(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "value {v}");
        }
    }
}
