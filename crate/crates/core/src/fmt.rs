//! Numeric text formatting shared by reports and CSV output.

/// Renders a float with 12 significant digits in scientific notation.
/// The representation is deterministic, parses back with `str::parse::<f64>`,
/// and keeps golden files stable.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Renders a vector as `[v0, v1, ...]` with 12 significant digits per entry.
pub fn sig12_vec(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| sig12(*v)).collect();
    format!("[{}]", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(0.25), "2.50000000000e-1");
        assert_eq!(sig12(0.0), "0.00000000000e0");
        assert_eq!(sig12(-1.0), "-1.00000000000e0");
        assert_eq!(sig12(1.0 / 3.0), "3.33333333333e-1");
    }

    #[test]
    fn parses_back_within_tolerance() {
        for &x in &[0.1, -123.456, 1e-9, 7.0 / 11.0, 3.5e8] {
            let parsed: f64 = sig12(x).parse().unwrap();
            assert!((parsed - x).abs() <= 1e-11 * x.abs().max(1.0));
        }
    }

    #[test]
    fn vector_form() {
        assert_eq!(
            sig12_vec(&[0.5, 0.0]),
            "[5.00000000000e-1, 0.00000000000e0]"
        );
    }
}
