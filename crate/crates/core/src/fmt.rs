//! Shortest round-trip decimal formatting shared by every text output.

/// Shortest decimal string that parses back to exactly `v`.
///
/// Plain notation for moderate magnitudes, exponent notation otherwise so
/// tiny or huge values do not expand into hundreds of digits.
pub fn shortest(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
