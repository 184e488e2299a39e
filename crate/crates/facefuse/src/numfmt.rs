//! Decimal formatting with a fixed number of significant digits.

/// Formats `v` with `digits` significant digits in positional notation,
/// without exponent. Non-finite values use Rust's spelling (`inf`, `NaN`).
pub fn sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let mut exp = v.abs().log10().floor() as i32;
    // rounding can carry into the next decade, e.g. 0.9999999999 -> 1.000000000
    if format!("{:.*}", (digits as i32 - 1 - exp).max(0) as usize, v.abs())
        .parse::<f64>()
        .unwrap_or(0.0)
        >= 10f64.powi(exp + 1)
    {
        exp += 1;
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Scores and metrics are written with nine significant digits.
pub fn num(v: f64) -> String {
    sig(v, 9)
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "NA".to_string())
}

pub fn parse_opt(s: &str) -> Option<Option<f64>> {
    if s.trim() == "NA" {
        Some(None)
    } else {
        s.trim().parse().ok().map(Some)
    }
}
