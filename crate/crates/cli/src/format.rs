/// Fixed-point with 12 significant digits. Zero prints with 12 decimals.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.12}", 0.0);
    }
    let exp = x.abs().log10().floor() as i32;
    // rounding can carry into the next decade
    let exp = if format!("{:.11e}", x.abs()).ends_with(&format!("e{}", exp + 1)) { exp + 1 } else { exp };
    let decimals = (11 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// [`sig12`] without trailing zeros.
pub fn sig12_trimmed(x: f64) -> String {
    let s = sig12(x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
