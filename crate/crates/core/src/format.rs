//! Number formatting shared by every text output.

/// Significant digits for probabilities.
pub const PROBABILITY_DIGITS: usize = 12;
/// Significant digits for matrix entries.
pub const MATRIX_DIGITS: usize = 15;
/// Significant digits for sensitivities.
pub const SENSITIVITY_DIGITS: usize = 10;

/// Formats `x` like C's `%.{digits}g`: `digits` significant digits, trailing
/// zeros removed, exponent notation outside `[1e-4, 10^digits)`.
pub fn sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // Rounding first gives the exponent of the printed value, e.g. 9.99..→10.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_owned()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
