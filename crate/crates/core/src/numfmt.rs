//! Plain-decimal formatting at a fixed number of significant digits, used
//! for price fixtures and return CSVs where exponent notation is not part
//! of the file grammar.

/// Format `x` with `digits` significant digits as a plain decimal string.
///
/// Zero prints as `0`; non-finite values fall back to their `Display` form.
pub fn format_sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("e-notation");
    let exp: i32 = exp.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digit_run: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    // Value is 0.<digit_run> * 10^(exp + 1).
    let point = exp + 1;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        for _ in 0..(-point) {
            out.push('0');
        }
        out.push_str(&digit_run);
    } else if point as usize >= digit_run.len() {
        out.push_str(&digit_run);
        for _ in 0..(point as usize - digit_run.len()) {
            out.push('0');
        }
    } else {
        out.push_str(&digit_run[..point as usize]);
        out.push('.');
        out.push_str(&digit_run[point as usize..]);
    }
    out
}
