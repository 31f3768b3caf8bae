//! Output rounding shared by the CSV and JSON writers.

use serde_json::Value;

/// Significant digits kept in every printed number.
pub const SIG_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits. Negative zero becomes zero.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Shortest decimal that reads back as `round_sig(x)`; scientific notation
/// outside `[1e-4, 1e15)`.
pub fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    let a = r.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

/// Round every float in a JSON tree in place.
pub fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig(x))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}
