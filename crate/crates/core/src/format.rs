//! Fixed-precision number formatting for reproducible text output.

use serde_json::Value;

/// Significant digits kept in every emitted number.
pub const SIG_DIGITS: usize = 12;

/// Rounds `x` to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Shortest decimal text of `x` rounded to 12 significant digits; NaN is
/// written as `nan`.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(x);
    if r == 0.0 {
        return "0".into();
    }
    if r.abs() < 1e-4 || r.abs() >= 1e15 {
        return format!("{r:e}");
    }
    format!("{r}")
}

/// Rounds every float inside a JSON value to 12 significant digits.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(f) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(f)) {
                        *n = r;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(66.98461395979741), "66.9846139598");
        assert_eq!(fmt_sig(-0.1 - 0.2), "-0.3");
        assert_eq!(fmt_sig(1.1102230246251565e-16), "1.11022302463e-16");
        assert_eq!(fmt_sig(2e20), "2e20");
        assert_eq!(fmt_sig(f64::NAN), "nan");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(round_sig(1.234_567_890_123_4e-7), 1.234_567_890_12e-7);
    }

    #[test]
    fn json_rounding() {
        let mut v = serde_json::json!({"a": [0.1 + 0.2, 3], "b": {"c": 2.0 / 3.0}});
        round_json(&mut v);
        assert_eq!(v.to_string(), r#"{"a":[0.3,3],"b":{"c":0.666666666667}}"#);
    }
}
