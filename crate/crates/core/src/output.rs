//! Fixed-format numeric output shared by every file writer.

use std::io::Write;

use serde_json::Value;

/// Scientific notation with 12 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

/// Round to 12 significant digits (for JSON reports).
pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        sci(x).parse().unwrap_or(x)
    } else {
        x
    }
}

/// Write the `#`-prefixed config echo that opens every CSV file.
pub fn write_echo<W: Write>(mut w: W, echo: &Value) -> std::io::Result<()> {
    // serde_json::Map is ordered by key, so this is canonical
    writeln!(w, "# {}", serde_json::to_string(echo).expect("json value"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sci(1.0), "1.00000000000e0");
        assert_eq!(sci(-0.000123456789012345), "-1.23456789012e-4");
        assert_eq!(round12(0.1 + 0.2), 0.3);
    }

    #[test]
    fn echo_is_key_sorted() {
        let v = serde_json::json!({"b": 1, "a": {"z": 2, "c": 3}});
        let mut buf = Vec::new();
        write_echo(&mut buf, &v).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# {\"a\":{\"c\":3,\"z\":2},\"b\":1}\n");
    }
}
