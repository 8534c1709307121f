//! Report serialization. Reals are written with at least 15 significant
//! digits (more when needed to round-trip), so reports are byte-stable and
//! lossless.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

/// Decimal text of `x` with at least 15 significant digits.
pub fn fmt_real(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.0".into();
    }
    // shortest round-trip mantissa, widened to 15 digits when shorter
    let shortest = format!("{x:e}");
    let mant = shortest.split_once('e').expect("exponent marker").0;
    let sig = mant.chars().filter(|c| c.is_ascii_digit()).count();
    let text = if sig >= 15 { shortest.clone() } else { format!("{x:.14e}") };
    let (mant, exp_str) = text.split_once('e').expect("exponent marker");
    let exp: i32 = exp_str.parse().expect("integer exponent");
    let negative = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if negative { "-" } else { "" };
    if (-5..=15).contains(&exp) {
        let point = exp + 1;
        if point <= 0 {
            format!("{sign}0.{}{}", "0".repeat((-point) as usize), digits)
        } else if (point as usize) >= digits.len() {
            format!("{sign}{}{}.0", digits, "0".repeat(point as usize - digits.len()))
        } else {
            let (a, b) = digits.split_at(point as usize);
            format!("{sign}{a}.{b}")
        }
    } else {
        let (a, b) = digits.split_at(1);
        format!("{sign}{a}.{b}e{exp}")
    }
}

struct RealFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for RealFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(fmt_real(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_key(w)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Pretty-printed JSON with full-precision reals and a trailing newline.
pub fn to_json_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let fmt = RealFormatter { inner: PrettyFormatter::with_indent(b"  ") };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser).expect("serializing a JSON value cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_carry_fifteen_digits() {
        assert_eq!(fmt_real(0.5), "0.500000000000000");
        assert_eq!(fmt_real(-2.0), "-2.00000000000000");
        assert_eq!(fmt_real(0.1 + 0.2), "0.30000000000000004");
        assert_eq!(fmt_real(1.5e-9), "1.50000000000000e-9");
        assert_eq!(fmt_real(123456.0), "123456.000000000");
        for x in [std::f64::consts::PI, 1e-7 / 3.0, 6.02e23, -0.000123] {
            assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_numbers_are_widened() {
        let v = serde_json::json!({"a": 0.25, "b": [1, 2.5], "c": f64::NAN});
        let s = to_json_string(&v);
        assert!(s.contains("0.250000000000000"));
        assert!(s.contains("2.50000000000000"));
        assert!(s.contains("\"b\": [\n    1,"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.25));
    }
}
