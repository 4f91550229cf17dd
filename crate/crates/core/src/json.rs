//! Pretty JSON with every float written to 17 significant digits, so
//! reports round-trip exactly and compare byte-for-byte across runs.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

struct FixedFloats<F>(F);

impl<F: Formatter> Formatter for FixedFloats<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// `d.dddddddddddddddde±x` with 17 significant digits; non-finite values
/// become `null`.
pub fn format_f64(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else {
        "null".to_string()
    }
}

pub fn to_string_pretty<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    write_with(value, FixedFloats(PrettyFormatter::new()))
}

/// Single-line variant for JSON-lines output.
pub fn to_string_line<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    write_with(value, FixedFloats(CompactFormatter))
}

fn write_with<T: Serialize + ?Sized, F: Formatter>(value: &T, formatter: F) -> serde_json::Result<String> {
    let mut out = Vec::with_capacity(4096);
    let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_digits() {
        assert_eq!(format_f64(6.0), "6.0000000000000000e0");
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(f64::NAN), "null");
        let s = to_string_pretty(&serde_json::json!({"a": 1.5, "b": [2, 0.25]})).unwrap();
        assert!(s.contains("1.5000000000000000e0"));
        assert!(s.contains("2.5000000000000000e-1"));
        assert!(s.contains("\n"));
    }

    #[test]
    fn fixed_text_round_trips() {
        for v in [std::f64::consts::PI, 1e-300, 123456.789, -0.0] {
            let back: f64 = format_f64(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn line_form_is_compact() {
        #[derive(Serialize)]
        struct Row {
            id: &'static str,
            x: f64,
            n: u32,
        }
        let line = to_string_line(&Row {
            id: "C61",
            x: 2.0,
            n: 3,
        })
        .unwrap();
        assert_eq!(line, r#"{"id":"C61","x":2.0000000000000000e0,"n":3}"#);
    }
}
