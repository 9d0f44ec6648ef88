//! Report envelope and 17-significant-digit JSON/CSV writers.

use std::io::{self, Write};

use harmstable::analysis::SampleRow;
use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

/// Writes every float as `{:.16e}` so doubles round-trip exactly.
struct Fixed17;

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
}

/// Pretty-printed, with the pretty formatter's layout and 17-digit floats.
struct Pretty17<'a> {
    inner: serde_json::ser::PrettyFormatter<'a>,
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.inner.$name(writer $(, $arg)*)
        })*
    };
}

impl Formatter for Pretty17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        Fixed17.write_f64(writer, value)
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        Fixed17.write_f32(writer, value)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<Vec<u8>> {
    let mut buf = Vec::new();
    let fmt = Pretty17 {
        inner: serde_json::ser::PrettyFormatter::new(),
    };
    value.serialize(&mut Serializer::with_formatter(&mut buf, fmt))?;
    buf.push(b'\n');
    Ok(buf)
}

#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub kind: &'a str,
    pub config: &'a C,
    pub results: R,
    pub runtime_seconds: Option<f64>,
    pub version: &'static str,
}

pub fn samples_csv(rows: &[SampleRow]) -> Vec<u8> {
    let mut out = b"replication,n,value\n".to_vec();
    for r in rows {
        writeln!(out, "{},{},{:.16e}", r.replication, r.n, r.value).unwrap();
    }
    out
}

/// Empirical distribution function pairs `(x, F(x))` at each sample point.
pub fn ecdf_csv(values: &[f64]) -> Vec<u8> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out = b"x,F\n".to_vec();
    for (i, x) in v.iter().enumerate() {
        writeln!(out, "{x:.16e},{:.16e}", (i + 1) as f64 / n).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let x = [0.1f64, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0];
        let text = to_json(&x).unwrap();
        let back: Vec<f64> = serde_json::from_slice(&text).unwrap();
        assert_eq!(back, x);
        let s = String::from_utf8(text).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
    }

    #[test]
    fn non_finite_becomes_null() {
        let text = to_json(&[f64::NAN]).unwrap();
        assert!(String::from_utf8(text).unwrap().contains("null"));
    }

    #[test]
    fn ecdf_steps() {
        let s = String::from_utf8(ecdf_csv(&[2.0, 1.0])).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "x,F");
        assert!(lines[1].starts_with("1.0000000000000000e0,5.0000000000000000e-1"));
        assert!(lines[2].ends_with("1.0000000000000000e0"));
    }
}
