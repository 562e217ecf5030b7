//! JSON and CSV artifacts. Floats are written with 17 significant digits so
//! every value re-parses to the same bits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{LotError, Result};
use crate::measure::DiscreteMeasure;

/// Pretty JSON with fixed-width scientific floats.
pub struct PreciseFormatter<'a>(PrettyFormatter<'a>);

impl Default for PreciseFormatter<'_> {
    fn default() -> Self {
        PreciseFormatter(PrettyFormatter::with_indent(b"  "))
    }
}

impl Formatter for PreciseFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", format_float(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// `{:.16e}` for finite values; non-finite values become `inf`, `-inf`, `nan`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter::default());
    value.serialize(&mut ser).map_err(|e| LotError::Solver(format!("serialisation failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Converts a serde_json error into a parse error that names the position.
pub fn json_error(field: &str, e: serde_json::Error) -> LotError {
    let msg = e.to_string();
    // serde_json appends " at line L column C"; keep the position up front
    let body = msg.rsplit_once(" at line ").map(|(m, _)| m).unwrap_or(&msg);
    if e.line() == 0 {
        return LotError::parse(field, body);
    }
    LotError::parse(field, format!("line {}, column {}: {body}", e.line(), e.column()))
}

pub fn parse_measure(text: &str) -> Result<DiscreteMeasure> {
    serde_json::from_str(text).map_err(|e| json_error("measure", e))
}

pub fn measure_to_json(m: &DiscreteMeasure) -> Result<String> {
    to_json(m)
}

/// Plain CSV of numeric rows under a fixed header.
pub fn write_csv<W: Write>(out: &mut W, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| format_float(*x)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_round_trips_bit_for_bit() {
        let m = DiscreteMeasure::new(vec![vec![0.1, 1.0 / 3.0], vec![2.0, -1e-300]], vec![0.3, 0.7]).unwrap();
        let text = measure_to_json(&m).unwrap();
        assert!(text.contains("3.3333333333333331e-1"));
        assert_eq!(parse_measure(&text).unwrap(), m);
    }

    #[test]
    fn invalid_measures_report_a_position() {
        let err = parse_measure("{\"points\": [[0,0]], \"weights\": [0.5]}").unwrap_err();
        assert!(err.to_string().contains("sum to 0.5"), "{err}");
        let err = parse_measure("{\n \"points\": [[0,0]],\n \"weights\": [1], \"extra\": 1}").unwrap_err();
        assert!(err.to_string().contains("line 3") && err.to_string().contains("extra"), "{err}");
        assert!(parse_measure("[").is_err());
    }

    #[test]
    fn csv_rows() {
        let mut out = Vec::new();
        write_csv(&mut out, &["s", "e"], &[vec![0.0, -1.5], vec![1.0, f64::NEG_INFINITY]]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "s,e\n0.0000000000000000e0,-1.5000000000000000e0\n1.0000000000000000e0,-inf\n");
    }
}
