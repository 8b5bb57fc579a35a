//! Bit-stable report emission.
//!
//! JSON is the canonical format: all floats are written with 17 significant
//! digits (enough to round-trip any `f64`), field order follows the struct
//! definitions, and repeated runs at any parallelism produce byte-identical
//! output apart from the `timestamp_unix_ms` field. CSV is a lossy flattening
//! of the per-degree scalars.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

/// JSON formatter that pins every float to 17 significant digits.
struct Json17;

impl Formatter for Json17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if value.is_finite() {
            // {:.16e} = one leading digit + 16 fractional = 17 significant.
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes any value to JSON with 17-significant-digit floats.
pub fn to_json_17<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Json17);
    value.serialize(&mut ser).expect("report serialization");
    String::from_utf8(out).expect("json is utf-8")
}

/// Pretty variant with the same float policy (used by `--format text` debug
/// dumps of nested witnesses).
pub fn to_json_17_pretty<T: Serialize>(value: &T) -> String {
    // Re-indent the compact form; serde_json's pretty formatter would need a
    // second Formatter impl for the same float policy.
    let compact = to_json_17(value);
    let parsed: serde_json::Value = serde_json::from_str(&compact).expect("valid json");
    serde_json::to_string_pretty(&parsed).expect("pretty json")
}

/// A CSV cell; numbers use the same 17-digit policy as JSON.
#[derive(Clone, Debug)]
pub enum Cell {
    Str(String),
    Num(f64),
    Int(i64),
    Empty,
}

impl Cell {
    pub fn opt_num(v: Option<f64>) -> Cell {
        v.map_or(Cell::Empty, Cell::Num)
    }

    fn render(&self) -> String {
        match self {
            Cell::Str(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
            Cell::Num(v) => {
                if v.is_finite() {
                    format!("{v:.16e}")
                } else {
                    String::new()
                }
            }
            Cell::Int(v) => v.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

/// Renders a header row plus data rows as CSV text.
pub fn to_csv(headers: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = headers.join(",");
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), headers.len());
        let line: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
