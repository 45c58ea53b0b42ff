//! Output formatting shared by every emitter: floats with 17 significant
//! digits, pretty JSON with stable field order, and CSV helpers.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// Written at the top of every report.
pub const SCHEMA_VERSION: &str = "finsler-lab/1";

/// Round-trippable decimal form with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Pretty JSON whose floats are printed by [`fmt_float`].
struct PreciseFormatter<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for PreciseFormatter<'_> {
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

    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Writes `# <schema>` then a CSV table with the given header.
pub fn write_csv<W: io::Write>(
    out: W,
    schema: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> io::Result<()> {
    let mut out = out;
    writeln!(out, "# {schema}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()
}

/// Parsed CSV table: schema line, header and raw rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub schema: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<Self, String> {
        let (first, body) = text.split_once('\n').ok_or("empty CSV")?;
        let schema = first
            .strip_prefix("# ")
            .ok_or("missing schema line")?
            .trim()
            .to_string();
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let header = r
            .headers()
            .map_err(|e| e.to_string())?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        Ok(Self { schema, header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn float(&self, row: usize, name: &str) -> Result<f64, String> {
        let c = self.column(name).ok_or_else(|| format!("no column `{name}`"))?;
        self.rows[row][c]
            .parse()
            .map_err(|e| format!("row {row}, column {name}: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_roundtrip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
        let j = to_json(&serde_json::json!({"a": 0.1, "b": [1, 2.0]}));
        assert!(j.contains("1.0000000000000001e-1"));
        let v: serde_json::Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v["a"], 0.1);
    }

    #[test]
    fn csv_roundtrip() {
        let mut buf = Vec::new();
        write_csv(&mut buf, "test/1", &["s", "x"], vec![vec![fmt_float(0.5), fmt_float(-1.25)]]).unwrap();
        let t = CsvTable::parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(t.schema, "test/1");
        assert_eq!(t.float(0, "x").unwrap(), -1.25);
    }
}
