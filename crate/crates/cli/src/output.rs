//! CSV and JSON emitters. CSV files carry `#` metadata lines, one header
//! row and LF line endings; floats are written with 17 significant digits.

use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Float formatting shared by every CSV writer.
pub fn float(x: f64) -> String {
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

/// JSON number, or the string `"inf"`/`"-inf"`/`"nan"` when not finite.
pub fn json_float(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None => Value::String(float(x)),
    }
}

pub fn json_floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| json_float(x)).collect())
}

enum Line {
    Comment(String),
    Record(Vec<String>),
}

/// A CSV document assembled in memory and written in one go.
#[derive(Default)]
pub struct CsvDoc {
    lines: Vec<Line>,
}

impl CsvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn comment(&mut self, text: impl Into<String>) -> &mut Self {
        self.lines.push(Line::Comment(text.into()));
        self
    }

    pub fn record<I, S>(&mut self, fields: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.lines
            .push(Line::Record(fields.into_iter().map(Into::into).collect()));
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for line in &self.lines {
            match line {
                Line::Comment(text) => {
                    out.extend_from_slice(b"# ");
                    out.extend_from_slice(text.as_bytes());
                    out.push(b'\n');
                }
                Line::Record(fields) => {
                    let mut w = csv::WriterBuilder::new()
                        .terminator(csv::Terminator::Any(b'\n'))
                        .from_writer(Vec::new());
                    w.write_record(fields).expect("writing to memory");
                    out.extend(w.into_inner().expect("writing to memory"));
                }
            }
        }
        out
    }
}

/// A command's result in both supported encodings.
pub struct Report {
    pub json: Value,
    pub csv: CsvDoc,
}

impl Report {
    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => {
                let mut bytes =
                    serde_json::to_vec_pretty(&self.json).expect("JSON values serialize");
                bytes.push(b'\n');
                bytes
            }
            Format::Csv => self.csv.to_bytes(),
        }
    }
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.1, 1.0 / 3.0, 0.886_812_345_678_9, 1e-300, 5e-324] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(f64::NEG_INFINITY), "-inf");
        assert_eq!(json_float(f64::INFINITY), Value::String("inf".into()));
    }

    #[test]
    fn csv_layout() {
        let mut doc = CsvDoc::new();
        doc.comment("seed=7")
            .record(["sigma", "p_win_a,b"])
            .record(["1", "2"]);
        assert_eq!(
            String::from_utf8(doc.to_bytes()).unwrap(),
            "# seed=7\nsigma,\"p_win_a,b\"\n1,2\n"
        );
    }
}
