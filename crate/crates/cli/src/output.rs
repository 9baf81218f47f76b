//! Report emission: JSON documents with 17-significant-digit floats
//! (round-trip exact) and CSV side files next to the output path.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

/// JSON formatter printing every float with 17 significant digits so
/// values round-trip exactly and output is byte-stable across runs.
struct SigFig17 {
    indent: usize,
}

impl SigFig17 {
    fn new() -> Self {
        SigFig17 { indent: 0 }
    }

    fn newline<W: ?Sized + Write>(&self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b"\n")?;
        for _ in 0..self.indent {
            writer.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl serde_json::ser::Formatter for SigFig17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.indent += 1;
        writer.write_all(b"[")
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.indent -= 1;
        writer.write_all(b"]")
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.indent += 1;
        writer.write_all(b"{")
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.indent -= 1;
        writer.write_all(b"}")
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        writer.write_all(b": ")
    }
}

/// Run metadata, excluded from comparisons via `--no-meta`.
#[derive(Serialize)]
pub struct Meta {
    pub generated_at: String,
    pub tool: &'static str,
    pub version: &'static str,
    pub argv: Vec<String>,
}

impl Meta {
    pub fn capture() -> Self {
        Meta {
            generated_at: chrono::Utc::now().to_rfc3339(),
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            argv: std::env::args().collect(),
        }
    }
}

#[derive(Serialize)]
pub struct Document<'a, T: Serialize> {
    pub command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
    pub report: &'a T,
}

pub fn render_json<T: Serialize>(doc: &Document<'_, T>) -> Result<String, String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFig17::new());
    doc.serialize(&mut ser).map_err(|e| format!("serialization failed: {e}"))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| format!("non-utf8 output: {e}"))
}

/// Writes the JSON document to `out` (stdout when `None`); returns the
/// base path for CSV side files, which exist only in file mode.
pub fn emit_json<T: Serialize>(
    command: &str,
    report: &T,
    out: Option<&Path>,
    no_meta: bool,
) -> Result<Option<PathBuf>, String> {
    let doc = Document {
        command,
        meta: if no_meta { None } else { Some(Meta::capture()) },
        report,
    };
    let text = render_json(&doc)?;
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            Ok(Some(path.to_path_buf()))
        }
        None => {
            io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| format!("cannot write to stdout: {e}"))?;
            Ok(None)
        }
    }
}

/// Writes a CSV side file next to the JSON report: `report.json` plus
/// suffix `ladder` becomes `report.ladder.csv`.
pub fn emit_csv(base: &Path, suffix: &str, contents: &str) -> Result<(), String> {
    let path = base.with_extension(format!("{suffix}.csv"));
    std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_significant_digits() {
        #[derive(Serialize)]
        struct S {
            v: f64,
        }
        let doc = Document { command: "t", meta: None, report: &S { v: 0.1 } };
        let text = render_json(&doc).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "got: {text}");
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["report"]["v"].as_f64().unwrap(), 0.1, "round-trips exactly");
    }

    #[test]
    fn no_meta_omits_the_field() {
        #[derive(Serialize)]
        struct S {
            v: i32,
        }
        let doc = Document { command: "t", meta: None, report: &S { v: 3 } };
        let text = render_json(&doc).unwrap();
        assert!(!text.contains("meta"));
    }
}
