//! CSV/JSON emission. Floats use the shortest representation that parses
//! back to the same value.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::OutputFormat;

/// Serializes `rows` as a CSV table (header from the first row's field
/// names) or as JSON: a bare object when `single`, otherwise an array.
pub fn render<T: Serialize>(rows: &[T], format: OutputFormat, single: bool) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut buf);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            if single && rows.len() == 1 {
                serde_json::to_writer_pretty(&mut buf, &rows[0])?;
            } else {
                serde_json::to_writer_pretty(&mut buf, rows)?;
            }
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
            let mut f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            f.write_all(bytes)?;
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        x: f64,
        y: Option<f64>,
        s: String,
    }

    #[test]
    fn floats_round_trip() {
        let v = 1.0 + std::f64::consts::PI.powi(2) / 100.0;
        let rows = [Row {
            x: v,
            y: None,
            s: "a,b".into(),
        }];
        let text = String::from_utf8(render(&rows, OutputFormat::Csv, false).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y,s"));
        let data = lines.next().unwrap();
        let first: f64 = data.split(',').next().unwrap().parse().unwrap();
        assert_eq!(first.to_bits(), v.to_bits());
        assert!(data.ends_with(",,\"a,b\""), "{data}");

        let json = render(&rows, OutputFormat::Json, true).unwrap();
        let back: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(back["x"].as_f64().unwrap().to_bits(), v.to_bits());
        assert!(back["y"].is_null());
    }
}
