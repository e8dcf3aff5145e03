//! CSV and binary output plus the sidecar metadata file.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::media::ScattererModel;

/// Shortest representation that reads back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// A table with a header row, written as CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join(","))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Real and imaginary parts as two cells.
pub fn complex_cells(v: Complex64) -> [String; 2] {
    [fmt_f64(v.re), fmt_f64(v.im)]
}

/// Binary dump layout, all little-endian:
///
/// | bytes | content |
/// |---|---|
/// | 8 | magic `SPHSCAT\0` |
/// | 4 | format version `u32` (1) |
/// | 8 | rows `u64` |
/// | 8 | columns `u64` |
/// | 8·rows·cols | `f64` values, row-major |
pub const BINARY_MAGIC: [u8; 8] = *b"SPHSCAT\0";

pub fn write_binary(path: &Path, rows: usize, cols: usize, data: &[f64]) -> Result<()> {
    if data.len() != rows * cols {
        return Err(Error::InvalidRequest(format!("{} values do not fill {rows}×{cols}", data.len())));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&BINARY_MAGIC)?;
    w.write_all(&1u32.to_le_bytes())?;
    w.write_all(&(rows as u64).to_le_bytes())?;
    w.write_all(&(cols as u64).to_le_bytes())?;
    for v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 28 || bytes[..8] != BINARY_MAGIC {
        return Err(Error::Config(format!("{} is not a binary dump", path.display())));
    }
    let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap()) as usize;
    let (rows, cols) = (u64_at(12), u64_at(20));
    let body = &bytes[28..];
    if body.len() != rows * cols * 8 {
        return Err(Error::Config("binary dump is truncated".into()));
    }
    let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((rows, cols, data))
}

/// SHA-256 of the model's canonical JSON.
pub fn model_hash(model: &ScattererModel) -> Result<String> {
    let json = serde_json::to_string(model)?;
    let digest = Sha256::digest(json.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub version: String,
    pub model_hash: String,
    pub epsilon: f64,
    pub n_used_min: usize,
    pub n_used_max: usize,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
}

impl Metadata {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

/// `out.csv` → `out.meta.json`.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    path.with_file_name(format!("{stem}.meta.json"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn float_format_roundtrips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert!(format!("{}", 1.0 / 3.0).trim_start_matches("0.").len() <= 17);
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["f", "re", "im"]);
        let [a, b] = complex_cells(Complex64::new(1.5, -2.0));
        t.push(vec!["100".into(), a, b]);
        assert_eq!(t.to_csv_string(), "f,re,im\n100,1.5,-2\n");
    }

    #[test]
    fn binary_roundtrip() {
        let dir = std::env::temp_dir().join(format!("sphscat-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("dump.bin");
        let data = vec![1.0, -2.0, 3.5, f64::MIN_POSITIVE, 0.0, 1e300];
        write_binary(&path, 2, 3, &data).unwrap();
        assert_eq!(read_binary(&path).unwrap(), (2, 3, data));
        assert!(write_binary(&path, 4, 4, &[0.0]).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = model_hash(&presets::s1(None).unwrap()).unwrap();
        assert_eq!(a, model_hash(&presets::s1(None).unwrap()).unwrap());
        assert_ne!(a, model_hash(&presets::s3(None).unwrap()).unwrap());
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("/tmp/ts.csv")), Path::new("/tmp/ts.meta.json"));
    }
}
