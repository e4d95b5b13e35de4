use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use invlab::radon::ImageGrid;
use serde::{Deserialize, Serialize};

/// Writes named columns with a header row, 17 significant digits and LF line
/// endings. All columns must have the same length.
pub fn emit_csv(path: &Path, columns: &[(&str, &[f64])]) -> io::Result<()> {
    let rows = columns.first().map_or(0, |c| c.1.len());
    if let Some((name, _)) = columns.iter().find(|c| c.1.len() != rows) {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, format!("column `{name}` has a different length")));
    }
    if columns.is_empty() {
        return std::fs::write(path, "\n");
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(columns.iter().map(|c| c.0))?;
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| format_float(c.1[i])))?;
    }
    w.flush()
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Reads a file written by [`emit_csv`] back into named columns.
pub fn read_csv(path: &Path) -> io::Result<Vec<(String, Vec<f64>)>> {
    let mut r = csv::ReaderBuilder::new().from_path(path)?;
    let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut cols: Vec<(String, Vec<f64>)> = headers.into_iter().map(|h| (h, Vec::new())).collect();
    for rec in r.records() {
        for (col, field) in cols.iter_mut().zip(rec?.iter()) {
            let v = field
                .parse()
                .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, format!("`{field}` is not a number")))?;
            col.1.push(v);
        }
    }
    Ok(cols)
}

/// Sidecar path `<stem>.scale.txt` next to `path`.
pub fn scale_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.scale.txt"))
}

/// Plain PGM (P2), maxval 65535, top row at the largest `x₂`. Values map
/// affinely from `[min, max]` to `[0, 65535]`; the map goes to the sidecar.
/// A constant image is written as zeros.
pub fn emit_pgm(path: &Path, img: &ImageGrid) -> io::Result<()> {
    let v = img.values();
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "image has non-finite values"));
    }
    let n = img.side();
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P2\n{n} {n}\n65535\n")?;
    for row in (0..n).rev() {
        let mut line = String::new();
        for &x in &v[row * n..(row + 1) * n] {
            let level = if hi > lo { ((x - lo) / (hi - lo) * 65535.0).round() as u32 } else { 0 };
            let token = level.to_string();
            // plain PGM lines stay within 70 characters
            if !line.is_empty() && line.len() + 1 + token.len() > 70 {
                writeln!(w, "{line}")?;
                line.clear();
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(&token);
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    std::fs::write(scale_path(path), format!("min {}\nmax {}\n", format_float(lo), format_float(hi)))
}

/// Record of one run, enough to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Every parameter after defaulting, as `(flag name, value)`.
    pub parameters: Vec<(String, String)>,
    pub seed: u64,
    pub out: PathBuf,
    pub duration_seconds: f64,
    pub artifacts: Vec<String>,
    /// `ok`, or the error that stopped the run.
    pub status: String,
}

impl RunManifest {
    /// Arguments that repeat the run, excluding `--out`.
    pub fn replay_args(&self) -> Vec<String> {
        let mut args = vec!["--seed".to_string(), self.seed.to_string(), self.subcommand.clone()];
        args.extend(self.parameters.iter().map(|(k, v)| format!("--{k}={v}")));
        args
    }

    pub fn write(&self, dir: &Path) -> io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        std::fs::write(dir.join("manifest.json"), text + "\n")
    }

    pub fn read(path: &Path) -> io::Result<Self> {
        serde_json::from_str(&std::fs::read_to_string(path)?).map_err(io::Error::other)
    }
}
