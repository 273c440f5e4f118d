//! Output formatting and atomic file writes.
//!
//! Floats are printed with the shortest representation that round-trips,
//! so output is bit-reproducible and exact zeros print as `0`. Files are
//! written through a temporary in the same directory and renamed into
//! place, so readers never observe a half-written file.

use crate::solver::Field;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

/// Writes `bytes` to `path` atomically: a sibling temporary file is
/// written, synced, and renamed over the destination.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp_path = Path::new(&tmp);
    std::fs::write(tmp_path, bytes)?;
    match std::fs::rename(tmp_path, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = std::fs::remove_file(tmp_path);
            Err(e)
        }
    }
}

/// `x,y,u` rows, x varying slowest, matching the field layout.
pub fn field_csv(field: &Field) -> String {
    let mut out = String::with_capacity(16 * field.values.len());
    out.push_str("x,y,u\n");
    for (ix, x) in field.xs.iter().enumerate() {
        for (iy, y) in field.ys.iter().enumerate() {
            let _ = writeln!(out, "{x},{y},{}", field.value(ix, iy));
        }
    }
    out
}

/// `n,lambda` rows, modes numbered from 1.
pub fn spectrum_csv(eigenvalues: &[f64]) -> String {
    let mut out = String::from("n,lambda\n");
    for (n, lam) in eigenvalues.iter().enumerate() {
        let _ = writeln!(out, "{},{lam}", n + 1);
    }
    out
}

/// `y,Y_1..Y_N` rows: each mode as one column over the spatial nodes.
pub fn modes_csv(ys: &[f64], modes: &[Vec<f64>]) -> String {
    let mut out = String::from("y");
    for n in 1..=modes.len() {
        let _ = write!(out, ",Y_{n}");
    }
    out.push('\n');
    for (i, y) in ys.iter().enumerate() {
        let _ = write!(out, "{y}");
        for mode in modes {
            let _ = write!(out, ",{}", mode[i]);
        }
        out.push('\n');
    }
    out
}

/// Pretty JSON plus a trailing newline, written atomically.
pub fn write_json_pretty<T: serde::Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}
