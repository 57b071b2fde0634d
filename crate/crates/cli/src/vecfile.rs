//! Plain-text vector files: one float per line, shortest round-trip form.

use std::fs;
use std::io::Write;
use std::path::Path;

use krop::hrr::HyperVector;
use krop::{Error, Result};

pub fn read(path: &Path) -> Result<HyperVector> {
    let text = fs::read_to_string(path).map_err(|e| io(path, e))?;
    let malformed = |message: String| Error::Malformed {
        path: path.to_path_buf(),
        message,
    };
    let mut values = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let x: f64 = line
            .parse()
            .map_err(|e| malformed(format!("line {}: {e}", line_no + 1)))?;
        values.push(x);
    }
    HyperVector::new(values).map_err(|e| malformed(e.to_string()))
}

pub fn to_string(v: &HyperVector) -> String {
    let mut out = String::with_capacity(v.dim() * 24);
    for x in v.as_slice() {
        out.push_str(&format!("{x:?}\n"));
    }
    out
}

pub fn write(path: &Path, v: &HyperVector) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| io(path, e))?;
    file.write_all(to_string(v).as_bytes())
        .map_err(|e| io(path, e))
}

fn io(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}
