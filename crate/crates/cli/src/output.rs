use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::Format;

/// Column-oriented result table rendered as CSV or JSON.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(cols: &[&str]) -> Self {
        Table {
            columns: cols.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(cell).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn render(&self, f: Format) -> Vec<u8> {
        match f {
            Format::Csv => self.to_csv().into_bytes(),
            Format::Json => {
                let mut v = serde_json::to_vec_pretty(self).expect("table serializes");
                v.push(b'\n');
                v
            }
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    }
}

/// f64 as a JSON number, or null for non-finite values.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Writes through a temporary file and a rename so readers never see a
/// partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<FileEntry> {
    let path = dir.join(name);
    let tmp: PathBuf = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &path)?;
    Ok(FileEntry {
        path: name.to_string(),
        sha256: sha256_hex(bytes),
        bytes: bytes.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_hash() {
        let mut t = Table::new(&["N", "v"]);
        t.push(vec![Value::from(4), num(0.5)]);
        t.push(vec![Value::from(8), num(f64::NAN)]);
        assert_eq!(t.to_csv(), "N,v\n4,0.5\n8,\n");
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
