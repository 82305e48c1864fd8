use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliResult, Failure};

/// Headerless numeric CSV. Malformed cells are data errors naming the row.
pub fn read_csv(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let file = fs::File::open(path).map_err(|e| Failure::config(format!("cannot open data {}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(file);
    let mut rows = Vec::new();
    let mut width = None;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Failure::data(format!("row {}: {e}", i + 1)))?;
        let row = rec
            .iter()
            .map(|c| c.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Failure::data(format!("row {}: non-numeric value", i + 1)))?;
        if *width.get_or_insert(row.len()) != row.len() {
            return Err(Failure::data(format!("row {} has {} columns, expected {}", i + 1, row.len(), width.unwrap())));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Failure::data(format!("{} contains no rows", path.display())));
    }
    Ok(rows)
}

pub fn csv_string(rows: &[Vec<f64>]) -> String {
    let mut s = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Failure::io(path, e))?;
    f.write_all(contents).map_err(|e| Failure::io(path, e))
}

pub fn json_string<T: Serialize>(value: &T) -> String {
    // through Value so map keys come out sorted
    let v = serde_json::to_value(value).expect("serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

pub fn read_text(path: &Path, what: &str) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::config(format!("cannot read {what} {}: {e}", path.display())))
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| Failure::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
