//! Return-series CSV ingestion.
//!
//! One return per line. A line may carry a leading date or label field, which
//! is ignored. The first data line may be a header. Lines starting with `#` and
//! blank lines are skipped, so files written by `simulate` read back directly.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads a file, returning its text and checksum.
pub fn read_text(path: &Path) -> CliResult<(String, String)> {
    let bytes = fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let sum = sha256_hex(&bytes);
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::input(format!("{}: not valid UTF-8", path.display())))?;
    Ok((text, sum))
}

/// Reads returns from `path`, returning them with the file checksum.
pub fn read_returns(path: &Path) -> CliResult<(Vec<f64>, String)> {
    let (text, sum) = read_text(path)?;
    let x = parse_returns(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok((x, sum))
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    s.strip_prefix('"').and_then(|t| t.strip_suffix('"')).unwrap_or(s)
}

pub fn parse_returns(text: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    let mut width = None;
    let mut seen_line = false;
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(unquote).collect();
        let is_header = !seen_line;
        seen_line = true;
        if fields.len() > 2 {
            return Err(format!("line {line_no}: expected 1 or 2 fields, found {}", fields.len()));
        }
        let value = fields[fields.len() - 1];
        let parsed = value.parse::<f64>();
        if is_header && parsed.is_err() {
            width = Some(fields.len());
            continue;
        }
        if let Some(w) = width {
            if w != fields.len() {
                return Err(format!("line {line_no}: expected {w} fields, found {}", fields.len()));
            }
        }
        width = Some(fields.len());
        if fields.len() == 2 && fields[0].parse::<f64>().is_ok() {
            return Err(format!(
                "line {line_no}: two numeric fields '{line}' (the first column must be a date or label; decimal commas are not supported)"
            ));
        }
        match parsed {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => return Err(format!("line {line_no}: non-finite return '{value}'")),
            Err(_) => return Err(format!("line {line_no}: cannot parse '{value}' as a number")),
        }
    }
    if out.is_empty() {
        return Err(format!("line {}: no returns found", last + 1));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_column_with_header_and_blanks() {
        assert_eq!(parse_returns("ret\n0.1\n\n-0.2\n").unwrap(), [0.1, -0.2]);
        assert_eq!(parse_returns("0.1\n-2e-3\n").unwrap(), [0.1, -2e-3]);
    }

    #[test]
    fn date_column_is_ignored() {
        let text = "date,return\n2020-01-02,0.01\n\"2020-01-03\",\"-0.02\"\n";
        assert_eq!(parse_returns(text).unwrap(), [0.01, -0.02]);
        assert_eq!(parse_returns("2020-01-02,0.5\n").unwrap(), [0.5]);
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(parse_returns("# tool\n# seed = 1\nx\n1.5\n").unwrap(), [1.5]);
    }

    #[test]
    fn errors_name_the_line() {
        assert_eq!(parse_returns("").unwrap_err(), "line 1: no returns found");
        assert_eq!(parse_returns("x\n\n").unwrap_err(), "line 3: no returns found");
        assert!(parse_returns("0.1\nabc\n").unwrap_err().starts_with("line 2:"));
        assert!(parse_returns("0.1\n0.2,0.3\n").unwrap_err().starts_with("line 2:"));
        assert!(parse_returns("1,5\n").unwrap_err().contains("decimal commas"));
        assert!(parse_returns("a,b,c\n").unwrap_err().starts_with("line 1:"));
        assert!(parse_returns("0.1\nNaN\n").unwrap_err().starts_with("line 2:"));
    }

    #[test]
    fn checksum_is_standard_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
