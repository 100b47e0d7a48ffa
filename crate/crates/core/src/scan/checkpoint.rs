//! Append-only checkpoint files.
//!
//! ```text
//! QCHAOS-CHECKPOINT 1
//! spec-sha256 <64 hex>
//! spec-bytes <n>
//! <n bytes of spec TOML>
//! <cell> ok <count> <f64 bits as 16 hex>... <crc>
//! <cell> err <message> <crc>
//! ```
//!
//! `<crc>` is the first 8 hex digits of the SHA-256 of everything before it
//! on the line (without the separating space). A final line with no newline
//! is a torn write and is dropped on load.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;

use super::spec::{hex_digest, ScanSpec};
use super::CellOutcome;
use crate::error::{Error, Result};

pub const MAGIC: &str = "QCHAOS-CHECKPOINT 1";

/// Parsed checkpoint contents.
#[derive(Debug)]
pub struct Checkpoint {
    pub spec: ScanSpec,
    pub spec_hash: String,
    pub outcomes: Vec<Option<CellOutcome>>,
    /// Byte length of the intact prefix, torn tail excluded.
    pub valid_len: u64,
}

pub fn header(spec: &ScanSpec) -> Result<String> {
    let text = spec.to_toml()?;
    Ok(format!(
        "{MAGIC}\nspec-sha256 {}\nspec-bytes {}\n{text}",
        hex_digest(text.as_bytes()),
        text.len()
    ))
}

pub fn encode_record(cell: usize, outcome: &CellOutcome) -> String {
    let body = match outcome {
        Ok(values) => {
            let mut body = format!("{cell} ok {}", values.len());
            for v in values {
                body.push_str(&format!(" {:016x}", v.to_bits()));
            }
            body
        }
        Err(msg) => {
            let flat: String = msg.chars().map(|c| if c.is_control() { ' ' } else { c }).collect();
            format!("{cell} err {flat}")
        }
    };
    let crc = &hex_digest(body.as_bytes())[..8];
    format!("{body} {crc}\n")
}

fn decode_record(line: &str, cells: usize) -> std::result::Result<(usize, CellOutcome), (String, String)> {
    let first = line.split(' ').next().unwrap_or("");
    let label = match first.parse::<usize>() {
        Ok(i) => i.to_string(),
        Err(_) => format!("`{first}`"),
    };
    let fail = |reason: &str| (label.clone(), reason.to_string());
    let (body, crc) = line.rsplit_once(' ').ok_or_else(|| fail("missing checksum"))?;
    if crc != &hex_digest(body.as_bytes())[..8] {
        return Err(fail("checksum mismatch"));
    }
    let mut parts = body.splitn(3, ' ');
    let cell: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| fail("bad cell index"))?;
    if cell >= cells {
        return Err(fail("cell index out of range"));
    }
    let status = parts.next().ok_or_else(|| fail("missing status"))?;
    let rest = parts.next().unwrap_or("");
    match status {
        "ok" => {
            let mut fields = rest.split(' ');
            let count: usize = fields
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| fail("bad value count"))?;
            let values = fields
                .map(|h| u64::from_str_radix(h, 16).map(f64::from_bits))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| fail("bad value encoding"))?;
            if values.len() != count {
                return Err(fail("value count mismatch"));
            }
            Ok((cell, Ok(values)))
        }
        "err" => Ok((cell, Err(rest.to_string()))),
        _ => Err(fail("unknown status")),
    }
}

fn take_line<'a>(text: &'a str, pos: &mut usize) -> Option<&'a str> {
    let rest = &text[*pos..];
    let end = rest.find('\n')?;
    *pos += end + 1;
    Some(&rest[..end])
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let mut raw = Vec::new();
    File::open(path)?.read_to_end(&mut raw)?;
    let text = String::from_utf8(raw).map_err(|_| Error::Checkpoint("not valid UTF-8".into()))?;
    let bad_header = |what: &str| Error::Checkpoint(format!("{}: {what}", path.display()));

    let mut pos = 0;
    if take_line(&text, &mut pos) != Some(MAGIC) {
        return Err(bad_header("missing magic line"));
    }
    let spec_hash = take_line(&text, &mut pos)
        .and_then(|l| l.strip_prefix("spec-sha256 "))
        .ok_or_else(|| bad_header("missing spec hash"))?
        .to_string();
    let len: usize = take_line(&text, &mut pos)
        .and_then(|l| l.strip_prefix("spec-bytes "))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad_header("missing spec length"))?;
    let spec_text = text
        .get(pos..pos + len)
        .ok_or_else(|| bad_header("truncated spec section"))?;
    if hex_digest(spec_text.as_bytes()) != spec_hash {
        return Err(bad_header("embedded spec does not match its hash"));
    }
    let spec: ScanSpec = toml::from_str(spec_text).map_err(|e| bad_header(&e.to_string()))?;
    pos += len;

    let cells = spec.cell_count();
    let mut outcomes: Vec<Option<CellOutcome>> = vec![None; cells];
    let mut valid_len = pos;
    while let Some(line) = take_line(&text, &mut pos) {
        let (cell, outcome) = decode_record(line, cells)
            .map_err(|(cell, reason)| Error::CorruptRecord { cell, reason })?;
        if outcomes[cell].is_some() {
            return Err(Error::CorruptRecord {
                cell: cell.to_string(),
                reason: "duplicate record".into(),
            });
        }
        outcomes[cell] = Some(outcome);
        valid_len = pos;
    }
    Ok(Checkpoint {
        spec,
        spec_hash,
        outcomes,
        valid_len: valid_len as u64,
    })
}

/// Single writer appending records in cell order.
pub struct Writer {
    file: File,
}

impl Writer {
    pub fn create(path: &Path, spec: &ScanSpec) -> Result<Self> {
        let mut file = File::create(path)?;
        file.write_all(header(spec)?.as_bytes())?;
        file.sync_data()?;
        Ok(Writer { file })
    }

    /// Reopens for appending after dropping any torn tail.
    pub fn reopen(path: &Path, valid_len: u64) -> Result<Self> {
        let mut file = OpenOptions::new().write(true).open(path)?;
        file.set_len(valid_len)?;
        file.seek(SeekFrom::End(0))?;
        Ok(Writer { file })
    }

    pub fn append(&mut self, records: &[(usize, &CellOutcome)]) -> Result<()> {
        let mut buf = String::new();
        for (cell, outcome) in records {
            buf.push_str(&encode_record(*cell, outcome));
        }
        self.file.write_all(buf.as_bytes())?;
        self.file.sync_data()?;
        Ok(())
    }
}
