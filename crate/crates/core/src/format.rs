//! Key files: newline-separated decimal text, or the `CRMG` binary layout
//!
//! ```text
//! b"CRMG" | version: u8 = 1 | flags: u8 = 0 | count: u64 LE | count x u64 LE
//! ```

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"CRMG";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 1 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FileFormat {
    #[default]
    Text,
    Binary,
}

/// Parses either format; binary is recognised by its magic bytes.
pub fn decode(bytes: &[u8]) -> Result<(Vec<u64>, FileFormat)> {
    if bytes.starts_with(MAGIC) {
        decode_binary(bytes).map(|k| (k, FileFormat::Binary))
    } else {
        decode_text(bytes).map(|k| (k, FileFormat::Text))
    }
}

fn decode_binary(bytes: &[u8]) -> Result<Vec<u64>> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format("truncated binary header".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::Format(format!("unsupported binary version {}", bytes[4])));
    }
    let count = u64::from_le_bytes(bytes[6..14].try_into().expect("8 bytes"));
    let payload = &bytes[HEADER_LEN..];
    if payload.len() as u64 != count.saturating_mul(8) {
        return Err(Error::Format(format!(
            "declared {count} keys but payload holds {} bytes",
            payload.len()
        )));
    }
    Ok(payload
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

fn decode_text(bytes: &[u8]) -> Result<Vec<u64>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(no, l)| {
            l.trim()
                .parse::<u64>()
                .map_err(|e| Error::Format(format!("line {}: {e}: {:?}", no + 1, l.trim())))
        })
        .collect()
}

pub fn encode<W: Write>(mut w: W, keys: &[u64], format: FileFormat) -> io::Result<()> {
    match format {
        FileFormat::Text => {
            for k in keys {
                writeln!(w, "{k}")?;
            }
        }
        FileFormat::Binary => {
            w.write_all(MAGIC)?;
            w.write_all(&[VERSION, 0])?;
            w.write_all(&(keys.len() as u64).to_le_bytes())?;
            for k in keys {
                w.write_all(&k.to_le_bytes())?;
            }
        }
    }
    w.flush()
}

/// Reads a key file, checking sortedness unless `validate` is false.
pub fn read_keys(path: &Path, validate: bool) -> Result<(Vec<u64>, FileFormat)> {
    let bytes = fs::read(path)?;
    let (keys, format) = decode(&bytes)?;
    if validate {
        if let Some(position) = (1..keys.len()).find(|&t| keys[t] < keys[t - 1]) {
            return Err(Error::Unsorted {
                input: path.display().to_string(),
                position,
            });
        }
    }
    Ok((keys, format))
}

pub fn write_keys(path: &Path, keys: &[u64], format: FileFormat) -> Result<()> {
    let file = fs::File::create(path)?;
    encode(BufWriter::new(file), keys, format)?;
    Ok(())
}
