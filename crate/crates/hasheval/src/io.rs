//! Dataset file formats.
//!
//! Two interchangeable encodings of a [`LabeledCodeSet`]:
//!
//! * **Text**: one record per line, `<label>[,<superlabel>] <bitstring>`,
//!   where the bitstring is `k` characters of '0'/'1' and the leftmost
//!   character is bit index 0. Blank lines and lines starting with `#`
//!   are ignored. All records in a file share one bitstring length.
//! * **Binary**: magic `HMC1`, then `k` as u16 LE, record count as u64 LE
//!   and a flags byte (bit 0 = superlabels present). Each record is a u32
//!   LE label, an optional u32 LE superlabel, and ceil(k/8) code bytes
//!   packed least-significant-bit first (bit 0 = LSB of byte 0). Padding
//!   bits beyond `k` must be zero and the file length must match the
//!   header exactly.
//!
//! Bit order is fixed in both formats; there is no autodetection of
//! conventions, only of which of the two formats a file is in (by magic).

use std::fs;
use std::path::Path;

use crate::code::{BinaryCode, MAX_WIDTH};
use crate::dataset::{Entry, LabeledCodeSet};
use crate::error::{Error, Result};

/// Magic bytes introducing the binary dataset format.
pub const BINARY_MAGIC: [u8; 4] = *b"HMC1";

const HEADER_LEN: usize = 15;

fn text_err(origin: &str, line: usize, reason: impl Into<String>) -> Error {
    Error::TextParse {
        origin: origin.to_string(),
        line,
        reason: reason.into(),
    }
}

/// Parses the text format. `origin` names the source in diagnostics.
pub fn parse_text(src: &str, origin: &str) -> Result<LabeledCodeSet> {
    let mut width: Option<usize> = None;
    let mut superlabels: Option<bool> = None;
    let mut entries = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let labels = fields.next().expect("non-empty line has a first field");
        let bits = fields.next().ok_or_else(|| {
            text_err(
                origin,
                lineno,
                "expected '<label>[,<superlabel>] <bitstring>'",
            )
        })?;
        if let Some(extra) = fields.next() {
            return Err(text_err(
                origin,
                lineno,
                format!("unexpected trailing field {:?}", extra),
            ));
        }

        let (label, superlabel) = match labels.split_once(',') {
            None => {
                let label = labels
                    .parse::<u32>()
                    .map_err(|_| text_err(origin, lineno, format!("invalid label {:?}", labels)))?;
                (label, None)
            }
            Some((l, s)) => {
                let label = l
                    .parse::<u32>()
                    .map_err(|_| text_err(origin, lineno, format!("invalid label {:?}", l)))?;
                let superlabel = s
                    .parse::<u32>()
                    .map_err(|_| text_err(origin, lineno, format!("invalid superlabel {:?}", s)))?;
                (label, Some(superlabel))
            }
        };

        match superlabels {
            None => superlabels = Some(superlabel.is_some()),
            Some(has) if has != superlabel.is_some() => {
                return Err(text_err(
                    origin,
                    lineno,
                    "either every record carries a superlabel or none may",
                ))
            }
            _ => {}
        }

        match width {
            None => width = Some(bits.len()),
            Some(w) if w != bits.len() => {
                return Err(text_err(
                    origin,
                    lineno,
                    format!("bitstring length {} does not match {}", bits.len(), w),
                ))
            }
            _ => {}
        }

        let code = BinaryCode::from_bitstring(bits)
            .map_err(|e| text_err(origin, lineno, e.to_string()))?;
        entries.push(Entry::new(code, label, superlabel));
    }

    let width = width.ok_or_else(|| text_err(origin, 0, "no records in file"))?;
    LabeledCodeSet::new(width, entries)
}

/// Renders a dataset in the text format.
pub fn to_text(db: &LabeledCodeSet) -> String {
    let mut out = String::new();
    for e in db.entries() {
        match e.superlabel() {
            Some(s) => out.push_str(&format!("{},{} {}\n", e.label(), s, e.code())),
            None => out.push_str(&format!("{} {}\n", e.label(), e.code())),
        }
    }
    out
}

fn bin_err(origin: &str, offset: usize, reason: impl Into<String>) -> Error {
    Error::BinaryParse {
        origin: origin.to_string(),
        offset,
        reason: reason.into(),
    }
}

/// Parses the binary format, validating the length equation, flag bits
/// and zero padding exactly.
pub fn parse_binary(bytes: &[u8], origin: &str) -> Result<LabeledCodeSet> {
    if bytes.len() < HEADER_LEN {
        return Err(bin_err(origin, 0, "file shorter than the 15-byte header"));
    }
    if bytes[0..4] != BINARY_MAGIC {
        return Err(bin_err(origin, 0, "bad magic, expected \"HMC1\""));
    }
    let width = u16::from_le_bytes([bytes[4], bytes[5]]) as usize;
    if width == 0 || width > MAX_WIDTH {
        return Err(bin_err(
            origin,
            4,
            format!("width {} out of range 1..=256", width),
        ));
    }
    let count = u64::from_le_bytes(bytes[6..14].try_into().expect("8 bytes"));
    let flags = bytes[14];
    if flags & !1 != 0 {
        return Err(bin_err(
            origin,
            14,
            format!("unknown flag bits {:#04x}", flags),
        ));
    }
    let has_super = flags & 1 == 1;
    let code_len = width.div_ceil(8);
    let record_len = 4 + if has_super { 4 } else { 0 } + code_len;
    let expected = HEADER_LEN as u128 + count as u128 * record_len as u128;
    if expected != bytes.len() as u128 {
        return Err(bin_err(
            origin,
            bytes.len().min(HEADER_LEN),
            format!(
                "file length {} does not match header (expected {} for {} records)",
                bytes.len(),
                expected,
                count
            ),
        ));
    }

    let mut entries = Vec::with_capacity(count as usize);
    let mut at = HEADER_LEN;
    for _ in 0..count {
        let label = u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
        at += 4;
        let superlabel = if has_super {
            let s = u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
            at += 4;
            Some(s)
        } else {
            None
        };
        let code = BinaryCode::from_le_bytes(width, &bytes[at..at + code_len])
            .map_err(|e| bin_err(origin, at, e.to_string()))?;
        at += code_len;
        entries.push(Entry::new(code, label, superlabel));
    }
    LabeledCodeSet::new(width, entries)
}

/// Serializes a dataset in the binary format.
pub fn to_binary(db: &LabeledCodeSet) -> Vec<u8> {
    let code_len = db.width().div_ceil(8);
    let record_len = 4 + if db.has_superlabels() { 4 } else { 0 } + code_len;
    let mut out = Vec::with_capacity(HEADER_LEN + db.len() * record_len);
    out.extend_from_slice(&BINARY_MAGIC);
    out.extend_from_slice(&(db.width() as u16).to_le_bytes());
    out.extend_from_slice(&(db.len() as u64).to_le_bytes());
    out.push(if db.has_superlabels() { 1 } else { 0 });
    for e in db.entries() {
        out.extend_from_slice(&e.label().to_le_bytes());
        if let Some(s) = e.superlabel() {
            out.extend_from_slice(&s.to_le_bytes());
        }
        out.extend_from_slice(&e.code().to_le_bytes());
    }
    out
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads a dataset from a file, detecting the format by magic bytes.
pub fn read_dataset(path: &Path) -> Result<LabeledCodeSet> {
    let bytes = read_file(path)?;
    let origin = path.display().to_string();
    if bytes.starts_with(&BINARY_MAGIC) {
        parse_binary(&bytes, &origin)
    } else {
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| text_err(&origin, 0, format!("not valid UTF-8: {}", e)))?;
        parse_text(text, &origin)
    }
}

/// Writes a dataset in the binary format.
pub fn write_binary_file(db: &LabeledCodeSet, path: &Path) -> Result<()> {
    fs::write(path, to_binary(db)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes a dataset in the text format.
pub fn write_text_file(db: &LabeledCodeSet, path: &Path) -> Result<()> {
    fs::write(path, to_text(db)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# comment\n0 0110\n\n1,7 1111\n";

    #[test]
    fn text_rejects_mixed_superlabels() {
        assert!(matches!(
            parse_text(SAMPLE, "sample"),
            Err(Error::TextParse { line: 4, .. })
        ));
    }

    #[test]
    fn text_parses_comments_and_labels() {
        let db = parse_text("# c\n0 0110\n1 1111\n", "sample").unwrap();
        assert_eq!(db.len(), 2);
        assert_eq!(db.width(), 4);
        assert!(!db.has_superlabels());
        assert_eq!(db.get(0).unwrap().label(), 0);
        assert_eq!(db.get(1).unwrap().code().to_string(), "1111");

        let with_super = parse_text("0,1 01\n2,1 10\n", "sample").unwrap();
        assert!(with_super.has_superlabels());
        assert_eq!(with_super.get(1).unwrap().superlabel(), Some(1));
    }

    #[test]
    fn text_diagnoses_line_numbers() {
        let err = parse_text("0 0110\n1 011\n", "db.txt").unwrap_err();
        assert_eq!(
            err.to_string(),
            "db.txt:2: bitstring length 3 does not match 4"
        );
        assert!(matches!(
            parse_text("", "db.txt"),
            Err(Error::TextParse { line: 0, .. })
        ));
        assert!(matches!(
            parse_text("x 0110\n", "db.txt"),
            Err(Error::TextParse { line: 1, .. })
        ));
        assert!(matches!(
            parse_text("0 0120\n", "db.txt"),
            Err(Error::TextParse { line: 1, .. })
        ));
        assert!(matches!(
            parse_text("0 0110 junk\n", "db.txt"),
            Err(Error::TextParse { line: 1, .. })
        ));
    }

    #[test]
    fn binary_round_trip() {
        let db = parse_text("0,1 011010101\n3,2 111110000\n", "t").unwrap();
        let bytes = to_binary(&db);
        // header + 2 * (4 + 4 + 2)
        assert_eq!(bytes.len(), 15 + 2 * 10);
        let back = parse_binary(&bytes, "bin").unwrap();
        assert_eq!(to_text(&back), to_text(&db));
    }

    #[test]
    fn binary_rejects_corruption() {
        let db = parse_text("0 0110\n", "t").unwrap();
        let good = to_binary(&db);

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            parse_binary(&bad_magic, "bin"),
            Err(Error::BinaryParse { offset: 0, .. })
        ));

        let truncated = &good[..good.len() - 1];
        assert!(parse_binary(truncated, "bin").is_err());

        let mut bad_flags = good.clone();
        bad_flags[14] = 0x82;
        assert!(parse_binary(&bad_flags, "bin").is_err());

        let mut bad_width = good.clone();
        bad_width[4] = 0;
        bad_width[5] = 0;
        assert!(parse_binary(&bad_width, "bin").is_err());

        // nonzero padding bits beyond the width
        let mut bad_padding = good.clone();
        let last = bad_padding.len() - 1;
        bad_padding[last] |= 0b1000_0000;
        assert!(parse_binary(&bad_padding, "bin").is_err());

        assert!(parse_binary(&good[..10], "bin").is_err());
    }

    #[test]
    fn width_256_round_trips() {
        let line = format!("0 {}\n", "10".repeat(128));
        let db = parse_text(&line, "t").unwrap();
        assert_eq!(db.width(), 256);
        let back = parse_binary(&to_binary(&db), "bin").unwrap();
        assert_eq!(to_text(&back), line);
    }
}
