//! Secret-key text file.
//!
//! ```text
//! 4
//! 3 9 17 33
//! 11 2 3 7
//! 8 5 19 103
//! 201 203 119 150
//! 7 9 21 35
//! ```
//!
//! Line 1 is `m`, line 2 the `m` bytes of `IV`, lines 3..m+2 the rows of `K1`.

use std::fs;
use std::path::Path;

use crate::cipher::SecretKey;
use crate::error::{Error, Result};
use crate::modmat::{check_block_size, ByteMatrix, ByteVector};

pub(crate) fn parse_bytes(line: &str, expected: usize, what: &str) -> Result<Vec<u8>> {
    let values = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<u8>()
                .map_err(|_| Error::Parse(format!("{what}: {tok:?} is not a byte in 0..=255")))
        })
        .collect::<Result<Vec<u8>>>()?;
    if values.len() != expected {
        return Err(Error::Parse(format!(
            "{what}: expected {expected} values, found {}",
            values.len()
        )));
    }
    Ok(values)
}

pub(crate) fn parse_block_size(line: Option<&str>) -> Result<usize> {
    let line = line.ok_or_else(|| Error::Parse("missing block size line".into()))?;
    let m = line
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("bad block size {:?}", line.trim())))?;
    check_block_size(m)?;
    Ok(m)
}

pub fn parse_key(text: &str) -> Result<SecretKey> {
    let mut lines = text.lines();
    let m = parse_block_size(lines.next())?;
    let iv_line = lines
        .next()
        .ok_or_else(|| Error::Parse("missing IV line".into()))?;
    let iv = ByteVector::new(parse_bytes(iv_line, m, "IV")?)?;
    let mut rows = Vec::with_capacity(m);
    for r in 0..m {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing K1 row {}", r + 1)))?;
        rows.push(parse_bytes(line, m, &format!("K1 row {}", r + 1))?);
    }
    if let Some(extra) = lines.find(|l| !l.trim().is_empty()) {
        return Err(Error::Parse(format!("unexpected trailing line {extra:?}")));
    }
    SecretKey::new(ByteMatrix::from_rows(&rows)?, iv)
}

pub fn format_key(key: &SecretKey) -> String {
    format!("{}\n{}\n{}\n", key.m(), key.iv(), key.k1())
}

pub fn read_key(path: impl AsRef<Path>) -> Result<SecretKey> {
    parse_key(&fs::read_to_string(path)?)
}

pub fn write_key(key: &SecretKey, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_key(key))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE_KEY: &str = "4\n3 9 17 33\n11 2 3 7\n8 5 19 103\n201 203 119 150\n7 9 21 35\n";

    #[test]
    fn parses_and_formats() {
        let key = parse_key(SAMPLE_KEY).unwrap();
        assert_eq!(key.m(), 4);
        assert_eq!(key.iv().as_slice(), &[3, 9, 17, 33]);
        assert_eq!(key.k1().get(2, 0), 201);
        assert_eq!(format_key(&key), SAMPLE_KEY);
        assert!(key.validate().is_valid());
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "0\n\n",
            "17\n",
            "2\n1 1\n1 0\n",
            "2\n1 256\n1 0\n0 1\n",
            "2\n1 1 1\n1 0\n0 1\n",
            "2\n1 1\n1 0\n0 -1\n",
            "2\n1 1\n1 0\n0 1\n5 5\n",
        ] {
            assert!(parse_key(bad).is_err(), "{bad:?}");
        }
        assert!(parse_key("1\n3\n1\n\n\n").is_ok());
    }
}
