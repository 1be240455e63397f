//! Equivalent-key text file.
//!
//! Line 1 is `m`, line 2 the period `p` (`0` for the dense form). Then come
//! `p` matrices (periodic) or one matrix per block (dense), each as `m`
//! lines of `m` bytes, separated by blank lines. In the dense form an
//! unresolved block is written as the zero matrix, which no valid key
//! stream contains.

use std::fs;
use std::path::Path;

use crate::attack::{EquivalentKey, KeyLayout};
use crate::error::{Error, Result};
use crate::io::keyfile::{parse_block_size, parse_bytes};
use crate::modmat::ByteMatrix;

pub fn format_equivalent_key(key: &EquivalentKey) -> String {
    let m = key.m();
    let zero = ByteMatrix::zero(m).expect("valid block size");
    let (period, matrices): (usize, Vec<&ByteMatrix>) = match key.layout() {
        KeyLayout::Periodic(ms) => (ms.len(), ms.iter().collect()),
        KeyLayout::Dense(blocks) => (
            0,
            blocks.iter().map(|b| b.as_ref().unwrap_or(&zero)).collect(),
        ),
    };
    let mut out = format!("{m}\n{period}\n");
    for (i, k) in matrices.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&k.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_equivalent_key(text: &str) -> Result<EquivalentKey> {
    let mut lines = text.lines();
    let m = parse_block_size(lines.next())?;
    let period_line = lines
        .next()
        .ok_or_else(|| Error::Parse("missing period line".into()))?;
    let period: usize = period_line
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad period {:?}", period_line.trim())))?;

    let mut matrices = Vec::new();
    let mut rows: Vec<Vec<u8>> = Vec::with_capacity(m);
    for line in lines {
        if line.trim().is_empty() {
            if !rows.is_empty() {
                return Err(Error::Parse(format!(
                    "matrix {} has {} rows, expected {m}",
                    matrices.len() + 1,
                    rows.len()
                )));
            }
            continue;
        }
        rows.push(parse_bytes(
            line,
            m,
            &format!("matrix {} row", matrices.len() + 1),
        )?);
        if rows.len() == m {
            matrices.push(ByteMatrix::from_rows(&rows)?);
            rows.clear();
        }
    }
    if !rows.is_empty() {
        return Err(Error::Parse("truncated final matrix".into()));
    }

    if period == 0 {
        let zero = ByteMatrix::zero(m)?;
        let blocks = matrices
            .into_iter()
            .map(|k| (k != zero).then_some(k))
            .collect();
        EquivalentKey::dense(m, blocks)
    } else {
        if matrices.len() != period {
            return Err(Error::Parse(format!(
                "period {period} but {} matrices",
                matrices.len()
            )));
        }
        EquivalentKey::periodic(m, matrices)
    }
}

pub fn read_equivalent_key(path: impl AsRef<Path>) -> Result<EquivalentKey> {
    parse_equivalent_key(&fs::read_to_string(path)?)
}

pub fn write_equivalent_key(key: &EquivalentKey, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_equivalent_key(key))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[[u8; 2]]) -> ByteMatrix {
        ByteMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn periodic_layout() {
        let key = EquivalentKey::periodic(2, vec![mat(&[[1, 0], [0, 1]]), mat(&[[1, 1], [1, 2]])])
            .unwrap();
        let text = format_equivalent_key(&key);
        assert_eq!(text, "2\n2\n1 0\n0 1\n\n1 1\n1 2\n");
        assert_eq!(parse_equivalent_key(&text).unwrap(), key);
    }

    #[test]
    fn dense_layout_with_gap() {
        let key = EquivalentKey::dense(2, vec![Some(mat(&[[3, 0], [0, 1]])), None]).unwrap();
        let text = format_equivalent_key(&key);
        assert_eq!(text, "2\n0\n3 0\n0 1\n\n0 0\n0 0\n");
        let back = parse_equivalent_key(&text).unwrap();
        assert_eq!(back, key);
        assert_eq!(back.unresolved(), vec![2]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_equivalent_key("2\n1\n1 0\n").is_err());
        assert!(parse_equivalent_key("2\n2\n1 0\n0 1\n").is_err());
        assert!(parse_equivalent_key("2\n1\n1 0\n\n0 1\n").is_err());
        assert!(parse_equivalent_key("2\nx\n").is_err());
        assert!(parse_equivalent_key("2\n1\n1 0 0\n0 1\n").is_err());
    }
}
