//! Binary PGM (P5) with maxval 255.
//!
//! Writers emit the canonical header `P5\n<w> <h>\n255\n`. A cipher image
//! whose last block spills past the raster carries the spilled bytes in a
//! header comment, `# hillcrack-tail <b1> <b2> …`, placed after the magic.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{CipherImage, GrayImage};

const TAIL_TAG: &str = "hillcrack-tail";

pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    encode(image, &[])
}

pub fn encode_cipher_pgm(cipher: &CipherImage) -> Vec<u8> {
    encode(&cipher.image, &cipher.tail)
}

fn encode(image: &GrayImage, tail: &[u8]) -> Vec<u8> {
    let mut header = String::from("P5\n");
    if !tail.is_empty() {
        header.push_str("# ");
        header.push_str(TAIL_TAG);
        for b in tail {
            header.push_str(&format!(" {b}"));
        }
        header.push('\n');
    }
    header.push_str(&format!("{} {}\n255\n", image.width(), image.height()));
    let mut out = header.into_bytes();
    out.extend_from_slice(image.pixels());
    out
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
    comments: Vec<String>,
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c == b'#' {
                let end = self.bytes[self.pos..]
                    .iter()
                    .position(|&b| b == b'\n' || b == b'\r')
                    .map_or(self.bytes.len(), |p| self.pos + p);
                let text = String::from_utf8_lossy(&self.bytes[self.pos + 1..end]);
                self.comments.push(text.trim().to_string());
                self.pos = end;
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse(format!("PGM header: missing {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::Parse(format!("PGM header: {what} out of range")))
    }
}

/// Parses a P5 buffer, returning the image and any tail bytes found in a
/// `hillcrack-tail` comment.
pub fn parse_cipher_pgm(bytes: &[u8]) -> Result<CipherImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::BadMagic);
    }
    let mut header = Header {
        bytes,
        pos: 2,
        comments: Vec::new(),
    };
    let width = header.number("width")? as usize;
    let height = header.number("height")? as usize;
    let maxval = header.number("maxval")?;
    if maxval != 255 {
        return Err(Error::BadMaxval(maxval));
    }
    // exactly one whitespace byte separates maxval from the payload
    match bytes.get(header.pos) {
        Some(c) if c.is_ascii_whitespace() => header.pos += 1,
        _ => {
            return Err(Error::TruncatedPayload {
                expected: width * height,
                found: 0,
            })
        }
    }
    let payload = &bytes[header.pos..];
    let expected = width * height;
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    let image = GrayImage::new(width, height, payload[..expected].to_vec())?;
    let mut tail = Vec::new();
    for comment in &header.comments {
        if let Some(rest) = comment.strip_prefix(TAIL_TAG) {
            for tok in rest.split_whitespace() {
                let b = tok
                    .parse::<u8>()
                    .map_err(|_| Error::Parse(format!("bad tail byte {tok:?}")))?;
                tail.push(b);
            }
        }
    }
    Ok(CipherImage::new(image, tail))
}

pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    parse_cipher_pgm(bytes).map(|c| c.image)
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    parse_pgm(&fs::read(path)?)
}

pub fn read_cipher_pgm(path: impl AsRef<Path>) -> Result<CipherImage> {
    parse_cipher_pgm(&fs::read(path)?)
}

pub fn write_pgm(image: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pgm(image))?;
    Ok(())
}

pub fn write_cipher_pgm(cipher: &CipherImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_cipher_pgm(cipher))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_file() {
        let img = parse_pgm(b"P5\n1 1\n255\n\x7f").unwrap();
        assert_eq!(img.pixels(), &[127]);
    }

    #[test]
    fn canonical_header() {
        let img = GrayImage::new(2, 1, vec![0, 255]).unwrap();
        let bytes = encode_pgm(&img);
        assert_eq!(&bytes[..11], b"P5\n2 1\n255\n");
        assert_eq!(bytes.len(), 13);
        assert_eq!(&bytes[11..], &[0, 255]);
    }

    #[test]
    fn comments_and_odd_whitespace() {
        let img = parse_pgm(b"P5 # made by hand\n# another\n 2\t2 # dims\n255\n\x01\x02\x03\x04")
            .unwrap();
        assert_eq!(img.width(), 2);
        assert_eq!(img.pixels(), &[1, 2, 3, 4]);
        // a payload byte that looks like whitespace is still payload
        let img = parse_pgm(b"P5\n1 1\n255\n\n").unwrap();
        assert_eq!(img.pixels(), b"\n");
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_pgm(b"P2\n1 1\n255\n0"),
            Err(Error::BadMagic)
        ));
        assert!(matches!(
            parse_pgm(b"P5\n1 1\n65535\n\x00\x00"),
            Err(Error::BadMaxval(65535))
        ));
        assert!(matches!(
            parse_pgm(b"P5\n2 2\n255\n\x00"),
            Err(Error::TruncatedPayload {
                expected: 4,
                found: 1
            })
        ));
        assert!(matches!(parse_pgm(b"P5\n2\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn tail_survives_round_trip() {
        let image = GrayImage::new(3, 1, vec![1, 2, 3]).unwrap();
        let cipher = CipherImage::new(image, vec![9, 200]);
        let bytes = encode_cipher_pgm(&cipher);
        assert_eq!(parse_cipher_pgm(&bytes).unwrap(), cipher);
        // plain readers see an ordinary image
        assert_eq!(parse_pgm(&bytes).unwrap(), cipher.image);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pgm");
        let img = GrayImage::new(3, 2, vec![0, 10, 20, 30, 40, 255]).unwrap();
        write_pgm(&img, &path).unwrap();
        assert_eq!(read_pgm(&path).unwrap(), img);
        let first = fs::read(&path).unwrap();
        write_pgm(&img, &path).unwrap();
        assert_eq!(fs::read(&path).unwrap(), first);
    }

    proptest! {
        #[test]
        fn encode_parse_identity(
            w in 1usize..20,
            h in 1usize..20,
            seed in any::<u64>(),
            tail in proptest::collection::vec(any::<u8>(), 0..16),
        ) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let image = GrayImage::random(w, h, &mut rng).unwrap();
            prop_assert_eq!(parse_pgm(&encode_pgm(&image)).unwrap(), image.clone());
            let cipher = CipherImage::new(image, tail);
            prop_assert_eq!(parse_cipher_pgm(&encode_cipher_pgm(&cipher)).unwrap(), cipher);
        }
    }
}
