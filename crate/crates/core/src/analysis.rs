//! Sensitivity experiments: single-bit changes to `K1`, `IV` or the plain
//! image, and the bit-plane view of the resulting cipher difference.
//!
//! Flip coordinates are 1-based (`K1[1,2]` is row 1, column 2). Raster
//! positions reported in a [`DiffReport`] are 0-based pixel indices.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::cipher::{encrypt, encrypt_with, key_schedule_step, SecretKey};
use crate::error::{Error, Result};
use crate::image::{CipherImage, GrayImage};
use crate::io::pgm::write_pgm;
use crate::modmat::ByteMatrix;

/// Difference between two cipher images and its eight bit-planes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffReport {
    pub width: usize,
    pub height: usize,
    /// `(C̃[k] − C[k]) mod 256`
    pub diff: Vec<u8>,
    /// `|C̃[k] − C[k]|`
    pub abs_diff: Vec<u8>,
    /// `planes[b][k]` is bit `b` of `abs_diff[k]`.
    pub planes: [Vec<bool>; 8],
    pub per_plane_count: [usize; 8],
    pub affected_positions: Vec<usize>,
}

impl DiffReport {
    pub fn is_empty(&self) -> bool {
        self.affected_positions.is_empty()
    }

    /// Binary mask of plane `b` as a 0/255 image.
    pub fn plane_image(&self, b: usize) -> GrayImage {
        let pixels = self.planes[b]
            .iter()
            .map(|&set| if set { 255 } else { 0 })
            .collect();
        GrayImage::new(self.width, self.height, pixels).expect("shape from a valid image")
    }

    pub fn diff_image(&self) -> GrayImage {
        GrayImage::new(self.width, self.height, self.diff.clone()).expect("valid shape")
    }

    pub fn abs_diff_image(&self) -> GrayImage {
        GrayImage::new(self.width, self.height, self.abs_diff.clone()).expect("valid shape")
    }

    /// Count of affected positions per 1-based block offset (`index 0` is
    /// offset 1).
    pub fn offset_histogram(&self, m: usize) -> Vec<usize> {
        let mut hist = vec![0; m];
        for &k in &self.affected_positions {
            hist[k % m] += 1;
        }
        hist
    }

    /// 1-based indices of blocks containing a changed byte.
    pub fn affected_blocks(&self, m: usize) -> BTreeSet<usize> {
        self.affected_positions.iter().map(|k| k / m + 1).collect()
    }

    /// True iff `2^n` divides every nonzero difference, both signed and absolute.
    pub fn all_divisible_by_pow2(&self, n: u32) -> bool {
        let mask = (1u16 << n) - 1;
        self.diff
            .iter()
            .zip(&self.abs_diff)
            .all(|(&d, &a)| u16::from(d) & mask == 0 && u16::from(a) & mask == 0)
    }

    pub fn summary(&self, m: usize) -> String {
        let mut out = String::new();
        let total = self.diff.len();
        let _ = writeln!(out, "pixels: {total}");
        let _ = writeln!(out, "changed: {}", self.affected_positions.len());
        let _ = writeln!(out, "changed blocks: {}", self.affected_blocks(m).len());
        for (b, count) in self.per_plane_count.iter().enumerate() {
            let _ = writeln!(out, "plane {b}: {count}");
        }
        for (offset, count) in self.offset_histogram(m).iter().enumerate() {
            let _ = writeln!(out, "offset {}: {count}", offset + 1);
        }
        out
    }

    /// Writes `<stem>.diff.pgm`, `<stem>.absdiff.pgm`, `<stem>.plane<b>.pgm`
    /// for `b = 0..7`, and `<stem>.summary.txt`. Returns the written paths.
    pub fn write_files(&self, stem: &Path, m: usize) -> Result<Vec<PathBuf>> {
        let with_suffix = |suffix: &str| {
            let mut name = stem.as_os_str().to_owned();
            name.push(suffix);
            PathBuf::from(name)
        };
        let mut written = Vec::with_capacity(11);
        let path = with_suffix(".diff.pgm");
        write_pgm(&self.diff_image(), &path)?;
        written.push(path);
        let path = with_suffix(".absdiff.pgm");
        write_pgm(&self.abs_diff_image(), &path)?;
        written.push(path);
        for b in 0..8 {
            let path = with_suffix(&format!(".plane{b}.pgm"));
            write_pgm(&self.plane_image(b), &path)?;
            written.push(path);
        }
        let path = with_suffix(".summary.txt");
        std::fs::write(&path, self.summary(m))?;
        written.push(path);
        Ok(written)
    }
}

/// Bit-plane decomposition of `|C̃ − C|`.
pub fn diff_bitplanes(c: &GrayImage, c_tilde: &GrayImage) -> Result<DiffReport> {
    c.ensure_same_shape(c_tilde)?;
    let n = c.len();
    let mut diff = Vec::with_capacity(n);
    let mut abs_diff = Vec::with_capacity(n);
    let mut planes: [Vec<bool>; 8] = std::array::from_fn(|_| vec![false; n]);
    let mut per_plane_count = [0usize; 8];
    let mut affected_positions = Vec::new();
    for (k, (&a, &b)) in c.pixels().iter().zip(c_tilde.pixels()).enumerate() {
        let d = b.wrapping_sub(a);
        let abs = a.abs_diff(b);
        diff.push(d);
        abs_diff.push(abs);
        if d != 0 {
            affected_positions.push(k);
        }
        for (bit, plane) in planes.iter_mut().enumerate() {
            if abs >> bit & 1 == 1 {
                plane[k] = true;
                per_plane_count[bit] += 1;
            }
        }
    }
    Ok(DiffReport {
        width: c.width(),
        height: c.height(),
        diff,
        abs_diff,
        planes,
        per_plane_count,
        affected_positions,
    })
}

/// Single bit of `K1`, 1-based row and column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatrixBit {
    pub row: usize,
    pub col: usize,
    pub bit: u32,
}

/// Single bit of `IV` or of the plain image, 1-based index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexBit {
    pub index: usize,
    pub bit: u32,
}

/// What to flip.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitFlipSpec {
    K1(MatrixBit),
    Iv(IndexBit),
    Plaintext(IndexBit),
}

impl BitFlipSpec {
    /// Runs the matching experiment and returns its difference report.
    pub fn run(&self, plain: &GrayImage, key: &SecretKey) -> Result<DiffReport> {
        Ok(match *self {
            BitFlipSpec::K1(at) => k1_bitflip_experiment(plain, key, at)?.diff,
            BitFlipSpec::Iv(at) => iv_bitflip_experiment(plain, key, at)?.diff,
            BitFlipSpec::Plaintext(at) => plaintext_flip_experiment(plain, key, at)?.diff,
        })
    }
}

fn check_bit(bit: u32) -> Result<()> {
    if bit > 7 {
        return Err(Error::FlipOutOfRange(format!("bit {bit} is not in 0..=7")));
    }
    Ok(())
}

fn check_index(what: &str, index: usize, len: usize) -> Result<()> {
    if index == 0 || index > len {
        return Err(Error::FlipOutOfRange(format!(
            "{what} index {index} is not in 1..={len}"
        )));
    }
    Ok(())
}

/// Encrypts with the raw key stream, valid or not.
fn encrypt_any(plain: &GrayImage, key: &SecretKey) -> Result<CipherImage> {
    let mut stream = key.key_stream();
    encrypt_with(plain, key.m(), |_| {
        Ok(stream.next().expect("infinite stream"))
    })
}

#[derive(Clone, Debug)]
pub struct K1FlipReport {
    pub diff: DiffReport,
    pub flipped_key_valid: bool,
    /// Every changed byte sits at block offset `col` (1-based).
    pub confined_to_column: bool,
    /// `2^bit` divides every difference.
    pub divisible: bool,
}

/// Flips one bit of `K1` and compares the two cipher images.
///
/// The flip changes only column `col` of every `K_l`, and by a multiple of
/// `2^bit`, so the difference is confined to one block offset and its low
/// bit-planes stay empty.
pub fn k1_bitflip_experiment(
    plain: &GrayImage,
    key: &SecretKey,
    at: MatrixBit,
) -> Result<K1FlipReport> {
    let m = key.m();
    check_index("row", at.row, m)?;
    check_index("column", at.col, m)?;
    check_bit(at.bit)?;
    let original = encrypt(plain, key)?;
    let mut flipped = key.clone();
    let entry = flipped.k1().get(at.row - 1, at.col - 1);
    flipped
        .k1_mut()
        .set(at.row - 1, at.col - 1, entry ^ (1 << at.bit));
    let altered = encrypt_any(plain, &flipped)?;
    let diff = diff_bitplanes(&original.image, &altered.image)?;
    let confined_to_column = diff.affected_positions.iter().all(|k| k % m == at.col - 1);
    let divisible = diff.all_divisible_by_pow2(at.bit);
    Ok(K1FlipReport {
        diff,
        flipped_key_valid: flipped.validate().is_valid(),
        confined_to_column,
        divisible,
    })
}

#[derive(Clone, Debug)]
pub struct IvFlipReport {
    pub diff: DiffReport,
    pub flipped_key_valid: bool,
    /// `ĨV[index] − IV[index] mod 256`, i.e. `±2^bit`.
    pub delta: u8,
    /// `D_2 = K̃_2 − K_2 mod 256`.
    pub d2: ByteMatrix,
    /// `D_2[1,j] = delta · K1[index,j]` for every `j`.
    pub first_row_law_holds: bool,
    /// When `index == 1`: every row of `D_2` follows the closed-form
    /// recurrence in `delta`, `IV` and `K_2`.
    pub d2_recurrence_holds: Option<bool>,
    /// Number of distinct block offsets among changed bytes.
    pub offsets_touched: usize,
}

/// Flips one bit of `IV` and compares the two cipher images.
pub fn iv_bitflip_experiment(
    plain: &GrayImage,
    key: &SecretKey,
    at: IndexBit,
) -> Result<IvFlipReport> {
    let m = key.m();
    check_index("IV", at.index, m)?;
    check_bit(at.bit)?;
    let original = encrypt(plain, key)?;
    let mut flipped = key.clone();
    let i0 = at.index - 1;
    let old = flipped.iv().get(i0);
    flipped.iv_mut().set(i0, old ^ (1 << at.bit));
    let delta = flipped.iv().get(i0).wrapping_sub(old);
    let altered = encrypt_any(plain, &flipped)?;
    let diff = diff_bitplanes(&original.image, &altered.image)?;

    let k2 = key_schedule_step(key.k1(), key.iv())?;
    let k2_tilde = key_schedule_step(flipped.k1(), flipped.iv())?;
    let d2 = k2_tilde.wrapping_sub(&k2)?;
    let first_row_law_holds =
        (0..m).all(|j| d2.get(0, j) == delta.wrapping_mul(key.k1().get(i0, j)));
    let d2_recurrence_holds = (i0 == 0).then(|| d2_recurrence(&d2, &k2, key, delta));
    let offsets_touched = diff.offset_histogram(m).iter().filter(|&&c| c > 0).count();
    Ok(IvFlipReport {
        diff,
        flipped_key_valid: flipped.validate().is_valid(),
        delta,
        d2,
        first_row_law_holds,
        d2_recurrence_holds,
        offsets_touched,
    })
}

/// Row recurrence of `D_2` when `IV[1]` changes by `delta`:
/// row 1 = `delta·K1[1,:]`, row 2 = `(IV[1]+delta)·D[1,:] + delta·K2[1,:]`,
/// row i ≥ 3 = `D[2,:] + Σ_{k=2}^{i−1} IV[k]·D[k,:]`.
fn d2_recurrence(d2: &ByteMatrix, k2: &ByteMatrix, key: &SecretKey, delta: u8) -> bool {
    let m = key.m();
    let iv = key.iv();
    (0..m).all(|j| {
        let mut expected = vec![0u8; m];
        expected[0] = delta.wrapping_mul(key.k1().get(0, j));
        if m > 1 {
            expected[1] = iv
                .get(0)
                .wrapping_add(delta)
                .wrapping_mul(expected[0])
                .wrapping_add(delta.wrapping_mul(k2.get(0, j)));
        }
        for i in 2..m {
            expected[i] = (1..i).fold(expected[1], |acc, k| {
                acc.wrapping_add(iv.get(k).wrapping_mul(expected[k]))
            });
        }
        (0..m).all(|i| d2.get(i, j) == expected[i])
    })
}

#[derive(Clone, Debug)]
pub struct PlainFlipReport {
    pub diff: DiffReport,
    /// 1-based block containing the flipped pixel.
    pub block: usize,
    pub confined_to_block: bool,
}

/// Flips one bit of one plain pixel (1-based raster index) and compares the
/// cipher images.
pub fn plaintext_flip_experiment(
    plain: &GrayImage,
    key: &SecretKey,
    at: IndexBit,
) -> Result<PlainFlipReport> {
    check_index("pixel", at.index, plain.len())?;
    check_bit(at.bit)?;
    let m = key.m();
    let original = encrypt(plain, key)?;
    let mut altered_plain = plain.clone();
    altered_plain.pixels_mut()[at.index - 1] ^= 1 << at.bit;
    let altered = encrypt(&altered_plain, key)?;
    let diff = diff_bitplanes(&original.image, &altered.image)?;
    let block = (at.index - 1) / m + 1;
    let confined_to_block = diff.affected_blocks(m).iter().all(|&b| b == block);
    Ok(PlainFlipReport {
        diff,
        block,
        confined_to_block,
    })
}

/// Structured test image: a zero band on top, a constant band at the
/// bottom, and concentric rectangles of four gray levels in between.
pub fn make_test_pattern(width: usize, height: usize) -> Result<GrayImage> {
    let top = height / 4;
    let bottom = height - height / 4;
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let value = if y < top {
                0
            } else if y >= bottom {
                200
            } else {
                let ring = x.min(y).min(width - 1 - x).min(height - 1 - y);
                ((ring % 4) * 64) as u8
            };
            pixels.push(value);
        }
    }
    GrayImage::new(width, height, pixels)
}
