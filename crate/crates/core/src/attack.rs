//! Known- and chosen-plaintext key recovery.
//!
//! Each block satisfies `P_l · K_l = C_l`. Stacking `m` plaintext rows whose
//! stack is invertible gives `K_l = stack(P)⁻¹ · stack(C)`. With several
//! image pairs the rows come from different images at the same block; with
//! one pair they come from blocks that share a key because the key stream
//! is periodic.
//!
//! Only plain/cipher data is used. The output is an equivalent key, never
//! `(K1, IV)` itself.

use rayon::prelude::*;

use crate::cipher::{decrypt_with, encrypt_with};
use crate::error::{ensure_dims, Error, Result};
use crate::image::{CipherImage, GrayImage};
use crate::modmat::{check_block_size, row_times_matrix, ByteMatrix};

/// Largest power-of-two period tried by [`single_image_attack`].
pub const MAX_POW2_CANDIDATE: usize = 4096;

/// Storage of recovered key matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KeyLayout {
    /// One slot per block; `None` marks an unresolved block.
    Dense(Vec<Option<ByteMatrix>>),
    /// `K_l = matrices[(l − 1) mod p]` for every `l`.
    Periodic(Vec<ByteMatrix>),
}

/// Per-block key matrices that reproduce the cipher without `(K1, IV)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalentKey {
    m: usize,
    layout: KeyLayout,
}

impl EquivalentKey {
    pub fn dense(m: usize, blocks: Vec<Option<ByteMatrix>>) -> Result<Self> {
        check_block_size(m)?;
        for k in blocks.iter().flatten() {
            ensure_dims(m, k.size())?;
        }
        Ok(Self {
            m,
            layout: KeyLayout::Dense(blocks),
        })
    }

    pub fn periodic(m: usize, matrices: Vec<ByteMatrix>) -> Result<Self> {
        check_block_size(m)?;
        if matrices.is_empty() {
            return Err(Error::Parse(
                "periodic key needs at least one matrix".into(),
            ));
        }
        for k in &matrices {
            ensure_dims(m, k.size())?;
        }
        Ok(Self {
            m,
            layout: KeyLayout::Periodic(matrices),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn layout(&self) -> &KeyLayout {
        &self.layout
    }

    /// Period `p` of the periodic form; `None` for dense keys.
    pub fn period(&self) -> Option<usize> {
        match &self.layout {
            KeyLayout::Periodic(ms) => Some(ms.len()),
            KeyLayout::Dense(_) => None,
        }
    }

    /// Matrix for 1-based block `l`, if resolved.
    pub fn matrix(&self, l: usize) -> Option<&ByteMatrix> {
        if l == 0 {
            return None;
        }
        match &self.layout {
            KeyLayout::Periodic(ms) => Some(&ms[(l - 1) % ms.len()]),
            KeyLayout::Dense(blocks) => blocks.get(l - 1).and_then(Option::as_ref),
        }
    }

    /// Fraction of blocks with a resolved matrix (1.0 for periodic keys).
    pub fn coverage(&self) -> f64 {
        match &self.layout {
            KeyLayout::Periodic(_) => 1.0,
            KeyLayout::Dense(blocks) if blocks.is_empty() => 1.0,
            KeyLayout::Dense(blocks) => {
                blocks.iter().filter(|b| b.is_some()).count() as f64 / blocks.len() as f64
            }
        }
    }

    /// 1-based indices of unresolved blocks.
    pub fn unresolved(&self) -> Vec<usize> {
        match &self.layout {
            KeyLayout::Periodic(_) => Vec::new(),
            KeyLayout::Dense(blocks) => blocks
                .iter()
                .enumerate()
                .filter(|(_, b)| b.is_none())
                .map(|(i, _)| i + 1)
                .collect(),
        }
    }

    fn require(&self, l: usize) -> Result<ByteMatrix> {
        self.matrix(l)
            .cloned()
            .ok_or_else(|| Error::Unrecoverable(format!("no key matrix for block {l}")))
    }

    pub fn encrypt(&self, plain: &GrayImage) -> Result<CipherImage> {
        encrypt_with(plain, self.m, |l| self.require(l))
    }

    pub fn decrypt(&self, cipher: &CipherImage) -> Result<GrayImage> {
        decrypt_with(cipher, self.m, |l| self.require(l))
    }
}

/// Plain/cipher image pairs produced under one unknown key.
#[derive(Clone, Debug, Default)]
pub struct PairSet {
    pairs: Vec<(GrayImage, CipherImage)>,
}

impl PairSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, plain: GrayImage, cipher: CipherImage) -> Result<()> {
        plain.ensure_same_shape(&cipher.image)?;
        if let Some((first, _)) = self.pairs.first() {
            first.ensure_same_shape(&plain)?;
        }
        self.pairs.push((plain, cipher));
        Ok(())
    }

    pub fn from_pairs(pairs: Vec<(GrayImage, CipherImage)>) -> Result<Self> {
        let mut set = Self::new();
        for (p, c) in pairs {
            set.push(p, c)?;
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(GrayImage, CipherImage)] {
        &self.pairs
    }
}

/// One linear equation `plain · K = cipher` contributed by a block.
struct BlockRow {
    plain: Vec<u8>,
    cipher: Vec<u8>,
}

/// Zero-padded plain block `l` (0-based) of `image`.
fn plain_block(image: &GrayImage, m: usize, l: usize) -> Vec<u8> {
    let px = image.pixels();
    let start = l * m;
    let end = (start + m).min(px.len());
    let mut block = px[start..end].to_vec();
    block.resize(m, 0);
    block
}

/// Cipher block `l` (0-based), or `None` if its bytes are not all present.
fn cipher_block(stream: &[u8], m: usize, l: usize) -> Option<Vec<u8>> {
    stream.get(l * m..l * m + m).map(<[u8]>::to_vec)
}

/// Greedily picks rows whose parity vectors are independent over GF(2).
///
/// A stack of rows is invertible over Z_256 iff it is invertible mod 2, and
/// independent sets of a vector space form a matroid, so the greedy pass
/// finds `m` suitable rows whenever any such subset exists.
fn select_invertible_rows<'a, I>(rows: I, m: usize) -> Option<Vec<&'a BlockRow>>
where
    I: IntoIterator<Item = &'a BlockRow>,
{
    let mut basis = [0u32; 32];
    let mut chosen = Vec::with_capacity(m);
    for row in rows {
        let mut v = row
            .plain
            .iter()
            .enumerate()
            .fold(0u32, |acc, (j, &x)| acc | (u32::from(x & 1) << j));
        while v != 0 {
            let top = 31 - v.leading_zeros() as usize;
            if basis[top] == 0 {
                basis[top] = v;
                chosen.push(row);
                break;
            }
            v ^= basis[top];
        }
        if chosen.len() == m {
            return Some(chosen);
        }
    }
    None
}

/// Solves `stack(P) · K = stack(C)` from an invertible selection.
fn solve(rows: &[&BlockRow], m: usize) -> Result<ByteMatrix> {
    let p = ByteMatrix::from_rows(&rows.iter().map(|r| r.plain.as_slice()).collect::<Vec<_>>())?;
    let c = ByteMatrix::from_rows(&rows.iter().map(|r| r.cipher.as_slice()).collect::<Vec<_>>())?;
    debug_assert_eq!(p.size(), m);
    p.inverse()?.mul(&c)
}

fn solve_rows<'a, I>(rows: I, m: usize) -> Option<ByteMatrix>
where
    I: IntoIterator<Item = &'a BlockRow>,
{
    let chosen = select_invertible_rows(rows, m)?;
    solve(&chosen, m).ok()
}

/// Reconstructs a dense equivalent key from `≥ m` image pairs.
///
/// Block `l` is resolved when some `m` of the pairs have an invertible
/// stack of plain blocks there. A final block that spills past the raster
/// is only usable from pairs whose cipher carries the spilled tail.
pub fn reconstruct_from_pairs(pairs: &PairSet, m: usize) -> Result<EquivalentKey> {
    check_block_size(m)?;
    if pairs.len() < m {
        return Err(Error::TooFewPairs {
            needed: m,
            got: pairs.len(),
        });
    }
    let first = &pairs.pairs[0].0;
    let blocks = first.len().div_ceil(m);
    let streams: Vec<Vec<u8>> = pairs.pairs.iter().map(|(_, c)| c.stream()).collect();
    let matrices = (0..blocks)
        .into_par_iter()
        .map(|l| {
            let rows: Vec<BlockRow> = pairs
                .pairs
                .iter()
                .zip(&streams)
                .filter_map(|((p, _), stream)| {
                    Some(BlockRow {
                        plain: plain_block(p, m, l),
                        cipher: cipher_block(stream, m, l)?,
                    })
                })
                .collect();
            solve_rows(&rows, m)
        })
        .collect();
    EquivalentKey::dense(m, matrices)
}

/// `m` images for the chosen-plaintext attack: image `i` repeats the unit
/// vector `e_i` in every block, so each block's plaintext stack is the
/// identity and `K_l` is read off as the stacked cipher blocks.
pub fn chosen_plaintext_images(m: usize, width: usize, height: usize) -> Result<Vec<GrayImage>> {
    check_block_size(m)?;
    if width * height < m {
        return Err(Error::Parse(format!(
            "a {width}x{height} image holds fewer than m = {m} pixels"
        )));
    }
    (0..m)
        .map(|i| {
            let pixels = (0..width * height).map(|k| u8::from(k % m == i)).collect();
            GrayImage::new(width, height, pixels)
        })
        .collect()
}

/// A single chosen image for [`single_image_attack`].
///
/// Block `b` (0-based) holds the unit vector `e_{(b mod q) mod m}`, with
/// `q = m` for odd `m` and `q = m + 3` for even `m`. Every candidate period
/// is a power of two or divides `128·(m + 1)`, and `q` is coprime to both,
/// so any `q` consecutive blocks of one residue class cover all unit
/// vectors. Covering every period therefore needs at least
/// `q·128·(m + 1)` blocks.
pub fn chosen_single_image(m: usize, width: usize, height: usize) -> Result<GrayImage> {
    check_block_size(m)?;
    let q = if m % 2 == 1 { m } else { m + 3 };
    let pixels = (0..width * height)
        .map(|k| {
            let unit = (k / m) % q % m;
            u8::from(k % m == unit)
        })
        .collect();
    GrayImage::new(width, height, pixels)
}

/// Result of trying one candidate period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodAttempt {
    pub period: usize,
    /// Residue classes whose plain rows contain an invertible stack.
    pub solved: usize,
    /// Solved classes whose matrix reproduces every block of the class.
    pub verified: usize,
    /// Residues `r = (l − 1) mod period` with no invertible stack, e.g.
    /// because every plain row in the class is even.
    pub unsolvable: Vec<usize>,
}

impl PeriodAttempt {
    pub fn accepted(&self) -> bool {
        self.unsolvable.is_empty() && self.verified == self.period
    }
}

#[derive(Clone, Debug)]
pub struct SingleImageAttack {
    pub key: EquivalentKey,
    /// False when no candidate period verified (the key is then a dense
    /// best-effort reconstruction).
    pub period_found: bool,
    pub attempts: Vec<PeriodAttempt>,
}

/// Candidate key-stream periods in ascending order: every power of two up
/// to [`MAX_POW2_CANDIDATE`] and every divisor of `128·(m + 1)`.
///
/// With all `IV[i]` odd the schedule matrix is `T ≡ C (mod 2)` for a fixed
/// `C` of order dividing `m + 1`, so `T^{128(m+1)} ≡ I (mod 256)`.
pub fn candidate_periods(m: usize) -> Vec<usize> {
    let bound = 128 * (m + 1);
    let mut out: Vec<usize> = (1..=bound).filter(|d| bound.is_multiple_of(*d)).collect();
    out.extend(
        (0..)
            .map(|e| 1usize << e)
            .take_while(|&p| p <= MAX_POW2_CANDIDATE),
    );
    out.sort_unstable();
    out.dedup();
    out
}

struct ClassOutcome {
    matrix: Option<ByteMatrix>,
    verified: bool,
}

fn attack_class(rows: &[BlockRow], period: usize, r: usize, m: usize) -> ClassOutcome {
    let members = || rows.iter().skip(r).step_by(period);
    let Some(k) = solve_rows(members(), m) else {
        return ClassOutcome {
            matrix: None,
            verified: false,
        };
    };
    let verified = members().all(|row| row_times_matrix(&row.plain, &k) == row.cipher);
    ClassOutcome {
        matrix: Some(k),
        verified,
    }
}

/// Recovers a periodic equivalent key from one plain/cipher pair.
///
/// Candidate periods are tried in ascending order. A candidate `p` is only
/// considered when every residue class has at least `m + 1` blocks, so each
/// class solve is checked against at least one redundant equation. The
/// first `p` whose classes all solve and whose key reproduces the whole
/// cipher is returned.
pub fn single_image_attack(
    plain: &GrayImage,
    cipher: &CipherImage,
    m: usize,
) -> Result<SingleImageAttack> {
    check_block_size(m)?;
    plain.ensure_same_shape(&cipher.image)?;
    let stream = cipher.stream();
    let total_blocks = plain.len().div_ceil(m);
    let rows: Vec<BlockRow> = (0..total_blocks)
        .map_while(|l| {
            Some(BlockRow {
                plain: plain_block(plain, m, l),
                cipher: cipher_block(&stream, m, l)?,
            })
        })
        .collect();
    let pair = PairSet::from_pairs(vec![(plain.clone(), cipher.clone())])?;

    let mut attempts = Vec::new();
    let mut best: Option<(usize, usize, Vec<Option<ByteMatrix>>)> = None;
    for period in candidate_periods(m) {
        if rows.len() / period < m + 1 {
            break;
        }
        let outcomes: Vec<ClassOutcome> = (0..period)
            .into_par_iter()
            .map(|r| attack_class(&rows, period, r, m))
            .collect();
        let attempt = PeriodAttempt {
            period,
            solved: outcomes.iter().filter(|o| o.matrix.is_some()).count(),
            verified: outcomes.iter().filter(|o| o.verified).count(),
            unsolvable: outcomes
                .iter()
                .enumerate()
                .filter(|(_, o)| o.matrix.is_none())
                .map(|(r, _)| r)
                .collect(),
        };
        let accepted = attempt.accepted();
        attempts.push(attempt);
        if accepted {
            let matrices = outcomes
                .into_iter()
                .map(|o| o.matrix.expect("accepted attempt solved every class"))
                .collect();
            let key = EquivalentKey::periodic(m, matrices)?;
            // the partial final block and any tail bytes are checked too
            if verify_equivalent_key(&key, &pair)? == 1.0 {
                return Ok(SingleImageAttack {
                    key,
                    period_found: true,
                    attempts,
                });
            }
            continue;
        }
        // dense fallback: blocks of verified classes only
        let covered: usize = outcomes
            .iter()
            .enumerate()
            .filter(|(_, o)| o.verified)
            .map(|(r, _)| rows.len().saturating_sub(r).div_ceil(period))
            .sum();
        if best.as_ref().is_none_or(|(c, _, _)| covered > *c) {
            let blocks = (0..total_blocks)
                .map(|l| {
                    let o = &outcomes[l % period];
                    o.verified.then(|| o.matrix.clone()).flatten()
                })
                .collect();
            best = Some((covered, period, blocks));
        }
    }

    if attempts.iter().all(|a| a.solved == 0) {
        return Err(Error::Unrecoverable(if attempts.is_empty() {
            format!(
                "{} blocks are too few for any candidate period with m = {m}",
                rows.len()
            )
        } else {
            "no residue class has an invertible plaintext stack".into()
        }));
    }
    let (_, _, blocks) = best.expect("some attempt solved a class");
    Ok(SingleImageAttack {
        key: EquivalentKey::dense(m, blocks)?,
        period_found: false,
        attempts,
    })
}

/// Fraction of available cipher bytes (raster plus tail) that `key`
/// reproduces from the plaintexts. Bytes of unresolved blocks count as
/// misses. An empty pair set scores 1.0.
pub fn verify_equivalent_key(key: &EquivalentKey, pairs: &PairSet) -> Result<f64> {
    let m = key.m();
    let mut matched = 0usize;
    let mut total = 0usize;
    for (plain, cipher) in pairs.pairs() {
        let stream = cipher.stream();
        total += stream.len();
        for (l, expected) in stream.chunks(m).enumerate() {
            let Some(k) = key.matrix(l + 1) else {
                continue;
            };
            let got = row_times_matrix(&plain_block(plain, m, l), k);
            matched += got.iter().zip(expected).filter(|(a, b)| a == b).count();
        }
    }
    Ok(if total == 0 {
        1.0
    } else {
        matched as f64 / total as f64
    })
}
