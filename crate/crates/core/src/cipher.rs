//! The image cipher: raster blocking, the in-place key schedule, and
//! blockwise encryption `C_l = P_l · K_l mod 256`.

use std::fmt;

use crate::error::{ensure_dims, Error, Result};
use crate::image::{CipherImage, GrayImage};
use crate::modmat::{check_block_size, row_times_matrix, ByteMatrix, ByteVector};

/// Full secret key: block size `m`, first key matrix `K1`, and `IV`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SecretKey {
    k1: ByteMatrix,
    iv: ByteVector,
}

impl SecretKey {
    pub fn new(k1: ByteMatrix, iv: ByteVector) -> Result<Self> {
        ensure_dims(k1.size(), iv.len())?;
        Ok(Self { k1, iv })
    }

    pub fn m(&self) -> usize {
        self.k1.size()
    }

    pub fn k1(&self) -> &ByteMatrix {
        &self.k1
    }

    pub fn iv(&self) -> &ByteVector {
        &self.iv
    }

    pub fn k1_mut(&mut self) -> &mut ByteMatrix {
        &mut self.k1
    }

    pub fn iv_mut(&mut self) -> &mut ByteVector {
        &mut self.iv
    }

    pub fn key_stream(&self) -> KeyStream {
        key_stream(self)
    }

    pub fn validate(&self) -> KeyValidity {
        validate_key(self)
    }

    fn ensure_valid(&self) -> Result<()> {
        match self.validate() {
            KeyValidity::Valid => Ok(()),
            KeyValidity::Invalid(faults) => Err(Error::InvalidKey(faults[0].clone())),
        }
    }
}

/// Why a key cannot drive the cipher.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum KeyFault {
    /// `det(K1) mod 256` is even.
    EvenDeterminant { det: u8 },
    /// `IV[index]` is even (1-based index).
    EvenIv { index: usize, value: u8 },
}

impl fmt::Display for KeyFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyFault::EvenDeterminant { det } => {
                write!(f, "det(K1) mod 256 = {det} is even")
            }
            KeyFault::EvenIv { index, value } => write!(f, "IV[{index}] = {value} is even"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum KeyValidity {
    Valid,
    Invalid(Vec<KeyFault>),
}

impl KeyValidity {
    pub fn is_valid(&self) -> bool {
        matches!(self, KeyValidity::Valid)
    }
}

/// A key is valid iff `det(K1)` is odd and every `IV[i]` is odd.
///
/// Since `det(K_l) = (∏ IV[i])^{l−1} · det(K1)`, this decides the
/// invertibility of every matrix in the key stream.
pub fn validate_key(key: &SecretKey) -> KeyValidity {
    let mut faults = Vec::new();
    let det = key.k1.det_mod();
    if det.is_multiple_of(2) {
        faults.push(KeyFault::EvenDeterminant { det });
    }
    for (i, &v) in key.iv.as_slice().iter().enumerate() {
        if v % 2 == 0 {
            faults.push(KeyFault::EvenIv {
                index: i + 1,
                value: v,
            });
        }
    }
    if faults.is_empty() {
        KeyValidity::Valid
    } else {
        KeyValidity::Invalid(faults)
    }
}

/// Splits the raster into `⌈MN/m⌉` row vectors, zero-padding the last.
pub fn blockify(image: &GrayImage, m: usize) -> Result<Vec<ByteVector>> {
    check_block_size(m)?;
    image
        .pixels()
        .chunks(m)
        .map(|chunk| {
            let mut block = chunk.to_vec();
            block.resize(m, 0);
            ByteVector::new(block)
        })
        .collect()
}

/// One step of the key schedule.
///
/// Rows are rewritten in order `i = 1..m`, each as `IV · W` where `W` is the
/// working matrix with rows `1..i−1` already replaced.
pub fn key_schedule_step(prev: &ByteMatrix, iv: &ByteVector) -> Result<ByteMatrix> {
    ensure_dims(prev.size(), iv.len())?;
    let mut w = prev.clone();
    for i in 0..w.size() {
        let row = row_times_matrix(iv.as_slice(), &w);
        w.row_mut(i).copy_from_slice(&row);
    }
    Ok(w)
}

/// The matrix `T` with `K_{l+1} = T · K_l` for every `K_l`.
///
/// The schedule only forms row combinations, so it is left multiplication
/// by `T = step(I)`.
pub fn schedule_matrix(iv: &ByteVector) -> Result<ByteMatrix> {
    key_schedule_step(&ByteMatrix::identity(iv.len())?, iv)
}

/// Lazily advancing key stream `K1, K2, …`.
#[derive(Clone, Debug)]
pub struct KeyStream {
    current: ByteMatrix,
    iv: ByteVector,
    index: usize,
}

impl KeyStream {
    /// The matrix that the next call to `next` returns.
    pub fn current(&self) -> &ByteMatrix {
        &self.current
    }

    /// 1-based block index of [`current`](Self::current).
    pub fn index(&self) -> usize {
        self.index
    }
}

impl Iterator for KeyStream {
    type Item = ByteMatrix;

    fn next(&mut self) -> Option<ByteMatrix> {
        let next =
            key_schedule_step(&self.current, &self.iv).expect("dimensions fixed at creation");
        self.index += 1;
        Some(std::mem::replace(&mut self.current, next))
    }
}

pub fn key_stream(key: &SecretKey) -> KeyStream {
    KeyStream {
        current: key.k1.clone(),
        iv: key.iv.clone(),
        index: 1,
    }
}

/// Applies `block_l · key(l)` to each zero-padded `m`-byte block of `data`.
/// Output length is `⌈len/m⌉ · m`.
pub(crate) fn transform_blocks<F>(data: &[u8], m: usize, mut key: F) -> Result<Vec<u8>>
where
    F: FnMut(usize) -> Result<ByteMatrix>,
{
    let mut out = Vec::with_capacity(data.len().div_ceil(m) * m);
    let mut block = vec![0u8; m];
    for (l, chunk) in data.chunks(m).enumerate() {
        block[..chunk.len()].copy_from_slice(chunk);
        block[chunk.len()..].fill(0);
        let k = key(l + 1)?;
        out.extend(row_times_matrix(&block, &k));
    }
    Ok(out)
}

/// Splits a padded block stream into the raster and its spilled tail.
pub(crate) fn split_cipher(like: &GrayImage, mut stream: Vec<u8>) -> Result<CipherImage> {
    let tail = stream.split_off(like.len());
    let image = GrayImage::new(like.width(), like.height(), stream)?;
    Ok(CipherImage::new(image, tail))
}

/// Encrypts with an arbitrary per-block key sequence (1-based block index).
pub fn encrypt_with<F>(plain: &GrayImage, m: usize, key: F) -> Result<CipherImage>
where
    F: FnMut(usize) -> Result<ByteMatrix>,
{
    check_block_size(m)?;
    let stream = transform_blocks(plain.pixels(), m, key)?;
    split_cipher(plain, stream)
}

/// Decrypts with an arbitrary per-block key sequence; `key(l)` must be the
/// encryption matrix, which is inverted here.
pub fn decrypt_with<F>(cipher: &CipherImage, m: usize, mut key: F) -> Result<GrayImage>
where
    F: FnMut(usize) -> Result<ByteMatrix>,
{
    check_block_size(m)?;
    let image = &cipher.image;
    let padded = image.len().div_ceil(m) * m;
    ensure_dims(padded - image.len(), cipher.tail.len())?;
    let stream = cipher.stream();
    let mut plain = transform_blocks(&stream, m, |l| key(l)?.inverse())?;
    plain.truncate(image.len());
    GrayImage::new(image.width(), image.height(), plain)
}

/// `C_l = P_l · K_l mod 256` for every block; refuses invalid keys.
pub fn encrypt(plain: &GrayImage, key: &SecretKey) -> Result<CipherImage> {
    key.ensure_valid()?;
    let mut stream = key.key_stream();
    encrypt_with(plain, key.m(), |_| {
        Ok(stream.next().expect("infinite stream"))
    })
}

/// `P_l = C_l · K_l⁻¹ mod 256` for every block; refuses invalid keys.
pub fn decrypt(cipher: &CipherImage, key: &SecretKey) -> Result<GrayImage> {
    key.ensure_valid()?;
    let mut stream = key.key_stream();
    decrypt_with(cipher, key.m(), |_| {
        Ok(stream.next().expect("infinite stream"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mat(rows: &[&[u8]]) -> ByteMatrix {
        ByteMatrix::from_rows(rows).unwrap()
    }

    fn vector(v: &[u8]) -> ByteVector {
        ByteVector::new(v.to_vec()).unwrap()
    }

    fn key(k1: &[&[u8]], iv: &[u8]) -> SecretKey {
        SecretKey::new(mat(k1), vector(iv)).unwrap()
    }

    fn sample_key() -> SecretKey {
        key(
            &[
                &[11, 2, 3, 7],
                &[8, 5, 19, 103],
                &[201, 203, 119, 150],
                &[7, 9, 21, 35],
            ],
            &[3, 9, 17, 33],
        )
    }

    fn random_valid_key(m: usize, rng: &mut impl Rng) -> SecretKey {
        let k1 = ByteMatrix::random_invertible(m, rng).unwrap();
        let iv = (0..m).map(|_| rng.gen::<u8>() | 1).collect();
        SecretKey::new(k1, ByteVector::new(iv).unwrap()).unwrap()
    }

    #[test]
    fn blocks_are_zero_padded() {
        let img = GrayImage::new(3, 1, vec![10, 20, 30]).unwrap();
        let blocks = blockify(&img, 2).unwrap();
        assert_eq!(blocks, vec![vector(&[10, 20]), vector(&[30, 0])]);

        let img = GrayImage::new(2, 2, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(blockify(&img, 4).unwrap(), vec![vector(&[1, 2, 3, 4])]);

        let img = GrayImage::new(5, 1, vec![1, 2, 3, 4, 5]).unwrap();
        assert_eq!(blockify(&img, 5).unwrap().len(), 1);

        // fewer pixels than m: one padded block
        let img = GrayImage::new(1, 1, vec![9]).unwrap();
        assert_eq!(blockify(&img, 3).unwrap(), vec![vector(&[9, 0, 0])]);
    }

    #[test]
    fn schedule_step_is_in_place() {
        assert_eq!(
            key_schedule_step(&mat(&[&[1]]), &vector(&[3])).unwrap(),
            mat(&[&[3]])
        );
        let next = key_schedule_step(&ByteMatrix::identity(2).unwrap(), &vector(&[1, 1])).unwrap();
        assert_eq!(next, mat(&[&[1, 1], &[1, 2]]));
        assert_eq!(next.det_mod(), 1);
        assert!(key_schedule_step(&ByteMatrix::identity(2).unwrap(), &vector(&[1])).is_err());
    }

    #[test]
    fn schedule_is_left_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 1..=6 {
            let iv = ByteVector::new((0..m).map(|_| rng.gen()).collect()).unwrap();
            let t = schedule_matrix(&iv).unwrap();
            let k = ByteMatrix::random(m, &mut rng).unwrap();
            assert_eq!(key_schedule_step(&k, &iv).unwrap(), t.mul(&k).unwrap());
        }
    }

    #[test]
    fn key_stream_values() {
        let stream: Vec<_> = key(&[&[1]], &[3]).key_stream().take(4).collect();
        assert_eq!(
            stream,
            vec![mat(&[&[1]]), mat(&[&[3]]), mat(&[&[9]]), mat(&[&[27]])]
        );

        let k = key(&[&[1, 0], &[0, 1]], &[1, 1]);
        let mut stream = k.key_stream();
        assert_eq!(stream.index(), 1);
        assert_eq!(stream.next().unwrap(), ByteMatrix::identity(2).unwrap());
        assert_eq!(stream.next().unwrap(), mat(&[&[1, 1], &[1, 2]]));
        assert_eq!(stream.index(), 3);

        let sample = sample_key();
        assert_eq!(&sample.key_stream().next().unwrap(), sample.k1());
    }

    #[test]
    fn validation() {
        assert!(validate_key(&sample_key()).is_valid());
        let bad_iv = SecretKey::new(ByteMatrix::identity(3).unwrap(), vector(&[2, 3, 5])).unwrap();
        assert_eq!(
            validate_key(&bad_iv),
            KeyValidity::Invalid(vec![KeyFault::EvenIv { index: 1, value: 2 }])
        );
        let bad_det = key(&[&[2, 2], &[1, 1]], &[1, 1]);
        assert_eq!(
            validate_key(&bad_det),
            KeyValidity::Invalid(vec![KeyFault::EvenDeterminant { det: 0 }])
        );
    }

    #[test]
    fn encrypt_examples() {
        let img = GrayImage::new(3, 1, vec![10, 20, 30]).unwrap();
        let k = key(&[&[1]], &[3]);
        let c = encrypt(&img, &k).unwrap();
        assert_eq!(c.image.pixels(), &[10, 60, 14]);
        assert!(c.tail.is_empty());
        assert_eq!(decrypt(&c, &k).unwrap(), img);

        let identity = key(&[&[1]], &[1]);
        for p in [0u8, 1, 77, 255] {
            let img = GrayImage::new(1, 1, vec![p]).unwrap();
            assert_eq!(encrypt(&img, &identity).unwrap().image, img);
            assert_eq!(decrypt(&img.clone().into(), &identity).unwrap(), img);
        }

        let zero = GrayImage::filled(7, 5, 0).unwrap();
        let c = encrypt(&zero, &sample_key()).unwrap();
        assert_eq!(c.image, zero);
        assert!(c.tail.iter().all(|&b| b == 0));
    }

    #[test]
    fn invalid_keys_are_refused() {
        let img = GrayImage::filled(2, 2, 1).unwrap();
        let bad = key(&[&[2, 2], &[1, 1]], &[1, 1]);
        assert!(matches!(encrypt(&img, &bad), Err(Error::InvalidKey(_))));
        assert!(matches!(
            decrypt(&img.into(), &bad),
            Err(Error::InvalidKey(_))
        ));
    }

    #[test]
    fn partial_last_block_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = random_valid_key(3, &mut rng);
        let img = GrayImage::random(5, 2, &mut rng).unwrap();
        let c = encrypt(&img, &k).unwrap();
        assert_eq!(c.image.len(), 10);
        assert_eq!(c.tail.len(), 2);
        assert_eq!(decrypt(&c, &k).unwrap(), img);

        // a cipher raster stripped of its tail cannot be decrypted
        let stripped = CipherImage::from(c.image.clone());
        assert!(matches!(
            decrypt(&stripped, &k),
            Err(Error::DimensionMismatch { .. })
        ));

        let tiny = GrayImage::new(1, 1, vec![200]).unwrap();
        let c = encrypt(&tiny, &k).unwrap();
        assert_eq!(decrypt(&c, &k).unwrap(), tiny);
    }

    #[test]
    fn sample_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let img = GrayImage::random(64, 64, &mut rng).unwrap();
        let k = sample_key();
        assert_eq!(decrypt(&encrypt(&img, &k).unwrap(), &k).unwrap(), img);
    }

    #[test]
    fn determinant_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m = rng.gen_range(1..=5);
            // validity not required
            let k1 = ByteMatrix::random(m, &mut rng).unwrap();
            let iv = ByteVector::new((0..m).map(|_| rng.gen()).collect()).unwrap();
            let key = SecretKey::new(k1, iv.clone()).unwrap();
            let prod = iv.product();
            let mut prev_det = None;
            for k in key.key_stream().take(30) {
                let det = k.det_mod();
                if let Some(p) = prev_det {
                    assert_eq!(det, prod.wrapping_mul(p));
                }
                prev_det = Some(det);
            }
        }
    }

    #[test]
    fn valid_key_stream_stays_invertible() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let key = random_valid_key(4, &mut rng);
        assert!(key.key_stream().take(1000).all(|k| k.is_invertible()));
    }
}
