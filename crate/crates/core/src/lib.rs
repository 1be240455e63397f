//! Hill-cipher image encryption over bytes with a self-updating key
//! matrix, together with the tools that break it.
//!
//! A key is an `m × m` byte matrix `K1` with odd determinant and an
//! all-odd vector `IV`. Block `l` of the raster is multiplied by `K_l`,
//! where each `K_{l+1}` is derived from `K_l` and `IV`. Everything works
//! modulo 256.
//!
//! ```
//! use hillcrack::{decrypt, encrypt, ByteMatrix, ByteVector, GrayImage, SecretKey};
//!
//! let key = SecretKey::new(
//!     ByteMatrix::from_rows(&[[1u8, 2], [3, 5]])?,
//!     ByteVector::new(vec![3, 7])?,
//! )?;
//! let plain = GrayImage::new(4, 2, (0..8).collect())?;
//! let cipher = encrypt(&plain, &key)?;
//! assert_eq!(decrypt(&cipher, &key)?, plain);
//! # Ok::<(), hillcrack::Error>(())
//! ```

pub mod analysis;
pub mod attack;
pub mod cipher;
pub mod cli;
pub mod error;
pub mod image;
pub mod io;
pub mod keystats;
pub mod modmat;

pub use attack::{
    reconstruct_from_pairs, single_image_attack, verify_equivalent_key, EquivalentKey, PairSet,
};
pub use cipher::{decrypt, encrypt, key_stream, validate_key, KeyFault, KeyValidity, SecretKey};
pub use error::{Error, Result};
pub use image::{CipherImage, GrayImage};
pub use modmat::{det_mod, gl_count, inverse_mod, invertible_probability, ByteMatrix, ByteVector};
