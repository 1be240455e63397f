//! Grayscale rasters and the cipher-image container.

use rand::Rng;

use crate::error::{ensure_dims, Error, Result};

/// Row-major 8-bit grayscale raster. One channel of a color image is
/// handled as an independent `GrayImage`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parse(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        ensure_dims(width * height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn random<R: Rng + ?Sized>(width: usize, height: usize, rng: &mut R) -> Result<Self> {
        let mut pixels = vec![0u8; width * height];
        rng.fill(pixels.as_mut_slice());
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn same_shape(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn ensure_same_shape(&self, other: &GrayImage) -> Result<()> {
        ensure_dims(self.width, other.width)?;
        ensure_dims(self.height, other.height)
    }

    /// Pixelwise `(self + other) mod 256`.
    pub fn wrapping_add(&self, other: &GrayImage) -> Result<GrayImage> {
        self.ensure_same_shape(other)?;
        let pixels = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| a.wrapping_add(*b))
            .collect();
        GrayImage::new(self.width, self.height, pixels)
    }
}

/// Encryption output.
///
/// `image` holds exactly `width·height` cipher bytes in raster order. When
/// the pixel count is not a multiple of the block size, the encrypted zero
/// padding of the final block spills past the raster; those bytes are kept
/// in `tail` so the final block stays decryptable.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CipherImage {
    pub image: GrayImage,
    pub tail: Vec<u8>,
}

impl CipherImage {
    pub fn new(image: GrayImage, tail: Vec<u8>) -> Self {
        Self { image, tail }
    }

    /// Cipher bytes followed by the spilled tail.
    pub fn stream(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.image.len() + self.tail.len());
        out.extend_from_slice(self.image.pixels());
        out.extend_from_slice(&self.tail);
        out
    }

    /// Pixelwise `(self + other) mod 256` on raster and tail.
    pub fn wrapping_add(&self, other: &CipherImage) -> Result<CipherImage> {
        ensure_dims(self.tail.len(), other.tail.len())?;
        let image = self.image.wrapping_add(&other.image)?;
        let tail = self
            .tail
            .iter()
            .zip(&other.tail)
            .map(|(a, b)| a.wrapping_add(*b))
            .collect();
        Ok(CipherImage { image, tail })
    }
}

impl From<GrayImage> for CipherImage {
    fn from(image: GrayImage) -> Self {
        Self {
            image,
            tail: Vec::new(),
        }
    }
}

impl AsRef<GrayImage> for CipherImage {
    fn as_ref(&self) -> &GrayImage {
        &self.image
    }
}
