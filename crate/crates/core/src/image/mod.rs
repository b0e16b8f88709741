//! Grayscale rasters and the pre-processing stage: PGM I/O, Gaussian blur,
//! Sobel gradients and image pyramids.

mod filter;
mod pgm;
mod pyramid;

pub use filter::{gaussian_blur, gaussian_kernel_q14, sobel_gradients, sobel_kernels, GradientField};
pub use pgm::{decode_pgm, encode_pgm, load_pgm, save_pgm};
pub use pyramid::{build_pyramid, Pyramid, MIN_LEVEL_SIDE};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("image dimensions must be non-zero (got {width}x{height})")]
    EmptyImage { width: usize, height: usize },
    #[error("pixel buffer holds {actual} bytes, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("PGM data truncated: expected {expected} bytes, found {actual}")]
    TruncatedData { expected: usize, actual: usize },
    #[error("unsupported PGM maxval {0} (only 8-bit images are supported)")]
    UnsupportedMaxval(u32),
    #[error("kernel size {0} must be odd")]
    EvenKernel(usize),
    #[error("kernel size {ksize} does not fit a {width}x{height} image")]
    KernelTooLarge { ksize: usize, width: usize, height: usize },
    #[error("sigma must be positive and finite (got {0})")]
    InvalidSigma(f64),
    #[error("unsupported Sobel size {0} (expected 3, 5 or 7)")]
    UnsupportedSobelSize(usize),
    #[error("image {width}x{height} is smaller than the {ksize}x{ksize} kernel")]
    ImageTooSmall { ksize: usize, width: usize, height: usize },
    #[error("cannot build {levels} levels from a {width}x{height} image (each level needs at least {min}x{min})")]
    TooManyLevels { levels: usize, width: usize, height: usize, min: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Owned 8-bit grayscale raster, row-major, with no padding between rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Image").field("width", &self.width).field("height", &self.height).finish_non_exhaustive()
    }
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyImage { width, height });
        }
        let expected = width * height;
        if data.len() != expected {
            return Err(ImageError::BufferSize { expected, actual: data.len() });
        }
        Ok(Self { width, height, data })
    }

    /// Image filled with a single intensity.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, ImageError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self, ImageError> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Bytes between the starts of consecutive rows. Always equal to the width.
    #[inline]
    pub fn stride(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    /// Pixel at signed coordinates with edge replication.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_buffer_length() {
        assert!(matches!(Image::new(3, 2, vec![0; 5]), Err(ImageError::BufferSize { expected: 6, actual: 5 })));
        assert!(matches!(Image::new(0, 2, vec![]), Err(ImageError::EmptyImage { .. })));
    }

    #[test]
    fn clamped_access_replicates_edges() {
        let img = Image::from_fn(3, 3, |x, y| (y * 3 + x) as u8).unwrap();
        assert_eq!(img.get_clamped(-5, -1), 0);
        assert_eq!(img.get_clamped(7, 1), 5);
        assert_eq!(img.get_clamped(1, 9), 7);
        assert_eq!(img.stride(), 3);
    }
}
