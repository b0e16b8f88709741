use super::{Image, ImageError};

const KERNEL_SHIFT: u32 = 14;
const KERNEL_ONE: u32 = 1 << KERNEL_SHIFT;

/// 1D Gaussian kernel quantized to Q14, summing to exactly 2^14.
///
/// Rounding residue goes to the centre tap so that constant images pass
/// through the blur unchanged.
pub fn gaussian_kernel_q14(ksize: usize, sigma: f64) -> Vec<u32> {
    let r = (ksize / 2) as isize;
    let weights: Vec<f64> = (-r..=r).map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut q: Vec<u32> = weights.iter().map(|w| (w / total * KERNEL_ONE as f64).round() as u32).collect();
    let sum: u32 = q.iter().sum();
    let centre = r as usize;
    q[centre] = (q[centre] as i64 + KERNEL_ONE as i64 - sum as i64) as u32;
    q
}

/// Separable Gaussian blur with edge replication.
///
/// Both passes accumulate in integers; the result is rounded to nearest once.
pub fn gaussian_blur(img: &Image, ksize: usize, sigma: f64) -> Result<Image, ImageError> {
    if ksize.is_multiple_of(2) {
        return Err(ImageError::EvenKernel(ksize));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(ImageError::InvalidSigma(sigma));
    }
    let (w, h) = (img.width(), img.height());
    if ksize > w.min(h) {
        return Err(ImageError::KernelTooLarge { ksize, width: w, height: h });
    }
    let kernel = gaussian_kernel_q14(ksize, sigma);
    let r = (ksize / 2) as isize;

    let mut horiz = vec![0u32; w * h];
    for y in 0..h {
        let row = img.row(y);
        for x in 0..w {
            let mut acc = 0u32;
            for (i, &k) in kernel.iter().enumerate() {
                let sx = (x as isize + i as isize - r).clamp(0, w as isize - 1) as usize;
                acc += k * row[sx] as u32;
            }
            horiz[y * w + x] = acc;
        }
    }

    let round = 1u64 << (2 * KERNEL_SHIFT - 1);
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0u64;
            for (j, &k) in kernel.iter().enumerate() {
                let sy = (y as isize + j as isize - r).clamp(0, h as isize - 1) as usize;
                acc += k as u64 * horiz[sy * w + x] as u64;
            }
            out[y * w + x] = ((acc + round) >> (2 * KERNEL_SHIFT)).min(255) as u8;
        }
    }
    Image::new(w, h, out)
}

fn binomial_row(n: usize) -> Vec<i32> {
    let mut row = vec![1i32];
    for _ in 0..n {
        let mut next = vec![1i32; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row
}

/// Extended Sobel kernel pair `(smoothing, derivative)` of length `ksize`.
///
/// Smoothing is the binomial row of order `ksize - 1`; the derivative is the
/// binomial row of order `ksize - 3` convolved with `[-1, 0, 1]`.
pub fn sobel_kernels(ksize: usize) -> Result<(Vec<i32>, Vec<i32>), ImageError> {
    if !matches!(ksize, 3 | 5 | 7) {
        return Err(ImageError::UnsupportedSobelSize(ksize));
    }
    let smooth = binomial_row(ksize - 1);
    let base = binomial_row(ksize - 3);
    let mut deriv = vec![0i32; ksize];
    for (i, &b) in base.iter().enumerate() {
        deriv[i] -= b;
        deriv[i + 2] += b;
    }
    Ok((smooth, deriv))
}

/// Horizontal and vertical derivatives over the valid interior of an image.
///
/// Only pixels at least `margin` away from every border are stored, so border
/// values cannot be read by accident.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradientField {
    src_width: usize,
    src_height: usize,
    margin: usize,
    width: usize,
    height: usize,
    gx: Vec<i32>,
    gy: Vec<i32>,
}

impl GradientField {
    pub fn source_width(&self) -> usize {
        self.src_width
    }

    pub fn source_height(&self) -> usize {
        self.src_height
    }

    /// Distance from each border of the source image to the first valid pixel.
    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn interior_width(&self) -> usize {
        self.width
    }

    pub fn interior_height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.margin && y >= self.margin && x - self.margin < self.width && y - self.margin < self.height
    }

    #[inline]
    fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(self.contains(x, y), "({x}, {y}) lies in the invalid border");
        (y - self.margin) * self.width + (x - self.margin)
    }

    /// Horizontal derivative at source coordinates; panics on border pixels.
    #[inline]
    pub fn gx(&self, x: usize, y: usize) -> i32 {
        assert!(self.contains(x, y), "({x}, {y}) lies in the invalid border");
        self.gx[self.index(x, y)]
    }

    #[inline]
    pub fn gy(&self, x: usize, y: usize) -> i32 {
        assert!(self.contains(x, y), "({x}, {y}) lies in the invalid border");
        self.gy[self.index(x, y)]
    }

    pub fn get(&self, x: usize, y: usize) -> Option<(i32, i32)> {
        self.contains(x, y).then(|| {
            let i = self.index(x, y);
            (self.gx[i], self.gy[i])
        })
    }

    /// Row-major interior values, `interior_width * interior_height` long.
    pub fn gx_interior(&self) -> &[i32] {
        &self.gx
    }

    pub fn gy_interior(&self) -> &[i32] {
        &self.gy
    }

    /// Builds a field directly from interior values. Mainly useful for tests
    /// that need synthetic gradients.
    pub fn from_interior(
        src_width: usize,
        src_height: usize,
        margin: usize,
        gx: Vec<i32>,
        gy: Vec<i32>,
    ) -> Result<Self, ImageError> {
        let width = src_width.saturating_sub(2 * margin);
        let height = src_height.saturating_sub(2 * margin);
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyImage { width, height });
        }
        for len in [gx.len(), gy.len()] {
            if len != width * height {
                return Err(ImageError::BufferSize { expected: width * height, actual: len });
            }
        }
        Ok(Self { src_width, src_height, margin, width, height, gx, gy })
    }
}

/// Sobel derivatives (correlation form: `gx > 0` where intensity rises with x).
pub fn sobel_gradients(img: &Image, ksize: usize) -> Result<GradientField, ImageError> {
    let (smooth, deriv) = sobel_kernels(ksize)?;
    let (w, h) = (img.width(), img.height());
    if w < ksize || h < ksize {
        return Err(ImageError::ImageTooSmall { ksize, width: w, height: h });
    }
    let r = ksize / 2;
    let iw = w - 2 * r;
    let ih = h - 2 * r;

    // Horizontal pass over every row, interior columns only.
    let mut hs = vec![0i32; iw * h];
    let mut hd = vec![0i32; iw * h];
    for y in 0..h {
        let row = img.row(y);
        for ix in 0..iw {
            let window = &row[ix..ix + ksize];
            let mut s = 0i32;
            let mut d = 0i32;
            for i in 0..ksize {
                let p = window[i] as i32;
                s += smooth[i] * p;
                d += deriv[i] * p;
            }
            hs[y * iw + ix] = s;
            hd[y * iw + ix] = d;
        }
    }

    let mut gx = vec![0i32; iw * ih];
    let mut gy = vec![0i32; iw * ih];
    for iy in 0..ih {
        for ix in 0..iw {
            let mut sx = 0i32;
            let mut sy = 0i32;
            for j in 0..ksize {
                let k = (iy + j) * iw + ix;
                sx += smooth[j] * hd[k];
                sy += deriv[j] * hs[k];
            }
            gx[iy * iw + ix] = sx;
            gy[iy * iw + ix] = sy;
        }
    }
    Ok(GradientField { src_width: w, src_height: h, margin: r, width: iw, height: ih, gx, gy })
}
