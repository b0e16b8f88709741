//! Direct 2D convolutions and the box-average pyramid step.

use featfront::Image;

fn binomial(n: usize) -> Vec<i64> {
    // C(n, k) by the multiplicative formula.
    let mut out = Vec::with_capacity(n + 1);
    let mut c = 1i64;
    for k in 0..=n {
        out.push(c);
        c = c * (n - k) as i64 / (k + 1) as i64;
    }
    out
}

/// Full 2D Sobel kernels `(kx, ky)` as `k[row][col]`.
pub fn sobel_2d(ksize: usize) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let smooth = binomial(ksize - 1);
    let base = binomial(ksize - 3);
    let mut deriv = vec![0i64; ksize];
    for (i, b) in base.iter().enumerate() {
        deriv[i] -= b;
        deriv[i + 2] += b;
    }
    let kx = (0..ksize).map(|r| (0..ksize).map(|c| smooth[r] * deriv[c]).collect()).collect();
    let ky = (0..ksize).map(|r| (0..ksize).map(|c| deriv[r] * smooth[c]).collect()).collect();
    (kx, ky)
}

/// Gradients at `(x, y)` by direct 2D correlation; the window must fit.
pub fn sobel_at(img: &Image, ksize: usize, x: usize, y: usize) -> (i64, i64) {
    let (kx, ky) = sobel_2d(ksize);
    let r = ksize / 2;
    let (mut gx, mut gy) = (0i64, 0i64);
    for j in 0..ksize {
        for i in 0..ksize {
            let p = img.get(x + i - r, y + j - r) as i64;
            gx += kx[j][i] * p;
            gy += ky[j][i] * p;
        }
    }
    (gx, gy)
}

/// Q14 Gaussian taps, rounding residue on the centre tap.
pub fn gaussian_q14(ksize: usize, sigma: f64) -> Vec<i64> {
    let r = (ksize / 2) as i64;
    let raw: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = raw.iter().sum();
    let mut q: Vec<i64> = raw.iter().map(|v| (v / total * 16384.0).round() as i64).collect();
    let sum: i64 = q.iter().sum();
    q[r as usize] += 16384 - sum;
    q
}

/// Blur by direct 2D convolution with the outer-product kernel, replicated
/// edges, one rounding at the end.
pub fn oracle_blur(img: &Image, ksize: usize, sigma: f64) -> Image {
    let k = gaussian_q14(ksize, sigma);
    let r = (ksize / 2) as i64;
    let (w, h) = (img.width() as i64, img.height() as i64);
    Image::from_fn(img.width(), img.height(), |x, y| {
        let mut acc = 0i64;
        for j in 0..ksize as i64 {
            for i in 0..ksize as i64 {
                let sx = (x as i64 + i - r).clamp(0, w - 1) as usize;
                let sy = (y as i64 + j - r).clamp(0, h - 1) as usize;
                acc += k[j as usize] * k[i as usize] * img.get(sx, sy) as i64;
            }
        }
        ((acc + (1 << 27)) >> 28).min(255) as u8
    })
    .expect("non-empty")
}

/// One pyramid step: mean of each 2x2 block, halves rounded up.
pub fn oracle_downsample(img: &Image) -> Vec<Vec<u8>> {
    let (w, h) = (img.width() / 2, img.height() / 2);
    (0..h)
        .map(|y| {
            (0..w)
                .map(|x| {
                    let s: u32 = [(0, 0), (1, 0), (0, 1), (1, 1)]
                        .iter()
                        .map(|&(dx, dy)| img.get(2 * x + dx, 2 * y + dy) as u32)
                        .sum();
                    (s as f64 / 4.0).round() as u8
                })
                .collect()
        })
        .collect()
}
