use super::{Image, ImageError};

/// Smallest side length any pyramid level may have.
pub const MIN_LEVEL_SIDE: usize = 1;

/// Dyadic image pyramid; level 0 is the source image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pyramid {
    levels: Vec<Image>,
}

impl Pyramid {
    pub const SCALE_FACTOR: usize = 2;

    pub fn levels(&self) -> &[Image] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> &Image {
        &self.levels[i]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn base(&self) -> &Image {
        &self.levels[0]
    }

    /// Same number of levels with identical dimensions at each level.
    pub fn same_geometry(&self, other: &Pyramid) -> bool {
        self.levels.len() == other.levels.len()
            && self.levels.iter().zip(&other.levels).all(|(a, b)| a.width() == b.width() && a.height() == b.height())
    }
}

fn downsample_box(img: &Image) -> Image {
    let w = img.width() / 2;
    let h = img.height() / 2;
    Image::from_fn(w, h, |x, y| {
        let sum = img.get(2 * x, 2 * y) as u16
            + img.get(2 * x + 1, 2 * y) as u16
            + img.get(2 * x, 2 * y + 1) as u16
            + img.get(2 * x + 1, 2 * y + 1) as u16;
        ((sum + 2) >> 2) as u8
    })
    .expect("dimensions checked by caller")
}

/// Builds `levels` levels by repeated 2x2 box averaging (round half up) and
/// decimation. Odd trailing rows and columns are dropped.
pub fn build_pyramid(img: &Image, levels: usize) -> Result<Pyramid, ImageError> {
    let shift = levels.saturating_sub(1) as u32;
    let fits = |side: usize| levels >= 1 && shift < usize::BITS && (side >> shift) >= MIN_LEVEL_SIDE;
    if !fits(img.width()) || !fits(img.height()) {
        return Err(ImageError::TooManyLevels {
            levels,
            width: img.width(),
            height: img.height(),
            min: MIN_LEVEL_SIDE,
        });
    }
    let mut out = Vec::with_capacity(levels);
    out.push(img.clone());
    for _ in 1..levels {
        let next = downsample_box(out.last().expect("non-empty"));
        out.push(next);
    }
    Ok(Pyramid { levels: out })
}
