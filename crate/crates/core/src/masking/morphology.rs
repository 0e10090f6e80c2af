//! Binary erosion and dilation by disk structuring elements.
//!
//! A disk of radius `r` is decomposed into one horizontal span per row offset,
//! and per-row prefix counts turn each span test into an O(1) lookup. Both
//! operations therefore cost O(width * height * (2r + 1)).

use super::{BinaryMask, MaskError};

pub const MIN_RADIUS: u32 = 1;
pub const MAX_RADIUS: u32 = 10;

/// Disk footprint `{ (dx, dy) : dx^2 + dy^2 <= r^2 }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiskKernel {
    radius: u32,
}

impl DiskKernel {
    pub fn new(radius: u32) -> Result<Self, MaskError> {
        if radius < 1 {
            return Err(MaskError::ParameterOutOfRange {
                name: "radius",
                value: radius as i64,
                min: 1,
                max: i64::MAX,
            });
        }
        Ok(DiskKernel { radius })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Half-width of the footprint on row offset `dy`.
    pub fn half_width(&self, dy: i64) -> i64 {
        let r = self.radius as i64;
        isqrt(r * r - dy * dy)
    }

    /// All offsets in the footprint, row by row.
    pub fn offsets(&self) -> Vec<(i64, i64)> {
        let r = self.radius as i64;
        (-r..=r)
            .flat_map(|dy| {
                let hw = self.half_width(dy);
                (-hw..=hw).map(move |dx| (dx, dy))
            })
            .collect()
    }
}

fn isqrt(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as i64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// `prefix[y * (w + 1) + x]` counts set pixels in row `y` left of column `x`.
fn row_prefix(m: &BinaryMask) -> Vec<u32> {
    let w = m.width();
    let mut prefix = vec![0u32; (w + 1) * m.height()];
    for (y, row) in m.bits().chunks_exact(w).enumerate() {
        let base = y * (w + 1);
        for (x, &b) in row.iter().enumerate() {
            prefix[base + x + 1] = prefix[base + x] + b as u32;
        }
    }
    prefix
}

/// Pixels `z` whose translated footprint lies entirely inside `m`.
/// Footprints leaving the frame are not contained.
pub fn erode(m: &BinaryMask, d: DiskKernel) -> BinaryMask {
    let (w, h) = m.dimensions();
    let (wi, hi) = (w as i64, h as i64);
    let prefix = row_prefix(m);
    let r = d.radius() as i64;
    let spans: Vec<(i64, i64)> = (-r..=r).map(|dy| (dy, d.half_width(dy))).collect();
    BinaryMask::from_fn(w, h, |x, y| {
        let (x, y) = (x as i64, y as i64);
        spans.iter().all(|&(dy, hw)| {
            let yy = y + dy;
            let (x0, x1) = (x - hw, x + hw);
            if yy < 0 || yy >= hi || x0 < 0 || x1 >= wi {
                return false;
            }
            let base = yy as usize * (w + 1);
            prefix[base + x1 as usize + 1] - prefix[base + x0 as usize] == (2 * hw + 1) as u32
        })
    })
}

/// Union of footprints centred on every set pixel, cropped to the frame.
pub fn dilate(m: &BinaryMask, d: DiskKernel) -> BinaryMask {
    let (w, h) = m.dimensions();
    let (wi, hi) = (w as i64, h as i64);
    let prefix = row_prefix(m);
    let r = d.radius() as i64;
    let spans: Vec<(i64, i64)> = (-r..=r).map(|dy| (dy, d.half_width(dy))).collect();
    BinaryMask::from_fn(w, h, |x, y| {
        let (x, y) = (x as i64, y as i64);
        // the disk is symmetric, so z is covered iff some footprint pixel around z is set
        spans.iter().any(|&(dy, hw)| {
            let yy = y + dy;
            if yy < 0 || yy >= hi {
                return false;
            }
            let x0 = (x - hw).max(0);
            let x1 = (x + hw).min(wi - 1);
            let base = yy as usize * (w + 1);
            prefix[base + x1 as usize + 1] > prefix[base + x0 as usize]
        })
    })
}

fn check_radius(name: &'static str, v: u32) -> Result<DiskKernel, MaskError> {
    if !(MIN_RADIUS..=MAX_RADIUS).contains(&v) {
        return Err(MaskError::ParameterOutOfRange {
            name,
            value: v as i64,
            min: MIN_RADIUS as i64,
            max: MAX_RADIUS as i64,
        });
    }
    DiskKernel::new(v)
}

/// Guided opening: erosion by a disk of radius `alpha`, then dilation by a
/// disk of radius `beta`. Both radii must lie in `[1, 10]`.
pub fn inpaint_mask(m: &BinaryMask, alpha: u32, beta: u32) -> Result<BinaryMask, MaskError> {
    let d = check_radius("alpha", alpha)?;
    let d_hat = check_radius("beta", beta)?;
    Ok(dilate(&erode(m, d), d_hat))
}
