use super::{BinaryMask, SoftMask};

// Larger than any squared in-frame distance, small enough that sums with
// squared offsets stay exact in f64.
const FAR: f64 = 1e15;

/// One-dimensional squared distance transform of a sampled function
/// (lower envelope of parabolas).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let fq = f[q] + (q * q) as f64;
        let mut s;
        loop {
            let p = v[k];
            s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Squared Euclidean distance from every pixel to the nearest pixel where
/// `target` is true. `FAR` or more when no target exists.
fn squared_distance_to(width: usize, height: usize, target: impl Fn(usize) -> bool) -> Vec<f64> {
    let n = width.max(height);
    let mut grid: Vec<f64> = (0..width * height)
        .map(|i| if target(i) { 0.0 } else { FAR })
        .collect();
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    for x in 0..width {
        for y in 0..height {
            f[y] = grid[y * width + x];
        }
        edt_1d(&f[..height], &mut out[..height], &mut v, &mut z);
        for y in 0..height {
            grid[y * width + x] = out[y];
        }
    }
    for y in 0..height {
        let row = &mut grid[y * width..(y + 1) * width];
        f[..width].copy_from_slice(row);
        edt_1d(&f[..width], &mut out[..width], &mut v, &mut z);
        row.copy_from_slice(&out[..width]);
    }
    grid
}

/// Signed distance to the mask boundary, positive inside.
///
/// A set pixel at Euclidean distance `d` from the nearest unset pixel gets
/// `d - 0.5`; an unset pixel at distance `d` from the nearest set pixel gets
/// `-(d - 0.5)`. The boundary therefore sits halfway between pixel centres.
/// Out-of-frame pixels do not count as either set, so a mask touching the
/// frame is not feathered there. Returns `f32::INFINITY` (or its negative)
/// when the opposite set is empty.
pub fn signed_distance(m: &BinaryMask) -> Vec<f32> {
    let (w, h) = m.dimensions();
    let bits = m.bits();
    let to_outside = squared_distance_to(w, h, |i| !bits[i]);
    let to_inside = squared_distance_to(w, h, |i| bits[i]);
    bits.iter()
        .enumerate()
        .map(|(i, &inside)| {
            let d2 = if inside { to_outside[i] } else { to_inside[i] };
            let mag = if d2 >= FAR {
                f32::INFINITY
            } else {
                (d2.sqrt() - 0.5) as f32
            };
            if inside {
                mag
            } else {
                -mag
            }
        })
        .collect()
}

/// Soft guide `alpha = clamp(0.5 + sd / (2 * radius), 0, 1)`.
pub fn feather(m: &BinaryMask, radius: u32) -> SoftMask {
    let radius = radius.max(1) as f32;
    let alpha = signed_distance(m)
        .into_iter()
        .map(|sd| (0.5 + sd / (2.0 * radius)).clamp(0.0, 1.0))
        .collect();
    SoftMask::new(m.width(), m.height(), alpha).expect("alpha clamped to [0, 1]")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sd_oracle(m: &BinaryMask) -> Vec<f32> {
        let (w, h) = m.dimensions();
        let mut out = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let inside = m.get(x, y);
                let mut best = f64::INFINITY;
                for yy in 0..h {
                    for xx in 0..w {
                        if m.get(xx, yy) != inside {
                            let dx = xx as f64 - x as f64;
                            let dy = yy as f64 - y as f64;
                            best = best.min((dx * dx + dy * dy).sqrt());
                        }
                    }
                }
                let mag = if best.is_infinite() { f32::INFINITY } else { (best - 0.5) as f32 };
                out.push(if inside { mag } else { -mag });
            }
        }
        out
    }

    #[test]
    fn half_plane_ramp() {
        let m = BinaryMask::from_fn(12, 3, |x, _| x >= 6);
        let s = feather(&m, 2);
        let row: Vec<f32> = (0..12).map(|x| s.get(x, 1)).collect();
        assert_eq!(
            row,
            vec![0.0, 0.0, 0.0, 0.0, 0.125, 0.375, 0.625, 0.875, 1.0, 1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn deep_pixels_saturate() {
        let m = BinaryMask::from_fn(40, 40, |x, y| (10..30).contains(&x) && (10..30).contains(&y));
        let s = feather(&m, 4);
        assert_eq!(s.get(20, 20), 1.0);
        assert_eq!(s.get(2, 2), 0.0);
        assert_eq!(s.get(14, 20), 1.0); // depth 4.5
        assert_eq!(s.get(5, 20), 0.0); // 5.5 outside
    }

    #[test]
    fn degenerate_masks() {
        assert!(feather(&BinaryMask::full(5, 5), 3).alpha().iter().all(|&a| a == 1.0));
        assert!(feather(&BinaryMask::empty(5, 5), 3).alpha().iter().all(|&a| a == 0.0));
    }

    proptest! {
        #[test]
        fn distance_transform_matches_brute_force(
            (w, h, bits) in (1usize..14, 1usize..14).prop_flat_map(|(w, h)| {
                (Just(w), Just(h), proptest::collection::vec(any::<bool>(), w * h))
            })
        ) {
            let m = BinaryMask::from_bits(w, h, bits).unwrap();
            let fast = signed_distance(&m);
            let slow = sd_oracle(&m);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!(a == b || (a - b).abs() < 1e-4, "{a} vs {b}");
            }
        }

        #[test]
        fn threshold_reproduces_mask(
            (w, h, bits) in (1usize..20, 1usize..20).prop_flat_map(|(w, h)| {
                (Just(w), Just(h), proptest::collection::vec(any::<bool>(), w * h))
            }),
            r in 1u32..12,
        ) {
            let m = BinaryMask::from_bits(w, h, bits).unwrap();
            let soft = feather(&m, r);
            let sd = signed_distance(&m);
            for (i, &d) in sd.iter().enumerate() {
                // every pixel has |sd| >= 0.5; the mask is reproduced everywhere
                prop_assert!(d.abs() >= 0.5);
                prop_assert_eq!(soft.alpha()[i] > 0.5, m.bits()[i]);
            }
        }
    }
}
