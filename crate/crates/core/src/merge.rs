//! Weighted fusion of a bracket stack into radiance, and dynamic range.

use serde::{Deserialize, Serialize};

use crate::exposure::{expose, BracketStack};
use crate::imgcore::{luminance, LinearImage};

/// Radiance relative to the base exposure (ev 0 has unit exposure time).
pub type HdrImage = LinearImage;

pub const DEFAULT_EPSILON: f32 = 0.005;

#[derive(Debug, thiserror::Error)]
pub enum MergeError {
    #[error("image has no pixel with positive luminance")]
    NoPositiveLuminance,
    #[error("weight guards must lie in (0, 0.5), got {lo} and {hi}")]
    InvalidGuard { lo: f32, hi: f32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    #[default]
    Triangle,
    Parabolic,
}

/// Hat weighting of bracket values; zero near both ends of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightFunction {
    pub kind: WeightKind,
    pub eps_lo: f32,
    pub eps_hi: f32,
}

impl Default for WeightFunction {
    fn default() -> Self {
        WeightFunction {
            kind: WeightKind::Triangle,
            eps_lo: DEFAULT_EPSILON,
            eps_hi: DEFAULT_EPSILON,
        }
    }
}

impl WeightFunction {
    pub fn parabolic() -> Self {
        WeightFunction {
            kind: WeightKind::Parabolic,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), MergeError> {
        let ok = |e: f32| e > 0.0 && e < 0.5;
        if ok(self.eps_lo) && ok(self.eps_hi) {
            Ok(())
        } else {
            Err(MergeError::InvalidGuard {
                lo: self.eps_lo,
                hi: self.eps_hi,
            })
        }
    }

    pub fn weight(&self, z: f32) -> f64 {
        if z < self.eps_lo || z > 1.0 - self.eps_hi {
            return 0.0;
        }
        let z = z as f64;
        match self.kind {
            WeightKind::Triangle => z.min(1.0 - z),
            WeightKind::Parabolic => z * (1.0 - z),
        }
    }
}

/// `min(z, 1 - z)` with the default guards.
pub fn triangle_weight(z: f32) -> f64 {
    WeightFunction::default().weight(z)
}

/// Per channel: `E = sum w(z_b) z_b / dt_b / sum w(z_b)`, `dt_b = 2^ev_b`.
///
/// The mean is taken around a reference, the brightest bracket with non-zero
/// weight. A bracket whose stored value is exactly what re-exposing the
/// reference produces carries no new information and contributes the
/// reference itself, so pixels that no patch touched come out bit-identical
/// to the base. Where every weight is zero, an all-bright pixel takes the
/// darkest bracket's estimate and anything else the brightest one's.
pub fn merge(stack: &BracketStack, w: &WeightFunction) -> HdrImage {
    let brackets = stack.brackets();
    let scales: Vec<f64> = brackets.iter().map(|b| (-b.ev()).exp2()).collect();
    let (width, height) = stack.dimensions();
    let mut out = Vec::with_capacity(width * height);
    let mut z = vec![0f32; brackets.len()];
    let mut wt = vec![0f64; brackets.len()];
    for i in 0..width * height {
        let mut px = [0f32; 3];
        for (c, slot) in px.iter_mut().enumerate() {
            for (b, bracket) in brackets.iter().enumerate() {
                z[b] = bracket.image().pixels()[i][c];
                wt[b] = w.weight(z[b]);
            }
            *slot = merge_one(&z, &wt, &scales, brackets) as f32;
        }
        out.push(px);
    }
    LinearImage::new(width, height, out).expect("merged radiance is finite and non-negative")
}

fn merge_one(z: &[f32], wt: &[f64], scales: &[f64], brackets: &[crate::exposure::Bracket]) -> f64 {
    let Some(r) = wt.iter().position(|&w| w > 0.0) else {
        let pick = if z.iter().all(|&v| v >= 0.5) {
            z.len() - 1
        } else {
            0
        };
        return z[pick] as f64 * scales[pick];
    };
    let reference = z[r] as f64 * scales[r];
    let mut num = 0.0;
    let mut den = 0.0;
    for b in 0..z.len() {
        if wt[b] == 0.0 {
            continue;
        }
        den += wt[b];
        if b != r && expose(reference as f32, brackets[b].ev()) != z[b] {
            num += wt[b] * (z[b] as f64 * scales[b] - reference);
        }
    }
    reference + num / den
}

/// `log2(L_99.9 / L_0.1)` over pixels with positive luminance, nearest rank.
pub fn dynamic_range(img: &HdrImage) -> Result<f64, MergeError> {
    let mut lums: Vec<f64> = img
        .pixels()
        .iter()
        .map(|&px| luminance(px))
        .filter(|&l| l > 0.0)
        .collect();
    if lums.is_empty() {
        return Err(MergeError::NoPositiveLuminance);
    }
    lums.sort_by(f64::total_cmp);
    let rank = |p: f64| {
        let k = (p * lums.len() as f64 - 1e-9).ceil().max(1.0) as usize;
        lums[k.min(lums.len()) - 1]
    };
    Ok((rank(0.999) / rank(0.001)).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exposure::Bracket;
    use proptest::prelude::*;

    fn stack(evs: &[f64], values: &[f32]) -> BracketStack {
        BracketStack::from_brackets(
            evs.iter()
                .zip(values)
                .map(|(&ev, &v)| Bracket::new(ev, LinearImage::filled(1, 1, [v; 3]).unwrap()).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn merged(evs: &[f64], values: &[f32]) -> f32 {
        merge(&stack(evs, values), &WeightFunction::default()).get(0, 0)[0]
    }

    #[test]
    fn weights() {
        assert_eq!(triangle_weight(0.5), 0.5);
        assert_eq!(triangle_weight(0.0), 0.0);
        assert_eq!(triangle_weight(1.0), 0.0);
        assert_eq!(triangle_weight(0.25), 0.25);
        assert_eq!(triangle_weight(0.004), 0.0);
        assert_eq!(WeightFunction::parabolic().weight(0.5), 0.25);
        assert!(WeightFunction { eps_lo: 0.5, ..Default::default() }.validate().is_err());
        assert!(WeightFunction::default().validate().is_ok());
    }

    #[test]
    fn examples() {
        assert_eq!(merged(&[0.0], &[0.3]), 0.3);
        assert_eq!(merged(&[0.0], &[1.0]), 1.0);
        assert!((merged(&[0.0, -1.0], &[0.4, 0.2]) - 0.4).abs() < 1e-7);
        assert_eq!(merged(&[0.0, -2.0], &[1.0, 0.5]), 2.0);
    }

    #[test]
    fn fallbacks() {
        // all clipped: darkest bracket's estimate
        assert_eq!(merged(&[0.0, -3.0], &[1.0, 1.0]), 8.0);
        // all black: brightest bracket's estimate
        assert_eq!(merged(&[0.0, -3.0], &[0.001, 0.0]), 0.001);
    }

    #[test]
    fn dynamic_range_examples() {
        let c = LinearImage::filled(5, 5, [0.3; 3]).unwrap();
        assert!(dynamic_range(&c).unwrap().abs() < 1e-12);
        let two = LinearImage::from_fn(10, 10, |x, _| if x < 5 { [0.5; 3] } else { [2.0; 3] }).unwrap();
        assert!((dynamic_range(&two).unwrap() - 2.0).abs() < 1e-12);
        let zero = LinearImage::filled(2, 2, [0.0; 3]).unwrap();
        assert!(dynamic_range(&zero).is_err());
    }

    proptest! {
        #[test]
        fn consistent_brackets_recover_radiance(e in 1e-3f32..60.0) {
            let evs = [0.0, -1.5, -3.0, -6.0];
            let zs: Vec<f32> = evs.iter().map(|&ev| expose(e, ev)).collect();
            let got = merged(&evs, &zs);
            let visible = zs.iter().any(|&z| triangle_weight(z) > 0.0);
            if visible {
                prop_assert!(((got - e) / e).abs() < 1e-6, "{} vs {}", got, e);
            }
        }

        #[test]
        fn order_invariant(vals in proptest::collection::vec(0.0f32..=1.0, 3)) {
            let a = stack(&[0.0, -1.0, -2.5], &vals);
            let b = BracketStack::from_brackets(a.brackets().iter().rev().cloned().collect()).unwrap();
            prop_assert_eq!(
                merge(&a, &WeightFunction::default()),
                merge(&b, &WeightFunction::default())
            );
        }

        #[test]
        fn dynamic_range_scale_invariant(
            vals in proptest::collection::vec(0.01f32..10.0, 4..64),
            k in -4i32..5,
        ) {
            let n = vals.len();
            let a = LinearImage::new(n, 1, vals.iter().map(|&v| [v; 3]).collect()).unwrap();
            let s = 2f32.powi(k);
            let b = LinearImage::new(n, 1, vals.iter().map(|&v| [v * s; 3]).collect()).unwrap();
            prop_assert!((dynamic_range(&a).unwrap() - dynamic_range(&b).unwrap()).abs() < 1e-9);
        }
    }
}
