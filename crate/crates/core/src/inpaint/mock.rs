use super::{check_dimensions, Backend, BackendError, InpaintRequest, SegmentRequest};
use crate::imgcore::{Rgb, SdrImage};
use crate::masking::{SemanticClass, SemanticLabeling};

/// Lowest channel value the mock ever generates.
pub const DEFAULT_RHO_MIN: f32 = 0.05;

/// Deterministic stand-in for a diffusion model.
///
/// Masked pixels get a smooth vertical gradient plus low-frequency value
/// noise, with every parameter drawn from a hash of `(prompt, seed)`. Output
/// is quantized to 8 bits so it survives a PNG round trip unchanged, and
/// never drops below `rho_min`.
#[derive(Debug, Clone)]
pub struct MockBackend {
    rho_min: f32,
    constant: Option<Rgb>,
    labels: Option<SemanticLabeling>,
}

impl Default for MockBackend {
    fn default() -> Self {
        MockBackend {
            rho_min: DEFAULT_RHO_MIN,
            constant: None,
            labels: None,
        }
    }
}

impl MockBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_rho_min(mut self, rho_min: f32) -> Result<Self, BackendError> {
        if !(DEFAULT_RHO_MIN..1.0).contains(&rho_min) {
            return Err(BackendError::InvalidRequest(format!(
                "rho_min {rho_min} outside [{DEFAULT_RHO_MIN}, 1)"
            )));
        }
        self.rho_min = rho_min;
        Ok(self)
    }

    /// Fills every masked pixel with `rgb` instead of the procedural texture.
    pub fn with_constant_fill(mut self, rgb: Rgb) -> Result<Self, BackendError> {
        if rgb.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(BackendError::InvalidRequest(format!("fill {rgb:?} outside [0, 1]")));
        }
        self.constant = Some(rgb);
        Ok(self)
    }

    /// Labeling returned by `segment`, typically loaded from a sidecar file.
    pub fn with_labels(mut self, labels: SemanticLabeling) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn rho_min(&self) -> f32 {
        self.rho_min
    }
}

impl Backend for MockBackend {
    fn inpaint(&self, req: &InpaintRequest<'_>) -> Result<SdrImage, BackendError> {
        let (w, h) = req.image().dimensions();
        let texture = Texture::new(hash_request(req.prompt(), req.seed()), self.rho_min);
        let floor = (self.rho_min * 255.0).ceil();
        let data = req
            .image()
            .pixels()
            .iter()
            .zip(req.mask().bits())
            .enumerate()
            .map(|(i, (px, &fill))| {
                if !fill {
                    return *px;
                }
                if let Some(c) = self.constant {
                    return c;
                }
                texture
                    .sample(i % w, i / w, h)
                    .map(|v| (v * 255.0).round().max(floor).min(255.0) / 255.0)
            })
            .collect();
        Ok(SdrImage::from_valid(w, h, data))
    }

    fn segment(&self, req: &SegmentRequest<'_>) -> Result<SemanticLabeling, BackendError> {
        let (w, h) = req.image().dimensions();
        match &self.labels {
            Some(labels) => {
                check_dimensions((w, h), labels.dimensions())?;
                Ok(labels.clone())
            }
            None => Ok(SemanticLabeling::uniform(w, h, SemanticClass::Others)),
        }
    }

    fn name(&self) -> &str {
        "mock"
    }
}

fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    bytes.into_iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_request(prompt: &str, seed: u64) -> u64 {
    fnv1a(prompt.bytes().chain(seed.to_le_bytes()))
}

/// Uniform in `[0, 1)` from the top 24 bits.
fn unit(h: u64) -> f32 {
    (h >> 40) as f32 / (1u64 << 24) as f32
}

struct Texture {
    key: u64,
    top: Rgb,
    bottom: Rgb,
    amplitude: f32,
    cell: f32,
    lo: f32,
}

impl Texture {
    fn new(key: u64, rho_min: f32) -> Self {
        let mut state = key;
        let mut next = || {
            state = splitmix(state);
            unit(state)
        };
        let lo = rho_min.max(0.3);
        let mut color = || [0; 3].map(|_| lo + (0.95 - lo) * next());
        let top = color();
        let bottom = color();
        let amplitude = 0.02 + 0.06 * next();
        let cell = 8.0 + 24.0 * next();
        Texture {
            key,
            top,
            bottom,
            amplitude,
            cell,
            lo: rho_min,
        }
    }

    fn lattice(&self, cx: i64, cy: i64) -> f32 {
        let h = splitmix(self.key ^ (cx as u64).wrapping_mul(0x9e37_79b9) ^ (cy as u64) << 32);
        2.0 * unit(h) - 1.0
    }

    /// Bilinear value noise with smoothstep easing, in `[-1, 1]`.
    fn noise(&self, x: usize, y: usize) -> f32 {
        let fx = x as f32 / self.cell;
        let fy = y as f32 / self.cell;
        let (cx, cy) = (fx.floor(), fy.floor());
        let ease = |t: f32| t * t * (3.0 - 2.0 * t);
        let (tx, ty) = (ease(fx - cx), ease(fy - cy));
        let (cx, cy) = (cx as i64, cy as i64);
        let a = self.lattice(cx, cy) * (1.0 - tx) + self.lattice(cx + 1, cy) * tx;
        let b = self.lattice(cx, cy + 1) * (1.0 - tx) + self.lattice(cx + 1, cy + 1) * tx;
        a * (1.0 - ty) + b * ty
    }

    fn sample(&self, x: usize, y: usize, height: usize) -> Rgb {
        let t = if height > 1 {
            y as f32 / (height - 1) as f32
        } else {
            0.0
        };
        let n = self.amplitude * self.noise(x, y);
        [0, 1, 2].map(|c| (self.top[c] * (1.0 - t) + self.bottom[c] * t + n).clamp(self.lo, 1.0))
    }
}
