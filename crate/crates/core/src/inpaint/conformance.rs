//! Wire-protocol checks runnable against any model service.
//!
//! The same suite validates our stub server in tests and a real deployment
//! in production. Each check reports pass, fail or skipped independently.

use serde_json::json;

use super::wire::{encode_b64, INPAINT_PATH, SEGMENT_PATH};
use super::{Backend, HttpBackend, InpaintRequest, SegmentRequest};
use crate::imgcore::{encode_rgb_png, SdrImage};
use crate::masking::{BinaryMask, CLASS_COUNT};

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Fail(String),
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    /// Service's maximum accepted image side; enables the 413 check.
    pub max_dimension: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| !matches!(c.outcome, Outcome::Fail(_)))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks
            .iter()
            .filter(|c| matches!(c.outcome, Outcome::Fail(_)))
    }
}

/// Two-tone scene: blue sky over brown ground, with a clipped band at the top.
pub fn probe_image(width: usize, height: usize) -> SdrImage {
    SdrImage::from_fn(width, height, |_, y| {
        if y < height / 6 {
            [1.0, 1.0, 1.0]
        } else if y < height / 2 {
            [0.35, 0.55, 0.9]
        } else {
            [0.45, 0.3, 0.2]
        }
    })
    .expect("probe pixels are in range")
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(), String>) -> Check {
    let outcome = match f() {
        Ok(()) => Outcome::Pass,
        Err(msg) => Outcome::Fail(msg),
    };
    Check { name, outcome }
}

fn expect_status(
    backend: &HttpBackend,
    path: &str,
    body: serde_json::Value,
    want: u16,
) -> Result<(), String> {
    let (status, value) = backend.post_json(path, &body).map_err(|e| e.to_string())?;
    if status != want {
        return Err(format!("expected {want}, got {status}: {value}"));
    }
    if value.get("error").and_then(|e| e.as_str()).is_none() {
        return Err(format!("error body lacks an \"error\" string: {value}"));
    }
    Ok(())
}

pub fn run(backend: &HttpBackend, options: &Options) -> Report {
    let (w, h) = (48, 36);
    let image = probe_image(w, h);
    let mask = BinaryMask::from_fn(w, h, |_, y| y < h / 6);
    let image_b64 = encode_b64(&encode_rgb_png(&image).expect("probe encodes"));
    let mask_b64 = encode_b64(&mask.to_png().expect("mask encodes"));
    // what the server sees after 8-bit encoding
    let sent = SdrImage::from_rgb8(w, h, &image.to_rgb8()).expect("valid");
    let mut checks = Vec::new();

    checks.push(check("segment: schema, size and label range", || {
        let labels = backend
            .segment(&SegmentRequest::new(&image))
            .map_err(|e| e.to_string())?;
        if labels.dimensions() != (w, h) {
            return Err(format!("labels are {:?}", labels.dimensions()));
        }
        if labels.to_hard_labels().iter().any(|&l| l as usize >= CLASS_COUNT) {
            return Err("label outside 0..=8".into());
        }
        Ok(())
    }));

    let req = InpaintRequest::new(&image, &mask, "clear blue sky", 7).expect("valid probe");
    let first = backend.inpaint(&req);
    checks.push(check("inpaint: schema and size", || {
        first.as_ref().map(|_| ()).map_err(|e| e.to_string())
    }));
    checks.push(check("inpaint: unmasked pixels kept within 1/255", || {
        let out = first.as_ref().map_err(|e| e.to_string())?;
        let tol = 1.0 / 255.0 + 1e-6;
        for (i, (a, b)) in out.pixels().iter().zip(sent.pixels()).enumerate() {
            if mask.bits()[i] {
                continue;
            }
            if a.iter().zip(b).any(|(x, y)| (x - y).abs() > tol) {
                return Err(format!("pixel {i} changed: {a:?} vs {b:?}"));
            }
        }
        Ok(())
    }));
    checks.push(check("inpaint: same request twice is identical", || {
        let out = first.as_ref().map_err(|e| e.to_string())?;
        let again = backend.inpaint(&req).map_err(|e| e.to_string())?;
        if &again != out {
            return Err("outputs differ".into());
        }
        Ok(())
    }));

    checks.push(check("inpaint: empty prompt rejected with 400", || {
        expect_status(
            backend,
            INPAINT_PATH,
            json!({"image_png_b64": image_b64, "mask_png_b64": mask_b64, "prompt": "", "seed": 7}),
            400,
        )
    }));
    checks.push(check("inpaint: malformed body rejected with 400", || {
        expect_status(backend, INPAINT_PATH, json!({"image_png_b64": "not base64!"}), 400)
    }));
    checks.push(check("segment: malformed body rejected with 400", || {
        expect_status(backend, SEGMENT_PATH, json!({"image": 1}), 400)
    }));

    checks.push(match options.max_dimension {
        Some(max) => check("segment: oversized image rejected with 413", || {
            let big = SdrImage::filled(max + 1, 1, [0.5; 3]).expect("valid");
            let b64 = encode_b64(&encode_rgb_png(&big).map_err(|e| e.to_string())?);
            expect_status(backend, SEGMENT_PATH, json!({"image_png_b64": b64}), 413)
        }),
        None => Check {
            name: "segment: oversized image rejected with 413",
            outcome: Outcome::Skipped("maximum dimension not configured".into()),
        },
    });
    checks.push(Check {
        name: "inpaint: inference timeout answered with 504",
        outcome: Outcome::Skipped("cannot be provoked from the client side".into()),
    });

    Report { checks }
}
