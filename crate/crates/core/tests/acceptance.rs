//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every check compares the library against a brute-force or closed-form
//! oracle written here, independent of the implementation.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ditmo_core::exposure::{estimate_exposure, exposure_from_luminances, Bracket, BracketStack};
use ditmo_core::imgcore::{
    decode_hdr, encode_hdr, linearize, luminance, read_hdr, write_hdr, write_ldr_png, LinearImage,
    ResponseCurve, SdrImage,
};
use ditmo_core::inpaint::MockBackend;
use ditmo_core::masking::{dilate, erode, inpaint_mask, BinaryMask, DiskKernel, SemanticClass, SemanticLabeling};
use ditmo_core::merge::{dynamic_range, merge, WeightFunction};
use ditmo_core::pipeline::{process, run, PipelineConfig, RunOptions};
use ditmo_core::semgraph::{
    build_graph, inpaint_order, sample_prompt, AlbedoTable, Edge, OrderedSemanticGraph, PromptConfig,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- morphology

/// Mask as one u64 per row (width <= 64).
struct Rows {
    w: usize,
    h: usize,
    rows: Vec<u64>,
}

impl Rows {
    fn from_mask(m: &BinaryMask) -> Rows {
        let rows = (0..m.height())
            .map(|y| (0..m.width()).fold(0u64, |acc, x| acc | ((m.get(x, y) as u64) << x)))
            .collect();
        Rows {
            w: m.width(),
            h: m.height(),
            rows,
        }
    }

    fn to_mask(&self) -> BinaryMask {
        BinaryMask::from_fn(self.w, self.h, |x, y| self.rows[y] >> x & 1 == 1)
    }

    fn mismatches(&self, other: &Rows) -> u32 {
        self.rows.iter().zip(&other.rows).map(|(a, b)| (a ^ b).count_ones()).sum()
    }

    fn subset_of(&self, other: &Rows) -> bool {
        self.rows.iter().zip(&other.rows).all(|(a, b)| a & !b == 0)
    }
}

fn span(lo: usize, hi: usize) -> u64 {
    let len = hi - lo + 1;
    if len == 64 {
        !0
    } else {
        ((1u64 << len) - 1) << lo
    }
}

/// Half-widths of the disk `dx^2 + dy^2 <= r^2` by direct search.
fn disk_rows(r: i64) -> Vec<(i64, i64)> {
    (-r..=r)
        .map(|dy| {
            let mut hw = 0;
            while (hw + 1) * (hw + 1) + dy * dy <= r * r {
                hw += 1;
            }
            (dy, hw)
        })
        .collect()
}

/// z is kept iff the whole translated disk lies inside the mask and the frame.
fn erode_oracle(m: &Rows, r: i64) -> Rows {
    let disk = disk_rows(r);
    let mut rows = vec![0u64; m.h];
    for (y, row) in rows.iter_mut().enumerate() {
        for x in 0..m.w {
            let inside = disk.iter().all(|&(dy, hw)| {
                let (yy, lo, hi) = (y as i64 + dy, x as i64 - hw, x as i64 + hw);
                yy >= 0
                    && yy < m.h as i64
                    && lo >= 0
                    && hi < m.w as i64
                    && m.rows[yy as usize] & span(lo as usize, hi as usize) == span(lo as usize, hi as usize)
            });
            *row |= (inside as u64) << x;
        }
    }
    Rows { w: m.w, h: m.h, rows }
}

/// z is set iff some mask pixel lies in the disk around z.
fn dilate_oracle(m: &Rows, r: i64) -> Rows {
    let disk = disk_rows(r);
    let mut rows = vec![0u64; m.h];
    for (y, row) in rows.iter_mut().enumerate() {
        for x in 0..m.w {
            let hit = disk.iter().any(|&(dy, hw)| {
                let yy = y as i64 + dy;
                if yy < 0 || yy >= m.h as i64 {
                    return false;
                }
                let lo = (x as i64 - hw).max(0) as usize;
                let hi = ((x as i64 + hw) as usize).min(m.w - 1);
                m.rows[yy as usize] & span(lo, hi) != 0
            });
            *row |= (hit as u64) << x;
        }
    }
    Rows { w: m.w, h: m.h, rows }
}

fn disk(r: u32) -> DiskKernel {
    DiskKernel::new(r).unwrap()
}

#[derive(Default)]
struct MorphTally {
    masks: usize,
    evaluations: usize,
    mismatched: u64,
}

impl MorphTally {
    fn check(&mut self, m: &Rows, radii: impl Iterator<Item = u32>, pairs: &[(u32, u32)]) {
        let mask = m.to_mask();
        self.masks += 1;
        for r in radii {
            let e = Rows::from_mask(&erode(&mask, disk(r)));
            let d = Rows::from_mask(&dilate(&mask, disk(r)));
            self.mismatched += e.mismatches(&erode_oracle(m, r as i64)) as u64;
            self.mismatched += d.mismatches(&dilate_oracle(m, r as i64)) as u64;
            self.evaluations += 2;
        }
        for &(a, b) in pairs {
            let got = Rows::from_mask(&inpaint_mask(&mask, a, b).unwrap());
            let want = dilate_oracle(&erode_oracle(m, a as i64), b as i64);
            self.mismatched += got.mismatches(&want) as u64;
            self.evaluations += 1;
        }
    }
}

/// Every 8x8 mask built from 2x2 blocks, every row- and column-periodic
/// pattern, and every single pixel and single hole.
fn exhaustive_8x8() -> Vec<Rows> {
    let mk = |f: &dyn Fn(usize, usize) -> bool| Rows {
        w: 8,
        h: 8,
        rows: (0..8).map(|y| (0..8).fold(0, |acc, x| acc | ((f(x, y) as u64) << x))).collect(),
    };
    let mut out = Vec::new();
    for bits in 0u32..1 << 16 {
        out.push(mk(&|x, y| bits >> ((y / 2) * 4 + x / 2) & 1 == 1));
    }
    for p in 0u32..256 {
        out.push(mk(&|x, _| p >> x & 1 == 1));
        out.push(mk(&|_, y| p >> y & 1 == 1));
    }
    for i in 0..64 {
        out.push(mk(&|x, y| y * 8 + x == i));
        out.push(mk(&|x, y| y * 8 + x != i));
    }
    out
}

/// Blobs, dense noise or plain noise, so erosion has something to keep.
fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Rows {
    let bits: Vec<bool> = match rng.random_range(0..3) {
        0 => {
            let shapes: Vec<(f64, f64, f64, bool)> = (0..rng.random_range(1..8))
                .map(|_| {
                    (
                        rng.random_range(0.0..w as f64),
                        rng.random_range(0.0..h as f64),
                        rng.random_range(2.0..w.max(h) as f64 / 2.0),
                        rng.random_bool(0.5),
                    )
                })
                .collect();
            (0..w * h)
                .map(|i| {
                    let (x, y) = ((i % w) as f64, (i / w) as f64);
                    shapes.iter().any(|&(cx, cy, s, round)| {
                        if round {
                            (x - cx).powi(2) + (y - cy).powi(2) <= s * s
                        } else {
                            (x - cx).abs() <= s && (y - cy).abs() <= s / 2.0
                        }
                    })
                })
                .collect()
        }
        1 => {
            let p = rng.random_range(0.85..0.995);
            (0..w * h).map(|_| rng.random_bool(p)).collect()
        }
        _ => (0..w * h).map(|_| rng.random_bool(0.5)).collect(),
    };
    Rows::from_mask(&BinaryMask::from_bits(w, h, bits).unwrap())
}

fn morphology() -> Outcome {
    let start = Instant::now();
    let mut tally = MorphTally::default();
    let pairs: Vec<(u32, u32)> = (1..=10).flat_map(|r| [(r, r), (r, 11 - r)]).collect();
    for m in exhaustive_8x8() {
        tally.check(&m, 1..=10, &pairs);
    }
    let exhaustive = tally.masks;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d6f7270);
    for _ in 0..200 {
        let m = random_mask(&mut rng, 64, 64);
        let pairs: Vec<(u32, u32)> = (0..10)
            .map(|_| (rng.random_range(1..=10), rng.random_range(1..=10)))
            .collect();
        tally.check(&m, 1..=10, &pairs);
    }
    let elapsed = start.elapsed();
    ensure(tally.mismatched == 0, || format!("{} mismatched pixels", tally.mismatched))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:.2?}"))?;
    Ok(format!(
        "{exhaustive} exhaustive 8x8 + 200 random 64x64 masks, radii 1-10, {} evaluations, 0 mismatched pixels, {elapsed:.2?}",
        tally.evaluations
    ))
}

fn opening_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6f70656e);
    let mut extensive = 0;
    let mut not_idempotent = 0;
    for _ in 0..1000 {
        let (w, h) = (rng.random_range(16..=64), rng.random_range(16..=64));
        let m = random_mask(&mut rng, w, h).to_mask();
        let r = rng.random_range(1..=10);
        let once = inpaint_mask(&m, r, r).unwrap();
        let twice = inpaint_mask(&once, r, r).unwrap();
        if !Rows::from_mask(&once).subset_of(&Rows::from_mask(&m)) {
            extensive += 1;
        }
        if once != twice {
            not_idempotent += 1;
        }
    }
    ensure(extensive + not_idempotent == 0, || {
        format!("{extensive} anti-extensivity and {not_idempotent} idempotence violations")
    })?;
    Ok("1000 random masks with alpha = beta: 0 anti-extensivity, 0 idempotence violations".into())
}

// ------------------------------------------------------------------ exposure

fn exposure_math() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x65787073);
    let mut worst: f64 = 0.0;

    // uniform regions, from luminances and from display values
    for _ in 0..200 {
        let v: f64 = (rng.random_range(-10.0..0.0f64)).exp2();
        let n = rng.random_range(16..2000);
        let est = exposure_from_luminances(vec![v; n], 0.02).unwrap();
        worst = worst.max((est.ev - v.log2()).abs());
    }
    let crf = ResponseCurve::default();
    for g in 1..=255u8 {
        let value = g as f32 / 255.0;
        let img = SdrImage::filled(6, 5, [value; 3]).unwrap();
        let est = estimate_exposure(&img, &BinaryMask::full(6, 5), 0.02, crf).unwrap();
        let lin = crf.to_linear(value) as f64;
        let want = lin.log2().clamp(-10.0, 0.0);
        worst = worst.max((est.ev - want).abs());
    }
    ensure(worst <= 1e-9, || format!("uniform ev off by {worst:e}"))?;

    // quantile rule against a full sort with integer index arithmetic
    let mut mismatched = 0;
    for i in 0..1000 {
        let n = (rng.random_range((16f64).ln()..(1e5f64).ln())).exp().round() as usize;
        let permille: usize = if i % 2 == 0 { 20 } else { rng.random_range(1..=1000) };
        let lums: Vec<f64> = (0..n).map(|_| rng.random_range(-12.0..0.0f64).exp2()).collect();
        let mut sorted = lums.clone();
        sorted.sort_by(f64::total_cmp);
        let k = ((permille * n).div_ceil(1000)).min(n - 1);
        let want_ev = sorted[k].log2().clamp(-10.0, 0.0);
        let est = exposure_from_luminances(lums, permille as f64 / 1000.0).unwrap();
        if est.reference != sorted[k] || (est.ev - want_ev).abs() > 1e-9 {
            mismatched += 1;
        }
    }
    ensure(mismatched == 0, || format!("{mismatched} of 1000 regions disagree with the sort"))?;

    // shifting every luminance by 2^k shifts ev by k
    let mut shift_err: f64 = 0.0;
    for _ in 0..300 {
        let n = rng.random_range(16..5000);
        let lums: Vec<f64> = (0..n).map(|_| rng.random_range(-6.0..-3.0f64).exp2()).collect();
        let k = rng.random_range(-3..=3);
        let scaled: Vec<f64> = lums.iter().map(|l| l * (k as f64).exp2()).collect();
        let a = exposure_from_luminances(lums, 0.02).unwrap().ev;
        let b = exposure_from_luminances(scaled, 0.02).unwrap().ev;
        shift_err = shift_err.max((b - a - k as f64).abs());
    }
    ensure(shift_err <= 1e-9, || format!("scale shift off by {shift_err:e}"))?;
    Ok(format!(
        "uniform ev max error {worst:.1e}; 1000 regions (n in [16, 1e5]) match the sorting oracle; 2^k shift max error {shift_err:.1e}"
    ))
}

// --------------------------------------------------------------------- merge

fn merge_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d657267);
    let evs = [0.0, -2.0, -4.0, -6.0];
    let w = WeightFunction::default();
    let (width, height) = (96, 64);
    let (mut checked, mut excluded, mut bad) = (0usize, 0usize, 0usize);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let truth: Vec<[f32; 3]> = (0..width * height)
            .map(|_| std::array::from_fn(|_| rng.random_range(-8.0..10.0f64).exp2() as f32))
            .collect();
        let brackets = evs
            .iter()
            .map(|&ev| {
                let px = truth
                    .iter()
                    .map(|p| p.map(|e| ((e as f64) * f64::exp2(ev)).min(1.0) as f32))
                    .collect();
                Bracket::new(ev, LinearImage::new(width, height, px).unwrap()).unwrap()
            })
            .collect();
        let stack = BracketStack::from_brackets(brackets).unwrap();
        let merged = merge(&stack, &w);
        for (i, p) in truth.iter().enumerate() {
            for (c, &e) in p.iter().enumerate() {
                let e = e as f64;
                let usable = evs.iter().any(|&ev| {
                    let z = (e * f64::exp2(ev)).min(1.0) as f32;
                    (w.eps_lo..=1.0 - w.eps_hi).contains(&z)
                });
                if !usable {
                    excluded += 1;
                    continue;
                }
                checked += 1;
                let rel = (merged.pixels()[i][c] as f64 - e).abs() / e;
                worst = worst.max(rel);
                if rel > 0.01 {
                    bad += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(bad == 0, || format!("{bad} samples beyond 1% (worst {worst:.3e})"))?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:.2?}"))?;
    Ok(format!(
        "100 maps, evs {{0,-2,-4,-6}}: {checked} samples within 1% (worst {worst:.1e}), {excluded} clipped everywhere, {elapsed:.2?}"
    ))
}

// ---------------------------------------------------------------- end to end

fn hard_labels(w: usize, h: usize, f: impl Fn(usize, usize) -> SemanticClass) -> SemanticLabeling {
    let hard: Vec<u8> = (0..w * h).map(|i| f(i % w, i / w).id() as u8).collect();
    SemanticLabeling::from_hard_labels(w, h, &hard).unwrap()
}

/// Clipped sky with a soft horizon over textured ground.
fn sky_scene(w: usize, h: usize) -> (SdrImage, SemanticLabeling) {
    let horizon = h * 2 / 5;
    let img = SdrImage::from_fn(w, h, |x, y| {
        if y < horizon {
            let v = (0.93 + 0.08 * (y as f32 / horizon as f32)).min(1.0);
            [v, v.min(0.995), 1.0]
        } else {
            let t = x as f32 / w as f32;
            let s = ((x * 7 + y * 13) % 17) as f32 / 17.0;
            [0.15 + 0.4 * t, 0.2 + 0.2 * s, 0.25]
        }
    })
    .unwrap();
    let labels = hard_labels(w, h, |_, y| if y < horizon + 2 { SemanticClass::Sky } else { SemanticClass::Ground });
    (img, labels)
}

fn write_input(dir: &Path, name: &str, img: &SdrImage, labels: &SemanticLabeling) -> std::path::PathBuf {
    let input = dir.join(format!("{name}.png"));
    write_ldr_png(img, &input).unwrap();
    std::fs::write(dir.join(format!("{name}.labels.png")), labels.to_label_png().unwrap()).unwrap();
    input
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (img, labels) = sky_scene(160, 120);
    let input = write_input(dir.path(), "scene", &img, &labels);
    let config = PipelineConfig {
        seed: 2024,
        ..PipelineConfig::default()
    };

    // (a) byte-identical files
    let (a, b) = (dir.path().join("a.hdr"), dir.path().join("b.hdr"));
    run(&input, &a, &config, &RunOptions::default()).map_err(|e| e.to_string())?;
    run(&input, &b, &config, &RunOptions::default()).map_err(|e| e.to_string())?;
    let (fa, fb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    ensure(fa == fb, || "two runs wrote different .hdr files".into())?;

    // the in-memory run reproduces the file
    let img = ditmo_core::imgcore::read_ldr(&input).unwrap();
    let graph = OrderedSemanticGraph::unconnected(&PromptConfig::builtin());
    let p = process(&img, &graph, &MockBackend::new().with_labels(labels), &config).map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    encode_hdr(&p.hdr, &mut bytes).unwrap();
    ensure(bytes == fa, || "in-memory result differs from the written file".into())?;
    ensure(!p.manifest.order.is_empty(), || "nothing was inpainted".into())?;

    let base = linearize(&img, config.crf);
    let saturated: Vec<bool> = img
        .pixels()
        .iter()
        .map(|px| px.iter().any(|&v| (v * 255.0).round() >= 250.0))
        .collect();

    // (b) detail beyond the unclipped input
    let max_unclipped = base
        .pixels()
        .iter()
        .zip(&saturated)
        .filter(|(_, &s)| !s)
        .map(|(&px, _)| luminance(px))
        .fold(0.0, f64::max);
    let max_inpainted = p
        .masks
        .iter()
        .filter(|m| p.manifest.order.contains(&m.class))
        .flat_map(|m| m.inpaint.bits().iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
        .map(|i| luminance(p.hdr.pixels()[i]))
        .fold(0.0, f64::max);
    ensure(max_inpainted > max_unclipped, || {
        format!("inpainted max {max_inpainted} <= unclipped max {max_unclipped}")
    })?;

    // (c) untouched pixels are bit-exact
    let mut untouched = 0;
    let mut changed = 0;
    for (i, &sat) in saturated.iter().enumerate() {
        let alpha_zero = p.masks.iter().all(|m| m.guide.alpha()[i] == 0.0);
        if sat || !alpha_zero {
            continue;
        }
        untouched += 1;
        if p.hdr.pixels()[i].map(f32::to_bits) != base.pixels()[i].map(f32::to_bits) {
            changed += 1;
        }
    }
    ensure(changed == 0, || format!("{changed} of {untouched} untouched pixels differ"))?;

    // (d) wider dynamic range
    let dr_out = dynamic_range(&p.hdr).unwrap();
    let dr_in = dynamic_range(&base).unwrap();
    ensure(dr_out > dr_in, || format!("dynamic range {dr_out} <= input {dr_in}"))?;

    Ok(format!(
        "(a) identical {}-byte files (b) inpainted max luminance {max_inpainted:.3} > unclipped {max_unclipped:.3} (c) {untouched} untouched pixels bit-exact (d) {dr_out:.2} > {dr_in:.2} stops",
        fa.len()
    ))
}

// --------------------------------------------------------------------- graph

fn builtin_graph(edges: Vec<Edge>) -> OrderedSemanticGraph {
    OrderedSemanticGraph::new(PromptConfig::builtin().to_array(), edges).unwrap()
}

fn permutations(items: &[SemanticClass]) -> Vec<Vec<SemanticClass>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Best total forward weight; ties broken by descending net dominance, then
/// ascending class id, compared position by position.
fn order_oracle(edges: &[Edge], present: &[SemanticClass]) -> Vec<SemanticClass> {
    let weight = |a: SemanticClass, b: SemanticClass| {
        edges
            .iter()
            .find(|e| e.from == a && e.to == b)
            .map_or(0.0, |e| e.weight)
    };
    let net = |c: SemanticClass| -> f64 { present.iter().map(|&o| weight(c, o) - weight(o, c)).sum() };
    let total: f64 = present.iter().flat_map(|&a| present.iter().map(move |&b| (a, b))).map(|(a, b)| weight(a, b)).sum();
    let eps = 1e-9 * (1.0 + total);
    let score = |order: &[SemanticClass]| -> f64 {
        let mut s = 0.0;
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                s += weight(order[i], order[j]);
            }
        }
        s
    };
    let perms = permutations(present);
    let best = perms.iter().map(|p| score(p)).fold(f64::NEG_INFINITY, f64::max);
    perms
        .into_iter()
        .filter(|p| score(p) >= best - eps)
        .min_by(|a, b| {
            for (x, y) in a.iter().zip(b) {
                let o = (-net(*x)).total_cmp(&-net(*y)).then(x.id().cmp(&y.id()));
                if o.is_ne() {
                    return o;
                }
            }
            std::cmp::Ordering::Equal
        })
        .unwrap()
}

fn random_dag(rng: &mut ChaCha8Rng) -> Vec<Edge> {
    let mut rank: Vec<SemanticClass> = SemanticClass::ALL.to_vec();
    for i in (1..rank.len()).rev() {
        rank.swap(i, rng.random_range(0..=i));
    }
    let density = rng.random_range(0.2..0.9);
    let mut edges = Vec::new();
    for i in 0..rank.len() {
        for j in i + 1..rank.len() {
            if rng.random_bool(density) {
                // coarse weights make equal-score orders common
                let weight = if rng.random_bool(0.5) {
                    rng.random_range(1..=4) as f64 * 0.5
                } else {
                    rng.random_range(0.01..5.0)
                };
                edges.push(Edge {
                    from: rank[i],
                    to: rank[j],
                    weight,
                    count: 1,
                });
            }
        }
    }
    edges
}

fn sky_water_example() -> Result<String, String> {
    let prompts = PromptConfig::from_json(r#"{"sky": ["clear blue sky"], "water": ["water reflecting #"]}"#)
        .map_err(|e| e.to_string())?;
    let (w, h) = (32, 24);
    let hdr = LinearImage::from_fn(w, h, |_, y| if y < 12 { [8.0, 9.0, 10.0] } else { [0.6, 0.8, 1.0] }).unwrap();
    let labels = hard_labels(w, h, |_, y| if y < 12 { SemanticClass::Sky } else { SemanticClass::Water });
    let graph = build_graph([(&hdr, &labels)], &AlbedoTable::default(), &prompts).map_err(|e| e.to_string())?;
    let edges: Vec<(SemanticClass, SemanticClass)> = graph.edges().iter().map(|e| (e.from, e.to)).collect();
    ensure(edges == [(SemanticClass::Sky, SemanticClass::Water)], || format!("edges {edges:?}"))?;
    let order = inpaint_order(&graph, &[SemanticClass::Water, SemanticClass::Sky]);
    ensure(order == [SemanticClass::Sky, SemanticClass::Water], || format!("order {order:?}"))?;

    // through the full pipeline: a clipped sky over a clipped water surface
    let (sw, sh) = (96, 72);
    let img = SdrImage::from_fn(sw, sh, |x, y| match y {
        0..30 => [1.0; 3],
        30..36 => [0.45, 0.5, 0.4],
        _ if (20..76).contains(&x) && y < 60 => [1.0; 3],
        _ => [0.2, 0.3, 0.45],
    })
    .unwrap();
    let labels = hard_labels(sw, sh, |_, y| if y < 33 { SemanticClass::Sky } else { SemanticClass::Water });
    let config = PipelineConfig {
        seed: 9,
        ..PipelineConfig::default()
    };
    let p = process(&img, &graph, &MockBackend::new().with_labels(labels), &config).map_err(|e| e.to_string())?;
    ensure(p.manifest.order == order, || format!("pipeline order {:?}", p.manifest.order))?;
    let water = p
        .manifest
        .classes
        .iter()
        .find(|c| c.class == SemanticClass::Water)
        .and_then(|c| c.prompt.clone())
        .unwrap_or_default();
    ensure(water == "water reflecting clear blue sky", || format!("water prompt {water:?}"))?;
    let direct = sample_prompt(&graph, SemanticClass::Water, 0, &["clear blue sky".into()], None).map_err(|e| e.to_string())?;
    ensure(direct == water, || format!("direct sampling gave {direct:?}"))?;
    Ok(water)
}

fn graph_ordering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x67726170);
    let mut subsets = 0;
    let mut mismatched = 0;
    for _ in 0..50 {
        let edges = random_dag(&mut rng);
        let g = builtin_graph(edges.clone());
        for bits in 1u32..1 << 9 {
            if bits.count_ones() > 5 {
                continue;
            }
            let present: Vec<SemanticClass> =
                SemanticClass::ALL.into_iter().filter(|c| bits >> c.id() & 1 == 1).collect();
            subsets += 1;
            if inpaint_order(&g, &present) != order_oracle(&edges, &present) {
                mismatched += 1;
            }
        }
    }
    ensure(mismatched == 0, || format!("{mismatched} of {subsets} subsets differ from brute force"))?;
    let prompt = sky_water_example()?;
    Ok(format!(
        "{subsets} subsets over 50 random graphs match brute-force permutation search; sky -> water gives \"{prompt}\""
    ))
}

// ---------------------------------------------------------------------- rgbe

fn rgbe_codec() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x72676265);
    let mut worst_pixel: f64 = 0.0;
    let mut worst_gray: f64 = 0.0;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for &(w, h) in &[(257usize, 131usize), (5, 7), (8, 3), (1024, 2)] {
        let img = LinearImage::from_fn(w, h, |x, _| {
            if x % 3 == 0 {
                [rng.random_range((1e-4f64).ln()..(1e4f64).ln()).exp() as f32; 3]
            } else {
                std::array::from_fn(|_| rng.random_range((1e-4f64).ln()..(1e4f64).ln()).exp() as f32)
            }
        })
        .unwrap();
        let path = dir.path().join(format!("{w}x{h}.hdr"));
        write_hdr(&img, &path).map_err(|e| e.to_string())?;
        let bytes = std::fs::read(&path).unwrap();
        let header = format!("#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y {h} +X {w}\n");
        ensure(bytes.starts_with(header.as_bytes()), || {
            format!("header {:?}", String::from_utf8_lossy(&bytes[..header.len().min(bytes.len())]))
        })?;
        let back = read_hdr(&path).map_err(|e| e.to_string())?;
        let again = decode_hdr(&bytes[..]).map_err(|e| e.to_string())?;
        ensure(back == again, || "file and stream decoding differ".into())?;
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            let max = a.iter().fold(0f32, |m, &v| m.max(v)) as f64;
            for c in 0..3 {
                let err = (a[c] as f64 - b[c] as f64).abs();
                worst_pixel = worst_pixel.max(err / max);
                if a[0] == a[1] && a[1] == a[2] {
                    worst_gray = worst_gray.max(err / a[c] as f64);
                }
            }
        }
    }
    ensure(worst_pixel <= 0.005 && worst_gray <= 0.005, || {
        format!("round-trip error {worst_pixel:.3e} (gray {worst_gray:.3e})")
    })?;
    Ok(format!(
        "channels in [1e-4, 1e4]: max error {:.3}% of the pixel maximum, {:.3}% on gray values; headers exact",
        worst_pixel * 100.0,
        worst_gray * 100.0
    ))
}

// -------------------------------------------------------------------- budget

fn stage_budget() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (w, h) = (1024, 768);
    let img = SdrImage::from_fn(w, h, |x, y| {
        let (fx, fy) = (x as f32 / w as f32, y as f32 / h as f32);
        if fy < 0.35 {
            [1.0, 1.0, (0.97 + 0.03 * fy).min(1.0)]
        } else if fy < 0.6 {
            let lit = (x / 64 + y / 48) % 5 == 0;
            if lit { [1.0; 3] } else { [0.3 + 0.3 * fx, 0.3, 0.28] }
        } else if (0.2..0.8).contains(&fx) && fy < 0.75 {
            [1.0, 0.99, 0.98]
        } else {
            [0.1, 0.2 + 0.1 * fx, 0.35]
        }
    })
    .unwrap();
    let labels = hard_labels(w, h, |_, y| {
        let fy = y as f32 / h as f32;
        if fy < 0.36 {
            SemanticClass::Sky
        } else if fy < 0.6 {
            SemanticClass::Cityscape
        } else {
            SemanticClass::Water
        }
    });
    let input = write_input(dir.path(), "large", &img, &labels);
    let output = dir.path().join("large.hdr");
    let start = Instant::now();
    let report = run(&input, &output, &PipelineConfig::default(), &RunOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(report.manifest.order.len() >= 2, || format!("only {:?} inpainted", report.manifest.order))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:.2?}"))?;
    Ok(format!(
        "1024x768, {} classes inpainted, {} brackets, {elapsed:.2?}",
        report.manifest.order.len(),
        report.manifest.brackets.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("morphology matches set-definition oracle", morphology),
        ("opening laws", opening_laws),
        ("exposure math", exposure_math),
        ("merge round trip", merge_round_trip),
        ("end-to-end determinism and detail recovery", end_to_end),
        ("graph ordering oracle", graph_ordering),
        ("RGBE codec", rgbe_codec),
        ("pipeline stage budget", stage_budget),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
