//! Radiance RGBE (`.hdr`) codec.
//!
//! Pixels are stored as three 8-bit mantissas sharing one exponent byte.
//! Mantissas are rounded to nearest, so the largest channel of a pixel
//! round-trips with relative error below `0.5 / 128`. Scanlines use the
//! new-style run-length encoding whenever the width permits it.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{ImageError, LinearImage, Rgb};

const MAGIC: &str = "#?RADIANCE";
const FORMAT_LINE: &str = "FORMAT=32-bit_rle_rgbe";
const MIN_RLE_WIDTH: usize = 8;
const MAX_RLE_WIDTH: usize = 0x7fff;

fn encode_pixel(rgb: Rgb) -> [u8; 4] {
    let v = rgb.iter().fold(0.0f64, |m, &c| m.max(c as f64));
    if v < 1e-32 {
        return [0; 4];
    }
    // v = m * 2^e with m in [0.5, 1)
    let mut e = v.log2().floor() as i32 + 1;
    while v >= 2f64.powi(e) {
        e += 1;
    }
    while v < 2f64.powi(e - 1) {
        e -= 1;
    }
    let mut scale = 2f64.powi(8 - e);
    if (v * scale).round() >= 256.0 {
        e += 1;
        scale *= 0.5;
    }
    if e < -127 {
        return [0; 4];
    }
    if e > 127 {
        return [255, 255, 255, 255];
    }
    let q = |c: f32| (c as f64 * scale).round().clamp(0.0, 255.0) as u8;
    [q(rgb[0]), q(rgb[1]), q(rgb[2]), (e + 128) as u8]
}

fn decode_pixel(p: [u8; 4]) -> Rgb {
    if p[3] == 0 {
        return [0.0; 3];
    }
    let f = 2f64.powi(p[3] as i32 - 136);
    [
        (p[0] as f64 * f) as f32,
        (p[1] as f64 * f) as f32,
        (p[2] as f64 * f) as f32,
    ]
}

fn header(width: usize, height: usize) -> String {
    format!("{MAGIC}\n{FORMAT_LINE}\n\n-Y {height} +X {width}\n")
}

/// Serializes `img` as a Radiance `.hdr` byte stream.
pub fn encode_hdr(img: &LinearImage, mut out: impl Write) -> std::io::Result<()> {
    let (w, h) = img.dimensions();
    out.write_all(header(w, h).as_bytes())?;
    let rle = (MIN_RLE_WIDTH..=MAX_RLE_WIDTH).contains(&w);
    let mut line = vec![[0u8; 4]; w];
    let mut buf = Vec::with_capacity(w * 4 + 16);
    for row in img.pixels().chunks_exact(w) {
        for (dst, px) in line.iter_mut().zip(row) {
            *dst = encode_pixel(*px);
        }
        buf.clear();
        if rle {
            buf.extend_from_slice(&[2, 2, (w >> 8) as u8, (w & 0xff) as u8]);
            let mut channel = Vec::with_capacity(w);
            for c in 0..4 {
                channel.clear();
                channel.extend(line.iter().map(|p| p[c]));
                rle_encode(&channel, &mut buf);
            }
        } else {
            buf.extend(line.iter().flatten());
        }
        out.write_all(&buf)?;
    }
    out.flush()
}

fn rle_encode(data: &[u8], out: &mut Vec<u8>) {
    const MIN_RUN: usize = 4;
    let mut cur = 0;
    while cur < data.len() {
        // find the next run of at least MIN_RUN identical bytes
        let mut beg_run = cur;
        let mut run_count = 0;
        while beg_run < data.len() {
            run_count = 1;
            while beg_run + run_count < data.len()
                && run_count < 127
                && data[beg_run + run_count] == data[beg_run]
            {
                run_count += 1;
            }
            if run_count >= MIN_RUN {
                break;
            }
            beg_run += run_count;
        }
        if beg_run >= data.len() {
            run_count = 0;
        }
        while cur < beg_run {
            let n = (beg_run - cur).min(128);
            out.push(n as u8);
            out.extend_from_slice(&data[cur..cur + n]);
            cur += n;
        }
        if run_count >= MIN_RUN {
            out.push(128 + run_count as u8);
            out.push(data[beg_run]);
            cur += run_count;
        }
    }
}

pub fn write_hdr(img: &LinearImage, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| ImageError::io(path, e))?;
    encode_hdr(img, BufWriter::new(file)).map_err(|e| ImageError::io(path, e))
}

pub fn read_hdr(path: impl AsRef<Path>) -> Result<LinearImage, ImageError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| ImageError::io(path, e))?;
    decode_hdr(BufReader::new(file))
}

fn bad(msg: impl Into<String>) -> ImageError {
    ImageError::InvalidHdr(msg.into())
}

/// Parses a Radiance `.hdr` stream with `-Y h +X w` orientation.
pub fn decode_hdr(mut input: impl BufRead) -> Result<LinearImage, ImageError> {
    let mut line = String::new();
    let read_line = |input: &mut dyn BufRead, line: &mut String| -> Result<(), ImageError> {
        line.clear();
        let n = input
            .read_line(line)
            .map_err(|e| bad(format!("header: {e}")))?;
        if n == 0 {
            return Err(bad("unexpected end of header"));
        }
        Ok(())
    };
    read_line(&mut input, &mut line)?;
    if !line.starts_with("#?") {
        return Err(bad("missing #? magic"));
    }
    loop {
        read_line(&mut input, &mut line)?;
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        if let Some(fmt) = l.strip_prefix("FORMAT=") {
            if fmt != "32-bit_rle_rgbe" {
                return Err(bad(format!("unsupported format {fmt}")));
            }
        }
    }
    read_line(&mut input, &mut line)?;
    let parts: Vec<&str> = line.split_whitespace().collect();
    let (height, width) = match parts.as_slice() {
        ["-Y", h, "+X", w] => (
            h.parse::<usize>().map_err(|_| bad("bad height"))?,
            w.parse::<usize>().map_err(|_| bad("bad width"))?,
        ),
        _ => return Err(bad(format!("unsupported resolution line {:?}", line.trim_end()))),
    };
    if width == 0 || height == 0 {
        return Err(bad("empty image"));
    }

    let mut data = Vec::with_capacity(width * height);
    let mut scan = vec![[0u8; 4]; width];
    for _ in 0..height {
        read_scanline(&mut input, &mut scan)?;
        data.extend(scan.iter().map(|p| decode_pixel(*p)));
    }
    LinearImage::new(width, height, data)
}

fn read_scanline(input: &mut impl Read, scan: &mut [[u8; 4]]) -> Result<(), ImageError> {
    let w = scan.len();
    let mut first = [0u8; 4];
    input
        .read_exact(&mut first)
        .map_err(|_| bad("truncated pixel data"))?;
    let is_rle = (MIN_RLE_WIDTH..=MAX_RLE_WIDTH).contains(&w)
        && first[0] == 2
        && first[1] == 2
        && first[2] & 0x80 == 0;
    if !is_rle {
        scan[0] = first;
        for px in scan.iter_mut().skip(1) {
            input
                .read_exact(px)
                .map_err(|_| bad("truncated pixel data"))?;
        }
        return Ok(());
    }
    if ((first[2] as usize) << 8 | first[3] as usize) != w {
        return Err(bad("scanline width mismatch"));
    }
    let mut byte = [0u8; 1];
    let mut next = |input: &mut dyn Read| -> Result<u8, ImageError> {
        input
            .read_exact(&mut byte)
            .map_err(|_| bad("truncated run-length data"))?;
        Ok(byte[0])
    };
    for c in 0..4 {
        let mut x = 0;
        while x < w {
            let code = next(input)? as usize;
            if code > 128 {
                let n = code - 128;
                if x + n > w {
                    return Err(bad("run overflows scanline"));
                }
                let v = next(input)?;
                for px in &mut scan[x..x + n] {
                    px[c] = v;
                }
                x += n;
            } else {
                if code == 0 || x + code > w {
                    return Err(bad("bad literal count"));
                }
                for px in &mut scan[x..x + code] {
                    px[c] = next(input)?;
                }
                x += code;
            }
        }
    }
    Ok(())
}
