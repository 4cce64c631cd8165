//! Local data density of grayscale images.
//!
//! An image is cut into an `n_s x n_s` grid of sectors; each sector is
//! flattened row-major and its density `rho = sum p^2 / (P max p^2)` is the
//! heralding probability an encoder of that sector would see. When `n_s`
//! does not divide a dimension, the first `dim % n_s` rows (or columns) of
//! sectors are one pixel larger.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randstats::sample_gaussian;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major samples.
    pub pixels: Vec<u16>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, maxval: u16, pixels: Vec<u16>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::BadShape(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(p) = pixels.iter().find(|&&p| p > maxval) {
            return Err(Error::Invalid(format!("pixel {p} above maxval {maxval}")));
        }
        Ok(GrayImage {
            width,
            height,
            maxval,
            pixels,
        })
    }

    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.pixels[row * self.width + col]
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::parse(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::parse(start, format!("{what} out of range")))
    }
}

/// Parse a binary (`P5`) or ASCII (`P2`) PGM. Samples are big-endian when
/// `maxval > 255`.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        Some([b'P', _]) => {
            return Err(Error::parse(
                0,
                "unsupported netpbm variant (only P2 and P5)",
            ))
        }
        _ => return Err(Error::parse(0, "not a PGM file")),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let max_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::parse(max_at, "empty image"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::parse(
            max_at,
            format!("maxval {maxval} not in 1..=65535"),
        ));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::parse(max_at, "image too large"))?;
    let mut pixels = Vec::with_capacity(count);
    if binary {
        if !bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(Error::parse(cur.pos, "expected whitespace after maxval"));
        }
        cur.pos += 1;
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        let data = bytes.get(cur.pos..cur.pos + need).ok_or_else(|| {
            Error::parse(bytes.len(), format!("truncated data: need {need} bytes"))
        })?;
        if wide {
            pixels.extend(
                data.chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]])),
            );
        } else {
            pixels.extend(data.iter().map(|&b| u16::from(b)));
        }
        if let Some(i) = pixels.iter().position(|&p| u64::from(p) > maxval) {
            let offset = cur.pos + i * if wide { 2 } else { 1 };
            return Err(Error::parse(offset, "sample above maxval"));
        }
    } else {
        for _ in 0..count {
            cur.skip_space_and_comments();
            let at = cur.pos;
            let v = cur.number("sample")?;
            if v > maxval {
                return Err(Error::parse(at, "sample above maxval"));
            }
            pixels.push(v as u16);
        }
    }
    Ok(GrayImage {
        width,
        height,
        maxval: maxval as u16,
        pixels,
    })
}

/// Binary `P5` encoding.
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", img.width, img.height, img.maxval).into_bytes();
    if img.maxval > 255 {
        out.extend(img.pixels.iter().flat_map(|p| p.to_be_bytes()));
    } else {
        out.extend(img.pixels.iter().map(|&p| p as u8));
    }
    out
}

/// Near-equal split of `0..len` into `parts` ranges, larger ones first.
pub fn partition(len: usize, parts: usize) -> Vec<Range<usize>> {
    let (base, rem) = (len / parts, len % parts);
    let mut start = 0;
    (0..parts)
        .map(|i| {
            let size = base + usize::from(i < rem);
            let r = start..start + size;
            start += size;
            r
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub n_s: usize,
    /// Sector heights, top to bottom.
    pub row_sizes: Vec<usize>,
    /// Sector widths, left to right.
    pub col_sizes: Vec<usize>,
    /// Row-major; `None` for all-zero sectors.
    pub rho: Vec<Option<f64>>,
    /// Mean over defined sectors.
    pub mean_rho: Option<f64>,
    pub undefined: usize,
}

impl DensityGrid {
    pub fn at(&self, row: usize, col: usize) -> Option<f64> {
        self.rho[row * self.n_s + col]
    }
}

fn sector_rho(img: &GrayImage, rows: Range<usize>, cols: Range<usize>) -> Option<f64> {
    let mut max = 0u64;
    let mut sum = 0.0f64;
    let count = rows.len() * cols.len();
    for r in rows {
        for &p in &img.pixels[r * img.width + cols.start..r * img.width + cols.end] {
            let p = u64::from(p);
            max = max.max(p);
            sum += (p * p) as f64;
        }
    }
    if max == 0 {
        return None;
    }
    Some(sum / (count as f64 * (max * max) as f64))
}

pub fn sector_density(img: &GrayImage, n_s: usize) -> Result<DensityGrid> {
    if n_s == 0 || n_s > img.width.min(img.height) {
        return Err(Error::BadGrid {
            n_s,
            width: img.width,
            height: img.height,
        });
    }
    let rows = partition(img.height, n_s);
    let cols = partition(img.width, n_s);
    let rho: Vec<Option<f64>> = (0..n_s * n_s)
        .into_par_iter()
        .map(|i| sector_rho(img, rows[i / n_s].clone(), cols[i % n_s].clone()))
        .collect();
    let defined: Vec<f64> = rho.iter().flatten().copied().collect();
    let mean_rho = if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    };
    Ok(DensityGrid {
        n_s,
        row_sizes: rows.iter().map(Range::len).collect(),
        col_sizes: cols.iter().map(Range::len).collect(),
        undefined: rho.len() - defined.len(),
        rho,
        mean_rho,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub n_s: usize,
    /// Mean pixels per sector.
    pub sector_size: f64,
    pub mean_rho: Option<f64>,
    /// `a / ln(x)`; undefined for `x <= 1`.
    pub c_log: Option<f64>,
    /// `b / sqrt(x)`.
    pub c_sqrt: Option<f64>,
}

/// Comparison laws pass exactly through the first (largest-sector) point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitAnchor {
    pub sector_size: f64,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub rows: Vec<CurveRow>,
    pub anchor: FitAnchor,
    pub undefined_sector_count: usize,
}

pub fn density_scaling_curve(img: &GrayImage, n_s_list: &[usize]) -> Result<DensityCurve> {
    if n_s_list.is_empty() {
        return Err(Error::Invalid("empty grid list".into()));
    }
    if n_s_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid(
            "grid sizes must be strictly ascending".into(),
        ));
    }
    let area = (img.width * img.height) as f64;
    let grids = n_s_list
        .iter()
        .map(|&n_s| sector_density(img, n_s))
        .collect::<Result<Vec<_>>>()?;
    let x0 = area / (n_s_list[0] * n_s_list[0]) as f64;
    let r0 = grids[0].mean_rho;
    let a = r0.filter(|_| x0 > 1.0).map(|r| r * x0.ln());
    let b = r0.map(|r| r * x0.sqrt());
    let rows = grids
        .iter()
        .map(|g| {
            let x = area / (g.n_s * g.n_s) as f64;
            CurveRow {
                n_s: g.n_s,
                sector_size: x,
                mean_rho: g.mean_rho,
                c_log: a.filter(|_| x > 1.0).map(|a| a / x.ln()),
                c_sqrt: b.map(|b| b / x.sqrt()),
            }
        })
        .collect();
    Ok(DensityCurve {
        rows,
        anchor: FitAnchor {
            sector_size: x0,
            a,
            b,
        },
        undefined_sector_count: grids.iter().map(|g| g.undefined).sum(),
    })
}

/// Test images.
pub mod synthetic {
    use super::*;

    pub fn constant(width: usize, height: usize, value: u16) -> GrayImage {
        GrayImage {
            width,
            height,
            maxval: value.max(1),
            pixels: vec![value; width * height],
        }
    }

    /// `|g|` for standard normal `g`, scaled by 4096 and clipped to 16 bits.
    /// Row `r` is stream `r` of the seeded generator.
    pub fn gaussian_noise(width: usize, height: usize, seed: u64) -> GrayImage {
        let pixels: Vec<u16> = (0..height as u64)
            .into_par_iter()
            .flat_map_iter(|r| {
                sample_gaussian(width, seed, r)
                    .into_iter()
                    .map(|g| (g.abs() * 4096.0).round().min(65535.0) as u16)
            })
            .collect();
        GrayImage {
            width,
            height,
            maxval: 65535,
            pixels,
        }
    }

    /// Black image with one bright pixel at the centre of every sector of the
    /// `n_s` grid.
    pub fn bright_pixels(width: usize, height: usize, n_s: usize) -> GrayImage {
        let mut img = constant(width, height, 0);
        img.maxval = 255;
        for r in partition(height, n_s) {
            for c in partition(width, n_s) {
                let (pr, pc) = (r.start + r.len() / 2, c.start + c.len() / 2);
                img.pixels[pr * width + pc] = 255;
            }
        }
        img
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ascii_checker() {
        let img = load_pgm(b"P2 2 2 255\n0 255\n255 0\n").unwrap();
        assert_eq!((img.width, img.height, img.maxval), (2, 2, 255));
        assert_eq!(img.pixels, vec![0, 255, 255, 0]);
    }

    #[test]
    fn comments_in_header() {
        let img = load_pgm(b"P2\n# made by hand\n2 # width\n1\n7\n3 7\n").unwrap();
        assert_eq!(img.pixels, vec![3, 7]);
    }

    #[test]
    fn sixteen_bit_binary() {
        let mut bytes = b"P5\n2 1\n65535\n".to_vec();
        bytes.extend([0x12, 0x34, 0xff, 0xfe]);
        let img = load_pgm(&bytes).unwrap();
        assert_eq!(img.pixels, vec![0x1234, 0xfffe]);
        assert_eq!(load_pgm(&write_pgm(&img)).unwrap(), img);
    }

    #[test]
    fn parse_errors_carry_offsets() {
        assert!(matches!(
            load_pgm(b"P3 1 1 255 0 0 0"),
            Err(Error::Parse { offset: 0, .. })
        ));
        assert!(matches!(
            load_pgm(b"P5 2 2 255\n\x01"),
            Err(Error::Parse { offset: 12, .. })
        ));
        assert!(matches!(
            load_pgm(b"P2 2 x"),
            Err(Error::Parse { offset: 5, .. })
        ));
        assert!(matches!(
            load_pgm(b"P2 1 1 10 11"),
            Err(Error::Parse { offset: 10, .. })
        ));
        assert!(matches!(
            load_pgm(b"P2 1 1 70000 1"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn constant_image_is_dense() {
        let img = synthetic::constant(10, 7, 42);
        for n_s in 1..=7 {
            let g = sector_density(&img, n_s).unwrap();
            assert!(g.rho.iter().all(|r| *r == Some(1.0)));
        }
    }

    #[test]
    fn hand_evaluated_sector() {
        let img = GrayImage::new(4, 4, 16, (1..=16).collect()).unwrap();
        let g = sector_density(&img, 2).unwrap();
        assert!((g.at(0, 0).unwrap() - 66.0 / 144.0).abs() < 1e-15);
    }

    #[test]
    fn single_pixel_sectors() {
        let img = synthetic::bright_pixels(30, 20, 4);
        let g = sector_density(&img, 4).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let p = (g.row_sizes[r] * g.col_sizes[c]) as f64;
                assert_eq!(g.at(r, c).unwrap(), 1.0 / p);
            }
        }
    }

    #[test]
    fn zero_sectors_are_undefined() {
        let mut img = synthetic::constant(4, 4, 0);
        img.pixels[0] = 5;
        let g = sector_density(&img, 2).unwrap();
        assert_eq!(g.undefined, 3);
        assert_eq!(g.mean_rho, Some(0.25));
    }

    #[test]
    fn grid_bounds() {
        let img = synthetic::constant(5, 3, 1);
        assert!(matches!(
            sector_density(&img, 0),
            Err(Error::BadGrid { .. })
        ));
        assert!(matches!(
            sector_density(&img, 4),
            Err(Error::BadGrid { .. })
        ));
    }

    #[test]
    fn curve_anchors_on_first_point() {
        let img = synthetic::gaussian_noise(64, 64, 1);
        let c = density_scaling_curve(&img, &[1, 2, 4]).unwrap();
        let first = &c.rows[0];
        assert!((first.c_log.unwrap() - first.mean_rho.unwrap()).abs() < 1e-12);
        assert!((first.c_sqrt.unwrap() - first.mean_rho.unwrap()).abs() < 1e-12);
        assert!(c.rows.windows(2).all(|w| w[1].mean_rho > w[0].mean_rho));
        assert!(density_scaling_curve(&img, &[2, 1]).is_err());
    }

    #[test]
    fn bright_pixel_curve() {
        // One bright pixel per 8x8 sector: any coarser aligned grid keeps the
        // same fraction, a finer one leaves empty sectors undefined.
        let img = synthetic::bright_pixels(64, 64, 8);
        let c = density_scaling_curve(&img, &[1, 2, 4, 8, 16]).unwrap();
        for row in &c.rows[..4] {
            assert!(
                (row.mean_rho.unwrap() - 1.0 / 64.0).abs() < 1e-15,
                "{row:?}"
            );
        }
        assert_eq!(c.rows[4].mean_rho, Some(1.0 / 16.0));
        assert_eq!(c.undefined_sector_count, 256 - 64);
    }

    proptest! {
        #[test]
        fn partition_covers(len in 1usize..500, parts in 1usize..50) {
            prop_assume!(parts <= len);
            let p = partition(len, parts);
            prop_assert_eq!(p[0].start, 0);
            prop_assert_eq!(p.last().unwrap().end, len);
            prop_assert!(p.windows(2).all(|w| w[0].end == w[1].start));
            let sizes: Vec<usize> = p.iter().map(Range::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }

        #[test]
        fn scale_invariance(seed in any::<u64>(), k in 1u16..16, n_s in 1usize..6) {
            let mut img = synthetic::gaussian_noise(12, 12, seed);
            img.pixels.iter_mut().for_each(|p| *p /= 16);
            img.maxval = 4096;
            let mut scaled = img.clone();
            scaled.pixels.iter_mut().for_each(|p| *p *= k);
            scaled.maxval = 4096 * k;
            let a = sector_density(&img, n_s).unwrap();
            let b = sector_density(&scaled, n_s).unwrap();
            for (x, y) in a.rho.iter().zip(&b.rho) {
                match (x, y) {
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                    (None, None) => {}
                    _ => prop_assert!(false),
                }
            }
        }
    }
}
