//! Images from density grids and attractor clouds.
//!
//! Brightness is logarithmic in the count, `ln(1 + c) / ln(1 + max)`, and
//! any nonzero count maps to at least entry 1 of the color table so lit
//! pixels never blend into the background.

use num_complex::Complex64;

use crate::density::{density_of, DensityGrid, RootBuffer, Viewport};
use crate::dragon::{attractor, AttractorCloud, DragonQuery};
use crate::error::{param, Error, Result};

/// 256-entry color table plus the background used for empty pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorMap {
    pub name: String,
    pub table: Vec<[u8; 3]>,
    pub background: [u8; 3],
}

impl ColorMap {
    /// Black to white.
    pub fn gray() -> Self {
        let table = (0..=255u8).map(|i| [i, i, i]).collect();
        Self { name: "gray".into(), table, background: [0, 0, 0] }
    }

    /// Dark red through orange to pale yellow.
    pub fn ember() -> Self {
        let stops: [(f64, [f64; 3]); 4] = [
            (0.0, [8.0, 2.0, 4.0]),
            (0.35, [150.0, 30.0, 10.0]),
            (0.7, [245.0, 150.0, 40.0]),
            (1.0, [255.0, 250.0, 220.0]),
        ];
        let table = (0..256)
            .map(|i| {
                let t = i as f64 / 255.0;
                let k = stops.windows(2).position(|w| t <= w[1].0).unwrap_or(2);
                let (t0, a) = stops[k];
                let (t1, b) = stops[k + 1];
                let f = (t - t0) / (t1 - t0);
                let mix = |c: usize| (a[c] + (b[c] - a[c]) * f).round() as u8;
                [mix(0), mix(1), mix(2)]
            })
            .collect();
        Self { name: "ember".into(), table, background: [0, 0, 0] }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "gray" | "grey" => Ok(Self::gray()),
            "ember" => Ok(Self::ember()),
            other => Err(param(format!("unknown color map {other:?} (expected gray or ember)"))),
        }
    }
}

/// Row-major 8-bit RGB raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let pixels = rgb.iter().copied().cycle().take(width as usize * height as usize * 3).collect();
        Self { width, height, pixels }
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// Number of pixels differing from `background`.
    pub fn lit_pixels(&self, background: [u8; 3]) -> usize {
        self.pixels.chunks_exact(3).filter(|p| *p != background).count()
    }
}

/// Table index used for a count.
pub fn shade_index(count: u32, max_count: u32) -> Option<usize> {
    if count == 0 || max_count == 0 {
        return None;
    }
    let b = (count as f64).ln_1p() / (max_count as f64).ln_1p();
    Some(((b * 255.0).round() as usize).clamp(1, 255))
}

pub fn shade(grid: &DensityGrid, map: &ColorMap) -> Image {
    let mut img = Image::filled(grid.width(), grid.height(), map.background);
    let max = grid.max_count();
    for (i, &c) in grid.counts().iter().enumerate() {
        if let Some(idx) = shade_index(c, max) {
            img.pixels[i * 3..i * 3 + 3].copy_from_slice(&map.table[idx]);
        }
    }
    img
}

/// Frame centered at 1 enclosing the bounding disk with a 10% margin.
pub fn default_attractor_viewport(query: &DragonQuery, width: u32, height: u32) -> Viewport {
    let r = query.bounding_radius() * 1.1;
    let half_width = if r > 0.0 { r } else { 1.0 };
    Viewport { center: Complex64::new(1.0, 0.0), half_width, width, height }
}

/// Pixel-scale snapping for attractor rendering: half a pixel.
pub fn default_dedup(viewport: &Viewport) -> f64 {
    viewport.pixel_size() / 2.0
}

pub fn render_attractor(cloud: &AttractorCloud, viewport: &Viewport, map: &ColorMap) -> Image {
    let mut grid = DensityGrid::new(*viewport);
    grid.accumulate(&cloud.points);
    shade(&grid, map)
}

/// Computes and renders `D_q` at depth `depth` in the default frame.
pub fn render_dragon(query: DragonQuery, depth: u32, size: u32, map: &ColorMap) -> Result<Image> {
    let viewport = default_attractor_viewport(&query, size, size);
    let cloud = attractor(query, depth, default_dedup(&viewport))?;
    Ok(render_attractor(&cloud, &viewport, map))
}

const SEPARATOR: [u8; 3] = [96, 96, 96];

/// `X_n` around `q` (left) beside `D_q` (right), `size` x `size` each with a
/// two-pixel separator column. No rotation is applied to the dragon.
pub fn compare_panel(
    q: Complex64,
    window: f64,
    roots: &RootBuffer,
    depth: u32,
    size: u32,
    map: &ColorMap,
    parallelism: usize,
) -> Result<Image> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(param(format!("window must be positive, got {window}")));
    }
    let query = DragonQuery::new(q)?;
    let left_view = Viewport::new(q, window, size, size)?;
    let left = shade(&density_of(roots, &left_view, parallelism), map);
    let right = render_dragon(query, depth, size, map)?;
    hconcat(&[&left, &right], 2, SEPARATOR)
}

fn hconcat(parts: &[&Image], gap: u32, fill: [u8; 3]) -> Result<Image> {
    let height = parts.first().map(|p| p.height).unwrap_or(0);
    if parts.iter().any(|p| p.height != height) {
        return Err(param("panel heights differ"));
    }
    let width = parts.iter().map(|p| p.width).sum::<u32>() + gap * parts.len().saturating_sub(1) as u32;
    let mut out = Image::filled(width, height, fill);
    let mut x0 = 0;
    for p in parts {
        for y in 0..height {
            for x in 0..p.width {
                out.set(x0 + x, y, p.get(x, y));
            }
        }
        x0 += p.width + gap;
    }
    Ok(out)
}

/// 8-bit RGB, non-interlaced PNG.
pub fn encode_png(image: &Image) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, image.width, image.height);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(png_err)?;
        writer.write_image_data(&image.pixels).map_err(png_err)?;
        writer.finish().map_err(png_err)?;
    }
    Ok(out)
}

fn png_err(e: png::EncodingError) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Plain-text PGM of the raw counts, clamped to 65535.
pub fn encode_pgm(grid: &DensityGrid) -> Vec<u8> {
    let mut out = format!("P2\n{} {}\n65535\n", grid.width(), grid.height());
    for row in grid.counts().chunks(grid.width() as usize) {
        let line: Vec<String> = row.iter().map(|&c| c.min(65535).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}
