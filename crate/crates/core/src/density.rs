//! Per-pixel root counts, the on-disk root cache, and full-set orchestration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::littlewood::family_size;
use crate::solver;

/// A rectangle of the complex plane sampled by square pixels.
///
/// Pixel `(0, 0)` is the top-left corner `(center.re - half_width,
/// center.im + half_height)`; the imaginary axis points up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Viewport {
    pub center: Complex64,
    pub half_width: f64,
    pub width: u32,
    pub height: u32,
}

impl Viewport {
    pub fn new(center: Complex64, half_width: f64, width: u32, height: u32) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(param(format!("half width must be positive, got {half_width}")));
        }
        if width == 0 || height == 0 {
            return Err(param("viewport needs at least one pixel"));
        }
        if !center.is_finite() {
            return Err(param("viewport center must be finite"));
        }
        Ok(Self { center, half_width, width, height })
    }

    /// The framing used for whole-set renders: `|z| < 2` plus a margin.
    pub fn full_set(width: u32, height: u32) -> Self {
        Self { center: Complex64::new(0.0, 0.0), half_width: 2.05, width, height }
    }

    pub fn half_height(&self) -> f64 {
        self.half_width * self.height as f64 / self.width as f64
    }

    pub fn pixel_size(&self) -> f64 {
        2.0 * self.half_width / self.width as f64
    }

    /// Complex coordinate of the center of pixel `(col, row)`.
    pub fn pixel_center(&self, col: u32, row: u32) -> Complex64 {
        let s = self.pixel_size();
        Complex64::new(
            self.center.re - self.half_width + (col as f64 + 0.5) * s,
            self.center.im + self.half_height() - (row as f64 + 0.5) * s,
        )
    }

    /// Cells of the pixel lattice containing `z`.
    ///
    /// Offsets are measured from the viewport center so that an
    /// origin-centered lattice treats `z` and its mirror images with the
    /// same arithmetic. Under [`EdgeRule::Shared`] a point exactly on an
    /// interior cell edge also lands in the neighbouring cell(s).
    fn cells(&self, z: Complex64, rule: EdgeRule, out: &mut Vec<(i64, i64)>) {
        out.clear();
        let s = self.pixel_size();
        let Some((col, col_edge)) = axis_cell((z.re - self.center.re) / s, self.width) else {
            return;
        };
        let Some((row, row_edge)) = axis_cell((self.center.im - z.im) / s, self.height) else {
            return;
        };
        out.push((col, row));
        if rule == EdgeRule::Shared {
            let col_edge = col_edge && col > 0;
            let row_edge = row_edge && row > 0;
            if col_edge {
                out.push((col - 1, row));
            }
            if row_edge {
                out.push((col, row - 1));
            }
            if col_edge && row_edge {
                out.push((col - 1, row - 1));
            }
        }
    }
}

/// Lattice index along one axis for an offset in pixel units from the
/// center, plus whether the offset sits exactly on a cell edge. `None` when
/// outside the half-open extent.
fn axis_cell(offset: f64, size: u32) -> Option<(i64, bool)> {
    if !offset.is_finite() {
        return None;
    }
    let (t, base) = if size.is_multiple_of(2) { (offset, size as i64 / 2) } else { (offset + 0.5, size as i64 / 2) };
    let floor = t.floor();
    if floor < -(base as f64) - 1.0 || floor > size as f64 {
        return None;
    }
    let index = floor as i64 + base;
    (0..size as i64).contains(&index).then_some((index, t == floor))
}

/// How a point lying exactly on a shared cell edge is counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeRule {
    /// Cells are half-open; every point lands in exactly one cell.
    HalfOpen,
    /// A point on an interior edge counts toward every cell sharing it.
    /// Mirror images of the lattice then map counts onto counts exactly.
    Shared,
}

/// A rectangular block of the viewport's pixel lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PixelWindow {
    pub x0: u32,
    pub y0: u32,
    pub width: u32,
    pub height: u32,
}

/// Root counts per pixel over a window of a viewport lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    viewport: Viewport,
    window: PixelWindow,
    rule: EdgeRule,
    counts: Vec<u32>,
    max_count: u32,
    inside: u64,
}

impl DensityGrid {
    /// Zero grid covering the whole viewport with half-open cells.
    pub fn new(viewport: Viewport) -> Self {
        Self::with_rule(viewport, EdgeRule::HalfOpen)
    }

    pub fn with_rule(viewport: Viewport, rule: EdgeRule) -> Self {
        let window = PixelWindow { x0: 0, y0: 0, width: viewport.width, height: viewport.height };
        Self::windowed(viewport, window, rule).expect("full window is always valid")
    }

    /// Zero grid over part of the viewport lattice (used for map tiles).
    pub fn windowed(viewport: Viewport, window: PixelWindow, rule: EdgeRule) -> Result<Self> {
        let fits = |start: u32, len: u32, size: u32| len > 0 && start.checked_add(len).is_some_and(|e| e <= size);
        if !fits(window.x0, window.width, viewport.width) || !fits(window.y0, window.height, viewport.height) {
            return Err(param(format!("window {window:?} does not fit the viewport lattice")));
        }
        let len = window.width as usize * window.height as usize;
        Ok(Self { viewport, window, rule, counts: vec![0; len], max_count: 0, inside: 0 })
    }

    pub fn viewport(&self) -> &Viewport {
        &self.viewport
    }

    pub fn window(&self) -> PixelWindow {
        self.window
    }

    pub fn rule(&self) -> EdgeRule {
        self.rule
    }

    pub fn width(&self) -> u32 {
        self.window.width
    }

    pub fn height(&self) -> u32 {
        self.window.height
    }

    /// Row-major counts.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn get(&self, col: u32, row: u32) -> u32 {
        self.counts[row as usize * self.window.width as usize + col as usize]
    }

    pub fn max_count(&self) -> u32 {
        self.max_count
    }

    /// Number of accumulated points whose primary (half-open) cell lies in
    /// the window. Equals [`DensityGrid::total`] under [`EdgeRule::HalfOpen`].
    pub fn inside(&self) -> u64 {
        self.inside
    }

    /// Sum of all pixel counts.
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Adds every point to the pixel(s) containing it; points outside are
    /// ignored.
    pub fn accumulate<'a>(&mut self, points: impl IntoIterator<Item = &'a Complex64>) {
        let mut cells = Vec::with_capacity(4);
        let w = self.window;
        for &z in points {
            self.viewport.cells(z, self.rule, &mut cells);
            for (k, &(col, row)) in cells.iter().enumerate() {
                let (x, y) = (col - w.x0 as i64, row - w.y0 as i64);
                if x < 0 || y < 0 || x >= w.width as i64 || y >= w.height as i64 {
                    continue;
                }
                if k == 0 {
                    self.inside += 1;
                }
                let c = &mut self.counts[y as usize * w.width as usize + x as usize];
                *c = c.saturating_add(1);
                self.max_count = self.max_count.max(*c);
            }
        }
    }

    fn same_lattice(&self, other: &Self) -> bool {
        self.viewport == other.viewport && self.window == other.window && self.rule == other.rule
    }

    fn add(&mut self, other: &Self) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a = a.saturating_add(*b);
        }
        self.inside += other.inside;
        self.max_count = self.counts.iter().copied().max().unwrap_or(0);
    }
}

/// Pixelwise sum of grids sharing one viewport, window and edge rule.
pub fn merge<'a>(grids: impl IntoIterator<Item = &'a DensityGrid>) -> Result<DensityGrid> {
    let mut iter = grids.into_iter();
    let mut out = iter.next().ok_or_else(|| param("merge needs at least one grid"))?.clone();
    for g in iter {
        if !out.same_lattice(g) {
            return Err(param("cannot merge grids over different viewports"));
        }
        out.add(g);
    }
    Ok(out)
}

/// Accumulates `points` into a copy of `template` using up to `parallelism`
/// private grids merged at the end.
pub fn accumulate_parallel(template: &DensityGrid, points: &[Complex64], parallelism: usize) -> DensityGrid {
    let workers = parallelism.max(1);
    let chunk = points.len().div_ceil(workers).max(4096);
    let partial: Vec<DensityGrid> = points
        .par_chunks(chunk)
        .map(|part| {
            let mut g = template.clone();
            g.accumulate(part);
            g
        })
        .collect();
    let mut out = template.clone();
    for g in &partial {
        out.add(g);
    }
    out
}

/// All roots of all normalized Littlewood polynomials with `n` terms.
///
/// Ordered by enumeration index, then by root index within a polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct RootBuffer {
    n: u32,
    roots: Vec<Complex64>,
}

impl RootBuffer {
    pub fn new(n: u32, roots: Vec<Complex64>) -> Result<Self> {
        if !(2..=crate::littlewood::MAX_TERMS).contains(&n) {
            return Err(param(format!("root buffers need 2 <= n <= 32, got {n}")));
        }
        let expected = expected_len(n);
        if roots.len() as u64 != expected {
            return Err(param(format!("root buffer for n={n} needs {expected} roots, got {}", roots.len())));
        }
        Ok(Self { n, roots })
    }

    pub fn terms(&self) -> u32 {
        self.n
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Roots of the polynomial at enumeration position `index`.
    pub fn polynomial(&self, index: u64) -> &[Complex64] {
        let d = self.n as usize - 1;
        &self.roots[index as usize * d..(index as usize + 1) * d]
    }

    pub fn into_roots(self) -> Vec<Complex64> {
        self.roots
    }
}

/// `(n - 1) * 2^(n - 1)`.
pub fn expected_len(n: u32) -> u64 {
    (n as u64 - 1) * family_size(n)
}

const MAGIC: &[u8; 4] = b"LWRT";
const VERSION: u8 = 1;
/// magic, version, 3 reserved, n (u16), 6 bytes padding, count (u64).
pub const HEADER_LEN: usize = 24;

/// Conventional cache file name for `n` inside a cache directory.
pub fn cache_path(dir: &Path, n: u32) -> PathBuf {
    dir.join(format!("roots-n{n:02}.lwrt"))
}

/// Serializes a root buffer in the cache format.
pub fn encode_cache(buffer: &RootBuffer) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + buffer.len() * 16);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&[0; 3]);
    out.extend_from_slice(&(buffer.n as u16).to_le_bytes());
    out.extend_from_slice(&[0; 6]);
    out.extend_from_slice(&(buffer.len() as u64).to_le_bytes());
    for r in &buffer.roots {
        out.extend_from_slice(&r.re.to_le_bytes());
        out.extend_from_slice(&r.im.to_le_bytes());
    }
    out
}

/// Parses the cache format; `path` is only used in error messages.
pub fn decode_cache(bytes: &[u8], expected_n: u32, path: &Path) -> Result<RootBuffer> {
    let bad = |reason: String| Error::Cache { path: path.to_path_buf(), reason };
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(bad("bad magic".into()));
    }
    if bytes[4] != VERSION {
        return Err(bad(format!("unsupported format version {}", bytes[4])));
    }
    let n = u16::from_le_bytes([bytes[8], bytes[9]]) as u32;
    if n != expected_n {
        return Err(Error::CacheMismatch { path: path.to_path_buf(), expected: expected_n, found: n });
    }
    let count = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if !(2..=crate::littlewood::MAX_TERMS).contains(&n) || count != expected_len(n) {
        return Err(bad(format!("root count {count} does not match n={n}")));
    }
    let body = &bytes[HEADER_LEN..];
    if body.len() as u64 != count * 16 {
        return Err(bad(format!("expected {} payload bytes, found {}", count * 16, body.len())));
    }
    let roots = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    RootBuffer::new(n, roots)
}

/// Writes `buffer` to `path` via a temporary file and rename.
pub fn cache_write(buffer: &RootBuffer, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&encode_cache(buffer))?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn cache_read(n: u32, path: &Path) -> Result<RootBuffer> {
    let bytes = fs::read(path).map_err(|e| Error::Cache { path: path.to_path_buf(), reason: e.to_string() })?;
    decode_cache(&bytes, n, path)
}

/// Root buffer for `n`, read from `cache_dir` when present, else solved and
/// written there.
pub fn load_or_solve(n: u32, parallelism: usize, cache_dir: Option<&Path>) -> Result<RootBuffer> {
    if let Some(dir) = cache_dir {
        let path = cache_path(dir, n);
        if path.exists() {
            return cache_read(n, &path);
        }
        let buffer = solver::solve_all(n, parallelism)?;
        cache_write(&buffer, &path)?;
        return Ok(buffer);
    }
    solver::solve_all(n, parallelism)
}

/// Density of `X_n` over `viewport`, counted with [`EdgeRule::Shared`].
pub fn compute_density(
    n: u32,
    viewport: &Viewport,
    parallelism: usize,
    cache_dir: Option<&Path>,
) -> Result<DensityGrid> {
    if n < 2 {
        return Err(param("density needs n >= 2"));
    }
    let buffer = load_or_solve(n, parallelism, cache_dir)?;
    Ok(density_of(&buffer, viewport, parallelism))
}

pub fn density_of(buffer: &RootBuffer, viewport: &Viewport, parallelism: usize) -> DensityGrid {
    let template = DensityGrid::with_rule(*viewport, EdgeRule::Shared);
    accumulate_parallel(&template, buffer.roots(), parallelism)
}
