//! All-roots solvers for Littlewood polynomials.
//!
//! [`solve`] runs Aberth–Ehrlich simultaneous iteration; [`solve_oracle`]
//! runs Durand–Kerner (Weierstrass) iteration from a different starting
//! configuration and exists to cross-check the first. Both finish with the
//! same polishing pipeline: a few guarded Newton steps per root, exact
//! conjugate pairing (the coefficients are real), and a residual check.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::density::RootBuffer;
use crate::error::{param, Error, Result};
use crate::littlewood::{family_size, negation_flips, EnumerationCursor, SignVector};

/// Polynomials solved in sequence by one worker before the next cold start.
///
/// Fixed so that results do not depend on the number of worker threads.
pub const CHUNK_LEN: u64 = 1024;

const PAIR_TOL: f64 = 1e-6;
/// Iterates closer than this (relative) are tested as one repeated root.
const CLUSTER_TOL: f64 = 1e-4;
/// A cluster of size `m` is a genuine repeated root when all lower Taylor
/// coefficients at its refined center are this small relative to the `m`-th.
const MULTIPLICITY_TOL: f64 = 1e-9;

/// Tuning knobs shared by both iterations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub residual_threshold: f64,
    /// Relative update size below which the iteration has converged.
    pub step_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { max_iters: 200, residual_threshold: 1e-9, step_tolerance: 1e-13 }
    }
}

/// The `n - 1` roots of one polynomial, with multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSet {
    pub poly: SignVector,
    pub roots: Vec<Complex64>,
    /// `max |p(root)|` over the set.
    pub residual: f64,
}

/// Aberth–Ehrlich with default settings.
pub fn solve(p: SignVector, warm_start: Option<&[Complex64]>) -> Result<RootSet> {
    solve_with(p, warm_start, &SolverConfig::default())
}

pub fn solve_with(
    p: SignVector,
    warm_start: Option<&[Complex64]>,
    config: &SolverConfig,
) -> Result<RootSet> {
    let d = check_degree(p)?;
    let mut roots = match warm_start {
        Some(w) if w.len() == d => w.to_vec(),
        Some(w) => {
            return Err(param(format!("warm start has {} points, degree is {d}", w.len())));
        }
        None => circle_start(d),
    };
    aberth(p, &mut roots, config);
    finish(p, roots, config)
}

/// Durand–Kerner with default settings; used for verification only.
pub fn solve_oracle(p: SignVector) -> Result<RootSet> {
    solve_oracle_with(p, &SolverConfig::default())
}

pub fn solve_oracle_with(p: SignVector, config: &SolverConfig) -> Result<RootSet> {
    let d = check_degree(p)?;
    // powers of a non-real point just inside the unit circle
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..d).map(|k| seed.powu(k as u32 + 1)).collect();
    durand_kerner(p, &mut roots, config);
    finish(p, roots, config)
}

/// Solves every polynomial of `enumerate(n)` and returns the flat root buffer.
///
/// Only the first half of the family (those with `a_{n-2} = +1`) is solved.
/// Each of them is paired with its image under `z -> -z`, which lives in the
/// second half, and that image gets the exactly negated roots. The solved
/// half is cut into contiguous [`CHUNK_LEN`] chunks; inside a chunk each
/// polynomial warm-starts from its Gray-code predecessor.
pub fn solve_all(n: u32, parallelism: usize) -> Result<RootBuffer> {
    solve_all_with(n, parallelism, &SolverConfig::default())
}

pub fn solve_all_with(n: u32, parallelism: usize, config: &SolverConfig) -> Result<RootBuffer> {
    if n < 2 {
        return Err(param("solve_all needs at least two terms"));
    }
    let d = n as usize - 1;
    let total = family_size(n);
    let half = total / 2;
    let mut roots = vec![Complex64::new(0.0, 0.0); total as usize * d];

    let chunks: Vec<std::ops::Range<u64>> = (0..half)
        .step_by(CHUNK_LEN as usize)
        .map(|start| start..(start + CHUNK_LEN).min(half))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;

    let (solved, mirrored) = roots.split_at_mut(half as usize * d);
    let chunk_slices: Vec<&mut [Complex64]> = solved.chunks_mut(CHUNK_LEN as usize * d).collect();
    pool.install(|| {
        chunks
            .par_iter()
            .zip(chunk_slices)
            .try_for_each(|(range, out)| solve_chunk(n, range.clone(), out, config))
    })?;

    let flips = negation_flips(n);
    for index in half..total {
        let pattern = SignVector::from_index(n, index)?.pattern();
        let partner = gray_index((pattern ^ flips) as u64);
        debug_assert!(partner < half);
        let src = partner as usize * d;
        let dst = (index - half) as usize * d;
        for k in 0..d {
            mirrored[dst + k] = -solved[src + k];
        }
    }
    RootBuffer::new(n, roots)
}

fn gray_index(mut g: u64) -> u64 {
    let mut shift = 1;
    while shift < 64 {
        g ^= g >> shift;
        shift <<= 1;
    }
    g
}

fn solve_chunk(
    n: u32,
    range: std::ops::Range<u64>,
    out: &mut [Complex64],
    config: &SolverConfig,
) -> Result<()> {
    let d = n as usize - 1;
    let mut previous: Option<Vec<Complex64>> = None;
    for (slot, p) in out.chunks_mut(d).zip(EnumerationCursor::range(n, range)?) {
        let set = match solve_with(p, previous.as_deref(), config) {
            Ok(set) => set,
            // a warm start that fails is retried cold before giving up
            Err(_) if previous.is_some() => solve_with(p, None, config)?,
            Err(e) => return Err(e),
        };
        slot.copy_from_slice(&set.roots);
        previous = Some(set.roots);
    }
    Ok(())
}

fn check_degree(p: SignVector) -> Result<usize> {
    match p.degree() {
        0 => Err(param("a constant polynomial has no roots")),
        d => Ok(d),
    }
}

/// Unit-circle start with angles `2 pi k / d + 0.5 / d`.
fn circle_start(d: usize) -> Vec<Complex64> {
    let df = d as f64;
    (0..d).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / df + 0.5 / df)).collect()
}

fn aberth(p: SignVector, z: &mut [Complex64], config: &SolverConfig) -> bool {
    let d = z.len();
    for _ in 0..config.max_iters {
        let mut worst = 0.0f64;
        for i in 0..d {
            let (value, deriv) = p.evaluate_with_derivative(z[i]);
            if value == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = value / deriv;
            let mut repulsion = Complex64::new(0.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    repulsion += (z[i] - zj).inv();
                }
            }
            let step = ratio / (1.0 - ratio * repulsion);
            if !step.is_finite() {
                // coincident iterates or a critical point: shake loose
                z[i] += Complex64::new(1e-7, 1e-7) * (1.0 + z[i].norm());
                worst = f64::INFINITY;
                continue;
            }
            z[i] -= step;
            worst = worst.max(step.norm() / (1.0 + z[i].norm()));
        }
        if worst < config.step_tolerance {
            return true;
        }
    }
    false
}

fn durand_kerner(p: SignVector, z: &mut [Complex64], config: &SolverConfig) -> bool {
    let d = z.len();
    for _ in 0..config.max_iters {
        let mut worst = 0.0f64;
        for i in 0..d {
            let value = p.evaluate(z[i]);
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    denom *= z[i] - zj;
                }
            }
            let step = value / denom;
            if !step.is_finite() {
                z[i] += Complex64::new(1e-7, -1e-7) * (1.0 + z[i].norm());
                worst = f64::INFINITY;
                continue;
            }
            z[i] -= step;
            worst = worst.max(step.norm() / (1.0 + z[i].norm()));
        }
        if worst < config.step_tolerance {
            return true;
        }
    }
    false
}

fn finish(p: SignVector, mut roots: Vec<Complex64>, config: &SolverConfig) -> Result<RootSet> {
    for r in roots.iter_mut() {
        *r = newton_polish(p, *r);
    }
    pair_conjugates(&mut roots);
    if refine_clusters(p, &mut roots) {
        pair_conjugates(&mut roots);
    }
    let residual = roots.iter().map(|&r| p.evaluate(r).norm()).fold(0.0, f64::max);
    // clustered (repeated) roots stall the update test but still meet the
    // residual threshold; anything else is a genuine failure
    if residual <= config.residual_threshold && roots.iter().all(|r| r.is_finite()) {
        Ok(RootSet { poly: p, roots, residual })
    } else {
        Err(Error::Solver { poly: p.to_string(), best: roots, residual })
    }
}

fn newton_polish(p: SignVector, mut z: Complex64) -> Complex64 {
    let mut value = p.evaluate(z).norm();
    for _ in 0..3 {
        let (v, dv) = p.evaluate_with_derivative(z);
        let next = z - v / dv;
        if !next.is_finite() {
            break;
        }
        let next_value = p.evaluate(next).norm();
        if next_value >= value {
            break;
        }
        z = next;
        value = next_value;
    }
    z
}

/// Forces the multiset to be closed under conjugation.
///
/// Roots in the upper half-plane are matched to their nearest unmatched
/// partner below the axis and both are replaced by the averaged pair;
/// whatever stays unmatched near the axis is made exactly real.
fn pair_conjugates(roots: &mut [Complex64]) {
    let d = roots.len();
    let mut matched = vec![false; d];
    for i in 0..d {
        if matched[i] || roots[i].im <= 0.0 {
            continue;
        }
        let target = roots[i].conj();
        let tol = PAIR_TOL * (1.0 + roots[i].norm());
        let partner = (0..d)
            .filter(|&j| j != i && !matched[j] && roots[j].im <= 0.0)
            .map(|j| (j, (roots[j] - target).norm()))
            .filter(|&(_, dist)| dist <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((j, _)) = partner {
            let mean = (roots[i] + roots[j].conj()) * 0.5;
            if mean.im > 0.0 {
                roots[i] = mean;
                roots[j] = mean.conj();
            } else {
                roots[i] = Complex64::new(mean.re, 0.0);
                roots[j] = Complex64::new(mean.re, 0.0);
            }
            matched[i] = true;
            matched[j] = true;
        }
    }
    for i in 0..d {
        if !matched[i] && roots[i].im.abs() <= PAIR_TOL * (1.0 + roots[i].norm()) {
            roots[i].im = 0.0;
        }
    }
}

/// Collapses clusters that are numerically one repeated root.
///
/// Simultaneous iterations resolve a root of multiplicity `m` only to about
/// `eps^(1/m)`. Each cluster center is refined by Newton's method on
/// `p^(m-1)`, where the root is simple, and replaces the whole cluster when
/// the Taylor expansion there confirms multiplicity `m`. Returns whether
/// anything changed.
fn refine_clusters(p: SignVector, roots: &mut [Complex64]) -> bool {
    let d = roots.len();
    let mut cluster_of: Vec<usize> = (0..d).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..d {
        for j in i + 1..d {
            if (roots[i] - roots[j]).norm() <= CLUSTER_TOL * (1.0 + roots[i].norm()) {
                let (a, b) = (find(&mut cluster_of, i), find(&mut cluster_of, j));
                cluster_of[a.max(b)] = a.min(b);
            }
        }
    }
    let mut changed = false;
    for leader in 0..d {
        if find(&mut cluster_of, leader) != leader {
            continue;
        }
        let members: Vec<usize> = (0..d).filter(|&i| find(&mut cluster_of, i) == leader).collect();
        let m = members.len();
        if m < 2 {
            continue;
        }
        let mut center = members.iter().map(|&i| roots[i]).sum::<Complex64>() / m as f64;
        for _ in 0..8 {
            let t = taylor(p, center, m + 1);
            let step = t[m - 1] / (t[m] * m as f64);
            if !step.is_finite() {
                break;
            }
            center -= step;
            if step.norm() <= 1e-16 * (1.0 + center.norm()) {
                break;
            }
        }
        let t = taylor(p, center, m + 1);
        let lead = t[m].norm();
        let spread = members.iter().map(|&i| (roots[i] - center).norm()).fold(0.0, f64::max);
        let genuine = lead > 0.0
            && t[..m].iter().all(|c| c.norm() <= MULTIPLICITY_TOL * lead)
            && spread <= CLUSTER_TOL * (1.0 + center.norm()) * m as f64;
        if genuine {
            for &i in &members {
                roots[i] = center;
            }
            changed = true;
        }
    }
    changed
}

/// The first `count` Taylor coefficients `p^(j)(c) / j!` by repeated
/// synthetic division.
fn taylor(p: SignVector, c: Complex64, count: usize) -> Vec<Complex64> {
    let mut work: Vec<Complex64> = p.coefficients().into_iter().map(|a| Complex64::new(a, 0.0)).collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        if work.is_empty() {
            out.push(Complex64::new(0.0, 0.0));
            continue;
        }
        // divide by (z - c): quotient overwrites work[1..], remainder is the value
        let top = work.len() - 1;
        let mut acc = work[top];
        for i in (0..top).rev() {
            let next = work[i] + acc * c;
            work[i + 1] = acc;
            acc = next;
        }
        out.push(acc);
        work.remove(0);
    }
    out
}
