//! The q-dragon: attractor of the two contractions `z -> 1 + qz` and
//! `z -> 1 - qz`, and certified searches for `0` inside it.
//!
//! Unrolling the fixed-point equation gives
//! `D_q = { sum_k d_k q^k : d_0 = 1, d_k in {+1, -1} }`. Everything a sign
//! sequence can still add after `k` terms has modulus at most
//! `|q|^k / (1 - |q|)`, and that bound drives both the attractor error
//! radius and the branch-and-bound pruning.

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{param, Error, Result};

/// Largest point count accepted for an exact (non-snapped) attractor.
pub const EXACT_POINT_BUDGET: u64 = 1 << 24;
pub const DEFAULT_NODE_BUDGET: u64 = 5_000_000;

/// A dragon parameter with `|q| < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DragonQuery {
    q: Complex64,
}

impl DragonQuery {
    pub fn new(q: Complex64) -> Result<Self> {
        if !q.is_finite() {
            return Err(param("q must be finite"));
        }
        if q.norm() >= 1.0 {
            return Err(param(format!(
                "|q| = {} but the dragon maps are contractions only for |q| < 1",
                q.norm()
            )));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    /// `1 - |q|`.
    pub fn margin(&self) -> f64 {
        1.0 - self.q.norm()
    }

    /// Bound on `|sum_{i >= k} d_i q^i|` over all sign choices.
    pub fn tail(&self, k: u32) -> f64 {
        self.q.norm().powi(k as i32) / self.margin()
    }

    /// Radius of the disk around `1` that contains the whole attractor.
    pub fn bounding_radius(&self) -> f64 {
        self.q.norm() / self.margin()
    }
}

/// Finite-depth approximation of `D_q`.
#[derive(Clone, Debug)]
pub struct AttractorCloud {
    pub query: DragonQuery,
    pub depth: u32,
    /// Deduplicated points; sorted by bit pattern in exact mode.
    pub points: Vec<Complex64>,
    /// Hausdorff distance bound between `points` and the true attractor.
    pub tail_radius: f64,
    pub dedup_resolution: f64,
}

/// Depth-`depth` point set `S_K`, built as `S_0 = {1}`,
/// `S_{k+1} = (1 + q S_k) ∪ (1 - q S_k)`.
///
/// With `dedup_resolution > 0` every new point is snapped to a square grid
/// of that pitch, which bounds the set size by the grid cells covering the
/// bounding disk.
pub fn attractor(query: DragonQuery, depth: u32, dedup_resolution: f64) -> Result<AttractorCloud> {
    if !(dedup_resolution >= 0.0 && dedup_resolution.is_finite()) {
        return Err(param(format!("dedup resolution must be >= 0, got {dedup_resolution}")));
    }
    let q = query.q();
    let full = 2f64.powi(depth.min(1023) as i32);
    let points = if dedup_resolution == 0.0 {
        if full > EXACT_POINT_BUDGET as f64 {
            return Err(Error::Resource(format!(
                "depth {depth} needs up to 2^{depth} exact points; pass a dedup resolution \
                 (e.g. half a pixel of the target image)"
            )));
        }
        let mut set = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..depth {
            set = step_exact(q, &set);
        }
        set
    } else {
        let r = dedup_resolution;
        let cells = (2.0 * query.bounding_radius() / r + 3.0).powi(2);
        if full.min(cells) > 4.0 * EXACT_POINT_BUDGET as f64 {
            return Err(Error::Resource(format!(
                "dedup resolution {r} would keep about {:.0} points; use a coarser resolution",
                full.min(cells)
            )));
        }
        let mut keys = vec![snap_key(Complex64::new(1.0, 0.0), r)];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(keys.len() * 2);
            for &(a, b) in &keys {
                let s = Complex64::new(a as f64 * r, b as f64 * r);
                next.push(snap_key(1.0 + q * s, r));
                next.push(snap_key(1.0 - q * s, r));
            }
            next.sort_unstable();
            next.dedup();
            keys = next;
        }
        keys.into_iter().map(|(a, b)| Complex64::new(a as f64 * r, b as f64 * r)).collect()
    };
    let tail_radius = query.tail(depth + 1) + depth as f64 * dedup_resolution;
    Ok(AttractorCloud { query, depth, points, tail_radius, dedup_resolution })
}

/// One exact application of the two maps, deduplicated by bit pattern.
pub fn step_exact(q: Complex64, set: &[Complex64]) -> Vec<Complex64> {
    let mut next = Vec::with_capacity(set.len() * 2);
    for &s in set {
        next.push(canonical(1.0 + q * s));
        next.push(canonical(1.0 - q * s));
    }
    next.sort_unstable_by_key(|z| bits(*z));
    next.dedup_by_key(|z| bits(*z));
    next
}

fn canonical(z: Complex64) -> Complex64 {
    // folds -0.0 into +0.0
    Complex64::new(z.re + 0.0, z.im + 0.0)
}

pub(crate) fn bits(z: Complex64) -> (u64, u64) {
    (z.re.to_bits(), z.im.to_bits())
}

fn snap_key(z: Complex64, r: f64) -> (i64, i64) {
    ((z.re / r).round() as i64, (z.im / r).round() as i64)
}

/// Outcome of a certified search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipStatus {
    /// Every branch was pruned by the exact tail bound: a certificate.
    NotMember,
    /// A branch came within the requested tolerance of zero.
    Member,
    /// The depth cap, node budget or deadline was hit with live branches.
    Undecided,
}

impl MembershipStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::NotMember => "not_member",
            Self::Member => "member",
            Self::Undecided => "undecided",
        }
    }
}

impl fmt::Display for MembershipStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipVerdict {
    pub status: MembershipStatus,
    /// Member: `|partial sum| + tail` at the witness. Otherwise the smallest
    /// such bound seen on any explored node.
    pub residual: f64,
    /// Digits `d_0 d_1 ...`, only for `Member`.
    pub witness: Option<Vec<i8>>,
    pub nodes_explored: u64,
    pub max_depth_reached: u32,
}

impl MembershipVerdict {
    /// Witness as text over `+`, `-` (and `0` for connectivity digits).
    pub fn witness_string(&self) -> Option<String> {
        self.witness.as_ref().map(|w| witness_to_string(w))
    }
}

pub fn witness_to_string(digits: &[i8]) -> String {
    digits
        .iter()
        .map(|&d| match d {
            1 => '+',
            -1 => '-',
            _ => '0',
        })
        .collect()
}

/// Limits for [`search`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchLimits {
    pub eps: f64,
    pub max_depth: u32,
    pub node_budget: u64,
}

impl SearchLimits {
    pub fn new(eps: f64, max_depth: u32) -> Self {
        Self { eps, max_depth, node_budget: DEFAULT_NODE_BUDGET }
    }

    fn check(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(param(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_depth < 1 {
            return Err(param("max depth must be at least 1"));
        }
        Ok(())
    }
}

/// Digit alphabets, in tie-break order.
pub const SIGNS: &[i8] = &[1, -1];
pub const SIGNS_AND_ZERO: &[i8] = &[1, 0, -1];

/// Decides whether `0` lies in the dragon `D_q`.
pub fn member_zero(query: DragonQuery, eps: f64, max_depth: u32) -> Result<MembershipVerdict> {
    search(query, SIGNS, &SearchLimits::new(eps, max_depth), None)
}

/// Decides `q ∈ closure(X)` through `0 ∈ D_q`; only meaningful for `|q| < 1`.
pub fn closure_member(q: Complex64, eps: f64, max_depth: u32) -> Result<MembershipVerdict> {
    if !q.is_finite() || q.norm() >= 1.0 {
        return Err(Error::OutOfScope(format!(
            "|q| = {} is outside the unit disk; the criterion q in closure(X) <=> 0 in D_q \
             holds only for |q| < 1 (use the symmetry z -> 1/conj(z) instead)",
            q.norm()
        )));
    }
    member_zero(DragonQuery::new(q)?, eps, max_depth)
}

/// Searches for `sum c_k q^k = 0` with `c_0 = 1`, `c_k in {-1, 0, 1}`,
/// which is equivalent to the two images `1 ± q D_q` overlapping.
///
/// `Member` certifies an overlap to within `eps` (connected attractor);
/// `NotMember` certifies disjoint images.
pub fn connectivity_probe(query: DragonQuery, eps: f64, max_depth: u32) -> Result<MembershipVerdict> {
    search(query, SIGNS_AND_ZERO, &SearchLimits::new(eps, max_depth), None)
}

/// Depth-first branch and bound over digit sequences with leading digit 1.
///
/// A node holding the partial sum `s_k` of its first `k` digits survives
/// iff `|s_k| <= |q|^k / (1 - |q|)` (plus a floating-point allowance), and
/// is a witness once `|s_k| + |q|^k / (1 - |q|) <= eps`. Children are
/// visited in order of increasing `|s_{k+1}|`, ties going to the earlier
/// digit of `alphabet`. `NotMember` is returned only after the whole tree
/// is exhausted with every branch pruned; hitting `max_depth`, the node
/// budget or the `cancel` flag with live branches yields `Undecided`.
pub fn search(
    query: DragonQuery,
    alphabet: &[i8],
    limits: &SearchLimits,
    cancel: Option<&AtomicBool>,
) -> Result<MembershipVerdict> {
    limits.check()?;
    if alphabet.is_empty() || alphabet.len() > 3 {
        return Err(param("alphabet must have one to three digits"));
    }
    let q = query.q();
    let max_depth = limits.max_depth as usize;
    let m = 1.0 / query.margin();
    // powers[k] = q^k, tails[k] = |q|^k / (1 - |q|), slack[k] bounds the
    // rounding error of a k-term partial sum and of the tail itself
    let mut powers = Vec::with_capacity(max_depth + 1);
    let mut p = Complex64::new(1.0, 0.0);
    for _ in 0..=max_depth {
        powers.push(p);
        p *= q;
    }
    let tails: Vec<f64> = (0..=max_depth as u32).map(|k| query.tail(k)).collect();
    let slack = |k: usize| 8.0 * f64::EPSILON * (k as f64 * m + m * m + tails[k] * k as f64);

    struct Frame {
        children: [(Complex64, i8); 3],
        len: usize,
        next: usize,
    }

    let mut best = f64::INFINITY;
    let mut nodes: u64 = 0;
    let mut deepest: u32 = 0;
    let mut live_cut = false;
    let mut path: Vec<i8> = Vec::with_capacity(max_depth);
    let mut stack: Vec<Frame> = Vec::with_capacity(max_depth);

    // the node about to be visited: its partial sum and the digit leading to it
    let mut pending: Option<(Complex64, i8)> = Some((Complex64::new(1.0, 0.0), 1));
    loop {
        if let Some((sum, digit)) = pending.take() {
            path.push(digit);
            let k = path.len();
            nodes += 1;
            deepest = deepest.max(k as u32);
            let bound = sum.norm() + tails[k];
            best = best.min(bound);
            let survives = sum.norm() <= tails[k] + slack(k);
            if survives && bound <= limits.eps {
                return Ok(MembershipVerdict {
                    status: MembershipStatus::Member,
                    residual: bound,
                    witness: Some(path),
                    nodes_explored: nodes,
                    max_depth_reached: deepest,
                });
            }
            let interrupted = nodes >= limits.node_budget
                || (nodes.is_multiple_of(4096) && cancel.is_some_and(|c| c.load(Ordering::Relaxed)));
            if interrupted {
                return Ok(undecided(best, nodes, deepest));
            }
            if survives && k >= max_depth {
                live_cut = true;
            }
            if survives && k < max_depth {
                let mut children = [(Complex64::new(0.0, 0.0), 0i8); 3];
                for (slot, &d) in children.iter_mut().zip(alphabet) {
                    *slot = (sum + powers[k] * d as f64, d);
                }
                let len = alphabet.len();
                // stable: equal moduli keep alphabet order
                children[..len].sort_by(|a, b| a.0.norm().total_cmp(&b.0.norm()));
                stack.push(Frame { children, len, next: 0 });
            } else {
                path.pop();
            }
        }
        let Some(top) = stack.last_mut() else { break };
        if top.next < top.len {
            pending = Some(top.children[top.next]);
            top.next += 1;
        } else {
            stack.pop();
            path.pop();
        }
    }

    if live_cut {
        return Ok(undecided(best, nodes, deepest));
    }
    Ok(MembershipVerdict {
        status: MembershipStatus::NotMember,
        residual: best,
        witness: None,
        nodes_explored: nodes,
        max_depth_reached: deepest,
    })
}

fn undecided(best: f64, nodes: u64, deepest: u32) -> MembershipVerdict {
    MembershipVerdict {
        status: MembershipStatus::Undecided,
        residual: best,
        witness: None,
        nodes_explored: nodes,
        max_depth_reached: deepest,
    }
}
