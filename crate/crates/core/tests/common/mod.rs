//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use lwroots::Complex64;

/// `max_{a in from} min_{b in to} |a - b|`.
pub fn directed_hausdorff(from: &[Complex64], to: &[Complex64]) -> f64 {
    // sort the target by real part so each query scans a narrow band
    let mut sorted: Vec<Complex64> = to.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut worst = 0.0f64;
    for a in from {
        let start = sorted.partition_point(|b| b.re < a.re);
        let mut best = f64::INFINITY;
        for b in sorted[start..].iter() {
            if b.re - a.re > best {
                break;
            }
            best = best.min((a - b).norm());
        }
        for b in sorted[..start].iter().rev() {
            if a.re - b.re > best {
                break;
            }
            best = best.min((a - b).norm());
        }
        worst = worst.max(best);
    }
    worst
}

pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Smallest `t` such that the two equal-size multisets admit a perfect
/// matching using only pairs at distance `<= t`.
pub fn bottleneck_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let dist: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).collect()).collect();
    let mut levels: Vec<f64> = dist.iter().flatten().copied().collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if has_perfect_matching(&dist, levels[mid], n) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    levels[lo]
}

fn has_perfect_matching(dist: &[Vec<f64>], t: f64, n: usize) -> bool {
    fn augment(u: usize, dist: &[Vec<f64>], t: f64, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for v in 0..owner.len() {
            if dist[u][v] <= t && !seen[v] {
                seen[v] = true;
                if owner[v].is_none_or(|w| augment(w, dist, t, seen, owner)) {
                    owner[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; n];
    (0..n).all(|u| augment(u, dist, t, &mut vec![false; n], &mut owner))
}

/// Roots of `a_0 + a_1 z + a_2 z^2` by the quadratic formula.
pub fn quadratic_roots(a0: f64, a1: f64, a2: f64) -> [Complex64; 2] {
    let disc = Complex64::new(a1 * a1 - 4.0 * a0 * a2, 0.0).sqrt();
    [(-a1 + disc) / (2.0 * a2), (-a1 - disc) / (2.0 * a2)]
}

/// Exhaustive check over all `2^(depth - 1)` sign sequences with leading
/// `+1`: does any partial sum `s` of `depth` terms satisfy
/// `|s| <= |q|^depth / (1 - |q|)`? No intermediate pruning is used; the
/// walk only stops early at the first surviving leaf.
pub fn brute_force_survives(q: Complex64, depth: u32) -> bool {
    let r = q.norm();
    let tail = r.powi(depth as i32) / (1.0 - r);
    let powers: Vec<Complex64> = (0..depth).map(|k| q.powu(k)).collect();
    fn walk(sum: Complex64, k: usize, powers: &[Complex64], tail: f64) -> bool {
        if k == powers.len() {
            return sum.norm() <= tail;
        }
        walk(sum + powers[k], k + 1, powers, tail) || walk(sum - powers[k], k + 1, powers, tail)
    }
    walk(powers[0], 1, &powers, tail)
}

/// True when `p` (coefficients `a_0 ..`) vanishes at `z` to within `tol`
/// relative to the sum of term moduli.
pub fn nearly_root(coeffs: &[f64], z: Complex64, tol: f64) -> bool {
    let mut value = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (k, &a) in coeffs.iter().enumerate() {
        let term = z.powu(k as u32) * a;
        value += term;
        scale += term.norm();
    }
    value.norm() <= tol * scale.max(1.0)
}
