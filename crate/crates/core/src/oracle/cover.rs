//! Covering-number brackets, exhaustive covers, ε-scale Hausdorff sums and
//! separation checks on point clouds.

use serde::Serialize;

use super::metric::{MetricKind, PointCloud};
use crate::error::{Error, Result};
use crate::par::Execution;

/// Largest cloud handled by the exhaustive set-cover routine.
pub const EXHAUSTIVE_MAX: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoverBounds {
    /// Size of a greedy maximal `eps`-separated subset.
    pub lower: usize,
    /// Size of a greedy spanning set whose balls have diameter `< eps`.
    pub upper: usize,
    /// Exact minimum cover of the cloud, for clouds of at most 12 points.
    pub exact: Option<usize>,
}

/// Brackets `lower ≤ #(X, d, eps) ≤ upper` for the space the cloud models.
pub fn covering_bounds(cloud: &PointCloud, eps: f64, exec: Execution) -> Result<CoverBounds> {
    let t = cloud.truncation_error;
    if !(eps > 4.0 * t) || !eps.is_finite() {
        return Err(Error::DegenerateScale { eps, truncation: t });
    }
    if cloud.is_empty() {
        return Ok(CoverBounds {
            lower: 0,
            upper: 0,
            exact: Some(0),
        });
    }
    let lower = greedy_separated(cloud, eps).len();
    // A closed ball of radius r has diameter at most 2r; the cloud is
    // within t of the space, so r + t must stay below eps / 2.
    let radius = eps / 2.0 - t - 1e-12 * eps.max(1.0);
    let upper = greedy_spanning(cloud, radius, exec).len();
    let exact = (cloud.len() <= EXHAUSTIVE_MAX).then(|| exhaustive_min_cover(cloud, eps));
    Ok(CoverBounds { lower, upper, exact })
}

/// Greedy separated subset in index order: pairwise distances `≥ eps`.
pub fn greedy_separated(cloud: &PointCloud, eps: f64) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..cloud.len() {
        if chosen.iter().all(|&j| cloud.distance(i, j) >= eps) {
            chosen.push(i);
        }
    }
    chosen
}

/// Greedy centers in index order; every point lies within `radius` of one.
pub fn greedy_spanning(cloud: &PointCloud, radius: f64, exec: Execution) -> Vec<usize> {
    let n = cloud.len();
    let mut covered = vec![false; n];
    let mut centers = Vec::new();
    for i in 0..n {
        if covered[i] {
            continue;
        }
        centers.push(i);
        let hit = exec.map_range(n, |j| !covered[j] && cloud.distance(i, j) <= radius);
        for (c, h) in covered.iter_mut().zip(hit) {
            *c |= h;
        }
    }
    centers
}

/// Minimum number of subsets of diameter `< eps` covering the cloud.
pub fn exhaustive_min_cover(cloud: &PointCloud, eps: f64) -> usize {
    let n = cloud.len();
    assert!(n <= EXHAUSTIVE_MAX, "exhaustive cover limited to {EXHAUSTIVE_MAX} points");
    if n == 0 {
        return 0;
    }
    let full = (1usize << n) - 1;
    let mut close = vec![0usize; n];
    for (i, row) in close.iter_mut().enumerate() {
        for j in 0..n {
            if i == j || cloud.distance(i, j) < eps {
                *row |= 1 << j;
            }
        }
    }
    // valid[s]: every pair in s is closer than eps
    let mut valid = vec![false; full + 1];
    valid[0] = true;
    for s in 1..=full {
        let low = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        valid[s] = valid[rest] && (rest & !close[low]) == 0;
    }
    let mut best = vec![usize::MAX; full + 1];
    best[0] = 0;
    for s in 1..=full {
        // the lowest point of s must be covered by some valid set inside s
        let low = 1usize << s.trailing_zeros();
        let mut sub = s;
        while sub > 0 {
            if sub & low != 0 && valid[sub] && best[s & !sub] != usize::MAX {
                best[s] = best[s].min(best[s & !sub] + 1);
            }
            sub = (sub - 1) & s;
        }
    }
    best[full]
}

/// Root `s*` of `Σ_i diam_i^s = 1`, with `0^0 = 1` and `0^s = 0` for `s > 0`.
/// Certifies `dim_H(·, d, eps) ≤ s*` for a cover by sets of these diameters.
pub fn hausdorff_upper_at_scale(diams: &[f64], eps: f64) -> Result<f64> {
    if let Some(&d) = diams.iter().find(|&&d| !(0.0..1.0).contains(&d) || d >= eps) {
        return Err(Error::domain(format!("cover member of diameter {d} is not below min(1, eps = {eps})")));
    }
    let sum = |s: f64| -> f64 {
        diams
            .iter()
            .map(|&d| if d == 0.0 { if s == 0.0 { 1.0 } else { 0.0 } } else { d.powf(s) })
            .sum()
    };
    // as s -> 0+ the sum tends to the number of positive diameters
    if sum(0.0) <= 1.0 || diams.iter().filter(|&&d| d > 0.0).count() <= 1 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while sum(hi) > 1.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::domain("Hausdorff sum does not fall below 1"));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if sum(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationReport {
    pub threshold: f64,
    pub passed: bool,
    /// Smallest distance among the candidate pairs that were measured.
    pub min_found: Option<f64>,
    pub witness: Option<(usize, usize)>,
    pub pairs_examined: u64,
}

/// Checks that all pairs are at `ℓ∞` distance `≥ threshold`.
///
/// Points are bucketed coordinate by coordinate with cell width slightly
/// above the threshold; pairs in non-adjacent cells of any coordinate are
/// farther apart than the threshold and are never measured.
pub fn linf_separation(cloud: &PointCloud, threshold: f64, exec: Execution) -> Result<SeparationReport> {
    if cloud.metric.kind != MetricKind::LinfFinite {
        return Err(Error::domain("bucketed separation check needs the l-infinity metric"));
    }
    let width = threshold * (1.0 + 1e-9);
    let mut acc = Acc::default();
    let idx: Vec<u32> = (0..cloud.len() as u32).collect();
    let sep = Sep { cloud, width, exec };
    sep.within(idx, 0, &mut acc);
    Ok(SeparationReport {
        threshold,
        passed: acc.best.is_none_or(|(d, _, _)| d >= threshold),
        min_found: acc.best.map(|b| b.0),
        witness: acc.best.map(|b| (b.1, b.2)),
        pairs_examined: acc.pairs,
    })
}

/// Minimum pairwise distance by brute force (any metric).
pub fn min_pairwise(cloud: &PointCloud, exec: Execution) -> Option<(f64, usize, usize)> {
    let n = cloud.len();
    exec.map_range(n, |i| {
        (i + 1..n)
            .map(|j| (cloud.distance(i, j), i, j))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    })
    .into_iter()
    .flatten()
    .min_by(|a, b| a.0.total_cmp(&b.0))
}

#[derive(Default)]
struct Acc {
    best: Option<(f64, usize, usize)>,
    pairs: u64,
}

impl Acc {
    fn offer(&mut self, d: f64, i: usize, j: usize) {
        self.pairs += 1;
        if self.best.is_none_or(|b| d < b.0) {
            self.best = Some((d, i.min(j), i.max(j)));
        }
    }

    fn merge(&mut self, other: Acc) {
        self.pairs += other.pairs;
        if let Some(b) = other.best {
            if self.best.is_none_or(|s| b.0 < s.0) {
                self.best = Some(b);
            }
        }
    }
}

struct Sep<'a> {
    cloud: &'a PointCloud,
    width: f64,
    exec: Execution,
}

const BRUTE: usize = 24;

impl Sep<'_> {
    fn key(&self, i: u32, c: usize) -> i64 {
        (self.cloud.point(i as usize)[c] / self.width).floor() as i64
    }

    fn groups(&self, mut idx: Vec<u32>, c: usize) -> Vec<(i64, Vec<u32>)> {
        idx.sort_by_cached_key(|&i| self.key(i, c));
        let mut out: Vec<(i64, Vec<u32>)> = Vec::new();
        for i in idx {
            let k = self.key(i, c);
            match out.last_mut() {
                Some((lk, g)) if *lk == k => g.push(i),
                _ => out.push((k, vec![i])),
            }
        }
        out
    }

    fn within(&self, idx: Vec<u32>, c: usize, acc: &mut Acc) {
        if idx.len() < 2 {
            return;
        }
        if idx.len() <= BRUTE || c == self.cloud.dim() {
            for (x, &i) in idx.iter().enumerate() {
                for &j in &idx[x + 1..] {
                    acc.offer(self.cloud.distance(i as usize, j as usize), i as usize, j as usize);
                }
            }
            return;
        }
        let groups = self.groups(idx, c);
        let parts = self.exec.map_range(groups.len(), |g| {
            let mut local = Acc::default();
            self.within(groups[g].1.clone(), c + 1, &mut local);
            if let Some(next) = groups.get(g + 1) {
                if next.0 == groups[g].0 + 1 {
                    self.cross(&groups[g].1, &next.1, c + 1, &mut local);
                }
            }
            local
        });
        for p in parts {
            acc.merge(p);
        }
    }

    fn cross(&self, a: &[u32], b: &[u32], c: usize, acc: &mut Acc) {
        if a.is_empty() || b.is_empty() {
            return;
        }
        if a.len() * b.len() <= BRUTE * BRUTE || c == self.cloud.dim() {
            for &i in a {
                for &j in b {
                    acc.offer(self.cloud.distance(i as usize, j as usize), i as usize, j as usize);
                }
            }
            return;
        }
        let ga = self.groups(a.to_vec(), c);
        let gb = self.groups(b.to_vec(), c);
        let mut start = 0;
        for (ka, va) in &ga {
            while start < gb.len() && gb[start].0 < ka - 1 {
                start += 1;
            }
            let mut t = start;
            while t < gb.len() && gb[t].0 <= ka + 1 {
                self.cross(va, &gb[t].1, c + 1, acc);
                t += 1;
            }
        }
    }
}
