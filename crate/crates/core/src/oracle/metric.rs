//! Product metrics on truncated sequence points and finite point clouds.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// `Σ_n w_n |x_n - y_n|` on scalar sequences.
    SumWeightedAbs,
    /// `Σ_n w_n max(|x_n - x'_n|, |y_n - y'_n|)` on pair sequences.
    SumWeightedMax,
    /// `Σ_n w_n ρ(x_n, y_n)` with `ρ(s, t) = min_k |s - t - k|`.
    SumWeightedTorus,
    /// `max_k |x_k - y_k|` on a finite-dimensional vector.
    LinfFinite,
}

/// A metric on truncated points. The weight of coordinate `n ≥ 1` is
/// `2^{-(n - 1 + lead_exponent)}`; `lead_exponent = 1` gives `Σ 2^{-n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricDescriptor {
    pub kind: MetricKind,
    /// `N` in `d_N = max_{0 ≤ n < N} d(σ^n ·, σ^n ·)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamic: Option<usize>,
    /// `(a, M)`: also maximize over `T_a^m` for `0 ≤ m < M`, `T_a(t) = a t mod 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<(u32, usize)>,
    #[serde(default = "default_lead")]
    pub lead_exponent: u32,
}

fn default_lead() -> u32 {
    1
}

impl MetricDescriptor {
    pub fn new(kind: MetricKind) -> Self {
        MetricDescriptor {
            kind,
            dynamic: None,
            multiplier: None,
            lead_exponent: 1,
        }
    }

    pub fn linf() -> Self {
        Self::new(MetricKind::LinfFinite)
    }

    pub fn with_dynamic(mut self, n: usize) -> Self {
        self.dynamic = Some(n);
        self
    }

    pub fn with_multiplier(mut self, a: u32, iterates: usize) -> Self {
        self.multiplier = Some((a, iterates));
        self
    }

    pub fn with_lead_exponent(mut self, e: u32) -> Self {
        self.lead_exponent = e;
        self
    }

    /// Number of scalar slots per sequence coordinate.
    pub fn components(&self) -> usize {
        match self.kind {
            MetricKind::SumWeightedMax => 2,
            _ => 1,
        }
    }

    /// Sum of all coordinate weights, `2^{1 - lead_exponent}`.
    pub fn weight_sum(&self) -> f64 {
        2f64.powi(1 - self.lead_exponent as i32)
    }

    /// Distance between two truncated points of equal length.
    pub fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        debug_assert_eq!(p.len(), q.len());
        match self.multiplier {
            None => self.shift_max(p, q),
            Some((a, iterates)) => {
                let mut best = 0.0f64;
                let mut scale = 1.0f64;
                let mut pp = p.to_vec();
                let mut qq = q.to_vec();
                for _ in 0..iterates.max(1) {
                    for (dst, &src) in pp.iter_mut().zip(p) {
                        *dst = (src * scale).rem_euclid(1.0);
                    }
                    for (dst, &src) in qq.iter_mut().zip(q) {
                        *dst = (src * scale).rem_euclid(1.0);
                    }
                    best = best.max(self.shift_max(&pp, &qq));
                    scale *= a as f64;
                }
                best
            }
        }
    }

    fn shift_max(&self, p: &[f64], q: &[f64]) -> f64 {
        if self.kind == MetricKind::LinfFinite {
            return p.iter().zip(q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        }
        let c = self.components();
        let len = p.len() / c;
        let shifts = self.dynamic.unwrap_or(1).clamp(1, len.max(1));
        (0..shifts)
            .map(|i| self.base(&p[i * c..], &q[i * c..]))
            .fold(0.0, f64::max)
    }

    fn base(&self, p: &[f64], q: &[f64]) -> f64 {
        let c = self.components();
        let mut w = 2f64.powi(-(self.lead_exponent as i32));
        let mut total = 0.0;
        for (x, y) in p.chunks_exact(c).zip(q.chunks_exact(c)) {
            let g = match self.kind {
                MetricKind::SumWeightedAbs => (x[0] - y[0]).abs(),
                MetricKind::SumWeightedMax => (x[0] - y[0]).abs().max((x[1] - y[1]).abs()),
                MetricKind::SumWeightedTorus => torus_gap(x[0], y[0]),
                MetricKind::LinfFinite => unreachable!(),
            };
            total += w * g;
            w *= 0.5;
        }
        total
    }
}

/// `min_k |s - t - k|`.
pub fn torus_gap(s: f64, t: f64) -> f64 {
    let d = (s - t).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// A finite set of truncated points with a metric. `truncation_error`
/// bounds the distance from any point of the modelled space to the cloud
/// point sharing its retained data.
#[derive(Debug, Clone)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
    pub metric: MetricDescriptor,
    pub truncation_error: f64,
}

impl PointCloud {
    pub fn new(dim: usize, metric: MetricDescriptor, truncation_error: f64) -> Self {
        PointCloud {
            coords: Vec::new(),
            dim,
            metric,
            truncation_error,
        }
    }

    pub fn from_points(points: &[Vec<f64>], metric: MetricDescriptor, truncation_error: f64) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        let mut cloud = PointCloud::new(dim, metric, truncation_error);
        for p in points {
            cloud.push(p)?;
        }
        Ok(cloud)
    }

    pub fn push(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::domain(format!("point has {} coordinates, cloud has {}", p.len(), self.dim)));
        }
        self.coords.extend_from_slice(p);
        Ok(())
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric.distance(self.point(i), self.point(j))
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }

    /// CSV with a header row naming the coordinates.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let c = self.metric.components();
        let names: Vec<String> = (0..self.dim)
            .map(|k| match (self.metric.kind, c) {
                (MetricKind::LinfFinite, _) => format!("c{}", k + 1),
                (_, 2) => format!("{}{}", if k % 2 == 0 { 'x' } else { 'y' }, k / 2 + 1),
                _ => format!("x{}", k + 1),
            })
            .collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|v| format!("{v:.17e}")).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// Parses the CSV produced by [`PointCloud::to_csv`].
    pub fn from_csv(text: &str, metric: MetricDescriptor, truncation_error: f64) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::spec("empty CSV"))?;
        let dim = header.split(',').count();
        let mut cloud = PointCloud::new(dim, metric, truncation_error);
        for (row, line) in lines.enumerate() {
            let p: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::spec(format!("row {}: {e}", row + 1))))
                .collect::<Result<_>>()?;
            cloud.push(&p)?;
        }
        Ok(cloud)
    }
}
