//! `Q_{N,M}` boxes of a carpet system, their exact `ℓ∞` diameters, the
//! separated family `p(x_1, .., x_k, y_1, .., y_M)` and finite carpet clouds.

use num_bigint::BigUint;
use serde::Serialize;

use super::cover::{self, SeparationReport};
use super::metric::{MetricDescriptor, PointCloud};
use crate::carpet::CarpetSpec;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::symbolic::{self, Word};
use crate::weighted::{self, ImageSubshift};
use crate::Budgets;

/// Digit data of `Ω|_N` for one carpet, read off an explicit enumeration.
#[derive(Debug, Clone)]
pub struct CarpetDigits {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    /// `(u, v) ∈ Ω|_N` in automaton order.
    pub words: Vec<(Word, Word)>,
    /// Distinct projections `v`, ascending.
    pub image: Vec<Word>,
    /// Per image word: `max - min` of `u_n` over its fiber, per coordinate.
    pub fiber_range: Vec<Vec<u8>>,
    /// Per image word: the least `u` with `(u, v) ∈ Ω|_N`.
    pub section: Vec<Word>,
    /// Per image word: the number of `u` with `(u, v) ∈ Ω|_N`.
    pub fiber_size: Vec<u64>,
    pub range_x: Vec<u8>,
    pub range_y: Vec<u8>,
    /// Least word of `Ω|_N`, repeated at every digit level past the fixed ones.
    pub anchor: (Word, Word),
}

impl CarpetDigits {
    pub fn new(spec: &CarpetSpec, n: usize, budgets: &Budgets) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("N must be at least 1"));
        }
        let sys = spec.system();
        let words: Vec<(Word, Word)> = symbolic::enumerate_words(sys.shift(), n, budgets)?
            .into_iter()
            .map(|w| w.into_iter().map(|s| sys.decode(s)).unzip())
            .collect();
        let mut image: Vec<Word> = words.iter().map(|(_, v)| v.clone()).collect();
        image.sort_unstable();
        image.dedup();
        let mut lo = vec![vec![u8::MAX; n]; image.len()];
        let mut hi = vec![vec![0u8; n]; image.len()];
        let mut section: Vec<Option<Word>> = vec![None; image.len()];
        let mut fiber_size = vec![0u64; image.len()];
        for (u, v) in &words {
            let j = image.binary_search(v).expect("projection present");
            fiber_size[j] += 1;
            for c in 0..n {
                lo[j][c] = lo[j][c].min(u[c]);
                hi[j][c] = hi[j][c].max(u[c]);
            }
            if section[j].as_ref().is_none_or(|s| u < s) {
                section[j] = Some(u.clone());
            }
        }
        let fiber_range: Vec<Vec<u8>> = lo.iter().zip(&hi).map(|(l, h)| h.iter().zip(l).map(|(h, l)| h - l).collect()).collect();
        let spread = |pick: &dyn Fn(&(Word, Word)) -> &Word| -> Vec<u8> {
            (0..n)
                .map(|c| {
                    let it = words.iter().map(|w| pick(w)[c]);
                    it.clone().max().unwrap_or(0) - it.min().unwrap_or(0)
                })
                .collect()
        };
        let range_x = spread(&|w| &w.0);
        let range_y = spread(&|w| &w.1);
        let anchor = words.first().cloned().ok_or(Error::EmptySubshift)?;
        Ok(CarpetDigits {
            n,
            a: spec.a(),
            b: spec.b(),
            words,
            image,
            fiber_range,
            section: section.into_iter().map(|s| s.expect("nonempty fiber")).collect(),
            fiber_size,
            range_x,
            range_y,
            anchor,
        })
    }

    /// `ℓ∞` spread contributed by every digit level beyond `depth`.
    fn tail_spread(&self, depth: usize) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = (self.a as f64, self.b as f64);
        let tx = a.powi(-(depth as i32)) / (a - 1.0);
        let ty = b.powi(-(depth as i32)) / (b - 1.0);
        (
            self.range_x.iter().map(|&r| r as f64 * tx).collect(),
            self.range_y.iter().map(|&r| r as f64 * ty).collect(),
        )
    }

    /// Largest distance from a point of `X_Ω|_N` to the point with the same
    /// first `depth` digit levels and anchored tail.
    pub fn truncation_error(&self, depth: usize) -> f64 {
        let (x, y) = self.tail_spread(depth);
        x.into_iter().chain(y).fold(0.0, f64::max)
    }
}

/// One box: `k` fixed pairs of `Ω|_N` words, then `M - k` fixed image words.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QBox {
    pub n: usize,
    pub m: usize,
    pub x_digits: Vec<Word>,
    pub y_digits: Vec<Word>,
    /// Exact `ℓ∞` diameter.
    pub diameter: f64,
    /// `a^{-⌊wM⌋}`.
    pub diameter_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QBoxFamily {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// Boxes enumerated from explicit digit data.
    pub count: BigUint,
    /// `|Ω|_N|^k · |Ω'|_N|^{M-k}` from the automaton counts.
    pub formula: BigUint,
    pub max_diameter: f64,
    pub diameter_limit: f64,
    pub all_below_limit: bool,
    pub separation: SeparationReport,
    #[serde(skip)]
    pub witness: PointCloud,
}

/// Mixed-radix index over box coordinates.
struct BoxIndex {
    k: usize,
    m: usize,
    radix_pair: usize,
    radix_image: usize,
}

impl BoxIndex {
    fn total(&self) -> Option<usize> {
        let p = (self.radix_pair as u128).checked_pow(self.k as u32)?;
        let q = (self.radix_image as u128).checked_pow((self.m - self.k) as u32)?;
        usize::try_from(p.checked_mul(q)?).ok()
    }

    /// Digits of index `i`: first `k` pair indices, then `M - k` image indices.
    fn decode(&self, mut i: usize, out: &mut [usize]) {
        for slot in (0..self.m).rev() {
            let r = if slot < self.k { self.radix_pair } else { self.radix_image };
            out[slot] = i % r;
            i /= r;
        }
    }
}

fn box_diameter(d: &CarpetDigits, k: usize, m: usize, idx: &[usize], tails: &(Vec<f64>, Vec<f64>)) -> f64 {
    let a = d.a as f64;
    let mut worst = tails.1.iter().copied().fold(0.0, f64::max);
    for c in 0..d.n {
        let mut sx = tails.0[c];
        let mut scale = a.powi(-(k as i32));
        for &j in &idx[k..m] {
            scale /= a;
            sx += d.fiber_range[j][c] as f64 * scale;
        }
        worst = worst.max(sx);
    }
    worst
}

fn family_point(d: &CarpetDigits, k: usize, m: usize, idx: &[usize], out: &mut [f64]) {
    let (a, b) = (d.a as f64, d.b as f64);
    let n = d.n;
    let (xi, eta) = &d.anchor;
    let tail_a = a.powi(-(m as i32)) / (a - 1.0);
    let tail_b = b.powi(-(m as i32)) / (b - 1.0);
    for c in 0..n {
        out[c] = xi[c] as f64 * tail_a;
        out[n + c] = eta[c] as f64 * tail_b;
    }
    let (mut sa, mut sb) = (1.0, 1.0);
    for (level, &j) in idx.iter().enumerate() {
        sa /= a;
        sb /= b;
        let (u, v) = if level < k {
            let (u, v) = &d.words[j];
            (u, v)
        } else {
            (&d.section[j], &d.image[j])
        };
        for c in 0..n {
            out[c] += u[c] as f64 * sa;
            out[n + c] += v[c] as f64 * sb;
        }
    }
}

/// Enumerates every box of level `(N, M)`, measures its diameter, and builds
/// and checks the separated family.
pub fn qbox_family(spec: &CarpetSpec, n: usize, m: usize, budgets: &Budgets, exec: Execution) -> Result<QBoxFamily> {
    let digits = CarpetDigits::new(spec, n, budgets)?;
    qbox_family_from(spec, &digits, m, budgets, exec)
}

pub fn qbox_family_from(spec: &CarpetSpec, d: &CarpetDigits, m: usize, budgets: &Budgets, exec: Execution) -> Result<QBoxFamily> {
    let n = d.n;
    let k = spec.scale_split(m);
    let index = BoxIndex {
        k,
        m,
        radix_pair: d.words.len(),
        radix_image: d.image.len(),
    };
    let total = index
        .total()
        .filter(|&t| t as u64 <= budgets.points)
        .ok_or_else(|| Error::limit("Q-box enumeration", (d.words.len() as f64).powi(m as i32), budgets.points))?;

    let shift = spec.system().shift();
    let omega_n = symbolic::count_words(shift, n).get(n).clone();
    let image_n = match weighted::image_subshift(spec.system(), budgets)? {
        ImageSubshift::Automaton(img) => symbolic::count_words(&img, n).get(n).clone(),
        ImageSubshift::EnumerationOnly { .. } => BigUint::from(d.image.len()),
    };
    let formula = omega_n.pow(k as u32) * image_n.pow((m - k) as u32);

    let tails = d.tail_spread(m);
    let chunk = 4096;
    let chunks = total.div_ceil(chunk);
    let per_chunk = exec.map_range(chunks, |ci| {
        let mut idx = vec![0usize; m];
        let mut pts = Vec::with_capacity(chunk * 2 * n);
        let mut point = vec![0.0; 2 * n];
        let mut worst = 0.0f64;
        let mut boxes = 0usize;
        for i in ci * chunk..((ci + 1) * chunk).min(total) {
            index.decode(i, &mut idx);
            worst = worst.max(box_diameter(d, k, m, &idx, &tails));
            family_point(d, k, m, &idx, &mut point);
            pts.extend_from_slice(&point);
            boxes += 1;
        }
        (boxes, worst, pts)
    });
    let mut witness = PointCloud::new(2 * n, MetricDescriptor::linf(), 0.0);
    let mut count = 0usize;
    let mut max_diameter = 0.0f64;
    for (boxes, worst, pts) in per_chunk {
        count += boxes;
        max_diameter = max_diameter.max(worst);
        for p in pts.chunks_exact(2 * n) {
            witness.push(p)?;
        }
    }
    let limit = spec.a() as f64 * (spec.b() as f64).powi(-(m as i32));
    let threshold = (spec.b() as f64).powi(-(m as i32)) - 1e-12;
    let separation = cover::linf_separation(&witness, threshold, exec)?;
    Ok(QBoxFamily {
        n,
        m,
        k,
        count: BigUint::from(count),
        formula,
        max_diameter,
        diameter_limit: limit,
        all_below_limit: max_diameter < limit,
        separation,
        witness,
    })
}

/// `(log_mass(P), diam Q)` for every box of level `(N, M)`. `log_mass`
/// receives the `k` pair indices (into `words`) and the `M - k` image indices.
pub fn box_log_masses<F>(spec: &CarpetSpec, d: &CarpetDigits, m: usize, budgets: &Budgets, exec: Execution, log_mass: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&[usize], &[usize]) -> f64 + Sync,
{
    let k = spec.scale_split(m);
    let index = BoxIndex {
        k,
        m,
        radix_pair: d.words.len(),
        radix_image: d.image.len(),
    };
    let total = index
        .total()
        .filter(|&t| t as u64 <= budgets.points)
        .ok_or_else(|| Error::limit("Q-box enumeration", f64::INFINITY, budgets.points))?;
    let tails = d.tail_spread(m);
    let chunk = 4096;
    let parts = exec.map_range(total.div_ceil(chunk), |ci| {
        let mut idx = vec![0usize; m];
        (ci * chunk..((ci + 1) * chunk).min(total))
            .map(|i| {
                index.decode(i, &mut idx);
                (log_mass(&idx[..k], &idx[k..]), box_diameter(d, k, m, &idx, &tails))
            })
            .collect::<Vec<_>>()
    });
    Ok(parts.into_iter().flatten().collect())
}

/// All boxes of level `(N, M)` as explicit records.
pub fn qboxes(spec: &CarpetSpec, d: &CarpetDigits, m: usize, budgets: &Budgets) -> Result<Vec<QBox>> {
    let k = spec.scale_split(m);
    let index = BoxIndex {
        k,
        m,
        radix_pair: d.words.len(),
        radix_image: d.image.len(),
    };
    let total = index
        .total()
        .filter(|&t| t as u64 <= budgets.points)
        .ok_or_else(|| Error::limit("Q-box enumeration", f64::INFINITY, budgets.points))?;
    let tails = d.tail_spread(m);
    let bound = (spec.a() as f64).powi(-(k as i32));
    let mut idx = vec![0usize; m];
    Ok((0..total)
        .map(|i| {
            index.decode(i, &mut idx);
            let x_digits = idx[..k].iter().map(|&j| d.words[j].0.clone()).collect();
            let y_digits = idx
                .iter()
                .enumerate()
                .map(|(lvl, &j)| if lvl < k { d.words[j].1.clone() } else { d.image[j].clone() })
                .collect();
            QBox {
                n: d.n,
                m,
                x_digits,
                y_digits,
                diameter: box_diameter(d, k, m, &idx, &tails),
                diameter_bound: bound,
            }
        })
        .collect())
}

/// Points of `X_Ω|_N` whose first `depth` digit levels range over
/// `(Ω|_N)^depth`, with the anchored tail beyond; `ℓ∞` metric on `R^{2N}`.
pub fn carpet_cloud(d: &CarpetDigits, depth: usize, budgets: &Budgets) -> Result<PointCloud> {
    let n = d.n;
    let total = (d.words.len() as u128).checked_pow(depth as u32).filter(|&t| t <= budgets.points as u128);
    let total = total.ok_or_else(|| Error::limit("carpet cloud", (d.words.len() as f64).powi(depth as i32), budgets.points))? as usize;
    let index = BoxIndex {
        k: depth,
        m: depth,
        radix_pair: d.words.len(),
        radix_image: 1,
    };
    let mut cloud = PointCloud::new(2 * n, MetricDescriptor::linf(), d.truncation_error(depth));
    let mut idx = vec![0usize; depth];
    let mut point = vec![0.0; 2 * n];
    for i in 0..total {
        index.decode(i, &mut idx);
        family_point(d, depth, depth, &idx, &mut point);
        cloud.push(&point)?;
    }
    Ok(cloud)
}
