//! The product measure `μ_N = f_N^{⊗ℕ}` on digit sequences of a carpet, its
//! mass on `P_{N,M}` cylinders, and the covering lemma's hypotheses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::qbox::{self, CarpetDigits};
use crate::carpet::CarpetSpec;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::Budgets;

/// One probability vector used on every coordinate of a countable product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductMeasure {
    pub pmf: Vec<f64>,
}

impl ProductMeasure {
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        if pmf.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::domain("negative or NaN mass"));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("masses sum to {total}, not 1")));
        }
        Ok(ProductMeasure { pmf })
    }

    /// Mass of the cylinder fixing the listed atoms on the first coordinates.
    pub fn log_cylinder(&self, atoms: &[usize]) -> f64 {
        atoms.iter().map(|&i| self.pmf[i].ln()).sum()
    }
}

/// `f_N(u, v) = t_N(v)^{w-1} / Z_N` on `Ω|_N`, plus the column sums.
#[derive(Debug, Clone)]
pub struct MassTable {
    pub w: f64,
    pub log_z: f64,
    /// Indexed like `CarpetDigits::words`.
    pub measure: ProductMeasure,
    /// `Σ_u f_N(u, v)`, summed entry by entry, indexed like `image`.
    pub column: Vec<f64>,
    /// `t_N(v)` indexed like `image`.
    pub t: Vec<u64>,
    image_of: Vec<usize>,
}

impl MassTable {
    pub fn new(spec: &CarpetSpec, d: &CarpetDigits) -> Result<Self> {
        let w = spec.w();
        let t = d.fiber_size.clone();
        let z: f64 = t.iter().map(|&x| (x as f64).powf(w)).sum();
        let image_of: Vec<usize> = d
            .words
            .iter()
            .map(|(_, v)| d.image.binary_search(v).expect("projection present"))
            .collect();
        let pmf: Vec<f64> = image_of.iter().map(|&j| (t[j] as f64).powf(w - 1.0) / z).collect();
        let mut column = vec![0.0; d.image.len()];
        for (i, &j) in image_of.iter().enumerate() {
            column[j] += pmf[i];
        }
        Ok(MassTable {
            w,
            log_z: z.ln(),
            measure: ProductMeasure::new(pmf)?,
            column,
            t,
            image_of,
        })
    }

    /// `ln μ_N(P)` for the cylinder fixing pairs `pairs[..k]` and the image
    /// words `images[k..M]`.
    pub fn log_box(&self, pairs: &[usize], images: &[usize]) -> f64 {
        self.measure.log_cylinder(pairs) + images.iter().map(|&j| self.column[j].ln()).sum::<f64>()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MassLevel {
    pub m: usize,
    pub k: usize,
    pub boxes: usize,
    pub passed: bool,
    /// `min_P (ln μ(P) - s ln diam Q)`.
    pub worst_margin: f64,
    /// Least `s` for which every box at this level passes.
    pub s_needed: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MassReport {
    pub n: usize,
    pub w: f64,
    pub log_z: f64,
    pub f_sum: f64,
    pub s: f64,
    pub levels: Vec<MassLevel>,
    pub boxes_passed: bool,
    pub s_needed: f64,
    pub identity_samples: usize,
    pub identity_max_error: f64,
}

/// Checks `μ_N(P_{N,M}) ≥ (diam Q_{N,M})^s` on every box for `M` in
/// `m_range`, and the closed form of `(1/NM) ln μ_N(P_{N,M})` on sampled
/// digit sequences.
pub fn mass_distribution_check(
    spec: &CarpetSpec,
    n: usize,
    m_range: std::ops::RangeInclusive<usize>,
    s: f64,
    samples: usize,
    seed: u64,
    budgets: &Budgets,
    exec: Execution,
) -> Result<MassReport> {
    let d = CarpetDigits::new(spec, n, budgets)?;
    let table = MassTable::new(spec, &d)?;
    let f_sum: f64 = table.measure.pmf.iter().sum();

    let mut levels = Vec::new();
    for m in m_range.clone() {
        let k = spec.scale_split(m);
        let rows = qbox::box_log_masses(spec, &d, m, budgets, exec, |pairs, images| table.log_box(pairs, images))?;
        let mut worst = f64::INFINITY;
        let mut s_needed = f64::NEG_INFINITY;
        for &(log_mu, diam) in &rows {
            let ld = diam.ln();
            worst = worst.min(log_mu - s * ld);
            s_needed = s_needed.max(log_mu / ld);
        }
        levels.push(MassLevel {
            m,
            k,
            boxes: rows.len(),
            passed: worst >= -1e-12,
            worst_margin: worst,
            s_needed,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (*m_range.start(), *m_range.end());
    let nf = n as f64;
    let mut max_err = 0.0f64;
    for _ in 0..samples {
        let m = rng.gen_range(lo..=hi);
        let k = spec.scale_split(m);
        let seq: Vec<usize> = (0..m).map(|_| rng.gen_range(0..d.words.len())).collect();
        let images: Vec<usize> = seq.iter().map(|&i| table.image_of[i]).collect();
        let lhs = table.log_box(&seq[..k], &images[k..]) / (nf * m as f64);
        let partial = |j: usize| images[..j].iter().map(|&v| (table.t[v] as f64).ln() / nf).sum::<f64>();
        let (s_m, s_k) = (partial(m), partial(k));
        let w = table.w;
        let rhs = -table.log_z / nf + w * (s_m / m as f64 - s_k / (w * m as f64));
        max_err = max_err.max((lhs - rhs).abs());
    }

    Ok(MassReport {
        n,
        w: table.w,
        log_z: table.log_z,
        f_sum,
        s,
        boxes_passed: levels.iter().all(|l| l.passed),
        s_needed: levels.iter().map(|l| l.s_needed).fold(f64::NEG_INFINITY, f64::max),
        levels,
        identity_samples: samples,
        identity_max_error: max_err,
    })
}

/// A witness set for the measure covering lemma.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessSet {
    pub log_diam: f64,
    pub log_mass: f64,
    /// Indices of the space points it contains.
    pub covers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverVerdict {
    /// `(1 + c) s`, an upper bound on `dim_H(X, d, eps)`.
    pub bound: f64,
    pub sets: usize,
    /// `min (ln μ(A) - s ln diam A)` over the family.
    pub min_margin: f64,
}

/// Verifies the hypotheses of the covering lemma: `6 eps^c < 1`, and every
/// point lies in a set `A` with `0 < diam A < eps/6` and `μ(A) ≥ diam(A)^s`.
pub fn measure_cover_upper(points: usize, family: &[WitnessSet], eps: f64, c: f64, s: f64) -> Result<CoverVerdict> {
    if !(6.0 * eps.powf(c) < 1.0) {
        return Err(Error::HypothesisViolated(format!("6 eps^c = {} is not below 1", 6.0 * eps.powf(c))));
    }
    let cap = (eps / 6.0).ln();
    let mut covered = vec![false; points];
    let mut min_margin = f64::INFINITY;
    for (i, set) in family.iter().enumerate() {
        if !(set.log_diam > f64::NEG_INFINITY && set.log_diam < cap) {
            return Err(Error::HypothesisViolated(format!(
                "set {i}: diameter e^{} not in (0, eps/6)",
                set.log_diam
            )));
        }
        let margin = set.log_mass - s * set.log_diam;
        if margin < -1e-12 * set.log_mass.abs().max(1.0) {
            return Err(Error::HypothesisViolated(format!(
                "set {i}: ln mass {} below s ln diam {}",
                set.log_mass,
                s * set.log_diam
            )));
        }
        min_margin = min_margin.min(margin);
        for &p in &set.covers {
            if p >= points {
                return Err(Error::domain(format!("set {i} covers unknown point {p}")));
            }
            covered[p] = true;
        }
    }
    if let Some(p) = covered.iter().position(|&c| !c) {
        return Err(Error::HypothesisViolated(format!("point {p} lies in no witness set")));
    }
    Ok(CoverVerdict {
        bound: (1.0 + c) * s,
        sets: family.len(),
        min_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::TupleSet;

    #[test]
    fn example_level_one_masses() {
        let spec = CarpetSpec::example();
        let d = CarpetDigits::new(&spec, 1, &Budgets::default()).unwrap();
        let t = MassTable::new(&spec, &d).unwrap();
        let w = spec.w();
        let z = 1.0 + 2f64.powf(w);
        assert!((t.log_z - z.ln()).abs() < 1e-15);
        let total: f64 = t.measure.pmf.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // hand values: f(0,0) = f(2,0) = 2^{w-1}/Z, f(1,1) = 1/Z
        let mut pmf = t.measure.pmf.clone();
        pmf.sort_by(f64::total_cmp);
        assert!((pmf[0] - 2f64.powf(w - 1.0) / z).abs() < 1e-15);
        assert!((pmf[2] - 1.0 / z).abs() < 1e-15);
    }

    #[test]
    fn uniform_relation_gives_uniform_measure() {
        let full = TupleSet::new(3, 2, (0..3).flat_map(|u| (0..2).map(move |v| (u, v)))).unwrap();
        let spec = CarpetSpec::from_tuples(full).unwrap();
        let d = CarpetDigits::new(&spec, 2, &Budgets::default()).unwrap();
        let t = MassTable::new(&spec, &d).unwrap();
        assert!(t.measure.pmf.iter().all(|&p| (p - 1.0 / 36.0).abs() < 1e-15));
    }

    #[test]
    fn identity_holds_and_reports_needed_exponent() {
        let spec = CarpetSpec::example();
        let rep = mass_distribution_check(&spec, 1, 4..=6, 1.0, 50, 0, &Budgets::default(), Execution::Sequential).unwrap();
        assert!(rep.identity_max_error < 1e-12);
        // at s_needed every box passes
        let again =
            mass_distribution_check(&spec, 1, 4..=6, rep.s_needed + 1e-9, 0, 0, &Budgets::default(), Execution::Sequential)
                .unwrap();
        assert!(again.boxes_passed);
    }

    #[test]
    fn equal_boxes_pass_with_equality() {
        let boxes = 16usize;
        let diam: f64 = 1.0 / 1024.0;
        let s = (boxes as f64).ln() / (1.0 / diam).ln();
        let family: Vec<WitnessSet> = (0..boxes)
            .map(|i| WitnessSet {
                log_diam: diam.ln(),
                log_mass: -(boxes as f64).ln(),
                covers: vec![i],
            })
            .collect();
        let v = measure_cover_upper(boxes, &family, 0.01, 1.0, s).unwrap();
        assert!(v.min_margin.abs() < 1e-12);
        assert!((v.bound - 2.0 * s).abs() < 1e-15);
    }

    #[test]
    fn violations_are_reported() {
        let big = WitnessSet {
            log_diam: 0.1f64.ln(),
            log_mass: 0.0,
            covers: vec![0],
        };
        assert!(matches!(
            measure_cover_upper(1, &[big], 0.01, 1.0, 1.0),
            Err(Error::HypothesisViolated(_))
        ));
        let small = WitnessSet {
            log_diam: 1e-4f64.ln(),
            log_mass: 0.0,
            covers: vec![0],
        };
        assert!(matches!(
            measure_cover_upper(2, &[small], 0.01, 1.0, 1.0),
            Err(Error::HypothesisViolated(_))
        ));
    }
}
