//! The sequence space `K^ℕ`, `K = {0} ∪ {1/n : n ≥ 1}`, with the product
//! measure `ν^{⊗ℕ}` and the witness sets behind `mdim_H(K^ℕ) = 0`.

use serde::Serialize;

use super::cover::hausdorff_upper_at_scale;
use super::mass::WitnessSet;
use crate::error::{Error, Result};
use crate::weighted::log_sum_exp;

/// `a_ν` with `a_ν Σ 1/n² = 1/2`.
pub const A_NU: f64 = 3.0 / (std::f64::consts::PI * std::f64::consts::PI);

/// Largest `L` we are willing to materialize.
pub const MAX_L: usize = 1_000_000;

/// Sums of more terms than this fall back to a telescoping lower bound.
const EXACT_TERMS: f64 = 100_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum KElem {
    Zero,
    /// `1/n`, `n ≥ 1`.
    Recip(u64),
}

impl KElem {
    pub fn value(self) -> f64 {
        match self {
            KElem::Zero => 0.0,
            KElem::Recip(n) => 1.0 / n as f64,
        }
    }

    pub fn ln(self) -> f64 {
        match self {
            KElem::Zero => f64::NEG_INFINITY,
            KElem::Recip(n) => -(n as f64).ln(),
        }
    }

    /// `ν({self})`.
    pub fn nu(self) -> f64 {
        match self {
            KElem::Zero => 0.5,
            KElem::Recip(n) => A_NU / (n as f64 * n as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixParams {
    pub eps: f64,
    pub m: usize,
    pub delta: f64,
    pub ln_delta: f64,
    /// Least `L` with `2^{-L} < δ^{m^m}`.
    pub l: usize,
}

impl AppendixParams {
    /// `δ` is half of `min(eps/12, a_ν^m/8, 2^{-(m/3+1)})`.
    pub fn new(eps: f64, m: usize) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0 / 6.0) {
            return Err(Error::domain(format!("eps = {eps} must lie in (0, 1/6)")));
        }
        if m == 0 {
            return Err(Error::domain("m must be positive"));
        }
        let mf = m as f64;
        let delta = 0.5 * (eps / 12.0).min(A_NU.powi(m as i32) / 8.0).min(0.5f64.powf(mf / 3.0 + 1.0));
        let ln_delta = delta.ln();
        // ln δ^{m^m} = m^m ln δ, kept in log space
        let ln_tail = mf.powf(mf) * ln_delta;
        let need = -ln_tail / std::f64::consts::LN_2;
        if !need.is_finite() || need >= MAX_L as f64 {
            return Err(Error::ParameterOverflow(format!(
                "L = {need:.3e} for m = {m}, eps = {eps} exceeds {MAX_L}"
            )));
        }
        Ok(AppendixParams {
            eps,
            m,
            delta,
            ln_delta,
            l: need.floor() as usize + 1,
        })
    }

    /// `ln δ^{m^k}`.
    pub fn ln_level(&self, k: usize) -> f64 {
        (self.m as f64).powi(k as i32) * self.ln_delta
    }
}

/// The set `A = ∏_{n ≤ N+L} [x_n - r, x_n]` and its measured size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixSet {
    pub n: usize,
    pub m: usize,
    pub l: usize,
    /// `|I_0|, .., |I_{m+1}|`.
    pub class_sizes: Vec<usize>,
    pub m0: usize,
    pub ln_r: f64,
    /// Exact `ln diam(A, d_N)`.
    pub ln_diam: f64,
    /// Lower bound on `ln μ(A)`.
    pub ln_mass: f64,
    /// `6(N+L)/m`.
    pub exponent: f64,
    /// `ln μ(A) - exponent · ln diam(A)`.
    pub margin: f64,
    /// Coordinates falling under the proof's three cases.
    pub cases: [usize; 3],
    pub passed: bool,
}

impl AppendixSet {
    pub fn witness(&self, point: usize) -> WitnessSet {
        WitnessSet {
            log_diam: self.ln_diam,
            log_mass: self.ln_mass,
            covers: vec![point],
        }
    }
}

/// `(x - min(K ∩ [x - r, x]), lower bound on ν([x - r, x]))`.
fn interval(x: KElem, r: f64) -> (f64, f64) {
    let q = match x {
        KElem::Zero => return (0.0, 0.5),
        KElem::Recip(q) => q as f64,
    };
    if r * q >= 1.0 {
        // contains 0 and every 1/j with j ≥ q
        return (1.0 / q, 0.5 + A_NU * (1.0 / (q * q) + 1.0 / (q + 1.0)));
    }
    let mut q1 = (q / (1.0 - r * q)).floor().max(q);
    if q1 < 9.0e15 {
        // settle rounding: largest j with j - q ≤ r q j
        while q1 > q && q1 - q > r * q * q1 {
            q1 -= 1.0;
        }
        while (q1 + 1.0) - q <= r * q * (q1 + 1.0) {
            q1 += 1.0;
        }
    }
    let spread = (q1 - q) / (q * q1);
    let mass = if q1 - q <= EXACT_TERMS {
        let (lo, hi) = (q as u64, q1 as u64);
        (lo..=hi).rev().map(|j| 1.0 / (j as f64 * j as f64)).sum::<f64>() * A_NU
    } else {
        // Σ_{j>q} 1/j² ≥ Σ 1/(j(j+1))
        A_NU * (1.0 / (q * q) + 1.0 / (q + 1.0) - 1.0 / (q1 + 1.0))
    };
    (spread, mass)
}

/// Builds the witness set for `x ∈ K^{N+L}` and checks
/// `0 < diam(A, d_N) < eps/6` and `μ(A) ≥ diam(A, d_N)^{6(N+L)/m}`.
pub fn appendix_a_construct(x: &[KElem], n: usize, params: &AppendixParams) -> Result<AppendixSet> {
    let AppendixParams { m, l, eps, .. } = *params;
    let len = n + l;
    if n == 0 {
        return Err(Error::domain("N must be positive"));
    }
    if x.len() != len {
        return Err(Error::InsufficientLength { needed: len, got: x.len() });
    }

    let mut class = vec![0usize; len];
    let mut class_sizes = vec![0usize; m + 2];
    for (c, &xn) in class.iter_mut().zip(x) {
        let lx = xn.ln();
        *c = if lx > params.ln_delta {
            0
        } else {
            (1..=m).find(|&k| lx > params.ln_level(k)).unwrap_or(m + 1)
        };
        class_sizes[*c] += 1;
    }
    let m0 = (0..=m)
        .find(|&k| (class_sizes[k] * (m + 1)) <= len)
        .expect("pigeonhole over I_0..I_m");
    let ln_r = params.ln_level(m0);
    let r = ln_r.exp();
    if r == 0.0 {
        return Err(Error::ParameterOverflow(format!("r = exp({ln_r}) underflows")));
    }

    let mut ln_mass = 0.0;
    let mut ln_spread = Vec::with_capacity(len);
    let mut cases = [0usize; 3];
    for (&xn, &c) in x.iter().zip(&class) {
        let (spread, mass) = interval(xn, r);
        ln_mass += mass.ln();
        ln_spread.push(spread.ln());
        cases[match c.cmp(&m0) {
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => 1,
            std::cmp::Ordering::Greater => 2,
        }] += 1;
    }

    // diam(A, d_N) = max_{0≤i<N} Σ_{j≥1} 2^{-j} spread_{i+j}, tail coordinates spread 1
    let ln2 = std::f64::consts::LN_2;
    let mut ln_diam = f64::NEG_INFINITY;
    let mut terms = Vec::with_capacity(len + 1);
    for i in 0..n {
        terms.clear();
        for (j, &ls) in ln_spread[i..].iter().enumerate() {
            if ls > f64::NEG_INFINITY {
                terms.push(ls - (j + 1) as f64 * ln2);
            }
        }
        terms.push(-((len - i) as f64) * ln2);
        ln_diam = ln_diam.max(log_sum_exp(&mut terms));
    }

    let exponent = 6.0 * len as f64 / m as f64;
    let margin = ln_mass - exponent * ln_diam;
    let slack = 1e-12 * ln_mass.abs().max(1.0);
    Ok(AppendixSet {
        n,
        m,
        l,
        class_sizes,
        m0,
        ln_r,
        ln_diam,
        ln_mass,
        exponent,
        margin,
        cases,
        passed: margin >= -slack && ln_diam.is_finite() && ln_diam < (eps / 6.0).ln(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KScale {
    pub eps: f64,
    /// Minimal number of sets of diameter `< eps` covering `K_{n_cap}`.
    pub cover_count: u64,
    pub dimm: f64,
    pub hausdorff_upper: f64,
    /// `true` when the count also equals the one for the full `K`.
    pub exact_for_k: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSequenceReport {
    pub n_cap: u64,
    pub scales: Vec<KScale>,
}

/// Covering numbers of `K_{n_cap} = {0} ∪ {1/n : n ≤ n_cap}` under `|·|`,
/// by a left-to-right sweep, and the Hausdorff bound from the cover by
/// `[0, eps/2]` plus singletons.
pub fn k_sequence_dims(n_cap: u64, eps_list: &[f64]) -> Result<KSequenceReport> {
    if n_cap == 0 {
        return Err(Error::domain("n_cap must be positive"));
    }
    let mut scales = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps > 0.0) {
            return Err(Error::domain(format!("eps = {eps} must be positive")));
        }
        if eps >= 1.0 {
            return Err(Error::DegenerateScale {
                eps,
                truncation: 1.0 / n_cap as f64,
            });
        }
        // first set starts at 0 and takes every 1/n < eps
        let mut count = 1u64;
        let mut start = 0.0f64;
        let first = ((1.0 / eps).floor() as u64).min(n_cap);
        let mut j = first;
        while j >= 1 {
            let p = 1.0 / j as f64;
            if p - start >= eps {
                count += 1;
                start = p;
            }
            j -= 1;
        }
        let mut diams = vec![eps / 2.0];
        diams.extend((1..=n_cap.min((2.0 / eps).ceil() as u64)).filter(|&j| 1.0 / (j as f64) > eps / 2.0).map(|_| 0.0));
        scales.push(KScale {
            eps,
            cover_count: count,
            dimm: (count as f64).ln() / (1.0 / eps).ln(),
            hausdorff_upper: hausdorff_upper_at_scale(&diams, eps)?,
            exact_for_k: 1.0 / (n_cap as f64 + 1.0) < eps,
        });
    }
    Ok(KSequenceReport { n_cap, scales })
}
