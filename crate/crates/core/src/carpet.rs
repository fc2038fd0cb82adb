//! Closed-form dimensions of carpet systems `X_Ω ⊂ [0,1]^ℕ × [0,1]^ℕ` and
//! the classical Bedford–McMullen formulas.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::symbolic::{self, Status, SubshiftSpec, TupleSet};
use crate::weighted::{self, ImageSubshift, PairShiftSystem};
use crate::Budgets;

#[derive(Debug, Clone)]
pub struct CarpetSpec {
    system: PairShiftSystem,
}

impl CarpetSpec {
    pub fn new(a: usize, b: usize, omega: SubshiftSpec) -> Result<Self> {
        Self::from_system(PairShiftSystem::new(a, b, omega)?)
    }

    pub fn from_tuples(r: TupleSet) -> Result<Self> {
        Self::from_system(PairShiftSystem::from_tuples(r)?)
    }

    pub fn from_system(system: PairShiftSystem) -> Result<Self> {
        let (a, b) = (system.a(), system.b());
        if !(a >= b && b >= 2) {
            return Err(Error::spec(format!("carpet needs a >= b >= 2, got a={a}, b={b}")));
        }
        Ok(CarpetSpec { system })
    }

    /// The worked example: `a = 3`, `b = 2`, `R = {(0,0), (1,1), (2,0)}`.
    pub fn example() -> Self {
        CarpetSpec::from_tuples(TupleSet::parse(3, 2, "00,11,20").expect("valid")).expect("valid")
    }

    pub fn a(&self) -> usize {
        self.system.a()
    }

    pub fn b(&self) -> usize {
        self.system.b()
    }

    pub fn system(&self) -> &PairShiftSystem {
        &self.system
    }

    /// `w = log_a b`.
    pub fn w(&self) -> f64 {
        (self.b() as f64).ln() / (self.a() as f64).ln()
    }

    /// `⌊wM⌋`, computed exactly as the largest `k` with `a^k ≤ b^M`.
    pub fn scale_split(&self, m: usize) -> usize {
        floor_log_ratio(self.a() as u128, self.b() as u128, m)
    }
}

/// Largest `k` with `a^k ≤ b^m`, for `a ≥ b ≥ 2`.
pub fn floor_log_ratio(a: u128, b: u128, m: usize) -> usize {
    use num_bigint::BigUint;
    let target = BigUint::from(b).pow(m as u32);
    let a = BigUint::from(a);
    let mut k = 0usize;
    let mut p = a.clone();
    while p <= target {
        k += 1;
        p *= &a;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalBm {
    pub dim_h: f64,
    pub dim_m: f64,
    pub r: usize,
    pub s: usize,
    pub t: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensionReport {
    pub a: usize,
    pub b: usize,
    pub w: f64,
    pub mdim_h: Estimate,
    pub mdim_m: Estimate,
    pub h_omega: f64,
    pub h_omega_prime: Estimate,
    pub h_weighted: Estimate,
    pub classical: Option<ClassicalBm>,
}

pub fn mean_dims(spec: &CarpetSpec, n_max: usize, budgets: &Budgets, exec: Execution) -> Result<DimensionReport> {
    let sys = &spec.system;
    let (ln_a, ln_b) = ((spec.a() as f64).ln(), (spec.b() as f64).ln());
    let w = spec.w();

    let h_omega = symbolic::entropy(sys.shift(), n_max)?.best_estimate;
    let h_omega_prime = match weighted::image_subshift(sys, budgets)? {
        ImageSubshift::Automaton(img) => Estimate {
            value: symbolic::entropy(&img, n_max)?.best_estimate,
            status: Status::Exact,
        },
        ImageSubshift::EnumerationOnly { .. } => {
            let table = weighted::fiber_counts(sys, n_max, budgets, exec)?;
            let logs = table.levels.iter().map(|l| symbolic::big_ln(&l.image_count()));
            Estimate {
                value: *symbolic::fekete_bounds(logs).last().expect("n_max >= 1"),
                status: Status::UpperBound,
            }
        }
    };
    let weighted = weighted::weighted_entropy(sys, w, n_max, budgets, exec)?;
    let h_weighted = Estimate {
        value: weighted.best_estimate,
        status: weighted.status,
    };

    let mdim_h = Estimate {
        value: h_weighted.value / ln_b,
        status: h_weighted.status,
    };
    let mdim_m = Estimate {
        value: h_omega / ln_a + (1.0 / ln_b - 1.0 / ln_a) * h_omega_prime.value,
        status: h_omega_prime.status,
    };
    let classical = sys
        .tuples()
        .map(|r| classical_bm(spec.a(), spec.b(), r))
        .transpose()?;
    Ok(DimensionReport {
        a: spec.a(),
        b: spec.b(),
        w,
        mdim_h,
        mdim_m,
        h_omega,
        h_omega_prime,
        h_weighted,
        classical,
    })
}

pub fn classical_bm(a: usize, b: usize, r: &TupleSet) -> Result<ClassicalBm> {
    if !(a >= b && b >= 2) {
        return Err(Error::domain(format!("need a >= b >= 2, got a={a}, b={b}")));
    }
    if r.is_empty() {
        return Err(Error::domain("empty tuple set"));
    }
    let (ln_a, ln_b) = ((a as f64).ln(), (b as f64).ln());
    let w = ln_b / ln_a;
    let t = r.column_counts();
    let s = t.iter().filter(|&&x| x > 0).count();
    let sum: f64 = t.iter().filter(|&&x| x > 0).map(|&x| (x as f64).powf(w)).sum();
    Ok(ClassicalBm {
        dim_h: sum.ln() / ln_b,
        dim_m: (s as f64).ln() / ln_b + (r.len() as f64 / s as f64).ln() / ln_a,
        r: r.len(),
        s,
        t,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapAnalysis {
    pub equal: bool,
    /// `a = b` or all nonzero column counts coincide.
    pub predicted_equal: bool,
    /// Distinct nonzero `t_j`, ascending.
    pub witness: Vec<u64>,
    pub dim_h: f64,
    pub dim_m: f64,
}

pub fn gap_analysis(a: usize, b: usize, r: &TupleSet) -> Result<GapAnalysis> {
    let c = classical_bm(a, b, r)?;
    let witness: Vec<u64> = c.t.iter().copied().filter(|&x| x > 0).collect::<BTreeSet<_>>().into_iter().collect();
    Ok(GapAnalysis {
        equal: (c.dim_h - c.dim_m).abs() <= 1e-9,
        predicted_equal: a == b || witness.len() == 1,
        witness,
        dim_h: c.dim_h,
        dim_m: c.dim_m,
    })
}
