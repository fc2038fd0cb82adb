//! Regression checks reproducing the worked examples and the closed-form
//! identities end to end. Each check returns a verdict with its numbers.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::carpet::{self, CarpetSpec};
use crate::error::Result;
use crate::grid2d::{self, Grid2DSpec};
use crate::oracle::appendix::{self, AppendixParams, KElem};
use crate::oracle::cover::covering_bounds;
use crate::oracle::mass::mass_distribution_check;
use crate::oracle::qbox::{self, CarpetDigits};
use crate::par::Execution;
use crate::selfsim::{self, BetaSystemSpec};
use crate::symbolic::{self, SubshiftSpec, TupleSet};
use crate::weighted::{self, FiberMethod, PairShiftSystem};
use crate::Budgets;

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
    pub limit_s: Option<f64>,
}

impl Verdict {
    pub fn within_limit(&self) -> bool {
        self.limit_s.is_none_or(|l| self.elapsed_s < l)
    }
}

pub const NAMES: [&str; 10] = [
    "carpet example",
    "weighted entropy closed form",
    "Q-box lemma",
    "covering sandwich",
    "beta-expansion separation",
    "entropy oracles",
    "2D counts",
    "mass distribution",
    "K^N appendix",
    "ordering and coincidence",
];

const LIMITS: [Option<f64>; 10] = [Some(1.0), Some(30.0), Some(10.0), None, Some(60.0), Some(1.0), Some(60.0), Some(30.0), Some(30.0), Some(10.0)];

/// Runs check `id` (1-based), timing it.
pub fn run(id: u8, exec: Execution) -> Verdict {
    let start = Instant::now();
    let out = match id {
        1 => carpet_example(),
        2 => weighted_closed_form(exec),
        3 => qbox_lemma(exec),
        4 => covering_sandwich(exec),
        5 => beta_separation(exec),
        6 => entropy_oracles(),
        7 => grid_counts(exec),
        8 => mass_certificate(exec),
        9 => appendix_k(),
        10 => ordering(exec),
        _ => panic!("no check {id}"),
    };
    let (passed, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
    Verdict {
        id,
        name: NAMES[id as usize - 1],
        passed,
        detail,
        elapsed_s: start.elapsed().as_secs_f64(),
        limit_s: LIMITS[id as usize - 1],
    }
}

pub fn run_all(exec: Execution) -> Vec<Verdict> {
    (1..=10).map(|id| run(id, exec)).collect()
}

type Outcome = Result<(bool, String)>;

fn carpet_example() -> Outcome {
    let rep = carpet::mean_dims(&CarpetSpec::example(), 8, &Budgets::default(), Execution::Sequential)?;
    let (h, m) = (rep.mdim_h.value, rep.mdim_m.value);
    let ok = (h - 1.3496838201).abs() < 1e-9 && (m - 1.3690702464).abs() < 1e-9;
    Ok((ok, format!("mdim_H = {h:.12}, mdim_M = {m:.12}")))
}

/// A random nonempty `R ⊂ A × B` with `2 ≤ b ≤ a ≤ 5`.
pub fn random_tuples(rng: &mut ChaCha8Rng) -> TupleSet {
    let a = rng.gen_range(2..=5usize);
    let b = rng.gen_range(2..=a);
    loop {
        let pairs: Vec<(u8, u8)> = (0..a as u8)
            .flat_map(|u| (0..b as u8).map(move |v| (u, v)))
            .filter(|_| rng.gen_bool(0.5))
            .collect();
        if !pairs.is_empty() {
            return TupleSet::new(a, b, pairs).expect("in range");
        }
    }
}

fn weighted_closed_form(exec: Execution) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let budgets = Budgets::default();
    let mut worst_z = 0.0f64;
    let mut worst_end = 0.0f64;
    for _ in 0..50 {
        let r = random_tuples(&mut rng);
        let sys = PairShiftSystem::from_tuples(r.clone())?;
        let w = (r.b() as f64).ln() / (r.a() as f64).ln();
        let closed = weighted::tuple_closed_form(&r, w);
        let table = weighted::fiber_counts_with(&sys, 8, &budgets, exec, FiberMethod::Enumerate)?;
        for n in 1..=8 {
            worst_z = worst_z.max((table.level(n).log_z(w) / n as f64 - closed).abs());
        }
        let h1 = weighted::weighted_entropy(&sys, 1.0, 6, &budgets, exec)?.best_estimate;
        let h_omega = symbolic::entropy(sys.shift(), 6)?.best_estimate;
        let h0 = weighted::weighted_entropy(&sys, 0.0, 6, &budgets, exec)?.best_estimate;
        let img = weighted::image_subshift(&sys, &budgets)?;
        let h_img = symbolic::entropy(img.automaton().expect("tuple image is a full shift"), 6)?.best_estimate;
        worst_end = worst_end.max((h1 - h_omega).abs()).max((h0 - h_img).abs());
    }
    Ok((
        worst_z <= 1e-12 && worst_end <= 1e-9,
        format!("max |ln Z_N/N - closed| = {worst_z:.2e}, max endpoint error = {worst_end:.2e}"),
    ))
}

fn qbox_lemma(exec: Execution) -> Outcome {
    let spec = CarpetSpec::example();
    let budgets = Budgets {
        points: 2_000_000,
        ..Budgets::default()
    };
    let mut fails = Vec::new();
    let mut checked = 0;
    for n in 1..=3 {
        let d = CarpetDigits::new(&spec, n, &budgets)?;
        for m in 1..=5 {
            let fam = qbox::qbox_family_from(&spec, &d, m, &budgets, exec)?;
            checked += 1;
            if fam.count != fam.formula || !fam.all_below_limit || !fam.separation.passed {
                fails.push(format!("(N={n}, M={m})"));
            }
        }
    }
    Ok((fails.is_empty(), format!("{checked} levels checked, failures: {fails:?}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichRow {
    pub n: usize,
    pub m: usize,
    pub points: usize,
    pub lower: usize,
    pub upper: usize,
    pub lower_rate: f64,
    pub upper_rate: f64,
}

/// Greedy covering brackets on carpet clouds at `eps = b^{-M}`; depth
/// `M + 3` keeps the truncation below `eps/8`.
pub fn sandwich_rows(spec: &CarpetSpec, n_max: usize, m_max: usize, point_cap: usize, exec: Execution) -> Result<Vec<SandwichRow>> {
    let budgets = Budgets {
        points: point_cap as u64,
        ..Budgets::default()
    };
    let lb = (spec.b() as f64).ln();
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let d = CarpetDigits::new(spec, n, &budgets)?;
        for m in 1..=m_max {
            let depth = m + 3;
            if (d.words.len() as f64).powi(depth as i32) > point_cap as f64 {
                break;
            }
            let cloud = qbox::carpet_cloud(&d, depth, &budgets)?;
            let eps = (spec.b() as f64).powi(-(m as i32));
            let cb = covering_bounds(&cloud, eps, exec)?;
            let nm = (n * m) as f64 * lb;
            rows.push(SandwichRow {
                n,
                m,
                points: cloud.len(),
                lower: cb.lower,
                upper: cb.upper,
                lower_rate: (cb.lower as f64).ln() / nm,
                upper_rate: (cb.upper as f64).ln() / nm,
            });
        }
    }
    Ok(rows)
}

fn covering_sandwich(exec: Execution) -> Outcome {
    let spec = CarpetSpec::example();
    let target = carpet::mean_dims(&spec, 8, &Budgets::default(), exec)?.mdim_m.value;
    let rows = sandwich_rows(&spec, 6, 6, 60_000, exec)?;
    let top = rows.iter().max_by_key(|r| (r.n * r.m, r.n)).expect("at least one level");
    let ok = top.lower_rate <= target + 0.15 && top.upper_rate >= target - 0.15 && rows.iter().all(|r| r.lower <= r.upper);
    Ok((
        ok,
        format!(
            "largest (N,M) = ({}, {}): lower rate {:.4}, upper rate {:.4}, mdim_M = {target:.4}",
            top.n, top.m, top.lower_rate, top.upper_rate
        ),
    ))
}

fn beta_separation(exec: Execution) -> Outcome {
    let budgets = Budgets::default();
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for a in [2usize, 3] {
        for beta in [a as f64, a as f64 + 0.5, a as f64 + 1.0] {
            for n in 1..=8 {
                let g = selfsim::min_gap(a, beta, n, &budgets, exec)?;
                ok &= g.passed;
                worst = worst.min(g.gap / g.threshold);
            }
        }
    }
    let mut families = 0;
    for omega in [SubshiftSpec::full(2)?, SubshiftSpec::golden_mean()] {
        for beta in [2.0, 2.5] {
            let spec = BetaSystemSpec::new(2, beta, omega.clone())?;
            for n_window in 1..=3 {
                for levels in 1..=3 {
                    let fam = selfsim::covering_lower_bound(&spec, n_window, levels, 1e-9, &budgets, exec)?;
                    ok &= fam.passed && fam.points.len() as u64 == u64::try_from(&fam.count).unwrap_or(u64::MAX);
                    families += 1;
                }
            }
        }
    }
    Ok((ok, format!("min gap / beta^-n = {worst:.6}; {families} separated families checked")))
}

fn entropy_oracles() -> Outcome {
    let golden = symbolic::prune(&SubshiftSpec::golden_mean())?;
    let rep = symbolic::entropy(&golden, 20)?;
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut fib = (1u64, 2u64);
    let mut counts_ok = true;
    for n in 1..=20 {
        counts_ok &= rep.counts.get(n) == &num_bigint::BigUint::from(fib.1);
        fib = (fib.1, fib.0 + fib.1);
    }
    let err = (rep.best_estimate - phi.ln()).abs();
    let mut full_err = 0.0f64;
    for k in 2..=6usize {
        let s = symbolic::prune(&SubshiftSpec::full(k)?)?;
        let e = symbolic::entropy(&s, 10)?;
        full_err = full_err.max((e.best_estimate - (k as f64).ln()).abs());
        counts_ok &= (1..=10).all(|n| e.counts.get(n) == &num_bigint::BigUint::from(k).pow(n as u32));
    }
    Ok((
        counts_ok && err <= 1e-9 && full_err <= 1e-12,
        format!("golden error {err:.2e}, full-shift error {full_err:.2e}, counts exact: {counts_ok}"),
    ))
}

fn grid_counts(exec: Execution) -> Outcome {
    let budgets = Budgets::default();
    let mut ok = true;
    for a in [2usize, 3] {
        let free = Grid2DSpec::free(a)?;
        for n in 1..=6 {
            for m in 1..=6 {
                ok &= grid2d::count_rectangles(&free, n, m, &budgets, exec)? == num_bigint::BigUint::from(a).pow((n * m) as u32);
            }
        }
    }
    let td = Grid2DSpec::three_dot();
    for n in 1..=6 {
        for m in 1..=6 {
            let c = grid2d::count_rectangles(&td, n, m, &budgets, exec)?;
            ok &= c == num_bigint::BigUint::from(2u8).pow((n + m - 1) as u32);
            if n <= 4 && m <= 4 {
                ok &= grid2d::enumerate_patterns(&td, n, m, &budgets)?.len() as u64 == 1 << (n + m - 1);
            }
        }
    }
    let h = grid2d::homog_mean_dims(&Grid2DSpec::free(2)?, 4, 4, &budgets, exec)?;
    ok &= h.mdim == 1.0;
    Ok((ok, format!("homog mdim(Free, 2) = {}", h.mdim)))
}

fn mass_certificate(exec: Execution) -> Outcome {
    let spec = CarpetSpec::example();
    let z1 = 1.0 + 2f64.powf(spec.w());
    let s = z1.log2() - 0.1;
    let rep = mass_distribution_check(&spec, 1, 4..=10, s, 100, 0, &Budgets::default(), exec)?;
    let sum_ok = (rep.f_sum - 1.0).abs() <= 1e-12;
    let ok = rep.boxes_passed && rep.identity_max_error <= 1e-10 && sum_ok;
    let failing: Vec<usize> = rep.levels.iter().filter(|l| !l.passed).map(|l| l.m).collect();
    Ok((
        ok,
        format!(
            "s = {s:.6}, least passing s = {:.6}, failing M = {failing:?}, identity error {:.2e}",
            rep.s_needed, rep.identity_max_error
        ),
    ))
}

/// A random point of `K^len` mixing zeros with reciprocals spread over
/// many decades.
pub fn random_k_point(rng: &mut ChaCha8Rng, len: usize) -> Vec<KElem> {
    (0..len)
        .map(|_| {
            if rng.gen_bool(0.3) {
                KElem::Zero
            } else {
                KElem::Recip(10f64.powf(rng.gen_range(0.0..18.0)) as u64)
            }
        })
        .collect()
}

fn appendix_k() -> Outcome {
    let eps = 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut fails = 0;
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let m = if i % 2 == 0 { 2 } else { 3 };
        let n = 1 + i % 3;
        let p = AppendixParams::new(eps, m)?;
        let x = random_k_point(&mut rng, n + p.l);
        let a = appendix::appendix_a_construct(&x, n, &p)?;
        fails += (!a.passed) as usize;
        worst = worst.min(a.margin);
    }
    let k = appendix::k_sequence_dims(1_000_000, &[1e-1, 1e-2, 1e-3, 1e-4])?;
    let last = k.scales.last().expect("four scales");
    let ok = fails == 0 && (0.40..=0.60).contains(&last.dimm) && k.scales.iter().all(|s| s.hausdorff_upper == 0.0);
    Ok((
        ok,
        format!("{fails} failing sets, min margin {worst:.3e}; dimm(K, 1e-4) = {:.4}", last.dimm),
    ))
}

fn ordering(exec: Execution) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let budgets = Budgets::default();
    let mut ok = true;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let r = random_tuples(&mut rng);
        let (a, b) = (r.a(), r.b());
        let rep = carpet::mean_dims(&CarpetSpec::from_tuples(r.clone())?, 4, &budgets, exec)?;
        ok &= rep.mdim_h.value <= rep.mdim_m.value + 1e-9;
        let g = carpet::gap_analysis(a, b, &r)?;
        ok &= g.equal == g.predicted_equal;
        let c = rep.classical.expect("tuple carpet");
        worst = worst.max((c.dim_h - rep.mdim_h.value).abs()).max((c.dim_m - rep.mdim_m.value).abs());
    }
    Ok((ok && worst <= 1e-9, format!("max |mean - classical| = {worst:.2e}")))
}
