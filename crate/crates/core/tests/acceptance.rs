//! End-to-end acceptance checks. Each criterion runs the library check and
//! an independent oracle written here, then prints one line.

use std::collections::HashMap;
use std::process::ExitCode;

use meandim::carpet::{self, CarpetSpec};
use meandim::grid2d::{self, Grid2DSpec};
use meandim::oracle::appendix::{self, AppendixParams, KElem, A_NU};
use meandim::oracle::qbox::{self, CarpetDigits};
use meandim::selfsim::{self, BetaSystemSpec};
use meandim::suite::{self, Verdict};
use meandim::symbolic::{self, SubshiftSpec, TupleSet};
use meandim::weighted::PairShiftSystem;
use meandim::{Budgets, Execution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn w32() -> f64 {
    2f64.ln() / 3f64.ln()
}

// 1: the quoted decimals, and the two closed forms they come from.
fn oracle_1() -> Check {
    let w = w32();
    let h = (1.0 + 2f64.powf(w)).log2();
    let m = 2.0 - w;
    ensure((h - 1.3496838201).abs() < 1e-9 && (m - 1.3690702464).abs() < 1e-9, || format!("{h} {m}"))?;
    let rep = carpet::mean_dims(&CarpetSpec::example(), 8, &Budgets::default(), Execution::Sequential).map_err(|e| e.to_string())?;
    ensure((rep.mdim_h.value - h).abs() < 1e-12 && (rep.mdim_m.value - m).abs() < 1e-12, || "library disagrees with closed forms".into())?;
    Ok(format!("log2(1+2^w) = {h:.10}, 2-w = {m:.10}"))
}

// 2: brute-force Z_N over every word of R^N, and endpoint closed forms.
fn oracle_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    for _ in 0..50 {
        let r = suite::random_tuples(&mut rng);
        let (a, b) = (r.a() as f64, r.b() as f64);
        let w = b.ln() / a.ln();
        let mut t = vec![0u64; r.b()];
        for &(_, v) in r.pairs() {
            t[v as usize] += 1;
        }
        let closed: f64 = t.iter().filter(|&&x| x > 0).map(|&x| (x as f64).powf(w)).sum::<f64>().ln();
        let sys = PairShiftSystem::from_tuples(r.clone()).map_err(|e| e.to_string())?;
        let table = meandim::weighted::fiber_counts(&sys, 8, &Budgets::default(), Execution::Sequential).map_err(|e| e.to_string())?;
        for n in 1..=8u32 {
            if (r.len() as f64).powi(n as i32) > 2e5 {
                break;
            }
            let mut fibers: HashMap<Vec<u8>, u64> = HashMap::new();
            for mut i in 0..(r.len() as u64).pow(n) {
                let v: Vec<u8> = (0..n)
                    .map(|_| {
                        let p = r.pairs()[(i % r.len() as u64) as usize];
                        i /= r.len() as u64;
                        p.1
                    })
                    .collect();
                *fibers.entry(v).or_default() += 1;
            }
            let z: f64 = fibers.values().map(|&c| (c as f64).powf(w)).sum();
            let brute = z.ln() / n as f64;
            ensure((brute - closed).abs() < 1e-12, || format!("ln Z_{n}/{n} = {brute} vs {closed}"))?;
            let lib = table.level(n as usize).log_z(w) / n as f64;
            ensure((lib - brute).abs() < 1e-12, || format!("library ln Z_{n}/{n} = {lib} vs {brute}"))?;
            checked += 1;
        }
        let h1 = meandim::weighted::weighted_entropy(&sys, 1.0, 4, &Budgets::default(), Execution::Sequential).map_err(|e| e.to_string())?;
        let h0 = meandim::weighted::weighted_entropy(&sys, 0.0, 4, &Budgets::default(), Execution::Sequential).map_err(|e| e.to_string())?;
        let s = t.iter().filter(|&&x| x > 0).count() as f64;
        ensure((h1.best_estimate - (r.len() as f64).ln()).abs() < 1e-9, || "h^1 != ln|R|".into())?;
        ensure((h0.best_estimate - s.ln()).abs() < 1e-9, || "h^0 != ln s".into())?;
    }
    Ok(format!("{checked} brute-force levels agree"))
}

// 3: box count and diameters from explicit deep points, grouped by box key.
fn oracle_3() -> Check {
    let spec = CarpetSpec::example();
    let r = [(0u8, 0u8), (1, 1), (2, 0)];
    for m in 1..=4usize {
        let k = spec.scale_split(m);
        ensure(3f64.powi(k as i32) <= 2f64.powi(m as i32) && 3f64.powi(k as i32 + 1) > 2f64.powi(m as i32), || "floor(wM)".into())?;
        let depth = m + 6;
        let mut boxes: HashMap<(Vec<u8>, Vec<u8>), [f64; 4]> = HashMap::new();
        for mut i in 0..3u64.pow(depth as u32) {
            let digits: Vec<(u8, u8)> = (0..depth)
                .map(|_| {
                    let d = r[(i % 3) as usize];
                    i /= 3;
                    d
                })
                .collect();
            let x: f64 = digits.iter().enumerate().map(|(j, d)| d.0 as f64 * 3f64.powi(-(j as i32 + 1))).sum();
            let y: f64 = digits.iter().enumerate().map(|(j, d)| d.1 as f64 * 2f64.powi(-(j as i32 + 1))).sum();
            let key = (digits[..k].iter().map(|d| d.0).collect(), digits[..m].iter().map(|d| d.1).collect());
            let e = boxes.entry(key).or_insert([f64::MAX, f64::MIN, f64::MAX, f64::MIN]);
            *e = [e[0].min(x), e[1].max(x), e[2].min(y), e[3].max(y)];
        }
        let expect = 3usize.pow(k as u32) * 2usize.pow((m - k) as u32);
        ensure(boxes.len() == expect, || format!("M={m}: {} boxes, expected {expect}", boxes.len()))?;
        let d = CarpetDigits::new(&spec, 1, &Budgets::default()).map_err(|e| e.to_string())?;
        let lib = qbox::qboxes(&spec, &d, m, &Budgets::default()).map_err(|e| e.to_string())?;
        ensure(lib.len() == expect, || "library box count".into())?;
        let limit = 3.0 * 2f64.powi(-(m as i32));
        for ext in boxes.values() {
            let diam = (ext[1] - ext[0]).max(ext[3] - ext[2]);
            ensure(diam < limit, || format!("M={m}: diameter {diam} >= {limit}"))?;
        }
    }
    Ok("box keys and extents from depth M+6 points agree for N=1, M<=4".into())
}

// 4: the metric mean dimension formula in closed form.
fn oracle_4() -> Check {
    let rep = carpet::mean_dims(&CarpetSpec::example(), 6, &Budgets::default(), Execution::Sequential).map_err(|e| e.to_string())?;
    ensure((rep.mdim_m.value - (2.0 - w32())).abs() < 1e-12, || "mdim_M".into())?;
    Ok(format!("target mdim_M = 2 - log_3 2 = {:.6}", 2.0 - w32()))
}

// 5: pairwise gaps by brute force, and family distances with a local metric.
fn oracle_5() -> Check {
    for a in [2usize, 3] {
        for beta in [a as f64, a as f64 + 0.5, a as f64 + 1.0] {
            for n in 1..=6u32 {
                let vals: Vec<f64> = (0..(a as u64).pow(n))
                    .map(|mut i| {
                        (1..=n)
                            .rev()
                            .map(|k| {
                                let d = (i % a as u64) as f64;
                                i /= a as u64;
                                d * beta.powi(-(k as i32))
                            })
                            .sum()
                    })
                    .collect();
                let mut best = f64::INFINITY;
                for i in 0..vals.len() {
                    for j in i + 1..vals.len() {
                        best = best.min((vals[i] - vals[j]).abs());
                    }
                }
                let lib = selfsim::min_gap(a, beta, n as usize, &Budgets::default(), Execution::Sequential).map_err(|e| e.to_string())?;
                ensure((lib.gap - best).abs() < 1e-12, || format!("a={a} beta={beta} n={n}: {} vs {best}", lib.gap))?;
                ensure(best >= beta.powi(-(n as i32)) - 1e-12, || format!("gap {best} below beta^-n"))?;
            }
        }
    }
    let counts = |golden: bool, n: usize| if golden { [2usize, 3, 5][n - 1] } else { 1 << n };
    for golden in [false, true] {
        let omega = if golden { SubshiftSpec::golden_mean() } else { SubshiftSpec::full(2).unwrap() };
        let spec = BetaSystemSpec::new(2, 2.5, omega).map_err(|e| e.to_string())?;
        for nw in 1..=3 {
            for lv in 1..=3 {
                let fam = selfsim::covering_lower_bound(&spec, nw, lv, 1e-9, &Budgets::default(), Execution::Sequential).map_err(|e| e.to_string())?;
                let pts: Vec<&[f64]> = fam.points.points().collect();
                ensure(pts.len() == counts(golden, nw).pow(lv as u32), || "family size".into())?;
                let dist = |p: &[f64], q: &[f64]| {
                    (0..nw)
                        .map(|s| (s..p.len()).map(|i| 2f64.powi(-((i - s) as i32)) * (p[i] - q[i]).abs()).sum::<f64>())
                        .fold(0.0, f64::max)
                };
                let need = 2.5f64.powi(-(lv as i32)) - 1e-9;
                for i in 0..pts.len() {
                    for j in i + 1..pts.len() {
                        ensure(dist(pts[i], pts[j]) >= need, || format!("N={nw} n={lv}: pair ({i},{j}) too close"))?;
                    }
                }
            }
        }
    }
    Ok("brute gaps match for n<=6; family pairs rechecked".into())
}

// 6: Fibonacci recurrence and the golden ratio.
fn oracle_6() -> Check {
    let shift = symbolic::prune(&SubshiftSpec::golden_mean()).map_err(|e| e.to_string())?;
    let counts = symbolic::count_words(&shift, 20);
    let (mut f0, mut f1) = (1u64, 2u64);
    for n in 1..=20 {
        ensure(counts.get(n) == &num_bigint::BigUint::from(f1), || format!("c_{n}"))?;
        (f0, f1) = (f1, f0 + f1);
    }
    let h = symbolic::entropy(&shift, 20).map_err(|e| e.to_string())?.best_estimate;
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    ensure((h - phi.ln()).abs() < 1e-9, || format!("h = {h}"))?;
    Ok(format!("h = {h:.12}, ln phi = {:.12}", phi.ln()))
}

// 7: every grid checked directly for N, M <= 4.
fn oracle_7() -> Check {
    let td = Grid2DSpec::three_dot();
    for n in 1..=4usize {
        for m in 1..=4usize {
            let mut count = 0u64;
            for g in 0..1u64 << (n * m) {
                let at = |r: usize, c: usize| (g >> (r * m + c)) & 1;
                let ok = (0..n - 1).all(|r| (0..m - 1).all(|c| (at(r, c) + at(r + 1, c) + at(r, c + 1)) % 2 == 0));
                count += ok as u64;
            }
            ensure(count == 1 << (n + m - 1), || format!("{n}x{m}: {count}"))?;
            let lib = grid2d::count_rectangles(&td, n, m, &Budgets::default(), Execution::Sequential).map_err(|e| e.to_string())?;
            ensure(lib == num_bigint::BigUint::from(count), || "library count".into())?;
        }
    }
    Ok("three-dot brute force agrees for N, M <= 4".into())
}

// 8: μ_1 and box diameters from the digit formulas, box by box.
fn oracle_8() -> Check {
    let w = w32();
    let z = 1.0 + 2f64.powf(w);
    let s = z.log2() - 0.1;
    let f = |v: u8| if v == 0 { 2f64.powf(w - 1.0) / z } else { 1.0 / z };
    let col = |v: u8| if v == 0 { 2.0 * f(0) } else { f(1) };
    let range = |v: u8| if v == 0 { 2.0 } else { 0.0 };
    let spec = CarpetSpec::example();
    let mut least = f64::NEG_INFINITY;
    let mut failing = Vec::new();
    for m in 4..=10usize {
        let k = spec.scale_split(m);
        let mut fails = 0;
        // pair digits 0..3 map to (0,0), (1,1), (2,0); image digits are v
        for i in 0..3u64.pow(k as u32) * 2u64.pow((m - k) as u32) {
            let mut r = i;
            let mut ln_mu = 0.0;
            let mut sx = 3f64.powi(-(m as i32));
            for lvl in 0..m {
                if lvl < k {
                    let v = [0u8, 1, 0][(r % 3) as usize];
                    r /= 3;
                    ln_mu += f(v).ln();
                } else {
                    let v = (r % 2) as u8;
                    r /= 2;
                    ln_mu += col(v).ln();
                    sx += range(v) * 3f64.powi(-(lvl as i32 + 1));
                }
            }
            let diam = sx.max(2f64.powi(-(m as i32)));
            least = least.max(ln_mu / diam.ln());
            fails += (ln_mu < s * diam.ln() - 1e-12) as usize;
        }
        if fails > 0 {
            failing.push(m);
        }
    }
    let rep = meandim::oracle::mass::mass_distribution_check(&spec, 1, 4..=10, s, 0, 0, &Budgets::default(), Execution::Sequential)
        .map_err(|e| e.to_string())?;
    ensure((rep.s_needed - least).abs() < 1e-9, || format!("least passing s: library {} vs {least}", rep.s_needed))?;

    // identity on sampled sequences, with S computed here
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut err = 0.0f64;
    for _ in 0..100 {
        let m = rng.gen_range(4..=10usize);
        let k = spec.scale_split(m);
        let ys: Vec<u8> = (0..m).map(|_| [0u8, 1, 0][rng.gen_range(0..3)]).collect();
        let ln_mu: f64 = ys[..k].iter().map(|&v| f(v).ln()).sum::<f64>() + ys[k..].iter().map(|&v| col(v).ln()).sum::<f64>();
        let t = |v: u8| if v == 0 { 2f64.ln() } else { 0.0 };
        let sm: f64 = ys.iter().map(|&v| t(v)).sum();
        let sk: f64 = ys[..k].iter().map(|&v| t(v)).sum();
        let rhs = -z.ln() + w * (sm / m as f64 - sk / (w * m as f64));
        err = err.max((ln_mu / m as f64 - rhs).abs());
    }
    ensure(err <= 1e-10, || format!("identity error {err}"))?;
    ensure(failing.is_empty(), || format!("boxes fail at s = {s:.6} for M in {failing:?}; least passing s = {least:.6}"))?;
    Ok(format!("least passing s = {least:.6}"))
}

// 9: the proof's bound chain recomputed per set, and a direct sweep of K.
fn oracle_9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..100 {
        let m = if i % 2 == 0 { 2 } else { 3 };
        let n = 1 + i % 3;
        let p = AppendixParams::new(0.1, m).map_err(|e| e.to_string())?;
        let x = suite::random_k_point(&mut rng, n + p.l);
        let a = appendix::appendix_a_construct(&x, n, &p).map_err(|e| e.to_string())?;
        let r = a.ln_r.exp();
        // coarse bounds: ν ≥ ν({x_n}) or 1/2 when 0 is reachable; diam ≤ r + 2^{-L}
        let coarse_mass: f64 = x
            .iter()
            .map(|&e| match e {
                KElem::Zero => 0.5f64.ln(),
                KElem::Recip(q) if 1.0 / q as f64 <= r => 0.5f64.ln(),
                KElem::Recip(q) => (A_NU / (q as f64 * q as f64)).ln(),
            })
            .sum();
        let coarse_diam = (r + 2f64.powi(-(p.l as i32))).ln();
        ensure(a.ln_mass >= coarse_mass - 1e-9, || format!("set {i}: mass below point masses"))?;
        ensure(a.ln_diam <= coarse_diam + 1e-12, || format!("set {i}: diameter above r + 2^-L"))?;
        ensure(coarse_mass >= a.exponent * coarse_diam - 1e-9, || format!("set {i}: coarse chain fails"))?;
        ensure(a.passed, || format!("set {i} fails"))?;
    }
    let eps = 1e-4;
    let mut pts: Vec<f64> = (1..=20_000u64).map(|j| 1.0 / j as f64).collect();
    pts.push(0.0);
    pts.sort_by(f64::total_cmp);
    let mut count = 0u64;
    let mut start = f64::NEG_INFINITY;
    for &q in &pts {
        if q - start >= eps {
            count += 1;
            start = q;
        }
    }
    let dimm = (count as f64).ln() / (1.0 / eps).ln();
    let lib = appendix::k_sequence_dims(1_000_000, &[eps]).map_err(|e| e.to_string())?;
    ensure(lib.scales[0].cover_count == count, || "sweep count".into())?;
    ensure((0.40..=0.60).contains(&dimm), || format!("dimm = {dimm}"))?;
    Ok(format!("cover count {count}, dimm = {dimm:.4}"))
}

// 10: classical formulas written out here.
fn oracle_10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..200 {
        let r: TupleSet = suite::random_tuples(&mut rng);
        let (a, b) = (r.a() as f64, r.b() as f64);
        let w = b.ln() / a.ln();
        let mut t = vec![0u64; r.b()];
        for &(_, v) in r.pairs() {
            t[v as usize] += 1;
        }
        let nz: Vec<f64> = t.iter().filter(|&&x| x > 0).map(|&x| x as f64).collect();
        let dh = nz.iter().map(|x| x.powf(w)).sum::<f64>().ln() / b.ln();
        let s = nz.len() as f64;
        let dm = s.ln() / b.ln() + (r.len() as f64 / s).ln() / a.ln();
        let rep = carpet::mean_dims(&CarpetSpec::from_tuples(r.clone()).map_err(|e| e.to_string())?, 4, &Budgets::default(), Execution::Sequential)
            .map_err(|e| e.to_string())?;
        ensure((rep.mdim_h.value - dh).abs() < 1e-9 && (rep.mdim_m.value - dm).abs() < 1e-9, || "mean vs classical".into())?;
        let uniform = nz.iter().all(|&x| x == nz[0]);
        ensure(((dh - dm).abs() < 1e-9) == (a == b || uniform), || format!("coincidence rule fails for {:?}", r.pairs()))?;
        ensure(dh <= dm + 1e-9, || "ordering".into())?;
    }
    Ok("200 random relations".into())
}

fn main() -> ExitCode {
    let exec = Execution::default();
    let oracles: [fn() -> Check; 10] = [oracle_1, oracle_2, oracle_3, oracle_4, oracle_5, oracle_6, oracle_7, oracle_8, oracle_9, oracle_10];
    let mut all = true;
    println!();
    for (i, oracle) in oracles.iter().enumerate() {
        let v: Verdict = suite::run(i as u8 + 1, exec);
        let o = oracle();
        let timed = v.within_limit();
        let pass = v.passed && timed && o.is_ok();
        all &= pass;
        let limit = v.limit_s.map_or(String::new(), |l| format!(" (limit {l} s)"));
        println!(
            "criterion {:>2} {} {}: {:.2} s{}; {}; oracle: {}",
            v.id,
            if pass { "PASS" } else { "FAIL" },
            v.name,
            v.elapsed_s,
            limit,
            v.detail,
            match &o {
                Ok(s) => s.clone(),
                Err(s) => format!("FAILED {s}"),
            }
        );
    }
    println!();
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
