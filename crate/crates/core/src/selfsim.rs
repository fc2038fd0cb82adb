//! Self-similar systems `X = {Σ_k ω_k β^{-k} : ω_k ∈ Ω} ⊂ ℓ^∞` built from a
//! digit subshift `Ω ⊂ {0, .., a-1}^ℕ` and the maps `S_ω(x) = (x + ω)/β`.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::cover::min_pairwise;
use crate::oracle::metric::{MetricDescriptor, MetricKind, PointCloud};
use crate::par::Execution;
use crate::symbolic::{self, PrunedShift, Status, SubshiftSpec, Word};
use crate::Budgets;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawBeta")]
pub struct BetaSystemSpec {
    a: usize,
    beta: f64,
    omega: SubshiftSpec,
    #[serde(skip)]
    shift: Option<PrunedShift>,
}

#[derive(Deserialize)]
struct RawBeta {
    a: usize,
    beta: f64,
    omega: SubshiftSpec,
}

impl TryFrom<RawBeta> for BetaSystemSpec {
    type Error = Error;
    fn try_from(r: RawBeta) -> Result<Self> {
        BetaSystemSpec::new(r.a, r.beta, r.omega)
    }
}

impl BetaSystemSpec {
    pub fn new(a: usize, beta: f64, omega: SubshiftSpec) -> Result<Self> {
        if a < 2 {
            return Err(Error::spec(format!("digit alphabet needs a >= 2, got {a}")));
        }
        if !(beta.is_finite() && beta >= a as f64) {
            return Err(Error::spec(format!("need beta >= a = {a}, got {beta}")));
        }
        if omega.alphabet().size() != a {
            return Err(Error::spec(format!(
                "omega has alphabet {}, expected {a}",
                omega.alphabet().size()
            )));
        }
        let shift = symbolic::prune(&omega)?;
        Ok(BetaSystemSpec {
            a,
            beta,
            omega,
            shift: Some(shift),
        })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `c = 1/β`.
    pub fn c(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn omega(&self) -> &SubshiftSpec {
        &self.omega
    }

    pub fn shift(&self) -> &PrunedShift {
        self.shift.as_ref().expect("built in new")
    }

    /// The lexicographically least point of `Ω`, cut to `depth` coordinates.
    pub fn anchor(&self, depth: usize) -> Word {
        self.shift().least_extension(&[], depth).expect("nonempty pruned shift")
    }

    /// Coordinates `1..=depth` of `Σ_{k ≤ K} rows_k β^{-k} + Σ_{k > K} ξ β^{-k}`.
    pub fn evaluate(&self, p: &BetaPoint) -> Vec<f64> {
        let depth = p.depth();
        let xi = self.anchor(depth);
        let b = self.beta;
        let tail = b.powi(-(p.rows.len() as i32)) / (b - 1.0);
        let mut out: Vec<f64> = xi.iter().map(|&s| s as f64 * tail).collect();
        let mut scale = 1.0;
        for row in &p.rows {
            scale /= b;
            for (o, &s) in out.iter_mut().zip(row) {
                *o += s as f64 * scale;
            }
        }
        out
    }

    fn admissible(&self, p: &BetaPoint) -> bool {
        let d = p.depth();
        p.rows.iter().all(|r| r.len() == d && self.shift().accepts(r))
    }
}

/// A point of `X` given by its first digit rows `ω_1, .., ω_K ∈ Ω|_D`; the
/// rows past `K` are the anchor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaPoint {
    pub rows: Vec<Word>,
}

impl BetaPoint {
    pub fn depth(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// `S_ω(self)`.
    pub fn apply(&self, omega: &[u8]) -> BetaPoint {
        let mut rows = Vec::with_capacity(self.rows.len() + 1);
        rows.push(omega.to_vec());
        rows.extend(self.rows.iter().cloned());
        BetaPoint { rows }
    }
}

/// Random points of `X` with `levels` random rows, each a uniformly stepped
/// walk of length `depth` in the automaton.
pub fn sample_points(spec: &BetaSystemSpec, depth: usize, levels: usize, count: usize, seed: u64) -> Vec<BetaPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = spec.shift();
    (0..count)
        .map(|_| BetaPoint {
            rows: (0..levels.max(1))
                .map(|_| {
                    let mut st = 0usize;
                    (0..depth)
                        .map(|_| {
                            let e = shift.edges(st);
                            let (s, t) = e[rng.gen_range(0..e.len())];
                            st = t as usize;
                            s
                        })
                        .collect()
                })
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapResult {
    pub a: usize,
    pub beta: f64,
    pub n: usize,
    pub gap: f64,
    /// `β^{-n}`.
    pub threshold: f64,
    /// Computed over exact rationals `β = p/q`.
    pub exact: bool,
    pub passed: bool,
}

/// `(p, q)` with `β = p/q`, `q ≤ 16`, when such a pair exists.
fn small_rational(beta: f64) -> Option<(u128, u128)> {
    (1..=16u128).find_map(|q| {
        let p = beta * q as f64;
        (p.fract() == 0.0 && p < 1e6).then_some((p as u128, q))
    })
}

/// `min |Σ u_k β^{-k} - Σ v_k β^{-k}|` over distinct digit tuples of length `n`.
pub fn min_gap(a: usize, beta: f64, n: usize, budgets: &Budgets, exec: Execution) -> Result<GapResult> {
    if !(a >= 2 && beta >= a as f64) {
        return Err(Error::domain(format!("need 2 <= a <= beta, got a={a}, beta={beta}")));
    }
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    let total = (a as u128).checked_pow(n as u32).filter(|&t| t <= budgets.words as u128);
    let total = total.ok_or_else(|| Error::limit("digit tuples", (a as f64).powi(n as i32), budgets.words))? as usize;
    let threshold = beta.powi(-(n as i32));
    let chunk = 1 << 14;
    let digits = |mut i: usize, out: &mut [u128]| {
        for d in out.iter_mut().rev() {
            *d = (i % a) as u128;
            i /= a;
        }
    };

    if let Some((p, q)) = small_rational(beta).filter(|&(p, _)| p.checked_pow(n as u32).is_some_and(|x| x < 1 << 100)) {
        // value · p^n = Σ u_k q^k p^{n-k}
        let weights: Vec<u128> = (1..=n).map(|k| q.pow(k as u32) * p.pow((n - k) as u32)).collect();
        let mut vals: Vec<u128> = exec
            .map_range(total.div_ceil(chunk), |ci| {
                let mut u = vec![0u128; n];
                (ci * chunk..((ci + 1) * chunk).min(total))
                    .map(|i| {
                        digits(i, &mut u);
                        u.iter().zip(&weights).map(|(d, w)| d * w).sum::<u128>()
                    })
                    .collect::<Vec<_>>()
            })
            .into_iter()
            .flatten()
            .collect();
        exec.sort_unstable(&mut vals);
        let dmin = vals.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(u128::MAX);
        let scale = (p as f64).powi(n as i32);
        return Ok(GapResult {
            a,
            beta,
            n,
            gap: if dmin == u128::MAX { f64::INFINITY } else { dmin as f64 / scale },
            threshold,
            exact: true,
            passed: dmin >= q.pow(n as u32),
        });
    }

    let inv: Vec<f64> = (1..=n).map(|k| beta.powi(-(k as i32))).collect();
    let mut bits: Vec<u64> = exec
        .map_range(total.div_ceil(chunk), |ci| {
            let mut u = vec![0u128; n];
            (ci * chunk..((ci + 1) * chunk).min(total))
                .map(|i| {
                    digits(i, &mut u);
                    // nonnegative floats order like their bit patterns
                    u.iter().zip(&inv).map(|(&d, w)| d as f64 * w).sum::<f64>().to_bits()
                })
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect();
    exec.sort_unstable(&mut bits);
    let gap = bits
        .windows(2)
        .map(|w| f64::from_bits(w[1]) - f64::from_bits(w[0]))
        .fold(f64::INFINITY, f64::min);
    Ok(GapResult {
        a,
        beta,
        n,
        gap,
        threshold,
        exact: false,
        passed: gap >= threshold - 1e-12,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CoveringFamily {
    pub n_window: usize,
    pub levels: usize,
    /// `|π_N(Ω)|^n`.
    pub count: BigUint,
    pub depth: usize,
    pub min_distance: f64,
    /// `β^{-n} - tol`.
    pub required: f64,
    pub passed: bool,
    #[serde(skip)]
    pub points: PointCloud,
}

/// Metric used for the separated family: `Σ_n 2^{-(n-1)} |x_n - y_n|` with
/// `N` shifts. The leading weight 1 is what makes the gap `β^{-n}` survive.
pub fn family_metric(n_window: usize) -> MetricDescriptor {
    MetricDescriptor::new(MetricKind::SumWeightedAbs)
        .with_dynamic(n_window)
        .with_lead_exponent(0)
}

/// Points `Σ_{k ≤ n} ω_k β^{-k} + Σ_{k > n} ξ β^{-k}` with `π_N(ω_k)` ranging
/// over `Ω|_N` and each `ω_k` its least extension, and their separation.
pub fn covering_lower_bound(
    spec: &BetaSystemSpec,
    n_window: usize,
    levels: usize,
    tol: f64,
    budgets: &Budgets,
    exec: Execution,
) -> Result<CoveringFamily> {
    if n_window == 0 || levels == 0 {
        return Err(Error::domain("N and n must be positive"));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::domain(format!("tol = {tol} must lie in (0, 1)")));
    }
    let shift = spec.shift();
    let words = symbolic::enumerate_words(shift, n_window, budgets)?;
    let count = BigUint::from(words.len()).pow(levels as u32);
    let total = (words.len() as u128)
        .checked_pow(levels as u32)
        .filter(|&t| t <= budgets.points as u128)
        .ok_or_else(|| Error::limit("beta family", (words.len() as f64).powi(levels as i32), budgets.points))?
        as usize;

    let depth = n_window + (10.0 / tol).log2().ceil() as usize + 1;
    let rows: Vec<Word> = words
        .iter()
        .map(|w| shift.least_extension(w, depth).expect("pruned words extend"))
        .collect();
    let metric = family_metric(n_window);
    let mut cloud = PointCloud::new(depth, metric, 0.5f64.powi((depth - n_window) as i32));
    let mut idx = vec![0usize; levels];
    for i in 0..total {
        let mut r = i;
        for slot in idx.iter_mut().rev() {
            *slot = r % words.len();
            r /= words.len();
        }
        let p = BetaPoint {
            rows: idx.iter().map(|&j| rows[j].clone()).collect(),
        };
        cloud.push(&spec.evaluate(&p))?;
    }
    let required = spec.beta.powi(-(levels as i32)) - tol;
    let min_distance = min_pairwise(&cloud, exec).map_or(f64::INFINITY, |(d, _, _)| d);
    Ok(CoveringFamily {
        n_window,
        levels,
        count,
        depth,
        min_distance,
        required,
        passed: min_distance >= required,
        points: cloud,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfSimilarReport {
    pub h_omega: f64,
    pub status: Status,
    pub mdim: f64,
    /// `mdim` from the ends of the spectral bracket.
    pub mdim_bracket: (f64, f64),
    /// `h(Ω)/ln(1/c)`.
    pub similarity_bound: f64,
    /// Mean Hausdorff and metric mean dimension coincide for these systems.
    pub hausdorff_equals_metric: bool,
}

pub fn self_similar_dims(spec: &BetaSystemSpec, n_max: usize) -> Result<SelfSimilarReport> {
    let e = symbolic::entropy(spec.shift(), n_max)?;
    let lb = spec.beta.ln();
    let (lo, hi) = e.spectral_bracket.unwrap_or((e.best_estimate, e.best_estimate));
    Ok(SelfSimilarReport {
        h_omega: e.best_estimate,
        status: e.status,
        mdim: e.best_estimate / lb,
        mdim_bracket: (lo.max(0.0) / lb, hi.max(0.0) / lb),
        similarity_bound: e.best_estimate / (1.0 / spec.c()).ln(),
        hausdorff_equals_metric: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallReport {
    pub eps: f64,
    /// Strict bound on `diam(X, d)`.
    pub a_bound: f64,
    pub k: usize,
    /// `ω_1, .., ω_k` with `φ = S_{ω_1} ∘ .. ∘ S_{ω_k}`.
    pub word: Vec<Word>,
    pub max_distance_to_p: f64,
    pub inside_ball: bool,
    /// `c ε / A`.
    pub required_ratio: f64,
    pub min_ratio: f64,
    pub expansion_ok: bool,
    /// `max |d_N(φx, φy) - c^k d_N(x, y)|`.
    pub contraction_error: f64,
    pub passed: bool,
}

/// Builds `φ` with `c^k A ≤ ε < c^{k-1} A` and `p ∈ φ(X)`, then checks
/// `φ(sample) ⊂ B_ε(p, d_N)` and `d_N(φx, φy) ≥ (cε/A) d_N(x, y)`.
pub fn ball_similarity_check(
    spec: &BetaSystemSpec,
    n_window: usize,
    eps: f64,
    p: &BetaPoint,
    sample: &[BetaPoint],
    tol: f64,
) -> Result<BallReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("eps = {eps} must lie in (0, 1)")));
    }
    if !spec.admissible(p) || p.rows.is_empty() {
        return Err(Error::ConstructionFailure("p has a digit row outside Ω|_D".into()));
    }
    let depth = p.depth();
    if let Some(i) = sample.iter().position(|x| x.depth() != depth || !spec.admissible(x)) {
        return Err(Error::domain(format!("sample point {i} is not a depth-{depth} point of X")));
    }
    let metric = MetricDescriptor::new(MetricKind::SumWeightedAbs).with_dynamic(n_window);
    let c = spec.c();
    let a_bound = metric.weight_sum() * (spec.a as f64 - 1.0) / (spec.beta - 1.0) * (1.0 + 1e-9);
    let mut k = 0usize;
    while c.powi(k as i32) * a_bound > eps {
        k += 1;
    }
    let xi = spec.anchor(depth);
    let word: Vec<Word> = (0..k).map(|i| p.rows.get(i).cloned().unwrap_or_else(|| xi.clone())).collect();
    let phi = |x: &BetaPoint| {
        let mut y = x.clone();
        for w in word.iter().rev() {
            y = y.apply(w);
        }
        y
    };
    // tail coordinates beyond the depth move distances by at most this much
    let trunc = metric.weight_sum() * 0.5f64.powi((depth.saturating_sub(n_window)) as i32);

    let pv = spec.evaluate(p);
    let images: Vec<Vec<f64>> = sample.iter().map(|x| spec.evaluate(&phi(x))).collect();
    let origs: Vec<Vec<f64>> = sample.iter().map(|x| spec.evaluate(x)).collect();
    let max_distance_to_p = images.iter().map(|y| metric.distance(y, &pv)).fold(0.0, f64::max);

    let required_ratio = c * eps / a_bound;
    let ck = c.powi(k as i32);
    let mut min_ratio = f64::INFINITY;
    let mut expansion_ok = true;
    let mut contraction_error = 0.0f64;
    for i in 0..sample.len() {
        for j in i + 1..sample.len() {
            let d0 = metric.distance(&origs[i], &origs[j]);
            let d1 = metric.distance(&images[i], &images[j]);
            contraction_error = contraction_error.max((d1 - ck * d0).abs());
            if d1 < required_ratio * d0 - tol {
                expansion_ok = false;
            }
            if d0 > 0.0 {
                min_ratio = min_ratio.min(d1 / d0);
            }
        }
    }
    let inside_ball = max_distance_to_p <= eps + trunc + tol;
    Ok(BallReport {
        eps,
        a_bound,
        k,
        word,
        max_distance_to_p,
        inside_ball,
        required_ratio,
        min_ratio,
        expansion_ok,
        contraction_error,
        passed: inside_ball && expansion_ok && contraction_error <= 1e-12,
    })
}
