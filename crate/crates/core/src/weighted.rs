//! Weighted topological entropy of the coordinate projection
//! `π : Ω ⊂ (A×B)^ℕ → B^ℕ`, via exact fiber counts.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::symbolic::{self, Alphabet, PrunedShift, Status, SubshiftSpec, Symbol, TupleSet, Word};
use crate::Budgets;

/// A subshift over `A × B` together with the projection to `B`.
#[derive(Debug, Clone)]
pub struct PairShiftSystem {
    a: Alphabet,
    b: Alphabet,
    omega: SubshiftSpec,
    shift: PrunedShift,
}

impl PairShiftSystem {
    pub fn new(a: usize, b: usize, omega: SubshiftSpec) -> Result<Self> {
        let (a, b) = (Alphabet::new(a)?, Alphabet::new(b)?);
        if omega.alphabet().size() != a.size() * b.size() {
            return Err(Error::spec(format!(
                "omega alphabet has {} symbols, expected {}x{}",
                omega.alphabet().size(),
                a.size(),
                b.size()
            )));
        }
        if let Some(r) = omega.tuple_set() {
            if r.a() != a.size() || r.b() != b.size() {
                return Err(Error::spec("tuple set dimensions disagree with A x B"));
            }
        }
        let shift = symbolic::prune(&omega)?;
        Ok(PairShiftSystem { a, b, omega, shift })
    }

    pub fn from_tuples(r: TupleSet) -> Result<Self> {
        let (a, b) = (r.a(), r.b());
        PairShiftSystem::new(a, b, SubshiftSpec::tuples(r)?)
    }

    pub fn a(&self) -> usize {
        self.a.size()
    }

    pub fn b(&self) -> usize {
        self.b.size()
    }

    pub fn omega(&self) -> &SubshiftSpec {
        &self.omega
    }

    pub fn shift(&self) -> &PrunedShift {
        &self.shift
    }

    pub fn tuples(&self) -> Option<&TupleSet> {
        self.omega.tuple_set()
    }

    pub fn encode(&self, u: Symbol, v: Symbol) -> Symbol {
        (u as usize * self.b() + v as usize) as Symbol
    }

    pub fn decode(&self, s: Symbol) -> (Symbol, Symbol) {
        let b = self.b();
        ((s as usize / b) as Symbol, (s as usize % b) as Symbol)
    }

    /// One NFA step of the projection: states reachable by reading `v`,
    /// carrying path multiplicities.
    fn project_step(&self, from: &[u128], v: Symbol, into: &mut [u128]) -> Result<()> {
        into.iter_mut().for_each(|x| *x = 0);
        let b = self.b();
        for (st, &c) in from.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &(s, t) in self.shift.edges(st) {
                if s as usize % b == v as usize {
                    let slot = &mut into[t as usize];
                    *slot = slot.checked_add(c).ok_or_else(fiber_overflow)?;
                }
            }
        }
        Ok(())
    }

    /// `|π_N^{-1}(v)|` for a single word `v`; zero when `v ∉ Ω'|_N`.
    pub fn fiber_of(&self, v: &[Symbol]) -> Result<u128> {
        if let Some(r) = self.tuples() {
            let t = r.column_counts();
            return v.iter().try_fold(1u128, |acc, &s| {
                acc.checked_mul(t[s as usize] as u128).ok_or_else(fiber_overflow)
            });
        }
        let n = self.shift.num_states();
        let mut cur = vec![0u128; n];
        let mut next = vec![0u128; n];
        cur[0] = 1;
        for &s in v {
            self.project_step(&cur, s, &mut next)?;
            std::mem::swap(&mut cur, &mut next);
        }
        cur.iter().try_fold(0u128, |acc, &c| acc.checked_add(c).ok_or_else(fiber_overflow))
    }
}

fn fiber_overflow() -> Error {
    Error::limit("fiber count beyond 128 bits", f64::INFINITY, u128::MAX as u64)
}

/// Fiber sizes at one length, stored as a histogram `size -> #v-words`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberLevel {
    pub n: usize,
    pub histogram: BTreeMap<u128, u128>,
}

impl FiberLevel {
    /// `|Ω'|_N|`.
    pub fn image_count(&self) -> BigUint {
        self.histogram.values().map(|&m| BigUint::from(m)).sum()
    }

    /// `Σ_v |π_N^{-1}(v)| = |Ω|_N|`.
    pub fn total(&self) -> BigUint {
        self.histogram
            .iter()
            .map(|(&s, &m)| BigUint::from(s) * BigUint::from(m))
            .sum()
    }

    /// `ln Σ_v t_N(v)^w`, summed from the largest term down.
    pub fn log_z(&self, w: f64) -> f64 {
        let mut terms: Vec<f64> = self
            .histogram
            .iter()
            .map(|(&s, &m)| (m as f64).ln() + w * (s as f64).ln())
            .collect();
        log_sum_exp(&mut terms)
    }
}

pub(crate) fn log_sum_exp(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(|x, y| y.total_cmp(x));
    let Some(&top) = terms.first() else {
        return f64::NEG_INFINITY;
    };
    let tail: f64 = terms.iter().map(|&t| (t - top).exp()).sum();
    top + tail.ln()
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberCountTable {
    pub levels: Vec<FiberLevel>,
}

impl FiberCountTable {
    pub fn level(&self, n: usize) -> &FiberLevel {
        &self.levels[n - 1]
    }

    pub fn max_length(&self) -> usize {
        self.levels.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FiberMethod {
    /// Multiplicative closed form for tuple shifts, enumeration otherwise.
    #[default]
    Auto,
    /// Depth-first enumeration of image words for every kind.
    Enumerate,
}

pub fn fiber_counts(sys: &PairShiftSystem, n_max: usize, budgets: &Budgets, exec: Execution) -> Result<FiberCountTable> {
    fiber_counts_with(sys, n_max, budgets, exec, FiberMethod::Auto)
}

pub fn fiber_counts_with(
    sys: &PairShiftSystem,
    n_max: usize,
    budgets: &Budgets,
    exec: Execution,
    method: FiberMethod,
) -> Result<FiberCountTable> {
    if n_max == 0 {
        return Err(Error::domain("N_max must be at least 1"));
    }
    match (method, sys.tuples()) {
        (FiberMethod::Auto, Some(r)) => tuple_fibers(r, n_max),
        _ => enumerate_fibers(sys, n_max, budgets, exec),
    }
}

fn tuple_fibers(r: &TupleSet, n_max: usize) -> Result<FiberCountTable> {
    let mut t_hist: BTreeMap<u128, u128> = BTreeMap::new();
    for t in r.column_counts().into_iter().filter(|&t| t > 0) {
        *t_hist.entry(t as u128).or_default() += 1;
    }
    let mut cur: BTreeMap<u128, u128> = BTreeMap::from([(1, 1)]);
    let mut levels = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut next = BTreeMap::new();
        for (&s, &m) in &cur {
            for (&t, &k) in &t_hist {
                let size = s.checked_mul(t).ok_or_else(fiber_overflow)?;
                let mult = m.checked_mul(k).ok_or_else(fiber_overflow)?;
                let slot: &mut u128 = next.entry(size).or_default();
                *slot = slot.checked_add(mult).ok_or_else(fiber_overflow)?;
            }
        }
        cur = next;
        levels.push(FiberLevel {
            n,
            histogram: cur.clone(),
        });
    }
    Ok(FiberCountTable { levels })
}

fn enumerate_fibers(sys: &PairShiftSystem, n_max: usize, budgets: &Budgets, exec: Execution) -> Result<FiberCountTable> {
    // Exact node count from the image automaton when it is available.
    if let ImageSubshift::Automaton(img) = image_subshift(sys, budgets)? {
        let counts = symbolic::count_words(&img, n_max);
        let nodes: BigUint = counts.as_slice()[1..].iter().sum();
        if nodes > BigUint::from(budgets.words) {
            return Err(Error::limit("image word enumeration", symbolic::big_to_f64(&nodes), budgets.words));
        }
    }
    let states = sys.shift.num_states();
    let b = sys.b() as Symbol;
    let mut root = vec![0u128; states];
    root[0] = 1;

    // Split the v-word tree at a shallow depth and walk subtrees independently.
    let split = n_max.min(2);
    let mut frontier: Vec<(Word, Vec<u128>)> = vec![(Vec::new(), root)];
    let mut shallow: Vec<BTreeMap<u128, u128>> = vec![BTreeMap::new(); n_max];
    for _ in 0..split {
        let mut next = Vec::new();
        for (word, vec) in &frontier {
            for v in 0..b {
                let mut into = vec![0u128; states];
                sys.project_step(vec, v, &mut into)?;
                let size: u128 = into.iter().sum();
                if size == 0 {
                    continue;
                }
                let mut w = word.clone();
                w.push(v);
                *shallow[w.len() - 1].entry(size).or_default() += 1;
                next.push((w, into));
            }
        }
        frontier = next;
    }

    let budget = budgets.words;
    let parts = exec.map_slice(&frontier, |(word, vec)| {
        let mut hist = vec![BTreeMap::new(); n_max];
        let mut visited = 0u64;
        walk(sys, vec, word.len(), n_max, &mut hist, &mut visited, budget).map(|_| hist)
    });
    for part in parts {
        for (lvl, h) in part?.into_iter().enumerate() {
            for (s, m) in h {
                *shallow[lvl].entry(s).or_default() += m;
            }
        }
    }
    let levels = shallow
        .into_iter()
        .enumerate()
        .map(|(i, histogram)| FiberLevel { n: i + 1, histogram })
        .collect();
    Ok(FiberCountTable { levels })
}

fn walk(
    sys: &PairShiftSystem,
    vec: &[u128],
    depth: usize,
    n_max: usize,
    hist: &mut [BTreeMap<u128, u128>],
    visited: &mut u64,
    budget: u64,
) -> Result<()> {
    if depth == n_max {
        return Ok(());
    }
    let mut into = vec![0u128; vec.len()];
    for v in 0..sys.b() as Symbol {
        sys.project_step(vec, v, &mut into)?;
        let size: u128 = into.iter().sum();
        if size == 0 {
            continue;
        }
        *visited += 1;
        if *visited > budget {
            return Err(Error::limit("image word enumeration", *visited as f64, budget));
        }
        *hist[depth].entry(size).or_default() += 1;
        walk(sys, &into, depth + 1, n_max, hist, visited, budget)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ZValue {
    #[serde(rename = "N")]
    pub n: usize,
    pub value: f64,
    pub log_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightedEntropyReport {
    pub w: f64,
    #[serde(rename = "Z")]
    pub z_values: Vec<ZValue>,
    /// `v_N = min_{j ≤ N} ln Z_j / j`, nats.
    pub upper_bounds: Vec<f64>,
    pub closed_form: Option<f64>,
    pub best_estimate: f64,
    pub status: Status,
    /// Empirical submultiplicativity failures, if any.
    pub diagnostics: Vec<String>,
}

/// `ln Σ_{v : t(v) > 0} t(v)^w` for a tuple set.
pub fn tuple_closed_form(r: &TupleSet, w: f64) -> f64 {
    r.column_counts()
        .into_iter()
        .filter(|&t| t > 0)
        .map(|t| (t as f64).powf(w))
        .sum::<f64>()
        .ln()
}

pub fn weighted_entropy(
    sys: &PairShiftSystem,
    w: f64,
    n_max: usize,
    budgets: &Budgets,
    exec: Execution,
) -> Result<WeightedEntropyReport> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::domain(format!("weight w = {w} outside [0, 1]")));
    }
    let table = fiber_counts(sys, n_max, budgets, exec)?;
    Ok(report_from_table(sys, w, &table, budgets))
}

pub fn report_from_table(sys: &PairShiftSystem, w: f64, table: &FiberCountTable, budgets: &Budgets) -> WeightedEntropyReport {
    let logs: Vec<f64> = table.levels.iter().map(|l| l.log_z(w)).collect();
    let z_values = logs
        .iter()
        .enumerate()
        .map(|(i, &l)| ZValue {
            n: i + 1,
            value: l.exp(),
            log_value: l,
        })
        .collect();
    let upper_bounds = symbolic::fekete_bounds(logs.iter().copied());
    let mut diagnostics = Vec::new();
    for n in 1..=logs.len() {
        for m in 1..=logs.len() - n {
            let (lhs, rhs) = (logs[n + m - 1], logs[n - 1] + logs[m - 1]);
            if lhs > rhs + 1e-9 * rhs.abs().max(1.0) {
                diagnostics.push(format!("ln Z_{} = {lhs} exceeds ln Z_{n} + ln Z_{m} = {rhs}", n + m));
            }
        }
    }
    let closed_form = sys.tuples().map(|r| tuple_closed_form(r, w));
    let fallback = *upper_bounds.last().expect("n_max >= 1");
    let (best_estimate, status) = match closed_form {
        Some(c) => (c, Status::Exact),
        None => endpoint_value(sys, w, budgets).map_or((fallback, Status::UpperBound), |v| (v, Status::Exact)),
    };
    WeightedEntropyReport {
        w,
        z_values,
        upper_bounds,
        closed_form,
        best_estimate,
        status,
        diagnostics,
    }
}

/// At `w = 1` the weighted entropy is `h(Ω)`; at `w = 0` it is `h(Ω')`.
fn endpoint_value(sys: &PairShiftSystem, w: f64, budgets: &Budgets) -> Option<f64> {
    if w == 1.0 {
        return symbolic::entropy(&sys.shift, 1).ok().map(|r| r.best_estimate);
    }
    if w == 0.0 {
        if let Ok(ImageSubshift::Automaton(img)) = image_subshift(sys, budgets) {
            return symbolic::entropy(&img, 1).ok().map(|r| r.best_estimate);
        }
    }
    None
}

/// The image `Ω' = π(Ω)`.
#[derive(Debug, Clone)]
pub enum ImageSubshift {
    Automaton(PrunedShift),
    /// Determinization exceeded the subset budget; words must be enumerated.
    EnumerationOnly { subsets_seen: u64 },
}

impl ImageSubshift {
    pub fn automaton(&self) -> Option<&PrunedShift> {
        match self {
            ImageSubshift::Automaton(a) => Some(a),
            ImageSubshift::EnumerationOnly { .. } => None,
        }
    }
}

/// Powerset determinization of the projection of Ω's word automaton.
pub fn image_subshift(sys: &PairShiftSystem, budgets: &Budgets) -> Result<ImageSubshift> {
    let b = sys.b();
    let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut subsets: Vec<Vec<u32>> = vec![vec![0]];
    ids.insert(vec![0], 0);
    let mut trans: Vec<Vec<(Symbol, u32)>> = vec![Vec::new()];
    let mut i = 0;
    while i < subsets.len() {
        let mut targets: Vec<Vec<u32>> = vec![Vec::new(); b];
        for &st in &subsets[i] {
            for &(s, t) in sys.shift.edges(st as usize) {
                targets[s as usize % b].push(t);
            }
        }
        for (v, mut set) in targets.into_iter().enumerate() {
            if set.is_empty() {
                continue;
            }
            set.sort_unstable();
            set.dedup();
            let id = match ids.get(&set) {
                Some(&id) => id,
                None => {
                    if subsets.len() as u64 >= budgets.subsets {
                        return Ok(ImageSubshift::EnumerationOnly {
                            subsets_seen: subsets.len() as u64,
                        });
                    }
                    let id = subsets.len() as u32;
                    ids.insert(set.clone(), id);
                    subsets.push(set);
                    trans.push(Vec::new());
                    id
                }
            };
            trans[i].push((v as Symbol, id));
        }
        i += 1;
    }
    Ok(ImageSubshift::Automaton(PrunedShift::from_transitions(sys.b, trans)?))
}

/// Image words `π_N(Ω|_N)` by projecting an explicit enumeration.
pub fn projected_words(sys: &PairShiftSystem, n: usize, budgets: &Budgets) -> Result<Vec<Word>> {
    let mut out: Vec<Word> = symbolic::enumerate_words(&sys.shift, n, budgets)?
        .into_iter()
        .map(|w| w.into_iter().map(|s| sys.decode(s).1).collect())
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Least `n* ≥ m` in the window `[m, w^{-k}(m+k)+1]`, `k = ⌈C/δ⌉`, with
/// `a_{n*} - a_{⌊w n*⌋} ≥ -δ`.
pub fn scale_index(seq: &[f64], w: f64, delta: f64, m: usize, c: f64) -> Result<usize> {
    if !(w > 0.0 && w <= 1.0) || delta <= 0.0 || c < 0.0 {
        return Err(Error::domain("need 0 < w <= 1, delta > 0, C >= 0"));
    }
    if let Some(x) = seq.iter().find(|&&x| !(0.0..=c).contains(&x)) {
        return Err(Error::domain(format!("sequence value {x} outside [0, {c}]")));
    }
    let k = (c / delta).ceil();
    let end = (w.powf(-k) * (m as f64 + k) + 1.0).floor();
    if !end.is_finite() || end > 1e15 {
        return Err(Error::InsufficientLength {
            needed: usize::MAX,
            got: seq.len(),
        });
    }
    let end = end as usize;
    if seq.len() <= end {
        return Err(Error::InsufficientLength {
            needed: end + 1,
            got: seq.len(),
        });
    }
    (m..=end)
        .find(|&n| seq[n] - seq[(w * n as f64).floor() as usize] >= -delta)
        .ok_or_else(|| Error::HypothesisViolated(format!("no index in [{m}, {end}] meets the bound")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> PairShiftSystem {
        PairShiftSystem::from_tuples(TupleSet::parse(3, 2, "00,11,20").unwrap()).unwrap()
    }

    fn golden_pair() -> PairShiftSystem {
        // A = B = {0,1}; forbid (1,1)(1,1)
        let sym = |u: u8, v: u8| u * 2 + v;
        let spec = SubshiftSpec::forbidden(4, vec![vec![sym(1, 1), sym(1, 1)]]).unwrap();
        PairShiftSystem::new(2, 2, spec).unwrap()
    }

    #[test]
    fn example_fibers() {
        let sys = example();
        assert_eq!(sys.fiber_of(&[0, 0]).unwrap(), 4);
        assert_eq!(sys.fiber_of(&[1]).unwrap(), 1);
        let t = fiber_counts(&sys, 3, &Budgets::default(), Execution::Sequential).unwrap();
        assert_eq!(t.level(3).total(), BigUint::from(27u32));
        assert_eq!(t.level(3).image_count(), BigUint::from(8u32));
    }

    #[test]
    fn full_product_fibers() {
        let sys = PairShiftSystem::new(3, 2, SubshiftSpec::full(6).unwrap()).unwrap();
        assert_eq!(sys.fiber_of(&[0, 1, 1]).unwrap(), 27);
        let t = fiber_counts(&sys, 3, &Budgets::default(), Execution::Sequential).unwrap();
        assert_eq!(t.level(3).histogram, BTreeMap::from([(27, 8)]));
    }

    #[test]
    fn enumeration_agrees_with_product_rule() {
        let sys = example();
        let b = Budgets::default();
        let fast = fiber_counts(&sys, 6, &b, Execution::Sequential).unwrap();
        let slow = fiber_counts_with(&sys, 6, &b, Execution::default(), FiberMethod::Enumerate).unwrap();
        assert_eq!(fast.levels, slow.levels);
    }

    #[test]
    fn example_weighted_value() {
        let sys = example();
        let w = 2f64.ln() / 3f64.ln();
        let rep = weighted_entropy(&sys, w, 6, &Budgets::default(), Execution::Sequential).unwrap();
        let expected = (1.0 + 2f64.powf(w)).ln();
        assert!((rep.best_estimate - expected).abs() < 1e-15);
        assert!((rep.best_estimate / 2f64.ln() - 1.3496838201).abs() < 1e-9);
        for z in &rep.z_values {
            assert!((z.log_value / z.n as f64 - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn endpoints_for_tuples() {
        let sys = example();
        let b = Budgets::default();
        let one = weighted_entropy(&sys, 1.0, 4, &b, Execution::Sequential).unwrap();
        let zero = weighted_entropy(&sys, 0.0, 4, &b, Execution::Sequential).unwrap();
        assert!((one.best_estimate - 3f64.ln()).abs() < 1e-15);
        assert!((zero.best_estimate - 2f64.ln()).abs() < 1e-15);
        assert!(weighted_entropy(&sys, 1.5, 4, &b, Execution::Sequential).is_err());
    }

    #[test]
    fn endpoints_for_sofic_image() {
        let sys = golden_pair();
        let b = Budgets::default();
        let h_omega = symbolic::entropy(sys.shift(), 1).unwrap().best_estimate;
        let one = weighted_entropy(&sys, 1.0, 8, &b, Execution::Sequential).unwrap();
        assert!((one.best_estimate - h_omega).abs() < 1e-9);
        assert_eq!(one.status, Status::Exact);
        // with w = 1 the Z_N are plain word counts
        let counts = symbolic::count_words(sys.shift(), 8);
        for z in &one.z_values {
            assert!((z.log_value - symbolic::big_ln(counts.get(z.n))).abs() < 1e-12);
        }
        let mid = weighted_entropy(&sys, 0.5, 8, &b, Execution::Sequential).unwrap();
        assert_eq!(mid.status, Status::UpperBound);
        assert!(mid.diagnostics.is_empty());
    }

    #[test]
    fn image_of_example_is_full_shift() {
        let img = image_subshift(&example(), &Budgets::default()).unwrap();
        let a = img.automaton().unwrap();
        let c = symbolic::count_words(a, 6);
        assert_eq!(c.get(6), &BigUint::from(64u32));
    }

    #[test]
    fn sofic_image_matches_projection() {
        let sys = golden_pair();
        let b = Budgets::default();
        let img = image_subshift(&sys, &b).unwrap();
        let a = img.automaton().unwrap();
        for n in 1..=8 {
            assert_eq!(symbolic::enumerate_words(a, n, &b).unwrap(), projected_words(&sys, n, &b).unwrap());
        }
    }

    #[test]
    fn subset_cap_falls_back() {
        let b = Budgets {
            subsets: 1,
            ..Budgets::default()
        };
        let img = image_subshift(&golden_pair(), &b).unwrap();
        assert!(img.automaton().is_none());
    }

    #[test]
    fn scale_index_cases() {
        let flat = vec![0.5; 20_000];
        assert_eq!(scale_index(&flat, 0.5, 0.1, 7, 1.0).unwrap(), 7);

        let inc: Vec<f64> = (0..20_000).map(|n| 1.0 - 1.0 / (n as f64 + 1.0)).collect();
        let got = scale_index(&inc, 0.5, 0.1, 4, 1.0).unwrap();
        let scan = (4..).find(|&n| inc[n] - inc[n / 2] >= -0.1).unwrap();
        assert_eq!(got, scan);

        let dec: Vec<f64> = (0..20_000).map(|n| (1.0 - 0.05 * n as f64).max(0.0)).collect();
        assert_eq!(scale_index(&dec, 0.5, 0.1, 2, 1.0).unwrap(), 2);

        assert!(matches!(
            scale_index(&flat[..5], 0.5, 0.1, 4, 1.0),
            Err(Error::InsufficientLength { .. })
        ));
    }
}
