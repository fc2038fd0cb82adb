//! One-sided subshifts over finite alphabets: specs, pruned word automata,
//! exact word counts and entropy.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Budgets;

pub type Symbol = u8;
pub type Word = Vec<Symbol>;

/// Alphabet `{0, .., size-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > 256 {
            return Err(Error::spec(format!("alphabet size {size} outside 1..=256")));
        }
        Ok(Alphabet(size))
    }

    pub fn size(self) -> usize {
        self.0
    }

    pub fn contains(self, s: Symbol) -> bool {
        (s as usize) < self.0
    }
}

impl TryFrom<usize> for Alphabet {
    type Error = Error;
    fn try_from(v: usize) -> Result<Self> {
        Alphabet::new(v)
    }
}

impl From<Alphabet> for usize {
    fn from(a: Alphabet) -> usize {
        a.0
    }
}

/// A relation `R ⊂ A × B`; the pair `(u, v)` is the symbol `u * b + v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSet {
    a: usize,
    b: usize,
    pairs: Vec<(Symbol, Symbol)>,
}

impl TupleSet {
    pub fn new(a: usize, b: usize, pairs: impl IntoIterator<Item = (Symbol, Symbol)>) -> Result<Self> {
        if a == 0 || b == 0 || a * b > 256 {
            return Err(Error::spec(format!("product alphabet {a}x{b} unsupported")));
        }
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        for &(u, v) in &pairs {
            if u as usize >= a || v as usize >= b {
                return Err(Error::spec(format!("tuple ({u},{v}) outside {a}x{b}")));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        if pairs.is_empty() {
            return Err(Error::spec("tuple set R is empty"));
        }
        Ok(TupleSet { a, b, pairs })
    }

    /// Parses `"00,11,20"` (digit pairs `uv`, base 36).
    pub fn parse(a: usize, b: usize, text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let digits: Vec<Symbol> = item
                .chars()
                .map(|c| parse_digit(c).ok_or_else(|| Error::spec(format!("bad digit {c:?}"))))
                .collect::<Result<_>>()?;
            if digits.len() != 2 {
                return Err(Error::spec(format!("tuple {item:?} must have two digits")));
            }
            pairs.push((digits[0], digits[1]));
        }
        TupleSet::new(a, b, pairs)
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn pairs(&self) -> &[(Symbol, Symbol)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn encode(&self, u: Symbol, v: Symbol) -> Symbol {
        (u as usize * self.b + v as usize) as Symbol
    }

    /// `t(v) = #{u : (u, v) ∈ R}` for every `v ∈ B`.
    pub fn column_counts(&self) -> Vec<u64> {
        let mut t = vec![0u64; self.b];
        for &(_, v) in &self.pairs {
            t[v as usize] += 1;
        }
        t
    }
}

fn parse_digit(c: char) -> Option<Symbol> {
    c.to_digit(36).map(|d| d as Symbol)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShiftKind {
    Full,
    Sft(Vec<Vec<bool>>),
    Forbidden(Vec<Word>),
    Tuples(TupleSet),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct SubshiftSpec {
    alphabet: Alphabet,
    kind: ShiftKind,
}

impl SubshiftSpec {
    pub fn full(k: usize) -> Result<Self> {
        Ok(SubshiftSpec {
            alphabet: Alphabet::new(k)?,
            kind: ShiftKind::Full,
        })
    }

    pub fn sft(matrix: Vec<Vec<bool>>) -> Result<Self> {
        let k = matrix.len();
        if matrix.iter().any(|row| row.len() != k) {
            return Err(Error::spec("SFT matrix must be square"));
        }
        Ok(SubshiftSpec {
            alphabet: Alphabet::new(k)?,
            kind: ShiftKind::Sft(matrix),
        })
    }

    pub fn forbidden(k: usize, words: Vec<Word>) -> Result<Self> {
        let alphabet = Alphabet::new(k)?;
        for w in &words {
            if w.is_empty() {
                return Err(Error::spec("forbidden words must be nonempty"));
            }
            if let Some(&s) = w.iter().find(|&&s| !alphabet.contains(s)) {
                return Err(Error::spec(format!("symbol {s} outside alphabet of size {k}")));
            }
        }
        Ok(SubshiftSpec {
            alphabet,
            kind: ShiftKind::Forbidden(words),
        })
    }

    pub fn tuples(r: TupleSet) -> Result<Self> {
        Ok(SubshiftSpec {
            alphabet: Alphabet::new(r.a * r.b)?,
            kind: ShiftKind::Tuples(r),
        })
    }

    /// Binary shift with the word `11` forbidden.
    pub fn golden_mean() -> Self {
        SubshiftSpec::sft(vec![vec![true, true], vec![true, false]]).expect("valid matrix")
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn kind(&self) -> &ShiftKind {
        &self.kind
    }

    pub fn tuple_set(&self) -> Option<&TupleSet> {
        match &self.kind {
            ShiftKind::Tuples(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawTuples {
    a: usize,
    b: usize,
    #[serde(rename = "R")]
    r: Vec<[u8; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawWord {
    Text(String),
    Symbols(Vec<u8>),
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alphabet: Option<usize>,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    forbidden: Option<Vec<RawWord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tuples: Option<RawTuples>,
}

impl TryFrom<RawSpec> for SubshiftSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let need_k = || raw.alphabet.ok_or_else(|| Error::spec("missing \"alphabet\""));
        match raw.kind.as_str() {
            "full" => SubshiftSpec::full(need_k()?),
            "sft" => {
                let m = raw.matrix.ok_or_else(|| Error::spec("sft needs \"matrix\""))?;
                if m.iter().flatten().any(|&x| x > 1) {
                    return Err(Error::spec("sft matrix entries must be 0 or 1"));
                }
                let spec = SubshiftSpec::sft(m.into_iter().map(|r| r.into_iter().map(|x| x == 1).collect()).collect())?;
                match raw.alphabet {
                    Some(k) if k != spec.alphabet.size() => Err(Error::spec("alphabet does not match matrix size")),
                    _ => Ok(spec),
                }
            }
            "forbidden" => {
                let k = need_k()?;
                let words = raw
                    .forbidden
                    .ok_or_else(|| Error::spec("forbidden needs \"forbidden\""))?
                    .into_iter()
                    .map(|w| match w {
                        RawWord::Symbols(s) => Ok(s),
                        RawWord::Text(t) => t
                            .chars()
                            .map(|c| parse_digit(c).ok_or_else(|| Error::spec(format!("bad digit {c:?}"))))
                            .collect(),
                    })
                    .collect::<Result<Vec<_>>>()?;
                SubshiftSpec::forbidden(k, words)
            }
            "tuples" => {
                let t = raw.tuples.ok_or_else(|| Error::spec("tuples needs \"tuples\""))?;
                let set = TupleSet::new(t.a, t.b, t.r.into_iter().map(|[u, v]| (u, v)))?;
                match raw.alphabet {
                    Some(k) if k != t.a * t.b => Err(Error::spec("alphabet must equal a*b for tuples")),
                    _ => SubshiftSpec::tuples(set),
                }
            }
            other => Err(Error::spec(format!("unknown kind {other:?}"))),
        }
    }
}

impl From<SubshiftSpec> for RawSpec {
    fn from(spec: SubshiftSpec) -> RawSpec {
        let k = spec.alphabet.size();
        let mut raw = RawSpec {
            alphabet: Some(k),
            kind: String::new(),
            matrix: None,
            forbidden: None,
            tuples: None,
        };
        match spec.kind {
            ShiftKind::Full => raw.kind = "full".into(),
            ShiftKind::Sft(m) => {
                raw.kind = "sft".into();
                raw.matrix = Some(m.into_iter().map(|r| r.into_iter().map(u8::from).collect()).collect());
            }
            ShiftKind::Forbidden(ws) => {
                raw.kind = "forbidden".into();
                raw.forbidden = Some(ws.into_iter().map(RawWord::Symbols).collect());
            }
            ShiftKind::Tuples(t) => {
                raw.kind = "tuples".into();
                raw.tuples = Some(RawTuples {
                    a: t.a,
                    b: t.b,
                    r: t.pairs.iter().map(|&(u, v)| [u, v]).collect(),
                });
            }
        }
        raw
    }
}

/// Deterministic word automaton of a pruned subshift.
///
/// State 0 is the initial state. Every state has an infinite forward path, so
/// the labelled paths of length `N` out of state 0 are exactly the words of
/// length `N` that occur as prefixes of points.
#[derive(Debug, Clone)]
pub struct PrunedShift {
    alphabet: Alphabet,
    trans: Vec<Vec<(Symbol, u32)>>,
    tuples: Option<TupleSet>,
}

impl PrunedShift {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn edges(&self, state: usize) -> &[(Symbol, u32)] {
        &self.trans[state]
    }

    pub fn step(&self, state: usize, s: Symbol) -> Option<usize> {
        self.trans[state]
            .binary_search_by_key(&s, |&(sym, _)| sym)
            .ok()
            .map(|i| self.trans[state][i].1 as usize)
    }

    /// State reached by reading `word` from the initial state.
    pub fn run(&self, word: &[Symbol]) -> Option<usize> {
        word.iter().try_fold(0usize, |st, &s| self.step(st, s))
    }

    pub fn accepts(&self, word: &[Symbol]) -> bool {
        self.run(word).is_some()
    }

    pub fn tuples(&self) -> Option<&TupleSet> {
        self.tuples.as_ref()
    }

    /// Lexicographically least continuation of `prefix` to total length `len`.
    pub fn least_extension(&self, prefix: &[Symbol], len: usize) -> Option<Word> {
        let mut st = self.run(prefix)?;
        let mut out = prefix.to_vec();
        while out.len() < len {
            let &(s, t) = self.trans[st].first()?;
            out.push(s);
            st = t as usize;
        }
        out.truncate(len.max(prefix.len()));
        Some(out)
    }

    /// Transition-count matrix among all states (dense).
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let n = self.num_states();
        let mut m = vec![vec![0u32; n]; n];
        for (i, row) in self.trans.iter().enumerate() {
            for &(_, j) in row {
                m[i][j as usize] += 1;
            }
        }
        m
    }

    pub(crate) fn from_transitions(alphabet: Alphabet, trans: Vec<Vec<(Symbol, u32)>>) -> Result<Self> {
        let mut shift = PrunedShift {
            alphabet,
            trans,
            tuples: None,
        };
        for row in &mut shift.trans {
            row.sort_unstable();
        }
        shift.prune_in_place()?;
        Ok(shift)
    }

    /// Drops states without an infinite forward path and states unreachable
    /// from the initial state, then renumbers.
    fn prune_in_place(&mut self) -> Result<()> {
        let n = self.trans.len();
        let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut outdeg = vec![0usize; n];
        for (i, row) in self.trans.iter().enumerate() {
            outdeg[i] = row.len();
            for &(_, j) in row {
                preds[j as usize].push(i as u32);
            }
        }
        let mut alive = vec![true; n];
        let mut stack: Vec<usize> = (0..n).filter(|&i| outdeg[i] == 0).collect();
        for &i in &stack {
            alive[i] = false;
        }
        while let Some(j) = stack.pop() {
            for &p in &preds[j] {
                let p = p as usize;
                if alive[p] {
                    outdeg[p] -= 1;
                    if outdeg[p] == 0 {
                        alive[p] = false;
                        stack.push(p);
                    }
                }
            }
        }
        if !alive[0] {
            return Err(Error::EmptySubshift);
        }
        let mut reach = vec![false; n];
        reach[0] = true;
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            for &(_, j) in &self.trans[i] {
                let j = j as usize;
                if alive[j] && !reach[j] {
                    reach[j] = true;
                    stack.push(j);
                }
            }
        }
        let mut index = vec![u32::MAX; n];
        let mut next = 0u32;
        for i in 0..n {
            if reach[i] {
                index[i] = next;
                next += 1;
            }
        }
        let trans = std::mem::take(&mut self.trans);
        self.trans = trans
            .into_iter()
            .enumerate()
            .filter(|(i, _)| reach[*i])
            .map(|(_, row)| {
                row.into_iter()
                    .filter(|&(_, j)| reach[j as usize])
                    .map(|(s, j)| (s, index[j as usize]))
                    .collect()
            })
            .collect();
        Ok(())
    }
}

/// Compiles a spec to its pruned word automaton. Forbidden words become a
/// higher-block presentation whose short-word states form a prefix trie.
pub fn prune(spec: &SubshiftSpec) -> Result<PrunedShift> {
    prune_with(spec, &Budgets::default())
}

pub fn prune_with(spec: &SubshiftSpec, budgets: &Budgets) -> Result<PrunedShift> {
    let alphabet = spec.alphabet;
    let k = alphabet.size();
    let mut shift = match &spec.kind {
        ShiftKind::Full => {
            let row = (0..k).map(|s| (s as Symbol, 0)).collect();
            PrunedShift::from_transitions(alphabet, vec![row])?
        }
        ShiftKind::Tuples(r) => {
            let row = r.pairs.iter().map(|&(u, v)| (r.encode(u, v), 0)).collect();
            PrunedShift::from_transitions(alphabet, vec![row])?
        }
        ShiftKind::Sft(m) => {
            let mut trans = vec![(0..k).map(|s| (s as Symbol, s as u32 + 1)).collect::<Vec<_>>()];
            for row in m {
                trans.push(
                    row.iter()
                        .enumerate()
                        .filter(|(_, &ok)| ok)
                        .map(|(t, _)| (t as Symbol, t as u32 + 1))
                        .collect(),
                );
            }
            PrunedShift::from_transitions(alphabet, trans)?
        }
        ShiftKind::Forbidden(words) => compile_forbidden(alphabet, words, budgets)?,
    };
    shift.tuples = spec.tuple_set().cloned();
    Ok(shift)
}

fn compile_forbidden(alphabet: Alphabet, words: &[Word], budgets: &Budgets) -> Result<PrunedShift> {
    let k = alphabet.size();
    let forbidden: HashSet<&[Symbol]> = words.iter().map(Vec::as_slice).collect();
    let max_len = words.iter().map(Vec::len).max().unwrap_or(1);
    let block = max_len.saturating_sub(1);
    let est: f64 = (0..=block).map(|j| (k as f64).powi(j as i32)).sum();
    if est > budgets.words as f64 {
        return Err(Error::limit("higher-block states", est, budgets.words));
    }
    // Only suffixes need checking: every state word already avoids the list.
    let bad_suffix = |w: &[Symbol]| (1..=w.len()).any(|l| forbidden.contains(&w[w.len() - l..]));

    let mut ids: std::collections::HashMap<Word, u32> = std::collections::HashMap::new();
    let mut words_of: Vec<Word> = vec![Vec::new()];
    ids.insert(Vec::new(), 0);
    let mut trans: Vec<Vec<(Symbol, u32)>> = vec![Vec::new()];
    let mut i = 0;
    while i < words_of.len() {
        let w = words_of[i].clone();
        for s in 0..k as Symbol {
            let mut ext = w.clone();
            ext.push(s);
            if bad_suffix(&ext) {
                continue;
            }
            let target = if ext.len() > block { ext[1..].to_vec() } else { ext };
            let id = match ids.get(&target) {
                Some(&id) => id,
                None => {
                    let id = words_of.len() as u32;
                    ids.insert(target.clone(), id);
                    words_of.push(target);
                    trans.push(Vec::new());
                    id
                }
            };
            trans[i].push((s, id));
        }
        i += 1;
    }
    PrunedShift::from_transitions(alphabet, trans)
}

/// Exact word counts `|W_N|` for `0 ≤ N ≤ max_length`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    counts: Vec<BigUint>,
}

impl CountTable {
    pub fn max_length(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn get(&self, n: usize) -> &BigUint {
        &self.counts[n]
    }

    pub fn as_slice(&self) -> &[BigUint] {
        &self.counts
    }

    /// First `(N, M)` with `c[N+M] > c[N]·c[M]`, if any.
    pub fn submultiplicativity_violation(&self) -> Option<(usize, usize)> {
        let top = self.max_length();
        for n in 1..=top {
            for m in 1..=top - n {
                if self.counts[n + m] > &self.counts[n] * &self.counts[m] {
                    return Some((n, m));
                }
            }
        }
        None
    }
}

impl Serialize for CountTable {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = ser.serialize_seq(Some(self.counts.len() - 1))?;
        for c in &self.counts[1..] {
            seq.serialize_element(&c.to_str_radix(10))?;
        }
        seq.end()
    }
}

pub fn count_words(shift: &PrunedShift, n_max: usize) -> CountTable {
    let mut v = vec![BigUint::zero(); shift.num_states()];
    v[0] = BigUint::one();
    let mut counts = vec![BigUint::one()];
    for _ in 0..n_max {
        let mut next = vec![BigUint::zero(); v.len()];
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for &(_, j) in shift.edges(i) {
                next[j as usize] += c;
            }
        }
        v = next;
        counts.push(v.iter().sum());
    }
    CountTable { counts }
}

/// All admissible words of length `n` in lexicographic order.
pub fn enumerate_words(shift: &PrunedShift, n: usize, budgets: &Budgets) -> Result<Vec<Word>> {
    let total = count_words(shift, n).get(n).clone();
    if total > BigUint::from(budgets.words) {
        return Err(Error::limit("word enumeration", big_to_f64(&total), budgets.words));
    }
    let mut out = Vec::with_capacity(total.to_usize().unwrap_or(0));
    let mut word = Vec::with_capacity(n);
    fn rec(shift: &PrunedShift, st: usize, n: usize, word: &mut Word, out: &mut Vec<Word>) {
        if word.len() == n {
            out.push(word.clone());
            return;
        }
        for &(s, t) in shift.edges(st) {
            word.push(s);
            rec(shift, t as usize, n, word, out);
            word.pop();
        }
    }
    rec(shift, 0, n, &mut word, &mut out);
    Ok(out)
}

pub fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Natural log of a big integer without overflow; `ln 0 = -inf`.
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return big_to_f64(x).ln();
    }
    let shift = bits - 64;
    big_to_f64(&(x >> shift)).ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Exact up to floating-point evaluation.
    Exact,
    /// Certified upper bound from finite data; the true value may be lower.
    UpperBound,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub counts: CountTable,
    /// `u_N` for `N = 1..=N_max`, nats.
    pub upper_bounds: Vec<f64>,
    pub spectral_value: Option<f64>,
    pub spectral_bracket: Option<(f64, f64)>,
    pub best_estimate: f64,
    pub status: Status,
}

/// Fekete bounds `u_N = min_{j ≤ N} ln c_j / j`.
pub fn fekete_bounds(logs: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut best = f64::INFINITY;
    logs.into_iter()
        .enumerate()
        .map(|(i, l)| {
            best = best.min(l / (i + 1) as f64);
            best
        })
        .collect()
}

pub fn entropy(shift: &PrunedShift, n_max: usize) -> Result<EntropyReport> {
    if n_max == 0 {
        return Err(Error::domain("N_max must be at least 1"));
    }
    let counts = count_words(shift, n_max);
    let upper_bounds = fekete_bounds(counts.as_slice()[1..].iter().map(big_ln));
    let (lo, hi) = spectral_radius(shift);
    if hi <= 0.0 {
        return Err(Error::EmptySubshift);
    }
    let rho = 0.5 * (lo + hi);
    let value = rho.ln();
    Ok(EntropyReport {
        counts,
        upper_bounds,
        spectral_value: Some(value),
        spectral_bracket: Some((lo.ln(), hi.ln())),
        best_estimate: value,
        status: Status::Exact,
    })
}

const SPECTRAL_RTOL: f64 = 1e-13;
const SPECTRAL_MAX_ITER: usize = 200_000;

/// Collatz–Wielandt bracket `[lo, hi]` on the spectral radius of the
/// automaton's transition-count matrix, maximized over strong components.
pub fn spectral_radius(shift: &PrunedShift) -> (f64, f64) {
    let n = shift.num_states();
    let mut g = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for &(_, j) in shift.edges(i) {
            g.add_edge(nodes[i], nodes[j as usize], ());
        }
    }
    let mut best = (0.0f64, 0.0f64);
    for comp in tarjan_scc(&g) {
        let mut local = vec![usize::MAX; n];
        for (li, node) in comp.iter().enumerate() {
            local[node.index()] = li;
        }
        let adj: Vec<Vec<usize>> = comp
            .iter()
            .map(|node| {
                shift
                    .edges(node.index())
                    .iter()
                    .filter_map(|&(_, j)| (local[j as usize] != usize::MAX).then_some(local[j as usize]))
                    .collect()
            })
            .collect();
        if adj.iter().all(Vec::is_empty) {
            continue;
        }
        let br = irreducible_radius(&adj);
        if br.1 > best.1 {
            best = br;
        }
    }
    best
}

/// Power iteration on `A + I` for an irreducible matrix given by out-lists.
fn irreducible_radius(adj: &[Vec<usize>]) -> (f64, f64) {
    let n = adj.len();
    let mut x = vec![1.0f64; n];
    let mut y = vec![0.0f64; n];
    let mut bracket = (0.0, f64::INFINITY);
    for _ in 0..SPECTRAL_MAX_ITER {
        for (i, row) in adj.iter().enumerate() {
            y[i] = row.iter().map(|&j| x[j]).sum();
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        bracket = (lo.max(bracket.0), hi.min(bracket.1));
        if bracket.1 - bracket.0 <= SPECTRAL_RTOL * bracket.1 {
            break;
        }
        let mut norm = 0.0f64;
        for i in 0..n {
            y[i] += x[i];
            norm = norm.max(y[i]);
        }
        for i in 0..n {
            x[i] = y[i] / norm;
        }
    }
    bracket
}
