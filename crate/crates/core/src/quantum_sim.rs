//! Query-counted oracle access.
//!
//! The hidden text is only reachable through [`TextOracle::read`] (one query per
//! symbol) or through the simulated search subroutines, which scan classically
//! but are charged `q * ceil(c * sqrt(m))` queries for a range of `m` positions.
//! Positions are 1-based throughout.

use std::cell::Cell;
use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Symbol = u32;

/// The reserved terminator symbol.
pub const SENTINEL: Symbol = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseMode {
    Exact,
    Bernoulli,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseConfig {
    pub mode: NoiseMode,
    pub p: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn exact() -> Self {
        NoiseConfig { mode: NoiseMode::Exact, p: 0.0, seed: 0 }
    }

    pub fn bernoulli(p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0 / 3.0 + 1e-12).contains(&p) {
            return Err(Error::InvalidArgument(format!("failure probability {p} outside [0, 1/3]")));
        }
        Ok(NoiseConfig { mode: NoiseMode::Bernoulli, p, seed })
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self::exact()
    }
}

/// Per-phase query counters. `total` always equals the sum of the counters.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryLedger {
    counters: BTreeMap<String, u64>,
    total: u64,
}

impl QueryLedger {
    pub fn charge(&mut self, phase: &str, q: u64) {
        if let Some(c) = self.counters.get_mut(phase) {
            *c += q;
        } else {
            self.counters.insert(phase.to_string(), q);
        }
        self.total += q;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn phase(&self, label: &str) -> u64 {
        self.counters.get(label).copied().unwrap_or(0)
    }

    pub fn phases(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counters.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// One line of the subroutine trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub phase: String,
    pub kind: &'static str,
    pub range: usize,
    pub charge: u64,
    pub outcome: String,
}

impl std::fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}\t{}\t{}\t{}\t{}", self.phase, self.kind, self.range, self.charge, self.outcome)
    }
}

/// Uncharged symbol access handed to predicates while a subroutine is running.
pub struct SymbolView<'a> {
    symbols: &'a [Symbol],
    touched: &'a Cell<u64>,
}

impl SymbolView<'_> {
    /// Symbol at 1-based position `i`. Panics out of range, like slice indexing.
    pub fn get(&self, i: usize) -> Symbol {
        self.touched.set(self.touched.get() + 1);
        self.symbols[i - 1]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// A prepared subroutine invocation: the true answer plus a sampler for wrong ones.
pub struct Call<R> {
    pub kind: &'static str,
    pub size: usize,
    pub cost: u64,
    truth: R,
    wrong: Box<dyn Fn(&mut ChaCha8Rng) -> Option<R>>,
}

impl<R: Clone> Call<R> {
    pub fn truth(&self) -> R {
        self.truth.clone()
    }
}

/// Repetition count `ceil(18 ln(6 n log2^2 n))`, at least 1.
pub fn repetitions(n: usize) -> u32 {
    let nf = n.max(2) as f64;
    let lg = nf.log2();
    let t = (18.0 * (6.0 * nf * lg * lg).ln()).ceil();
    t.max(1.0) as u32
}

/// Smallest integer `s` with `s * s >= m`.
pub fn ceil_sqrt(m: u64) -> u64 {
    if m == 0 {
        return 0;
    }
    let mut s = (m as f64).sqrt() as u64;
    while s * s > m {
        s -= 1;
    }
    while s * s < m {
        s += 1;
    }
    s
}

pub struct TextOracle {
    symbols: Vec<Symbol>,
    sentinel: bool,
    ledger: QueryLedger,
    phase: String,
    noise: NoiseConfig,
    rng: ChaCha8Rng,
    c: f64,
    trace: Option<Vec<TraceRecord>>,
    tripwire: bool,
    scope: u32,
    touched: Cell<u64>,
    reads: u64,
}

impl TextOracle {
    /// Wraps `symbols` as is. A 0 anywhere is accepted; use
    /// [`TextOracle::with_sentinel`] for terminated texts.
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidArgument("empty text".into()));
        }
        Ok(Self::build(symbols, false))
    }

    /// Appends the sentinel. The body must not contain 0.
    pub fn with_sentinel(mut body: Vec<Symbol>) -> Result<Self> {
        if body.contains(&SENTINEL) {
            return Err(Error::InvalidArgument("symbol 0 is reserved for the sentinel".into()));
        }
        body.push(SENTINEL);
        Ok(Self::build(body, true))
    }

    /// Treats an already terminated text as sentinel-flagged.
    pub fn terminated(symbols: Vec<Symbol>) -> Result<Self> {
        match symbols.split_last() {
            Some((&SENTINEL, body)) if !body.contains(&SENTINEL) => Ok(Self::build(symbols, true)),
            _ => Err(Error::MissingSentinel),
        }
    }

    fn build(symbols: Vec<Symbol>, sentinel: bool) -> Self {
        TextOracle {
            symbols,
            sentinel,
            ledger: QueryLedger::default(),
            phase: "default".to_string(),
            noise: NoiseConfig::exact(),
            rng: ChaCha8Rng::seed_from_u64(0),
            c: 1.0,
            trace: None,
            tripwire: false,
            scope: 0,
            touched: Cell::new(0),
            reads: 0,
        }
    }

    pub fn set_noise(&mut self, noise: NoiseConfig) {
        self.rng = ChaCha8Rng::seed_from_u64(noise.seed);
        self.noise = noise;
    }

    pub fn noise(&self) -> &NoiseConfig {
        &self.noise
    }

    /// Sets the constant `c` in the `ceil(c * sqrt(m))` charge.
    pub fn set_cost_constant(&mut self, c: f64) -> Result<()> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("cost constant {c}")));
        }
        self.c = c;
        Ok(())
    }

    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn take_trace(&mut self) -> Vec<TraceRecord> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// After this, any raw symbol access outside `read` or a running subroutine panics.
    pub fn arm_tripwire(&mut self) {
        self.tripwire = true;
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_sentinel_terminated(&self) -> bool {
        self.sentinel
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn phase(&self) -> &str {
        &self.phase
    }

    /// Switches the phase that subsequent charges go to; returns the previous label.
    pub fn set_phase(&mut self, label: &str) -> String {
        std::mem::replace(&mut self.phase, label.to_string())
    }

    /// Number of direct `read` calls so far.
    pub fn reads(&self) -> u64 {
        self.reads
    }

    /// Number of uncharged symbol inspections performed inside subroutines.
    pub fn scanned(&self) -> u64 {
        self.touched.get()
    }

    fn raw(&self, i: usize) -> Symbol {
        if self.tripwire && self.scope == 0 {
            panic!("raw access to position {i} outside an accounted operation");
        }
        self.symbols[i - 1]
    }

    fn check(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.symbols.len() {
            Err(Error::OutOfRange { pos: i, len: self.symbols.len() })
        } else {
            Ok(())
        }
    }

    fn charge(&mut self, q: u64) {
        let phase = std::mem::take(&mut self.phase);
        self.ledger.charge(&phase, q);
        self.phase = phase;
    }

    fn record(&mut self, kind: &'static str, range: usize, charge: u64, outcome: String) {
        if let Some(tr) = self.trace.as_mut() {
            tr.push(TraceRecord { phase: self.phase.clone(), kind, range, charge, outcome });
        }
    }

    pub fn sqrt_charge(&self, m: usize) -> u64 {
        if self.c == 1.0 {
            ceil_sqrt(m as u64)
        } else {
            (self.c * (m as f64).sqrt()).ceil() as u64
        }
    }

    /// Reads `T[i]`, charging one query.
    pub fn read(&mut self, i: usize) -> Result<Symbol> {
        self.check(i)?;
        self.scope += 1;
        let s = self.raw(i);
        self.scope -= 1;
        self.reads += 1;
        self.charge(1);
        self.record("read", 1, 1, s.to_string());
        Ok(s)
    }

    fn scan<T>(&mut self, f: impl FnOnce(&SymbolView<'_>) -> T) -> T {
        self.scope += 1;
        let view = SymbolView { symbols: &self.symbols, touched: &self.touched };
        let out = f(&view);
        self.scope -= 1;
        out
    }

    // ---- preparation -------------------------------------------------------

    fn want_wrong(&self) -> bool {
        self.noise.mode == NoiseMode::Bernoulli && self.noise.p > 0.0
    }

    /// Prepares a search for any `i` in `[a, b]` with `pred(i)`; the result is the
    /// smallest witness.
    pub fn prepare_grover_any(
        &mut self,
        a: usize,
        b: usize,
        mut pred: impl FnMut(usize, &SymbolView<'_>) -> bool,
        q_pred: u64,
    ) -> Result<Call<Option<usize>>> {
        if a == 0 || a > b {
            return Err(Error::EmptyRange { a, b });
        }
        let noisy = self.want_wrong();
        let (first, nonwitness) = self.scan(|v| {
            let mut first = None;
            let mut non = Vec::new();
            for i in a..=b {
                let hit = pred(i, v);
                if hit && first.is_none() {
                    first = Some(i);
                    if !noisy {
                        break;
                    }
                }
                if !hit && noisy {
                    non.push(i);
                }
            }
            (first, non)
        });
        let cost = q_pred.max(1) * self.sqrt_charge(b - a + 1);
        let wrong: Box<dyn Fn(&mut ChaCha8Rng) -> Option<Option<usize>>> = if first.is_some() {
            Box::new(move |rng| {
                let u = rng.gen_range(0..=nonwitness.len());
                if u == 0 {
                    Some(None)
                } else {
                    Some(Some(nonwitness[u - 1]))
                }
            })
        } else {
            Box::new(move |rng| Some(Some(rng.gen_range(a..=b))))
        };
        Ok(Call { kind: "grover_any", size: b - a + 1, cost, truth: first, wrong })
    }

    /// Like [`TextOracle::prepare_grover_any`] over an explicit position list.
    pub fn prepare_grover_over(
        &mut self,
        positions: &[usize],
        mut pred: impl FnMut(usize, &SymbolView<'_>) -> bool,
        q_pred: u64,
    ) -> Result<Call<Option<usize>>> {
        if positions.is_empty() {
            return Err(Error::EmptyRange { a: 1, b: 0 });
        }
        let noisy = self.want_wrong();
        let (first, nonwitness) = self.scan(|v| {
            let mut first = None;
            let mut non = Vec::new();
            for &i in positions {
                let hit = pred(i, v);
                if hit && first.is_none() {
                    first = Some(i);
                }
                if !hit && noisy {
                    non.push(i);
                }
            }
            (first, non)
        });
        let cost = q_pred.max(1) * self.sqrt_charge(positions.len());
        let all = positions.to_vec();
        let wrong: Box<dyn Fn(&mut ChaCha8Rng) -> Option<Option<usize>>> = if first.is_some() {
            Box::new(move |rng| {
                let u = rng.gen_range(0..=nonwitness.len());
                if u == 0 {
                    Some(None)
                } else {
                    Some(Some(nonwitness[u - 1]))
                }
            })
        } else {
            Box::new(move |rng| Some(Some(all[rng.gen_range(0..all.len())])))
        };
        Ok(Call { kind: "grover_any", size: positions.len(), cost, truth: first, wrong })
    }

    /// Prepares minimum finding over `[a, b]`; ties go to the smallest index.
    pub fn prepare_durr_hoyer_min(
        &mut self,
        a: usize,
        b: usize,
        mut key: impl FnMut(usize, &SymbolView<'_>) -> i64,
        q_key: u64,
    ) -> Result<Call<usize>> {
        if a == 0 || a > b {
            return Err(Error::EmptyRange { a, b });
        }
        let noisy = self.want_wrong();
        let (best, losers) = self.scan(|v| {
            let keys: Vec<i64> = (a..=b).map(|i| key(i, v)).collect();
            let mut best = 0;
            for (k, &x) in keys.iter().enumerate() {
                if x < keys[best] {
                    best = k;
                }
            }
            let losers: Vec<usize> = if noisy {
                let m = keys[best];
                (a..=b).filter(|&i| keys[i - a] != m).collect()
            } else {
                Vec::new()
            };
            (a + best, losers)
        });
        let cost = q_key.max(1) * self.sqrt_charge(b - a + 1);
        let wrong: Box<dyn Fn(&mut ChaCha8Rng) -> Option<usize>> = Box::new(move |rng| {
            if losers.is_empty() {
                None
            } else {
                Some(losers[rng.gen_range(0..losers.len())])
            }
        });
        Ok(Call { kind: "durr_hoyer_min", size: b - a + 1, cost, truth: best, wrong })
    }

    /// Prepares the smallest `k` in `1..=l` with `T[i-k+1] != T[j-k+1]`.
    pub fn prepare_rightmost_mismatch(&mut self, i: usize, j: usize, l: usize) -> Result<Call<Option<usize>>> {
        if l == 0 {
            return Err(Error::InvalidArgument("mismatch length must be positive".into()));
        }
        if l > i || l > j {
            return Err(Error::InvalidArgument(format!("length {l} exceeds prefix {i} or {j}")));
        }
        self.check(i)?;
        self.check(j)?;
        let truth = self.scan(|v| {
            if i == j {
                return None;
            }
            (1..=l).find(|&k| v.get(i - k + 1) != v.get(j - k + 1))
        });
        let cost = 2 * self.sqrt_charge(l);
        let wrong: Box<dyn Fn(&mut ChaCha8Rng) -> Option<Option<usize>>> = Box::new(move |rng| {
            // answers 0..=l encode None, Some(1)..Some(l); skip the true one
            let t = truth.unwrap_or(0);
            let mut u = rng.gen_range(0..l);
            if u >= t {
                u += 1;
            }
            Some(if u == 0 { None } else { Some(u) })
        });
        Ok(Call { kind: "rightmost_mismatch", size: l, cost, truth, wrong })
    }

    // ---- invocation --------------------------------------------------------

    fn draw<R: Clone>(&mut self, call: &Call<R>) -> R {
        if self.want_wrong() && self.rng.gen_bool(self.noise.p) {
            if let Some(w) = (call.wrong)(&mut self.rng) {
                return w;
            }
        }
        call.truth.clone()
    }

    /// Runs a prepared call once.
    pub fn invoke<R: Clone + std::fmt::Debug>(&mut self, call: &Call<R>) -> R {
        let out = self.draw(call);
        self.charge(call.cost);
        if self.trace.is_some() {
            self.record(call.kind, call.size, call.cost, format!("{out:?}"));
        }
        out
    }

    /// Runs a prepared call `t` times and returns the majority answer (or the
    /// earliest-seen most frequent one). Charges `t` times the call's cost.
    pub fn amplify<R: Clone + Eq + Hash + std::fmt::Debug>(&mut self, call: &Call<R>, t: u32) -> R {
        let t = t.max(1);
        let out = if self.want_wrong() {
            let mut counts: HashMap<R, (u32, u32)> = HashMap::new();
            for rep in 0..t {
                let r = self.draw(call);
                counts.entry(r).or_insert((0, rep)).0 += 1;
            }
            counts
                .into_iter()
                .max_by(|x, y| x.1 .0.cmp(&y.1 .0).then(y.1 .1.cmp(&x.1 .1)))
                .map(|(r, _)| r)
                .expect("t >= 1")
        } else {
            call.truth.clone()
        };
        let charge = call.cost * t as u64;
        self.charge(charge);
        if self.trace.is_some() {
            self.record(call.kind, call.size, charge, format!("{out:?}"));
        }
        out
    }

    // ---- one-shot conveniences --------------------------------------------

    pub fn grover_any(
        &mut self,
        a: usize,
        b: usize,
        pred: impl FnMut(usize, &SymbolView<'_>) -> bool,
        q_pred: u64,
    ) -> Result<Option<usize>> {
        let call = self.prepare_grover_any(a, b, pred, q_pred)?;
        Ok(self.invoke(&call))
    }

    pub fn grover_any_over(
        &mut self,
        positions: &[usize],
        pred: impl FnMut(usize, &SymbolView<'_>) -> bool,
        q_pred: u64,
    ) -> Result<Option<usize>> {
        let call = self.prepare_grover_over(positions, pred, q_pred)?;
        Ok(self.invoke(&call))
    }

    pub fn durr_hoyer_min(
        &mut self,
        a: usize,
        b: usize,
        key: impl FnMut(usize, &SymbolView<'_>) -> i64,
        q_key: u64,
    ) -> Result<usize> {
        let call = self.prepare_durr_hoyer_min(a, b, key, q_key)?;
        Ok(self.invoke(&call))
    }

    pub fn rightmost_mismatch(&mut self, i: usize, j: usize, l: usize) -> Result<Option<usize>> {
        let call = self.prepare_rightmost_mismatch(i, j, l)?;
        Ok(self.invoke(&call))
    }

    /// Amplified rightmost mismatch, the form used by the factorizers.
    pub fn rightmost_mismatch_amplified(&mut self, i: usize, j: usize, l: usize, t: u32) -> Result<Option<usize>> {
        let call = self.prepare_rightmost_mismatch(i, j, l)?;
        Ok(self.amplify(&call, t))
    }
}

impl std::fmt::Debug for TextOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TextOracle")
            .field("n", &self.symbols.len())
            .field("sentinel", &self.sentinel)
            .field("ledger", &self.ledger)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(s: &str) -> Vec<Symbol> {
        s.bytes().map(|b| if b == b'$' { 0 } else { b as Symbol }).collect()
    }

    #[test]
    fn read_charges_one_query() {
        let mut o = TextOracle::terminated(text("mississippi$")).unwrap();
        assert_eq!(o.read(1).unwrap(), b'm' as Symbol);
        assert_eq!(o.ledger().total(), 1);
        assert_eq!(o.read(12).unwrap(), SENTINEL);
        assert!(matches!(o.read(13), Err(Error::OutOfRange { .. })));
        assert!(o.read(0).is_err());
        assert_eq!(o.ledger().total(), 2);
    }

    #[test]
    fn sentinel_flag_rules() {
        assert!(TextOracle::terminated(text("ab$")).unwrap().is_sentinel_terminated());
        assert_eq!(TextOracle::terminated(text("a$b$")).unwrap_err(), Error::MissingSentinel);
        assert!(TextOracle::with_sentinel(vec![1, 0, 2]).is_err());
        assert!(TextOracle::new(vec![]).is_err());
    }

    #[test]
    fn grover_examples() {
        let mut o = TextOracle::new(vec![0; 8]).unwrap();
        assert_eq!(o.grover_any(1, 8, |i, v| v.get(i) == 1, 1).unwrap(), None);
        assert_eq!(o.ledger().total(), 3);
        let mut o = TextOracle::new(vec![0, 0, 0, 1, 0, 0, 0, 0]).unwrap();
        assert_eq!(o.grover_any(1, 8, |i, v| v.get(i) == 1, 1).unwrap(), Some(4));
        let isa = [4, 3, 6, 2, 5, 1];
        let mut o = TextOracle::new(text("banana")).unwrap();
        let hit = o.grover_any(2, 6, |i, _| isa[i - 1] < 3, 2).unwrap().unwrap();
        assert!(hit == 4 || hit == 6);
        assert_eq!(o.ledger().total(), 2 * 3);
        assert!(o.grover_any(3, 2, |_, _| true, 1).is_err());
    }

    #[test]
    fn min_examples() {
        let mut o = TextOracle::new(vec![1; 10]).unwrap();
        assert_eq!(o.durr_hoyer_min(3, 9, |i, _| i as i64, 1).unwrap(), 3);
        assert_eq!(o.durr_hoyer_min(1, 5, |_, _| 7, 1).unwrap(), 1);
        let keys = [7, 2, 9, 2];
        assert_eq!(o.durr_hoyer_min(1, 4, |i, _| keys[i - 1], 1).unwrap(), 2);
        assert_eq!(o.ledger().total(), 3 + 3 + 2);
    }

    #[test]
    fn mismatch_examples() {
        let mut o = TextOracle::new(text("abacabcabcaaaab")).unwrap();
        assert_eq!(o.rightmost_mismatch(6, 2, 2).unwrap(), None);
        assert_eq!(o.rightmost_mismatch(4, 2, 2).unwrap(), Some(1));
        assert_eq!(o.rightmost_mismatch(9, 9, 5).unwrap(), None);
        assert_eq!(o.ledger().total(), 4 + 4 + 6);
        assert!(o.rightmost_mismatch(2, 9, 3).is_err());
    }

    #[test]
    fn amplify_exact_and_degenerate() {
        let mut o = TextOracle::new(text("abacabcabcaaaab")).unwrap();
        let call = o.prepare_rightmost_mismatch(4, 2, 2).unwrap();
        assert_eq!(o.amplify(&call, 5), Some(1));
        assert_eq!(o.ledger().total(), 5 * 4);
        assert_eq!(o.amplify(&call, 1), Some(1));
        assert_eq!(o.ledger().total(), 6 * 4);
    }

    #[test]
    fn repetition_formula() {
        // ceil(18 ln(6 * 4096 * 144))
        assert_eq!(repetitions(4096), 272);
        assert!(repetitions(1) >= 1);
    }

    #[test]
    fn phases_sum_to_total() {
        let mut o = TextOracle::new(vec![1, 2, 3, 4]).unwrap();
        o.set_phase("a");
        o.read(1).unwrap();
        o.set_phase("b");
        o.grover_any(1, 4, |_, _| false, 1).unwrap();
        let sum: u64 = o.ledger().phases().map(|(_, v)| v).sum();
        assert_eq!(sum, o.ledger().total());
        assert_eq!(o.ledger().phase("a"), 1);
        assert_eq!(o.ledger().phase("b"), 2);
    }

    #[test]
    #[should_panic(expected = "outside an accounted operation")]
    fn tripwire_fires_on_unscoped_access() {
        let mut o = TextOracle::new(vec![1, 2]).unwrap();
        o.arm_tripwire();
        let _ = o.raw(1);
    }

    #[test]
    fn tripwire_allows_accounted_paths() {
        let mut o = TextOracle::new(vec![1, 2, 1]).unwrap();
        o.arm_tripwire();
        o.read(2).unwrap();
        o.rightmost_mismatch(3, 1, 1).unwrap();
        o.grover_any(1, 3, |i, v| v.get(i) == 2, 1).unwrap();
    }

    #[test]
    fn trace_lines_match_ledger() {
        let mut o = TextOracle::new(vec![1, 2, 1, 2]).unwrap();
        o.enable_trace();
        o.read(1).unwrap();
        o.rightmost_mismatch_amplified(4, 2, 2, 3).unwrap();
        let tr = o.take_trace();
        assert_eq!(tr.len(), 2);
        assert_eq!(tr.iter().map(|r| r.charge).sum::<u64>(), o.ledger().total());
    }
}
