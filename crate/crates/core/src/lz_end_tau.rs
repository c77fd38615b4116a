//! Query-counted factorizers: LZ-End+tau in sublinear queries, non-overlapping
//! LZ77 in near-linear queries, and the exhaustive halving recovery for tiny
//! binary texts.
//!
//! The known prefix `T[1..s-1]` is held reversed in a [`HashedRope`] and is
//! free to inspect. Symbols at or after the frontier `s` cost one query each
//! (cached for the current factor), and comparisons that reach into them go
//! through the oracle's amplified rightmost-mismatch subroutine.

use std::collections::{HashMap, HashSet};

use crate::colex_index::{Placement, PrefixSet, ReversedPattern, SuffixRange};
use crate::dynamic_lce::HashedRope;
use crate::error::{Error, Result};
use crate::quantum_sim::{repetitions, ceil_sqrt, Symbol, TextOracle};
use crate::reference_kit::{lz77_greedy, Factor, FactorKind, Factorization};

/// How a single tau-far evaluation searches the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Reads the whole candidate `T[s..j]` and searches each `h` explicitly.
    Linear,
    /// One rightmost-mismatch binary search per window position.
    SqrtTauEll,
    /// One binary search over the merged, trimmed ranges of all window
    /// positions.
    #[default]
    TauPlusSqrtEll,
}

impl Strategy {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "linear" => Strategy::Linear,
            "sqrt-tau-ell" => Strategy::SqrtTauEll,
            "tau-plus-sqrt-ell" | "merged" => Strategy::TauPlusSqrtEll,
            other => return Err(Error::InvalidArgument(format!("unknown strategy {other:?}"))),
        })
    }
}

#[derive(Clone, Debug)]
pub struct FactorizeConfig {
    pub tau: usize,
    pub z_cap: Option<usize>,
    pub strategy: Strategy,
    /// Overrides the repetition count `t`; `None` derives it from `n`.
    pub repetitions: Option<u32>,
    pub rope_seed: u64,
}

impl FactorizeConfig {
    pub fn new(tau: usize) -> Self {
        FactorizeConfig { tau, z_cap: None, strategy: Strategy::default(), repetitions: None, rope_seed: 0x00c0_1e55 }
    }

    pub fn with_cap(mut self, z_cap: usize) -> Self {
        self.z_cap = Some(z_cap);
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }
}

/// Result of a capped run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factorized {
    Complete(Factorization),
    /// More than `z_cap` factors were found; holds the factors so far.
    Capped(Factorization),
}

impl Factorized {
    pub fn is_complete(&self) -> bool {
        matches!(self, Factorized::Complete(_))
    }

    pub fn factorization(&self) -> &Factorization {
        match self {
            Factorized::Complete(f) | Factorized::Capped(f) => f,
        }
    }

    pub fn into_factorization(self) -> Factorization {
        match self {
            Factorized::Complete(f) | Factorized::Capped(f) => f,
        }
    }
}

/// Outcome of one tau-far evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TauFar {
    pub holds: bool,
    /// Rightmost window position `h` making `T[s..h]` a potential factor.
    pub h: Option<usize>,
    /// Start of an earlier occurrence of `T[s..h]` ending at an allowed
    /// position, or `None` for a first-occurrence literal.
    pub source: Option<usize>,
}

impl TauFar {
    const NO: TauFar = TauFar { holds: false, h: None, source: None };
}

/// State of an LZ-End+tau factorization in progress.
pub struct FactorizerState<'o> {
    oracle: &'o mut TextOracle,
    n: usize,
    tau: usize,
    t: u32,
    strategy: Strategy,
    fact: Factorization,
    frontier: usize,
    rope: HashedRope,
    set: PrefixSet,
    known: HashSet<Symbol>,
    cache: HashMap<usize, Symbol>,
    w_known: Option<WKnown>,
    evaluations: u64,
}

/// The last `matched` symbols of `W = T[s..w-1]` equal `T[anchor-matched+1..anchor]`;
/// `next`, when set, is the symbol of `W` just before them.
#[derive(Clone, Copy, Debug)]
struct WKnown {
    s: usize,
    w: usize,
    anchor: usize,
    matched: usize,
    next: Option<Symbol>,
}

impl<'o> FactorizerState<'o> {
    pub fn new(oracle: &'o mut TextOracle, config: &FactorizeConfig) -> Result<Self> {
        if config.tau == 0 {
            return Err(Error::InvalidArgument("tau must be positive".into()));
        }
        let n = oracle.len();
        Ok(FactorizerState {
            n,
            tau: config.tau,
            t: config.repetitions.unwrap_or_else(|| repetitions(n)),
            strategy: config.strategy,
            fact: Factorization::new(FactorKind::LzEndTau, Some(config.tau)),
            frontier: 1,
            rope: HashedRope::new(config.rope_seed),
            set: PrefixSet::new(),
            known: HashSet::new(),
            cache: HashMap::new(),
            w_known: None,
            evaluations: 0,
            oracle,
        })
    }

    pub fn frontier(&self) -> usize {
        self.frontier
    }

    pub fn is_done(&self) -> bool {
        self.frontier > self.n
    }

    pub fn factors(&self) -> &Factorization {
        &self.fact
    }

    pub fn prefix_set(&self) -> &PrefixSet {
        &self.set
    }

    pub fn rope(&self) -> &HashedRope {
        &self.rope
    }

    pub fn repetitions(&self) -> u32 {
        self.t
    }

    /// Number of tau-far evaluations so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn into_factorization(self) -> Factorization {
        self.fact
    }

    /// `T[p]`: free below the frontier, one query (cached) otherwise.
    fn sym(&mut self, p: usize) -> Result<Symbol> {
        if p < self.frontier {
            return Ok(self.rope.text_symbol(p));
        }
        if let Some(&c) = self.cache.get(&p) {
            return Ok(c);
        }
        let c = self.oracle.read(p)?;
        self.cache.insert(p, c);
        Ok(c)
    }

    fn window(&mut self, a: usize, b: usize) -> Result<Vec<Symbol>> {
        (a..=b).map(|p| self.sym(p)).collect()
    }

    /// Whether some `h` in `[max(s, j - tau), j]` makes `T[s..h]` a potential
    /// factor, with the rightmost such `h` and a witness.
    pub fn tau_far_check(&mut self, j: usize) -> Result<TauFar> {
        self.evaluate(j, true)
    }

    fn evaluate(&mut self, j: usize, want_h: bool) -> Result<TauFar> {
        let s = self.frontier;
        if j < s || j > self.n {
            return Err(Error::OutOfRange { pos: j, len: self.n });
        }
        self.evaluations += 1;
        let w = s.max(j.saturating_sub(self.tau));
        let first = self.sym(s)?;
        if !self.known.contains(&first) {
            // only the literal itself is a potential factor
            return Ok(if w == s { TauFar { holds: true, h: Some(s), source: None } } else { TauFar::NO });
        }
        if self.strategy == Strategy::Linear || w == s {
            return self.explicit_search(s, w, j);
        }
        let win = self.window(w, j)?;
        let pattern = ReversedPattern::new(&self.rope, &win);
        // ranges of prefixes ending with T[w..h], for every h in the window
        let mut ranges: Vec<(SuffixRange, usize, usize)> = Vec::new();
        for h in w..=j {
            let r = self.set.pattern_range(&self.rope, &pattern.sub(j - h, h - w + 1), self.set.full_range());
            if !r.is_empty() {
                ranges.push((r, h - w + 1, h));
            }
        }
        if ranges.is_empty() {
            return Ok(TauFar::NO);
        }
        match self.strategy {
            Strategy::SqrtTauEll => {
                for &(r, d, h) in ranges.iter().rev() {
                    if let Some(e) = self.merged_search(s, w, &[(r, d)])? {
                        return Ok(TauFar { holds: true, h: Some(h), source: Some(e.1 - (h - s)) });
                    }
                }
                Ok(TauFar::NO)
            }
            _ => {
                let all: Vec<(SuffixRange, usize)> = ranges.iter().map(|&(r, d, _)| (r, d)).collect();
                let Some((k, e)) = self.merged_search(s, w, &all)? else { return Ok(TauFar::NO) };
                if !want_h {
                    let h = ranges[k].2;
                    return Ok(TauFar { holds: true, h: Some(h), source: Some(e - (h - s)) });
                }
                // largest threshold index whose suffix of ranges still hits
                let (mut lo, mut hi) = (k, ranges.len() - 1);
                let mut best = (k, e);
                while lo < hi {
                    let mid = lo + (hi - lo).div_ceil(2);
                    match self.merged_search(s, w, &all[mid..])? {
                        Some((kk, ee)) => {
                            best = (mid + kk, ee);
                            lo = mid.max(mid + kk);
                        }
                        None => hi = mid - 1,
                    }
                }
                let h = ranges[best.0].2;
                Ok(TauFar { holds: true, h: Some(h), source: Some(best.1 - (h - s)) })
            }
        }
    }

    /// Reads `T[s..j]` and tests every `h` from `j` down with an explicit
    /// pattern search.
    fn explicit_search(&mut self, s: usize, w: usize, j: usize) -> Result<TauFar> {
        let win = self.window(s, j)?;
        let pattern = ReversedPattern::new(&self.rope, &win);
        for h in (w..=j).rev() {
            let r = self.set.pattern_range(&self.rope, &pattern.sub(j - h, h - s + 1), self.set.full_range());
            if !r.is_empty() {
                let e = self.set.get(r.lo).end;
                return Ok(TauFar { holds: true, h: Some(h), source: Some(e - (h - s)) });
            }
        }
        Ok(TauFar::NO)
    }

    /// Binary search for `W = T[s..w-1]` over the merged trimmed ranges.
    /// Returns the range index and prefix end of an entry whose trimmed
    /// prefix ends with `W`.
    fn merged_search(&mut self, s: usize, w: usize, ranges: &[(SuffixRange, usize)]) -> Result<Option<(usize, usize)>> {
        let total: usize = ranges.iter().map(|(r, _)| r.len()).sum();
        let (mut lo, mut hi) = (1usize, total);
        while lo <= hi {
            let mid = lo + (hi - lo) / 2;
            let (k, idx) = self.set.select_kth_merged(&self.rope, ranges, mid)?;
            let e = self.set.get(idx).end;
            match self.place_w(s, w, e - ranges[k].1)? {
                Placement::Inside => return Ok(Some((k, e))),
                Placement::Below => lo = mid + 1,
                Placement::Above => {
                    if mid == 1 {
                        break;
                    }
                    hi = mid - 1
                }
            }
        }
        Ok(None)
    }

    /// Places the known prefix `T[1..q]` relative to `W = T[s..w-1]`.
    ///
    /// What earlier comparisons revealed about the end of `W` is reused:
    /// the part of the comparison that falls inside it is settled with free
    /// LCE queries on the known prefix, and only the rest goes to the oracle.
    fn place_w(&mut self, s: usize, w: usize, q: usize) -> Result<Placement> {
        let lw = w - s;
        let kn = match self.w_known {
            Some(k) if k.s == s && k.w == w => k,
            _ => WKnown { s, w, anchor: 0, matched: 0, next: None },
        };
        // symbols of W already read, contiguous from its right end
        let mut done = 0;
        while done < lw {
            let Some(&ws) = self.cache.get(&(w - 1 - done)) else { break };
            if done == q {
                return Ok(Placement::Below);
            }
            let ys = self.rope.text_symbol(q - done);
            if ys != ws {
                return Ok(if ys < ws { Placement::Below } else { Placement::Above });
            }
            done += 1;
        }
        if kn.matched > done {
            let l = if q == 0 { 0 } else { self.common_suffix(q, kn.anchor) };
            if l < kn.matched {
                if l >= q {
                    return Ok(Placement::Below);
                }
                let ys = self.rope.text_symbol(q - l);
                let ws = self.rope.text_symbol(kn.anchor - l);
                return Ok(if ys < ws { Placement::Below } else { Placement::Above });
            }
            done = kn.matched;
            if let Some(c) = kn.next.filter(|_| done < lw) {
                if q == done {
                    return Ok(Placement::Below);
                }
                let ys = self.rope.text_symbol(q - done);
                if ys != c {
                    return Ok(if ys < c { Placement::Below } else { Placement::Above });
                }
                done += 1;
            }
        }
        let rem = lw - done;
        if rem == 0 {
            return Ok(Placement::Inside);
        }
        let avail = q - done;
        if avail == 0 {
            return Ok(Placement::Below);
        }
        match self.gallop_mismatch(w - 1 - done, q - done, rem.min(avail))? {
            None => Ok(if rem <= avail { Placement::Inside } else { Placement::Below }),
            Some(k) => {
                let ws = self.sym(w - done - k)?;
                let xs = self.rope.text_symbol(q - done + 1 - k);
                if done + k - 1 >= kn.matched {
                    self.w_known = Some(WKnown { s, w, anchor: q, matched: done + k - 1, next: Some(ws) });
                }
                Ok(if xs < ws { Placement::Below } else { Placement::Above })
            }
        }
    }

    /// Common suffix length of the known prefixes `T[1..a]` and `T[1..b]`.
    fn common_suffix(&self, a: usize, b: usize) -> usize {
        let m = self.rope.len();
        self.rope.lce(m - a + 1, m - b + 1)
    }

    /// Rightmost mismatch of `T[i-l+1..i]` and `T[j-l+1..j]`, searched over
    /// segments of doubling length from the right so a mismatch at distance
    /// `k` costs about `sqrt(k)` instead of `sqrt(l)`.
    fn gallop_mismatch(&mut self, i: usize, j: usize, l: usize) -> Result<Option<usize>> {
        let mut covered = 0;
        let mut seg = 1;
        while covered < l {
            let len = seg.min(l - covered);
            if let Some(k) = self.oracle.rightmost_mismatch_amplified(i - covered, j - covered, len, self.t)? {
                return Ok(Some(covered + k));
            }
            covered += len;
            seg *= 2;
        }
        Ok(None)
    }

    /// Finds and records the next factor.
    pub fn next_factor(&mut self) -> Result<Factor> {
        let s = self.frontier;
        if s > self.n {
            return Err(Error::InvalidArgument("text already factorized".into()));
        }
        self.cache.clear();
        let first = self.sym(s)?;
        if !self.known.contains(&first) {
            self.known.insert(first);
            self.rope.prepend_char(first);
            self.commit(s, s, Factor::Literal(first))?;
            return Ok(Factor::Literal(first));
        }
        // holds trivially while the window still contains s
        let mut good = (s + self.tau).min(self.n);
        let mut bad = None;
        let mut step = 1;
        while good < self.n {
            let j = (good + step).min(self.n);
            if self.evaluate(j, false)?.holds {
                good = j;
                step *= 2;
            } else {
                bad = Some(j);
                break;
            }
        }
        if let Some(mut hi) = bad {
            // largest holding j lies in [good, hi - 1]
            hi -= 1;
            while good < hi {
                let mid = good + (hi - good).div_ceil(2);
                if self.evaluate(mid, false)?.holds {
                    good = mid;
                } else {
                    hi = mid - 1;
                }
            }
        }
        let far = self.evaluate(good, true)?;
        let (Some(h), Some(src)) = (far.h, far.source) else {
            return Err(Error::InvalidArgument(format!("no potential factor found at {s}")));
        };
        let len = h - s + 1;
        let m = s - 1;
        let y = src + len - 1;
        self.rope.prepend_copy(m - y + 1, m - src + 1)?;
        let f = Factor::Reference { source: src, len };
        self.commit(s, h, f)?;
        Ok(f)
    }

    fn commit(&mut self, s: usize, h: usize, f: Factor) -> Result<()> {
        self.fact.factors.push(f);
        self.frontier = h + 1;
        let first_mod = s + (self.tau - (s - 1) % self.tau) % self.tau;
        for k in (first_mod..=h).step_by(self.tau) {
            self.set.insert_or_mark(&self.rope, k, k == h)?;
        }
        self.set.insert_or_mark(&self.rope, h, true)
    }
}

/// LZ-End+tau factorization through the oracle. Stops early once more than
/// `z_cap` factors exist.
pub fn factorize(oracle: &mut TextOracle, config: &FactorizeConfig) -> Result<Factorized> {
    let mut st = FactorizerState::new(oracle, config)?;
    while !st.is_done() {
        st.next_factor()?;
        if config.z_cap.is_some_and(|cap| st.fact.len() > cap) {
            return Ok(Factorized::Capped(st.into_factorization()));
        }
    }
    Ok(Factorized::Complete(st.into_factorization()))
}

/// One round of [`factorize_adaptive`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdaptiveRound {
    pub z_guess: usize,
    pub tau: usize,
    pub factors: usize,
    pub complete: bool,
    pub queries: u64,
}

#[derive(Clone, Debug)]
pub struct AdaptiveReport {
    pub factorization: Factorization,
    pub rounds: Vec<AdaptiveRound>,
}

impl AdaptiveReport {
    pub fn z_guess(&self) -> usize {
        self.rounds.last().map_or(1, |r| r.z_guess)
    }
}

/// Smallest power of two at least `ceil(sqrt(n / z))`.
pub fn tau_for_guess(n: usize, z_guess: usize) -> usize {
    let ratio = n.div_ceil(z_guess.max(1)) as u64;
    (ceil_sqrt(ratio).max(1) as usize).next_power_of_two()
}

/// Runs capped factorizations with `z_guess = 1, 2, 4, ...` until one
/// completes. Queries accumulate on the oracle's ledger.
pub fn factorize_adaptive(oracle: &mut TextOracle, strategy: Strategy) -> Result<AdaptiveReport> {
    let n = oracle.len();
    let mut z_guess = 1usize;
    let mut rounds = Vec::new();
    loop {
        let tau = tau_for_guess(n, z_guess);
        let before = oracle.ledger().total();
        let cfg = FactorizeConfig::new(tau).with_cap(z_guess).with_strategy(strategy);
        let out = factorize(oracle, &cfg)?;
        let complete = out.is_complete();
        rounds.push(AdaptiveRound {
            z_guess,
            tau,
            factors: out.factorization().len(),
            complete,
            queries: oracle.ledger().total() - before,
        });
        if complete {
            return Ok(AdaptiveReport { factorization: out.into_factorization(), rounds });
        }
        z_guess *= 2;
    }
}

/// Non-overlapping LZ77 using the full co-lex prefix set and amplified
/// rightmost-mismatch comparisons.
pub fn factorize_near_linear(oracle: &mut TextOracle) -> Result<Factorization> {
    let n = oracle.len();
    let t = repetitions(n);
    let mut fact = Factorization::new(FactorKind::Lz77NonOverlap, None);
    let mut rope = HashedRope::default();
    let mut set = PrefixSet::new();
    let mut known: HashSet<Symbol> = HashSet::new();
    let mut s = 1;
    while s <= n {
        let mut cache: HashMap<usize, Symbol> = HashMap::new();
        let c = oracle.read(s)?;
        cache.insert(s, c);
        if known.insert(c) {
            rope.prepend_char(c);
            set.insert(&rope, s, true)?;
            fact.factors.push(Factor::Literal(c));
            s += 1;
            continue;
        }
        // witness end of an earlier occurrence of T[s..s+len-1], if any
        let mut check = |len: usize| -> Result<Option<usize>> {
            let (mut lo, mut hi) = (1usize, set.len());
            while lo <= hi {
                let mid = lo + (hi - lo) / 2;
                let q = set.get(mid).end;
                let l = len.min(q);
                let place = match oracle.rightmost_mismatch_amplified(s + len - 1, q, l, t)? {
                    None if len <= q => Placement::Inside,
                    None => Placement::Below,
                    Some(k) => {
                        let p = s + len - k;
                        let ps = match cache.get(&p) {
                            Some(&x) => x,
                            None => {
                                let x = oracle.read(p)?;
                                cache.insert(p, x);
                                x
                            }
                        };
                        if rope.text_symbol(q + 1 - k) < ps { Placement::Below } else { Placement::Above }
                    }
                };
                match place {
                    Placement::Inside => return Ok(Some(q)),
                    Placement::Below => lo = mid + 1,
                    Placement::Above if mid == 1 => break,
                    Placement::Above => hi = mid - 1,
                }
            }
            Ok(None)
        };
        let cap = (s - 1).min(n + 1 - s);
        let mut good = (1usize, check(1)?.expect("repeated symbol occurs earlier"));
        let mut bad = cap + 1;
        let mut step = 1;
        while good.0 < cap {
            let len = (good.0 + step).min(cap);
            match check(len)? {
                Some(q) => {
                    good = (len, q);
                    step *= 2;
                }
                None => {
                    bad = len;
                    break;
                }
            }
        }
        let mut hi = bad - 1;
        while good.0 < hi {
            let mid = good.0 + (hi - good.0).div_ceil(2);
            match check(mid)? {
                Some(q) => good = (mid, q),
                None => hi = mid - 1,
            }
        }
        let (len, q) = good;
        let src = q + 1 - len;
        let m = s - 1;
        rope.prepend_copy(m - q + 1, m - src + 1)?;
        for e in s..s + len {
            set.insert(&rope, e, e == s + len - 1)?;
        }
        fact.factors.push(Factor::Reference { source: src, len });
        s += len;
    }
    Ok(fact)
}

/// Outcome of [`halving_recover`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalvingReport {
    pub text: Vec<Symbol>,
    pub queries: u64,
    /// Candidate-set size before and after every round that found a mismatch.
    pub mismatch_rounds: Vec<(usize, usize)>,
    pub initial_candidates: usize,
}

/// Recovers a binary text known to have at most `z_max` LZ77 factors by
/// repeatedly searching for a mismatch against the majority string of the
/// remaining candidates.
///
/// Searches run only over positions where candidates still disagree. A
/// search is attempted only while its cost plus a direct read of all those
/// positions fits within `n` queries; otherwise the positions are read, so
/// the total never exceeds `n`.
pub fn halving_recover(oracle: &mut TextOracle, z_max: usize) -> Result<HalvingReport> {
    let n = oracle.len();
    if n == 0 || n > 16 || z_max == 0 || z_max > 4 {
        return Err(Error::InvalidArgument(format!("halving needs 1 <= n <= 16 and 1 <= z_max <= 4, got n={n}, z_max={z_max}")));
    }
    let start = oracle.ledger().total();
    let mut cands: Vec<Vec<Symbol>> = (0u32..1 << n)
        .map(|bits| (0..n).map(|i| (bits >> (n - 1 - i)) & 1).collect::<Vec<Symbol>>())
        .filter(|t| lz77_greedy(t).len() <= z_max)
        .collect();
    let initial = cands.len();
    let mut rounds = Vec::new();
    loop {
        if cands.is_empty() {
            return Err(Error::CandidatesExhausted { z_max });
        }
        let ones: Vec<usize> = (0..n).map(|i| cands.iter().filter(|c| c[i] == 1).count()).collect();
        let majority: Vec<Symbol> = ones.iter().map(|&o| Symbol::from(2 * o >= cands.len())).collect();
        let open: Vec<usize> = (1..=n).filter(|&i| ones[i - 1] != 0 && ones[i - 1] != cands.len()).collect();
        if open.is_empty() {
            break;
        }
        let used = oracle.ledger().total() - start;
        let search = oracle.sqrt_charge(open.len());
        if used + search + open.len() as u64 <= n as u64 {
            let maj = majority.clone();
            let hit = oracle.grover_any_over(&open, move |i, v| v.get(i) != maj[i - 1], 1)?;
            match hit {
                Some(i) => {
                    let before = cands.len();
                    let bit = 1 - majority[i - 1];
                    cands.retain(|c| c[i - 1] == bit);
                    rounds.push((before, cands.len()));
                }
                None => {
                    cands.retain(|c| open.iter().all(|&i| c[i - 1] == majority[i - 1]));
                    break;
                }
            }
        } else {
            for &i in &open {
                let bit = oracle.read(i)?;
                cands.retain(|c| c[i - 1] == bit);
            }
        }
    }
    let text = cands.into_iter().next().ok_or(Error::CandidatesExhausted { z_max })?;
    Ok(HalvingReport { text, queries: oracle.ledger().total() - start, mismatch_rounds: rounds, initial_candidates: initial })
}
