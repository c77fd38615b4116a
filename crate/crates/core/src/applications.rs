//! String problems answered from the compressed index: longest common
//! substring, maximal unique matches, Lyndon factorization, q-gram counts,
//! longest repeat and shortest unique substring.
//!
//! Each problem has an oracle entry point, which recovers the text through
//! the query-counted factorizer and indexes it, and an index-level function
//! doing the actual work.

use crate::compressed_index::CompressedIndex;
use crate::error::Result;
use crate::lz_end_tau::{factorize_adaptive, Strategy};
use crate::quantum_sim::{repetitions, Symbol, TextOracle, SENTINEL};
use crate::reference_kit::{bwt, decompress, Rlbwt};

/// Separator between the two strings of a joined text.
pub const SEPARATOR: Symbol = 1;

/// Recovers the oracle's text with the adaptive factorizer, dropping a
/// trailing sentinel.
pub fn recover_text(oracle: &mut TextOracle) -> Result<Vec<Symbol>> {
    let rep = factorize_adaptive(oracle, Strategy::default())?;
    let mut t = decompress(&rep.factorization)?;
    if oracle.is_sentinel_terminated() {
        t.pop();
    }
    Ok(t)
}

/// Compressed index over `shift(T) $`, with symbols moved up by `shift`.
pub struct TextIndex {
    n: usize,
    index: CompressedIndex,
}

impl TextIndex {
    /// Indexes `text` (sentinel-free; any symbols).
    pub fn new(text: &[Symbol]) -> Result<Self> {
        let t: Vec<Symbol> = text.iter().map(|&c| c + 1).chain(std::iter::once(SENTINEL)).collect();
        Self::from_terminated(t)
    }

    fn from_terminated(t: Vec<Symbol>) -> Result<Self> {
        let rl = Rlbwt::from_bwt(&bwt(&t)?);
        Ok(TextIndex { n: t.len() - 1, index: CompressedIndex::build(rl)? })
    }

    /// Text length without the sentinel.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn index(&self) -> &CompressedIndex {
        &self.index
    }

    fn sa(&self, i: usize) -> usize {
        self.index.gagie.sa(i).expect("rank in range")
    }

    fn isa(&self, p: usize) -> usize {
        self.index.shortcut.isa_query(p).expect("position in range")
    }

    fn lce(&self, a: usize, b: usize) -> usize {
        self.index.shortcut.lce(a, b)
    }

    /// Ranks `i` such that `i + 1` starts a BWT run.
    fn run_boundaries(&self) -> Vec<usize> {
        let rl = self.index.shortcut.rlbwt();
        (1..rl.r()).map(|k| rl.run_start(k) - 1).collect()
    }
}

/// A match `A[pos1..pos1+len-1] = B[pos2..pos2+len-1]`; positions are 0
/// when `len` is 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Match {
    pub len: usize,
    pub pos1: usize,
    pub pos2: usize,
}

impl Match {
    const NONE: Match = Match { len: 0, pos1: 0, pos2: 0 };
}

/// `S1 # S2 $` with the separator below every string symbol.
pub struct JoinedText {
    pub len1: usize,
    pub len2: usize,
    pub index: TextIndex,
}

impl JoinedText {
    pub fn new(s1: &[Symbol], s2: &[Symbol]) -> Result<Self> {
        let t: Vec<Symbol> = s1
            .iter()
            .map(|&c| c + 2)
            .chain(std::iter::once(SEPARATOR))
            .chain(s2.iter().map(|&c| c + 2))
            .chain(std::iter::once(SENTINEL))
            .collect();
        Ok(JoinedText { len1: s1.len(), len2: s2.len(), index: TextIndex::from_terminated(t)? })
    }

    /// Position of the separator.
    pub fn boundary(&self) -> usize {
        self.len1 + 1
    }

    /// `Some(1)` or `Some(2)` for a suffix starting inside S1 or S2.
    pub fn side(&self, p: usize) -> Option<u8> {
        if p <= self.len1 {
            Some(1)
        } else if p > self.boundary() && p <= self.boundary() + self.len2 {
            Some(2)
        } else {
            None
        }
    }

    /// Orders a cross-side pair as `(S1 position, S2 position)` in string
    /// coordinates.
    fn split(&self, a: usize, b: usize) -> Option<(usize, usize)> {
        match (self.side(a)?, self.side(b)?) {
            (1, 2) => Some((a, b - self.boundary())),
            (2, 1) => Some((b, a - self.boundary())),
            _ => None,
        }
    }
}

pub fn longest_common_substring(o1: &mut TextOracle, o2: &mut TextOracle) -> Result<Match> {
    let s1 = recover_text(o1)?;
    let s2 = recover_text(o2)?;
    Ok(lcs_of(&JoinedText::new(&s1, &s2)?))
}

/// The best cross-side pair of SA neighbours. Only run boundaries need
/// checking: equal BWT symbols on both sides would extend the match left.
pub fn lcs_of(j: &JoinedText) -> Match {
    let idx = &j.index;
    let mut best = Match::NONE;
    for i in idx.run_boundaries() {
        let (a, b) = (idx.sa(i), idx.sa(i + 1));
        if let Some((p1, p2)) = j.split(a, b) {
            let l = idx.lce(a, b);
            if l > best.len || (l == best.len && l > 0 && (p1, p2) < (best.pos1, best.pos2)) {
                best = Match { len: l, pos1: p1, pos2: p2 };
            }
        }
    }
    best
}

pub fn maximal_unique_matches(o1: &mut TextOracle, o2: &mut TextOracle) -> Result<Vec<Match>> {
    let s1 = recover_text(o1)?;
    let s2 = recover_text(o2)?;
    Ok(mums_of(&JoinedText::new(&s1, &s2)?))
}

/// Cross-side SA neighbours with different BWT symbols whose common prefix
/// is strictly longer than either outer neighbour's. Sorted by S1 position.
pub fn mums_of(j: &JoinedText) -> Vec<Match> {
    let idx = &j.index;
    let total = idx.n + 1;
    let mut out = Vec::new();
    for i in idx.run_boundaries() {
        let (a, b) = (idx.sa(i), idx.sa(i + 1));
        let Some((p1, p2)) = j.split(a, b) else { continue };
        let l = idx.lce(a, b);
        if l == 0 {
            continue;
        }
        let left = if i > 1 { idx.lce(idx.sa(i - 1), a) } else { 0 };
        let right = if i + 2 <= total { idx.lce(b, idx.sa(i + 2)) } else { 0 };
        if l > left && l > right {
            out.push(Match { len: l, pos1: p1, pos2: p2 });
        }
    }
    out.sort_by_key(|m| (m.pos1, m.pos2));
    out
}

/// Lyndon factor starts and the Grover cost spent finding them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LyndonReport {
    pub starts: Vec<usize>,
    pub search_cost: u64,
}

/// Ledger phase used for the Lyndon searches.
pub const LYNDON_PHASE: &str = "lyndon";

/// Lyndon factorization through the oracle: recover and index the text,
/// then find each next factor start as the leftmost later position with a
/// smaller ISA value.
pub fn lyndon_factorization(oracle: &mut TextOracle) -> Result<LyndonReport> {
    let text = recover_text(oracle)?;
    let idx = TextIndex::new(&text)?;
    lyndon_with(oracle, &idx)
}

/// The search part alone; `oracle` only hosts the Grover calls and their
/// charges, and must be at least as long as the indexed text.
pub fn lyndon_with(oracle: &mut TextOracle, idx: &TextIndex) -> Result<LyndonReport> {
    let n = idx.len();
    let prev = oracle.set_phase(LYNDON_PHASE);
    let before = oracle.ledger().phase(LYNDON_PHASE);
    let t = repetitions(n.max(2));
    let mut starts = Vec::new();
    let mut i = 1;
    let res = (|| -> Result<()> {
        while i <= n {
            starts.push(i);
            if i == n {
                break;
            }
            let key = idx.isa(i);
            let mut exists = |a: usize, b: usize| -> Result<bool> {
                let call = oracle.prepare_grover_any(a, b, |x, _| idx.isa(x) < key, 1)?;
                Ok(oracle.amplify(&call, t).is_some())
            };
            // exponential search for a range holding a witness
            let mut w = 1;
            let hi = loop {
                let hi = (i + w).min(n);
                if exists(i + 1, hi)? {
                    break Some(hi);
                }
                if hi == n {
                    break None;
                }
                w *= 2;
            };
            let Some(mut hi) = hi else { break };
            let mut lo = (i + w / 2 + 1).min(hi);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if exists(lo, mid)? {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            i = lo;
        }
        Ok(())
    })();
    oracle.set_phase(&prev);
    res?;
    let search_cost = oracle.ledger().phase(LYNDON_PHASE) - before;
    Ok(LyndonReport { starts, search_cost })
}

/// One q-gram: first occurrence in SA order and its count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qgram {
    pub pos: usize,
    pub count: usize,
}

pub fn qgram_frequencies(oracle: &mut TextOracle, q: usize) -> Result<Vec<Qgram>> {
    let text = recover_text(oracle)?;
    Ok(qgrams_of(&TextIndex::new(&text)?, q))
}

/// Splits the suffix array into maximal ranges sharing a length-`q` prefix,
/// skipping suffixes shorter than `q`.
pub fn qgrams_of(idx: &TextIndex, q: usize) -> Vec<Qgram> {
    let n = idx.len();
    if q == 0 || q > n {
        return Vec::new();
    }
    let total = n + 1;
    let mut out = Vec::new();
    let mut i = 1;
    while i <= total {
        let p = idx.sa(i);
        if p + q - 1 > n {
            i += 1;
            continue;
        }
        let shares = |j: usize| j <= total && idx.lce(p, idx.sa(j)) >= q;
        let mut step = 1;
        let mut good = i;
        while shares(i + step) {
            good = i + step;
            step *= 2;
        }
        let mut hi = (i + step).min(total + 1);
        let mut lo = good;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if shares(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(Qgram { pos: p, count: lo - i + 1 });
        i = lo + 1;
    }
    out
}

pub fn longest_repeating_substring(oracle: &mut TextOracle) -> Result<Match> {
    let text = recover_text(oracle)?;
    Ok(longest_repeat_of(&TextIndex::new(&text)?))
}

/// Longest common prefix of SA neighbours, checked at run boundaries only.
/// Positions are reported in increasing order.
pub fn longest_repeat_of(idx: &TextIndex) -> Match {
    let mut best = Match::NONE;
    for i in idx.run_boundaries() {
        let (a, b) = (idx.sa(i), idx.sa(i + 1));
        let l = idx.lce(a, b);
        let (p1, p2) = (a.min(b), a.max(b));
        if l > best.len || (l == best.len && l > 0 && (p1, p2) < (best.pos1, best.pos2)) {
            best = Match { len: l, pos1: p1, pos2: p2 };
        }
    }
    best
}

/// `(length, position)` of a shortest substring occurring exactly once,
/// leftmost among the shortest.
pub fn shortest_unique_substring(oracle: &mut TextOracle) -> Result<(usize, usize)> {
    let text = recover_text(oracle)?;
    Ok(sus_of(&TextIndex::new(&text)?))
}

pub fn sus_of(idx: &TextIndex) -> (usize, usize) {
    let n = idx.len();
    let total = n + 1;
    let sa: Vec<usize> = (1..=total).map(|i| idx.sa(i)).collect();
    let adj: Vec<usize> = sa.windows(2).map(|w| idx.lce(w[0], w[1])).collect();
    let mut best = (usize::MAX, 0);
    for (r, &p) in sa.iter().enumerate() {
        if p > n {
            continue;
        }
        let left = if r > 0 { adj[r - 1] } else { 0 };
        let right = adj.get(r).copied().unwrap_or(0);
        let l = left.max(right) + 1;
        if p + l - 1 <= n && (l, p) < best {
            best = (l, p);
        }
    }
    if best.0 == usize::MAX {
        (0, 0)
    } else {
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference_kit::{duval_lyndon, symbols_from_bytes};
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn sym(s: &str) -> Vec<Symbol> {
        symbols_from_bytes(s.as_bytes())
    }

    fn lcs_dp(a: &[Symbol], b: &[Symbol]) -> usize {
        let mut prev = vec![0usize; b.len() + 1];
        let mut best = 0;
        for i in 1..=a.len() {
            let mut cur = vec![0usize; b.len() + 1];
            for j in 1..=b.len() {
                if a[i - 1] == b[j - 1] {
                    cur[j] = prev[j - 1] + 1;
                    best = best.max(cur[j]);
                }
            }
            prev = cur;
        }
        best
    }

    fn count(hay: &[Symbol], pat: &[Symbol]) -> usize {
        hay.windows(pat.len()).filter(|w| *w == pat).count()
    }

    fn mums_brute(a: &[Symbol], b: &[Symbol]) -> Vec<Match> {
        let mut out = Vec::new();
        for i in 0..a.len() {
            for j in 0..b.len() {
                if i > 0 && j > 0 && a[i - 1] == b[j - 1] {
                    continue;
                }
                let l = a[i..].iter().zip(&b[j..]).take_while(|(x, y)| x == y).count();
                if l > 0 && count(a, &a[i..i + l]) == 1 && count(b, &a[i..i + l]) == 1 {
                    out.push(Match { len: l, pos1: i + 1, pos2: j + 1 });
                }
            }
        }
        out.sort_by_key(|m| (m.pos1, m.pos2));
        out
    }

    fn qgram_counts(t: &[Symbol], q: usize) -> HashMap<Vec<Symbol>, usize> {
        let mut m = HashMap::new();
        if q >= 1 && q <= t.len() {
            for w in t.windows(q) {
                *m.entry(w.to_vec()).or_insert(0) += 1;
            }
        }
        m
    }

    fn qgram_map(t: &[Symbol], q: usize) -> HashMap<Vec<Symbol>, usize> {
        let idx = TextIndex::new(t).unwrap();
        qgrams_of(&idx, q).into_iter().map(|g| (t[g.pos - 1..g.pos - 1 + q].to_vec(), g.count)).collect()
    }

    fn repeat_brute(t: &[Symbol]) -> usize {
        let n = t.len();
        (1..=n).rev().find(|&l| (0..=n - l).any(|i| count(t, &t[i..i + l]) > 1)).unwrap_or(0)
    }

    fn sus_brute(t: &[Symbol]) -> (usize, usize) {
        for l in 1..=t.len() {
            if let Some(i) = (0..=t.len() - l).find(|&i| count(t, &t[i..i + l]) == 1) {
                return (l, i + 1);
            }
        }
        (0, 0)
    }

    #[test]
    fn lcs_examples() {
        let j = JoinedText::new(&sym("abab"), &sym("bab")).unwrap();
        let m = lcs_of(&j);
        assert_eq!(m.len, 3);
        assert_eq!((m.pos1, m.pos2), (2, 1));
        assert_eq!(lcs_of(&JoinedText::new(&sym("abc"), &sym("abc")).unwrap()).len, 3);
        assert_eq!(lcs_of(&JoinedText::new(&sym("aaa"), &sym("bbb")).unwrap()), Match::NONE);
    }

    #[test]
    fn lcs_through_oracles() {
        let mut o1 = TextOracle::new(sym("abab")).unwrap();
        let mut o2 = TextOracle::new(sym("bab")).unwrap();
        assert_eq!(longest_common_substring(&mut o1, &mut o2).unwrap().len, 3);
        assert!(o1.ledger().total() > 0);
    }

    #[test]
    fn mum_examples() {
        // "a" at the end of S2 is unique and cannot extend either
        let m = mums_of(&JoinedText::new(&sym("acgt"), &sym("cgta")).unwrap());
        assert_eq!(m, vec![Match { len: 1, pos1: 1, pos2: 4 }, Match { len: 3, pos1: 2, pos2: 1 }]);
        assert_eq!(m, mums_brute(&sym("acgt"), &sym("cgta")));
        let m = mums_of(&JoinedText::new(&sym("ab"), &sym("ab")).unwrap());
        assert_eq!(m, vec![Match { len: 2, pos1: 1, pos2: 1 }]);
        assert!(mums_of(&JoinedText::new(&sym("aa"), &sym("bb")).unwrap()).is_empty());
    }

    #[test]
    fn lyndon_examples() {
        for (s, want) in [("banana", vec![1, 2, 4, 6]), ("aaa", vec![1, 2, 3]), ("abc", vec![1])] {
            let mut o = TextOracle::new(sym(s)).unwrap();
            let rep = lyndon_factorization(&mut o).unwrap();
            assert_eq!(rep.starts, want, "{s}");
            assert_eq!(o.ledger().phase(LYNDON_PHASE), rep.search_cost);
        }
    }

    #[test]
    fn qgram_examples() {
        let t = sym("mississippi");
        let got = qgram_map(&t, 2);
        assert_eq!(got.len(), 7);
        assert_eq!(got, qgram_counts(&t, 2));
        assert_eq!(got[&sym("ss")], 2);
        assert_eq!(qgram_map(&sym("aaa"), 1), HashMap::from([(sym("a"), 3)]));
        assert_eq!(qgram_map(&t, 11), HashMap::from([(t.clone(), 1)]));
        assert!(qgram_map(&t, 12).is_empty());
    }

    #[test]
    fn repeat_and_sus_examples() {
        let idx = TextIndex::new(&sym("mississippi")).unwrap();
        let m = longest_repeat_of(&idx);
        assert_eq!((m.len, m.pos1, m.pos2), (4, 2, 5));
        assert_eq!(sus_of(&idx), (1, 1));
        let idx = TextIndex::new(&sym("ab")).unwrap();
        assert_eq!(longest_repeat_of(&idx).len, 0);
        assert_eq!(sus_of(&idx).0, 1);
        let mut o = TextOracle::new(sym("mississippi")).unwrap();
        assert_eq!(shortest_unique_substring(&mut o).unwrap(), (1, 1));
        let mut o = TextOracle::new(sym("mississippi")).unwrap();
        assert_eq!(longest_repeating_substring(&mut o).unwrap().len, 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn lcs_matches_dp(a in prop::collection::vec(0u32..3, 1..60), b in prop::collection::vec(0u32..3, 1..60)) {
            let m = lcs_of(&JoinedText::new(&a, &b).unwrap());
            prop_assert_eq!(m.len, lcs_dp(&a, &b));
            if m.len > 0 {
                prop_assert_eq!(&a[m.pos1 - 1..m.pos1 - 1 + m.len], &b[m.pos2 - 1..m.pos2 - 1 + m.len]);
            }
        }

        #[test]
        fn mums_match_brute_force(a in prop::collection::vec(0u32..3, 1..30), b in prop::collection::vec(0u32..3, 1..30)) {
            prop_assert_eq!(mums_of(&JoinedText::new(&a, &b).unwrap()), mums_brute(&a, &b));
        }

        #[test]
        fn lyndon_matches_duval(t in prop::collection::vec(0u32..3, 1..80)) {
            let idx = TextIndex::new(&t).unwrap();
            let mut o = TextOracle::new(t.clone()).unwrap();
            prop_assert_eq!(lyndon_with(&mut o, &idx).unwrap().starts, duval_lyndon(&t));
        }

        #[test]
        fn qgrams_match_hash_count(t in prop::collection::vec(0u32..3, 1..80), q in 1usize..6) {
            let got = qgram_map(&t, q);
            prop_assert_eq!(got.values().sum::<usize>(), t.len().saturating_sub(q - 1));
            prop_assert_eq!(got, qgram_counts(&t, q));
        }

        #[test]
        fn repeat_and_sus_match_brute(t in prop::collection::vec(0u32..3, 1..60)) {
            let idx = TextIndex::new(&t).unwrap();
            prop_assert_eq!(longest_repeat_of(&idx).len, repeat_brute(&t));
            prop_assert_eq!(sus_of(&idx), sus_brute(&t));
        }
    }
}
