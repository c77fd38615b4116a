//! Conversions from a finished LZ-End+τ parse to LZ77 and to the run-length
//! BWT. Both work on the decompressed text and never touch the oracle.

use crate::error::{Error, Result};
use crate::quantum_sim::{Symbol, TextOracle, SENTINEL};
use crate::reference_kit::{decompress, Factor, FactorKind, Factorization, Rlbwt, SparseMin};

/// SA-IS over an integer alphabet `0..k`. `s` must end with a unique 0.
fn sais(s: &[usize], k: usize) -> Vec<usize> {
    let n = s.len();
    if n == 1 {
        return vec![0];
    }
    // true = S-type
    let mut stype = vec![false; n];
    stype[n - 1] = true;
    for i in (0..n - 1).rev() {
        stype[i] = s[i] < s[i + 1] || (s[i] == s[i + 1] && stype[i + 1]);
    }
    let is_lms = |i: usize| i > 0 && stype[i] && !stype[i - 1];

    let mut counts = vec![0usize; k];
    for &c in s {
        counts[c] += 1;
    }
    let heads = |counts: &[usize]| {
        let mut h = vec![0usize; counts.len()];
        let mut sum = 0;
        for (c, &v) in counts.iter().enumerate() {
            h[c] = sum;
            sum += v;
        }
        h
    };
    let tails = |counts: &[usize]| {
        let mut t = vec![0usize; counts.len()];
        let mut sum = 0;
        for (c, &v) in counts.iter().enumerate() {
            sum += v;
            t[c] = sum;
        }
        t
    };
    const EMPTY: usize = usize::MAX;

    let induce = |sa: &mut Vec<usize>| {
        let mut h = heads(&counts);
        for r in 0..n {
            let j = sa[r];
            if j != EMPTY && j > 0 && !stype[j - 1] {
                let c = s[j - 1];
                sa[h[c]] = j - 1;
                h[c] += 1;
            }
        }
        let mut t = tails(&counts);
        for r in (0..n).rev() {
            let j = sa[r];
            if j != EMPTY && j > 0 && stype[j - 1] {
                let c = s[j - 1];
                t[c] -= 1;
                sa[t[c]] = j - 1;
            }
        }
    };

    // step 1: sort LMS substrings
    let mut sa = vec![EMPTY; n];
    let mut t = tails(&counts);
    for i in (0..n).rev() {
        if is_lms(i) {
            let c = s[i];
            t[c] -= 1;
            sa[t[c]] = i;
        }
    }
    induce(&mut sa);

    // step 2: name LMS substrings
    let lms_sorted: Vec<usize> = sa.iter().copied().filter(|&i| is_lms(i)).collect();
    let mut name_of = vec![EMPTY; n];
    let mut name = 0usize;
    let mut prev: Option<usize> = None;
    for &p in &lms_sorted {
        let differs = match prev {
            None => true,
            Some(q) => {
                let mut d = 0;
                loop {
                    if s[p + d] != s[q + d] || stype[p + d] != stype[q + d] {
                        break true;
                    }
                    if d > 0 && (is_lms(p + d) || is_lms(q + d)) {
                        break !(is_lms(p + d) && is_lms(q + d));
                    }
                    d += 1;
                }
            }
        };
        if differs {
            name += 1;
        }
        name_of[p] = name - 1;
        prev = Some(p);
    }
    let lms_pos: Vec<usize> = (0..n).filter(|&i| is_lms(i)).collect();
    let reduced: Vec<usize> = lms_pos.iter().map(|&p| name_of[p]).collect();

    // step 3: sort the LMS suffixes, recursing when names repeat
    let order: Vec<usize> = if name < reduced.len() {
        sais(&reduced, name)
    } else {
        let mut o = vec![0; reduced.len()];
        for (i, &v) in reduced.iter().enumerate() {
            o[v] = i;
        }
        o
    };

    // step 4: induce the full order from sorted LMS suffixes
    let mut sa = vec![EMPTY; n];
    let mut t = tails(&counts);
    for &o in order.iter().rev() {
        let p = lms_pos[o];
        let c = s[p];
        t[c] -= 1;
        sa[t[c]] = p;
    }
    induce(&mut sa);
    sa
}

/// 1-based suffix array of any symbol sequence; a suffix that is a prefix of
/// another sorts first.
pub fn sort_suffixes(text: &[Symbol]) -> Vec<usize> {
    let mut s: Vec<usize> = text.iter().map(|&c| c as usize + 1).collect();
    s.push(0);
    let k = s.iter().copied().max().unwrap_or(0) + 1;
    // dense alphabet keeps bucket arrays small for sparse symbol sets
    let k = if k > 2 * s.len() + 2 {
        let mut syms = s.clone();
        syms.sort_unstable();
        syms.dedup();
        for c in s.iter_mut() {
            *c = syms.binary_search(c).unwrap();
        }
        syms.len()
    } else {
        k
    };
    sais(&s, k).into_iter().skip(1).map(|p| p + 1).collect()
}

/// Kasai: `lcp[r]` is the common prefix length of the suffixes at ranks
/// `r` and `r + 1` (0-based ranks), last entry 0.
pub fn adjacent_lcp(text: &[Symbol], sa: &[usize]) -> Vec<usize> {
    let n = text.len();
    let mut rank = vec![0usize; n];
    for (r, &p) in sa.iter().enumerate() {
        rank[p - 1] = r;
    }
    let mut lcp = vec![0usize; n];
    let mut h = 0usize;
    for i in 0..n {
        let r = rank[i];
        if r + 1 < n {
            let j = sa[r + 1] - 1;
            while i + h < n && j + h < n && text[i + h] == text[j + h] {
                h += 1;
            }
            lcp[r] = h;
            h = h.saturating_sub(1);
        } else {
            h = 0;
        }
    }
    lcp
}

/// Suffix array with range minima over LCP and over positions, answering
/// leftmost-occurrence queries for substrings of the indexed text.
pub struct LeftmostOccurrenceIndex {
    n: usize,
    sa: Vec<usize>,
    rank: Vec<usize>,
    lcp: SparseMin,
    pos: SparseMin,
}

impl LeftmostOccurrenceIndex {
    pub fn new(text: &[Symbol]) -> Self {
        let sa = sort_suffixes(text);
        let lcp = adjacent_lcp(text, &sa);
        let mut rank = vec![0; text.len()];
        for (r, &p) in sa.iter().enumerate() {
            rank[p - 1] = r;
        }
        let pos = SparseMin::new(sa.clone());
        LeftmostOccurrenceIndex { n: text.len(), sa, rank, lcp: SparseMin::new(lcp), pos }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn suffix_array(&self) -> &[usize] {
        &self.sa
    }

    /// Inclusive 0-based rank interval of suffixes sharing at least `len`
    /// symbols with the suffix at `a`.
    pub fn interval(&self, a: usize, len: usize) -> (usize, usize) {
        let r = self.rank[a - 1];
        // leftmost lo with min lcp[lo..r-1] >= len
        let (mut lo, mut hi_l) = (0, r);
        while lo < hi_l {
            let mid = (lo + hi_l) / 2;
            if self.lcp.min(mid, r - 1) >= len {
                hi_l = mid;
            } else {
                lo = mid + 1;
            }
        }
        let (mut lo_r, mut hi) = (r, self.n - 1);
        while lo_r < hi {
            let mid = (lo_r + hi).div_ceil(2);
            if self.lcp.min(r, mid - 1) >= len {
                lo_r = mid;
            } else {
                hi = mid - 1;
            }
        }
        (lo, lo_r)
    }

    /// Leftmost start of an occurrence of `T[a..b]`.
    pub fn leftmost(&self, a: usize, b: usize) -> Result<usize> {
        if a == 0 || b < a || b > self.n {
            return Err(Error::EmptyRange { a, b });
        }
        let (lo, hi) = self.interval(a, b - a + 1);
        Ok(self.pos.min(lo, hi))
    }
}

/// Greedy LZ77 rebuilt from any factorization by exponential search on the
/// factor length with leftmost-occurrence queries.
pub fn to_lz77(f: &Factorization) -> Result<Factorization> {
    let text = decompress(f)?;
    Ok(lz77_from_text(&text))
}

fn lz77_from_text(text: &[Symbol]) -> Factorization {
    let mut out = Factorization::new(FactorKind::Lz77, None);
    let n = text.len();
    if n == 0 {
        return out;
    }
    let idx = LeftmostOccurrenceIndex::new(text);
    // length l is copyable at i iff the leftmost occurrence of T[i..i+l-1] starts before i
    let src = |i: usize, l: usize| -> Option<usize> {
        let p = idx.leftmost(i, i + l - 1).expect("inside text");
        (p < i).then_some(p)
    };
    let mut i = 1;
    while i <= n {
        if src(i, 1).is_none() {
            out.factors.push(Factor::Literal(text[i - 1]));
            i += 1;
            continue;
        }
        let cap = n + 1 - i;
        let mut good = 1;
        let mut step = 1;
        let bad = loop {
            let l = (good + step).min(cap);
            if l == good {
                break cap + 1;
            }
            if src(i, l).is_some() {
                good = l;
                step *= 2;
            } else {
                break l;
            }
        };
        let (mut lo, mut hi) = (good, bad);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if src(i, mid).is_some() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let source = src(i, lo).expect("checked");
        out.factors.push(Factor::Reference { source, len: lo });
        i += lo;
    }
    out
}

/// Run-length BWT of the text a factorization encodes. The text must end
/// with the sentinel.
pub fn to_rl_bwt(f: &Factorization) -> Result<Rlbwt> {
    let text = decompress(f)?;
    rl_bwt_of(&text)
}

fn rl_bwt_of(text: &[Symbol]) -> Result<Rlbwt> {
    match text.split_last() {
        Some((&SENTINEL, body)) if !body.contains(&SENTINEL) => {}
        _ => return Err(Error::MissingSentinel),
    }
    let n = text.len();
    let sa = sort_suffixes(text);
    let bwt: Vec<Symbol> = sa.iter().map(|&p| text[(p + n - 2) % n]).collect();
    Ok(Rlbwt::from_bwt(&bwt))
}

/// Measures produced by [`encode`].
#[derive(Clone, Debug)]
pub struct Encoded {
    pub lz77: Factorization,
    pub rlbwt: Option<Rlbwt>,
    /// Factor count of the input parse.
    pub z_input: usize,
}

impl Encoded {
    pub fn z(&self) -> usize {
        self.lz77.len()
    }

    pub fn r(&self) -> Option<usize> {
        self.rlbwt.as_ref().map(Rlbwt::r)
    }
}

/// Both conversions at once, checking that the oracle ledger does not move.
/// The RL-BWT is skipped for texts without a sentinel.
pub fn encode(oracle: &TextOracle, f: &Factorization) -> Result<Encoded> {
    let before = oracle.ledger().total();
    let text = decompress(f)?;
    let lz77 = lz77_from_text(&text);
    let rlbwt = match rl_bwt_of(&text) {
        Ok(r) => Some(r),
        Err(Error::MissingSentinel) => None,
        Err(e) => return Err(e),
    };
    assert_eq!(oracle.ledger().total(), before, "conversion charged oracle queries");
    Ok(Encoded { lz77, rlbwt, z_input: f.len() })
}
