//! Classical string algorithms: LZ-family parsers, suffix array, BWT, LCP and
//! Lyndon factorization. They run on plain symbol slices, never on an oracle,
//! and double as correctness references for the query-counted algorithms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::quantum_sim::{Symbol, SENTINEL};

// ---------------------------------------------------------------------------
// Factorizations
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FactorKind {
    Lz77,
    Lz77NonOverlap,
    LzEnd,
    LzEndTau,
}

impl FactorKind {
    pub fn name(self) -> &'static str {
        match self {
            FactorKind::Lz77 => "lz77",
            FactorKind::Lz77NonOverlap => "lz77-nonoverlap",
            FactorKind::LzEnd => "lz-end",
            FactorKind::LzEndTau => "lz-end+tau",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "lz77" => FactorKind::Lz77,
            "lz77-nonoverlap" => FactorKind::Lz77NonOverlap,
            "lz-end" => FactorKind::LzEnd,
            "lz-end+tau" => FactorKind::LzEndTau,
            other => return Err(Error::Format(format!("unknown factorization kind {other:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    Literal(Symbol),
    /// Copy of `len` symbols starting at 1-based `source`.
    Reference { source: usize, len: usize },
}

impl Factor {
    pub fn len(&self) -> usize {
        match *self {
            Factor::Literal(_) => 1,
            Factor::Reference { len, .. } => len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub kind: FactorKind,
    pub tau: Option<usize>,
    pub factors: Vec<Factor>,
}

impl Factorization {
    pub fn new(kind: FactorKind, tau: Option<usize>) -> Self {
        Factorization { kind, tau, factors: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Total text length covered.
    pub fn text_len(&self) -> usize {
        self.factors.iter().map(Factor::len).sum()
    }

    /// 1-based start of every factor.
    pub fn starts(&self) -> Vec<usize> {
        let mut s = 1;
        self.factors
            .iter()
            .map(|f| {
                let here = s;
                s += f.len();
                here
            })
            .collect()
    }

    /// Factor lengths in order.
    pub fn lengths(&self) -> Vec<usize> {
        self.factors.iter().map(Factor::len).collect()
    }

    /// True when both split the text identically and agree on which factors are
    /// literals. Reference sources may differ.
    pub fn same_parse(&self, other: &Factorization) -> bool {
        self.factors.len() == other.factors.len()
            && self.factors.iter().zip(&other.factors).all(|(a, b)| match (a, b) {
                (Factor::Literal(x), Factor::Literal(y)) => x == y,
                (Factor::Reference { len: l1, .. }, Factor::Reference { len: l2, .. }) => l1 == l2,
                _ => false,
            })
    }

    /// Pieces of `text` as separate vectors, handy for printing.
    pub fn pieces<'a>(&self, text: &'a [Symbol]) -> Vec<&'a [Symbol]> {
        self.starts()
            .into_iter()
            .zip(self.lengths())
            .map(|(s, l)| &text[s - 1..s - 1 + l])
            .collect()
    }

    /// Checks tiling, literal placement and the reference rule of the kind
    /// against `text`. Returns a description of the first violation.
    pub fn check_rules(&self, text: &[Symbol]) -> std::result::Result<(), String> {
        if self.text_len() != text.len() {
            return Err(format!("factors cover {} symbols, text has {}", self.text_len(), text.len()));
        }
        if (self.kind == FactorKind::LzEndTau) != self.tau.is_some() {
            return Err("tau must be present exactly for lz-end+tau".into());
        }
        let mut ends: BTreeSet<usize> = BTreeSet::new();
        let mut s = 1;
        for (idx, f) in self.factors.iter().enumerate() {
            match *f {
                Factor::Literal(c) => {
                    if text[s - 1] != c {
                        return Err(format!("factor {idx}: literal {c} does not match text"));
                    }
                    if text[..s - 1].contains(&c) {
                        return Err(format!("factor {idx}: literal {c} is not a first occurrence"));
                    }
                }
                Factor::Reference { source, len } => {
                    if len == 0 || source == 0 || source >= s {
                        return Err(format!("factor {idx}: bad reference ({source}, {len}) at {s}"));
                    }
                    let end = source + len - 1;
                    if end > text.len() || text[source - 1..end] != text[s - 1..s - 1 + len] {
                        return Err(format!("factor {idx}: source content differs"));
                    }
                    let ok = match self.kind {
                        FactorKind::Lz77 => true,
                        FactorKind::Lz77NonOverlap => end < s,
                        FactorKind::LzEnd => ends.contains(&end),
                        FactorKind::LzEndTau => {
                            let tau = self.tau.unwrap_or(1);
                            ends.contains(&end) || (end < s && (end - 1) % tau == 0)
                        }
                    };
                    if !ok {
                        return Err(format!("factor {idx}: reference ending at {end} violates the {} rule", self.kind.name()));
                    }
                }
            }
            s += f.len();
            ends.insert(s - 1);
        }
        Ok(())
    }

    /// Serializes in the line format: a `#` header, then `L <symbol>` or
    /// `R <source> <length>` per factor.
    pub fn to_text(&self) -> String {
        let mut out = format!("# kind={} n={}", self.kind.name(), self.text_len());
        if let Some(t) = self.tau {
            out.push_str(&format!(" tau={t}"));
        }
        out.push('\n');
        for f in &self.factors {
            match *f {
                Factor::Literal(c) => out.push_str(&format!("L {c}\n")),
                Factor::Reference { source, len } => out.push_str(&format!("R {source} {len}\n")),
            }
        }
        out
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Format("missing header".into()))?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| Error::Format("header must start with '#'".into()))?;
        let mut kind = None;
        let mut n = None;
        let mut tau = None;
        for field in header.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("bad header field {field:?}")))?;
            match k {
                "kind" => kind = Some(FactorKind::parse(v)?),
                "n" => n = Some(parse_usize(v)?),
                "tau" if !v.is_empty() && v != "-" => tau = Some(parse_usize(v)?),
                "tau" => {}
                _ => return Err(Error::Format(format!("unknown header field {k:?}"))),
            }
        }
        let kind = kind.ok_or_else(|| Error::Format("header lacks kind".into()))?;
        let mut f = Factorization::new(kind, tau);
        for line in lines {
            let mut it = line.split_whitespace();
            match it.next() {
                Some("L") => {
                    let c = it.next().ok_or_else(|| Error::Format("literal without symbol".into()))?;
                    f.factors.push(Factor::Literal(parse_u32(c)?));
                }
                Some("R") => {
                    let src = parse_usize(it.next().unwrap_or(""))?;
                    let len = parse_usize(it.next().unwrap_or(""))?;
                    if src == 0 || len == 0 {
                        return Err(Error::Format(format!("bad reference line {line:?}")));
                    }
                    f.factors.push(Factor::Reference { source: src, len });
                }
                _ => return Err(Error::Format(format!("bad factor line {line:?}"))),
            }
            if it.next().is_some() {
                return Err(Error::Format(format!("trailing fields in {line:?}")));
            }
        }
        if let Some(n) = n {
            if n != f.text_len() {
                return Err(Error::Format(format!("header n={n} but factors cover {}", f.text_len())));
            }
        }
        Ok(f)
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::Format(format!("expected an integer, got {s:?}")))
}

fn parse_u32(s: &str) -> Result<u32> {
    s.parse().map_err(|_| Error::Format(format!("expected a symbol, got {s:?}")))
}

/// Expands a factorization with left-to-right copying, so overlapping
/// references work.
pub fn decompress(f: &Factorization) -> Result<Vec<Symbol>> {
    let mut out: Vec<Symbol> = Vec::with_capacity(f.text_len());
    for (idx, fac) in f.factors.iter().enumerate() {
        match *fac {
            Factor::Literal(c) => out.push(c),
            Factor::Reference { source, len } => {
                if source == 0 || source > out.len() {
                    return Err(Error::Format(format!(
                        "factor {idx}: source {source} outside decoded prefix of length {}",
                        out.len()
                    )));
                }
                for k in 0..len {
                    let c = out[source - 1 + k];
                    out.push(c);
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Suffix array and friends
// ---------------------------------------------------------------------------

/// Sorts the cyclic rotations of `text` by prefix doubling. Equal rotations
/// (periodic input) keep index order. Returns 0-based rotation starts.
pub fn rotation_order(text: &[Symbol]) -> Vec<usize> {
    let n = text.len();
    if n == 0 {
        return Vec::new();
    }
    let mut sa: Vec<usize> = (0..n).collect();
    let mut rank: Vec<usize> = {
        let mut syms: Vec<Symbol> = text.to_vec();
        syms.sort_unstable();
        syms.dedup();
        text.iter().map(|c| syms.binary_search(c).unwrap()).collect()
    };
    sa.sort_by_key(|&i| (rank[i], i));
    let mut tmp = vec![0usize; n];
    let mut k = 1;
    while k < n {
        let key = |i: usize| (rank[i], rank[(i + k) % n]);
        sa.sort_by(|&a, &b| key(a).cmp(&key(b)).then(a.cmp(&b)));
        tmp[sa[0]] = 0;
        for w in 1..n {
            tmp[sa[w]] = tmp[sa[w - 1]] + usize::from(key(sa[w - 1]) != key(sa[w]));
        }
        std::mem::swap(&mut rank, &mut tmp);
        if rank[sa[n - 1]] == n - 1 {
            break;
        }
        k *= 2;
    }
    sa
}

fn require_sentinel(text: &[Symbol]) -> Result<()> {
    match text.split_last() {
        Some((&SENTINEL, body)) if !body.contains(&SENTINEL) => Ok(()),
        _ => Err(Error::MissingSentinel),
    }
}

/// 1-based suffix array of a sentinel-terminated text.
pub fn suffix_array(text: &[Symbol]) -> Result<Vec<usize>> {
    require_sentinel(text)?;
    Ok(rotation_order(text).into_iter().map(|i| i + 1).collect())
}

/// Inverse of a 1-based suffix array: `isa[p-1]` is the rank of suffix `p`.
pub fn inverse(sa: &[usize]) -> Vec<usize> {
    let mut isa = vec![0; sa.len()];
    for (r, &p) in sa.iter().enumerate() {
        isa[p - 1] = r + 1;
    }
    isa
}

/// `BWT[i] = T[SA[i] - 1]`, wrapping to `T[n]` when `SA[i] = 1`.
pub fn bwt_from_sa(text: &[Symbol], sa: &[usize]) -> Vec<Symbol> {
    let n = text.len();
    sa.iter().map(|&p| if p == 1 { text[n - 1] } else { text[p - 2] }).collect()
}

pub fn bwt(text: &[Symbol]) -> Result<Vec<Symbol>> {
    let sa = suffix_array(text)?;
    Ok(bwt_from_sa(text, &sa))
}

/// BWT of the sorted cyclic rotations; no sentinel required.
pub fn cyclic_bwt(text: &[Symbol]) -> Vec<Symbol> {
    let n = text.len();
    rotation_order(text).into_iter().map(|i| text[(i + n - 1) % n]).collect()
}

/// Number of maximal equal-symbol runs.
pub fn count_runs(seq: &[Symbol]) -> usize {
    if seq.is_empty() {
        0
    } else {
        1 + seq.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

/// Kasai's algorithm. `lcp[i]` is the LCP of the suffixes at ranks `i` and
/// `i+1` (1-based ranks), with `lcp[0] = 0`.
pub fn lcp_array(text: &[Symbol], sa: &[usize]) -> Vec<usize> {
    let n = text.len();
    let isa = inverse(sa);
    let mut lcp = vec![0; n];
    let mut h = 0usize;
    for p in 0..n {
        let r = isa[p] - 1;
        if r == 0 {
            h = 0;
            continue;
        }
        let q = sa[r - 1] - 1;
        while p + h < n && q + h < n && text[p + h] == text[q + h] {
            h += 1;
        }
        lcp[r] = h;
        h = h.saturating_sub(1);
    }
    lcp
}

/// Longest common prefix of the suffixes starting at 1-based `i` and `j`.
pub fn lce_naive(text: &[Symbol], i: usize, j: usize) -> usize {
    text[i - 1..].iter().zip(&text[j - 1..]).take_while(|(a, b)| a == b).count()
}

/// Range-minimum sparse table returning the index of a minimum (leftmost on ties).
#[derive(Clone, Debug)]
pub struct SparseMin {
    vals: Vec<usize>,
    table: Vec<Vec<u32>>,
}

impl SparseMin {
    pub fn new(vals: Vec<usize>) -> Self {
        let n = vals.len();
        let mut table = vec![(0..n as u32).collect::<Vec<u32>>()];
        let mut w = 1;
        while 2 * w <= n {
            let prev = table.last().unwrap();
            let row: Vec<u32> = (0..=n - 2 * w)
                .map(|i| {
                    let (a, b) = (prev[i], prev[i + w]);
                    if vals[b as usize] < vals[a as usize] { b } else { a }
                })
                .collect();
            table.push(row);
            w *= 2;
        }
        SparseMin { vals, table }
    }

    /// Index of the minimum on the inclusive 0-based range `[l, r]`.
    pub fn argmin(&self, l: usize, r: usize) -> usize {
        let k = usize::BITS as usize - 1 - (r - l + 1).leading_zeros() as usize;
        let (a, b) = (self.table[k][l], self.table[k][r + 1 - (1 << k)]);
        if self.vals[b as usize] < self.vals[a as usize] { b as usize } else { a as usize }
    }

    pub fn min(&self, l: usize, r: usize) -> usize {
        self.vals[self.argmin(l, r)]
    }

    pub fn values(&self) -> &[usize] {
        &self.vals
    }
}

/// Suffix array of an arbitrary text, built on a shifted copy with a
/// terminator so that 0 may appear in the input.
struct ShiftedIndex {
    sa: Vec<usize>,
    isa: Vec<usize>,
    lcp: SparseMin,
    n: usize,
}

impl ShiftedIndex {
    fn new(text: &[Symbol]) -> Self {
        let mut t: Vec<Symbol> = text.iter().map(|&c| c + 1).collect();
        t.push(SENTINEL);
        let sa = suffix_array(&t).expect("terminated by construction");
        let lcp = lcp_array(&t, &sa);
        let isa = inverse(&sa);
        ShiftedIndex { sa, isa, lcp: SparseMin::new(lcp), n: text.len() }
    }

    /// LCE of 1-based positions of the original text.
    fn lce(&self, i: usize, j: usize) -> usize {
        if i == j {
            return self.n + 1 - i;
        }
        let (a, b) = (self.isa[i - 1], self.isa[j - 1]);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        // ranks are 1-based; lcp between ranks lo..hi is min of lcp[lo..hi-1] (0-based lo..hi-1)
        self.lcp.min(lo, hi - 1)
    }
}

// ---------------------------------------------------------------------------
// LZ77 family
// ---------------------------------------------------------------------------

/// Greedy LZ77 with overlapping references. Each reference points at the
/// leftmost earlier occurrence.
pub fn lz77_greedy(text: &[Symbol]) -> Factorization {
    let mut f = Factorization::new(FactorKind::Lz77, None);
    let n = text.len();
    if n == 0 {
        return f;
    }
    let idx = ShiftedIndex::new(text);
    // ranks 1..=n+1; rank 1 is the terminator
    let sa = &idx.sa;
    let m = sa.len();
    // previous/next smaller value in SA order (by text position)
    let mut psv = vec![0usize; m + 1];
    let mut nsv = vec![0usize; m + 1];
    let mut stack: Vec<usize> = Vec::new();
    for r in 1..=m {
        while let Some(&top) = stack.last() {
            if sa[top - 1] > sa[r - 1] {
                nsv[top] = r;
                stack.pop();
            } else {
                break;
            }
        }
        psv[r] = stack.last().copied().unwrap_or(0);
        stack.push(r);
    }
    let lcp = idx.lcp.values();
    let mut i = 1;
    while i <= n {
        let r = idx.isa[i - 1];
        let mut best = 0;
        for cand in [psv[r], nsv[r]] {
            if cand == 0 || sa[cand - 1] > n {
                continue;
            }
            let p = sa[cand - 1];
            let l = text[p - 1..].iter().zip(&text[i - 1..]).take_while(|(a, b)| a == b).count();
            best = best.max(l);
        }
        if best == 0 {
            f.factors.push(Factor::Literal(text[i - 1]));
            i += 1;
            continue;
        }
        // leftmost start among suffixes sharing `best` symbols with suffix i
        let mut src = i;
        let mut lo = r;
        while lo > 1 && lcp[lo - 1] >= best {
            lo -= 1;
            src = src.min(sa[lo - 1]);
        }
        let mut hi = r;
        while hi < m && lcp[hi] >= best {
            hi += 1;
            src = src.min(sa[hi - 1]);
        }
        f.factors.push(Factor::Reference { source: src, len: best });
        i += best;
    }
    f
}

/// Greedy LZ77 whose references lie entirely inside the already parsed prefix.
pub fn lz77_nonoverlapping(text: &[Symbol]) -> Factorization {
    let mut f = Factorization::new(FactorKind::Lz77NonOverlap, None);
    let n = text.len();
    if n == 0 {
        return f;
    }
    let idx = ShiftedIndex::new(text);
    let m = idx.sa.len();
    let pos = SparseMin::new(idx.sa.clone());
    let lcp = &idx.lcp;
    // widest rank interval around r whose suffixes share at least `l` symbols
    let interval = |r: usize, l: usize| -> (usize, usize) {
        let (mut lo, mut hi) = (r, r);
        // galloping left
        let mut step = 1;
        while lo > 1 {
            let cand = lo.saturating_sub(step).max(1);
            if lcp.min(cand, lo - 1) >= l {
                lo = cand;
                step *= 2;
            } else if step == 1 {
                break;
            } else {
                step = 1;
            }
        }
        step = 1;
        while hi < m {
            let cand = (hi + step).min(m);
            if lcp.min(hi, cand - 1) >= l {
                hi = cand;
                step *= 2;
            } else if step == 1 {
                break;
            } else {
                step = 1;
            }
        }
        (lo, hi)
    };
    let mut i = 1;
    while i <= n {
        let r = idx.isa[i - 1];
        let fits = |l: usize| -> Option<usize> {
            let (lo, hi) = interval(r, l);
            let p = pos.min(lo - 1, hi - 1);
            (p + l <= i).then_some(p)
        };
        let (mut lo, mut hi) = (0usize, (i - 1).min(n + 1 - i));
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if fits(mid).is_some() {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        if lo == 0 {
            if text[..i - 1].contains(&text[i - 1]) {
                unreachable!("a repeated symbol always has a length-1 earlier copy");
            }
            f.factors.push(Factor::Literal(text[i - 1]));
            i += 1;
        } else {
            let src = fits(lo).expect("checked");
            f.factors.push(Factor::Reference { source: src, len: lo });
            i += lo;
        }
    }
    f
}

/// Shared driver for LZ-End (`tau = None`) and LZ-End+tau.
fn lz_end_family(text: &[Symbol], tau: Option<usize>) -> Factorization {
    let kind = if tau.is_some() { FactorKind::LzEndTau } else { FactorKind::LzEnd };
    let mut f = Factorization::new(kind, tau);
    let n = text.len();
    if n == 0 {
        return f;
    }
    let fwd = ShiftedIndex::new(text);
    let rev_text: Vec<Symbol> = text.iter().rev().copied().collect();
    let rev = ShiftedIndex::new(&rev_text);
    // common-suffix length of T[1..a] and T[1..b]
    let lcs = |a: usize, b: usize| rev.lce(n - a + 1, n - b + 1);
    // allowed ends, keyed by rank of reversed prefix; value: is a factor end
    let mut allowed: BTreeMap<usize, (usize, bool)> = BTreeMap::new();
    let mut seen: BTreeSet<Symbol> = BTreeSet::new();
    let mut next_mod = 1usize; // next modular position not yet allowed
    let mut i = 1;
    while i <= n {
        if let Some(t) = tau {
            while next_mod < i {
                let key = rev.isa[n - next_mod];
                allowed.entry(key).or_insert((next_mod, false));
                next_mod += t;
            }
        }
        let c = text[i - 1];
        if !seen.contains(&c) {
            seen.insert(c);
            f.factors.push(Factor::Literal(c));
            allowed.insert(rev.isa[n - i], (i, true));
            i += 1;
            continue;
        }
        // upper bound on the length: the longest earlier occurrence at i
        let cap = longest_previous(&fwd, i, n);
        let mut best: Option<(usize, usize)> = None; // (len, end)
        for j in i..i + cap {
            let l = j - i + 1;
            let key = rev.isa[n - j];
            let mut cands = Vec::with_capacity(2);
            if let Some((_, &(y, fe))) = allowed.range(..key).next_back() {
                cands.push((y, fe));
            }
            if let Some((_, &(y, fe))) = allowed.range(key..).next() {
                cands.push((y, fe));
            }
            let mut hit: Option<(usize, bool)> = None;
            for (y, fe) in cands {
                if lcs(j, y) >= l {
                    match hit {
                        Some((_, true)) => {}
                        _ => hit = Some((y, fe)),
                    }
                }
            }
            if let Some((y, _)) = hit {
                best = Some((l, y));
            }
        }
        let (l, y) = best.expect("first occurrence of a repeated symbol is an allowed end");
        // prefer a factor end among witnesses of equal content
        f.factors.push(Factor::Reference { source: y + 1 - l, len: l });
        allowed.insert(rev.isa[n - (i + l - 1)], (i + l - 1, true));
        i += l;
    }
    f
}

/// Length of the longest factor starting at `i` that occurs earlier
/// (overlap allowed). Used as a search cap.
fn longest_previous(idx: &ShiftedIndex, i: usize, n: usize) -> usize {
    let mut best = 0;
    // brute force over SA neighbours with smaller start, scanning outwards
    let r = idx.isa[i - 1];
    let sa = &idx.sa;
    let lcp = idx.lcp.values();
    let mut run = usize::MAX;
    let mut lo = r;
    while lo > 1 {
        run = run.min(lcp[lo - 1]);
        if run <= best {
            break;
        }
        lo -= 1;
        if sa[lo - 1] < i {
            best = best.max(run);
            break;
        }
    }
    run = usize::MAX;
    let mut hi = r;
    while hi < sa.len() {
        run = run.min(lcp[hi]);
        if run <= best {
            break;
        }
        hi += 1;
        if sa[hi - 1] < i {
            best = best.max(run);
            break;
        }
    }
    best.min(n + 1 - i)
}

/// LZ-End: references must end at the last position of an earlier factor.
pub fn lz_end(text: &[Symbol]) -> Factorization {
    lz_end_family(text, None)
}

/// LZ-End+tau: references may also end at any earlier `k` with
/// `(k - 1) % tau == 0`. This is the reference the main factorizer is checked
/// against.
pub fn lz_end_tau_reference(text: &[Symbol], tau: usize) -> Factorization {
    lz_end_family(text, Some(tau.max(1)))
}

// ---------------------------------------------------------------------------
// Run-length BWT
// ---------------------------------------------------------------------------

/// Run-length encoded BWT with rank/select over the runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rlbwt {
    runs: Vec<(Symbol, usize)>,
    n: usize,
    /// 1-based first position of every run, plus `n + 1` at the end.
    starts: Vec<usize>,
    /// per symbol: run indices and the symbol count before each of them
    by_symbol: BTreeMap<Symbol, (Vec<usize>, Vec<usize>)>,
    /// per symbol: number of strictly smaller symbols in the BWT
    smaller: BTreeMap<Symbol, usize>,
}

impl Rlbwt {
    pub fn from_runs(runs: Vec<(Symbol, usize)>) -> Result<Self> {
        if runs.iter().any(|&(_, l)| l == 0) {
            return Err(Error::Format("run of length zero".into()));
        }
        if runs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Format("adjacent runs share a symbol".into()));
        }
        let mut starts = Vec::with_capacity(runs.len() + 1);
        let mut by_symbol: BTreeMap<Symbol, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        let mut totals: BTreeMap<Symbol, usize> = BTreeMap::new();
        let mut s = 1;
        for (k, &(c, l)) in runs.iter().enumerate() {
            starts.push(s);
            let tot = totals.entry(c).or_insert(0);
            let e = by_symbol.entry(c).or_default();
            e.0.push(k);
            e.1.push(*tot);
            *tot += l;
            s += l;
        }
        starts.push(s);
        let mut smaller = BTreeMap::new();
        let mut acc = 0;
        for (&c, &t) in &totals {
            smaller.insert(c, acc);
            acc += t;
        }
        Ok(Rlbwt { runs, n: s - 1, starts, by_symbol, smaller })
    }

    pub fn from_bwt(bwt: &[Symbol]) -> Self {
        let mut runs: Vec<(Symbol, usize)> = Vec::new();
        for &c in bwt {
            match runs.last_mut() {
                Some((d, l)) if *d == c => *l += 1,
                _ => runs.push((c, 1)),
            }
        }
        Rlbwt::from_runs(runs).expect("well-formed by construction")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.runs.len()
    }

    pub fn runs(&self) -> &[(Symbol, usize)] {
        &self.runs
    }

    pub fn expand(&self) -> Vec<Symbol> {
        self.runs.iter().flat_map(|&(c, l)| std::iter::repeat(c).take(l)).collect()
    }

    /// Index of the run holding 1-based position `i`.
    pub fn run_of(&self, i: usize) -> usize {
        self.starts.partition_point(|&s| s <= i) - 1
    }

    /// 1-based first position of run `k`.
    pub fn run_start(&self, k: usize) -> usize {
        self.starts[k]
    }

    pub fn is_run_head(&self, i: usize) -> bool {
        let k = self.run_of(i);
        self.starts[k] == i
    }

    pub fn access(&self, i: usize) -> Symbol {
        self.runs[self.run_of(i)].0
    }

    /// Occurrences of `c` in `BWT[1..i]`.
    pub fn rank(&self, c: Symbol, i: usize) -> usize {
        let Some((runs, before)) = self.by_symbol.get(&c) else { return 0 };
        if i == 0 {
            return 0;
        }
        let k = self.run_of(i.min(self.n));
        // last run of c with index <= k
        let p = runs.partition_point(|&x| x <= k);
        if p == 0 {
            return 0;
        }
        let run = runs[p - 1];
        let within = if run == k { i.min(self.n) - self.starts[run] + 1 } else { self.runs[run].1 };
        before[p - 1] + within
    }

    /// 1-based position of the `k`-th occurrence of `c`.
    pub fn select(&self, c: Symbol, k: usize) -> Option<usize> {
        let (runs, before) = self.by_symbol.get(&c)?;
        if k == 0 {
            return None;
        }
        let p = before.partition_point(|&b| b < k);
        if p == 0 {
            return None;
        }
        let run = runs[p - 1];
        let off = k - before[p - 1];
        (off <= self.runs[run].1).then(|| self.starts[run] + off - 1)
    }

    /// Number of BWT symbols strictly smaller than `c`.
    pub fn smaller_than(&self, c: Symbol) -> usize {
        match self.smaller.get(&c) {
            Some(&v) => v,
            None => self.smaller.range(..c).next_back().map_or(0, |(&d, &v)| {
                v + self.by_symbol[&d].1.last().copied().unwrap_or(0)
                    + self.by_symbol[&d].0.last().map_or(0, |&k| self.runs[k].1)
            }),
        }
    }

    pub fn contains_symbol(&self, c: Symbol) -> bool {
        self.by_symbol.contains_key(&c)
    }

    /// `LF[i] = C[c] + rank_c(i)` for `c = BWT[i]`.
    pub fn lf(&self, i: usize) -> usize {
        let c = self.access(i);
        self.smaller[&c] + self.rank(c, i)
    }

    /// Recovers the text (sentinel last) by walking LF from the sentinel row.
    pub fn invert(&self) -> Vec<Symbol> {
        let mut out = vec![SENTINEL; self.n];
        let mut i = 1;
        for k in (0..self.n - 1).rev() {
            let c = self.access(i);
            out[k] = c;
            i = self.lf(i);
        }
        out
    }

    /// Line format: `# n=<n> r=<r>` then `<symbol> <runlength>` per run.
    pub fn to_text(&self) -> String {
        let mut out = format!("# n={} r={}\n", self.n, self.r());
        for &(c, l) in &self.runs {
            out.push_str(&format!("{c} {l}\n"));
        }
        out
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Format("missing header".into()))?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| Error::Format("header must start with '#'".into()))?;
        let mut n = None;
        let mut r = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("n", v)) => n = Some(parse_usize(v)?),
                Some(("r", v)) => r = Some(parse_usize(v)?),
                _ => return Err(Error::Format(format!("bad header field {field:?}"))),
            }
        }
        let mut runs = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let c = parse_u32(it.next().unwrap_or(""))?;
            let l = parse_usize(it.next().unwrap_or(""))?;
            if it.next().is_some() {
                return Err(Error::Format(format!("trailing fields in {line:?}")));
            }
            runs.push((c, l));
        }
        let out = Rlbwt::from_runs(runs)?;
        if n.is_some_and(|n| n != out.n) || r.is_some_and(|r| r != out.r()) {
            return Err(Error::Format("header disagrees with runs".into()));
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Lyndon
// ---------------------------------------------------------------------------

/// Duval's algorithm. Returns the 1-based start of every Lyndon factor.
pub fn duval_lyndon(text: &[Symbol]) -> Vec<usize> {
    let n = text.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let (mut j, mut k) = (i + 1, i);
        while j < n && text[k] <= text[j] {
            if text[k] < text[j] {
                k = i;
            } else {
                k += 1;
            }
            j += 1;
        }
        while i <= k {
            out.push(i + 1);
            i += j - k;
        }
    }
    out
}

/// Maps bytes to symbols `b + 1`, keeping 0 free for the sentinel.
pub fn symbols_from_bytes(bytes: &[u8]) -> Vec<Symbol> {
    bytes.iter().map(|&b| b as Symbol + 1).collect()
}

/// Inverse of [`symbols_from_bytes`] where possible; other symbols print as `?`.
pub fn bytes_from_symbols(s: &[Symbol]) -> String {
    s.iter()
        .map(|&c| if (1..=256).contains(&c) { (c - 1) as u8 as char } else if c == 0 { '$' } else { '?' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sy(s: &str) -> Vec<Symbol> {
        s.bytes().map(|b| if b == b'$' { 0 } else { b as Symbol }).collect()
    }

    fn split(f: &Factorization, t: &[Symbol]) -> Vec<String> {
        f.pieces(t).iter().map(|p| p.iter().map(|&c| c as u8 as char).collect()).collect()
    }

    #[test]
    fn lz77_figure_string() {
        let t = sy("abacabcabcaaaab");
        let f = lz77_greedy(&t);
        assert_eq!(split(&f, &t), ["a", "b", "a", "c", "ab", "cabca", "aaa", "b"]);
        assert_eq!(decompress(&f).unwrap(), t);
        f.check_rules(&t).unwrap();
    }

    #[test]
    fn lz77_small_cases() {
        assert_eq!(lz77_greedy(&sy("a")).factors, vec![Factor::Literal(b'a' as Symbol)]);
        let z = vec![5; 9];
        let f = lz77_greedy(&z);
        assert_eq!(f.factors, vec![Factor::Literal(5), Factor::Reference { source: 1, len: 8 }]);
    }

    #[test]
    fn nonoverlap_cases() {
        let t = sy("aaaa");
        assert_eq!(split(&lz77_nonoverlapping(&t), &t), ["a", "a", "aa"]);
        assert_eq!(lz77_nonoverlapping(&sy("ab")).len(), 2);
        let t = sy("abab");
        assert_eq!(split(&lz77_nonoverlapping(&t), &t), ["a", "b", "ab"]);
    }

    #[test]
    fn lz_end_cases() {
        let t = sy("00010011011");
        assert_eq!(split(&lz_end(&t), &t), ["0", "0", "0", "1", "001", "1", "011"]);
        assert_eq!(lz_end(&sy("abacabcabcaaaab")).len(), 11);
        assert_eq!(lz_end(&sy("a")).len(), 1);
        let f = lz_end_tau_reference(&t, 2);
        assert_eq!(split(&f, &t), ["0", "0", "0", "1", "001", "10", "1", "1"]);
        f.check_rules(&t).unwrap();
        let fig = sy("abacabcabcaaaab");
        let f4 = lz_end_tau_reference(&fig, 4);
        f4.check_rules(&fig).unwrap();
        lz_end_tau_reference(&fig, 1).check_rules(&fig).unwrap();
    }

    #[test]
    fn suffix_array_cases() {
        let t = sy("mississippi$");
        let sa = suffix_array(&t).unwrap();
        assert_eq!(sa, [12, 11, 8, 5, 2, 1, 10, 9, 7, 4, 6, 3]);
        let b = bwt_from_sa(&t, &sa);
        assert_eq!(b, sy("ipssm$pissii"));
        assert_eq!(count_runs(&b), 9);
        assert_eq!(suffix_array(&sy("a$")).unwrap(), [2, 1]);
        assert_eq!(suffix_array(&sy("aaaa$")).unwrap(), [5, 4, 3, 2, 1]);
        assert_eq!(suffix_array(&sy("abc")), Err(Error::MissingSentinel));
    }

    #[test]
    fn rlbwt_rank_select_lf() {
        let t = sy("mississippi$");
        let rl = Rlbwt::from_bwt(&bwt(&t).unwrap());
        assert_eq!(rl.r(), 9);
        let lf: Vec<usize> = (1..=12).map(|i| rl.lf(i)).collect();
        assert_eq!(lf, [2, 7, 9, 10, 6, 1, 8, 3, 11, 12, 4, 5]);
        let heads: Vec<usize> = (1..=12).filter(|&i| rl.is_run_head(i)).collect();
        assert_eq!(heads, [1, 2, 3, 5, 6, 7, 8, 9, 11]);
        assert_eq!(rl.rank(b's' as Symbol, 12), 4);
        assert_eq!(rl.select(b's' as Symbol, 3), Some(9));
        assert_eq!(rl.invert(), t);
        assert_eq!(Rlbwt::from_text(&rl.to_text()).unwrap(), rl);
    }

    #[test]
    fn lcp_and_lce() {
        let t = sy("mississippi$");
        let sa = suffix_array(&t).unwrap();
        let lcp = lcp_array(&t, &sa);
        assert_eq!(lcp, [0, 0, 1, 1, 4, 0, 0, 1, 0, 2, 1, 3]);
        assert_eq!(lce_naive(&t, 2, 5), 4);
    }

    #[test]
    fn duval_cases() {
        assert_eq!(duval_lyndon(&sy("banana")), [1, 2, 4, 6]);
        assert_eq!(duval_lyndon(&sy("aaa")), [1, 2, 3]);
        assert_eq!(duval_lyndon(&sy("abc")), [1]);
    }

    #[test]
    fn decompress_cases() {
        let f = Factorization {
            kind: FactorKind::Lz77,
            tau: None,
            factors: vec![Factor::Literal(0), Factor::Reference { source: 1, len: 4 }],
        };
        assert_eq!(decompress(&f).unwrap(), vec![0; 5]);
        let bad = Factorization {
            kind: FactorKind::Lz77,
            tau: None,
            factors: vec![Factor::Reference { source: 1, len: 1 }],
        };
        assert!(decompress(&bad).is_err());
    }

    #[test]
    fn file_format_round_trip() {
        let t = sy("00010011011");
        let f = lz_end_tau_reference(&t, 2);
        let s = f.to_text();
        assert!(s.starts_with("# kind=lz-end+tau n=11 tau=2\n"));
        assert_eq!(Factorization::from_text(&s).unwrap(), f);
        assert!(Factorization::from_text("# kind=lz77 n=3\nL 1\n").is_err());
        assert!(Factorization::from_text("L 1\n").is_err());
    }

    #[test]
    fn cyclic_bwt_of_constant_string() {
        assert_eq!(count_runs(&cyclic_bwt(&[0, 0, 0, 0])), 1);
    }
}
