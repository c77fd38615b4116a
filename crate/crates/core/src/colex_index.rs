//! Co-lexicographically sorted set of text prefixes (stored by end position),
//! suffix-range search over it, and k-th selection across several trimmed
//! ranges without merging them.

use std::cell::{Cell, RefCell};
use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::dynamic_lce::{HashedRope, PrefixHashes, DIRECT_SCAN};
use crate::error::{Error, Result};
use crate::quantum_sim::Symbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrefixEntry {
    pub end: usize,
    /// True when `end` closes a factor; otherwise it is a sampled position.
    pub factor_end: bool,
}

/// Inclusive 1-based index range into a [`PrefixSet`]; empty when `lo > hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuffixRange {
    pub lo: usize,
    pub hi: usize,
}

impl SuffixRange {
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn len(&self) -> usize {
        if self.is_empty() { 0 } else { self.hi - self.lo + 1 }
    }
}

/// Where a prefix sits relative to a pattern: co-lex below it, ending with
/// it, or above it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    Below,
    Inside,
    Above,
}

/// A pattern given explicitly, stored reversed with prefix fingerprints so it
/// can be matched against the rope.
#[derive(Clone, Debug)]
pub struct ReversedPattern {
    hashes: Rc<PrefixHashes>,
    off: usize,
    len: usize,
}

impl ReversedPattern {
    /// `pattern` in text order.
    pub fn new(rope: &HashedRope, pattern: &[Symbol]) -> Self {
        let rev: Vec<Symbol> = pattern.iter().rev().copied().collect();
        let len = rev.len();
        ReversedPattern { hashes: Rc::new(rope.hasher().prefixes(&rev)), off: 0, len }
    }

    /// The pattern made of reversed symbols `off+1 ..= off+len`, sharing
    /// the hashes. For a text window `T[a..b]` built with [`new`](Self::new),
    /// `sub(b - y, y - x + 1)` is the pattern `T[x..y]`.
    pub fn sub(&self, off: usize, len: usize) -> Self {
        assert!(self.off + off + len <= self.hashes.len(), "sub-pattern out of range");
        ReversedPattern { hashes: Rc::clone(&self.hashes), off: self.off + off, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// The set of prefix ends, kept in co-lex order of `T[1..end]`. Backed by a
/// sorted vector: inserts shift, lookups are binary searches.
#[derive(Clone, Debug, Default)]
pub struct PrefixSet {
    entries: Vec<PrefixEntry>,
    members: HashSet<usize>,
    comparisons: Cell<u64>,
    // co-lex order of two fixed text prefixes never changes as the text grows
    order_memo: RefCell<HashMap<(usize, usize), Ordering>>,
}

const ORDER_MEMO_CAP: usize = 1 << 20;

impl PrefixSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.members.contains(&e)
    }

    /// 1-based access.
    pub fn get(&self, idx: usize) -> PrefixEntry {
        self.entries[idx - 1]
    }

    pub fn entries(&self) -> &[PrefixEntry] {
        &self.entries
    }

    pub fn full_range(&self) -> SuffixRange {
        SuffixRange { lo: 1, hi: self.entries.len() }
    }

    /// Prefix comparisons performed by [`select_kth_merged`](Self::select_kth_merged).
    pub fn comparisons(&self) -> u64 {
        self.comparisons.get()
    }

    pub fn reset_comparisons(&self) {
        self.comparisons.set(0);
    }

    /// Inserts `T[1..e]` at its co-lex rank. The rope must hold the reverse of
    /// a text prefix of length at least `e`.
    pub fn insert(&mut self, rope: &HashedRope, e: usize, factor_end: bool) -> Result<usize> {
        if self.members.contains(&e) {
            return Err(Error::DuplicatePrefix(e));
        }
        if e == 0 || e > rope.len() {
            return Err(Error::OutOfRange { pos: e, len: rope.len() });
        }
        let at = self.entries.partition_point(|x| rope.colex_compare(x.end, e) == Ordering::Less);
        self.entries.insert(at, PrefixEntry { end: e, factor_end });
        self.members.insert(e);
        Ok(at + 1)
    }

    /// Inserts `e`, or marks an existing entry as a factor end.
    pub fn insert_or_mark(&mut self, rope: &HashedRope, e: usize, factor_end: bool) -> Result<()> {
        if self.members.contains(&e) {
            if factor_end {
                if let Some(x) = self.entries.iter_mut().find(|x| x.end == e) {
                    x.factor_end = true;
                }
            }
            return Ok(());
        }
        self.insert(rope, e, factor_end).map(|_| ())
    }

    /// Range of entries within `within` whose placement is `Inside`.
    /// `place` must be monotone: all `Below`, then `Inside`, then `Above`.
    pub fn range_by(&self, within: SuffixRange, place: impl Fn(usize) -> Placement) -> SuffixRange {
        if within.is_empty() {
            return within;
        }
        let slice = &self.entries[within.lo - 1..within.hi];
        let lo = slice.partition_point(|x| place(x.end) == Placement::Below);
        let hi = lo + slice[lo..].partition_point(|x| place(x.end) != Placement::Above);
        SuffixRange { lo: within.lo + lo, hi: within.lo + hi - 1 }
    }

    /// Entries whose prefix ends with `T[a..b-d]`, an occurrence inside the
    /// text held by the rope. An empty pattern selects everything.
    pub fn suffix_range(&self, rope: &HashedRope, a: usize, b: usize, d: usize) -> Result<SuffixRange> {
        let m = rope.len();
        if a == 0 || b > m || b < d || b - d + 1 < a {
            return Err(Error::InvalidArgument(format!("bad occurrence ({a}, {b}) with trim {d}")));
        }
        let end = b - d;
        if end < a {
            return Ok(self.full_range());
        }
        let len = end - a + 1;
        let pat = m - end + 1;
        Ok(self.range_by(self.full_range(), |e| {
            let l = rope.lce(m - e + 1, pat).min(len).min(e);
            place_after_match(rope, e, l, len, || rope.access(pat + l))
        }))
    }

    /// Entries whose prefix ends with an explicit pattern.
    pub fn pattern_range(&self, rope: &HashedRope, pattern: &ReversedPattern, within: SuffixRange) -> SuffixRange {
        let len = pattern.len();
        if len == 0 {
            return within;
        }
        let m = rope.len();
        self.range_by(within, |e| {
            let cap = len.min(e);
            let at = m - e + 1;
            let off = pattern.off;
            let direct = cap.min(DIRECT_SCAN);
            let l = (0..direct)
                .find(|&l| rope.access(at + l) != pattern.hashes.symbol(off + l + 1))
                .unwrap_or_else(|| {
                    rope.longest_match(cap, |l| rope.fingerprint(at, at + l - 1).same(&pattern.hashes.range(off + 1, off + l)))
                });
            place_after_match(rope, e, l, len, || pattern.hashes.symbol(off + l + 1))
        })
    }

    /// Co-lex comparison of two trimmed entries `(e, d)`, meaning `T[1..e-d]`,
    /// with ties broken by `e`.
    pub fn compare_trimmed(&self, rope: &HashedRope, a: (usize, usize), b: (usize, usize)) -> Ordering {
        self.comparisons.set(self.comparisons.get() + 1);
        let (x, y) = (a.0 - a.1, b.0 - b.1);
        let order = if x == y {
            Ordering::Equal
        } else {
            let key = (x.min(y), x.max(y));
            let mut memo = self.order_memo.borrow_mut();
            let o = match memo.get(&key) {
                Some(&o) => o,
                None => {
                    if memo.len() >= ORDER_MEMO_CAP {
                        memo.clear();
                    }
                    let o = rope.colex_compare(key.0, key.1);
                    memo.insert(key, o);
                    o
                }
            };
            if x < y { o } else { o.reverse() }
        };
        order.then(a.0.cmp(&b.0))
    }

    /// The `x`-th smallest (1-based) entry of the union of `ranges`, each
    /// entry trimmed by its range's `d`. Returns `(range index, set index)`.
    ///
    /// Works in rounds with a shrinking stride `s`: while `x` exceeds
    /// `s` times the number of live ranges, the range whose `s`-th remaining
    /// element is smallest loses its first `s` elements.
    pub fn select_kth_merged(&self, rope: &HashedRope, ranges: &[(SuffixRange, usize)], x: usize) -> Result<(usize, usize)> {
        let total: usize = ranges.iter().map(|(r, _)| r.len()).sum();
        if x == 0 || x > total {
            return Err(Error::OutOfRange { pos: x, len: total });
        }
        let mut off: Vec<usize> = vec![0; ranges.len()];
        let key = |k: usize, o: usize| -> (usize, usize) {
            let (r, d) = ranges[k];
            (self.entries[r.lo - 1 + o].end, d)
        };
        let mut live: Vec<usize> = (0..ranges.len()).filter(|&k| !ranges[k].0.is_empty()).collect();
        let mut x = x;
        let mut s = (x / (2 * live.len())).max(1).next_power_of_two();
        loop {
            if live.len() == 1 {
                let k = live[0];
                return Ok((k, ranges[k].0.lo + off[k] + x - 1));
            }
            if s == 1 && x <= live.len() {
                break;
            }
            if x > s * live.len() {
                let probe = |k: usize, off: &[usize]| -> (usize, usize) {
                    let remaining = ranges[k].0.len() - off[k];
                    key(k, off[k] + s.min(remaining) - 1)
                };
                let mut heap = KeyHeap::new(|a: &(usize, usize), b: &(usize, usize)| self.compare_trimmed(rope, *a, *b));
                for &k in &live {
                    heap.push(probe(k, &off), k);
                }
                while x > s * heap.len() {
                    let Some((_, k)) = heap.pop() else { break };
                    let remaining = ranges[k].0.len() - off[k];
                    let cut = s.min(remaining);
                    off[k] += cut;
                    x -= cut;
                    if cut < remaining {
                        heap.push(probe(k, &off), k);
                    }
                }
                live = heap.into_values();
                live.sort_unstable();
            }
            if s > 1 {
                s /= 2;
            }
        }
        // x <= number of live ranges: pop heads
        let mut heap = KeyHeap::new(|a: &(usize, usize), b: &(usize, usize)| self.compare_trimmed(rope, *a, *b));
        for &k in &live {
            heap.push(key(k, off[k]), k);
        }
        for _ in 1..x {
            let (_, k) = heap.pop().expect("x within live size");
            off[k] += 1;
            if off[k] < ranges[k].0.len() {
                heap.push(key(k, off[k]), k);
            }
        }
        let (_, k) = heap.pop().expect("nonempty");
        Ok((k, ranges[k].0.lo + off[k]))
    }

    /// The union of `ranges`, explicitly merged. Test and debugging aid.
    pub fn merged_explicit(&self, rope: &HashedRope, ranges: &[(SuffixRange, usize)]) -> Vec<(usize, usize)> {
        let mut all: Vec<(usize, usize)> = Vec::new();
        for (k, &(r, _)) in ranges.iter().enumerate() {
            for idx in r.lo..=r.hi {
                all.push((k, idx));
            }
        }
        all.sort_by(|a, b| {
            let ka = (self.entries[a.1 - 1].end, ranges[a.0].1);
            let kb = (self.entries[b.1 - 1].end, ranges[b.0].1);
            rope.colex_compare(ka.0 - ka.1, kb.0 - kb.1).then(ka.0.cmp(&kb.0))
        });
        all
    }
}

/// Placement of prefix `T[1..e]` against a pattern of length `len` given the
/// length `l` of their common reversed prefix and the pattern symbol at `l+1`.
fn place_after_match(rope: &HashedRope, e: usize, l: usize, len: usize, pattern_next: impl Fn() -> Symbol) -> Placement {
    if l >= len {
        Placement::Inside
    } else if l >= e {
        Placement::Below
    } else {
        let m = rope.len();
        if rope.access(m - e + 1 + l) < pattern_next() { Placement::Below } else { Placement::Above }
    }
}

/// Binary min-heap with an external comparator.
struct KeyHeap<K, F: Fn(&K, &K) -> Ordering> {
    items: Vec<(K, usize)>,
    cmp: F,
}

impl<K: Copy, F: Fn(&K, &K) -> Ordering> KeyHeap<K, F> {
    fn new(cmp: F) -> Self {
        KeyHeap { items: Vec::new(), cmp }
    }

    fn len(&self) -> usize {
        self.items.len()
    }

    fn less(&self, a: usize, b: usize) -> bool {
        (self.cmp)(&self.items[a].0, &self.items[b].0) == Ordering::Less
    }

    fn push(&mut self, key: K, value: usize) {
        self.items.push((key, value));
        let mut i = self.items.len() - 1;
        while i > 0 {
            let p = (i - 1) / 2;
            if self.less(i, p) {
                self.items.swap(i, p);
                i = p;
            } else {
                break;
            }
        }
    }

    fn pop(&mut self) -> Option<(K, usize)> {
        if self.items.is_empty() {
            return None;
        }
        let last = self.items.len() - 1;
        self.items.swap(0, last);
        let top = self.items.pop();
        let n = self.items.len();
        let mut i = 0;
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut m = i;
            if l < n && self.less(l, m) {
                m = l;
            }
            if r < n && self.less(r, m) {
                m = r;
            }
            if m == i {
                break;
            }
            self.items.swap(i, m);
            i = m;
        }
        top
    }

    fn into_values(self) -> Vec<usize> {
        self.items.into_iter().map(|(_, v)| v).collect()
    }
}
