//! Fingerprinted persistent rope over a growing sequence `S`, supporting
//! prepends of a symbol or of a copy of one of its own substrings, and LCE
//! queries by binary search on fingerprints.
//!
//! Coordinates: the factorizers keep `S = reverse(T[1..m])`, so text position
//! `p <= m` sits at `S[m - p + 1]`. [`HashedRope::colex_compare`] takes text
//! prefix ends directly.

use std::cmp::Ordering;
use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quantum_sim::Symbol;

// Mersenne prime, reduced by shifts
const P1: u64 = (1 << 61) - 1;

/// Symbols compared one by one before LCE falls back to fingerprints.
pub const DIRECT_SCAN: usize = 4;

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    debug_assert_eq!(p, P1);
    let x = a as u128 * b as u128;
    let z = (x >> 61) as u64 + (x as u64 & P1);
    if z >= P1 { z - P1 } else { z }
}

#[inline]
fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p { s - p } else { s }
}

/// Fingerprint of a sequence: `sum x_k * B^(len-k)` modulo `2^61 - 1`, plus
/// the power `B^len` needed to concatenate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    h1: u64,
    p1: u64,
    len: usize,
}

impl Fingerprint {
    pub const EMPTY: Fingerprint = Fingerprint { h1: 0, p1: 1, len: 0 };

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Fingerprint of `self` followed by `other`.
    pub fn concat(&self, other: &Fingerprint) -> Fingerprint {
        Fingerprint {
            h1: addmod(mulmod(self.h1, other.p1, P1), other.h1, P1),
            p1: mulmod(self.p1, other.p1, P1),
            len: self.len + other.len,
        }
    }

    /// Content-only comparison.
    pub fn same(&self, other: &Fingerprint) -> bool {
        self.len == other.len && self.h1 == other.h1
    }
}

/// The random base shared by a rope and any explicit pattern compared
/// against it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hasher {
    b1: u64,
}

impl Hasher {
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Hasher { b1: rng.gen_range(1 << 20..P1 - 1) }
    }

    pub fn symbol(&self, c: Symbol) -> Fingerprint {
        let x = c as u64 + 1;
        Fingerprint { h1: x % P1, p1: self.b1, len: 1 }
    }

    pub fn of(&self, seq: &[Symbol]) -> Fingerprint {
        seq.iter().fold(Fingerprint::EMPTY, |acc, &c| acc.concat(&self.symbol(c)))
    }

    /// Prefix fingerprints of `seq`: entry `k` covers `seq[..k]`.
    pub fn prefixes(&self, seq: &[Symbol]) -> PrefixHashes {
        let mut fps = Vec::with_capacity(seq.len() + 1);
        let mut acc = Fingerprint::EMPTY;
        fps.push(acc);
        for &c in seq {
            acc = acc.concat(&self.symbol(c));
            fps.push(acc);
        }
        PrefixHashes { fps, seq: seq.to_vec() }
    }
}

/// Prefix fingerprints of an explicit sequence, for substring fingerprints
/// in O(1).
#[derive(Clone, Debug)]
pub struct PrefixHashes {
    fps: Vec<Fingerprint>,
    seq: Vec<Symbol>,
}

impl PrefixHashes {
    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn symbol(&self, i: usize) -> Symbol {
        self.seq[i - 1]
    }

    /// Fingerprint of the 1-based inclusive range `[a, b]`; empty when `a > b`.
    pub fn range(&self, a: usize, b: usize) -> Fingerprint {
        if a > b {
            return Fingerprint::EMPTY;
        }
        let hi = self.fps[b];
        let lo = self.fps[a - 1];
        let len = b + 1 - a;
        // hi = lo * B^len + mid
        let pw = self.power(len);
        Fingerprint {
            h1: addmod(hi.h1, P1 - mulmod(lo.h1, pw.p1, P1), P1),
            p1: pw.p1,
            len,
        }
    }

    fn power(&self, len: usize) -> Fingerprint {
        // B^len is stored on any prefix of that length
        let f = self.fps[len];
        Fingerprint { h1: 0, p1: f.p1, len }
    }
}

const NIL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Node {
    left: u32,
    right: u32,
    sym: Symbol,
    height: u8,
    fp: Fingerprint,
}

/// Persistent AVL rope. Nodes are immutable once created, so copied ranges
/// share structure with the original.
#[derive(Clone, Debug)]
pub struct HashedRope {
    nodes: Vec<Node>,
    root: u32,
    hasher: Hasher,
    // flat copy of S for constant-time access
    flat: VecDeque<Symbol>,
}

impl Default for HashedRope {
    fn default() -> Self {
        Self::new(0x5eed_1ce)
    }
}

impl HashedRope {
    pub fn new(seed: u64) -> Self {
        HashedRope { nodes: Vec::new(), root: NIL, hasher: Hasher::seeded(seed), flat: VecDeque::new() }
    }

    pub fn hasher(&self) -> &Hasher {
        &self.hasher
    }

    pub fn len(&self) -> usize {
        self.size(self.root)
    }

    pub fn is_empty(&self) -> bool {
        self.root == NIL
    }

    pub fn height(&self) -> usize {
        self.h(self.root) as usize
    }

    /// Nodes allocated so far, shared ones counted once.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    fn size(&self, t: u32) -> usize {
        if t == NIL { 0 } else { self.nodes[t as usize].fp.len }
    }

    #[inline]
    fn h(&self, t: u32) -> u8 {
        if t == NIL { 0 } else { self.nodes[t as usize].height }
    }

    #[inline]
    fn fp(&self, t: u32) -> Fingerprint {
        if t == NIL { Fingerprint::EMPTY } else { self.nodes[t as usize].fp }
    }

    fn mk(&mut self, left: u32, sym: Symbol, right: u32) -> u32 {
        let fp = self.fp(left).concat(&self.hasher.symbol(sym)).concat(&self.fp(right));
        let height = 1 + self.h(left).max(self.h(right));
        self.nodes.push(Node { left, right, sym, height, fp });
        (self.nodes.len() - 1) as u32
    }

    fn rotate_left(&mut self, t: u32) -> u32 {
        let n = self.nodes[t as usize];
        let r = self.nodes[n.right as usize];
        let l = self.mk(n.left, n.sym, r.left);
        self.mk(l, r.sym, r.right)
    }

    fn rotate_right(&mut self, t: u32) -> u32 {
        let n = self.nodes[t as usize];
        let l = self.nodes[n.left as usize];
        let r = self.mk(l.right, n.sym, n.right);
        self.mk(l.left, l.sym, r)
    }

    fn balance(&mut self, left: u32, sym: Symbol, right: u32) -> u32 {
        let (hl, hr) = (self.h(left), self.h(right));
        if hl > hr + 1 {
            let l = self.nodes[left as usize];
            let left = if self.h(l.right) > self.h(l.left) { self.rotate_left(left) } else { left };
            let t = self.mk(left, sym, right);
            self.rotate_right(t)
        } else if hr > hl + 1 {
            let r = self.nodes[right as usize];
            let right = if self.h(r.left) > self.h(r.right) { self.rotate_right(right) } else { right };
            let t = self.mk(left, sym, right);
            self.rotate_left(t)
        } else {
            self.mk(left, sym, right)
        }
    }

    /// Concatenation `left ++ [sym] ++ right` for trees of any heights.
    fn join(&mut self, left: u32, sym: Symbol, right: u32) -> u32 {
        let (hl, hr) = (self.h(left), self.h(right));
        if hl > hr + 1 {
            let l = self.nodes[left as usize];
            let nr = self.join(l.right, sym, right);
            self.balance(l.left, l.sym, nr)
        } else if hr > hl + 1 {
            let r = self.nodes[right as usize];
            let nl = self.join(left, sym, r.left);
            self.balance(nl, r.sym, r.right)
        } else {
            self.mk(left, sym, right)
        }
    }

    fn split_last(&mut self, t: u32) -> (u32, Symbol) {
        let n = self.nodes[t as usize];
        if n.right == NIL {
            (n.left, n.sym)
        } else {
            let (r, s) = self.split_last(n.right);
            (self.balance(n.left, n.sym, r), s)
        }
    }

    fn join2(&mut self, left: u32, right: u32) -> u32 {
        if left == NIL {
            return right;
        }
        let (l, s) = self.split_last(left);
        self.join(l, s, right)
    }

    /// Splits into the first `k` symbols and the rest.
    fn split(&mut self, t: u32, k: usize) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        let n = self.nodes[t as usize];
        let ls = self.size(n.left);
        if k <= ls {
            let (a, b) = self.split(n.left, k);
            let r = self.join(b, n.sym, n.right);
            (a, r)
        } else {
            let (a, b) = self.split(n.right, k - ls - 1);
            let l = self.join(n.left, n.sym, a);
            (l, b)
        }
    }

    /// `S <- c . S`
    pub fn prepend_char(&mut self, c: Symbol) {
        self.root = self.join(NIL, c, self.root);
        self.flat.push_front(c);
    }

    /// `S <- S[a..b] . S`, 1-based inclusive.
    pub fn prepend_copy(&mut self, a: usize, b: usize) -> Result<()> {
        let m = self.len();
        if a == 0 || a > b || b > m {
            return Err(Error::OutOfRange { pos: if a == 0 { 0 } else { b }, len: m });
        }
        let (_, rest) = self.split(self.root, a - 1);
        let (mid, _) = self.split(rest, b - a + 1);
        self.root = self.join2(mid, self.root);
        let copy: Vec<Symbol> = self.flat.range(a - 1..b).copied().collect();
        for &c in copy.iter().rev() {
            self.flat.push_front(c);
        }
        Ok(())
    }

    /// Appends `c` at the end: `S <- S . c`. Used to build a rope from a
    /// known sequence.
    pub fn push_back(&mut self, c: Symbol) {
        self.root = self.join(self.root, c, NIL);
        self.flat.push_back(c);
    }

    pub fn from_symbols(seed: u64, seq: &[Symbol]) -> Self {
        let mut r = HashedRope::new(seed);
        r.root = r.build(seq);
        r.flat = seq.iter().copied().collect();
        r
    }

    fn build(&mut self, seq: &[Symbol]) -> u32 {
        if seq.is_empty() {
            return NIL;
        }
        let mid = seq.len() / 2;
        let l = self.build(&seq[..mid]);
        let r = self.build(&seq[mid + 1..]);
        self.mk(l, seq[mid], r)
    }

    /// `S[i]`, 1-based.
    pub fn access(&self, i: usize) -> Symbol {
        assert!(i >= 1 && i <= self.flat.len(), "rope index {i} out of 1..={}", self.flat.len());
        self.flat[i - 1]
    }

    pub fn to_vec(&self) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = Vec::new();
        let mut t = self.root;
        while t != NIL || !stack.is_empty() {
            while t != NIL {
                stack.push(t);
                t = self.nodes[t as usize].left;
            }
            let n = self.nodes[stack.pop().unwrap() as usize];
            out.push(n.sym);
            t = n.right;
        }
        out
    }

    /// Fingerprint of the first `k` symbols of subtree `t`.
    fn prefix_fp(&self, mut t: u32, mut k: usize) -> Fingerprint {
        let mut acc = Fingerprint::EMPTY;
        while k > 0 && t != NIL {
            let n = &self.nodes[t as usize];
            if k >= n.fp.len {
                return acc.concat(&n.fp);
            }
            let ls = self.size(n.left);
            if k <= ls {
                t = n.left;
            } else {
                acc = acc.concat(&self.fp(n.left)).concat(&self.hasher.symbol(n.sym));
                k -= ls + 1;
                t = n.right;
            }
        }
        acc
    }

    /// Fingerprint of `S[a..b]` (1-based inclusive), empty when `a > b`.
    pub fn fingerprint(&self, a: usize, b: usize) -> Fingerprint {
        if a > b {
            return Fingerprint::EMPTY;
        }
        // descend to the node where a and b diverge, then combine a suffix
        // of its left part with a prefix of its right part
        let mut t = self.root;
        let (mut a, mut b) = (a, b);
        loop {
            let n = &self.nodes[t as usize];
            let ls = self.size(n.left);
            if b <= ls {
                t = n.left;
            } else if a > ls + 1 {
                a -= ls + 1;
                b -= ls + 1;
                t = n.right;
            } else {
                let left = self.suffix_fp(n.left, ls + 1 - a);
                let right = self.prefix_fp(n.right, b - ls - 1);
                return left.concat(&self.hasher.symbol(n.sym)).concat(&right);
            }
        }
    }

    /// Fingerprint of the last `k` symbols of subtree `t`.
    fn suffix_fp(&self, mut t: u32, mut k: usize) -> Fingerprint {
        let mut acc = Fingerprint::EMPTY;
        while k > 0 && t != NIL {
            let n = &self.nodes[t as usize];
            if k >= n.fp.len {
                return n.fp.concat(&acc);
            }
            let rs = self.size(n.right);
            if k <= rs {
                t = n.right;
            } else {
                acc = self.hasher.symbol(n.sym).concat(&self.fp(n.right)).concat(&acc);
                k -= rs + 1;
                t = n.left;
            }
        }
        acc
    }

    /// Longest `l` with `S[i..i+l-1] = S[j..j+l-1]`.
    pub fn lce(&self, i: usize, j: usize) -> usize {
        let m = self.len();
        assert!(i >= 1 && j >= 1 && i <= m && j <= m, "lce positions out of range");
        let cap = m + 1 - i.max(j);
        if i == j {
            return m + 1 - i;
        }
        // most mismatches come early; hash only past a short direct scan
        let direct = cap.min(DIRECT_SCAN);
        if let Some(l) = (0..direct).find(|&l| self.access(i + l) != self.access(j + l)) {
            return l;
        }
        self.longest_match(cap, |l| self.fingerprint(i, i + l - 1).same(&self.fingerprint(j, j + l - 1)))
    }

    /// Largest `l <= cap` with `eq(l)`, assuming `eq` is monotone
    /// (true up to some point). Exponential then binary search.
    pub fn longest_match(&self, cap: usize, eq: impl Fn(usize) -> bool) -> usize {
        let mut good = 0;
        let mut step = 1;
        while good < cap {
            let probe = (good + step).min(cap);
            if eq(probe) {
                good = probe;
                step *= 2;
            } else {
                // answer in [good, probe - 1]
                let mut hi = probe - 1;
                while good < hi {
                    let mid = good + (hi - good).div_ceil(2);
                    if eq(mid) {
                        good = mid;
                    } else {
                        hi = mid - 1;
                    }
                }
                return good;
            }
        }
        good
    }

    /// Co-lexicographic order of the text prefixes `T[1..e1]` and `T[1..e2]`,
    /// where the rope holds `S = reverse(T[1..m])`. `e = 0` is the empty prefix.
    pub fn colex_compare(&self, e1: usize, e2: usize) -> Ordering {
        if e1 == e2 {
            return Ordering::Equal;
        }
        if e1 == 0 || e2 == 0 {
            return e1.cmp(&e2);
        }
        let m = self.len();
        let (p1, p2) = (m - e1 + 1, m - e2 + 1);
        let l = self.lce(p1, p2);
        if l >= e1.min(e2) {
            e1.cmp(&e2)
        } else {
            self.access(p1 + l).cmp(&self.access(p2 + l))
        }
    }

    /// Text symbol `T[p]` for `p <= m`.
    pub fn text_symbol(&self, p: usize) -> Symbol {
        self.access(self.len() - p + 1)
    }
}
