//! Run-length compressed suffix array pieces built from an RL-BWT alone:
//! shortcut maps for powers of LF, text-position samples, a run-head search
//! over LF images, and a block index answering SA lookups by pointer descent.
//!
//! Binary layout written by [`CompressedIndex::to_bytes`], all integers
//! little-endian:
//!
//! ```text
//! magic "QLZI"  version:u32
//! repeated sections: tag:u32 length:u64 payload
//!   1 rlbwt    n:u64 r:u64 (symbol:u32 runlength:u64)*r
//!   2 levels   tau:u64 count:u32 (m:u64 (start:u64 image:u64 symbol:u32)*m)*count
//!   3 samples  count:u64 rank:u64*count        ranks of positions n, n-tau, n-2tau, ...
//!   4 blocks   s1:u64 lstar:u32
//!              level-0: count:u64 (start:u64 width:u64 anchor:u64 pointer)*count
//!              levels 1..lstar-1, per run: 4 half pointers, 3 straddling pointers
//!              last level, per run: lo:u64 base:u64 m:u64 dsa:i64*m
//!              run samples: r:u64 (start_sa:u64 end_sa:u64)*r
//! pointer = present:u8 [start:u64 width:u64 run:u64 off:u64 delta:i64]
//! ```

use std::collections::HashMap;
use std::io::{Cursor, Read};
use std::sync::atomic::{AtomicU64, Ordering};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::dynamic_lce::{Hasher, PrefixHashes};
use crate::error::{Error, Result};
use crate::quantum_sim::{Symbol, SENTINEL};
use crate::reference_kit::Rlbwt;

const HASH_SEED: u64 = 0x51_7a_1d_e5;
pub const FORMAT_VERSION: u32 = 1;

/// Smallest power of two at least `ceil(sqrt(n / r))`.
pub fn index_tau(n: usize, r: usize) -> usize {
    let want = ((n as f64) / (r.max(1) as f64)).sqrt().ceil().max(1.0) as usize;
    want.next_power_of_two()
}

/// One level of the hierarchy: a partition of `[1..n]` into intervals on
/// which `LF^(2^k)` is a shift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelMap {
    starts: Vec<usize>,
    images: Vec<usize>,
    symbols: Vec<u32>,
    n: usize,
}

impl LevelMap {
    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    fn find(&self, i: usize) -> usize {
        self.starts.partition_point(|&s| s <= i) - 1
    }

    fn end(&self, k: usize) -> usize {
        self.starts.get(k + 1).map_or(self.n, |&s| s - 1)
    }

    pub fn map(&self, i: usize) -> usize {
        let k = self.find(i);
        self.images[k] + (i - self.starts[k])
    }

    /// `(start, end, image of start, replacement symbol)` per interval.
    pub fn intervals(&self) -> impl Iterator<Item = (usize, usize, usize, u32)> + '_ {
        (0..self.len()).map(|k| (self.starts[k], self.end(k), self.images[k], self.symbols[k]))
    }
}

/// LF, its power-of-two iterates up to `tau`, text-position samples every
/// `tau` positions, and Karp-Rabin prefix hashes for LCE.
#[derive(Debug)]
pub struct ShortcutLF {
    rlbwt: Rlbwt,
    tau: usize,
    levels: Vec<LevelMap>,
    /// rank of text position `n - t * tau` at index `t`
    grid: Vec<usize>,
    sampled: HashMap<usize, usize>,
    hashes: PrefixHashes,
    sa_queries: AtomicU64,
    isa_queries: AtomicU64,
}

impl ShortcutLF {
    /// Builds the LF hierarchy by repeated interval splitting. No samples yet.
    pub fn build(rlbwt: Rlbwt, tau: usize) -> Result<Self> {
        if tau == 0 || !tau.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("tau must be a power of two, got {tau}")));
        }
        let n = rlbwt.n();
        if n == 0 || rlbwt.rank(SENTINEL, n) != 1 {
            return Err(Error::MissingSentinel);
        }
        let mut base = LevelMap { starts: Vec::new(), images: Vec::new(), symbols: Vec::new(), n };
        for k in 0..rlbwt.r() {
            let s = rlbwt.run_start(k);
            base.starts.push(s);
            base.images.push(rlbwt.lf(s));
            base.symbols.push(rlbwt.runs()[k].0);
        }
        let mut levels = vec![base];
        while 1usize << levels.len() <= tau {
            let next = Self::square(levels.last().unwrap());
            levels.push(next);
        }
        let text = rlbwt.invert();
        let hashes = Hasher::seeded(HASH_SEED).prefixes(&text);
        Ok(ShortcutLF {
            rlbwt,
            tau,
            levels,
            grid: Vec::new(),
            sampled: HashMap::new(),
            hashes,
            sa_queries: AtomicU64::new(0),
            isa_queries: AtomicU64::new(0),
        })
    }

    /// Level for `LF^(2^(k+1))`: split every interval where its image crosses
    /// an interval boundary, then merge neighbours with equal new symbols.
    fn square(lv: &LevelMap) -> LevelMap {
        let mut pieces: Vec<(usize, usize, (u32, u32))> = Vec::new();
        for a in 0..lv.len() {
            let (s, e) = (lv.starts[a], lv.end(a));
            let len = e - s + 1;
            let mut off = 0;
            let mut pos = lv.images[a];
            while off < len {
                let b = lv.find(pos);
                let take = (len - off).min(lv.end(b) - pos + 1);
                pieces.push((s + off, lv.images[b] + (pos - lv.starts[b]), (lv.symbols[b], lv.symbols[a])));
                off += take;
                pos += take;
            }
        }
        let mut names: HashMap<(u32, u32), u32> = HashMap::new();
        let mut out = LevelMap { starts: Vec::new(), images: Vec::new(), symbols: Vec::new(), n: lv.n };
        for (start, image, pair) in pieces {
            let fresh = names.len() as u32;
            let sym = *names.entry(pair).or_insert(fresh);
            if out.symbols.last() == Some(&sym) {
                let k = out.len() - 1;
                debug_assert_eq!(out.images[k] + (start - out.starts[k]), image);
                continue;
            }
            out.starts.push(start);
            out.images.push(image);
            out.symbols.push(sym);
        }
        out
    }

    pub fn n(&self) -> usize {
        self.rlbwt.n()
    }

    pub fn r(&self) -> usize {
        self.rlbwt.r()
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn rlbwt(&self) -> &Rlbwt {
        &self.rlbwt
    }

    pub fn levels(&self) -> &[LevelMap] {
        &self.levels
    }

    pub fn lf(&self, i: usize) -> usize {
        self.levels[0].map(i)
    }

    /// `LF^(2^k)[i]`.
    pub fn lf_pow2(&self, k: usize, i: usize) -> usize {
        self.levels[k].map(i)
    }

    /// `LF^m[i]`, greedily using the largest stored power.
    pub fn lf_steps(&self, mut i: usize, mut m: usize) -> usize {
        for k in (0..self.levels.len()).rev() {
            while m >= 1 << k {
                i = self.levels[k].map(i);
                m -= 1 << k;
            }
        }
        i
    }

    /// Records the ranks of text positions `n, n - tau, ...` by iterating
    /// `LF^tau` from the sentinel suffix.
    pub fn sample_sa(&mut self) {
        let n = self.n();
        let mut grid = vec![1usize];
        let mut p = n;
        let mut rank = 1;
        while p > self.tau {
            p -= self.tau;
            rank = self.lf_steps(rank, self.tau);
            grid.push(rank);
        }
        self.sampled = grid.iter().enumerate().map(|(t, &rk)| (rk, n - t * self.tau)).collect();
        self.grid = grid;
    }

    /// `(text position, rank)` per sample.
    pub fn samples(&self) -> Vec<(usize, usize)> {
        self.grid.iter().enumerate().map(|(t, &rk)| (self.n() - t * self.tau, rk)).collect()
    }

    fn need_samples(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidArgument("suffix array samples not built".into()));
        }
        Ok(())
    }

    pub fn sa_queries(&self) -> u64 {
        self.sa_queries.load(Ordering::Relaxed)
    }

    pub fn isa_queries(&self) -> u64 {
        self.isa_queries.load(Ordering::Relaxed)
    }

    /// `SA[i]`: walk LF until a sampled rank, at most `tau` steps.
    pub fn sa_query(&self, i: usize) -> Result<usize> {
        self.need_samples()?;
        let n = self.n();
        if i == 0 || i > n {
            return Err(Error::OutOfRange { pos: i, len: n });
        }
        self.sa_queries.fetch_add(1, Ordering::Relaxed);
        let mut j = i;
        for t in 0..=self.tau {
            if let Some(&p) = self.sampled.get(&j) {
                return Ok((p - 1 + t) % n + 1);
            }
            j = self.lf(j);
        }
        unreachable!("a sample lies within tau LF steps")
    }

    /// `ISA[p]`: rank of the next sampled position at or after `p`, pulled
    /// back with shortcut LF.
    pub fn isa_query(&self, p: usize) -> Result<usize> {
        self.need_samples()?;
        let n = self.n();
        if p == 0 || p > n {
            return Err(Error::OutOfRange { pos: p, len: n });
        }
        self.isa_queries.fetch_add(1, Ordering::Relaxed);
        let d = (n - p) % self.tau;
        let q = p + d;
        Ok(self.lf_steps(self.grid[(n - q) / self.tau], d))
    }

    /// Longest common extension of text positions `a` and `b`.
    pub fn lce(&self, a: usize, b: usize) -> usize {
        let n = self.n();
        if a == b {
            return n + 1 - a;
        }
        let cap = n + 1 - a.max(b);
        let (mut lo, mut hi) = (0, cap);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if self.hashes.range(a, a + mid - 1).same(&self.hashes.range(b, b + mid - 1)) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// Common prefix length of all suffixes with ranks in `[s, e]`.
    pub fn lcp_range(&self, s: usize, e: usize) -> Result<usize> {
        if s == 0 || s > e || e > self.n() {
            return Err(Error::EmptyRange { a: s, b: e });
        }
        let a = self.sa_query(s)?;
        if s == e {
            return Ok(self.n() + 1 - a);
        }
        let b = self.sa_query(e)?;
        Ok(self.lce(a, b))
    }

    /// Smallest `k` such that `LF^k([s, e])` is an interval `[s', e']`
    /// holding a run head. Returns `(k, s', e')`.
    ///
    /// `[s-1, e]` keeps shifting as one block for `m` steps exactly when the
    /// suffixes `m` positions earlier are contiguous in rank and share `m`
    /// symbols, so the largest such `m` is the answer; found by exponential
    /// then binary search.
    pub fn lf_k_search(&self, s: usize, e: usize) -> Result<(usize, usize, usize)> {
        if s == 0 || s > e || e > self.n() {
            return Err(Error::EmptyRange { a: s, b: e });
        }
        if s == 1 || self.rlbwt.run_of(s - 1) != self.rlbwt.run_of(e) {
            return Ok((0, s, e));
        }
        let a = self.sa_query(s - 1)?;
        let b = self.sa_query(e)?;
        let limit = a.min(b) - 1;
        let width = e - s + 1;
        let holds = |m: usize| -> Result<Option<(usize, usize)>> {
            if m > limit {
                return Ok(None);
            }
            let x = self.isa_query(a - m)?;
            let y = self.isa_query(b - m)?;
            Ok((y == x + width && self.lce(a - m, b - m) >= m).then_some((x, y)))
        };
        let mut good = (0, (s - 1, e));
        let mut m = 1;
        let bad = loop {
            match holds(m)? {
                Some(xy) => {
                    good = (m, xy);
                    m *= 2;
                }
                None => break m,
            }
        };
        let (mut lo, mut hi) = (good.0, bad);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            match holds(mid)? {
                Some(xy) => {
                    good = (mid, xy);
                    lo = mid;
                }
                None => hi = mid,
            }
        }
        let (k, (x, y)) = good;
        Ok((k, x + 1, y))
    }
}

/// `<q*, off, delta>`: the block `[start, start + width - 1]` has the same
/// DSA content as the block starting at `q* - s + off` one level down, and
/// `SA[x] = SA[target(x)] + delta` on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pointer {
    pub start: usize,
    pub width: usize,
    /// run whose head is `q*`
    pub run: usize,
    pub off: usize,
    pub delta: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Level0Block {
    start: usize,
    width: usize,
    anchor: usize,
    ptr: Pointer,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
struct RunBlocks {
    halves: [Option<Pointer>; 4],
    straddle: [Option<Pointer>; 3],
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Explicit {
    lo: usize,
    base: usize,
    dsa: Vec<i64>,
}

/// Block index answering `SA[i]` by following pointers through levels of
/// halving block size down to explicitly stored DSA values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GagieIndex {
    n: usize,
    /// `s[l]` for `l = 0..=lstar`; `s[0] = s[1]` is the level-0 block width
    s: Vec<usize>,
    lstar: usize,
    run_starts: Vec<usize>,
    level0: Vec<Level0Block>,
    /// `mid[l-1][run]` for levels `1..lstar`
    mid: Vec<Vec<RunBlocks>>,
    last: Vec<Explicit>,
    run_sa: Vec<(usize, usize)>,
    build_sa_queries: u64,
    build_isa_queries: u64,
}

/// Records one pointer target for `[start, end]`, which must reach a run
/// head whose double block on the next level has half width `s_next`.
fn make_pointer(sh: &ShortcutLF, start: usize, end: usize, s_next: usize) -> Result<Pointer> {
    let (k, s2, e2) = sh.lf_k_search(start, end)?;
    let rl = sh.rlbwt();
    let mut run = rl.run_of(s2);
    if rl.run_start(run) != s2 {
        run += 1;
    }
    let q = rl.run_start(run);
    debug_assert!(q <= e2, "image [{s2}, {e2}] holds no run head");
    let delta = if k == 0 {
        0
    } else {
        sh.sa_query(start - 1)? as i64 - sh.sa_query(s2 - 1)? as i64
    };
    Ok(Pointer { start, width: end - start + 1, run, off: s2 + s_next - q, delta })
}

fn clip(a: i64, b: i64, n: usize) -> Option<(usize, usize)> {
    let (a, b) = (a.max(1), b.min(n as i64));
    (a <= b).then_some((a as usize, b as usize))
}

impl GagieIndex {
    /// Builds every level from the shortcut structure; samples must exist.
    pub fn build(sh: &ShortcutLF) -> Result<Self> {
        sh.need_samples()?;
        let (sa0, isa0) = (sh.sa_queries(), sh.isa_queries());
        let n = sh.n();
        let r = sh.r();
        let ratio = n.div_ceil(r);
        let s1 = ratio.next_power_of_two();
        let cutoff = 2 * (usize::BITS - (ratio - 1).leading_zeros()) as usize + 2;
        let mut s = vec![s1, s1];
        while *s.last().unwrap() > cutoff && *s.last().unwrap() > 1 {
            s.push(s.last().unwrap() / 2);
        }
        let lstar = s.len() - 1;
        let run_starts: Vec<usize> = (0..r).map(|k| sh.rlbwt().run_start(k)).collect();

        let mut level0 = Vec::new();
        let mut start = 1;
        while start <= n {
            let end = (start + s1 - 1).min(n);
            let anchor = sh.sa_query(start)?;
            let ptr = make_pointer(sh, start, end, s[1])?;
            level0.push(Level0Block { start, width: end - start + 1, anchor, ptr });
            start = end + 1;
        }

        let mut mid = Vec::new();
        for l in 1..lstar {
            let (sl, sn) = (s[l] as i64, s[l + 1] as i64);
            let q4 = (s[l] as i64 + 3) / 4;
            let mut per_run = Vec::with_capacity(r);
            for &q in &run_starts {
                let q = q as i64;
                let mut rb = RunBlocks::default();
                for h in 0..4 {
                    let a = q - sl + 1 + h as i64 * sn;
                    if let Some((a, b)) = clip(a, a + sn - 1, n) {
                        rb.halves[h] = Some(make_pointer(sh, a, b, s[l + 1])?);
                    }
                }
                let straddling = [(q - sl + q4 + 1, q - q4), (q - q4 + 1, q + q4), (q + q4 + 1, q + sl - q4)];
                for (t, &(a, b)) in straddling.iter().enumerate() {
                    if let Some((a, b)) = clip(a, b, n) {
                        rb.straddle[t] = Some(make_pointer(sh, a, b, s[l + 1])?);
                    }
                }
                per_run.push(rb);
            }
            mid.push(per_run);
        }

        let sl = s[lstar] as i64;
        let mut last = Vec::with_capacity(r);
        for &q in &run_starts {
            let (lo, hi) = clip(q as i64 - sl + 1, q as i64 + sl, n).expect("q itself is inside");
            let sas: Vec<usize> = (lo..=hi).map(|x| sh.sa_query(x)).collect::<Result<_>>()?;
            let dsa = sas.windows(2).map(|w| w[1] as i64 - w[0] as i64).collect();
            last.push(Explicit { lo, base: sas[0], dsa });
        }

        let mut idx = GagieIndex {
            n,
            s,
            lstar,
            run_starts,
            level0,
            mid,
            last,
            run_sa: Vec::new(),
            build_sa_queries: 0,
            build_isa_queries: 0,
        };
        idx.build_sa_queries = sh.sa_queries() - sa0;
        idx.build_isa_queries = sh.isa_queries() - isa0;
        // run boundary samples for locate, answered by the index itself
        let rl = sh.rlbwt();
        idx.run_sa = (0..r)
            .map(|k| {
                let a = rl.run_start(k);
                let b = a + rl.runs()[k].1 - 1;
                Ok((idx.sa(a)?, idx.sa(b)?))
            })
            .collect::<Result<_>>()?;
        Ok(idx)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> usize {
        self.lstar + 1
    }

    /// Half block widths `s_0..s_lstar`.
    pub fn block_sizes(&self) -> &[usize] {
        &self.s
    }

    /// SA queries spent on the shortcut structure while building.
    pub fn build_sa_queries(&self) -> u64 {
        self.build_sa_queries
    }

    pub fn build_isa_queries(&self) -> u64 {
        self.build_isa_queries
    }

    /// Number of explicitly stored DSA entries on the last level.
    pub fn explicit_entries(&self) -> usize {
        self.last.iter().map(|e| e.dsa.len() + 1).sum()
    }

    fn target(&self, p: &Pointer, level: usize, x: usize) -> usize {
        self.run_starts[p.run] + p.off + (x - p.start) - self.s[level]
    }

    /// Every stored pointer with the level it points into and its target start.
    pub fn pointers(&self) -> Vec<(usize, Pointer, usize)> {
        let mut out: Vec<(usize, Pointer, usize)> =
            self.level0.iter().map(|b| (1, b.ptr, self.target(&b.ptr, 1, b.ptr.start))).collect();
        for (l, per_run) in self.mid.iter().enumerate() {
            let lvl = l + 2;
            for rb in per_run {
                for p in rb.halves.iter().chain(rb.straddle.iter()).flatten() {
                    out.push((lvl, *p, self.target(p, lvl, p.start)));
                }
            }
        }
        out
    }

    /// `SA[i]` by pointer descent.
    pub fn sa(&self, i: usize) -> Result<usize> {
        if i == 0 || i > self.n {
            return Err(Error::OutOfRange { pos: i, len: self.n });
        }
        let b = &self.level0[(i - 1) / self.s[0]];
        if i == b.start {
            return Ok(b.anchor);
        }
        let mut acc = b.ptr.delta;
        let mut x = self.target(&b.ptr, 1, i);
        let mut run = b.ptr.run;
        for l in 1..self.lstar {
            let q = self.run_starts[run];
            let h = (x + self.s[l] - 1 - q) / self.s[l + 1];
            let p = self.mid[l - 1][run].halves[h].as_ref().expect("half block inside text");
            acc += p.delta;
            x = self.target(p, l + 1, x);
            run = p.run;
        }
        let e = &self.last[run];
        let v = e.base as i64 + e.dsa[..x - e.lo].iter().sum::<i64>() + acc;
        Ok(v as usize)
    }

    /// `phi(p) = SA[ISA[p] - 1]` from the run-head samples.
    fn phi(&self, heads: &[(usize, usize)], p: usize) -> usize {
        let k = heads.partition_point(|&(x, _)| x <= p) - 1;
        let (x, v) = heads[k];
        v + (p - x)
    }

    /// Backward search for `pattern`, then positions of all occurrences,
    /// sorted.
    pub fn count_and_locate(&self, rlbwt: &Rlbwt, pattern: &[Symbol]) -> (usize, Vec<usize>) {
        let n = self.n;
        if pattern.is_empty() || rlbwt.n() != n {
            return (0, Vec::new());
        }
        let (mut sp, mut ep) = (1usize, n);
        let mut toe = self.run_sa[rlbwt.r() - 1].1;
        let dec = |v: usize| if v == 1 { n } else { v - 1 };
        for &c in pattern.iter().rev() {
            if !rlbwt.contains_symbol(c) {
                return (0, Vec::new());
            }
            let base = rlbwt.smaller_than(c);
            let hi = rlbwt.rank(c, ep);
            let lo = rlbwt.rank(c, sp - 1);
            if hi == lo {
                return (0, Vec::new());
            }
            toe = if rlbwt.access(ep) == c {
                dec(toe)
            } else {
                let j = rlbwt.select(c, hi).expect("rank counted it");
                dec(self.run_sa[rlbwt.run_of(j)].1)
            };
            sp = base + lo + 1;
            ep = base + hi;
        }
        let mut heads: Vec<(usize, usize)> = (1..rlbwt.r()).map(|k| (self.run_sa[k].0, self.run_sa[k - 1].1)).collect();
        heads.sort_unstable();
        let mut out = Vec::with_capacity(ep - sp + 1);
        out.push(toe);
        let mut cur = toe;
        for _ in sp..ep {
            cur = self.phi(&heads, cur);
            out.push(cur);
        }
        out.sort_unstable();
        (ep - sp + 1, out)
    }
}

/// Shortcut structure plus block index, serializable as one file.
#[derive(Debug)]
pub struct CompressedIndex {
    pub shortcut: ShortcutLF,
    pub gagie: GagieIndex,
}

impl CompressedIndex {
    /// Full build with the default `tau`.
    pub fn build(rlbwt: Rlbwt) -> Result<Self> {
        let tau = index_tau(rlbwt.n(), rlbwt.r());
        Self::build_with_tau(rlbwt, tau)
    }

    pub fn build_with_tau(rlbwt: Rlbwt, tau: usize) -> Result<Self> {
        let mut shortcut = ShortcutLF::build(rlbwt, tau)?;
        shortcut.sample_sa();
        let gagie = GagieIndex::build(&shortcut)?;
        Ok(CompressedIndex { shortcut, gagie })
    }

    pub fn count_and_locate(&self, pattern: &[Symbol]) -> (usize, Vec<usize>) {
        self.gagie.count_and_locate(self.shortcut.rlbwt(), pattern)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"QLZI");
        out.write_u32::<LE>(FORMAT_VERSION).unwrap();
        let sh = &self.shortcut;

        let mut sec = Vec::new();
        sec.write_u64::<LE>(sh.n() as u64).unwrap();
        sec.write_u64::<LE>(sh.r() as u64).unwrap();
        for &(c, l) in sh.rlbwt.runs() {
            sec.write_u32::<LE>(c).unwrap();
            sec.write_u64::<LE>(l as u64).unwrap();
        }
        section(&mut out, 1, &sec);

        let mut sec = Vec::new();
        sec.write_u64::<LE>(sh.tau as u64).unwrap();
        sec.write_u32::<LE>(sh.levels.len() as u32).unwrap();
        for lv in &sh.levels {
            sec.write_u64::<LE>(lv.len() as u64).unwrap();
            for k in 0..lv.len() {
                sec.write_u64::<LE>(lv.starts[k] as u64).unwrap();
                sec.write_u64::<LE>(lv.images[k] as u64).unwrap();
                sec.write_u32::<LE>(lv.symbols[k]).unwrap();
            }
        }
        section(&mut out, 2, &sec);

        let mut sec = Vec::new();
        sec.write_u64::<LE>(sh.grid.len() as u64).unwrap();
        for &rk in &sh.grid {
            sec.write_u64::<LE>(rk as u64).unwrap();
        }
        section(&mut out, 3, &sec);

        let g = &self.gagie;
        let mut sec = Vec::new();
        sec.write_u64::<LE>(g.s[1] as u64).unwrap();
        sec.write_u32::<LE>(g.lstar as u32).unwrap();
        sec.write_u64::<LE>(g.level0.len() as u64).unwrap();
        for b in &g.level0 {
            sec.write_u64::<LE>(b.start as u64).unwrap();
            sec.write_u64::<LE>(b.width as u64).unwrap();
            sec.write_u64::<LE>(b.anchor as u64).unwrap();
            write_pointer(&mut sec, Some(&b.ptr));
        }
        for per_run in &g.mid {
            for rb in per_run {
                for p in rb.halves.iter().chain(rb.straddle.iter()) {
                    write_pointer(&mut sec, p.as_ref());
                }
            }
        }
        for e in &g.last {
            sec.write_u64::<LE>(e.lo as u64).unwrap();
            sec.write_u64::<LE>(e.base as u64).unwrap();
            sec.write_u64::<LE>(e.dsa.len() as u64).unwrap();
            for &d in &e.dsa {
                sec.write_i64::<LE>(d).unwrap();
            }
        }
        sec.write_u64::<LE>(g.run_sa.len() as u64).unwrap();
        for &(a, b) in &g.run_sa {
            sec.write_u64::<LE>(a as u64).unwrap();
            sec.write_u64::<LE>(b as u64).unwrap();
        }
        section(&mut out, 4, &sec);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor::new(bytes);
        let mut magic = [0u8; 4];
        cur.read_exact(&mut magic).map_err(fmt_err)?;
        if &magic != b"QLZI" {
            return Err(Error::Format("not an index file".into()));
        }
        let version = cur.read_u32::<LE>().map_err(fmt_err)?;
        if version != FORMAT_VERSION {
            return Err(Error::Version { found: version, expected: FORMAT_VERSION });
        }
        let mut rl = open_section(&mut cur, 1)?;
        let n = rd(&mut rl)?;
        let r = rd(&mut rl)?;
        let mut runs = Vec::with_capacity(r.min(bytes.len()));
        for _ in 0..r {
            let c = rl.read_u32::<LE>().map_err(fmt_err)?;
            runs.push((c, rd(&mut rl)?));
        }
        let rlbwt = Rlbwt::from_runs(runs)?;
        if rlbwt.n() != n {
            return Err(Error::Format("run lengths do not add up".into()));
        }

        let mut lv = open_section(&mut cur, 2)?;
        let tau = rd(&mut lv)?;
        let count = lv.read_u32::<LE>().map_err(fmt_err)?;
        let mut levels = Vec::new();
        for _ in 0..count {
            let m = rd(&mut lv)?;
            let mut map = LevelMap { starts: Vec::new(), images: Vec::new(), symbols: Vec::new(), n };
            for _ in 0..m {
                map.starts.push(rd(&mut lv)?);
                map.images.push(rd(&mut lv)?);
                map.symbols.push(lv.read_u32::<LE>().map_err(fmt_err)?);
            }
            levels.push(map);
        }

        let mut sm = open_section(&mut cur, 3)?;
        let count = rd(&mut sm)?;
        let grid: Vec<usize> = (0..count).map(|_| rd(&mut sm)).collect::<Result<_>>()?;

        let mut shortcut = ShortcutLF::build(rlbwt, tau)?;
        if shortcut.levels != levels {
            return Err(Error::Format("stored LF levels disagree with the RL-BWT".into()));
        }
        shortcut.sample_sa();
        if shortcut.grid != grid {
            return Err(Error::Format("stored samples disagree with the RL-BWT".into()));
        }

        let mut bl = open_section(&mut cur, 4)?;
        let s1 = rd(&mut bl)?;
        let lstar = bl.read_u32::<LE>().map_err(fmt_err)? as usize;
        let mut s = vec![s1, s1];
        for _ in 1..lstar {
            s.push(s.last().unwrap() / 2);
        }
        let nb = rd(&mut bl)?;
        let mut level0 = Vec::new();
        for _ in 0..nb {
            let start = rd(&mut bl)?;
            let width = rd(&mut bl)?;
            let anchor = rd(&mut bl)?;
            let ptr = read_pointer(&mut bl)?.ok_or_else(|| Error::Format("level-0 block without pointer".into()))?;
            level0.push(Level0Block { start, width, anchor, ptr });
        }
        let r = shortcut.r();
        let mut mid = Vec::new();
        for _ in 1..lstar {
            let mut per_run = Vec::with_capacity(r);
            for _ in 0..r {
                let mut rb = RunBlocks::default();
                for h in 0..4 {
                    rb.halves[h] = read_pointer(&mut bl)?;
                }
                for t in 0..3 {
                    rb.straddle[t] = read_pointer(&mut bl)?;
                }
                per_run.push(rb);
            }
            mid.push(per_run);
        }
        let mut last = Vec::with_capacity(r);
        for _ in 0..r {
            let lo = rd(&mut bl)?;
            let base = rd(&mut bl)?;
            let m = rd(&mut bl)?;
            let dsa = (0..m).map(|_| bl.read_i64::<LE>().map_err(fmt_err)).collect::<Result<_>>()?;
            last.push(Explicit { lo, base, dsa });
        }
        let m = rd(&mut bl)?;
        let run_sa = (0..m).map(|_| Ok((rd(&mut bl)?, rd(&mut bl)?))).collect::<Result<_>>()?;
        let run_starts = (0..r).map(|k| shortcut.rlbwt().run_start(k)).collect();
        let gagie = GagieIndex {
            n,
            s,
            lstar,
            run_starts,
            level0,
            mid,
            last,
            run_sa,
            build_sa_queries: 0,
            build_isa_queries: 0,
        };
        Ok(CompressedIndex { shortcut, gagie })
    }
}

fn fmt_err(e: std::io::Error) -> Error {
    Error::Format(format!("truncated index: {e}"))
}

fn rd(c: &mut Cursor<Vec<u8>>) -> Result<usize> {
    Ok(c.read_u64::<LE>().map_err(fmt_err)? as usize)
}

fn section(out: &mut Vec<u8>, tag: u32, payload: &[u8]) {
    out.write_u32::<LE>(tag).unwrap();
    out.write_u64::<LE>(payload.len() as u64).unwrap();
    out.extend_from_slice(payload);
}

fn open_section(cur: &mut Cursor<&[u8]>, tag: u32) -> Result<Cursor<Vec<u8>>> {
    let t = cur.read_u32::<LE>().map_err(fmt_err)?;
    if t != tag {
        return Err(Error::Format(format!("expected section {tag}, found {t}")));
    }
    let len = cur.read_u64::<LE>().map_err(fmt_err)? as usize;
    let left = cur.get_ref().len() - cur.position() as usize;
    if len > left {
        return Err(Error::Format("section runs past end of file".into()));
    }
    let mut buf = vec![0u8; len];
    cur.read_exact(&mut buf).map_err(fmt_err)?;
    Ok(Cursor::new(buf))
}

fn write_pointer(out: &mut Vec<u8>, p: Option<&Pointer>) {
    match p {
        None => out.write_u8(0).unwrap(),
        Some(p) => {
            out.write_u8(1).unwrap();
            out.write_u64::<LE>(p.start as u64).unwrap();
            out.write_u64::<LE>(p.width as u64).unwrap();
            out.write_u64::<LE>(p.run as u64).unwrap();
            out.write_u64::<LE>(p.off as u64).unwrap();
            out.write_i64::<LE>(p.delta).unwrap();
        }
    }
}

fn read_pointer(c: &mut Cursor<Vec<u8>>) -> Result<Option<Pointer>> {
    match c.read_u8().map_err(fmt_err)? {
        0 => Ok(None),
        1 => Ok(Some(Pointer {
            start: rd(c)?,
            width: rd(c)?,
            run: rd(c)?,
            off: rd(c)?,
            delta: c.read_i64::<LE>().map_err(fmt_err)?,
        })),
        b => Err(Error::Format(format!("bad pointer flag {b}"))),
    }
}
