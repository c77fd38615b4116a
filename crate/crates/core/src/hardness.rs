//! Lower-bound instances: threshold functions turned into binary texts and
//! into the zero-padded reduction text, plus the single-one promise family.

use std::cell::Cell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quantum_sim::{Symbol, TextOracle};
use crate::reference_kit::{count_runs, cyclic_bwt, lz77_greedy};

/// A boolean function on `1..=n` with a threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdInstance {
    pub f: Vec<bool>,
    pub t: usize,
}

impl ThresholdInstance {
    pub fn new(f: Vec<bool>, t: usize) -> Self {
        ThresholdInstance { f, t }
    }

    /// `f` that is 1 exactly on `set` (1-based).
    pub fn with_set(n: usize, set: &[usize], t: usize) -> Result<Self> {
        let mut f = vec![false; n];
        for &i in set {
            if i == 0 || i > n {
                return Err(Error::OutOfRange { pos: i, len: n });
            }
            f[i - 1] = true;
        }
        Ok(ThresholdInstance { f, t })
    }

    /// Each input is 1 with probability `density`.
    pub fn random(n: usize, density: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = (0..n).map(|_| rng.gen_bool(density.clamp(0.0, 1.0))).collect();
        ThresholdInstance { f, t: 1 }
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    /// `S = {i : f(i) = 1}`.
    pub fn witness_set(&self) -> Vec<usize> {
        (1..=self.n()).filter(|&i| self.f[i - 1]).collect()
    }

    pub fn weight(&self) -> usize {
        self.f.iter().filter(|&&b| b).count()
    }

    /// Whether at least `t` inputs are 1.
    pub fn answer(&self) -> bool {
        self.weight() >= self.t
    }
}

/// `f(1) f(2) ... f(n)` over {0, 1}.
pub fn gen_binary_string(inst: &ThresholdInstance) -> Vec<Symbol> {
    inst.f.iter().map(|&b| b as Symbol).collect()
}

/// Symbol codes of the reduction text: `'0'`, `'$'`, and `i` as `i + 1`.
pub const ZERO: Symbol = 0;
pub const DOLLAR: Symbol = 1;

/// `0^{2n} $ (0 s_1)(0 s_2)...(0 s_n) 0` where `s_i = i` if `f(i) = 1` and
/// `'0'` otherwise, evaluated one position at a time.
#[derive(Debug)]
pub struct ReductionOracle {
    f: Vec<bool>,
    probes: Cell<u64>,
}

impl ReductionOracle {
    pub fn new(inst: &ThresholdInstance) -> Result<Self> {
        if inst.n() == 0 {
            return Err(Error::InvalidArgument("reduction needs n >= 1".into()));
        }
        Ok(ReductionOracle { f: inst.f.clone(), probes: Cell::new(0) })
    }

    /// Text length `4n + 2`.
    pub fn len(&self) -> usize {
        4 * self.f.len() + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of `f` evaluations so far.
    pub fn probes(&self) -> u64 {
        self.probes.get()
    }

    pub fn symbol(&self, p: usize) -> Result<Symbol> {
        let n = self.f.len();
        if p == 0 || p > self.len() {
            return Err(Error::OutOfRange { pos: p, len: self.len() });
        }
        Ok(if p <= 2 * n {
            ZERO
        } else if p == 2 * n + 1 {
            DOLLAR
        } else if p == self.len() || (p - 2 * n) % 2 == 0 {
            ZERO
        } else {
            let i = (p - 2 * n - 1) / 2;
            self.probes.set(self.probes.get() + 1);
            if self.f[i - 1] {
                i as Symbol + 1
            } else {
                ZERO
            }
        })
    }

    /// Every position, in order.
    pub fn materialize(&self) -> Vec<Symbol> {
        (1..=self.len()).map(|p| self.symbol(p).expect("in range")).collect()
    }

    /// An eager oracle over the same text.
    pub fn to_text_oracle(&self) -> Result<TextOracle> {
        TextOracle::new(self.materialize())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LemmaKind {
    /// LZ77 factors of the binary string at most `3|S| + 2`.
    ZBound,
    /// BWT runs of the binary string at most `2|S| + 1`.
    RBound,
    /// LZ77 factors of the reduction text exactly `2|S| + 4`.
    ReductionExact,
}

impl LemmaKind {
    pub const ALL: [LemmaKind; 3] = [LemmaKind::ZBound, LemmaKind::RBound, LemmaKind::ReductionExact];

    pub fn name(self) -> &'static str {
        match self {
            LemmaKind::ZBound => "z-bound",
            LemmaKind::RBound => "r-bound",
            LemmaKind::ReductionExact => "reduction-exact",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        LemmaKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown lemma {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaReport {
    pub kind: LemmaKind,
    pub n: usize,
    pub weight: usize,
    pub measure: usize,
    pub bound: usize,
    pub holds: bool,
}

/// Computes the measure with the reference compressors and compares it to
/// the bound. The BWT runs are those of the cyclic rotations, since the
/// binary string carries no sentinel.
pub fn verify_lemma(kind: LemmaKind, inst: &ThresholdInstance) -> Result<LemmaReport> {
    let s = inst.weight();
    let (measure, bound, holds) = match kind {
        LemmaKind::ZBound => {
            let z = lz77_greedy(&gen_binary_string(inst)).len();
            (z, 3 * s + 2, z <= 3 * s + 2)
        }
        LemmaKind::RBound => {
            let r = count_runs(&cyclic_bwt(&gen_binary_string(inst)));
            (r, 2 * s + 1, r <= 2 * s + 1)
        }
        LemmaKind::ReductionExact => {
            let z = lz77_greedy(&ReductionOracle::new(inst)?.materialize()).len();
            (z, 2 * s + 4, z == 2 * s + 4)
        }
    };
    Ok(LemmaReport { kind, n: inst.n(), weight: s, measure, bound, holds })
}

/// `{0^n} ∪ {0^i 1 0^(n-i-1) : 0 <= i < n}` as oracles, the all-zero text first.
pub fn gen_promise_instances(n: usize) -> Result<Vec<TextOracle>> {
    if n < 2 {
        return Err(Error::InvalidArgument("promise instances need n >= 2".into()));
    }
    let mut out = vec![TextOracle::new(vec![0; n])?];
    for i in 0..n {
        let mut t = vec![0; n];
        t[i] = 1;
        out.push(TextOracle::new(t)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binary_string_examples() {
        let zero = ThresholdInstance::with_set(10, &[], 1).unwrap();
        for kind in [LemmaKind::ZBound, LemmaKind::RBound] {
            let rep = verify_lemma(kind, &zero).unwrap();
            assert!(rep.holds);
        }
        assert_eq!(verify_lemma(LemmaKind::ZBound, &zero).unwrap().measure, 2);
        assert_eq!(verify_lemma(LemmaKind::RBound, &zero).unwrap().measure, 1);
        let ones = ThresholdInstance::with_set(10, &(1..=10).collect::<Vec<_>>(), 1).unwrap();
        assert_eq!(verify_lemma(LemmaKind::ZBound, &ones).unwrap().measure, 2);
        let three = ThresholdInstance::with_set(40, &[5, 17, 33], 2).unwrap();
        let z = verify_lemma(LemmaKind::ZBound, &three).unwrap();
        let r = verify_lemma(LemmaKind::RBound, &three).unwrap();
        assert!(z.holds && z.measure <= 11);
        assert!(r.holds && r.measure <= 7);
        assert!(three.answer());
    }

    #[test]
    fn reduction_text_shape() {
        let inst = ThresholdInstance::with_set(3, &[2], 1).unwrap();
        let o = ReductionOracle::new(&inst).unwrap();
        assert_eq!(o.materialize(), vec![0, 0, 0, 0, 0, 0, DOLLAR, 0, 0, 0, 3, 0, 0, 0]);
        assert_eq!(o.len(), 14);
        assert_eq!(lz77_greedy(&o.materialize()).len(), 6);
        let all = ThresholdInstance::with_set(3, &[1, 2, 3], 1).unwrap();
        assert_eq!(verify_lemma(LemmaKind::ReductionExact, &all).unwrap().measure, 10);
        assert!(verify_lemma(LemmaKind::ReductionExact, &all).unwrap().holds);
    }

    #[test]
    fn reduction_with_empty_set_has_five_factors() {
        // 0^{2n} $ 0^{2n+1}: 0 | 0^{2n-1} | $ | 0^{2n} | 0, one more than 2|S| + 4
        for n in [1, 3, 10] {
            let inst = ThresholdInstance::with_set(n, &[], 1).unwrap();
            let rep = verify_lemma(LemmaKind::ReductionExact, &inst).unwrap();
            assert_eq!(rep.measure, 5);
            assert_eq!(rep.bound, 4);
            assert!(!rep.holds);
        }
    }

    #[test]
    fn probes_only_on_odd_tail_positions() {
        let inst = ThresholdInstance::random(9, 0.5, 1);
        let o = ReductionOracle::new(&inst).unwrap();
        for p in 1..=o.len() {
            let before = o.probes();
            o.symbol(p).unwrap();
            let odd_tail = p > 2 * 9 + 1 && p < o.len() && p % 2 == 1;
            assert_eq!(o.probes() - before, odd_tail as u64, "p={p}");
        }
        assert!(o.symbol(0).is_err());
        assert!(ReductionOracle::new(&ThresholdInstance::new(vec![], 1)).is_err());
    }

    #[test]
    fn minimal_instances() {
        for set in [vec![], vec![1]] {
            let inst = ThresholdInstance::with_set(1, &set, 1).unwrap();
            assert!(verify_lemma(LemmaKind::ZBound, &inst).unwrap().holds);
            assert!(verify_lemma(LemmaKind::RBound, &inst).unwrap().holds);
        }
        let one = ThresholdInstance::with_set(1, &[1], 1).unwrap();
        assert!(verify_lemma(LemmaKind::ReductionExact, &one).unwrap().holds);
    }

    #[test]
    fn promise_family() {
        let inst = gen_promise_instances(4).unwrap();
        assert_eq!(inst.len(), 5);
        for (k, mut o) in inst.into_iter().enumerate() {
            let hit = o.grover_any(1, 4, |i, v| v.get(i) == 1, 1).unwrap();
            assert_eq!(hit, if k == 0 { None } else { Some(k) });
        }
        assert!(gen_promise_instances(1).is_err());
    }

    #[test]
    fn lemma_kind_names() {
        for k in LemmaKind::ALL {
            assert_eq!(LemmaKind::parse(k.name()).unwrap(), k);
        }
        assert!(LemmaKind::parse("nope").is_err());
    }

    proptest! {
        #[test]
        fn lemmas_hold_on_random_functions(f in prop::collection::vec(any::<bool>(), 1..200)) {
            let inst = ThresholdInstance::new(f, 1);
            for kind in LemmaKind::ALL {
                let rep = verify_lemma(kind, &inst).unwrap();
                if kind == LemmaKind::ReductionExact && rep.weight == 0 {
                    prop_assert_eq!(rep.measure, 5);
                } else {
                    prop_assert!(rep.holds, "{:?}", rep);
                }
            }
        }

        #[test]
        fn lazy_symbols_match_materialized(f in prop::collection::vec(any::<bool>(), 1..64)) {
            let inst = ThresholdInstance::new(f, 1);
            let o = ReductionOracle::new(&inst).unwrap();
            let eager = o.materialize();
            let n = inst.n() as u64;
            prop_assert_eq!(o.probes(), n);
            for (p, &c) in eager.iter().enumerate() {
                prop_assert_eq!(o.symbol(p + 1).unwrap(), c);
            }
            prop_assert_eq!(o.probes(), 2 * n);
        }
    }
}
