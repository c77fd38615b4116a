//! Text generators for experiments and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quantum_sim::Symbol;

/// First `n` symbols of the Fibonacci word over {0, 1} (0 -> 01, 1 -> 0).
pub fn fibonacci(n: usize) -> Vec<Symbol> {
    let (mut a, mut b) = (vec![0], vec![0, 1]);
    while b.len() < n {
        let next = [b.clone(), a].concat();
        a = b;
        b = next;
    }
    if n <= 1 {
        return a[..n].to_vec();
    }
    b.truncate(n);
    b
}

/// Thue-Morse: bit parity of the index.
pub fn thue_morse(n: usize) -> Vec<Symbol> {
    (0..n).map(|i| (i.count_ones() & 1) as Symbol).collect()
}

/// Period-doubling sequence (0 -> 01, 1 -> 00).
pub fn period_doubling(n: usize) -> Vec<Symbol> {
    (1..=n).map(|i| (i.trailing_zeros() & 1) as Symbol).collect()
}

/// Uniform random text over `0..sigma`.
pub fn random(n: usize, sigma: u32, seed: u64) -> Vec<Symbol> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0..sigma.max(1))).collect()
}

/// A random block of length about `sqrt(n)` copied repeatedly with sparse
/// point mutations (one per `mutation_gap` symbols on average).
pub fn repetitive(n: usize, sigma: u32, mutation_gap: usize, seed: u64) -> Vec<Symbol> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block = ((n as f64).sqrt() as usize).max(1);
    let base: Vec<Symbol> = (0..block).map(|_| rng.gen_range(0..sigma.max(1))).collect();
    (0..n)
        .map(|i| {
            if mutation_gap > 0 && rng.gen_range(0..mutation_gap) == 0 {
                rng.gen_range(0..sigma.max(1))
            } else {
                base[i % block]
            }
        })
        .collect()
}

/// Shifts every symbol up by one and appends the sentinel, so generated
/// texts (which use 0) can be indexed.
pub fn terminated(t: &[Symbol]) -> Vec<Symbol> {
    t.iter().map(|&c| c + 1).chain(std::iter::once(crate::quantum_sim::SENTINEL)).collect()
}

/// Generator by name, as used on the command line.
pub fn by_name(name: &str, n: usize, seed: u64) -> Result<Vec<Symbol>> {
    Ok(match name {
        "fibonacci" => fibonacci(n),
        "thue-morse" => thue_morse(n),
        "period-doubling" => period_doubling(n),
        "random-binary" => random(n, 2, seed),
        "random-dna" => random(n, 4, seed),
        "repetitive" => repetitive(n, 4, 64, seed),
        other => return Err(Error::InvalidArgument(format!("unknown generator {other:?}"))),
    })
}

pub const NAMES: [&str; 6] = ["fibonacci", "thue-morse", "period-doubling", "random-binary", "random-dna", "repetitive"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefixes() {
        assert_eq!(fibonacci(8), [0, 1, 0, 0, 1, 0, 1, 0]);
        assert_eq!(thue_morse(8), [0, 1, 1, 0, 1, 0, 0, 1]);
        assert_eq!(period_doubling(8), [0, 1, 0, 0, 0, 1, 0, 1]);
        assert_eq!(fibonacci(1), [0]);
        assert!(fibonacci(0).is_empty());
        assert_eq!(random(50, 2, 1), random(50, 2, 1));
        assert_eq!(repetitive(100, 4, 10, 3).len(), 100);
    }
}
