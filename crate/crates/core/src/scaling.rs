//! Query-count experiments over generated text families.

use crate::compressed_index::CompressedIndex;
use crate::error::Result;
use crate::generators;
use crate::lz_end_tau::{factorize_adaptive, Strategy};
use crate::quantum_sim::{NoiseConfig, TextOracle};
use crate::reference_kit::{bwt, Rlbwt};

/// One (family, n, seed) cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingRow {
    pub family: String,
    pub n: usize,
    pub seed: u64,
    /// LZ-End+tau factors of the final adaptive round.
    pub z: usize,
    /// Total oracle queries of the adaptive factorization.
    pub queries: u64,
    /// SA queries of the index build on the terminated text, if requested.
    pub index_sa_queries: Option<u64>,
}

/// Factorizes `generators::by_name(family, n, seed)` as given (no sentinel).
/// With `noise` in Bernoulli mode the oracle's coin uses the noise seed.
pub fn run_cell(family: &str, n: usize, seed: u64, noise: &NoiseConfig, with_index: bool) -> Result<ScalingRow> {
    let text = generators::by_name(family, n, seed)?;
    let mut oracle = TextOracle::new(text.clone())?;
    oracle.set_noise(noise.clone());
    let rep = factorize_adaptive(&mut oracle, Strategy::default())?;
    let index_sa_queries = if with_index {
        let rl = Rlbwt::from_bwt(&bwt(&generators::terminated(&text))?);
        Some(CompressedIndex::build(rl)?.gagie.build_sa_queries())
    } else {
        None
    };
    Ok(ScalingRow {
        family: family.to_string(),
        n,
        seed,
        z: rep.factorization.len(),
        queries: oracle.ledger().total(),
        index_sa_queries,
    })
}

/// Least-squares slope of `ln y` against `ln x`. `None` with fewer than two
/// distinct `x` or any non-positive coordinate.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0.ln()).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / k;
    let num: f64 = points.iter().map(|p| (p.0.ln() - mx) * (p.1.ln() - my)).sum();
    let den: f64 = points.iter().map(|p| (p.0.ln() - mx).powi(2)).sum();
    (den > 1e-12).then(|| num / den)
}

/// Mean of `value` per distinct `n`, in ascending `n`.
pub fn mean_by_n(rows: &[ScalingRow], value: impl Fn(&ScalingRow) -> Option<u64>) -> Vec<(f64, f64)> {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .filter_map(|n| {
            let vals: Vec<u64> = rows.iter().filter(|r| r.n == n).filter_map(&value).collect();
            (!vals.is_empty()).then(|| (n as f64, vals.iter().sum::<u64>() as f64 / vals.len() as f64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_laws() {
        let pts: Vec<(f64, f64)> = (4..10).map(|k| ((1u64 << k) as f64, 3.0 * ((1u64 << k) as f64).sqrt())).collect();
        assert!((loglog_slope(&pts).unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(loglog_slope(&pts[..1]), None);
        assert_eq!(loglog_slope(&[(1.0, 0.0), (2.0, 1.0)]), None);
    }

    #[test]
    fn cells_are_deterministic() {
        let a = run_cell("fibonacci", 300, 1, &NoiseConfig::exact(), true).unwrap();
        let b = run_cell("fibonacci", 300, 1, &NoiseConfig::exact(), true).unwrap();
        assert_eq!(a, b);
        assert!(a.queries > 0 && a.index_sa_queries.is_some());
        assert!(run_cell("nope", 10, 1, &NoiseConfig::exact(), false).is_err());
    }

    #[test]
    fn means_group_by_n() {
        let row = |n, q| ScalingRow { family: "f".into(), n, seed: 0, z: 1, queries: q, index_sa_queries: None };
        let rows = [row(8, 2), row(4, 1), row(8, 4)];
        assert_eq!(mean_by_n(&rows, |r| Some(r.queries)), vec![(4.0, 1.0), (8.0, 3.0)]);
        assert!(mean_by_n(&rows, |r| r.index_sa_queries).is_empty());
    }
}
