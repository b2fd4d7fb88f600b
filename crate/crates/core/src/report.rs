//! Per-`k` comparison table of knapsack guarantees and measured ratios.

use rayon::prelude::*;

use crate::baselines::{knapsack_baseline, KNAPSACK_BASELINES};
use crate::certificate::RunError;
use crate::knapsack_adversaries::{run_thm1, run_thm2, thm1_guarantee, thm1_threshold_guarantee, thm2_bound};
use crate::numerics::{format_rational, to_f64, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct Measured {
    pub algorithm: String,
    pub thm1: Rational,
    pub thm2: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub k: usize,
    /// `min_Γ max(branch ratios)`.
    pub thm1: Rational,
    /// What the threshold rule of the adversary actually enforces.
    pub thm1_threshold: Rational,
    pub thm2: Rational,
    /// Sorted by algorithm name; empty unless measurement was requested.
    pub measured: Vec<Measured>,
}

/// Rows for `k = 2..=kmax`. With `measure`, every knapsack baseline plays
/// both adversaries (the seeded one with `seed`). Rows are computed in
/// parallel and returned sorted by `k`.
pub fn table(kmax: usize, measure: bool, seed: u64) -> Result<Vec<TableRow>, RunError> {
    if kmax < 2 {
        return Err(RunError::InvalidRequest(format!("kmax must be at least 2, got {kmax}")));
    }
    let mut rows = (2..=kmax)
        .into_par_iter()
        .map(|k| row(k, measure, seed))
        .collect::<Result<Vec<_>, RunError>>()?;
    rows.sort_by_key(|r| r.k);
    Ok(rows)
}

fn row(k: usize, measure: bool, seed: u64) -> Result<TableRow, RunError> {
    let mut measured = Vec::new();
    if measure {
        for name in KNAPSACK_BASELINES {
            let thm1 = run_thm1(knapsack_baseline(name, seed)?.as_mut(), k)?.ratio_limit;
            let thm2 = run_thm2(knapsack_baseline(name, seed)?.as_mut(), k)?.ratio;
            measured.push(Measured { algorithm: name.to_string(), thm1, thm2 });
        }
        measured.sort_by(|a, b| a.algorithm.cmp(&b.algorithm));
    }
    Ok(TableRow {
        k,
        thm1: thm1_guarantee(k),
        thm1_threshold: thm1_threshold_guarantee(k),
        thm2: thm2_bound(k),
        measured,
    })
}

/// CSV header matching [`record`] for rows measured against `algorithms`.
pub fn header(algorithms: &[String]) -> Vec<String> {
    let mut h: Vec<String> = ["k", "thm1", "thm1_approx", "thm1_threshold", "thm2", "thm2_approx"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for a in algorithms {
        h.push(format!("thm1_{a}"));
        h.push(format!("thm2_{a}"));
    }
    h
}

pub fn record(row: &TableRow) -> Vec<String> {
    let mut r = vec![
        row.k.to_string(),
        format_rational(&row.thm1),
        format!("{:.6}", to_f64(&row.thm1)),
        format_rational(&row.thm1_threshold),
        format_rational(&row.thm2),
        format!("{:.6}", to_f64(&row.thm2)),
    ];
    for m in &row.measured {
        r.push(format_rational(&m.thm1));
        r.push(format_rational(&m.thm2));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpas_adversaries::thm1_constant;
    use crate::numerics::rat;

    #[test]
    fn spot_rows() {
        let rows = table(10, true, 3).unwrap();
        assert_eq!(rows.iter().map(|r| r.k).collect::<Vec<_>>(), (2..=10).collect::<Vec<_>>());
        assert_eq!((rows[1].thm1.clone(), rows[1].thm2.clone()), (rat(5, 4), rat(9, 7)));
        assert_eq!((rows[5].thm1.clone(), rows[5].thm2.clone()), (rat(11, 9), rat(21, 17)));
        for r in &rows {
            assert_eq!(r.thm1, r.thm1_threshold);
            for m in &r.measured {
                assert!(m.thm1 >= r.thm1 && m.thm2 >= r.thm2, "k = {}: {m:?}", r.k);
            }
        }
        let names: Vec<String> = rows[0].measured.iter().map(|m| m.algorithm.clone()).collect();
        assert_eq!(header(&names).len(), record(&rows[0]).len());
    }

    #[test]
    fn thm1_column_converges() {
        let rows = table(1000, false, 0).unwrap();
        let last = rows.last().unwrap();
        assert_eq!(last.k, 1000);
        assert!((to_f64(&last.thm1) - thm1_constant()).abs() < 1e-3);
        assert!(table(1, false, 0).is_err());
    }
}
