//! Exhaustive offline solvers used to cross-check constructive optima.
//!
//! The offline MPAS optimum is a bin packing optimum: a set of intervals with
//! peak `p` can be split into `p` non-overlapping groups (interval graph
//! coloring), and any packing into `p` bins can be laid out as stacked
//! intervals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::knapsack::{Item, ProfitMode};
use crate::mpas::IntervalAssignment;
use crate::numerics::EpsRational;

pub const KNAPSACK_ORACLE_LIMIT: usize = 14;
pub const BIN_PACKING_ORACLE_LIMIT: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{items} items exceed the oracle limit of {limit}")]
    TooLarge { items: usize, limit: usize },
    #[error("item size {0} outside (0, 1]")]
    BadSize(EpsRational),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingSolution {
    /// Item ids per bin; items not listed are rejected.
    pub bins: Vec<Vec<usize>>,
    pub objective: EpsRational,
}

fn check_sizes<'a>(sizes: impl IntoIterator<Item = &'a EpsRational>) -> Result<(), OracleError> {
    for s in sizes {
        if !s.is_positive() || *s > EpsRational::one() {
            return Err(OracleError::BadSize(s.clone()));
        }
    }
    Ok(())
}

/// Order positions by decreasing size so large items are branched on first.
fn decreasing(sizes: &[&EpsRational]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(sizes[a]));
    order
}

struct KnapsackSearch<'a> {
    items: &'a [Item],
    order: Vec<usize>,
    value: Vec<EpsRational>,
    suffix_value: Vec<EpsRational>,
    loads: Vec<EpsRational>,
    place: Vec<Option<usize>>,
    best: EpsRational,
    best_place: Vec<Option<usize>>,
}

impl KnapsackSearch<'_> {
    fn run(&mut self, depth: usize, current: &EpsRational) {
        if current > &self.best {
            self.best = current.clone();
            self.best_place = self.place.clone();
        }
        if depth == self.order.len() || current + &self.suffix_value[depth] <= self.best {
            return;
        }
        let idx = self.order[depth];
        let size = &self.items[idx].size;
        let one = EpsRational::one();
        for b in 0..self.loads.len() {
            // Bins with equal loads are interchangeable.
            if self.loads[..b].contains(&self.loads[b]) {
                continue;
            }
            let load = &self.loads[b] + size;
            if load > one {
                continue;
            }
            let prev = std::mem::replace(&mut self.loads[b], load);
            self.place[idx] = Some(b);
            let next = current + &self.value[idx];
            self.run(depth + 1, &next);
            self.place[idx] = None;
            self.loads[b] = prev;
        }
        self.run(depth + 1, current);
    }
}

/// Maximum-profit packing of `items` into `k` unit bins, rejection allowed.
pub fn brute_knapsack(items: &[Item], k: usize, mode: ProfitMode) -> Result<PackingSolution, OracleError> {
    if items.len() > KNAPSACK_ORACLE_LIMIT {
        return Err(OracleError::TooLarge {
            items: items.len(),
            limit: KNAPSACK_ORACLE_LIMIT,
        });
    }
    check_sizes(items.iter().map(|i| &i.size))?;
    let sizes: Vec<&EpsRational> = items.iter().map(|i| &i.size).collect();
    let order = decreasing(&sizes);
    let value: Vec<EpsRational> = items
        .iter()
        .map(|i| match mode {
            ProfitMode::Proportional => i.size.clone(),
            ProfitMode::Unit => EpsRational::one(),
        })
        .collect();
    let mut suffix_value = vec![EpsRational::zero(); order.len() + 1];
    for d in (0..order.len()).rev() {
        suffix_value[d] = &suffix_value[d + 1] + &value[order[d]];
    }
    let mut search = KnapsackSearch {
        items,
        order,
        value,
        suffix_value,
        loads: vec![EpsRational::zero(); k],
        place: vec![None; items.len()],
        best: EpsRational::zero(),
        best_place: vec![None; items.len()],
    };
    search.run(0, &EpsRational::zero());
    let mut bins = vec![Vec::new(); k];
    for (idx, b) in search.best_place.iter().enumerate() {
        if let Some(b) = b {
            bins[*b].push(items[idx].id);
        }
    }
    Ok(PackingSolution {
        bins,
        objective: search.best,
    })
}

struct BinPackingSearch<'a> {
    sizes: &'a [EpsRational],
    order: Vec<usize>,
    suffix_size: Vec<EpsRational>,
    loads: Vec<EpsRational>,
    place: Vec<usize>,
    best: usize,
    best_place: Vec<usize>,
}

impl BinPackingSearch<'_> {
    fn run(&mut self, depth: usize) {
        if depth == self.order.len() {
            if self.loads.len() < self.best {
                self.best = self.loads.len();
                self.best_place = self.place.clone();
            }
            return;
        }
        // Lower bound: open bins, or total size of everything placed and
        // still to place.
        let total = &self.loads.iter().sum::<EpsRational>() + &self.suffix_size[depth];
        let bound = (self.loads.len() as u64).max(u64::try_from(total.ceil()).unwrap_or(u64::MAX));
        if bound >= self.best as u64 {
            return;
        }
        let idx = self.order[depth];
        let size = &self.sizes[idx];
        let one = EpsRational::one();
        for b in 0..self.loads.len() {
            if self.loads[..b].contains(&self.loads[b]) {
                continue;
            }
            let load = &self.loads[b] + size;
            if load > one {
                continue;
            }
            let prev = std::mem::replace(&mut self.loads[b], load);
            self.place[idx] = b;
            self.run(depth + 1);
            self.loads[b] = prev;
        }
        if self.loads.len() + 1 < self.best {
            self.loads.push(size.clone());
            self.place[idx] = self.loads.len() - 1;
            self.run(depth + 1);
            self.loads.pop();
        }
    }
}

fn first_fit_decreasing(sizes: &[EpsRational], order: &[usize]) -> Vec<usize> {
    let mut loads: Vec<EpsRational> = Vec::new();
    let mut place = vec![0; sizes.len()];
    for &idx in order {
        let b = loads
            .iter()
            .position(|l| l + &sizes[idx] <= EpsRational::one())
            .unwrap_or_else(|| {
                loads.push(EpsRational::zero());
                loads.len() - 1
            });
        loads[b] += &sizes[idx];
        place[idx] = b;
    }
    place
}

/// Minimum number of unit bins for `sizes`; equals the offline MPAS optimum.
/// Bin contents are positions into `sizes`.
pub fn brute_bin_packing(sizes: &[EpsRational]) -> Result<PackingSolution, OracleError> {
    if sizes.len() > BIN_PACKING_ORACLE_LIMIT {
        return Err(OracleError::TooLarge {
            items: sizes.len(),
            limit: BIN_PACKING_ORACLE_LIMIT,
        });
    }
    check_sizes(sizes)?;
    let refs: Vec<&EpsRational> = sizes.iter().collect();
    let order = decreasing(&refs);
    let mut suffix_size = vec![EpsRational::zero(); order.len() + 1];
    for d in (0..order.len()).rev() {
        suffix_size[d] = &suffix_size[d + 1] + &sizes[order[d]];
    }
    let ffd = first_fit_decreasing(sizes, &order);
    let ffd_bins = ffd.iter().map(|b| b + 1).max().unwrap_or(0);
    let mut search = BinPackingSearch {
        sizes,
        order,
        suffix_size,
        loads: Vec::new(),
        place: vec![0; sizes.len()],
        best: ffd_bins,
        best_place: ffd,
    };
    search.run(0);
    let mut bins = vec![Vec::new(); search.best];
    for (idx, &b) in search.best_place.iter().enumerate() {
        bins[b].push(idx);
    }
    Ok(PackingSolution {
        bins,
        objective: EpsRational::from_integer(search.best as i64),
    })
}

/// Offline MPAS optimum (minimum peak) for a set of item sizes.
pub fn mpas_offline_optimum(sizes: &[EpsRational]) -> Result<u64, OracleError> {
    let sol = brute_bin_packing(sizes)?;
    Ok(sol.bins.len() as u64)
}

/// True iff `bins` (item ids) uses at most `k` bins, names each item at most
/// once, and keeps every load at most 1.
pub fn verify_packing(items: &[Item], k: usize, bins: &[Vec<usize>]) -> bool {
    if bins.len() > k {
        return false;
    }
    let mut used = std::collections::HashSet::new();
    bins.iter().all(|bin| {
        let mut load = EpsRational::zero();
        for id in bin {
            match items.iter().find(|i| i.id == *id) {
                Some(item) if used.insert(*id) => load += &item.size,
                _ => return false,
            }
        }
        load <= EpsRational::one()
    })
}

/// True iff every interval lies inside `[0, 1)`.
pub fn verify_assignment(assignments: &[IntervalAssignment]) -> bool {
    assignments.iter().all(|a| a.validate().is_ok())
}
