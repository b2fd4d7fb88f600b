//! Referee for the online removable multiple knapsack game.
//!
//! The referee owns the bins and validates every algorithm action against the
//! lazy-algorithm contract: an item may be rejected outright only when it fits
//! nowhere, and an overflowing pack must remove a minimal subset of the target
//! bin (every removed item, put back alone, overflows again).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::EpsRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KnapsackError {
    #[error("item {item} rejected although it fits without removals")]
    IllegalReject { item: usize },
    #[error("removal of item {removed} from bin {bin} is not needed to fit item {item}")]
    NonMinimalRemoval { item: usize, bin: usize, removed: usize },
    #[error("bin {bin} would hold {load}, above capacity 1")]
    Overflow { bin: usize, load: EpsRational },
    #[error("bin index {bin} out of range for {k} bins")]
    BadBin { bin: usize, k: usize },
    #[error("item {removed} is not in bin {bin}")]
    UnknownRemoval { bin: usize, removed: usize },
    #[error("expected arrival {expected}, got item {got}")]
    OutOfOrder { expected: usize, got: usize },
    #[error("item size {0} outside (0, 1]")]
    BadSize(EpsRational),
    #[error("at least one bin is required")]
    NoBins,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: usize,
    pub size: EpsRational,
}

impl Item {
    pub fn new(id: usize, size: EpsRational) -> Self {
        Item { id, size }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    Reject,
    Pack { bin: usize, removals: Vec<usize> },
}

impl Action {
    pub fn pack(bin: usize) -> Self {
        Action::Pack {
            bin,
            removals: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfitMode {
    Proportional,
    Unit,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bin {
    items: Vec<Item>,
    load: EpsRational,
}

impl Bin {
    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn load(&self) -> &EpsRational {
        &self.load
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn fits(&self, size: &EpsRational) -> bool {
        &self.load + size <= EpsRational::one()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.items.iter().any(|i| i.id == id)
    }
}

/// `k` unit-capacity bins plus every item that left the game (rejected on
/// arrival or removed later).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackState {
    bins: Vec<Bin>,
    rejected: Vec<Item>,
    arrivals: usize,
}

impl KnapsackState {
    pub fn new(k: usize) -> Result<Self, KnapsackError> {
        if k == 0 {
            return Err(KnapsackError::NoBins);
        }
        Ok(KnapsackState {
            bins: vec![Bin::default(); k],
            rejected: Vec::new(),
            arrivals: 0,
        })
    }

    pub fn k(&self) -> usize {
        self.bins.len()
    }

    pub fn bins(&self) -> &[Bin] {
        &self.bins
    }

    pub fn rejected(&self) -> &[Item] {
        &self.rejected
    }

    pub fn arrivals(&self) -> usize {
        self.arrivals
    }

    pub fn loads(&self) -> Vec<EpsRational> {
        self.bins.iter().map(|b| b.load.clone()).collect()
    }

    /// True iff some bin takes the item without removals.
    pub fn fits_anywhere(&self, item: &Item) -> bool {
        self.bins.iter().any(|b| b.fits(&item.size))
    }

    pub fn profit(&self, mode: ProfitMode) -> EpsRational {
        match mode {
            ProfitMode::Proportional => self.bins.iter().map(|b| &b.load).sum(),
            ProfitMode::Unit => {
                EpsRational::from_integer(self.bins.iter().map(|b| b.len() as i64).sum())
            }
        }
    }

    /// Validates `action` for the next arrival and applies it. On error the
    /// state is left untouched.
    pub fn apply(&mut self, item: &Item, action: &Action) -> Result<(), KnapsackError> {
        if item.id != self.arrivals {
            return Err(KnapsackError::OutOfOrder {
                expected: self.arrivals,
                got: item.id,
            });
        }
        if !item.size.is_positive() || item.size > EpsRational::one() {
            return Err(KnapsackError::BadSize(item.size.clone()));
        }
        match action {
            Action::Reject => {
                if self.fits_anywhere(item) {
                    return Err(KnapsackError::IllegalReject { item: item.id });
                }
                self.rejected.push(item.clone());
            }
            Action::Pack { bin, removals } => {
                let removed = self.check_pack(item, *bin, removals)?;
                let target = &mut self.bins[*bin];
                target.items.retain(|i| !removals.contains(&i.id));
                target.items.push(item.clone());
                target.load = target.items.iter().map(|i| &i.size).sum();
                self.rejected.extend(removed);
            }
        }
        self.arrivals += 1;
        Ok(())
    }

    fn check_pack(
        &self,
        item: &Item,
        bin: usize,
        removals: &[usize],
    ) -> Result<Vec<Item>, KnapsackError> {
        let target = self.bins.get(bin).ok_or(KnapsackError::BadBin { bin, k: self.k() })?;
        let mut removed: Vec<Item> = Vec::with_capacity(removals.len());
        for &id in removals {
            let found = target
                .items
                .iter()
                .find(|i| i.id == id)
                .filter(|_| !removed.iter().any(|r| r.id == id))
                .ok_or(KnapsackError::UnknownRemoval { bin, removed: id })?;
            removed.push(found.clone());
        }
        let removed_size: EpsRational = removed.iter().map(|i| &i.size).sum();
        let load = &(&target.load - &removed_size) + &item.size;
        if load > EpsRational::one() {
            return Err(KnapsackError::Overflow { bin, load });
        }
        for r in &removed {
            if &load + &r.size <= EpsRational::one() {
                return Err(KnapsackError::NonMinimalRemoval {
                    item: item.id,
                    bin,
                    removed: r.id,
                });
            }
        }
        Ok(removed)
    }
}

/// Bins larger than this are not searched exhaustively for removal sets;
/// [`minimal_removal_sets`] falls back to greedy candidates for them.
pub const EXHAUSTIVE_REMOVAL_LIMIT: usize = 16;

/// Minimal removal sets (as item ids) that let `item` go into `bin`.
///
/// Returns `[[]]` when the item fits without removals. Exhaustive for bins of
/// at most [`EXHAUSTIVE_REMOVAL_LIMIT`] items.
pub fn minimal_removal_sets(bin: &Bin, item: &Item) -> Vec<Vec<usize>> {
    if bin.fits(&item.size) {
        return vec![Vec::new()];
    }
    let one = EpsRational::one();
    let is_minimal = |chosen: &[&Item]| {
        let removed: EpsRational = chosen.iter().map(|i| &i.size).sum();
        let load = &(&bin.load - &removed) + &item.size;
        load <= one && chosen.iter().all(|r| &load + &r.size > one)
    };
    let n = bin.items.len();
    if n <= EXHAUSTIVE_REMOVAL_LIMIT {
        (1u32..(1 << n))
            .filter_map(|mask| {
                let chosen: Vec<&Item> = (0..n)
                    .filter(|j| mask & (1 << j) != 0)
                    .map(|j| &bin.items[j])
                    .collect();
                is_minimal(&chosen).then(|| chosen.iter().map(|i| i.id).collect())
            })
            .collect()
    } else {
        // Greedy: drop largest items until the arrival fits, then prune any
        // removal that is not needed.
        let mut order: Vec<&Item> = bin.items.iter().collect();
        order.sort_by(|x, y| y.size.cmp(&x.size));
        let mut chosen = Vec::new();
        let mut load = &bin.load + &item.size;
        for it in order {
            if load <= one {
                break;
            }
            load -= &it.size;
            chosen.push(it);
        }
        let mut changed = true;
        while changed {
            changed = false;
            if let Some(pos) = chosen.iter().position(|r| &load + &r.size <= one) {
                load += &chosen[pos].size;
                chosen.remove(pos);
                changed = true;
            }
        }
        vec![chosen.iter().map(|i| i.id).collect()]
    }
}

/// Every action the referee accepts for `item` in `state`.
pub fn legal_actions(state: &KnapsackState, item: &Item) -> Vec<Action> {
    let mut actions = Vec::new();
    if !state.fits_anywhere(item) {
        actions.push(Action::Reject);
    }
    for (b, bin) in state.bins.iter().enumerate() {
        for removals in minimal_removal_sets(bin, item) {
            actions.push(Action::Pack { bin: b, removals });
        }
    }
    actions
}

/// An online algorithm for the removable knapsack game.
///
/// Implementations must be deterministic given their seed and the history of
/// arrivals. `snapshot` returns an independent copy that behaves identically
/// on identical continuations.
pub trait KnapsackAlgorithm: Send {
    fn name(&self) -> String;

    fn seed(&self) -> Option<u64> {
        None
    }

    fn on_arrival(&mut self, item: &Item, state: &KnapsackState) -> Action;

    fn snapshot(&self) -> Option<Box<dyn KnapsackAlgorithm>> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: i64, d: i64, c: i64) -> EpsRational {
        EpsRational::from_parts(n, d, c, 1)
    }

    fn state_with(k: usize, sizes: &[EpsRational]) -> KnapsackState {
        let mut s = KnapsackState::new(k).unwrap();
        for (id, size) in sizes.iter().enumerate() {
            s.apply(&Item::new(id, size.clone()), &Action::pack(0)).unwrap();
        }
        s
    }

    #[test]
    fn reject_only_when_nothing_fits() {
        let mut s = KnapsackState::new(2).unwrap();
        let item = Item::new(0, e(3, 5, 0));
        assert_eq!(
            s.apply(&item, &Action::Reject),
            Err(KnapsackError::IllegalReject { item: 0 })
        );
        assert_eq!(s.arrivals(), 0);
    }

    #[test]
    fn minimal_removal_checked_by_reinsertion() {
        let mut s = state_with(1, &[e(3, 5, 0)]);
        let mut t = s.clone();
        let replace = Action::Pack { bin: 0, removals: vec![0] };
        t.apply(&Item::new(1, e(1, 2, 0)), &replace).unwrap();
        assert_eq!(t.bins()[0].load(), &e(1, 2, 0));
        assert_eq!(t.rejected().len(), 1);
        assert_eq!(
            s.apply(&Item::new(1, e(1, 4, 0)), &replace),
            Err(KnapsackError::NonMinimalRemoval { item: 1, bin: 0, removed: 0 })
        );
    }

    #[test]
    fn overflow_and_bad_bin() {
        let mut s = state_with(1, &[e(3, 5, 0)]);
        assert!(matches!(
            s.apply(&Item::new(1, e(1, 2, 0)), &Action::pack(0)),
            Err(KnapsackError::Overflow { bin: 0, .. })
        ));
        assert_eq!(
            s.apply(&Item::new(1, e(1, 2, 0)), &Action::pack(3)),
            Err(KnapsackError::BadBin { bin: 3, k: 1 })
        );
        assert_eq!(
            s.apply(&Item::new(1, e(1, 2, 0)), &Action::Pack { bin: 0, removals: vec![7] }),
            Err(KnapsackError::UnknownRemoval { bin: 0, removed: 7 })
        );
        assert_eq!(
            s.apply(&Item::new(5, e(1, 2, 0)), &Action::Reject),
            Err(KnapsackError::OutOfOrder { expected: 1, got: 5 })
        );
    }

    #[test]
    fn fits_anywhere_is_exact() {
        let empty = KnapsackState::new(3).unwrap();
        assert!(empty.fits_anywhere(&Item::new(0, e(1, 1, 0))));
        let s = state_with(1, &[e(2, 3, -1)]);
        assert!(!s.fits_anywhere(&Item::new(1, e(1, 3, 3))));
        assert!(s.fits_anywhere(&Item::new(1, e(1, 3, -3))));
    }

    #[test]
    fn profit_modes() {
        let s = state_with(2, &[EpsRational::from_parts(1, 2, -3, 2), EpsRational::from_parts(1, 2, -7, 4)]);
        assert_eq!(s.profit(ProfitMode::Proportional), EpsRational::from_parts(1, 1, -13, 4));
        assert_eq!(s.profit(ProfitMode::Unit), e(2, 1, 0));
        let empty = KnapsackState::new(2).unwrap();
        assert!(empty.profit(ProfitMode::Proportional).is_zero());
        assert!(empty.profit(ProfitMode::Unit).is_zero());
    }

    #[test]
    fn removal_sets_enumeration() {
        let s = state_with(1, &[e(1, 3, 3), e(1, 3, 3)]);
        let item = Item::new(2, e(2, 3, -3));
        let sets = minimal_removal_sets(&s.bins()[0], &item);
        assert_eq!(sets, vec![vec![0], vec![1]]);
        let actions = legal_actions(&s, &item);
        assert_eq!(actions.len(), 3);
        assert_eq!(actions[0], Action::Reject);
        for a in &actions {
            s.clone().apply(&item, a).unwrap();
        }
    }

    #[test]
    fn greedy_removal_for_large_bins() {
        let sizes: Vec<EpsRational> = (0..20).map(|_| e(1, 20, 0)).collect();
        let s = state_with(1, &sizes);
        let item = Item::new(20, e(1, 5, 0));
        let sets = minimal_removal_sets(&s.bins()[0], &item);
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].len(), 4);
        s.clone()
            .apply(&item, &Action::Pack { bin: 0, removals: sets[0].clone() })
            .unwrap();
    }
}
