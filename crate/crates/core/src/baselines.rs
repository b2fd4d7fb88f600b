//! Simple reference online algorithms, registered by name.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::knapsack::{
    legal_actions, minimal_removal_sets, Action, Item, KnapsackAlgorithm, KnapsackState,
};
use crate::mpas::{IntervalAssignment, MpasAlgorithm, MpasItem};
use crate::numerics::{EpsRational, Rational};

pub const KNAPSACK_BASELINES: &[&str] = &["first_fit_keep", "replace_if_larger", "random_compliant"];
pub const MPAS_BASELINES: &[&str] = &["anchor_zero", "two_sided", "random_offset"];

/// Grid resolution for [`RandomOffset`]: offsets are multiples of `1/20000`.
pub const OFFSET_GRID: i64 = 20_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown {problem:?} baseline {name:?}")]
pub struct UnknownBaseline {
    pub name: String,
    pub problem: Problem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    Knapsack,
    Mpas,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineSpec {
    pub name: String,
    pub problem: Problem,
    pub seed: Option<u64>,
}

impl BaselineSpec {
    pub fn knapsack(&self) -> Result<Box<dyn KnapsackAlgorithm>, UnknownBaseline> {
        knapsack_baseline(&self.name, self.seed.unwrap_or(0))
    }

    pub fn mpas(&self) -> Result<Box<dyn MpasAlgorithm>, UnknownBaseline> {
        mpas_baseline(&self.name, self.seed.unwrap_or(0))
    }
}

/// Whether the named baseline draws on its seed.
pub fn is_seeded(name: &str) -> bool {
    matches!(name, "random_compliant" | "random_offset")
}

pub fn knapsack_baseline(name: &str, seed: u64) -> Result<Box<dyn KnapsackAlgorithm>, UnknownBaseline> {
    match name {
        "first_fit_keep" => Ok(Box::new(FirstFitKeep)),
        "replace_if_larger" => Ok(Box::new(ReplaceIfLarger)),
        "random_compliant" => Ok(Box::new(RandomCompliant::new(seed))),
        _ => Err(UnknownBaseline {
            name: name.to_string(),
            problem: Problem::Knapsack,
        }),
    }
}

pub fn mpas_baseline(name: &str, seed: u64) -> Result<Box<dyn MpasAlgorithm>, UnknownBaseline> {
    match name {
        "anchor_zero" => Ok(Box::new(AnchorZero)),
        "two_sided" => Ok(Box::new(TwoSided::default())),
        "random_offset" => Ok(Box::new(RandomOffset::new(seed))),
        _ => Err(UnknownBaseline {
            name: name.to_string(),
            problem: Problem::Mpas,
        }),
    }
}

/// Lowest-index bin that fits; never removes anything.
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstFitKeep;

fn first_fit(item: &Item, state: &KnapsackState) -> Option<usize> {
    state.bins().iter().position(|b| b.fits(&item.size))
}

impl KnapsackAlgorithm for FirstFitKeep {
    fn name(&self) -> String {
        "first_fit_keep".into()
    }

    fn on_arrival(&mut self, item: &Item, state: &KnapsackState) -> Action {
        first_fit(item, state).map_or(Action::Reject, Action::pack)
    }

    fn snapshot(&self) -> Option<Box<dyn KnapsackAlgorithm>> {
        Some(Box::new(*self))
    }
}

/// First fit; when nothing fits, swaps the arrival in for a minimal removal
/// set of strictly smaller total size, taking the largest gain.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReplaceIfLarger;

impl KnapsackAlgorithm for ReplaceIfLarger {
    fn name(&self) -> String {
        "replace_if_larger".into()
    }

    fn on_arrival(&mut self, item: &Item, state: &KnapsackState) -> Action {
        if let Some(b) = first_fit(item, state) {
            return Action::pack(b);
        }
        let mut best: Option<(EpsRational, Action)> = None;
        for (b, bin) in state.bins().iter().enumerate() {
            for removals in minimal_removal_sets(bin, item) {
                let removed: EpsRational = bin
                    .items()
                    .iter()
                    .filter(|i| removals.contains(&i.id))
                    .map(|i| &i.size)
                    .sum();
                if removed >= item.size {
                    continue;
                }
                let gain = &item.size - &removed;
                if best.as_ref().is_none_or(|(g, _)| gain > *g) {
                    best = Some((gain, Action::Pack { bin: b, removals }));
                }
            }
        }
        best.map_or(Action::Reject, |(_, a)| a)
    }

    fn snapshot(&self) -> Option<Box<dyn KnapsackAlgorithm>> {
        Some(Box::new(*self))
    }
}

/// Picks uniformly among all legal actions.
#[derive(Debug, Clone)]
pub struct RandomCompliant {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomCompliant {
    pub fn new(seed: u64) -> Self {
        RandomCompliant {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl KnapsackAlgorithm for RandomCompliant {
    fn name(&self) -> String {
        "random_compliant".into()
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }

    fn on_arrival(&mut self, item: &Item, state: &KnapsackState) -> Action {
        let mut actions = legal_actions(state, item);
        let pick = self.rng.random_range(0..actions.len());
        actions.swap_remove(pick)
    }

    fn snapshot(&self) -> Option<Box<dyn KnapsackAlgorithm>> {
        Some(Box::new(self.clone()))
    }
}

/// Every interval starts at 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct AnchorZero;

impl MpasAlgorithm for AnchorZero {
    fn name(&self) -> String {
        "anchor_zero".into()
    }

    fn place(&mut self, _item: &MpasItem, _placed: &[IntervalAssignment]) -> EpsRational {
        EpsRational::zero()
    }

    fn snapshot(&self) -> Option<Box<dyn MpasAlgorithm>> {
        Some(Box::new(*self))
    }
}

/// Alternates between the left end (offset 0) and the right end (offset
/// `1 − γ`) within each size class. Sizes with the same standard part share a
/// class, so ε-perturbed copies of one size alternate too.
#[derive(Debug, Clone, Default)]
pub struct TwoSided {
    seen: HashMap<Rational, u64>,
}

impl MpasAlgorithm for TwoSided {
    fn name(&self) -> String {
        "two_sided".into()
    }

    fn place(&mut self, item: &MpasItem, _placed: &[IntervalAssignment]) -> EpsRational {
        let count = self.seen.entry(item.size.standard_part()).or_insert(0);
        *count += 1;
        if *count % 2 == 1 {
            EpsRational::zero()
        } else {
            &EpsRational::one() - &item.size
        }
    }

    fn snapshot(&self) -> Option<Box<dyn MpasAlgorithm>> {
        Some(Box::new(self.clone()))
    }
}

/// Uniform offset on the grid `j / 20000` within `[0, 1 − γ]`.
#[derive(Debug, Clone)]
pub struct RandomOffset {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomOffset {
    pub fn new(seed: u64) -> Self {
        RandomOffset {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl MpasAlgorithm for RandomOffset {
    fn name(&self) -> String {
        "random_offset".into()
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }

    fn place(&mut self, item: &MpasItem, _placed: &[IntervalAssignment]) -> EpsRational {
        let room = (&EpsRational::one() - &item.size).scale_int(OFFSET_GRID);
        let max_step = room.floor().max(BigInt::from(0)).to_i64().unwrap_or(0);
        let step = self.rng.random_range(0..=max_step);
        EpsRational::from_parts(step, OFFSET_GRID, 0, 1)
    }

    fn snapshot(&self) -> Option<Box<dyn MpasAlgorithm>> {
        Some(Box::new(self.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knapsack::ProfitMode;
    use crate::mpas::{peak_of, MpasGame};

    fn e(n: i64, d: i64, c: i64) -> EpsRational {
        EpsRational::from_parts(n, d, c, 1)
    }

    fn play(alg: &mut dyn KnapsackAlgorithm, k: usize, sizes: &[EpsRational]) -> KnapsackState {
        let mut state = KnapsackState::new(k).unwrap();
        for (id, size) in sizes.iter().enumerate() {
            let item = Item::new(id, size.clone());
            let action = alg.on_arrival(&item, &state);
            state.apply(&item, &action).unwrap();
        }
        state
    }

    #[test]
    fn first_fit_keep_fills_then_rejects() {
        let s = play(&mut FirstFitKeep, 2, &vec![e(2, 3, -1); 4]);
        assert_eq!(s.bins()[0].len(), 1);
        assert_eq!(s.bins()[1].len(), 1);
        assert_eq!(s.rejected().len(), 2);
        let s = play(&mut FirstFitKeep, 1, &[e(1, 2, 0), e(1, 2, 0)]);
        assert_eq!(s.bins()[0].len(), 2);
    }

    #[test]
    fn replace_if_larger_swaps_small_for_large() {
        let s = play(&mut ReplaceIfLarger, 1, &[e(1, 3, 3), e(1, 3, 3), e(2, 3, -3)]);
        assert_eq!(s.bins()[0].load(), &EpsRational::one());
        assert_eq!(s.bins()[0].len(), 2);
        let s = play(&mut ReplaceIfLarger, 1, &[e(2, 3, -1), e(1, 3, 3)]);
        assert_eq!(s.rejected().len(), 1);
        assert_eq!(s.profit(ProfitMode::Proportional), e(2, 3, -1));
        let a = play(&mut ReplaceIfLarger, 3, &[e(1, 2, 0), e(1, 4, 0), e(3, 4, 0)]);
        let b = play(&mut FirstFitKeep, 3, &[e(1, 2, 0), e(1, 4, 0), e(3, 4, 0)]);
        assert_eq!(a, b);
    }

    #[test]
    fn random_compliant_replays_and_snapshots() {
        let sizes: Vec<_> = (0..12).map(|i| e(1, 3 + i % 3, i - 6)).collect();
        let a = play(&mut RandomCompliant::new(9), 2, &sizes);
        let b = play(&mut RandomCompliant::new(9), 2, &sizes);
        assert_eq!(a, b);

        let mut alg = RandomCompliant::new(4);
        let s = play(&mut alg, 2, &sizes[..5]);
        let mut fork = alg.snapshot().unwrap();
        let item = Item::new(5, sizes[5].clone());
        assert_eq!(alg.on_arrival(&item, &s), fork.on_arrival(&item, &s));
    }

    #[test]
    fn two_sided_layout() {
        let mut game = MpasGame::new();
        let mut alg = TwoSided::default();
        for id in 0..4 {
            game.play(&mut alg, &MpasItem::new(id, e(2, 5, 0))).unwrap();
        }
        let offsets: Vec<_> = game.assignments().iter().map(|a| a.offset.clone()).collect();
        assert_eq!(offsets, vec![e(0, 1, 0), e(3, 5, 0), e(0, 1, 0), e(3, 5, 0)]);
        assert_eq!(peak_of(game.assignments()).unwrap(), 2);
    }

    #[test]
    fn anchor_zero_stacks_everything() {
        let mut game = MpasGame::new();
        for id in 0..7 {
            game.play(&mut AnchorZero, &MpasItem::new(id, e(1, 1 + id as i64, 0))).unwrap();
        }
        assert_eq!(game.profile().peak(), 7);
    }

    #[test]
    fn random_offset_stays_inside() {
        let place_all = |seed| {
            let mut game = MpasGame::new();
            let mut alg = RandomOffset::new(seed);
            for id in 0..200 {
                let size = e(1, 2 + (id % 7) as i64, if id % 2 == 0 { 1 } else { -1 });
                let size = if size > EpsRational::one() { e(1, 1, 0) } else { size };
                game.play(&mut alg, &MpasItem::new(id, size)).unwrap();
            }
            game
        };
        assert_eq!(place_all(7), place_all(7));
        assert_ne!(place_all(7), place_all(8));
        // Full-size items leave only offset 0.
        let mut alg = RandomOffset::new(1);
        assert!(alg.place(&MpasItem::new(0, e(1, 1, 0)), &[]).is_zero());
    }

    #[test]
    fn registry() {
        for name in KNAPSACK_BASELINES {
            assert_eq!(knapsack_baseline(name, 1).unwrap().name(), *name);
        }
        for name in MPAS_BASELINES {
            assert_eq!(mpas_baseline(name, 1).unwrap().name(), *name);
        }
        assert!(knapsack_baseline("anchor_zero", 0).is_err());
        assert!(mpas_baseline("nope", 0).is_err());
    }
}
