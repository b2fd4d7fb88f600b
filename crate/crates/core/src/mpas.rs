//! Minimum peak appointment scheduling: interval assignments, the coverage
//! step function and its non-increasing rearrangement.
//!
//! Intervals are half-open, `[x, x + γ)`, and a point `z` is covered by an
//! assignment iff `x ≤ z < x + γ`. Profiles are exact step functions over
//! `[0, 1)` with [`EpsRational`] breakpoints.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::EpsRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MpasError {
    #[error("item {item_id}: interval at offset {offset} of size {size} is not inside [0, 1)")]
    InvalidAssignment {
        item_id: usize,
        size: EpsRational,
        offset: EpsRational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpasItem {
    pub id: usize,
    pub size: EpsRational,
}

impl MpasItem {
    pub fn new(id: usize, size: EpsRational) -> Self {
        MpasItem { id, size }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalAssignment {
    pub item_id: usize,
    pub size: EpsRational,
    pub offset: EpsRational,
}

impl IntervalAssignment {
    pub fn new(item_id: usize, size: EpsRational, offset: EpsRational) -> Self {
        IntervalAssignment {
            item_id,
            size,
            offset,
        }
    }

    pub fn end(&self) -> EpsRational {
        &self.offset + &self.size
    }

    /// Left-closed containment: `x ≤ z < x + γ`.
    pub fn contains(&self, z: &EpsRational) -> bool {
        &self.offset <= z && *z < self.end()
    }

    pub fn validate(&self) -> Result<(), MpasError> {
        let ok = self.size.is_positive()
            && self.size <= EpsRational::one()
            && self.offset >= EpsRational::zero()
            && self.end() <= EpsRational::one();
        if ok {
            Ok(())
        } else {
            Err(MpasError::InvalidAssignment {
                item_id: self.item_id,
                size: self.size.clone(),
                offset: self.offset.clone(),
            })
        }
    }
}

/// Piecewise-constant function on `[0, 1)`. Piece `i` covers
/// `[breakpoints[i], breakpoints[i + 1])`, the last piece ends at 1.
/// Adjacent pieces always carry different values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageProfile {
    breakpoints: Vec<EpsRational>,
    values: Vec<u64>,
}

/// Non-increasing rearrangement of a [`CoverageProfile`].
pub type Rearrangement = CoverageProfile;

impl CoverageProfile {
    fn from_pieces(pieces: impl IntoIterator<Item = (EpsRational, u64)>) -> Self {
        let mut breakpoints: Vec<EpsRational> = Vec::new();
        let mut values: Vec<u64> = Vec::new();
        for (start, value) in pieces {
            if start >= EpsRational::one() {
                break;
            }
            if breakpoints.last() == Some(&start) {
                // Zero-length piece: the later value wins.
                values.pop();
                breakpoints.pop();
            }
            if values.last() == Some(&value) {
                continue;
            }
            breakpoints.push(start);
            values.push(value);
        }
        if breakpoints.is_empty() {
            breakpoints.push(EpsRational::zero());
            values.push(0);
        }
        CoverageProfile { breakpoints, values }
    }

    pub fn zero() -> Self {
        CoverageProfile::from_pieces([])
    }

    pub fn breakpoints(&self) -> &[EpsRational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// `(start, end, value)` for every piece.
    pub fn pieces(&self) -> impl Iterator<Item = (&EpsRational, EpsRational, u64)> + '_ {
        let one = EpsRational::one();
        self.breakpoints.iter().enumerate().map(move |(i, start)| {
            let end = self.breakpoints.get(i + 1).cloned().unwrap_or_else(|| one.clone());
            (start, end, self.values[i])
        })
    }

    pub fn piece_count(&self) -> usize {
        self.values.len()
    }

    /// Value at `z ∈ [0, 1)`.
    pub fn value_at(&self, z: &EpsRational) -> u64 {
        let idx = self.breakpoints.partition_point(|b| b <= z);
        if idx == 0 {
            0
        } else {
            self.values[idx - 1]
        }
    }

    pub fn peak(&self) -> u64 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    pub fn integral(&self) -> EpsRational {
        self.pieces()
            .map(|(start, end, v)| (&end - start).scale_int(v as i64))
            .sum()
    }

    /// Total length where the profile equals each value.
    pub fn layer_lengths(&self) -> BTreeMap<u64, EpsRational> {
        let mut layers: BTreeMap<u64, EpsRational> = BTreeMap::new();
        for (start, end, v) in self.pieces() {
            *layers.entry(v).or_default() += &(&end - start);
        }
        layers
    }

    /// Measure of `{z : f(z) ≥ threshold}`.
    pub fn measure_at_least(&self, threshold: u64) -> EpsRational {
        self.pieces()
            .filter(|(_, _, v)| *v >= threshold)
            .map(|(start, end, _)| &end - start)
            .sum()
    }

    /// Sorts the layers by value, largest first, into a non-increasing step
    /// function with the same layer lengths.
    pub fn rearrange(&self) -> Rearrangement {
        let mut start = EpsRational::zero();
        let mut pieces = Vec::new();
        for (value, len) in self.layer_lengths().into_iter().rev() {
            pieces.push((start.clone(), value));
            start += &len;
        }
        CoverageProfile::from_pieces(pieces)
    }

    pub fn is_non_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }
}

/// Sweeps the interval endpoints into an exact coverage profile.
pub fn build_profile(assignments: &[IntervalAssignment]) -> Result<CoverageProfile, MpasError> {
    let mut events: Vec<(EpsRational, i64)> = Vec::with_capacity(2 * assignments.len());
    for a in assignments {
        a.validate()?;
        events.push((a.end(), -1));
        events.push((a.offset.clone(), 1));
    }
    events.sort_unstable_by(|x, y| x.0.cmp(&y.0));
    let mut pieces = Vec::with_capacity(events.len() + 1);
    pieces.push((EpsRational::zero(), 0u64));
    let mut level: i64 = 0;
    let mut i = 0;
    while i < events.len() {
        let at = &events[i].0;
        let mut j = i;
        while j < events.len() && &events[j].0 == at {
            level += events[j].1;
            j += 1;
        }
        pieces.push((at.clone(), level as u64));
        i = j;
    }
    Ok(CoverageProfile::from_pieces(pieces))
}

/// Peak of a set of assignments (0 for none).
pub fn peak_of(assignments: &[IntervalAssignment]) -> Result<u64, MpasError> {
    Ok(build_profile(assignments)?.peak())
}

/// An online MPAS algorithm: picks an offset for every arriving item.
pub trait MpasAlgorithm: Send {
    fn name(&self) -> String;

    fn seed(&self) -> Option<u64> {
        None
    }

    fn place(&mut self, item: &MpasItem, placed: &[IntervalAssignment]) -> EpsRational;

    fn snapshot(&self) -> Option<Box<dyn MpasAlgorithm>> {
        None
    }
}

/// Referee-owned MPAS game: validates and records assignments.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpasGame {
    assignments: Vec<IntervalAssignment>,
}

impl MpasGame {
    pub fn new() -> Self {
        MpasGame::default()
    }

    pub fn assignments(&self) -> &[IntervalAssignment] {
        &self.assignments
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Asks `alg` for an offset, validates it and records the interval.
    pub fn play(
        &mut self,
        alg: &mut dyn MpasAlgorithm,
        item: &MpasItem,
    ) -> Result<&IntervalAssignment, MpasError> {
        let offset = alg.place(item, &self.assignments);
        let a = IntervalAssignment::new(item.id, item.size.clone(), offset);
        a.validate()?;
        self.assignments.push(a);
        Ok(self.assignments.last().expect("just pushed"))
    }

    pub fn profile(&self) -> CoverageProfile {
        build_profile(&self.assignments).expect("assignments validated on entry")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> EpsRational {
        EpsRational::real(rat(n, d))
    }

    fn iv(id: usize, size: EpsRational, offset: EpsRational) -> IntervalAssignment {
        IntervalAssignment::new(id, size, offset)
    }

    fn two_sided_example() -> Vec<IntervalAssignment> {
        vec![
            iv(0, r(2, 5), r(0, 1)),
            iv(1, r(2, 5), r(3, 5)),
            iv(2, r(2, 5), r(0, 1)),
        ]
    }

    #[test]
    fn sweep_example() {
        let p = build_profile(&two_sided_example()).unwrap();
        assert_eq!(p.breakpoints(), &[r(0, 1), r(2, 5), r(3, 5)]);
        assert_eq!(p.values(), &[2, 0, 1]);
        assert_eq!(p.peak(), 2);
        assert_eq!(p.integral(), r(6, 5));
    }

    #[test]
    fn empty_and_left_endpoint() {
        let p = build_profile(&[]).unwrap();
        assert_eq!(p.peak(), 0);
        assert!(p.integral().is_zero());
        let p = build_profile(&[iv(0, r(1, 2), r(1, 2))]).unwrap();
        assert_eq!(p.value_at(&r(1, 2)), 1);
        assert_eq!(p.value_at(&EpsRational::from_parts(1, 2, -1, 1)), 0);
    }

    #[test]
    fn stacked_prefix() {
        let items: Vec<_> = (0..60).map(|i| iv(i, r(1, 12), r(0, 1))).collect();
        let p = build_profile(&items).unwrap();
        assert_eq!(p.peak(), 60);
        assert_eq!(p.integral(), r(5, 1));
        assert_eq!(p.rearrange(), p);
        let small = EpsRational::from_parts(1, 3, -3, 2);
        let stacked: Vec<_> = (0..36).map(|i| iv(i, small.clone(), r(0, 1))).collect();
        assert_eq!(peak_of(&stacked).unwrap(), 36);
    }

    #[test]
    fn rearrangement_sorts_layers() {
        let g = build_profile(&two_sided_example()).unwrap().rearrange();
        assert_eq!(g.breakpoints(), &[r(0, 1), r(2, 5), r(4, 5)]);
        assert_eq!(g.values(), &[2, 1, 0]);
        let constant = build_profile(&[iv(0, r(1, 1), r(0, 1))]).unwrap();
        assert_eq!(constant.rearrange(), constant);
    }

    #[test]
    fn invalid_assignments() {
        for bad in [
            iv(0, r(1, 2), r(3, 5)),
            iv(0, r(1, 2), r(-1, 5)),
            iv(0, r(0, 1), r(0, 1)),
            iv(0, EpsRational::from_parts(1, 2, 1, 1), r(1, 2)),
        ] {
            assert!(matches!(build_profile(&[bad]), Err(MpasError::InvalidAssignment { .. })));
        }
        assert!(build_profile(&[iv(0, r(1, 2), r(1, 2))]).is_ok());
    }

    fn arb_assignment() -> impl Strategy<Value = IntervalAssignment> {
        (1i64..=12, 0i64..=12, -2i64..=2, 0i64..=3).prop_map(|(s, o, si, oi)| {
            let size = EpsRational::from_parts(s, 12, si.min(0), 1);
            let size = if size.is_positive() { size } else { r(s, 12) };
            let room = &EpsRational::one() - &size;
            let offset = EpsRational::from_parts(o, 12, oi, 1);
            let offset = if offset > room { room } else { offset };
            iv(0, size, offset)
        })
    }

    proptest! {
        #[test]
        fn profile_identities(set in prop::collection::vec(arb_assignment(), 0..30)) {
            let p = build_profile(&set).unwrap();
            let g = p.rearrange();
            let sizes: EpsRational = set.iter().map(|a| &a.size).sum();
            prop_assert_eq!(p.integral(), sizes);
            prop_assert_eq!(g.integral(), p.integral());
            prop_assert_eq!(p.peak(), g.value_at(&EpsRational::zero()));
            prop_assert!(g.is_non_increasing());
            prop_assert!(p.piece_count() <= 2 * set.len() + 1);
            prop_assert_eq!(g.layer_lengths(), p.layer_lengths());
            for (start, _, v) in p.pieces() {
                let direct = set.iter().filter(|a| a.contains(start)).count() as u64;
                prop_assert_eq!(v, direct);
            }
            for w in g.breakpoints() {
                prop_assert!(p.measure_at_least(g.value_at(w)) >= *w);
            }
        }
    }
}
