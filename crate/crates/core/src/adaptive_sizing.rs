//! Adaptive item sizing.
//!
//! The adversary emits sizes from a shrinking open interval `(a, b)`. After
//! the online algorithm has handled an item, the item is classified as
//! smallish (`a` moves up to its size) or largish (`b` moves down to it).
//! Whatever happens, the final midpoint `θ` strictly separates every smallish
//! size from every largish one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::EpsRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SizingError {
    #[error("invalid sizing range: alpha {alpha} is not below beta {beta}")]
    InvalidRange { alpha: EpsRational, beta: EpsRational },
    #[error("the previous size has not been classified yet")]
    PendingClassification,
    #[error("no emitted size is waiting for a classification")]
    NothingPending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeClass {
    Smallish,
    Largish,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizerEntry {
    pub size: EpsRational,
    pub class: Option<SizeClass>,
}

/// State of the nested-interval sizer. Invariant: `alpha ≤ a < b ≤ beta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizerState {
    alpha: EpsRational,
    beta: EpsRational,
    a: EpsRational,
    b: EpsRational,
    log: Vec<SizerEntry>,
}

impl SizerState {
    pub fn new(alpha: EpsRational, beta: EpsRational) -> Result<Self, SizingError> {
        if alpha >= beta {
            return Err(SizingError::InvalidRange { alpha, beta });
        }
        Ok(SizerState {
            a: alpha.clone(),
            b: beta.clone(),
            alpha,
            beta,
            log: Vec::new(),
        })
    }

    pub fn alpha(&self) -> &EpsRational {
        &self.alpha
    }

    pub fn beta(&self) -> &EpsRational {
        &self.beta
    }

    /// Largest smallish size so far (`alpha` initially).
    pub fn a(&self) -> &EpsRational {
        &self.a
    }

    /// Smallest largish size so far (`beta` initially).
    pub fn b(&self) -> &EpsRational {
        &self.b
    }

    pub fn log(&self) -> &[SizerEntry] {
        &self.log
    }

    pub fn pending(&self) -> Option<&EpsRational> {
        match self.log.last() {
            Some(SizerEntry { size, class: None }) => Some(size),
            _ => None,
        }
    }

    /// Emits the midpoint of the current interval and marks it pending.
    pub fn next_size(&mut self) -> Result<EpsRational, SizingError> {
        if self.pending().is_some() {
            return Err(SizingError::PendingClassification);
        }
        let size = self.a.midpoint(&self.b);
        self.log.push(SizerEntry {
            size: size.clone(),
            class: None,
        });
        Ok(size)
    }

    pub fn classify(&mut self, class: SizeClass) -> Result<(), SizingError> {
        let size = self.pending().cloned().ok_or(SizingError::NothingPending)?;
        match class {
            SizeClass::Smallish => self.a = size,
            SizeClass::Largish => self.b = size,
        }
        if let Some(last) = self.log.last_mut() {
            last.class = Some(class);
        }
        debug_assert!(self.a < self.b);
        Ok(())
    }

    /// The separating threshold `θ = (a + b) / 2`.
    pub fn threshold(&self) -> Result<EpsRational, SizingError> {
        if self.pending().is_some() {
            return Err(SizingError::PendingClassification);
        }
        Ok(self.a.midpoint(&self.b))
    }

    /// Classes of all emitted sizes in emission order.
    pub fn classes(&self) -> impl Iterator<Item = Option<SizeClass>> + '_ {
        self.log.iter().map(|e| e.class)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(n: i64, d: i64, c_n: i64, c_d: i64) -> EpsRational {
        EpsRational::from_parts(n, d, c_n, c_d)
    }

    #[test]
    fn rejects_reversed_range() {
        assert!(matches!(
            SizerState::new(e(1, 1, 0, 1), e(1, 2, 0, 1)),
            Err(SizingError::InvalidRange { .. })
        ));
        assert!(SizerState::new(e(1, 2, -2, 1), e(1, 2, -1, 1)).is_ok());
    }

    #[test]
    fn midpoint_emission() {
        let mut s = SizerState::new(e(1, 3, -2, 1), e(1, 3, -1, 1)).unwrap();
        assert_eq!(s.next_size().unwrap(), e(1, 3, -3, 2));
        assert_eq!(s.next_size(), Err(SizingError::PendingClassification));
        s.classify(SizeClass::Largish).unwrap();
        assert_eq!(s.b(), &e(1, 3, -3, 2));
    }

    #[test]
    fn knapsack_trace() {
        let mut s = SizerState::new(e(1, 2, -2, 1), e(1, 2, -1, 1)).unwrap();
        assert_eq!(s.threshold().unwrap(), e(1, 2, -3, 2));
        assert_eq!(s.next_size().unwrap(), e(1, 2, -3, 2));
        s.classify(SizeClass::Largish).unwrap();
        assert_eq!(s.next_size().unwrap(), e(1, 2, -7, 4));
        assert_eq!(s.threshold(), Err(SizingError::PendingClassification));
        s.classify(SizeClass::Smallish).unwrap();
        assert_eq!(s.a(), &e(1, 2, -7, 4));
        assert_eq!(s.threshold().unwrap(), e(1, 2, -13, 8));
    }

    #[test]
    fn classify_without_pending() {
        let mut s = SizerState::new(e(0, 1, 0, 1), e(1, 1, 0, 1)).unwrap();
        assert_eq!(s.classify(SizeClass::Smallish), Err(SizingError::NothingPending));
    }

    fn run(classes: &[bool]) -> SizerState {
        let mut s = SizerState::new(e(1, 3, -2, 1), e(1, 3, -1, 1)).unwrap();
        for &small in classes {
            s.next_size().unwrap();
            s.classify(if small { SizeClass::Smallish } else { SizeClass::Largish })
                .unwrap();
        }
        s
    }

    proptest! {
        #[test]
        fn threshold_separates(classes in prop::collection::vec(any::<bool>(), 0..60)) {
            let s = run(&classes);
            let theta = s.threshold().unwrap();
            prop_assert!(s.alpha() < &theta && &theta < s.beta());
            for entry in s.log() {
                prop_assert!(s.alpha() < &entry.size && &entry.size < s.beta());
                match entry.class.unwrap() {
                    SizeClass::Smallish => prop_assert!(entry.size < theta),
                    SizeClass::Largish => prop_assert!(entry.size > theta),
                }
            }
        }

        #[test]
        fn intervals_nest(classes in prop::collection::vec(any::<bool>(), 1..40)) {
            let mut s = SizerState::new(e(1, 3, -2, 1), e(1, 3, -1, 1)).unwrap();
            for &small in &classes {
                let (a, b) = (s.a().clone(), s.b().clone());
                s.next_size().unwrap();
                s.classify(if small { SizeClass::Smallish } else { SizeClass::Largish }).unwrap();
                prop_assert!(a <= *s.a() && s.b() <= &b);
                prop_assert!((s.a(), s.b()) != (&a, &b));
                prop_assert!(s.a() < s.b());
            }
        }

        #[test]
        fn replay_is_deterministic(classes in prop::collection::vec(any::<bool>(), 0..40)) {
            prop_assert_eq!(run(&classes), run(&classes));
        }
    }
}
