//! MPAS adversaries: the adaptive deterministic construction (`thm3`, ratio
//! tending to 5/4) and the Yao-distribution construction over a prefix of
//! `N·M` items of size `1/N` (`thm4`, ratio tending to 1.2691534).

mod bound;

pub use bound::{
    best_t, finite_n_bound, golden_section_max, r_of_tau, solve_tau_r, thm1_constant,
    yao_probability, BoundSolution,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptive_sizing::{SizeClass, SizerState};
use crate::error::AdversaryError;
use crate::mpas::{peak_of, IntervalAssignment, MpasAlgorithm, MpasGame, MpasItem};
use crate::numerics::{int, rat, rational_str, EpsRational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpasTranscriptEntry {
    /// `q` for a Yao continuation, `None` for the shared prefix or a `thm3`
    /// game.
    pub instance: Option<u64>,
    pub item: usize,
    pub size: EpsRational,
    pub offset: EpsRational,
}

impl MpasTranscriptEntry {
    fn from_assignment(instance: Option<u64>, a: &IntervalAssignment) -> Self {
        MpasTranscriptEntry {
            instance,
            item: a.item_id,
            size: a.size.clone(),
            offset: a.offset.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thm3Branch {
    /// `Q ≥ 5N`: at least `5N` intervals share the point 1/2.
    StopHigh,
    /// `Q ≤ 2N`: at least `5N` low or high intervals share 1/4 or 3/4.
    StopLow,
    /// `3N ≤ Q < 5N`: `12N` items of size 2/3 follow.
    TwoThirds,
    /// `2N < Q < 3N`: `Q′` items of size `1 − θ` follow.
    ThetaItems,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thm3Certificate {
    pub n: u64,
    pub q: u64,
    pub branch: Thm3Branch,
    pub q_prime: u64,
    pub theta: EpsRational,
    pub alg_peak: u64,
    pub opt_upper: u64,
    #[serde(with = "rational_str")]
    pub ratio: Rational,
    pub transcript: Vec<MpasTranscriptEntry>,
}

/// Adaptive-sizing adversary with `12N` first-phase items in
/// `(1/3 − 2ε, 1/3 − ε)`. An item is smallish iff its interval contains 1/2.
pub fn run_thm3(alg: &mut dyn MpasAlgorithm, n: u64) -> Result<Thm3Certificate, AdversaryError> {
    if n == 0 {
        return Err(AdversaryError::InvalidParameters("need N >= 1".into()));
    }
    let mut sizer = SizerState::new(
        EpsRational::from_parts(1, 3, -2, 1),
        EpsRational::from_parts(1, 3, -1, 1),
    )?;
    let half = EpsRational::real(rat(1, 2));
    let mut game = MpasGame::new();
    let mut classes = Vec::with_capacity(12 * n as usize);
    for id in 0..12 * n as usize {
        let item = MpasItem::new(id, sizer.next_size()?);
        let class = if game.play(alg, &item)?.contains(&half) {
            SizeClass::Smallish
        } else {
            SizeClass::Largish
        };
        sizer.classify(class)?;
        classes.push(class);
    }
    let q = classes.iter().filter(|c| **c == SizeClass::Smallish).count() as u64;
    let theta = sizer.threshold()?;

    let (branch, q_prime) = if q >= 5 * n {
        (Thm3Branch::StopHigh, 0)
    } else if q <= 2 * n {
        (Thm3Branch::StopLow, 0)
    } else if q >= 3 * n {
        (Thm3Branch::TwoThirds, 0)
    } else {
        (Thm3Branch::ThetaItems, 3 * (q / 3))
    };
    let (tail_size, tail_count) = match branch {
        Thm3Branch::StopHigh | Thm3Branch::StopLow => (EpsRational::zero(), 0),
        Thm3Branch::TwoThirds => (EpsRational::real(rat(2, 3)), 12 * n),
        Thm3Branch::ThetaItems => (&EpsRational::one() - &theta, q_prime),
    };
    let first = game.len();
    for j in 0..tail_count as usize {
        game.play(alg, &MpasItem::new(first + j, tail_size.clone()))?;
    }

    let alg_peak = game.profile().peak();
    let items: Vec<MpasItem> = game
        .assignments()
        .iter()
        .map(|a| MpasItem::new(a.item_id, a.size.clone()))
        .collect();
    let (_, opt_upper) = construct_opt_thm3(&items, &classes, branch, &theta, n, q_prime)?;
    Ok(Thm3Certificate {
        n,
        q,
        branch,
        q_prime,
        theta,
        alg_peak,
        opt_upper,
        ratio: rat(alg_peak as i64, opt_upper as i64),
        transcript: game
            .assignments()
            .iter()
            .map(|a| MpasTranscriptEntry::from_assignment(None, a))
            .collect(),
    })
}

/// The cost the offline construction for `branch` must reach.
pub fn thm3_opt_formula(n: u64, branch: Thm3Branch, q_prime: u64) -> u64 {
    match branch {
        Thm3Branch::StopHigh | Thm3Branch::StopLow => 4 * n,
        Thm3Branch::TwoThirds => 12 * n,
        Thm3Branch::ThetaItems => (12 * n + 2 * q_prime) / 3,
    }
}

/// Offline assignment for a finished `thm3` game; `items` holds the `12N`
/// first-phase items followed by the second-phase items.
///
/// Returns the assignment and its measured peak, which must equal
/// [`thm3_opt_formula`].
pub fn construct_opt_thm3(
    items: &[MpasItem],
    classes: &[SizeClass],
    branch: Thm3Branch,
    theta: &EpsRational,
    n: u64,
    q_prime: u64,
) -> Result<(Vec<IntervalAssignment>, u64), AdversaryError> {
    let first = 12 * n as usize;
    if items.len() < first || classes.len() != first {
        return Err(AdversaryError::InfeasibleConstruction(format!(
            "expected {first} first-phase items, got {}",
            classes.len()
        )));
    }
    let (phase1, phase2) = items.split_at(first);
    let thirds = [
        EpsRational::zero(),
        EpsRational::real(rat(1, 3)),
        EpsRational::real(rat(2, 3)),
    ];
    let at = |item: &MpasItem, offset: &EpsRational| {
        IntervalAssignment::new(item.id, item.size.clone(), offset.clone())
    };
    let spread = |group: &[&MpasItem]| -> Vec<IntervalAssignment> {
        let per = group.len().div_ceil(3).max(1);
        group
            .iter()
            .enumerate()
            .map(|(i, item)| at(item, &thirds[i / per]))
            .collect()
    };

    let assignments: Vec<IntervalAssignment> = match branch {
        Thm3Branch::StopHigh | Thm3Branch::StopLow => spread(&phase1.iter().collect::<Vec<_>>()),
        Thm3Branch::TwoThirds => phase1
            .iter()
            .map(|i| at(i, &thirds[0]))
            .chain(phase2.iter().map(|i| at(i, &thirds[1])))
            .collect(),
        Thm3Branch::ThetaItems => {
            let chosen: Vec<&MpasItem> = phase1
                .iter()
                .filter(|i| classes[i.id] == SizeClass::Smallish)
                .take(q_prime as usize)
                .collect();
            let rest: Vec<&MpasItem> = phase1
                .iter()
                .filter(|i| !chosen.iter().any(|c| c.id == i.id))
                .collect();
            chosen
                .iter()
                .map(|i| at(i, &thirds[0]))
                .chain(phase2.iter().map(|i| at(i, theta)))
                .chain(spread(&rest))
                .collect()
        }
    };
    let cost = peak_of(&assignments).map_err(|e| AdversaryError::InfeasibleConstruction(e.to_string()))?;
    let expected = thm3_opt_formula(n, branch, q_prime);
    if cost != expected {
        return Err(AdversaryError::InfeasibleConstruction(format!(
            "{branch:?} construction has peak {cost}, expected {expected}"
        )));
    }
    Ok((assignments, cost))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YaoInstance {
    /// `q` of the continuation; `N/2` denotes the prefix alone.
    pub q: u64,
    #[serde(with = "rational_str")]
    pub probability: Rational,
    pub alg_cost: u64,
    pub opt_cost: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YaoCertificate {
    pub n: u64,
    pub m: u64,
    pub t: u64,
    pub instances: Vec<YaoInstance>,
    #[serde(with = "rational_str")]
    pub e_alg: Rational,
    #[serde(with = "rational_str")]
    pub e_opt: Rational,
    #[serde(with = "rational_str")]
    pub ratio: Rational,
    /// `finite_n_bound(N, t)`; the additive constant of the asymptotic
    /// ratio is taken as zero.
    #[serde(with = "rational_str")]
    pub reference: Rational,
    pub transcript: Vec<MpasTranscriptEntry>,
}

/// Checks the `thm4` parameters: `N` even, `1 ≤ t ≤ N/2 − 1`, `M ≥ 1` and
/// `q | MN` for every continuation `q`.
pub fn check_thm4_params(n: u64, m: u64, t: u64) -> Result<(), AdversaryError> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(AdversaryError::InvalidParameters(format!("N must be even and >= 4, got {n}")));
    }
    if t == 0 || t >= n / 2 {
        return Err(AdversaryError::InvalidParameters(format!(
            "t must lie in [1, {}], got {t}",
            n / 2 - 1
        )));
    }
    if m == 0 {
        return Err(AdversaryError::InvalidParameters("M must be positive".into()));
    }
    let mn = m * n;
    if let Some(q) = (t..n / 2).find(|q| !mn.is_multiple_of(*q)) {
        return Err(AdversaryError::DivisibilityViolated { q, mn });
    }
    Ok(())
}

/// Plays every instance of the Yao distribution against one deterministic
/// algorithm: the prefix once, then each continuation on a snapshot.
pub fn run_thm4(alg: &mut dyn MpasAlgorithm, n: u64, m: u64, t: u64) -> Result<YaoCertificate, AdversaryError> {
    check_thm4_params(n, m, t)?;
    let mn = m * n;
    let unit = EpsRational::real(rat(1, n as i64));
    let mut prefix = MpasGame::new();
    for id in 0..mn as usize {
        prefix.play(alg, &MpasItem::new(id, unit.clone()))?;
    }
    let prefix_cost = prefix.profile().peak();

    let mut forks = Vec::new();
    for q in t..n / 2 {
        let fork = alg.snapshot().ok_or_else(|| AdversaryError::SnapshotUnsupported(alg.name()))?;
        forks.push((q, fork));
    }
    let continuations: Vec<(u64, u64, Vec<MpasTranscriptEntry>)> = forks
        .into_par_iter()
        .map(|(q, mut fork)| {
            let size = EpsRational::real(rat((n - q) as i64, n as i64));
            let mut game = prefix.clone();
            for j in 0..(mn / q) as usize {
                game.play(fork.as_mut(), &MpasItem::new(mn as usize + j, size.clone()))?;
            }
            let entries = game.assignments()[mn as usize..]
                .iter()
                .map(|a| MpasTranscriptEntry::from_assignment(Some(q), a))
                .collect();
            Ok((q, game.profile().peak(), entries))
        })
        .collect::<Result<_, AdversaryError>>()?;

    let mut instances = Vec::with_capacity(continuations.len() + 1);
    let mut transcript: Vec<MpasTranscriptEntry> = prefix
        .assignments()
        .iter()
        .map(|a| MpasTranscriptEntry::from_assignment(None, a))
        .collect();
    for (q, alg_cost, entries) in continuations {
        let (_, opt_cost) = construct_opt_thm4(n, m, Some(q))?;
        instances.push(YaoInstance {
            q,
            probability: yao_probability(n, t, q),
            alg_cost,
            opt_cost,
        });
        transcript.extend(entries);
    }
    let (_, prefix_opt) = construct_opt_thm4(n, m, None)?;
    instances.push(YaoInstance {
        q: n / 2,
        probability: yao_probability(n, t, n / 2),
        alg_cost: prefix_cost,
        opt_cost: prefix_opt,
    });

    let expect = |f: fn(&YaoInstance) -> u64| -> Rational {
        instances.iter().map(|i| &i.probability * int(f(i) as i64)).sum()
    };
    let e_alg = expect(|i| i.alg_cost);
    let e_opt = expect(|i| i.opt_cost);
    Ok(YaoCertificate {
        n,
        m,
        t,
        ratio: &e_alg / &e_opt,
        e_alg,
        e_opt,
        reference: finite_n_bound(n, t),
        instances,
        transcript,
    })
}

/// Offline assignment for the Yao instance `I_q` (`None` for the prefix
/// alone) and its peak. `I_q`: the prefix split into `q` groups of `MN/q` at
/// offsets `(j − 1)/N`, all long items at `q/N`; cost `MN/q`. Prefix alone:
/// `N` groups of `M`; cost `M`.
pub fn construct_opt_thm4(n: u64, m: u64, q: Option<u64>) -> Result<(Vec<IntervalAssignment>, u64), AdversaryError> {
    let mn = m * n;
    let unit = EpsRational::real(rat(1, n as i64));
    let groups = q.unwrap_or(n);
    let per_group = mn / groups;
    let slot = |j: u64| EpsRational::real(rat(j as i64, n as i64));
    let mut assignments: Vec<IntervalAssignment> = (0..mn)
        .map(|id| IntervalAssignment::new(id as usize, unit.clone(), slot(id / per_group)))
        .collect();
    if let Some(q) = q {
        let size = EpsRational::real(rat((n - q) as i64, n as i64));
        assignments.extend(
            (0..mn / q).map(|j| IntervalAssignment::new((mn + j) as usize, size.clone(), slot(q))),
        );
    }
    let cost = peak_of(&assignments).map_err(|e| AdversaryError::InfeasibleConstruction(e.to_string()))?;
    let expected = q.map_or(m, |q| mn / q);
    if cost != expected {
        return Err(AdversaryError::InfeasibleConstruction(format!(
            "Yao instance {q:?} has peak {cost}, expected {expected}"
        )));
    }
    Ok((assignments, cost))
}
