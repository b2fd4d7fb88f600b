//! The two removable-knapsack adversaries and their constructive optima.
//!
//! `thm1` is the adaptive two-phase construction against deterministic
//! algorithms (guarantee tending to `3/4 + √33/12 ≈ 1.228713`). `thm2` is the
//! oblivious construction with sizes `2/3 − ε` and `1/3 + 3ε` (guarantee
//! `6/5`, or `6k/(5k − 1)` for odd `k` against deterministic algorithms).
//!
//! Certificates report ratios on standard parts, i.e. in the ε → 0 limit.

use num_integer::Roots;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::adaptive_sizing::{SizeClass, SizerState};
use crate::error::AdversaryError;
use crate::knapsack::{Action, Item, KnapsackAlgorithm, KnapsackState, ProfitMode};
use crate::numerics::{int, rat, rational_str, EpsRational, Rational};
use crate::oracles::verify_packing;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackTranscriptEntry {
    pub item: usize,
    pub size: EpsRational,
    pub action: Action,
    pub loads: Vec<EpsRational>,
}

/// An explicit offline packing: item ids per bin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packing {
    pub bins: Vec<Vec<usize>>,
    pub profit: EpsRational,
}

impl Packing {
    fn from_bins(bins: Vec<Vec<&Item>>) -> Self {
        let profit = bins.iter().flatten().map(|i| &i.size).sum();
        Packing {
            bins: bins.iter().map(|b| b.iter().map(|i| i.id).collect()).collect(),
            profit,
        }
    }
}

/// Smallest `Γ ≥ 0` with `(2Γ + 5k)² ≥ 33k²`, i.e. `Γ ≥ k(√33 − 5)/2`.
pub fn gamma_threshold(k: usize) -> usize {
    let k = k as u128;
    let target = 33 * k * k;
    let holds = |g: u128| (2 * g + 5 * k) * (2 * g + 5 * k) >= target;
    let root = target.sqrt();
    let mut g = (root.saturating_sub(5 * k) / 2).saturating_sub(1);
    while g > 0 && holds(g - 1) {
        g -= 1;
    }
    while !holds(g) {
        g += 1;
    }
    g as usize
}

/// Ratios forced by the two second-phase continuations for a given `Γ`:
/// `2k/(2k − Γ)` after `k` items of size `1 − β`, and
/// `(3k + Γ − ((k − Γ) mod 2)) / (2k + 2Γ)` after items of size `1 − θ`.
pub fn thm1_branch_ratios(k: usize, gamma: usize) -> (Rational, Rational) {
    let (k, g) = (k as i64, gamma as i64);
    let big = rat(2 * k, 2 * k - g);
    let theta = rat(3 * k + g - (k - g) % 2, 2 * k + 2 * g);
    (big, theta)
}

/// The adversary's guaranteed ratio for `k` bins: the minimum over
/// `Γ ∈ [0, ⌊k/2⌋]` of the better continuation.
pub fn thm1_guarantee(k: usize) -> Rational {
    (0..=k / 2)
        .map(|g| {
            let (a, b) = thm1_branch_ratios(k, g);
            a.max(b)
        })
        .min()
        .expect("k >= 2")
}

/// Like [`thm1_guarantee`], but with the continuation chosen by
/// [`gamma_threshold`], which is what [`run_thm1`] does.
pub fn thm1_threshold_guarantee(k: usize) -> Rational {
    let threshold = gamma_threshold(k);
    (0..=k / 2)
        .map(|g| {
            let (a, b) = thm1_branch_ratios(k, g);
            if g >= threshold {
                a
            } else {
                b
            }
        })
        .min()
        .expect("k >= 2")
}

/// `6/5` for even `k`, `6k/(5k − 1)` for odd `k`.
pub fn thm2_bound(k: usize) -> Rational {
    let k = k as i64;
    if k % 2 == 0 {
        rat(6, 5)
    } else {
        rat(6 * k, 5 * k - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thm1Branch {
    BigItems,
    ThetaItems,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thm1Certificate {
    pub k: usize,
    pub gamma: usize,
    pub branch: Thm1Branch,
    pub theta: EpsRational,
    pub classes: Vec<SizeClass>,
    pub alg_profit: EpsRational,
    pub opt_profit: EpsRational,
    pub opt_packing: Packing,
    #[serde(with = "rational_str")]
    pub ratio_limit: Rational,
    pub transcript: Vec<KnapsackTranscriptEntry>,
}

fn check_k(k: usize) -> Result<(), AdversaryError> {
    if k < 2 {
        return Err(AdversaryError::InvalidParameters(format!("need k >= 2, got {k}")));
    }
    Ok(())
}

fn step(
    alg: &mut dyn KnapsackAlgorithm,
    state: &mut KnapsackState,
    item: &Item,
    transcript: &mut Vec<KnapsackTranscriptEntry>,
) -> Result<Action, AdversaryError> {
    let action = alg.on_arrival(item, state);
    state.apply(item, &action)?;
    transcript.push(KnapsackTranscriptEntry {
        item: item.id,
        size: item.size.clone(),
        action: action.clone(),
        loads: state.loads(),
    });
    Ok(action)
}

fn limit_ratio(opt: &EpsRational, alg: &EpsRational) -> Result<Rational, AdversaryError> {
    if alg.std().is_zero() {
        return Err(AdversaryError::ZeroProfit);
    }
    Ok(opt.std() / alg.std())
}

/// Plays the adaptive two-phase adversary against `alg` with `k` bins.
pub fn run_thm1(alg: &mut dyn KnapsackAlgorithm, k: usize) -> Result<Thm1Certificate, AdversaryError> {
    check_k(k)?;
    let alpha = EpsRational::from_parts(1, 2, -2, 1);
    let beta = EpsRational::from_parts(1, 2, -1, 1);
    let mut sizer = SizerState::new(alpha, beta.clone())?;
    let mut state = KnapsackState::new(k)?;
    let mut transcript = Vec::new();
    let mut phase1 = Vec::with_capacity(k);
    let mut classes: Vec<SizeClass> = Vec::with_capacity(k);

    // Phase 1: first item in a bin is largish, second is smallish, a
    // replacement inherits the class of the item it replaced.
    for id in 0..k {
        let item = Item::new(id, sizer.next_size()?);
        let action = alg.on_arrival(&item, &state);
        let occupied = match &action {
            Action::Pack { bin, .. } => state.bins().get(*bin).map(|b| b.len()),
            Action::Reject => None,
        };
        state.apply(&item, &action)?;
        let class = match (&action, occupied) {
            (Action::Pack { removals, .. }, _) if removals.len() == 1 => classes[removals[0]],
            (Action::Pack { removals, .. }, Some(0)) if removals.is_empty() => SizeClass::Largish,
            (Action::Pack { removals, .. }, Some(1)) if removals.is_empty() => SizeClass::Smallish,
            _ => {
                return Err(AdversaryError::PhaseInvariant(format!(
                    "unexpected first-phase action {action:?}"
                )))
            }
        };
        sizer.classify(class)?;
        classes.push(class);
        transcript.push(KnapsackTranscriptEntry {
            item: id,
            size: item.size.clone(),
            action,
            loads: state.loads(),
        });
        phase1.push(item);
    }

    for bin in state.bins() {
        let largish = bin.items().iter().filter(|i| classes[i.id] == SizeClass::Largish).count();
        if bin.len() > 2 || (!bin.is_empty() && largish != 1) {
            return Err(AdversaryError::PhaseInvariant(format!(
                "first-phase bin holds {} items, {largish} largish",
                bin.len()
            )));
        }
    }
    let gamma = state.bins().iter().filter(|b| b.len() == 2).count();
    let theta = sizer.threshold()?;

    let (branch, size, count) = if gamma >= gamma_threshold(k) {
        (Thm1Branch::BigItems, &EpsRational::one() - &beta, k)
    } else {
        (Thm1Branch::ThetaItems, &EpsRational::one() - &theta, gamma + (k - gamma) / 2)
    };
    let mut phase2 = Vec::with_capacity(count);
    for j in 0..count {
        let item = Item::new(k + j, size.clone());
        step(alg, &mut state, &item, &mut transcript)?;
        phase2.push(item);
    }

    let alg_profit = state.profit(ProfitMode::Proportional);
    let opt_packing = construct_opt_thm1(&phase1, &classes, &phase2, k, branch, gamma)?;
    let ratio_limit = limit_ratio(&opt_packing.profit, &alg_profit)?;
    Ok(Thm1Certificate {
        k,
        gamma,
        branch,
        theta,
        classes,
        alg_profit,
        opt_profit: opt_packing.profit.clone(),
        opt_packing,
        ratio_limit,
        transcript,
    })
}

/// Offline packing for a finished `thm1` game.
///
/// `BigItems`: every first-phase item is paired with one item of size
/// `1 − β`. `ThetaItems`: `Γ` bins of one smallish item plus one `1 − θ` item,
/// the other `1 − θ` items alone, and the leftover first-phase items in pairs.
pub fn construct_opt_thm1(
    phase1: &[Item],
    classes: &[SizeClass],
    phase2: &[Item],
    k: usize,
    branch: Thm1Branch,
    gamma: usize,
) -> Result<Packing, AdversaryError> {
    let bins: Vec<Vec<&Item>> = match branch {
        Thm1Branch::BigItems => phase1.iter().zip(phase2).map(|(a, b)| vec![a, b]).collect(),
        Thm1Branch::ThetaItems => {
            let smallish: Vec<&Item> = phase1
                .iter()
                .filter(|i| classes[i.id] == SizeClass::Smallish)
                .take(gamma)
                .collect();
            if smallish.len() < gamma || phase2.len() < gamma {
                return Err(AdversaryError::InfeasibleConstruction(format!(
                    "{} smallish items for Γ = {gamma}",
                    smallish.len()
                )));
            }
            let mut bins: Vec<Vec<&Item>> =
                smallish.iter().zip(phase2).map(|(s, t)| vec![*s, t]).collect();
            bins.extend(phase2[gamma..].iter().map(|t| vec![t]));
            let rest: Vec<&Item> = phase1
                .iter()
                .filter(|i| !smallish.iter().any(|s| s.id == i.id))
                .collect();
            bins.extend(rest.chunks(2).map(|c| c.to_vec()));
            bins
        }
    };
    let packing = Packing::from_bins(bins);
    let items: Vec<Item> = phase1.iter().chain(phase2).cloned().collect();
    if !verify_packing(&items, k, &packing.bins) {
        return Err(AdversaryError::InfeasibleConstruction(format!(
            "{branch:?} packing does not fit {k} bins"
        )));
    }
    Ok(packing)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thm2Branch {
    ThirdPlusEps,
    TwoThirdsMinus3Eps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Thm2Mode {
    Deterministic,
    Estimated { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm2Certificate {
    pub k: usize,
    /// Bins holding exactly one `2/3 − ε` item after the first phase
    /// (deterministic mode only).
    pub x: Option<usize>,
    #[serde(with = "rational_str")]
    pub x_mean: Rational,
    /// Half-width of a normal 95% interval around `x_mean` (estimated mode).
    pub x_ci95: Option<f64>,
    pub branch: Thm2Branch,
    pub alg_profit: EpsRational,
    pub opt_profit: EpsRational,
    #[serde(with = "rational_str")]
    pub ratio: Rational,
    pub mode: Thm2Mode,
    pub transcript: Vec<KnapsackTranscriptEntry>,
}

fn thm2_big() -> EpsRational {
    EpsRational::from_parts(2, 3, -1, 1)
}

fn thm2_small() -> EpsRational {
    EpsRational::from_parts(1, 3, 3, 1)
}

/// The fixed `thm2` input: `2k` items of size `2/3 − ε`, then `2k` of size
/// `1/3 + 3ε`, then `k` items of the branch size.
pub fn thm2_instance(k: usize, branch: Thm2Branch) -> Vec<Item> {
    let tail = match branch {
        Thm2Branch::ThirdPlusEps => EpsRational::from_parts(1, 3, 1, 1),
        Thm2Branch::TwoThirdsMinus3Eps => EpsRational::from_parts(2, 3, -3, 1),
    };
    let sizes = std::iter::repeat_n(thm2_big(), 2 * k)
        .chain(std::iter::repeat_n(thm2_small(), 2 * k))
        .chain(std::iter::repeat_n(tail, k));
    sizes.enumerate().map(|(id, s)| Item::new(id, s)).collect()
}

fn thm2_branch_for(x_sum: usize, trials: usize, k: usize) -> Thm2Branch {
    // Mean X ≤ k/2, which for a single integer X is X ≤ ⌊k/2⌋.
    if 2 * x_sum <= k * trials {
        Thm2Branch::ThirdPlusEps
    } else {
        Thm2Branch::TwoThirdsMinus3Eps
    }
}

fn count_x(state: &KnapsackState) -> usize {
    let big = thm2_big();
    state
        .bins()
        .iter()
        .filter(|b| b.len() == 1 && b.items()[0].size == big)
        .count()
}

fn thm2_phase1(
    alg: &mut dyn KnapsackAlgorithm,
    k: usize,
    transcript: &mut Vec<KnapsackTranscriptEntry>,
) -> Result<KnapsackState, AdversaryError> {
    let mut state = KnapsackState::new(k)?;
    // The branch only changes the tail, so either instance has this prefix.
    for item in thm2_instance(k, Thm2Branch::ThirdPlusEps).iter().take(4 * k) {
        step(alg, &mut state, item, transcript)?;
    }
    Ok(state)
}

fn thm2_phase2(
    alg: &mut dyn KnapsackAlgorithm,
    state: &mut KnapsackState,
    k: usize,
    branch: Thm2Branch,
    transcript: &mut Vec<KnapsackTranscriptEntry>,
) -> Result<(), AdversaryError> {
    for item in thm2_instance(k, branch).iter().skip(4 * k) {
        step(alg, state, item, transcript)?;
    }
    Ok(())
}

/// Plays the oblivious two-size adversary against a deterministic `alg`.
pub fn run_thm2(alg: &mut dyn KnapsackAlgorithm, k: usize) -> Result<Thm2Certificate, AdversaryError> {
    check_k(k)?;
    let mut transcript = Vec::new();
    let mut state = thm2_phase1(alg, k, &mut transcript)?;
    let x = count_x(&state);
    let branch = thm2_branch_for(x, 1, k);
    thm2_phase2(alg, &mut state, k, branch, &mut transcript)?;
    let alg_profit = state.profit(ProfitMode::Proportional);
    let opt_profit = construct_opt_thm2(k, branch)?.profit;
    let ratio = limit_ratio(&opt_profit, &alg_profit)?;
    Ok(Thm2Certificate {
        k,
        x: Some(x),
        x_mean: int(x as i64),
        x_ci95: None,
        branch,
        alg_profit,
        opt_profit,
        ratio,
        mode: Thm2Mode::Deterministic,
        transcript,
    })
}

/// Runs a seeded (randomized) algorithm `trials` times. The branch is chosen
/// once from the sample mean of `X`, as an oblivious adversary would from the
/// expectation; the reported profit is the sample mean.
pub fn estimate_thm2<F>(make_alg: F, k: usize, trials: usize, seed: u64) -> Result<Thm2Certificate, AdversaryError>
where
    F: Fn(u64) -> Box<dyn KnapsackAlgorithm>,
{
    check_k(k)?;
    if trials == 0 {
        return Err(AdversaryError::InvalidParameters("need at least one trial".into()));
    }
    let mut games = Vec::with_capacity(trials);
    for i in 0..trials {
        let mut alg = make_alg(seed.wrapping_add(i as u64));
        let state = thm2_phase1(alg.as_mut(), k, &mut Vec::new())?;
        games.push((alg, state));
    }
    let xs: Vec<usize> = games.iter().map(|(_, s)| count_x(s)).collect();
    let x_sum: usize = xs.iter().sum();
    let branch = thm2_branch_for(x_sum, trials, k);
    let mut total = EpsRational::zero();
    for (alg, state) in games.iter_mut() {
        thm2_phase2(alg.as_mut(), state, k, branch, &mut Vec::new())?;
        total += &state.profit(ProfitMode::Proportional);
    }
    let alg_profit = total.scale(&rat(1, trials as i64));
    let opt_profit = construct_opt_thm2(k, branch)?.profit;
    let ratio = limit_ratio(&opt_profit, &alg_profit)?;

    let mean = x_sum as f64 / trials as f64;
    let x_ci95 = (trials > 1).then(|| {
        let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        1.96 * (var / trials as f64).sqrt()
    });
    Ok(Thm2Certificate {
        k,
        x: None,
        x_mean: rat(x_sum as i64, trials as i64),
        x_ci95,
        branch,
        alg_profit,
        opt_profit,
        ratio,
        mode: Thm2Mode::Estimated { trials, seed },
        transcript: Vec::new(),
    })
}

/// `k` full bins: each `2/3 − ε` item with a `1/3 + ε` item, or each
/// `1/3 + 3ε` item with a `2/3 − 3ε` item.
pub fn construct_opt_thm2(k: usize, branch: Thm2Branch) -> Result<Packing, AdversaryError> {
    let items = thm2_instance(k, branch);
    let tail = &items[4 * k..];
    let partners = match branch {
        Thm2Branch::ThirdPlusEps => &items[..k],
        Thm2Branch::TwoThirdsMinus3Eps => &items[2 * k..3 * k],
    };
    let packing = Packing::from_bins(partners.iter().zip(tail).map(|(a, b)| vec![a, b]).collect());
    if !verify_packing(&items, k, &packing.bins) {
        return Err(AdversaryError::InfeasibleConstruction(format!("{branch:?} with k = {k}")));
    }
    Ok(packing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{FirstFitKeep, RandomCompliant, ReplaceIfLarger};

    fn e(n: i64, d: i64, c_n: i64, c_d: i64) -> EpsRational {
        EpsRational::from_parts(n, d, c_n, c_d)
    }

    // Independent oracle: the first Γ satisfying the inequality in floating
    // point, checked only where the margin is far from rounding.
    #[test]
    fn gamma_threshold_values() {
        assert_eq!(gamma_threshold(2), 1);
        assert_eq!(gamma_threshold(10), 4);
        assert_eq!(gamma_threshold(1000), 373);
        for k in 2..400usize {
            let g = gamma_threshold(k);
            let exact = |g: usize| ((2 * g + 5 * k) as u128).pow(2) >= 33 * (k as u128).pow(2);
            assert!(exact(g));
            assert!(g == 0 || !exact(g - 1));
            let real = k as f64 * (33f64.sqrt() - 5.0) / 2.0;
            assert!(g as f64 >= real - 1e-9 && (g as f64) < real + 1.0);
        }
    }

    #[test]
    fn small_k_table() {
        let expected = [
            rat(4, 3),
            rat(5, 4),
            rat(6, 5),
            rat(5, 4),
            rat(5, 4),
            rat(11, 9),
            rat(16, 13),
            rat(5, 4),
            rat(16, 13),
        ];
        for (k, want) in (2..=10).zip(expected) {
            assert_eq!(thm1_guarantee(k), want, "k = {k}");
            assert_eq!(thm1_threshold_guarantee(k), want, "k = {k}");
        }
        let odd = [(3, rat(9, 7)), (5, rat(5, 4)), (7, rat(21, 17)), (9, rat(27, 22))];
        for (k, want) in odd {
            assert_eq!(thm2_bound(k), want);
        }
        assert_eq!(thm2_bound(8), rat(6, 5));
    }

    #[test]
    fn guarantee_approaches_constant() {
        let c = 0.75 + 33f64.sqrt() / 12.0;
        for k in (2..300).chain([1000, 2001]) {
            let g = crate::numerics::to_f64(&thm1_guarantee(k));
            assert!(g >= c - 1.0 / (2.0 * k as f64), "k = {k}: {g}");
        }
    }

    #[test]
    fn thm1_first_fit_trace() {
        let cert = run_thm1(&mut FirstFitKeep, 2).unwrap();
        assert_eq!(cert.gamma, 1);
        assert_eq!(cert.branch, Thm1Branch::BigItems);
        assert_eq!(cert.classes, vec![SizeClass::Largish, SizeClass::Smallish]);
        assert_eq!(cert.transcript[1].loads, vec![e(1, 1, -13, 4), e(0, 1, 0, 1)]);
        assert_eq!(cert.transcript[3].loads, vec![e(1, 1, -13, 4), e(1, 2, 1, 1)]);
        assert_eq!(cert.transcript[3].action, Action::Reject);
        assert_eq!(cert.alg_profit, e(3, 2, -9, 4));
        assert_eq!(cert.opt_profit, e(2, 1, -5, 4));
        assert_eq!(cert.ratio_limit, rat(4, 3));
        assert_eq!(cert.theta, e(1, 2, -13, 8));
    }

    #[test]
    fn thm1_big_items_optimum() {
        let phase1 = vec![Item::new(0, e(1, 2, -3, 2)), Item::new(1, e(1, 2, -7, 4))];
        let phase2 = vec![Item::new(2, e(1, 2, 1, 1)), Item::new(3, e(1, 2, 1, 1))];
        let classes = [SizeClass::Largish, SizeClass::Smallish];
        let p = construct_opt_thm1(&phase1, &classes, &phase2, 2, Thm1Branch::BigItems, 1).unwrap();
        assert_eq!(p.bins, vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(p.profit, e(2, 1, -5, 4));
    }

    #[test]
    fn thm1_theta_optimum_without_smallish() {
        let phase1 = vec![Item::new(0, e(1, 2, -3, 2)), Item::new(1, e(1, 2, -5, 4))];
        let classes = [SizeClass::Largish, SizeClass::Largish];
        let theta = e(1, 2, -7, 4);
        let phase2 = vec![Item::new(2, &EpsRational::one() - &theta)];
        let p = construct_opt_thm1(&phase1, &classes, &phase2, 2, Thm1Branch::ThetaItems, 0).unwrap();
        assert_eq!(p.profit.standard_part(), rat(3, 2));
    }

    #[test]
    fn thm1_theta_optimum_matches_closed_form() {
        // A spread-out player keeps Γ small, forcing the ThetaItems branch.
        for k in 2..=10 {
            let cert = run_thm1(&mut SpreadOut, k).unwrap();
            assert_eq!(cert.gamma, 0);
            assert_eq!(cert.branch, Thm1Branch::ThetaItems);
            let (g, half) = (cert.gamma as i64, (k - cert.gamma) as i64 / 2);
            let closed = int(g) + rat(3 * half, 2) + rat((k as i64 - g) % 2, 2);
            assert_eq!(cert.opt_profit.standard_part(), closed);
            assert!(cert.ratio_limit >= thm1_guarantee(k));
        }
    }

    /// Packs each arrival into the emptiest bin.
    struct SpreadOut;

    impl KnapsackAlgorithm for SpreadOut {
        fn name(&self) -> String {
            "spread_out".into()
        }

        fn on_arrival(&mut self, item: &Item, state: &KnapsackState) -> Action {
            let bin = (0..state.k())
                .filter(|&b| state.bins()[b].fits(&item.size))
                .min_by_key(|&b| state.bins()[b].len());
            bin.map_or(Action::Reject, Action::pack)
        }
    }

    #[test]
    fn thm1_rejects_illegal_rejection() {
        struct AlwaysReject;
        impl KnapsackAlgorithm for AlwaysReject {
            fn name(&self) -> String {
                "always_reject".into()
            }
            fn on_arrival(&mut self, _: &Item, _: &KnapsackState) -> Action {
                Action::Reject
            }
        }
        let err = run_thm1(&mut AlwaysReject, 3).unwrap_err();
        assert!(err.is_contract_violation());
        assert!(matches!(run_thm1(&mut FirstFitKeep, 1), Err(AdversaryError::InvalidParameters(_))));
    }

    #[test]
    fn thm2_first_fit_trace() {
        let cert = run_thm2(&mut FirstFitKeep, 2).unwrap();
        assert_eq!(cert.x, Some(2));
        assert_eq!(cert.branch, Thm2Branch::TwoThirdsMinus3Eps);
        assert_eq!(cert.alg_profit, e(4, 3, -2, 1));
        assert_eq!(cert.opt_profit, e(2, 1, 0, 1));
        assert_eq!(cert.ratio, rat(3, 2));
    }

    #[test]
    fn thm2_optimum_full_bins() {
        assert_eq!(construct_opt_thm2(2, Thm2Branch::ThirdPlusEps).unwrap().profit, e(2, 1, 0, 1));
        assert_eq!(construct_opt_thm2(5, Thm2Branch::TwoThirdsMinus3Eps).unwrap().profit, e(5, 1, 0, 1));
        assert_eq!(construct_opt_thm2(1, Thm2Branch::ThirdPlusEps).unwrap().profit, e(1, 1, 0, 1));
    }

    #[test]
    fn thm2_bounds_hold_for_baselines() {
        for k in 2..=9 {
            for cert in [
                run_thm2(&mut FirstFitKeep, k).unwrap(),
                run_thm2(&mut ReplaceIfLarger, k).unwrap(),
                run_thm2(&mut RandomCompliant::new(k as u64), k).unwrap(),
            ] {
                assert!(cert.ratio >= thm2_bound(k), "k = {k}: {}", cert.ratio);
            }
        }
    }

    #[test]
    fn thm2_estimated_mode() {
        let cert = estimate_thm2(|s| Box::new(RandomCompliant::new(s)), 4, 8, 11).unwrap();
        assert_eq!(cert.mode, Thm2Mode::Estimated { trials: 8, seed: 11 });
        assert!(cert.ratio >= rat(6, 5));
        assert!(cert.x_ci95.is_some());
        let again = estimate_thm2(|s| Box::new(RandomCompliant::new(s)), 4, 8, 11).unwrap();
        assert_eq!(cert, again);
    }
}
