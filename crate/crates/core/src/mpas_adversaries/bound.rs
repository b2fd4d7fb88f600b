//! Closed-form bound constants and the finite-`N` Yao bound.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::numerics::{int, rat, Rational};

/// `3/4 + √33/12 ≈ 1.2287135539`, the deterministic knapsack bound.
pub fn thm1_constant() -> f64 {
    0.75 + 33f64.sqrt() / 12.0
}

/// `R(τ) = 1 + (1/2 − τ) / (τ − ln 2τ)` for `τ ∈ (0, 1/2]`.
pub fn r_of_tau(tau: f64) -> f64 {
    1.0 + (0.5 - tau) / (tau - (2.0 * tau).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSolution {
    pub tau: f64,
    pub r: f64,
    pub iterations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max, iterations)`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64, usize) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut iterations = 0;
    while hi - lo > tol {
        iterations += 1;
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x), iterations)
}

/// Maximizes `R(τ)` over `(0, 1/2)` to `1e-9` in `τ`.
pub fn solve_tau_r() -> BoundSolution {
    let (tau, r, iterations) = golden_section_max(r_of_tau, 1e-12, 0.5, 1e-9);
    BoundSolution { tau, r, iterations }
}

fn sieve(limit: usize) -> Vec<usize> {
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for p in 2..=limit {
        if !composite[p] {
            primes.push(p);
            let mut m = p * p;
            while m <= limit {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}

/// `lcm(1, …, n)`.
fn lcm_upto(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for p in sieve(n) {
        let mut pk = p;
        while pk <= n / p {
            pk *= p;
        }
        acc *= BigInt::from(pk);
    }
    acc
}

/// `Σ_{q=lo}^{hi-1} 1/q` as an unreduced `(numerator, denominator)` pair by
/// binary splitting.
fn harmonic_split(lo: u64, hi: u64) -> (BigInt, BigInt) {
    match hi - lo {
        0 => (BigInt::zero(), BigInt::one()),
        1 => (BigInt::one(), BigInt::from(lo)),
        _ => {
            let mid = lo + (hi - lo) / 2;
            let (p1, q1) = harmonic_split(lo, mid);
            let (p2, q2) = harmonic_split(mid, hi);
            (p1 * &q2 + p2 * &q1, q1 * q2)
        }
    }
}

/// `Σ_{q=lo}^{hi-1} 1/q` as `A / L` with `L = lcm(1, …, hi − 1)`.
///
/// Reducing the binary-splitting result directly is quadratic in a
/// denominator of `Σ log q` bits; dividing by `Π q / L` first keeps every gcd
/// at the size of `L`.
fn harmonic_over_lcm(lo: u64, hi: u64) -> (BigInt, BigInt) {
    let l = lcm_upto((hi - 1) as usize);
    let (p, q) = harmonic_split(lo, hi);
    let a = p * &l / q;
    (a, l)
}

fn check_n_t(n: u64, t: u64) {
    assert!(n.is_multiple_of(2) && n >= 4, "N must be even and at least 4, got {n}");
    assert!(t >= 1 && t < n / 2, "t must lie in [1, N/2 - 1], got {t}");
}

/// `(1/2 + S) / (t/N + S)` with `S = Σ_{q=t}^{N/2−1} 1/q`, exactly. This is the
/// ratio forced on every deterministic algorithm by the Yao distribution with
/// parameters `(N, t)`, ignoring the additive constant.
///
/// # Panics
/// If `N` is odd or below 4, or `t ∉ [1, N/2 − 1]`.
pub fn finite_n_bound(n: u64, t: u64) -> Rational {
    check_n_t(n, t);
    let (a, l) = harmonic_over_lcm(t, n / 2);
    let n_big = BigInt::from(n);
    // (1/2 + A/L) / (t/N + A/L) = N(L + 2A) / (2(tL + NA))
    let numer = &n_big * (&l + &a * 2);
    let denom = (BigInt::from(t) * &l + &n_big * &a) * 2;
    Rational::new(numer, denom)
}

/// `argmax_t finite_n_bound(N, t)`, scanning every admissible `t` exactly.
pub fn best_t(n: u64) -> u64 {
    assert!(n.is_multiple_of(2) && n >= 4, "N must be even and at least 4, got {n}");
    let half = rat(1, 2);
    let mut s = Rational::zero();
    let mut best: Option<(Rational, u64)> = None;
    for t in (1..n / 2).rev() {
        s += rat(1, t as i64);
        let value = (&half + &s) / (rat(t as i64, n as i64) + &s);
        if best.as_ref().is_none_or(|(b, _)| value >= *b) {
            best = Some((value, t));
        }
    }
    best.expect("range is non-empty").1
}

/// The Yao distribution: `p_{N/2} = 2t/N`, `p_q = 2/N` for `t ≤ q < N/2`.
pub fn yao_probability(n: u64, t: u64, q: u64) -> Rational {
    if q == n / 2 {
        rat(2 * t as i64, n as i64)
    } else if (t..n / 2).contains(&q) {
        rat(2, n as i64)
    } else {
        int(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::to_f64;

    // Oracle: plain summation of 1/q without any splitting.
    fn direct(n: u64, t: u64) -> Rational {
        let s: Rational = (t..n / 2).map(|q| rat(1, q as i64)).sum();
        (rat(1, 2) + &s) / (rat(t as i64, n as i64) + &s)
    }

    #[test]
    fn matches_direct_summation() {
        for n in (4..=60).step_by(2) {
            for t in 1..n / 2 {
                assert_eq!(finite_n_bound(n, t), direct(n, t), "N = {n}, t = {t}");
            }
        }
        assert_eq!(finite_n_bound(12, 3), rat(77, 62));
        assert_eq!(finite_n_bound(12, 2), rat(107, 87));
    }

    #[test]
    fn best_t_small() {
        assert_eq!(best_t(12), 3);
        for n in (4..=40).step_by(2) {
            let t = best_t(n);
            for other in 1..n / 2 {
                assert!(direct(n, t) >= direct(n, other));
            }
        }
    }

    #[test]
    fn distribution_sums_to_one() {
        for (n, t) in [(12, 3), (20, 1), (100, 21)] {
            let total: Rational = (t..=n / 2).map(|q| yao_probability(n, t, q)).sum();
            assert_eq!(total, int(1));
        }
        assert_eq!(yao_probability(12, 3, 2), int(0));
    }

    #[test]
    fn constants() {
        let c = thm1_constant();
        assert!((c - 1.2287135539).abs() < 1e-9);
        assert!(((12.0 * (c - 0.75)).powi(2) - 33.0).abs() < 1e-7);
        // Both continuation ratios agree at Γ/k = (√33 − 5)/2.
        let x = (33f64.sqrt() - 5.0) / 2.0;
        assert!((2.0 / (2.0 - x) - c).abs() < 1e-12);
        assert!(((3.0 + x) / (2.0 + 2.0 * x) - c).abs() < 1e-12);

        let sol = solve_tau_r();
        assert!((sol.tau - 0.212072).abs() < 1e-5, "{sol:?}");
        assert!((sol.r - 1.2691534).abs() < 1e-6, "{sol:?}");
        assert!(sol.iterations > 10);
        assert_eq!(r_of_tau(0.5), 1.0);
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx, _) = golden_section_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn moderate_n_tracks_limit() {
        let values: Vec<f64> = [100u64, 1000, 10_000]
            .iter()
            .map(|&n| to_f64(&finite_n_bound(n, (0.212072 * n as f64).round() as u64)))
            .collect();
        assert!(values.windows(2).all(|w| w[0] < w[1]));
        assert!(values.iter().all(|v| *v < 1.2691534));
        assert!((values[2] - 1.2691534).abs() < 1e-4);
    }
}
