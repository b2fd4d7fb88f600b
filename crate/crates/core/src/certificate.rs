//! Versioned ratio certificates: one adversary run against one named
//! algorithm, with enough recorded to recompute and replay the ratio.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{knapsack_baseline, mpas_baseline, UnknownBaseline};
use crate::error::AdversaryError;
use crate::knapsack::{Action, Item, KnapsackAlgorithm, KnapsackState};
use crate::knapsack_adversaries::{
    estimate_thm2, run_thm1, run_thm2, thm1_threshold_guarantee, thm2_bound, Thm1Certificate,
    Thm2Certificate, Thm2Mode,
};
use crate::mpas::{IntervalAssignment, MpasAlgorithm, MpasItem};
use crate::mpas_adversaries::{best_t, run_thm3, run_thm4, Thm3Certificate, YaoCertificate};
use crate::numerics::{int, rat, rational_str, to_f64, EpsRational, ParseError, Rational};

pub const SCHEMA: &str = "lbforge/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adversary {
    Thm1,
    Thm2,
    Thm3,
    Thm4,
}

impl Adversary {
    pub const ALL: [Adversary; 4] = [Adversary::Thm1, Adversary::Thm2, Adversary::Thm3, Adversary::Thm4];

    pub fn is_knapsack(self) -> bool {
        matches!(self, Adversary::Thm1 | Adversary::Thm2)
    }

    pub fn name(self) -> &'static str {
        match self {
            Adversary::Thm1 => "thm1",
            Adversary::Thm2 => "thm2",
            Adversary::Thm3 => "thm3",
            Adversary::Thm4 => "thm4",
        }
    }
}

impl fmt::Display for Adversary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Adversary {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Adversary::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| RunError::InvalidRequest(format!("unknown adversary {s:?}")))
    }
}

/// Game parameters; which fields are required depends on the adversary.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    /// Switches `thm2` to estimated mode over this many seeded runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgorithmId {
    pub name: String,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSpec {
    pub adversary: Adversary,
    pub params: Params,
    pub algorithm: AlgorithmId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Details {
    Thm1(Thm1Certificate),
    Thm2(Thm2Certificate),
    Thm3(Thm3Certificate),
    Thm4(YaoCertificate),
}

/// The serialized outcome of one run.
///
/// `measured` is the algorithm's profit (knapsack) or cost (MPAS), `optimum`
/// the constructive optimum, both standard parts; for `thm4` both are
/// expectations under the input distribution. `ratio` is `optimum/measured`
/// for knapsack and `measured/optimum` for MPAS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCertificate {
    pub schema: String,
    pub adversary: Adversary,
    pub params: Params,
    pub algorithm: AlgorithmId,
    #[serde(with = "rational_str")]
    pub measured: Rational,
    #[serde(with = "rational_str")]
    pub optimum: Rational,
    #[serde(with = "rational_str")]
    pub ratio: Rational,
    #[serde(with = "rational_str")]
    pub reference_bound: Rational,
    /// Always zero: every reference bound is exact.
    #[serde(with = "rational_str")]
    pub tolerance: Rational,
    pub pass: bool,
    pub ratio_approx: f64,
    pub reference_approx: f64,
    pub details: Details,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RunError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    UnknownBaseline(#[from] UnknownBaseline),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("replay diverged from the recorded transcript: {0}")]
    ReplayDiverged(String),
    #[error("certificate is inconsistent: {0}")]
    Inconsistent(String),
}

impl RunError {
    pub fn is_contract_violation(&self) -> bool {
        matches!(self, RunError::Adversary(e) if e.is_contract_violation())
    }

    /// Whether the fault lies with the request rather than with a game.
    pub fn is_invalid_request(&self) -> bool {
        match self {
            RunError::InvalidRequest(_) | RunError::UnknownBaseline(_) => true,
            RunError::Adversary(e) => matches!(
                e,
                AdversaryError::InvalidParameters(_)
                    | AdversaryError::DivisibilityViolated { .. }
                    | AdversaryError::SnapshotUnsupported(_)
            ),
            _ => false,
        }
    }
}

/// Reference bound for `thm3` at `N`: `5/4 − 1/(6N)`.
pub fn thm3_reference(n: u64) -> Rational {
    rat(5, 4) - rat(1, 6 * n as i64)
}

fn need<T: Copy>(value: Option<T>, what: &str, adversary: Adversary) -> Result<T, RunError> {
    value.ok_or_else(|| RunError::InvalidRequest(format!("{adversary} needs {what}")))
}

/// Runs `spec` against the registered baseline it names.
pub fn run(spec: &RunSpec) -> Result<RatioCertificate, RunError> {
    let seed = spec.algorithm.seed.unwrap_or(0);
    let name = spec.algorithm.name.as_str();
    let p = &spec.params;
    if spec.adversary.is_knapsack() {
        if p.trials.is_some() && spec.adversary == Adversary::Thm2 {
            let k = need(p.k, "k", spec.adversary)?;
            let trials = need(p.trials, "trials", spec.adversary)?;
            knapsack_baseline(name, seed)?;
            let cert = estimate_thm2(|s| knapsack_baseline(name, s).expect("checked above"), k, trials, seed)?;
            return Ok(certify_thm2(cert, spec.algorithm.clone()));
        }
        let mut alg = knapsack_baseline(name, seed)?;
        certify_knapsack(spec.adversary, p, alg.as_mut(), spec.algorithm.clone())
    } else {
        let mut alg = mpas_baseline(name, seed)?;
        certify_mpas(spec.adversary, p, alg.as_mut(), spec.algorithm.clone())
    }
}

/// Runs a knapsack adversary against any algorithm instance.
pub fn certify_knapsack(
    adversary: Adversary,
    params: &Params,
    alg: &mut dyn KnapsackAlgorithm,
    id: AlgorithmId,
) -> Result<RatioCertificate, RunError> {
    let k = need(params.k, "k", adversary)?;
    match adversary {
        Adversary::Thm1 => Ok(certify_thm1(run_thm1(alg, k)?, id)),
        Adversary::Thm2 => Ok(certify_thm2(run_thm2(alg, k)?, id)),
        _ => Err(RunError::InvalidRequest(format!("{adversary} is an MPAS adversary"))),
    }
}

/// Runs an MPAS adversary against any algorithm instance. A missing `t` for
/// `thm4` defaults to the maximizer of the finite bound.
pub fn certify_mpas(
    adversary: Adversary,
    params: &Params,
    alg: &mut dyn MpasAlgorithm,
    id: AlgorithmId,
) -> Result<RatioCertificate, RunError> {
    let n = need(params.n, "N", adversary)?;
    match adversary {
        Adversary::Thm3 => Ok(certify_thm3(run_thm3(alg, n)?, id)),
        Adversary::Thm4 => {
            let m = need(params.m, "M", adversary)?;
            if n < 4 || n % 2 != 0 {
                return Err(AdversaryError::InvalidParameters(format!("N must be even and >= 4, got {n}")).into());
            }
            let t = params.t.unwrap_or_else(|| best_t(n));
            Ok(certify_thm4(run_thm4(alg, n, m, t)?, id))
        }
        _ => Err(RunError::InvalidRequest(format!("{adversary} is a knapsack adversary"))),
    }
}

fn assemble(
    adversary: Adversary,
    params: Params,
    algorithm: AlgorithmId,
    measured: Rational,
    optimum: Rational,
    ratio: Rational,
    reference_bound: Rational,
    details: Details,
) -> RatioCertificate {
    let tolerance = int(0);
    RatioCertificate {
        schema: SCHEMA.to_string(),
        adversary,
        params,
        algorithm,
        pass: ratio >= &reference_bound - &tolerance,
        ratio_approx: to_f64(&ratio),
        reference_approx: to_f64(&reference_bound),
        measured,
        optimum,
        ratio,
        reference_bound,
        tolerance,
        details,
    }
}

/// Reference: the guarantee of the threshold rule `run_thm1` follows.
pub fn certify_thm1(cert: Thm1Certificate, algorithm: AlgorithmId) -> RatioCertificate {
    let params = Params { k: Some(cert.k), ..Params::default() };
    assemble(
        Adversary::Thm1,
        params,
        algorithm,
        cert.alg_profit.std().clone(),
        cert.opt_profit.std().clone(),
        cert.ratio_limit.clone(),
        thm1_threshold_guarantee(cert.k),
        Details::Thm1(cert),
    )
}

/// Reference: `thm2_bound(k)` when deterministic, `6/5` when estimated.
pub fn certify_thm2(cert: Thm2Certificate, algorithm: AlgorithmId) -> RatioCertificate {
    let (trials, reference) = match cert.mode {
        Thm2Mode::Deterministic => (None, thm2_bound(cert.k)),
        Thm2Mode::Estimated { trials, .. } => (Some(trials), rat(6, 5)),
    };
    let params = Params { k: Some(cert.k), trials, ..Params::default() };
    assemble(
        Adversary::Thm2,
        params,
        algorithm,
        cert.alg_profit.std().clone(),
        cert.opt_profit.std().clone(),
        cert.ratio.clone(),
        reference,
        Details::Thm2(cert),
    )
}

pub fn certify_thm3(cert: Thm3Certificate, algorithm: AlgorithmId) -> RatioCertificate {
    let params = Params { n: Some(cert.n), ..Params::default() };
    assemble(
        Adversary::Thm3,
        params,
        algorithm,
        int(cert.alg_peak as i64),
        int(cert.opt_upper as i64),
        cert.ratio.clone(),
        thm3_reference(cert.n),
        Details::Thm3(cert),
    )
}

pub fn certify_thm4(cert: YaoCertificate, algorithm: AlgorithmId) -> RatioCertificate {
    let params = Params { n: Some(cert.n), m: Some(cert.m), t: Some(cert.t), ..Params::default() };
    assemble(
        Adversary::Thm4,
        params,
        algorithm,
        cert.e_alg.clone(),
        cert.e_opt.clone(),
        cert.ratio.clone(),
        cert.reference.clone(),
        Details::Thm4(cert),
    )
}

/// Recomputes the ratio from `measured` and `optimum` and checks it against
/// the stored ratio and against the embedded game record.
pub fn recompute_ratio(cert: &RatioCertificate) -> Result<Rational, RunError> {
    let inconsistent = |what: &str| RunError::Inconsistent(what.to_string());
    let zero = int(0);
    let (num, den) = if cert.adversary.is_knapsack() {
        (&cert.optimum, &cert.measured)
    } else {
        (&cert.measured, &cert.optimum)
    };
    if *den == zero {
        return Err(inconsistent("zero denominator"));
    }
    let ratio = num / den;
    if ratio != cert.ratio {
        return Err(inconsistent("ratio does not match measured and optimum"));
    }
    let (measured, optimum, inner) = match &cert.details {
        Details::Thm1(c) => (c.alg_profit.std().clone(), c.opt_profit.std().clone(), c.ratio_limit.clone()),
        Details::Thm2(c) => (c.alg_profit.std().clone(), c.opt_profit.std().clone(), c.ratio.clone()),
        Details::Thm3(c) => (int(c.alg_peak as i64), int(c.opt_upper as i64), c.ratio.clone()),
        Details::Thm4(c) => {
            let e_alg: Rational = c.instances.iter().map(|i| &i.probability * int(i.alg_cost as i64)).sum();
            let e_opt: Rational = c.instances.iter().map(|i| &i.probability * int(i.opt_cost as i64)).sum();
            if e_alg != c.e_alg || e_opt != c.e_opt {
                return Err(inconsistent("expectations do not match per-instance costs"));
            }
            (e_alg, e_opt, c.ratio.clone())
        }
    };
    if measured != cert.measured || optimum != cert.optimum || inner != ratio {
        return Err(inconsistent("summary fields disagree with the game record"));
    }
    Ok(ratio)
}

/// Knapsack player that repeats the actions of a recorded transcript.
#[derive(Debug, Clone)]
pub struct ReplayKnapsack {
    name: String,
    actions: HashMap<usize, Action>,
    diverged: Option<usize>,
}

impl ReplayKnapsack {
    pub fn new(name: impl Into<String>, actions: impl IntoIterator<Item = (usize, Action)>) -> Self {
        ReplayKnapsack {
            name: name.into(),
            actions: actions.into_iter().collect(),
            diverged: None,
        }
    }

    /// First item id that had no recorded action.
    pub fn diverged(&self) -> Option<usize> {
        self.diverged
    }
}

impl KnapsackAlgorithm for ReplayKnapsack {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn on_arrival(&mut self, item: &Item, _: &KnapsackState) -> Action {
        self.actions.get(&item.id).cloned().unwrap_or_else(|| {
            self.diverged.get_or_insert(item.id);
            Action::Reject
        })
    }

    fn snapshot(&self) -> Option<Box<dyn KnapsackAlgorithm>> {
        Some(Box::new(self.clone()))
    }
}

/// MPAS player that repeats recorded offsets, keyed by item id and size
/// (continuation items of different Yao instances share ids, never sizes).
#[derive(Debug, Clone)]
pub struct ReplayMpas {
    name: String,
    offsets: HashMap<(usize, EpsRational), EpsRational>,
    diverged: Option<usize>,
}

impl ReplayMpas {
    pub fn new(
        name: impl Into<String>,
        offsets: impl IntoIterator<Item = ((usize, EpsRational), EpsRational)>,
    ) -> Self {
        ReplayMpas {
            name: name.into(),
            offsets: offsets.into_iter().collect(),
            diverged: None,
        }
    }

    pub fn diverged(&self) -> Option<usize> {
        self.diverged
    }
}

impl MpasAlgorithm for ReplayMpas {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn place(&mut self, item: &MpasItem, _: &[IntervalAssignment]) -> EpsRational {
        self.offsets
            .get(&(item.id, item.size.clone()))
            .cloned()
            .unwrap_or_else(|| {
                self.diverged.get_or_insert(item.id);
                EpsRational::zero()
            })
    }

    fn snapshot(&self) -> Option<Box<dyn MpasAlgorithm>> {
        Some(Box::new(self.clone()))
    }
}

/// Replays `cert` from its transcript and returns the fresh certificate.
/// Estimated `thm2` runs keep no transcript and are rerun from the seed.
pub fn replay(cert: &RatioCertificate) -> Result<RatioCertificate, RunError> {
    let id = cert.algorithm.clone();
    let diverged = |at: usize| RunError::ReplayDiverged(format!("no recorded move for item {at}"));
    let fresh = match &cert.details {
        Details::Thm1(c) => {
            let mut alg = ReplayKnapsack::new(&id.name, c.transcript.iter().map(|e| (e.item, e.action.clone())));
            let fresh = certify_thm1(run_thm1(&mut alg, c.k)?, id);
            if let Some(at) = alg.diverged() {
                return Err(diverged(at));
            }
            fresh
        }
        Details::Thm2(c) => match c.mode {
            Thm2Mode::Deterministic => {
                let mut alg =
                    ReplayKnapsack::new(&id.name, c.transcript.iter().map(|e| (e.item, e.action.clone())));
                let fresh = certify_thm2(run_thm2(&mut alg, c.k)?, id);
                if let Some(at) = alg.diverged() {
                    return Err(diverged(at));
                }
                fresh
            }
            Thm2Mode::Estimated { .. } => run(&RunSpec {
                adversary: cert.adversary,
                params: cert.params.clone(),
                algorithm: id,
            })?,
        },
        Details::Thm3(c) => {
            let mut alg = mpas_replayer(&id.name, c.transcript.iter().map(|e| (e.item, &e.size, &e.offset)));
            let fresh = certify_thm3(run_thm3(&mut alg, c.n)?, id);
            if let Some(at) = alg.diverged() {
                return Err(diverged(at));
            }
            fresh
        }
        Details::Thm4(c) => {
            let mut alg = mpas_replayer(&id.name, c.transcript.iter().map(|e| (e.item, &e.size, &e.offset)));
            let fresh = certify_thm4(run_thm4(&mut alg, c.n, c.m, c.t)?, id);
            if let Some(at) = alg.diverged() {
                return Err(diverged(at));
            }
            fresh
        }
    };
    if fresh.ratio != cert.ratio {
        return Err(RunError::ReplayDiverged(format!(
            "replayed ratio {} differs from recorded {}",
            fresh.ratio, cert.ratio
        )));
    }
    Ok(fresh)
}

fn mpas_replayer<'a>(
    name: &str,
    moves: impl Iterator<Item = (usize, &'a EpsRational, &'a EpsRational)>,
) -> ReplayMpas {
    ReplayMpas::new(name, moves.map(|(id, size, offset)| ((id, size.clone()), offset.clone())))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {source}")]
pub struct InstanceError {
    pub line: usize,
    pub source: ParseError,
}

/// Parses an instance file: one size per line as `n/d` or `n/d c/e` (the
/// second term is the ε-coefficient). Blank lines and `#` comments are
/// skipped.
pub fn parse_instance(text: &str) -> Result<Vec<EpsRational>, InstanceError> {
    let mut sizes = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        sizes.push(line.parse().map_err(|source| InstanceError { line: i + 1, source })?);
    }
    Ok(sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(adversary: Adversary, params: Params, name: &str, seed: Option<u64>) -> RunSpec {
        RunSpec {
            adversary,
            params,
            algorithm: AlgorithmId { name: name.into(), seed },
        }
    }

    #[test]
    fn thm1_first_fit_keep_k2() {
        let cert = run(&spec(Adversary::Thm1, Params { k: Some(2), ..Default::default() }, "first_fit_keep", None))
            .unwrap();
        assert_eq!(cert.ratio, rat(4, 3));
        assert_eq!(cert.reference_bound, rat(4, 3));
        assert!(cert.pass);
        assert_eq!(cert.schema, SCHEMA);
        assert_eq!(recompute_ratio(&cert).unwrap(), rat(4, 3));
    }

    #[test]
    fn thm4_anchor_zero_roundtrip() {
        let params = Params { n: Some(12), m: Some(5), t: Some(3), ..Default::default() };
        let cert = run(&spec(Adversary::Thm4, params, "anchor_zero", None)).unwrap();
        assert_eq!(cert.ratio, rat(407, 62));
        assert_eq!(cert.reference_bound, rat(77, 62));
        assert!(cert.pass);
        let json = serde_json::to_string(&cert).unwrap();
        assert!(json.contains("\"schema\":\"lbforge/1\""));
        assert!(json.contains("\"ratio\":\"407/62\""));
        let back: RatioCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cert);
        assert_eq!(recompute_ratio(&back).unwrap(), rat(407, 62));
        assert_eq!(replay(&back).unwrap().ratio, cert.ratio);
    }

    #[test]
    fn replay_reproduces_seeded_games() {
        let cases = [
            spec(Adversary::Thm1, Params { k: Some(5), ..Default::default() }, "random_compliant", Some(9)),
            spec(Adversary::Thm2, Params { k: Some(3), ..Default::default() }, "random_compliant", Some(4)),
            spec(Adversary::Thm2, Params { k: Some(4), trials: Some(20), ..Default::default() }, "random_compliant", Some(1)),
            spec(Adversary::Thm3, Params { n: Some(3), ..Default::default() }, "random_offset", Some(7)),
        ];
        for s in &cases {
            let cert = run(s).unwrap();
            let again = replay(&cert).unwrap();
            assert_eq!(again, cert, "{s:?}");
        }
    }

    #[test]
    fn tampering_is_detected() {
        let mut cert =
            run(&spec(Adversary::Thm3, Params { n: Some(2), ..Default::default() }, "anchor_zero", None)).unwrap();
        cert.measured = int(23);
        assert!(matches!(recompute_ratio(&cert), Err(RunError::Inconsistent(_))));

        let mut cert =
            run(&spec(Adversary::Thm1, Params { k: Some(3), ..Default::default() }, "first_fit_keep", None)).unwrap();
        if let Details::Thm1(c) = &mut cert.details {
            c.transcript.pop();
        }
        assert!(matches!(replay(&cert), Err(RunError::ReplayDiverged(_))));
    }

    #[test]
    fn request_errors() {
        let e = run(&spec(Adversary::Thm1, Params::default(), "first_fit_keep", None)).unwrap_err();
        assert!(e.is_invalid_request());
        let e = run(&spec(Adversary::Thm3, Params { n: Some(1), ..Default::default() }, "first_fit_keep", None))
            .unwrap_err();
        assert!(e.is_invalid_request());
        let params = Params { n: Some(12), m: Some(1), t: Some(3), ..Default::default() };
        let e = run(&spec(Adversary::Thm4, params, "anchor_zero", None)).unwrap_err();
        assert!(e.is_invalid_request());
        assert_eq!("thm2".parse::<Adversary>().unwrap(), Adversary::Thm2);
        assert!("thm5".parse::<Adversary>().is_err());
    }

    #[test]
    fn instance_files() {
        let text = "# sizes\n2/5\n3/5 -1/2  # with eps\n\n1\n";
        let sizes = parse_instance(text).unwrap();
        assert_eq!(
            sizes,
            vec![
                EpsRational::real(rat(2, 5)),
                EpsRational::from_parts(3, 5, -1, 2),
                EpsRational::one()
            ]
        );
        let err = parse_instance("1/2\nfoo\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(parse_instance("1/2 1 1").is_err());
    }
}
