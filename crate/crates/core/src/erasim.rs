//! Link erasures: failure patterns, static codes that survive a set of
//! patterns, and the time-average min-cut under a failure distribution.
//!
//! A failed link can be modelled two ways: delete the edge, or keep it and
//! set its gain to zero. [`apply_failure`] produces both; they yield the
//! same system matrix.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codecon::{random_coding_bound, verify, CodeError, CodeVerdict, CodingStats};
use crate::galois::Gf;
use crate::mincut::{mincut, Method, MincutError, MincutOptions, AUTO_ENUMERATION_LIMIT};
use crate::netmodel::{CodeAssignment, ConnectionClass, ConnectionSet, Edge, ModelError, Network, NodeId};
use crate::par::{self, Exec};
use crate::rng::Seed;

pub const DEFAULT_PATTERN_CAP: usize = 1 << 16;
const PROBABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ErasureError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Mincut(#[from] MincutError),
    #[error("invalid failure model: {0}")]
    InvalidModel(String),
    #[error("{count} failure patterns exceed the exact-mode cap of {cap}; use monte-carlo")]
    TooManyPatterns { count: u128, cap: usize },
    #[error("static solutions need a unicast or single-multicast connection set, got {0}")]
    UnsupportedClass(ConnectionClass),
    #[error("pattern {index} {edges} is infeasible: mincut({sender} -> {receiver}) = {mincut} < {required}")]
    InfeasiblePattern { index: usize, edges: String, sender: String, receiver: String, mincut: usize, required: usize },
    #[error("no assignment valid under every pattern in {} trials", stats.trials)]
    TrialsExhausted { stats: CodingStats },
}

/// A failure pattern and its probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedPattern {
    pub pattern: Vec<Edge>,
    pub p: f64,
}

/// Serialized as `[{"pattern": [[1, 3]], "p": 0.5}, ...]` or `{"iid": p}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FailureModel {
    /// Every edge fails independently with probability `iid`.
    Iid {
        iid: f64,
    },
    Explicit(Vec<WeightedPattern>),
}

fn describe(pattern: &[Edge]) -> String {
    let parts: Vec<String> = pattern.iter().map(|e| format!("[{},{}]", e.from.number(), e.to.number())).collect();
    format!("{{{}}}", parts.join(", "))
}

impl FailureModel {
    pub fn remap(&self, f: impl Fn(Edge) -> Edge) -> FailureModel {
        match self {
            FailureModel::Iid { iid } => FailureModel::Iid { iid: *iid },
            FailureModel::Explicit(list) => FailureModel::Explicit(
                list.iter().map(|w| WeightedPattern { pattern: w.pattern.iter().map(|&e| f(e)).collect(), p: w.p }).collect(),
            ),
        }
    }

    pub fn check(&self, net: &Network) -> Result<(), ErasureError> {
        let bad = |m: String| Err(ErasureError::InvalidModel(m));
        match self {
            FailureModel::Iid { iid } => {
                if !(0.0..=1.0).contains(iid) {
                    return bad(format!("per-edge probability {iid} is outside [0, 1]"));
                }
            }
            FailureModel::Explicit(list) => {
                let mut total = 0.0;
                for w in list {
                    if w.p.is_nan() || w.p < 0.0 {
                        return bad(format!("negative probability {} for {}", w.p, describe(&w.pattern)));
                    }
                    for e in &w.pattern {
                        if !net.has_edge(*e) {
                            return Err(ModelError::UnknownEdge(*e).into());
                        }
                    }
                    total += w.p;
                }
                if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
                    return bad(format!("probabilities sum to {total}, not 1"));
                }
            }
        }
        Ok(())
    }

    /// Patterns with positive probability, each edge list sorted.
    pub fn patterns(&self, net: &Network, cap: usize) -> Result<Vec<(Vec<Edge>, f64)>, ErasureError> {
        self.check(net)?;
        let mut edges: Vec<Edge> = net.edges().to_vec();
        edges.sort();
        edges.dedup();
        let out: Vec<(Vec<Edge>, f64)> = match self {
            FailureModel::Iid { iid } if *iid == 0.0 => vec![(Vec::new(), 1.0)],
            FailureModel::Iid { iid } if *iid == 1.0 => vec![(edges, 1.0)],
            FailureModel::Iid { iid } => {
                let n = edges.len();
                let count = 1u128 << n.min(127);
                if n >= 127 || count > cap as u128 {
                    return Err(ErasureError::TooManyPatterns { count, cap });
                }
                (0..1usize << n)
                    .map(|mask| {
                        let failed: Vec<Edge> = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| edges[k]).collect();
                        let k = failed.len() as i32;
                        (failed, iid.powi(k) * (1.0 - iid).powi(n as i32 - k))
                    })
                    .collect()
            }
            FailureModel::Explicit(list) => {
                let positive: Vec<_> = list
                    .iter()
                    .filter(|w| w.p > 0.0)
                    .map(|w| {
                        let mut p = w.pattern.clone();
                        p.sort();
                        p.dedup();
                        (p, w.p)
                    })
                    .collect();
                if positive.len() > cap {
                    return Err(ErasureError::TooManyPatterns { count: positive.len() as u128, cap });
                }
                positive
            }
        };
        Ok(out)
    }

    /// One pattern drawn from the model, edge list sorted.
    pub fn sample<R: Rng + ?Sized>(&self, net: &Network, rng: &mut R) -> Vec<Edge> {
        match self {
            FailureModel::Iid { iid } => {
                let mut edges: Vec<Edge> = net.edges().to_vec();
                edges.sort();
                edges.dedup();
                edges.into_iter().filter(|_| rng.gen::<f64>() < *iid).collect()
            }
            FailureModel::Explicit(list) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut chosen = None;
                for w in list.iter().filter(|w| w.p > 0.0) {
                    acc += w.p;
                    chosen = Some(w);
                    if u < acc {
                        break;
                    }
                }
                let mut p = chosen.map(|w| w.pattern.clone()).unwrap_or_default();
                p.sort();
                p.dedup();
                p
            }
        }
    }
}

/// The edge-deleted network and, for the original network, the code with
/// the failed links' gains set to zero.
pub fn apply_failure(net: &Network, code: &CodeAssignment, failed: &[Edge]) -> Result<(Network, CodeAssignment), ModelError> {
    let reduced = net.without_edges(failed)?;
    let mut zeroed = code.clone();
    for e in failed {
        zeroed.link_gains.insert(*e, Gf::ZERO);
    }
    Ok((reduced, zeroed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    MonteCarlo,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(Mode::Exact),
            "mc" | "monte-carlo" => Ok(Mode::MonteCarlo),
            _ => Err(format!("unknown mode `{s}` (expected exact or monte-carlo)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::MonteCarlo => "monte-carlo",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AverageMincut {
    pub source: String,
    pub destination: String,
    pub mode: Mode,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub samples: usize,
    /// Distinct patterns whose min-cut was evaluated.
    pub patterns: usize,
    /// How the per-pattern min-cuts were computed. With `algebraic` each
    /// value is itself a high-probability lower bound.
    pub per_pattern: Method,
}

fn pattern_label(pattern: &[Edge]) -> u64 {
    pattern.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, e| {
        let h = (h ^ e.from.0 as u64).wrapping_mul(0x100_0000_01b3);
        (h ^ e.to.0 as u64).wrapping_mul(0x100_0000_01b3)
    })
}

fn per_pattern_method(net: &Network, options: &MincutOptions) -> Method {
    match options.method {
        Method::Auto if net.nodes().len() <= AUTO_ENUMERATION_LIMIT => Method::Enumeration,
        Method::Auto => Method::Algebraic,
        m => m,
    }
}

fn pattern_mincuts(
    net: &Network,
    s: NodeId,
    t: NodeId,
    patterns: &[Vec<Edge>],
    options: &MincutOptions,
) -> Result<Vec<usize>, ErasureError> {
    let values = par::map(options.exec, patterns.len(), |k| {
        let reduced = net.without_edges(&patterns[k])?;
        let opts =
            MincutOptions { seed: options.seed.derive(pattern_label(&patterns[k])), exec: Exec::Sequential, ..options.clone() };
        Ok::<_, ErasureError>(mincut(&reduced, s, t, &opts)?.value)
    });
    values.into_iter().collect()
}

/// `Σ_f p_f mincut(G_f)`, exactly or as a Monte Carlo mean. Sample `i`
/// draws its pattern from stream `i`; repeated patterns are evaluated once.
#[allow(clippy::too_many_arguments)]
pub fn time_average_mincut(
    net: &Network,
    s: NodeId,
    t: NodeId,
    model: &FailureModel,
    mode: Mode,
    samples: usize,
    seed: Seed,
    options: &MincutOptions,
) -> Result<AverageMincut, ErasureError> {
    let per_pattern = per_pattern_method(net, options);
    let report = |value, std_error, samples, patterns| AverageMincut {
        source: net.node(s).name.clone(),
        destination: net.node(t).name.clone(),
        mode,
        value,
        std_error,
        samples,
        patterns,
        per_pattern,
    };
    match mode {
        Mode::Exact => {
            let weighted = model.patterns(net, DEFAULT_PATTERN_CAP)?;
            let patterns: Vec<Vec<Edge>> = weighted.iter().map(|(p, _)| p.clone()).collect();
            let values = pattern_mincuts(net, s, t, &patterns, options)?;
            let value = weighted.iter().zip(&values).map(|((_, p), &v)| p * v as f64).sum();
            Ok(report(value, None, 0, patterns.len()))
        }
        Mode::MonteCarlo => {
            model.check(net)?;
            if samples == 0 {
                return Err(ErasureError::InvalidModel("monte-carlo needs at least one sample".into()));
            }
            let drawn = par::map(options.exec, samples, |i| model.sample(net, &mut seed.stream(i as u64)));
            let mut distinct: BTreeMap<Vec<Edge>, usize> = BTreeMap::new();
            for p in &drawn {
                let next = distinct.len();
                distinct.entry(p.clone()).or_insert(next);
            }
            let mut unique = vec![Vec::new(); distinct.len()];
            for (p, &k) in &distinct {
                unique[k] = p.clone();
            }
            let values = pattern_mincuts(net, s, t, &unique, options)?;
            let xs: Vec<f64> = drawn.iter().map(|p| values[distinct[p]] as f64).collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            Ok(report(mean, Some((var / n).sqrt()), samples, unique.len()))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReceiverMargin {
    pub receiver: String,
    pub average_mincut: f64,
    pub required: usize,
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeVaryingVerdict {
    pub feasible: bool,
    pub mode: Mode,
    pub receivers: Vec<ReceiverMargin>,
}

fn multicast_source(set: &ConnectionSet) -> Result<NodeId, ErasureError> {
    if !matches!(set.class, ConnectionClass::Unicast | ConnectionClass::SingleMulticast) {
        return Err(ErasureError::UnsupportedClass(set.class));
    }
    match set.senders().as_slice() {
        [s] => Ok(*s),
        _ => Err(ErasureError::UnsupportedClass(set.class)),
    }
}

/// Multicast over a time-varying network is feasible exactly when every
/// receiver's average min-cut covers the source rate.
pub fn feasibility_time_varying(
    net: &Network,
    set: &ConnectionSet,
    model: &FailureModel,
    mode: Mode,
    samples: usize,
    seed: Seed,
    options: &MincutOptions,
) -> Result<TimeVaryingVerdict, ErasureError> {
    let s = multicast_source(set)?;
    let mut receivers = Vec::new();
    for (k, t) in set.receivers().into_iter().enumerate() {
        let required = set.demanded_rows(net, t).len();
        let avg = time_average_mincut(net, s, t, model, mode, samples, seed.derive(k as u64), options)?;
        receivers.push(ReceiverMargin {
            receiver: net.node(t).name.clone(),
            average_mincut: avg.value,
            required,
            margin: avg.value - required as f64,
            std_error: avg.std_error,
        });
    }
    // Monte Carlo margins are judged within three standard errors.
    let feasible = receivers.iter().all(|r| r.margin >= -1e-9 - 3.0 * r.std_error.unwrap_or(0.0));
    Ok(TimeVaryingVerdict { feasible, mode, receivers })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatternVerdict {
    pub pattern: Vec<Edge>,
    pub verdict: CodeVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StaticSolution {
    pub assignment: CodeAssignment,
    pub verdicts: Vec<PatternVerdict>,
    /// Bound `(1 - N|F|/q)^η` in `stats.bound`.
    pub stats: CodingStats,
}

/// Verdicts of `code` under every pattern, using zeroed link gains.
pub fn verify_under_patterns(
    net: &Network,
    code: &CodeAssignment,
    set: &ConnectionSet,
    patterns: &[Vec<Edge>],
) -> Result<Vec<PatternVerdict>, ErasureError> {
    patterns
        .iter()
        .map(|p| {
            let (_, zeroed) = apply_failure(net, code, p)?;
            Ok(PatternVerdict { pattern: p.clone(), verdict: verify(net, &zeroed, Some(set))? })
        })
        .collect()
}

/// One assignment that decodes under every pattern in `patterns`. Each
/// pattern is first checked to be individually solvable; draw `k` uses
/// stream `k`.
pub fn static_solution(
    net: &Network,
    set: &ConnectionSet,
    patterns: &[Vec<Edge>],
    trials: usize,
    seed: Seed,
    exec: Exec,
) -> Result<StaticSolution, ErasureError> {
    let s = multicast_source(set)?;
    for (index, p) in patterns.iter().enumerate() {
        let reduced = net.without_edges(p)?;
        for t in set.receivers() {
            let required = set.demanded_rows(net, t).len();
            let options = MincutOptions { seed: seed.derive(index as u64), exec, ..MincutOptions::default() };
            let value = mincut(&reduced, s, t, &options)?.value;
            if value < required {
                return Err(ErasureError::InfeasiblePattern {
                    index: index + 1,
                    edges: describe(p),
                    sender: net.node(s).name.clone(),
                    receiver: net.node(t).name.clone(),
                    mincut: value,
                    required,
                });
            }
        }
    }
    let draws = par::map(exec, trials, |k| {
        let code = CodeAssignment::random(net, &mut seed.stream(k as u64));
        let verdicts = verify_under_patterns(net, &code, set, patterns)?;
        let ok = verdicts.iter().all(|v| v.verdict.feasible);
        Ok::<_, ErasureError>((code, verdicts, ok))
    });
    let draws = draws.into_iter().collect::<Result<Vec<_>, _>>()?;
    let successes = draws.iter().filter(|d| d.2).count();
    let first = draws.iter().position(|d| d.2);
    let q = net.field().order();
    let receivers = set.receivers().len();
    let eta = net.edges().len();
    let stats = CodingStats {
        trials,
        successes,
        first_success: first,
        empirical_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        bound: random_coding_bound(q, receivers * patterns.len().max(1), eta),
        receivers,
        eta,
        q,
    };
    match first {
        Some(k) => {
            let (assignment, verdicts, _) = draws.into_iter().nth(k).expect("index in range");
            Ok(StaticSolution { assignment, verdicts, stats })
        }
        None => Err(ErasureError::TrialsExhausted { stats }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codecon::{multicast, system_matrix};
    use crate::galois::GaloisField;

    fn parallel_edges() -> Network {
        let mut b = Network::builder(GaloisField::of_order(256).unwrap());
        let s = b.node("S", 0, 2).unwrap();
        let t = b.node("T", 2, 0).unwrap();
        b.link(s, 0, t, 0).unwrap().link(s, 1, t, 1).unwrap();
        b.source(s, 1).unwrap().destination(t, 1).unwrap();
        b.build()
    }

    fn diamond() -> Network {
        let mut b = Network::builder(GaloisField::of_order(256).unwrap());
        let s = b.node("S", 0, 2).unwrap();
        let a = b.node("A", 1, 1).unwrap();
        let c = b.node("B", 1, 1).unwrap();
        let t = b.node("T", 2, 0).unwrap();
        b.link(s, 0, a, 0).unwrap().link(s, 1, c, 0).unwrap().link(a, 0, t, 0).unwrap().link(c, 0, t, 1).unwrap();
        b.source(s, 1).unwrap().destination(t, 1).unwrap();
        b.build()
    }

    #[test]
    fn single_edge_bernoulli() {
        let mut b = Network::builder(GaloisField::of_order(2).unwrap());
        let s = b.node("S", 0, 1).unwrap();
        let t = b.node("T", 1, 0).unwrap();
        b.link(s, 0, t, 0).unwrap();
        let net = b.build();
        let avg =
            time_average_mincut(&net, s, t, &FailureModel::Iid { iid: 0.3 }, Mode::Exact, 0, Seed(0), &MincutOptions::default())
                .unwrap();
        assert!((avg.value - 0.7).abs() < 1e-12);
    }

    #[test]
    fn two_parallel_edges_average_one() {
        let net = parallel_edges();
        let model = FailureModel::Iid { iid: 0.5 };
        let exact =
            time_average_mincut(&net, NodeId(0), NodeId(1), &model, Mode::Exact, 0, Seed(0), &MincutOptions::default()).unwrap();
        assert_eq!(exact.value, 1.0);
        assert_eq!(exact.patterns, 4);
        let mc =
            time_average_mincut(&net, NodeId(0), NodeId(1), &model, Mode::MonteCarlo, 10_000, Seed(4), &MincutOptions::default())
                .unwrap();
        assert!((mc.value - 1.0).abs() <= 3.0 * mc.std_error.unwrap());
    }

    #[test]
    fn time_varying_margins() {
        let net = parallel_edges();
        let set = multicast(&net, NodeId(0), &[NodeId(1)]);
        let model = FailureModel::Iid { iid: 0.5 };
        let v = feasibility_time_varying(&net, &set, &model, Mode::Exact, 0, Seed(0), &MincutOptions::default()).unwrap();
        assert!(v.feasible);
        assert_eq!(v.receivers[0].margin, 0.0);
    }

    #[test]
    fn deletion_and_zeroing_agree() {
        let net = diamond();
        let code = CodeAssignment::random(&net, &mut Seed(8).rng());
        for failed in [vec![], vec![net.edges()[0]], net.edges().to_vec()] {
            let (reduced, zeroed) = apply_failure(&net, &code, &failed).unwrap();
            let a = system_matrix(&reduced, &code).unwrap().matrix;
            let b = system_matrix(&net, &zeroed).unwrap().matrix;
            assert_eq!(a, b);
            if failed.len() == net.edges().len() {
                assert!(a.is_zero(net.field()));
            }
        }
    }

    #[test]
    fn diamond_static_solution() {
        let net = diamond();
        let set = multicast(&net, NodeId(0), &[NodeId(3)]);
        let patterns = vec![vec![net.edges()[0]], vec![net.edges()[1]]];
        let sol = static_solution(&net, &set, &patterns, 64, Seed(1), Exec::default()).unwrap();
        assert!(sol.verdicts.iter().all(|v| v.verdict.feasible));
        let again = verify_under_patterns(&net, &sol.assignment, &set, &patterns).unwrap();
        assert!(again.iter().all(|v| v.verdict.feasible));
        // killing both paths at once is not survivable
        let both = vec![vec![net.edges()[0], net.edges()[1]]];
        assert!(matches!(
            static_solution(&net, &set, &both, 4, Seed(1), Exec::Sequential),
            Err(ErasureError::InfeasiblePattern { .. })
        ));
    }

    #[test]
    fn model_serialization() {
        let m: FailureModel = serde_json::from_str(r#"{"iid": 0.25}"#).unwrap();
        assert_eq!(m, FailureModel::Iid { iid: 0.25 });
        let m: FailureModel = serde_json::from_str(r#"[{"pattern": [[1, 3]], "p": 1.0}]"#).unwrap();
        assert!(matches!(m, FailureModel::Explicit(ref v) if v.len() == 1));
        let bad = FailureModel::Explicit(vec![WeightedPattern { pattern: vec![], p: 0.5 }]);
        assert!(bad.check(&diamond()).is_err());
    }
}
