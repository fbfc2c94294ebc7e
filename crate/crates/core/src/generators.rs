//! Synthetic instances with exact metadata.
//!
//! All generators are pure functions of their parameters and seed. Except for
//! the Erdős–Rényi and circulant baselines, vertex ids are shuffled after
//! construction so that no estimator can read structure off the labels.

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::{
    from_simple_edges, ground_truth, ground_truth_with_arboricity, norm, EdgeSet, Graph,
    GraphError, GroundTruth, Vertex, DEFAULT_EXACT_ARBORICITY_LIMIT,
};
use crate::rng::{rng_from_seed, split_seed, Rng};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    /// A regime inequality of the lower-bound construction does not hold.
    #[error("parameter regime violated: {constraint} ({detail})")]
    Regime {
        constraint: &'static str,
        detail: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    SingleK,
    DoubleK,
}

/// `k` disjoint copies of `K_s` plus a perfect matching on the other `n − ks`
/// vertices.
#[derive(Debug, Clone)]
pub struct LowerBoundInstance {
    pub n: usize,
    pub s: usize,
    pub k: usize,
    pub graph: Graph,
    pub truth: GroundTruth,
    pub case_tag: CaseTag,
}

impl LowerBoundInstance {
    /// Clique size, which the construction calls the arboricity.
    pub fn nominal_arboricity(&self) -> usize {
        self.s
    }

    /// Edge count predicted by the construction.
    pub fn expected_edges(&self) -> usize {
        self.k * self.s * (self.s - 1) / 2 + (self.n - self.k * self.s) / 2
    }
}

fn shuffled_ids(n: usize, rng: &mut Rng) -> Vec<Vertex> {
    let mut perm: Vec<Vertex> = (0..n as Vertex).collect();
    perm.shuffle(rng);
    perm
}

/// True arboricity of `k·K_s ∪ matching`: `⌈s/2⌉` from the cliques, 1 from
/// the matching.
fn clique_matching_arboricity(n: usize, s: usize, k: usize) -> u32 {
    let cliques = if k > 0 { s.div_ceil(2) } else { 0 };
    let matching = usize::from(n > k * s);
    cliques.max(matching) as u32
}

pub fn gen_clique_matching(
    n: usize,
    s: usize,
    k: usize,
    seed: u64,
) -> Result<LowerBoundInstance, GenError> {
    if s < 2 {
        return Err(GenError::Infeasible(format!(
            "clique size s must be at least 2, got {s}"
        )));
    }
    let in_cliques = k
        .checked_mul(s)
        .filter(|&v| v <= n)
        .ok_or_else(|| GenError::Infeasible(format!("k·s = {k}·{s} exceeds n = {n}")))?;
    if !(n - in_cliques).is_multiple_of(2) {
        return Err(GenError::Infeasible(format!(
            "n − k·s = {} is odd, no perfect matching on the remainder",
            n - in_cliques
        )));
    }
    let mut edges = Vec::with_capacity(k * s * (s - 1) / 2 + (n - in_cliques) / 2);
    for c in 0..k {
        let base = (c * s) as Vertex;
        for a in 0..s as Vertex {
            for b in a + 1..s as Vertex {
                edges.push((base + a, base + b));
            }
        }
    }
    for v in (in_cliques..n).step_by(2) {
        edges.push((v as Vertex, v as Vertex + 1));
    }
    let mut rng = rng_from_seed(seed);
    let graph = from_simple_edges(n, edges).relabel(&shuffled_ids(n, &mut rng));
    let truth = ground_truth_with_arboricity(&graph, clique_matching_arboricity(n, s, k))?;
    Ok(LowerBoundInstance {
        n,
        s,
        k,
        graph,
        truth,
        case_tag: CaseTag::SingleK,
    })
}

/// The `k`-clique and `2k`-clique instances of the lower-bound construction.
#[derive(Debug, Clone)]
pub struct LowerBoundPair {
    pub single: LowerBoundInstance,
    pub double: LowerBoundInstance,
    /// Parameter changes made to reach an integral, parity-feasible instance.
    pub adjustments: Vec<String>,
}

impl LowerBoundPair {
    /// `d(double) / d(single)`, exact.
    pub fn degree_ratio(&self) -> Ratio<u64> {
        self.double.truth.avg_degree / self.single.truth.avg_degree
    }
}

fn regime(constraint: &'static str, detail: String) -> GenError {
    GenError::Regime { constraint, detail }
}

/// Builds the pair with `k = n·d/α²` and `2k` cliques of size `α`.
pub fn gen_lb_pair(
    n: usize,
    d: Ratio<u64>,
    alpha: usize,
    seed: u64,
) -> Result<LowerBoundPair, GenError> {
    let a = alpha as u128;
    let (dn, dd) = (*d.numer() as u128, *d.denom() as u128);
    if dn < 4 * dd {
        return Err(regime("d ≥ 4", format!("d = {d}")));
    }
    if 4 * dn > a * dd {
        return Err(regime("d ≤ α/4", format!("d = {d}, α = {alpha}")));
    }
    // k = round(n·d / α²)
    let num = n as u128 * dn;
    let den = dd * a * a;
    let mut k = ((2 * num + den) / (2 * den)) as usize;
    let mut n = n;
    let mut adjustments = Vec::new();
    if k < 1 {
        return Err(regime(
            "k ≥ 1",
            format!("n·d/α² = {}/{} rounds to 0", num, den),
        ));
    }
    if (k * alpha) % 2 == 1 {
        k += 1;
        adjustments.push(format!("k raised to {k} so that k·α is even"));
    }
    if n % 2 == 1 {
        n -= 1;
        adjustments.push(format!(
            "n lowered to {n} so that the matching remainders are even"
        ));
    }
    if 8 * k > n {
        return Err(regime("k ≤ n/8", format!("k = {k}, n = {n}")));
    }
    if 2 * k * alpha > n {
        return Err(regime(
            "2k·α ≤ n",
            format!("2k·α = {}, n = {n}", 2 * k * alpha),
        ));
    }
    let single = gen_clique_matching(n, alpha, k, split_seed(seed, 0))?;
    let mut double = gen_clique_matching(n, alpha, 2 * k, split_seed(seed, 1))?;
    double.case_tag = CaseTag::DoubleK;
    let pair = LowerBoundPair {
        single,
        double,
        adjustments,
    };
    if pair.degree_ratio() < Ratio::new(3, 2) {
        return Err(regime(
            "d(2k)/d(k) ≥ 3/2",
            format!("ratio = {}", pair.degree_ratio()),
        ));
    }
    Ok(pair)
}

/// Union of `alpha` random spanning forests; arboricity at most `alpha`.
#[derive(Debug, Clone)]
pub struct ForestUnion {
    pub graph: Graph,
    pub alpha_bound: u32,
}

const RESAMPLE_ATTEMPTS: usize = 32;

/// Each forest is a random recursive tree over a fresh random vertex order:
/// the `j`-th vertex attaches to a uniform earlier one. A parent choice that
/// repeats an existing edge is resampled; after a fixed number of failures
/// the vertex stays unattached in that forest.
pub fn gen_forest_union(n: usize, alpha: u32, seed: u64) -> Result<ForestUnion, GenError> {
    if alpha < 1 {
        return Err(GenError::Infeasible("alpha must be at least 1".into()));
    }
    if n < 2 {
        return Err(GenError::Infeasible(format!(
            "forest union needs n ≥ 2, got {n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut seen = EdgeSet::with_capacity(alpha as usize * n);
    let mut edges = Vec::with_capacity(alpha as usize * n);
    for _ in 0..alpha {
        let order = shuffled_ids(n, &mut rng);
        for j in 1..n {
            let v = order[j];
            for _ in 0..RESAMPLE_ATTEMPTS {
                let parent = order[rng.random_range(0..j)];
                if seen.insert(norm(v, parent)) {
                    edges.push((v, parent));
                    break;
                }
            }
        }
    }
    Ok(ForestUnion {
        graph: from_simple_edges(n, edges),
        alpha_bound: alpha,
    })
}

/// A forest union on `core` vertices placed at random ids among `n`, the rest
/// isolated. Fixes the average degree near `2·alpha·core/n` independently of
/// the arboricity.
pub fn gen_forest_union_padded(
    n: usize,
    core: usize,
    alpha: u32,
    seed: u64,
) -> Result<ForestUnion, GenError> {
    if core > n {
        return Err(GenError::Infeasible(format!("core {core} exceeds n = {n}")));
    }
    let inner = gen_forest_union(core, alpha, split_seed(seed, 0))?;
    let mut rng = rng_from_seed(split_seed(seed, 1));
    let ids = shuffled_ids(n, &mut rng);
    let edges = inner
        .graph
        .edges()
        .iter()
        .map(|&(u, v)| (ids[u as usize], ids[v as usize]))
        .collect();
    Ok(ForestUnion {
        graph: from_simple_edges(n, edges),
        alpha_bound: alpha,
    })
}

/// Erdős–Rényi `G(n, p)` by geometric skipping over the `n(n−1)/2` pairs.
pub fn gen_er(n: usize, p: f64, seed: u64) -> Result<Graph, GenError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::Infeasible(format!(
            "p must lie in [0, 1], got {p}"
        )));
    }
    let mut edges = Vec::new();
    if p == 1.0 {
        for u in 0..n as Vertex {
            for v in u + 1..n as Vertex {
                edges.push((u, v));
            }
        }
    } else if p > 0.0 {
        let mut rng = rng_from_seed(seed);
        let log_q = (1.0 - p).ln();
        let (mut v, mut w) = (1usize, -1i64);
        while v < n {
            let r: f64 = rng.random();
            w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
            while w >= v as i64 && v < n {
                w -= v as i64;
                v += 1;
            }
            if v < n {
                edges.push((w as Vertex, v as Vertex));
            }
        }
    }
    Ok(from_simple_edges(n, edges))
}

/// Circulant graph: `v ~ v ± o (mod n)` for each offset `o`. Regular of
/// degree `2·|offsets|` (minus one for an offset of exactly `n/2`).
pub fn gen_circulant(n: usize, offsets: &[usize]) -> Result<Graph, GenError> {
    let mut seen = EdgeSet::new();
    let mut edges = Vec::new();
    for &o in offsets {
        if o == 0 || o >= n {
            return Err(GenError::Infeasible(format!(
                "circulant offset {o} must lie in 1..{n}"
            )));
        }
        for v in 0..n {
            let (a, b) = (v as Vertex, ((v + o) % n) as Vertex);
            if seen.insert(norm(a, b)) {
                edges.push((a, b));
            }
        }
    }
    Ok(from_simple_edges(n, edges))
}

pub fn gen_complete(n: usize) -> Graph {
    gen_er(n, 1.0, 0).expect("p = 1 is valid")
}

/// A rational given as an integer, a decimal or `a/b`.
pub fn parse_ratio(text: &str) -> Option<Ratio<u64>> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once('/') {
        let (a, b) = (a.trim().parse::<u64>().ok()?, b.trim().parse::<u64>().ok()?);
        return (b > 0).then(|| Ratio::new(a, b));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let scale = 10u64.checked_pow(frac.len() as u32)?;
        let int = if int.is_empty() {
            0
        } else {
            int.parse::<u64>().ok()?
        };
        let frac = if frac.is_empty() {
            0
        } else {
            frac.parse::<u64>().ok()?
        };
        return Some(Ratio::new(
            int.checked_mul(scale)?.checked_add(frac)?,
            scale,
        ));
    }
    text.parse::<u64>().ok().map(Ratio::from_integer)
}

/// A rational parameter in a JSON document: a number or a string like `"17/2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatioParam {
    Int(u64),
    Text(String),
    Float(f64),
}

impl RatioParam {
    pub fn to_ratio(&self) -> Option<Ratio<u64>> {
        match self {
            RatioParam::Int(v) => Some(Ratio::from_integer(*v)),
            RatioParam::Text(s) => parse_ratio(s),
            RatioParam::Float(f) => parse_ratio(&format!("{f}")),
        }
    }
}

/// A generator invocation, as written in experiment files and on the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    CliqueMatching {
        n: usize,
        s: usize,
        k: usize,
    },
    LbPair {
        n: usize,
        d: RatioParam,
        alpha: usize,
    },
    /// With `core` set, only `core` random vertices carry edges.
    ForestUnion {
        n: usize,
        alpha: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        core: Option<usize>,
    },
    Er {
        n: usize,
        p: f64,
    },
    Cycle {
        n: usize,
    },
    Complete {
        n: usize,
    },
    Circulant {
        n: usize,
        offsets: Vec<usize>,
    },
}

/// Metadata written next to a generated edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub family: String,
    pub params: Value,
    pub seed: u64,
    pub truth: GroundTruth,
    /// Arboricity the construction is named after, when it differs in kind
    /// from the true one (clique size for the lower-bound family).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominal_arboricity: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case_tag: Option<CaseTag>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub adjustments: Vec<String>,
}

/// One generated graph with its sidecar. `label` distinguishes the members
/// of a pair (`"k"` and `"2k"`); it is empty for single instances.
#[derive(Debug, Clone)]
pub struct Generated {
    pub label: String,
    pub graph: Graph,
    pub sidecar: Sidecar,
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::CliqueMatching { .. } => "clique_matching",
            FamilySpec::LbPair { .. } => "lb_pair",
            FamilySpec::ForestUnion { .. } => "forest_union",
            FamilySpec::Er { .. } => "er",
            FamilySpec::Cycle { .. } => "cycle",
            FamilySpec::Complete { .. } => "complete",
            FamilySpec::Circulant { .. } => "circulant",
        }
    }

    fn params(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("serializable");
        v.as_object_mut().map(|o| o.remove("family"));
        v
    }

    pub fn generate(&self, seed: u64) -> Result<Vec<Generated>, GenError> {
        let sidecar = |truth: GroundTruth| Sidecar {
            family: self.name().to_string(),
            params: self.params(),
            seed,
            truth,
            nominal_arboricity: None,
            case_tag: None,
            adjustments: Vec::new(),
        };
        let single = |graph: Graph, truth: GroundTruth| {
            Ok(vec![Generated {
                label: String::new(),
                sidecar: sidecar(truth),
                graph,
            }])
        };
        let lb = |inst: LowerBoundInstance, label: &str, adjustments: &[String]| {
            let mut sc = sidecar(inst.truth.clone());
            sc.nominal_arboricity = Some(inst.nominal_arboricity() as u64);
            sc.case_tag = Some(inst.case_tag);
            sc.adjustments = adjustments.to_vec();
            Generated {
                label: label.to_string(),
                graph: inst.graph,
                sidecar: sc,
            }
        };
        match self {
            FamilySpec::CliqueMatching { n, s, k } => {
                let inst = gen_clique_matching(*n, *s, *k, seed)?;
                Ok(vec![lb(inst, "", &[])])
            }
            FamilySpec::LbPair { n, d, alpha } => {
                let d = d
                    .to_ratio()
                    .ok_or_else(|| GenError::Infeasible(format!("unreadable d: {d:?}")))?;
                let pair = gen_lb_pair(*n, d, *alpha, seed)?;
                Ok(vec![
                    lb(pair.single, "k", &pair.adjustments),
                    lb(pair.double, "2k", &pair.adjustments),
                ])
            }
            FamilySpec::ForestUnion { n, alpha, core } => {
                let fu = match core {
                    Some(c) => gen_forest_union_padded(*n, *c, *alpha, seed)?,
                    None => gen_forest_union(*n, *alpha, seed)?,
                };
                let truth = forest_union_truth(&fu)?;
                single(fu.graph, truth)
            }
            FamilySpec::Er { n, p } => {
                let g = gen_er(*n, *p, seed)?;
                let truth = ground_truth(&g, DEFAULT_EXACT_ARBORICITY_LIMIT)?;
                single(g, truth)
            }
            FamilySpec::Cycle { n } => {
                if *n < 3 {
                    return Err(GenError::Infeasible(format!("cycle needs n ≥ 3, got {n}")));
                }
                let g = gen_circulant(*n, &[1])?;
                let truth = ground_truth_with_arboricity(&g, 2)?;
                single(g, truth)
            }
            FamilySpec::Complete { n } => {
                let g = gen_complete(*n);
                let truth =
                    ground_truth_with_arboricity(&g, n.div_ceil(2) as u32 * u32::from(*n > 1))?;
                single(g, truth)
            }
            FamilySpec::Circulant { n, offsets } => {
                let g = gen_circulant(*n, offsets)?;
                let truth = ground_truth(&g, DEFAULT_EXACT_ARBORICITY_LIMIT)?;
                single(g, truth)
            }
        }
    }
}

/// Ground truth for a forest union, tightening the generic bracket with the
/// constructive upper bound.
pub fn forest_union_truth(fu: &ForestUnion) -> Result<GroundTruth, GraphError> {
    let t = ground_truth(&fu.graph, DEFAULT_EXACT_ARBORICITY_LIMIT)?;
    if t.arboricity().is_some() {
        return Ok(t);
    }
    let upper = t.arboricity_upper.min(fu.alpha_bound);
    let lower = t.arboricity_lower.min(upper);
    if lower == upper {
        return ground_truth_with_arboricity(&fu.graph, upper);
    }
    Ok(GroundTruth {
        arboricity_lower: lower,
        arboricity_upper: upper,
        ..t
    })
}

/// Convenience used by tests and reports: parameters of a generated instance.
pub fn describe(spec: &FamilySpec, seed: u64) -> Value {
    json!({ "family": spec.name(), "params": spec.params(), "seed": seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::arboricity_exact;

    #[test]
    fn clique_matching_small() {
        let inst = gen_clique_matching(10, 4, 1, 3).unwrap();
        assert_eq!(inst.graph.m(), 9);
        assert_eq!(inst.expected_edges(), 9);
        assert_eq!(inst.truth.avg_degree, Ratio::new(9, 5));
        let exact = ground_truth(&inst.graph, 15).unwrap();
        assert_eq!(exact, inst.truth);

        let matching = gen_clique_matching(4, 2, 0, 3).unwrap();
        assert_eq!(matching.graph.m(), 2);
        assert_eq!(matching.truth.avg_degree, Ratio::from_integer(1));
        assert_eq!(matching.truth.arboricity(), Some(1));

        assert!(matches!(
            gen_clique_matching(5, 4, 1, 0),
            Err(GenError::Infeasible(_))
        ));
        assert!(matches!(
            gen_clique_matching(7, 4, 2, 0),
            Err(GenError::Infeasible(_))
        ));
        assert!(gen_clique_matching(6, 1, 1, 0).is_err());
    }

    #[test]
    fn clique_matching_has_no_isolated_vertices() {
        let inst = gen_clique_matching(40, 6, 3, 9).unwrap();
        assert!(inst.graph.degrees().all(|d| d == 1 || d == 5));
        assert_eq!(inst.truth.arboricity(), Some(3));
        assert_eq!(inst.graph.m(), inst.expected_edges());
    }

    #[test]
    fn lb_pair_reference_parameters() {
        let pair = gen_lb_pair(1 << 20, Ratio::from_integer(8), 64, 1).unwrap();
        assert_eq!(pair.single.k, 2048);
        assert_eq!(pair.double.k, 4096);
        assert!(pair.adjustments.is_empty());
        assert!(pair.degree_ratio() >= Ratio::new(3, 2));
        assert_eq!(pair.single.truth.arboricity(), Some(32));
        assert_eq!(pair.single.n, pair.double.n);
        assert_eq!(pair.double.case_tag, CaseTag::DoubleK);
    }

    #[test]
    fn lb_pair_regime_errors_name_the_constraint() {
        let err = gen_lb_pair(1 << 20, Ratio::from_integer(20), 64, 0).unwrap_err();
        assert!(
            matches!(
                err,
                GenError::Regime {
                    constraint: "d ≤ α/4",
                    ..
                }
            ),
            "{err}"
        );
        let err = gen_lb_pair(1 << 20, Ratio::from_integer(2), 64, 0).unwrap_err();
        assert!(matches!(
            err,
            GenError::Regime {
                constraint: "d ≥ 4",
                ..
            }
        ));
        let err = gen_lb_pair(500, Ratio::from_integer(4), 64, 0).unwrap_err();
        assert!(matches!(
            err,
            GenError::Regime {
                constraint: "k ≥ 1",
                ..
            }
        ));
        // k = 50·4/289 ≈ 0.7 → 1, raised to 2 for parity, so 2k·α = 68 > 50.
        let err = gen_lb_pair(50, Ratio::from_integer(4), 17, 0).unwrap_err();
        assert!(
            matches!(
                err,
                GenError::Regime {
                    constraint: "2k·α ≤ n",
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn lb_pair_parity_adjustments() {
        // k = 2001·4/289 ≈ 27.7 → 28; k·17 even. n odd → lowered by one.
        let pair = gen_lb_pair(2001, Ratio::from_integer(4), 17, 5).unwrap();
        assert_eq!(pair.single.n, 2000);
        assert_eq!(pair.adjustments.len(), 1);
        // k = 3000·4/289 ≈ 41.5 → 42 even; n even: no adjustment.
        let pair = gen_lb_pair(3000, Ratio::from_integer(4), 17, 5).unwrap();
        assert!(pair.adjustments.is_empty());
        // k = 2900·4/289 ≈ 40.1 → 40, even.  k = 2700·4/289 ≈ 37.4 → 37, odd → 38.
        let pair = gen_lb_pair(2700, Ratio::from_integer(4), 17, 5).unwrap();
        assert_eq!(pair.single.k, 38);
        assert_eq!(pair.adjustments.len(), 1);
    }

    #[test]
    fn forest_unions() {
        let tree = gen_forest_union(30, 1, 4).unwrap();
        assert_eq!(tree.graph.m(), 29);
        let small = gen_forest_union(12, 1, 2).unwrap();
        assert_eq!(arboricity_exact(&small.graph), Some(1));
        let three = gen_forest_union(12, 3, 2).unwrap();
        assert!(arboricity_exact(&three.graph).unwrap() <= 3);
        let edge = gen_forest_union(2, 1, 0).unwrap();
        assert_eq!(edge.graph.m(), 1);
        assert!(gen_forest_union(1, 1, 0).is_err());
        assert!(gen_forest_union(5, 0, 0).is_err());
    }

    #[test]
    fn padded_forest_union_isolates_the_rest() {
        let fu = gen_forest_union_padded(1000, 100, 4, 7).unwrap();
        let active = fu.graph.degrees().filter(|&d| d > 0).count();
        assert!(active <= 100);
        assert!(fu.graph.m() >= 4 * 99 - 10);
        let truth = forest_union_truth(&fu).unwrap();
        assert_eq!(truth.arboricity_upper, 4);
    }

    #[test]
    fn erdos_renyi() {
        assert_eq!(gen_er(50, 0.0, 1).unwrap().m(), 0);
        assert_eq!(gen_er(20, 1.0, 1).unwrap().m(), 190);
        let g = gen_er(10_000, 1e-3, 9).unwrap();
        let mean: f64 = 1e-3 * 10_000.0 * 9_999.0 / 2.0;
        let sd = (mean * (1.0 - 1e-3)).sqrt();
        assert!((g.m() as f64 - mean).abs() <= 4.0 * sd, "m = {}", g.m());
        assert!(gen_er(5, 1.5, 0).is_err());
    }

    #[test]
    fn circulants_are_regular() {
        let c = gen_circulant(12, &[1, 6]).unwrap();
        assert!(c.degrees().all(|d| d == 3));
        let k9 = gen_complete(9);
        assert!(k9.degrees().all(|d| d == 8));
        assert!(gen_circulant(5, &[0]).is_err());
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(parse_ratio("8"), Some(Ratio::from_integer(8)));
        assert_eq!(parse_ratio("17/2"), Some(Ratio::new(17, 2)));
        assert_eq!(parse_ratio("8.5"), Some(Ratio::new(17, 2)));
        assert_eq!(parse_ratio("1/0"), None);
        assert_eq!(parse_ratio("x"), None);
    }

    #[test]
    fn family_specs_generate_sidecars() {
        let spec: FamilySpec =
            serde_json::from_str(r#"{"family":"clique_matching","n":10,"s":4,"k":1}"#).unwrap();
        let out = spec.generate(5).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].graph.m(), 9);
        assert_eq!(out[0].sidecar.nominal_arboricity, Some(4));
        assert_eq!(out[0].sidecar.truth.arboricity(), Some(2));
        assert_eq!(out[0].sidecar.params, json!({"n": 10, "s": 4, "k": 1}));

        let spec: FamilySpec =
            serde_json::from_str(r#"{"family":"lb_pair","n":65536,"d":"8","alpha":64}"#).unwrap();
        let out = spec.generate(5).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[1].label, "2k");
        assert_eq!(out[0].graph.n(), out[1].graph.n());
    }
}
