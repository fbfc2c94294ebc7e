//! Simulated query access to a [`Graph`].
//!
//! A [`QueryOracle`] answers the five query types of the model (random-vertex
//! `Degree`, `Degree(v)`, `RandEdge`, `Neighbour`, `Pair`, `FullNbr`) and
//! counts every call. It never exposes `n` or `m`.
//!
//! Besides single queries it offers *bulk* variants that answer `q` queries
//! at once and return only the multiset of answers (a degree histogram). The
//! histogram is drawn from the exact multinomial distribution that `q`
//! independent single queries would induce, and the counters advance by `q`,
//! so any estimator that only uses the multiset of answers behaves
//! identically in distribution and in accounting.

use std::io::Write;

use rand::Rng as _;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::graph::{DegreeClass, Graph, GraphError, Vertex};
use crate::rng::{rng_from_seed, Rng};

/// Per-query-type call counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueryCounters {
    pub degree_random: u64,
    pub degree_of: u64,
    pub rand_edge: u64,
    pub neighbour: u64,
    pub pair: u64,
    pub full_nbr: u64,
}

impl QueryCounters {
    /// Both `Degree` flavours together.
    pub fn degree_total(&self) -> u64 {
        self.degree_random + self.degree_of
    }

    pub fn total(&self) -> u64 {
        self.degree_random
            + self.degree_of
            + self.rand_edge
            + self.neighbour
            + self.pair
            + self.full_nbr
    }

    /// Counts accumulated since `earlier`.
    pub fn since(&self, earlier: &QueryCounters) -> QueryCounters {
        QueryCounters {
            degree_random: self.degree_random - earlier.degree_random,
            degree_of: self.degree_of - earlier.degree_of,
            rand_edge: self.rand_edge - earlier.rand_edge,
            neighbour: self.neighbour - earlier.neighbour,
            pair: self.pair - earlier.pair,
            full_nbr: self.full_nbr - earlier.full_nbr,
        }
    }
}

/// Multiset of degree answers: `(degree, multiplicity)`, ascending by degree,
/// zero multiplicities omitted.
pub type DegreeHistogram = Vec<(u32, u64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    #[serde(rename = "type")]
    pub kind: String,
    pub args: Value,
    pub result: Value,
    pub counter_snapshot: QueryCounters,
}

/// Seeded query layer over a borrowed graph. Single-threaded; build one per trial.
pub struct QueryOracle<'g> {
    graph: &'g Graph,
    seed: u64,
    rng: Rng,
    counters: QueryCounters,
    endpoint_classes: Vec<DegreeClass>,
    transcript: Option<Vec<TranscriptRecord>>,
}

impl<'g> QueryOracle<'g> {
    pub fn new(graph: &'g Graph, seed: u64) -> Self {
        // A uniform endpoint of a uniform edge has degree d with probability
        // d·n_d / 2m, so the class weights are d·n_d.
        let endpoint_classes = graph
            .degree_classes()
            .iter()
            .filter(|c| c.degree > 0)
            .map(|c| DegreeClass {
                degree: c.degree,
                count: c.degree as u64 * c.count,
            })
            .collect();
        QueryOracle {
            graph,
            seed,
            rng: rng_from_seed(seed),
            counters: QueryCounters::default(),
            endpoint_classes,
            transcript: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counters(&self) -> QueryCounters {
        self.counters
    }

    /// Starts recording one transcript record per call.
    pub fn record_transcript(&mut self) {
        self.transcript.get_or_insert_with(Vec::new);
    }

    pub fn transcript(&self) -> Option<&[TranscriptRecord]> {
        self.transcript.as_deref()
    }

    /// Writes the transcript as JSON lines.
    pub fn write_transcript<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for rec in self.transcript.iter().flatten() {
            serde_json::to_writer(&mut out, rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// A fair coin from the oracle's stream for the caller's own random
    /// choices. Not a query; no counter moves.
    pub fn coin_flip(&mut self) -> bool {
        self.rng.random()
    }

    fn log(&mut self, kind: &str, args: Value, result: Value) {
        if let Some(t) = self.transcript.as_mut() {
            t.push(TranscriptRecord {
                kind: kind.to_string(),
                args,
                result,
                counter_snapshot: self.counters,
            });
        }
    }

    fn check_vertex(&self, v: Vertex) -> Result<(), GraphError> {
        if (v as usize) < self.graph.n() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                v: v as u64,
                n: self.graph.n(),
            })
        }
    }

    /// `Degree` on a uniformly random vertex; returns the vertex and its degree.
    pub fn q_degree_random(&mut self) -> Result<(Vertex, u32), GraphError> {
        if self.graph.n() == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let v = self.rng.random_range(0..self.graph.n() as Vertex);
        let d = self.graph.degree(v);
        self.counters.degree_random += 1;
        self.log("degree_random", json!([]), json!([v, d]));
        Ok((v, d))
    }

    /// `Degree(v)`.
    pub fn q_degree_of(&mut self, v: Vertex) -> Result<u32, GraphError> {
        self.check_vertex(v)?;
        let d = self.graph.degree(v);
        self.counters.degree_of += 1;
        self.log("degree_of", json!([v]), json!(d));
        Ok(d)
    }

    /// `RandEdge`: a uniform edge with a uniformly random orientation.
    pub fn q_rand_edge(&mut self) -> Result<(Vertex, Vertex), GraphError> {
        let m = self.graph.m();
        if m == 0 {
            return Err(GraphError::EmptyEdgeSet);
        }
        let (a, b) = self.graph.edges()[self.rng.random_range(0..m)];
        let (u, v) = if self.rng.random::<bool>() {
            (a, b)
        } else {
            (b, a)
        };
        self.counters.rand_edge += 1;
        self.log("rand_edge", json!([]), json!([u, v]));
        Ok((u, v))
    }

    /// `Neighbour(v, i)`: the `i`-th neighbour of `v` in ascending id order.
    pub fn q_neighbour(&mut self, v: Vertex, i: usize) -> Result<Option<Vertex>, GraphError> {
        self.check_vertex(v)?;
        let u = self.graph.neighbors(v).get(i).copied();
        self.counters.neighbour += 1;
        self.log("neighbour", json!([v, i]), json!(u));
        Ok(u)
    }

    /// `Pair(u, v)`: adjacency test.
    pub fn q_pair(&mut self, u: Vertex, v: Vertex) -> Result<bool, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let adjacent = u != v && self.graph.has_edge(u, v);
        self.counters.pair += 1;
        self.log("pair", json!([u, v]), json!(adjacent));
        Ok(adjacent)
    }

    /// `FullNbr(v)`: the whole neighbour list, ascending.
    pub fn q_full_nbr(&mut self, v: Vertex) -> Result<Vec<Vertex>, GraphError> {
        self.check_vertex(v)?;
        let list = self.graph.neighbors(v).to_vec();
        self.counters.full_nbr += 1;
        self.log("full_nbr", json!([v]), json!(list));
        Ok(list)
    }

    /// `count` random-vertex `Degree` queries, answered as a histogram.
    pub fn q_degree_random_bulk(&mut self, count: u64) -> Result<DegreeHistogram, GraphError> {
        if self.graph.n() == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let hist = multinomial(&mut self.rng, count, self.graph.degree_classes());
        self.counters.degree_random += count;
        self.log("degree_random_bulk", json!([count]), json!(hist));
        Ok(hist)
    }

    /// `count` rounds of `RandEdge` followed by `Degree` on a uniformly chosen
    /// endpoint, answered as a histogram of the endpoint degrees.
    pub fn q_edge_endpoint_degrees_bulk(
        &mut self,
        count: u64,
    ) -> Result<DegreeHistogram, GraphError> {
        if self.graph.m() == 0 {
            return Err(GraphError::EmptyEdgeSet);
        }
        let hist = multinomial(&mut self.rng, count, &self.endpoint_classes);
        self.counters.rand_edge += count;
        self.counters.degree_of += count;
        self.log("edge_endpoint_degrees_bulk", json!([count]), json!(hist));
        Ok(hist)
    }
}

/// Draws `trials` items over `classes` (weights in `count`) by sequential
/// conditional binomials.
fn multinomial(rng: &mut Rng, trials: u64, classes: &[DegreeClass]) -> DegreeHistogram {
    let mut remaining_weight: u64 = classes.iter().map(|c| c.count).sum();
    let mut remaining = trials;
    let mut out = Vec::new();
    for (i, c) in classes.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let k = if i + 1 == classes.len() || c.count == remaining_weight {
            remaining
        } else {
            let p = c.count as f64 / remaining_weight as f64;
            Binomial::new(remaining, p)
                .expect("p in [0, 1]")
                .sample(rng)
        };
        if k > 0 {
            out.push((c.degree, k));
        }
        remaining -= k;
        remaining_weight -= c.count;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, e: &[(u64, u64)]) -> Graph {
        Graph::new(n, e).unwrap()
    }

    fn star4() -> Graph {
        g(5, &[(0, 1), (0, 2), (0, 3), (0, 4)])
    }

    fn triangle() -> Graph {
        g(3, &[(0, 1), (1, 2), (0, 2)])
    }

    fn path3() -> Graph {
        g(3, &[(0, 1), (1, 2)])
    }

    #[test]
    fn degree_queries() {
        let t = triangle();
        let mut o = QueryOracle::new(&t, 1);
        for _ in 0..10 {
            assert_eq!(o.q_degree_random().unwrap().1, 2);
        }
        let single = g(1, &[]);
        assert_eq!(QueryOracle::new(&single, 5).q_degree_random(), Ok((0, 0)));

        let s = star4();
        let mut o = QueryOracle::new(&s, 2);
        assert_eq!(o.q_degree_of(0), Ok(4));
        assert_eq!(o.q_degree_of(3), Ok(1));
        assert!(matches!(
            o.q_degree_of(5),
            Err(GraphError::VertexOutOfRange { .. })
        ));
        assert_eq!(o.counters().degree_of, 2);
    }

    #[test]
    fn rand_edge_queries() {
        let e = g(2, &[(0, 1)]);
        let mut o = QueryOracle::new(&e, 3);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..64 {
            seen.insert(o.q_rand_edge().unwrap());
        }
        assert_eq!(seen, [(0, 1), (1, 0)].into_iter().collect());
        let empty = g(3, &[]);
        assert_eq!(
            QueryOracle::new(&empty, 0).q_rand_edge(),
            Err(GraphError::EmptyEdgeSet)
        );
    }

    #[test]
    fn neighbour_pair_fullnbr() {
        let p = path3();
        let mut o = QueryOracle::new(&p, 0);
        assert_eq!(o.q_neighbour(1, 0), Ok(Some(0)));
        assert_eq!(o.q_neighbour(1, 1), Ok(Some(2)));
        assert_eq!(o.q_neighbour(1, 5), Ok(None));
        assert_eq!(o.q_pair(0, 2), Ok(false));
        assert_eq!(o.q_pair(1, 1), Ok(false));
        let t = triangle();
        assert_eq!(QueryOracle::new(&t, 0).q_pair(0, 2), Ok(true));

        let s = star4();
        let mut o = QueryOracle::new(&s, 0);
        assert_eq!(o.q_full_nbr(0), Ok(vec![1, 2, 3, 4]));
        assert_eq!(o.q_full_nbr(2), Ok(vec![0]));
        let iso = g(2, &[]);
        let mut o2 = QueryOracle::new(&iso, 0);
        assert_eq!(o2.q_full_nbr(1), Ok(vec![]));
        assert_eq!(o2.q_neighbour(0, 0), Ok(None));
        assert!(o2.q_pair(0, 9).is_err());
    }

    #[test]
    fn counters_track_calls_exactly() {
        let s = star4();
        let mut o = QueryOracle::new(&s, 11);
        o.q_degree_random().unwrap();
        o.q_degree_random().unwrap();
        o.q_degree_of(1).unwrap();
        o.q_rand_edge().unwrap();
        o.q_neighbour(0, 1).unwrap();
        o.q_pair(0, 1).unwrap();
        o.q_full_nbr(0).unwrap();
        o.q_full_nbr(1).unwrap();
        o.q_degree_random_bulk(100).unwrap();
        o.q_edge_endpoint_degrees_bulk(7).unwrap();
        assert_eq!(
            o.counters(),
            QueryCounters {
                degree_random: 102,
                degree_of: 8,
                rand_edge: 8,
                neighbour: 1,
                pair: 1,
                full_nbr: 2
            }
        );
    }

    #[test]
    fn bulk_histograms_sum_to_count() {
        let s = star4();
        let mut o = QueryOracle::new(&s, 4);
        let h = o.q_degree_random_bulk(10_000).unwrap();
        assert_eq!(h.iter().map(|&(_, c)| c).sum::<u64>(), 10_000);
        assert!(h.iter().all(|&(d, _)| d == 1 || d == 4));
        // Endpoints: half land on the centre (degree 4), half on leaves.
        let e = o.q_edge_endpoint_degrees_bulk(10_000).unwrap();
        assert_eq!(e.iter().map(|&(_, c)| c).sum::<u64>(), 10_000);
        let centre = e.iter().find(|&&(d, _)| d == 4).map_or(0, |&(_, c)| c);
        assert!((centre as f64 - 5000.0).abs() < 4.0 * 50.0);
        assert_eq!(
            QueryOracle::new(&s, 0).q_degree_random_bulk(0).unwrap(),
            vec![]
        );
    }

    #[test]
    fn transcript_records_every_call() {
        let p = path3();
        let mut o = QueryOracle::new(&p, 9);
        o.record_transcript();
        o.q_degree_of(1).unwrap();
        o.q_neighbour(1, 0).unwrap();
        let t = o.transcript().unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].kind, "degree_of");
        assert_eq!(t[0].result, json!(2));
        assert_eq!(t[1].counter_snapshot.neighbour, 1);
        let mut buf = Vec::new();
        o.write_transcript(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with(r#"{"type":"degree_of","args":[1],"result":2,"#));
    }
}
