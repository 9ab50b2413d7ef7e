//! Rooted networks with group-element edge marks, their embedding back into
//! the group, and a text serialization.
//!
//! The mark of the half-edge at `X` of the edge `{X, Y}` is `X^{-1} Y`, so
//! products of marks along a path telescope to the displacement between its
//! end points.
//!
//! Text format, one item per line:
//!
//! ```text
//! palmshift-network 1
//! model <euclidean|ax_b|torus> <dim>
//! vertices <n>
//! root <r>
//! <v> <complete 0|1> <degree> [<neighbour> <mark coord> ...]...
//! ```
//!
//! Vertex lines appear in index order; floats use 17 significant digits.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::build_graph;
use crate::group::{GroupElement, GroupModel};
use crate::rng::{ensemble, tags};
use crate::sampling::PointConfiguration;
use crate::shift::PointShiftSpec;
use crate::transport::TransportReport;
use crate::window::Window;

/// Deviation allowed in cycle products of marks.
pub const EMBEDDING_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct RootedNetwork {
    pub model: GroupModel,
    pub root: usize,
    /// `adjacency[v]` lists `(neighbour, mark of the half-edge at v)`.
    pub adjacency: Vec<Vec<(usize, GroupElement)>>,
    /// Whether the neighbourhood of each vertex is fully known.
    pub complete: Vec<bool>,
}

impl RootedNetwork {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn mark(&self, v: usize, u: usize) -> Option<&GroupElement> {
        self.adjacency[v].iter().find(|(w, _)| *w == u).map(|(_, m)| m)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Same network, rooted at `v`.
    pub fn rerooted(&self, v: usize) -> Result<Self> {
        if v >= self.len() {
            return Err(Error::NotAPoint);
        }
        let mut n = self.clone();
        n.root = v;
        Ok(n)
    }

    /// Graph distances from the root; `usize::MAX` when unreachable.
    pub fn distances(&self) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        let mut queue = VecDeque::new();
        if self.root < self.len() {
            dist[self.root] = 0;
            queue.push_back(self.root);
        }
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &self.adjacency[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.distances().iter().all(|&d| d != usize::MAX)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GraphRule {
    /// Undirected edges `{X, H(X)}` of the shift graph.
    ShiftGraph(PointShiftSpec),
    Complete,
    /// Consecutive points on the line.
    Delaunay1d,
}

/// The network on the points of a Palm configuration, rooted at the
/// identity, with half-edge marks `X^{-1} Y`.
pub fn network_from_config(config: &PointConfiguration, rule: GraphRule) -> Result<RootedNetwork> {
    let root = config.origin.ok_or(Error::MissingIdentity)?;
    let n = config.len();
    let m = config.model;
    let whole = matches!(config.window, Window::Whole);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let complete: Vec<bool> = match rule {
        GraphRule::ShiftGraph(shift) => {
            let g = build_graph(&shift, config)?;
            for v in 0..n {
                if let Some(u) = g.out_edge(v) {
                    if u != v {
                        edges.push((v.min(u), v.max(u)));
                    }
                }
            }
            (0..n).map(|v| g.is_certain(v)).collect()
        }
        GraphRule::Complete => {
            for v in 0..n {
                for u in v + 1..n {
                    edges.push((v, u));
                }
            }
            vec![whole; n]
        }
        GraphRule::Delaunay1d => {
            if m != (GroupModel::Euclidean { dim: 1 }) {
                return Err(Error::InvalidParameter("delaunay_1d needs the Euclidean line".into()));
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| config.points[i].a().total_cmp(&config.points[j].a()));
            let mut complete = vec![whole; n];
            for (k, w) in order.windows(2).enumerate() {
                edges.push((w[0].min(w[1]), w[0].max(w[1])));
                if k > 0 {
                    complete[w[0]] = true;
                }
            }
            complete
        }
    };
    edges.sort_unstable();
    edges.dedup();
    let mut adjacency: Vec<Vec<(usize, GroupElement)>> = vec![Vec::new(); n];
    for &(v, u) in &edges {
        let (pv, pu) = (&config.points[v], &config.points[u]);
        adjacency[v].push((u, m.relative(pv, pu)));
        adjacency[u].push((v, m.relative(pu, pv)));
    }
    let net = RootedNetwork {
        model: m,
        root,
        adjacency,
        complete,
    };
    if !net.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(net)
}

/// `t[G, o, v]` for every vertex: products of marks along a breadth-first
/// tree from the root, after checking that every other edge closes its
/// cycle to within [`EMBEDDING_TOLERANCE`].
pub fn embedding_map(net: &RootedNetwork) -> Result<Vec<GroupElement>> {
    let m = net.model;
    let n = net.len();
    if net.root >= n {
        return Err(Error::NotAPoint);
    }
    let mut t: Vec<Option<GroupElement>> = vec![None; n];
    t[net.root] = Some(m.identity());
    let mut queue = VecDeque::from([net.root]);
    while let Some(v) = queue.pop_front() {
        let tv = t[v].clone().unwrap();
        for (u, mark) in &net.adjacency[v] {
            if t[*u].is_none() {
                t[*u] = Some(m.mul(&tv, mark));
                queue.push_back(*u);
            }
        }
    }
    let t: Vec<GroupElement> = t.into_iter().collect::<Option<_>>().ok_or(Error::Disconnected)?;
    let mut worst: f64 = 0.0;
    for v in 0..n {
        for (u, mark) in &net.adjacency[v] {
            worst = worst.max(m.coord_deviation(&m.mul(&t[v], mark), &t[*u]));
        }
    }
    if worst.is_nan() || worst > EMBEDDING_TOLERANCE {
        return Err(Error::NotEmbeddable(worst));
    }
    Ok(t)
}

/// The configuration `{t[G, o, v]}` with vertex `v` at index `v` and the
/// root at the identity. When two vertices land on the same point the
/// network has a non-trivial automorphism and the result is `{e}`.
pub fn reconstruct(net: &RootedNetwork) -> Result<PointConfiguration> {
    let m = net.model;
    let t = embedding_map(net)?;
    let coincide = (0..t.len()).any(|i| {
        (i + 1..t.len()).any(|j| m.coord_deviation(&t[i], &t[j]) <= EMBEDDING_TOLERANCE)
    });
    if coincide {
        return Ok(PointConfiguration {
            model: m,
            window: Window::Whole,
            points: vec![m.identity()],
            origin: Some(0),
            margin: None,
        });
    }
    Ok(PointConfiguration {
        model: m,
        window: Window::Whole,
        points: t,
        origin: Some(net.root),
        margin: None,
    })
}

/// Rooted mass transport check `E Σ_v g(o, v) = E Σ_v g(v, o)` on sampled
/// networks. `g` must vanish beyond graph distance `radius`; samples with an
/// incomplete vertex within that distance of the root are censored, as are
/// samples for which the sampler returns `None`.
pub fn unimodularity_check<S, G>(sampler: S, g: G, radius: usize, n_samples: usize, seed: u64) -> Result<TransportReport>
where
    S: Fn(&mut ChaCha8Rng) -> Result<Option<RootedNetwork>> + Sync,
    G: Fn(&RootedNetwork, usize, usize) -> f64 + Sync,
{
    let rows: Vec<Result<Option<(f64, f64)>>> = ensemble(seed, tags::NETWORK, n_samples, |rng, _| {
        let Some(net) = sampler(rng)? else {
            return Ok(None);
        };
        let dist = net.distances();
        let ball: Vec<usize> = (0..net.len()).filter(|&v| dist[v] <= radius).collect();
        if ball.iter().any(|&v| !net.complete[v]) {
            return Ok(None);
        }
        let o = net.root;
        let out: Vec<f64> = ball.iter().map(|&v| g(&net, o, v)).collect();
        let inn: Vec<f64> = ball.iter().map(|&v| g(&net, v, o)).collect();
        Ok(Some((crate::stats::pairwise_sum(&out), crate::stats::pairwise_sum(&inn))))
    });
    let rows: Vec<Option<(f64, f64)>> = rows.into_iter().collect::<Result<_>>()?;
    let lhs = rows.iter().map(|r| r.map(|p| p.0)).collect();
    let rhs = rows.iter().map(|r| r.map(|p| p.1)).collect();
    Ok(TransportReport::from_sides(lhs, rhs, n_samples))
}

/// Text rendering; see the module documentation for the layout.
pub fn write_network(net: &RootedNetwork) -> String {
    let mut s = String::new();
    let dim = net.model.dim();
    writeln!(s, "palmshift-network 1").unwrap();
    writeln!(s, "model {} {}", net.model.name(), dim).unwrap();
    writeln!(s, "vertices {}", net.len()).unwrap();
    writeln!(s, "root {}", net.root).unwrap();
    for (v, adj) in net.adjacency.iter().enumerate() {
        write!(s, "{} {} {}", v, u8::from(net.complete[v]), adj.len()).unwrap();
        for (u, mark) in adj {
            write!(s, " {u}").unwrap();
            for c in mark.coords() {
                write!(s, " {c:.16e}").unwrap();
            }
        }
        s.push('\n');
    }
    s
}

pub fn parse_network(text: &str) -> Result<RootedNetwork> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut next = |what: &str| {
        lines
            .next()
            .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
            .ok_or(Error::Parse {
                line: 0,
                msg: format!("missing {what}"),
            })
    };
    let err = |line: usize, msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };
    let num = |line: usize, tok: &str| tok.parse::<usize>().map_err(|_| err(line, &format!("bad integer {tok:?}")));

    let (ln, head) = next("header")?;
    if head != ["palmshift-network", "1"] {
        return Err(err(ln, "expected `palmshift-network 1`"));
    }
    let (ln, model_line) = next("model")?;
    if model_line.len() != 3 || model_line[0] != "model" {
        return Err(err(ln, "expected `model <kind> <dim>`"));
    }
    let dim = num(ln, model_line[2])?;
    let model = match model_line[1] {
        "euclidean" => GroupModel::Euclidean { dim },
        "torus" => GroupModel::Torus { dim },
        "ax_b" if dim == 2 => GroupModel::AxB,
        other => return Err(err(ln, &format!("unknown model {other:?} of dimension {dim}"))),
    };
    let (ln, vl) = next("vertex count")?;
    if vl.len() != 2 || vl[0] != "vertices" {
        return Err(err(ln, "expected `vertices <n>`"));
    }
    let n = num(ln, vl[1])?;
    let (ln, rl) = next("root")?;
    if rl.len() != 2 || rl[0] != "root" {
        return Err(err(ln, "expected `root <r>`"));
    }
    let root = num(ln, rl[1])?;
    if root >= n.max(1) {
        return Err(err(ln, "root out of range"));
    }
    let mut adjacency = Vec::with_capacity(n);
    let mut complete = Vec::with_capacity(n);
    for v in 0..n {
        let (ln, toks) = next("vertex line")?;
        if toks.len() < 3 || num(ln, toks[0])? != v {
            return Err(err(ln, &format!("expected the line of vertex {v}")));
        }
        complete.push(match toks[1] {
            "0" => false,
            "1" => true,
            _ => return Err(err(ln, "completeness flag must be 0 or 1")),
        });
        let deg = num(ln, toks[2])?;
        if toks.len() != 3 + deg * (1 + dim) {
            return Err(err(ln, "wrong number of fields"));
        }
        let mut adj = Vec::with_capacity(deg);
        for k in 0..deg {
            let base = 3 + k * (1 + dim);
            let u = num(ln, toks[base])?;
            if u >= n {
                return Err(err(ln, "neighbour out of range"));
            }
            let coords = toks[base + 1..base + 1 + dim]
                .iter()
                .map(|t| t.parse::<f64>().map_err(|_| err(ln, &format!("bad number {t:?}"))))
                .collect::<Result<Vec<f64>>>()?;
            let mark = GroupElement::new(&coords);
            model.validate(&mark).map_err(|e| err(ln, &e.to_string()))?;
            adj.push((u, mark));
        }
        adjacency.push(adj);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln + 1, "trailing content"));
    }
    Ok(RootedNetwork {
        model,
        root,
        adjacency,
        complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const E1: GroupModel = GroupModel::Euclidean { dim: 1 };

    fn line(xs: &[f64]) -> PointConfiguration {
        PointConfiguration::new(E1, Window::Whole, xs.iter().map(|&x| GroupElement::scalar(x)).collect()).unwrap()
    }

    #[test]
    fn marks_of_the_right_neighbor_path() {
        let c = line(&[0.0, 1.0, 3.0]);
        let net = network_from_config(&c, GraphRule::ShiftGraph(PointShiftSpec::RightNeighbor)).unwrap();
        assert_eq!(net.mark(0, 1), Some(&GroupElement::scalar(1.0)));
        assert_eq!(net.mark(1, 2), Some(&GroupElement::scalar(2.0)));
        assert_eq!(net.mark(2, 1), Some(&GroupElement::scalar(-2.0)));
        assert_eq!(net.complete, vec![true, true, false]);
        assert_eq!(reconstruct(&net).unwrap().points, c.points);
    }

    #[test]
    fn disconnected_rule_is_an_error() {
        let c = line(&[0.0, 1.0, 5.0, 6.0]);
        assert_eq!(
            network_from_config(&c, GraphRule::ShiftGraph(PointShiftSpec::NearestNeighbor)),
            Err(Error::Disconnected)
        );
    }

    #[test]
    fn delaunay_round_trip() {
        let c = line(&[0.0, 1.0, 3.0]);
        let net = network_from_config(&c, GraphRule::Delaunay1d).unwrap();
        assert_eq!(net.mark(0, 1), Some(&GroupElement::scalar(1.0)));
        assert_eq!(net.mark(1, 2), Some(&GroupElement::scalar(2.0)));
        let back = reconstruct(&net).unwrap();
        assert_eq!(back.points, c.points);
    }

    #[test]
    fn single_vertex() {
        let c = line(&[0.0]);
        let net = network_from_config(&c, GraphRule::Complete).unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(reconstruct(&net).unwrap().points, vec![GroupElement::scalar(0.0)]);
    }

    #[test]
    fn corrupted_cycle_is_not_embeddable() {
        let c = line(&[0.0, 1.0, 3.0]);
        let mut net = network_from_config(&c, GraphRule::Complete).unwrap();
        let slot = net.adjacency[1].iter_mut().find(|(u, _)| *u == 2).unwrap();
        slot.1 = GroupElement::scalar(2.5);
        assert!(matches!(reconstruct(&net), Err(Error::NotEmbeddable(_))));
    }

    #[test]
    fn symmetric_network_collapses() {
        // two vertices joined by an edge whose marks are both the identity
        let net = RootedNetwork {
            model: E1,
            root: 0,
            adjacency: vec![vec![(1, GroupElement::scalar(0.0))], vec![(0, GroupElement::scalar(0.0))]],
            complete: vec![true, true],
        };
        assert_eq!(reconstruct(&net).unwrap().points, vec![GroupElement::scalar(0.0)]);
    }

    #[test]
    fn text_round_trip() {
        let c = PointConfiguration::new(
            GroupModel::AxB,
            Window::Whole,
            vec![GroupElement::ab(1.0, 0.0), GroupElement::ab(0.3, 1.0 / 3.0), GroupElement::ab(7.0, -2.5)],
        )
        .unwrap();
        let net = network_from_config(&c, GraphRule::Complete).unwrap();
        let text = write_network(&net);
        assert!(text.starts_with("palmshift-network 1\nmodel ax_b 2\nvertices 3\nroot 0\n"));
        assert_eq!(parse_network(&text).unwrap(), net);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let bad = "palmshift-network 1\nmodel euclidean 1\nvertices 1\nroot 0\n0 1 1 0\n";
        assert!(matches!(parse_network(bad), Err(Error::Parse { line: 5, .. })));
        assert!(matches!(parse_network("nonsense"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn symmetric_g_balances_per_sample() {
        use crate::sampling::{palm_sample, ProcessSpec};
        let spec = ProcessSpec::Poisson { intensity: 1.0 };
        let w = Window::interval(-20.0, 20.0);
        let r = unimodularity_check(
            |rng| {
                let c = palm_sample(spec, E1, &w, rng)?;
                Ok(Some(network_from_config(&c, GraphRule::Delaunay1d)?))
            },
            |net, x, y| if net.mark(x, y).is_some() { 1.0 } else { 0.0 },
            1,
            200,
            5,
        )
        .unwrap();
        assert_eq!(r.lhs_mean(), r.rhs_mean());
    }
}
