//! The directed graph a point-shift induces on a configuration: components,
//! cycles, foils, descendant counts and the strip-shift dynamics.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sampling::PointConfiguration;
use crate::shift::{evaluate_all, inbound_complete, PointShiftSpec, ShiftEvaluation};
use crate::window::parallelogram_d_mass;

/// `G^H` on a finite configuration. Vertex `i` is point `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftGraph {
    pub evaluations: Vec<ShiftEvaluation>,
    /// Whether every possible in-neighbour of the vertex is visible.
    pub inbound_complete: Vec<bool>,
    /// Uncensored in-neighbours, in increasing order.
    pub in_edges: Vec<Vec<usize>>,
    /// Some censored vertex has this vertex as its visible candidate.
    pub pending_in: Vec<bool>,
}

impl ShiftGraph {
    pub fn len(&self) -> usize {
        self.evaluations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.evaluations.is_empty()
    }

    /// Out-neighbour; `None` when censored.
    pub fn out_edge(&self, v: usize) -> Option<usize> {
        self.evaluations[v].image
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_edges[v].len()
    }

    pub fn is_censored(&self, v: usize) -> bool {
        self.evaluations[v].censored
    }

    /// Uncensored with a complete in-neighbourhood.
    pub fn is_certain(&self, v: usize) -> bool {
        !self.evaluations[v].censored && self.inbound_complete[v] && !self.pending_in[v]
    }
}

pub fn build_graph(shift: &PointShiftSpec, config: &PointConfiguration) -> Result<ShiftGraph> {
    let evaluations = evaluate_all(shift, config)?;
    let n = evaluations.len();
    let mut in_edges = vec![Vec::new(); n];
    let mut pending_in = vec![false; n];
    for ev in &evaluations {
        match (ev.image, ev.candidate) {
            (Some(y), _) => in_edges[y].push(ev.source),
            (None, Some(y)) => pending_in[y] = true,
            _ => {}
        }
    }
    let inbound_complete = (0..n).map(|v| inbound_complete(shift, config, v)).collect();
    Ok(ShiftGraph {
        evaluations,
        inbound_complete,
        in_edges,
        pending_in,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ComponentClass {
    /// Finite component with finite foils.
    FF,
    /// Infinite component, finite foils. Never certified on a finite window.
    IF,
    /// Infinite component, infinite foils. Never certified on a finite window.
    II,
    /// Touches a censored vertex or an incomplete in-neighbourhood.
    Censored,
}

impl ComponentClass {
    pub fn name(&self) -> &'static str {
        match self {
            ComponentClass::FF => "FF",
            ComponentClass::IF => "IF",
            ComponentClass::II => "II",
            ComponentClass::Censored => "CENSORED",
        }
    }
}

/// A foil of a finite component. The shift maps foil `g` into foil
/// `g + 1` modulo the cycle length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Foil {
    pub generation: usize,
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentRecord {
    /// Sorted vertex list.
    pub vertices: Vec<usize>,
    pub class: ComponentClass,
    /// Cycle in shift order, starting at its smallest vertex.
    pub cycle: Option<Vec<usize>>,
    pub foils: Vec<Foil>,
    /// Distance to the cycle, aligned with `vertices`.
    pub depths: Vec<usize>,
    /// Intersection of the images `H^k(C)`, `k <= |C|`. On finite windows
    /// this is an approximation of the primeval set.
    pub primeval: Vec<usize>,
}

struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn find(&mut self, mut v: usize) -> usize {
        while self.0[v] != v {
            self.0[v] = self.0[self.0[v]];
            v = self.0[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Undirected components with classification. Candidate edges of censored
/// vertices are included so a component never hides a possible link.
pub fn components(graph: &ShiftGraph) -> Vec<ComponentRecord> {
    let n = graph.len();
    let mut sets = DisjointSets((0..n).collect());
    for ev in &graph.evaluations {
        if let Some(y) = ev.candidate {
            sets.union(ev.source, y);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for v in 0..n {
        let r = sets.find(v);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(v);
    }
    groups
        .into_iter()
        .map(|vertices| {
            if vertices.iter().all(|&v| graph.is_certain(v)) {
                finite_component(graph, vertices)
            } else {
                ComponentRecord {
                    vertices,
                    class: ComponentClass::Censored,
                    cycle: None,
                    foils: Vec::new(),
                    depths: Vec::new(),
                    primeval: Vec::new(),
                }
            }
        })
        .collect()
}

fn finite_component(graph: &ShiftGraph, vertices: Vec<usize>) -> ComponentRecord {
    let h = |v: usize| graph.out_edge(v).expect("certain vertices have images");
    let size = vertices.len();
    let mut v = vertices[0];
    for _ in 0..size {
        v = h(v);
    }
    let mut cycle = vec![v];
    let mut w = h(v);
    while w != v {
        cycle.push(w);
        w = h(w);
    }
    let start = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap_or(0);
    cycle.rotate_left(start);
    let len = cycle.len();

    // depth and position of the cycle entry, by walking until a known vertex
    let local = |u: usize| vertices.binary_search(&u).expect("closed component");
    let mut known: Vec<Option<(usize, usize)>> = vec![None; size];
    for (p, &c) in cycle.iter().enumerate() {
        known[local(c)] = Some((0, p));
    }
    for &u in &vertices {
        let mut path = Vec::new();
        let mut x = u;
        while known[local(x)].is_none() {
            path.push(x);
            x = h(x);
        }
        let (mut d, p) = known[local(x)].unwrap();
        for &y in path.iter().rev() {
            d += 1;
            known[local(y)] = Some((d, p));
        }
    }
    let mut foils: Vec<Foil> = (0..len)
        .map(|g| Foil {
            generation: g,
            vertices: Vec::new(),
        })
        .collect();
    let mut depths = Vec::with_capacity(size);
    for (i, &u) in vertices.iter().enumerate() {
        let (d, p) = known[i].unwrap();
        depths.push(d);
        let g = (p + len - d % len) % len;
        foils[g].vertices.push(u);
    }

    let mut image: Vec<usize> = vertices.clone();
    let mut primeval = vertices.clone();
    for _ in 0..size {
        image = image.iter().map(|&u| h(u)).collect();
        image.sort_unstable();
        image.dedup();
        primeval.retain(|u| image.binary_search(u).is_ok());
    }

    ComponentRecord {
        vertices,
        class: ComponentClass::FF,
        cycle: Some(cycle),
        foils,
        depths,
        primeval,
    }
}

/// Checks the structural facts every finite component must satisfy:
/// one cycle whose length equals the number of foils, foils partitioning
/// the component, equal iterates within a foil, and primeval set equal to
/// the cycle. Returns a description of the first violation.
pub fn check_finite_component(graph: &ShiftGraph, c: &ComponentRecord) -> std::result::Result<(), String> {
    if c.class != ComponentClass::FF {
        return Ok(());
    }
    let cycle = c.cycle.as_ref().ok_or("finite component without a cycle")?;
    if cycle.len() != c.foils.len() {
        return Err(format!("cycle length {} but {} foils", cycle.len(), c.foils.len()));
    }
    let mut seen: Vec<usize> = c.foils.iter().flat_map(|f| f.vertices.iter().copied()).collect();
    seen.sort_unstable();
    if seen != c.vertices {
        return Err("foils do not partition the component".into());
    }
    let n = c.depths.iter().copied().max().unwrap_or(0);
    let iterate = |mut v: usize| {
        for _ in 0..n {
            v = graph.out_edge(v).unwrap();
        }
        v
    };
    for f in &c.foils {
        if f.vertices.is_empty() {
            return Err(format!("empty foil {}", f.generation));
        }
        let target = iterate(f.vertices[0]);
        if f.vertices.iter().any(|&v| iterate(v) != target) {
            return Err(format!("foil {} does not equalise", f.generation));
        }
    }
    let mut cyc = cycle.clone();
    cyc.sort_unstable();
    if cyc != c.primeval {
        return Err("primeval set differs from the cycle".into());
    }
    // exactly one cycle: every vertex reaches the cycle
    if c.depths.len() != c.vertices.len() {
        return Err("missing depths".into());
    }
    Ok(())
}

/// `d_n(x) = card{Y : H^n(Y) = x}`, by reverse breadth-first levels.
/// Censored when any vertex above level `n` has an undecided in-neighbourhood.
pub fn descendant_count(graph: &ShiftGraph, x: usize, n: usize) -> Result<usize> {
    if x >= graph.len() {
        return Err(Error::NotAPoint);
    }
    let mut level = vec![x];
    for _ in 0..n {
        let mut next = Vec::new();
        for &v in &level {
            if !graph.inbound_complete[v] || graph.pending_in[v] {
                return Err(Error::Censored);
            }
            next.extend_from_slice(&graph.in_edges[v]);
        }
        level = next;
    }
    Ok(level.len())
}

/// Strip-shift orbit of the identity in a Palm configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripStats {
    pub stabilized: bool,
    /// Steps until the fixed point (or until the orbit stopped).
    pub steps: usize,
    /// `sum_k m(S(H^k e) \ {H^k e})` along the orbit.
    pub occupancy_sum: f64,
    pub censored: bool,
    pub fixed_point: Option<usize>,
}

pub fn strip_fixed_point_stats(
    shift: &PointShiftSpec,
    config: &PointConfiguration,
    max_steps: usize,
) -> Result<StripStats> {
    let (delta, a_max) = match *shift {
        PointShiftSpec::Strip { delta, a_max } => (delta, a_max),
        _ => return Err(Error::InvalidParameter("strip statistics need the strip shift".into())),
    };
    shift.validate(config.model)?;
    let mut cur = config.origin.ok_or(Error::MissingIdentity)?;
    let mut stats = StripStats {
        stabilized: false,
        steps: 0,
        occupancy_sum: 0.0,
        censored: false,
        fixed_point: None,
    };
    for k in 0..=max_steps {
        let ev = crate::shift::evaluate(shift, config, cur);
        let Some(next) = ev.image else {
            stats.censored = true;
            stats.steps = k;
            return Ok(stats);
        };
        let p = &config.points[cur];
        let occupied = config
            .points
            .iter()
            .filter(|q| q.a() >= p.a() && q.a() <= a_max * p.a() && (q.b() - p.b()).abs() <= delta * p.a())
            .count()
            - 1;
        stats.occupancy_sum += occupied as f64;
        if next == cur {
            stats.stabilized = true;
            stats.steps = k;
            stats.fixed_point = Some(cur);
            return Ok(stats);
        }
        cur = next;
        stats.steps = k + 1;
    }
    Ok(stats)
}

/// Preimages of the fixed point `x` other than `x` itself.
pub fn fixed_point_preimages(graph: &ShiftGraph, x: usize) -> Result<Vec<usize>> {
    if x >= graph.len() {
        return Err(Error::NotAPoint);
    }
    if graph.out_edge(x) != Some(x) {
        return Err(Error::InvalidParameter(format!("vertex {x} is not a fixed point")));
    }
    if !graph.inbound_complete[x] || graph.pending_in[x] {
        return Err(Error::Censored);
    }
    Ok(graph.in_edges[x].iter().copied().filter(|&y| y != x).collect())
}

/// Counts of `ys` by decade of `a_y / a_x`: bucket `k` holds ratios in
/// `[10^-(k+1), 10^-k)`, for `k < decades`.
pub fn preimage_decades(config: &PointConfiguration, x: usize, ys: &[usize], decades: usize) -> Vec<u64> {
    let ax = config.points[x].a();
    let mut out = vec![0u64; decades];
    for &y in ys {
        let r = config.points[y].a() / ax;
        if r < 1.0 {
            let k = (-r.log10()).floor() as usize;
            if k < decades {
                out[k] += 1;
            }
        }
    }
    out
}

/// Haar mass of the parallelogram `D` above `a_min`.
pub fn parallelogram_mass(delta: f64, a_min: f64) -> Result<f64> {
    if a_min.is_nan() || delta.is_nan() || a_min <= 0.0 || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "parallelogram needs delta > 0 and a_min > 0, got {delta}, {a_min}"
        )));
    }
    Ok(parallelogram_d_mass(delta, a_min))
}

/// Vertices reachable backwards from `x`, level by level (for diagnostics).
pub fn ancestors(graph: &ShiftGraph, x: usize) -> Vec<usize> {
    let mut seen = vec![false; graph.len()];
    let mut queue = VecDeque::from([x]);
    let mut out = Vec::new();
    seen[x] = true;
    while let Some(v) = queue.pop_front() {
        for &u in &graph.in_edges[v] {
            if !seen[u] {
                seen[u] = true;
                out.push(u);
                queue.push_back(u);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupElement, GroupModel};
    use crate::window::{haar_mass_quadrature, Window};

    fn line(xs: &[f64]) -> PointConfiguration {
        PointConfiguration::new(
            GroupModel::Euclidean { dim: 1 },
            Window::Whole,
            xs.iter().map(|&x| GroupElement::scalar(x)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn nearest_neighbor_graph_example() {
        let c = line(&[0.0, 1.0, 3.0]);
        let g = build_graph(&PointShiftSpec::NearestNeighbor, &c).unwrap();
        assert_eq!((0..3).map(|v| g.out_edge(v)).collect::<Vec<_>>(), vec![Some(1), Some(0), Some(1)]);
        let comps = components(&g);
        assert_eq!(comps.len(), 1);
        let comp = &comps[0];
        assert_eq!(comp.class, ComponentClass::FF);
        assert_eq!(comp.cycle, Some(vec![0, 1]));
        let mut foils: Vec<Vec<usize>> = comp.foils.iter().map(|f| f.vertices.clone()).collect();
        foils.sort();
        assert_eq!(foils, vec![vec![0, 2], vec![1]]);
        assert_eq!(comp.primeval, vec![0, 1]);
        check_finite_component(&g, comp).unwrap();
        assert_eq!(descendant_count(&g, 1, 1), Ok(2));
        assert_eq!(descendant_count(&g, 2, 0), Ok(1));
        let total: usize = (0..3).map(|v| descendant_count(&g, v, 1).unwrap()).sum();
        assert_eq!(total, 3);
    }

    #[test]
    fn identity_graph_is_all_fixed_points() {
        let c = line(&[0.0, 2.0, 5.0, 7.5]);
        let g = build_graph(&PointShiftSpec::Identity, &c).unwrap();
        let comps = components(&g);
        assert_eq!(comps.len(), 4);
        for comp in &comps {
            assert_eq!(comp.class, ComponentClass::FF);
            assert_eq!(comp.cycle.as_ref().unwrap().len(), 1);
        }
    }

    #[test]
    fn empty_graph() {
        let c = line(&[]);
        let g = build_graph(&PointShiftSpec::NearestNeighbor, &c).unwrap();
        assert!(g.is_empty());
        assert!(components(&g).is_empty());
    }

    #[test]
    fn censored_components_are_not_guessed() {
        let c = PointConfiguration::new(
            GroupModel::Euclidean { dim: 1 },
            Window::interval(0.0, 3.0),
            vec![GroupElement::scalar(0.0), GroupElement::scalar(1.0), GroupElement::scalar(3.0)],
        )
        .unwrap();
        let g = build_graph(&PointShiftSpec::NearestNeighbor, &c).unwrap();
        let comps = components(&g);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].class, ComponentClass::Censored);
        assert_eq!(descendant_count(&g, 1, 1), Err(Error::Censored));
    }

    #[test]
    fn strip_stats_trivial() {
        let c = PointConfiguration::new(GroupModel::AxB, Window::Whole, vec![GroupElement::ab(1.0, 0.0)]).unwrap();
        let s = strip_fixed_point_stats(&PointShiftSpec::strip(0.1), &c, 50).unwrap();
        assert!(s.stabilized);
        assert_eq!(s.steps, 0);
        assert_eq!(s.occupancy_sum, 0.0);
    }

    #[test]
    fn strip_stats_follow_the_orbit() {
        let c = PointConfiguration::new(
            GroupModel::AxB,
            Window::Whole,
            vec![
                GroupElement::ab(1.0, 0.0),
                GroupElement::ab(2.0, 0.05),
                GroupElement::ab(1.5, -0.05),
                GroupElement::ab(3.0, 0.2),
            ],
        )
        .unwrap();
        let s = strip_fixed_point_stats(&PointShiftSpec::strip(0.1), &c, 50).unwrap();
        // e sees (2, .05) and (1.5, -.05); (2, .05) sees (3, .2); (3, .2) is fixed
        assert!(s.stabilized);
        assert_eq!(s.steps, 2);
        assert_eq!(s.occupancy_sum, 3.0);
        assert_eq!(s.fixed_point, Some(3));
    }

    #[test]
    fn parallelogram_values() {
        let half = parallelogram_mass(0.1, 0.5).unwrap();
        let quad = haar_mass_quadrature(GroupModel::AxB, &Window::ParallelogramD { delta: 0.1, a_min: 0.5 }).unwrap();
        assert!((half - quad).abs() < 1e-6);
        assert!((half - 0.2 * (1.0 - std::f64::consts::LN_2)).abs() < 1e-12);
        let diff = parallelogram_mass(0.1, 1e-4).unwrap() - parallelogram_mass(0.1, 1e-3).unwrap();
        assert!((diff - 0.2 * 10f64.ln()).abs() < 1e-6);
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let m = parallelogram_mass(0.1, k as f64 / 40.0).unwrap();
            assert!(m < prev);
            prev = m;
        }
        assert!(parallelogram_mass(0.1, 0.0).is_err());
    }

    #[test]
    fn decades_of_preimages() {
        let c = PointConfiguration::new(
            GroupModel::AxB,
            Window::Whole,
            vec![
                GroupElement::ab(1.0, 0.0),
                GroupElement::ab(0.05, 0.0),
                GroupElement::ab(0.5, 0.0),
                GroupElement::ab(0.002, 0.0),
            ],
        )
        .unwrap();
        assert_eq!(preimage_decades(&c, 0, &[1, 2, 3], 3), vec![1, 1, 1]);
    }
}
