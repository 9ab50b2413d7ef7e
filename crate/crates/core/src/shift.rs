//! Point-shift rules evaluated on finite windows.
//!
//! A rule is evaluated at a point of a configuration. The evaluation is
//! censored when the part of the group the rule depends on is not covered by
//! the observation window: only then could the true infinite-volume image
//! differ from what is visible. A censored evaluation still reports the best
//! visible candidate, because the true image is then either that candidate or
//! a point outside the window. Points are addressed by their index in the
//! configuration.

use crate::error::{Error, Result};
use crate::group::GroupModel;
use crate::sampling::PointConfiguration;
use crate::window::{contains, contains_window, Window};

/// Relative strip length used when none is given: the strip at `X` then
/// loses at most `1e-5` of its Haar mass `2 delta`.
pub const DEFAULT_STRIP_A_MAX: f64 = 1e5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PointShiftSpec {
    /// ax+b: the right-most point of the strip `X([1, a_max] x [-delta, delta])`,
    /// that is `[a, a_max a] x [b - delta a, b + delta a]` at `X = (a, b)`.
    Strip { delta: f64, a_max: f64 },
    /// Euclidean line: the nearest point strictly to the right.
    RightNeighbor,
    /// Euclidean or torus: the nearest other point.
    NearestNeighbor,
    /// Every point maps to itself.
    Identity,
}

impl PointShiftSpec {
    pub fn strip(delta: f64) -> Self {
        PointShiftSpec::Strip {
            delta,
            a_max: DEFAULT_STRIP_A_MAX,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PointShiftSpec::Strip { .. } => "strip",
            PointShiftSpec::RightNeighbor => "right_neighbor",
            PointShiftSpec::NearestNeighbor => "nearest_neighbor",
            PointShiftSpec::Identity => "identity",
        }
    }

    pub fn validate(&self, model: GroupModel) -> Result<()> {
        let ok = match (*self, model) {
            (PointShiftSpec::Strip { delta, a_max }, GroupModel::AxB) => delta > 0.0 && a_max > 1.0,
            (PointShiftSpec::RightNeighbor, GroupModel::Euclidean { dim: 1 }) => true,
            (PointShiftSpec::NearestNeighbor, GroupModel::Euclidean { .. } | GroupModel::Torus { .. }) => true,
            (PointShiftSpec::Identity, _) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{self:?} is not available on the {} model",
                model.name()
            )))
        }
    }
}

/// Outcome of one shift evaluation. `image` is present iff not censored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftEvaluation {
    pub source: usize,
    pub image: Option<usize>,
    /// Best visible candidate; equals `image` when uncensored.
    pub candidate: Option<usize>,
    pub censored: bool,
}

impl ShiftEvaluation {
    fn resolved(source: usize, image: usize) -> Self {
        ShiftEvaluation {
            source,
            image: Some(image),
            candidate: Some(image),
            censored: false,
        }
    }

    fn censored(source: usize, candidate: Option<usize>) -> Self {
        ShiftEvaluation {
            source,
            image: None,
            candidate,
            censored: true,
        }
    }
}

/// Evaluates the shift at point `x`.
pub fn apply(shift: &PointShiftSpec, config: &PointConfiguration, x: usize) -> Result<ShiftEvaluation> {
    if x >= config.len() {
        return Err(Error::NotAPoint);
    }
    shift.validate(config.model)?;
    Ok(evaluate(shift, config, x))
}

pub(crate) fn evaluate(shift: &PointShiftSpec, config: &PointConfiguration, x: usize) -> ShiftEvaluation {
    let m = config.model;
    let pts = &config.points;
    let px = &pts[x];
    match *shift {
        PointShiftSpec::Identity => ShiftEvaluation::resolved(x, x),
        PointShiftSpec::Strip { delta, a_max } => {
            let (a, b) = (px.a(), px.b());
            let top = a_max * a;
            let half = delta * a;
            let mut best = x;
            for (j, p) in pts.iter().enumerate() {
                if p.a() >= a && p.a() <= top && (p.b() - b).abs() <= half && p.lex_cmp(&pts[best]).is_gt() {
                    best = j;
                }
            }
            let region = Window::strip(px.clone(), delta, top);
            if contains_window(m, &config.window, &region) {
                ShiftEvaluation::resolved(x, best)
            } else {
                ShiftEvaluation::censored(x, Some(best))
            }
        }
        PointShiftSpec::RightNeighbor => {
            let v = px.a();
            let right = pts
                .iter()
                .enumerate()
                .filter(|(_, p)| p.a() > v)
                .min_by(|(_, p), (_, q)| p.a().total_cmp(&q.a()))
                .map(|(j, _)| j);
            match right {
                Some(j) if contains_window(m, &config.window, &Window::interval(v, pts[j].a())) => {
                    ShiftEvaluation::resolved(x, j)
                }
                other => ShiftEvaluation::censored(x, other),
            }
        }
        PointShiftSpec::NearestNeighbor => {
            let mut best: Option<(usize, f64)> = None;
            for (j, p) in pts.iter().enumerate() {
                if j == x {
                    continue;
                }
                let d = m.distance(px, p);
                let better = match best {
                    None => true,
                    Some((k, dk)) => d < dk || (d == dk && p.lex_cmp(&pts[k]).is_lt()),
                };
                if better {
                    best = Some((j, d));
                }
            }
            match best {
                None if matches!(config.window, Window::Whole) => ShiftEvaluation::resolved(x, x),
                None => ShiftEvaluation::censored(x, None),
                Some((j, d)) => {
                    if ball_inside(config, x, d) {
                        ShiftEvaluation::resolved(x, j)
                    } else {
                        ShiftEvaluation::censored(x, Some(j))
                    }
                }
            }
        }
    }
}

/// Closed ball of radius `r` around point `x`, as a box, inside the window.
fn ball_inside(config: &PointConfiguration, x: usize, r: f64) -> bool {
    let w = &config.window;
    if matches!(w, Window::Whole) {
        return true;
    }
    let c = config.points[x].coords();
    let ball = Window::boxed(
        &c.iter().map(|v| v - r).collect::<Vec<_>>(),
        &c.iter().map(|v| v + r).collect::<Vec<_>>(),
    );
    contains_window(config.model, w, &ball)
}

/// Evaluations at every point.
pub fn evaluate_all(shift: &PointShiftSpec, config: &PointConfiguration) -> Result<Vec<ShiftEvaluation>> {
    shift.validate(config.model)?;
    Ok((0..config.len()).map(|i| evaluate(shift, config, i)).collect())
}

/// Whether every point that could map to `x` is visible with a decidable
/// evaluation region, so the set of preimages found in the window is
/// complete up to censored sources (which report their candidates).
pub fn inbound_complete(shift: &PointShiftSpec, config: &PointConfiguration, x: usize) -> bool {
    let m = config.model;
    let w = &config.window;
    let px = &config.points[x];
    if matches!(shift, PointShiftSpec::Identity) || matches!(w, Window::Whole) {
        return true;
    }
    if let Some(margin) = &config.margin {
        if !contains(m, margin, px) {
            return false;
        }
    }
    match *shift {
        PointShiftSpec::Identity => true,
        PointShiftSpec::Strip { delta, a_max } => {
            // Y maps to X only if X is in Y's strip, i.e. Y lies in this cone.
            let reach = Window::Cone {
                apex_b: px.b(),
                slope: delta,
                a_lo: px.a() / a_max,
                a_hi: px.a(),
            };
            contains_window(m, w, &reach)
        }
        // Only the left neighbour can map here; it is visible if some point is.
        PointShiftSpec::RightNeighbor => config.points.iter().any(|p| p.a() < px.a()),
        PointShiftSpec::NearestNeighbor => match m {
            GroupModel::Euclidean { dim: 1 } => {
                let v = px.a();
                config.points.iter().any(|p| p.a() < v) && config.points.iter().any(|p| p.a() > v)
            }
            _ => config.margin.is_some(),
        },
    }
}

/// Uncensored points whose image is `x`.
pub fn preimages(shift: &PointShiftSpec, config: &PointConfiguration, x: usize) -> Result<Vec<usize>> {
    if x >= config.len() {
        return Err(Error::NotAPoint);
    }
    Ok(evaluate_all(shift, config)?
        .into_iter()
        .filter(|e| e.image == Some(x))
        .map(|e| e.source)
        .collect())
}

/// The unique preimage of `x`. Censored when boundary effects leave the
/// preimage set undecided; an error when it is certainly not a singleton.
pub fn reverse(shift: &PointShiftSpec, config: &PointConfiguration, x: usize) -> Result<ShiftEvaluation> {
    if x >= config.len() {
        return Err(Error::NotAPoint);
    }
    let evals = evaluate_all(shift, config)?;
    let found: Vec<usize> = evals
        .iter()
        .filter(|e| e.image == Some(x))
        .map(|e| e.source)
        .collect();
    if found.len() >= 2 {
        return Err(Error::NotBijective(found.len()));
    }
    let pending = evals.iter().any(|e| e.censored && e.candidate == Some(x));
    if pending || !inbound_complete(shift, config, x) {
        return Ok(ShiftEvaluation::censored(x, found.first().copied()));
    }
    match found.first() {
        Some(&y) => Ok(ShiftEvaluation::resolved(x, y)),
        None => Err(Error::NotBijective(0)),
    }
}

/// Forward orbit `H^0(x), ..., H^k(x)` with `k <= n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub points: Vec<usize>,
    /// The orbit hit a censored evaluation before step `n`.
    pub censored: bool,
    /// First `k` with `H^k(x) = H^{k+1}(x)`, if seen within the orbit.
    pub stabilized_at: Option<usize>,
}

pub fn iterate(shift: &PointShiftSpec, config: &PointConfiguration, x: usize, n: usize) -> Result<Orbit> {
    if x >= config.len() {
        return Err(Error::NotAPoint);
    }
    shift.validate(config.model)?;
    let mut orbit = Orbit {
        points: vec![x],
        censored: false,
        stabilized_at: None,
    };
    for k in 0..n {
        let cur = orbit.points[k];
        if orbit.stabilized_at.is_some() {
            orbit.points.push(cur);
            continue;
        }
        let ev = evaluate(shift, config, cur);
        match ev.image {
            Some(next) => {
                if next == cur {
                    orbit.stabilized_at = Some(k);
                }
                orbit.points.push(next);
            }
            None => {
                orbit.censored = true;
                break;
            }
        }
    }
    Ok(orbit)
}

/// `max |Δ(H(X)) - Δ(X)|` over uncensored points; zero means the shift is
/// isomodular on this sample.
pub fn isomodularity_defect(shift: &PointShiftSpec, config: &PointConfiguration) -> Result<f64> {
    let m = config.model;
    Ok(evaluate_all(shift, config)?
        .iter()
        .filter_map(|e| e.image.map(|y| (e.source, y)))
        .map(|(x, y)| (m.delta(&config.points[y]) - m.delta(&config.points[x])).abs())
        .fold(0.0, f64::max))
}
