//! Finite point configurations and the samplers that produce them.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::group::{wrap_unit, GroupElement, GroupModel};
use crate::window::{contains, haar_mass, translate_unchecked, Window};

/// Point process law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProcessSpec {
    /// Homogeneous Poisson process with the given intensity.
    Poisson { intensity: f64 },
    /// The grid `s Z + phase` with a uniform phase; Euclidean, one dimension.
    Lattice { spacing: f64 },
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ProcessSpec::Poisson { intensity } if intensity > 0.0 && intensity.is_finite() => Ok(()),
            ProcessSpec::Lattice { spacing } if spacing > 0.0 && spacing.is_finite() => Ok(()),
            _ => Err(Error::InvalidParameter(format!("{self:?}"))),
        }
    }

    /// Points per unit Haar mass.
    pub fn intensity(&self) -> f64 {
        match *self {
            ProcessSpec::Poisson { intensity } => intensity,
            ProcessSpec::Lattice { spacing } => 1.0 / spacing,
        }
    }
}

/// A finite simple point configuration observed through `window`.
///
/// `origin` is the index of the identity atom when the configuration is a
/// Palm sample or has been recentered at one of its points. `margin` is an
/// optional inner region, supplied by the caller, inside which evaluations
/// that cannot be certified geometrically (neighbour shifts in dimension
/// two and up) are trusted.
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfiguration {
    pub model: GroupModel,
    pub window: Window,
    pub points: Vec<GroupElement>,
    pub origin: Option<usize>,
    pub margin: Option<Window>,
}

impl PointConfiguration {
    /// Validated constructor: every point lies in the window and no two
    /// coincide. `origin` is set if the identity is among the points.
    pub fn new(model: GroupModel, window: Window, points: Vec<GroupElement>) -> Result<Self> {
        window.validate(model)?;
        for (i, p) in points.iter().enumerate() {
            model.validate(p)?;
            if !contains(model, &window, p) {
                return Err(Error::OutsideWindow(i));
            }
        }
        let config = Self::from_parts(model, window, points);
        if let Some((i, j)) = config.first_coincidence() {
            return Err(Error::NotSimple(i, j));
        }
        Ok(config)
    }

    pub(crate) fn from_parts(model: GroupModel, window: Window, points: Vec<GroupElement>) -> Self {
        let e = model.identity();
        let origin = points.iter().position(|p| *p == e);
        PointConfiguration {
            model,
            window,
            points,
            origin,
            margin: None,
        }
    }

    pub fn with_margin(mut self, margin: Window) -> Self {
        self.margin = Some(margin);
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains_identity(&self) -> bool {
        self.origin.is_some()
    }

    pub fn point(&self, i: usize) -> &GroupElement {
        &self.points[i]
    }

    /// Index of `x` by exact coordinate comparison.
    pub fn index_of(&self, x: &GroupElement) -> Option<usize> {
        self.points.iter().position(|p| p == x)
    }

    /// First pair of coincident points, if any.
    pub fn first_coincidence(&self) -> Option<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        order.sort_by(|&i, &j| self.points[i].lex_cmp(&self.points[j]));
        order
            .windows(2)
            .find(|w| self.points[w[0]] == self.points[w[1]])
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
    }

    pub fn is_simple(&self) -> bool {
        self.first_coincidence().is_none()
    }

    /// The configuration seen from point `i`: every point and the window are
    /// left-translated by the inverse of point `i`. Indices are preserved and
    /// point `i` becomes exactly the identity.
    pub fn recentered(&self, i: usize) -> Result<Self> {
        let x = self.points.get(i).ok_or(Error::NotAPoint)?;
        let m = self.model;
        let xinv = m.inv(x);
        let window = translate_unchecked(m, &xinv, &self.window)?;
        let margin = self
            .margin
            .as_ref()
            .and_then(|w| translate_unchecked(m, &xinv, w).ok());
        let mut points: Vec<GroupElement> = self.points.iter().map(|p| m.relative(x, p)).collect();
        points[i] = m.identity();
        Ok(PointConfiguration {
            model: m,
            window,
            points,
            origin: Some(i),
            margin,
        })
    }

    /// Left translate of the whole configuration (points, window and
    /// margin) by `z`. Indices are preserved.
    pub fn translated(&self, z: &GroupElement) -> Result<Self> {
        let m = self.model;
        m.validate(z)?;
        let window = translate_unchecked(m, z, &self.window)?;
        let margin = match &self.margin {
            Some(w) => Some(translate_unchecked(m, z, w)?),
            None => None,
        };
        let points: Vec<GroupElement> = self.points.iter().map(|p| m.mul(z, p)).collect();
        let e = m.identity();
        let origin = points.iter().position(|p| *p == e);
        Ok(PointConfiguration {
            model: m,
            window,
            points,
            origin,
            margin,
        })
    }

    /// The reduced configuration: the identity atom removed.
    pub fn without_origin(&self) -> Self {
        let mut c = self.clone();
        if let Some(o) = c.origin.take() {
            c.points.remove(o);
        }
        c
    }

    pub fn count_in(&self, w: &Window) -> usize {
        self.points.iter().filter(|p| contains(self.model, w, p)).count()
    }
}

/// One Haar-uniform point of a finite-mass window.
pub fn sample_haar_point<R: Rng + ?Sized>(model: GroupModel, w: &Window, rng: &mut R) -> Result<GroupElement> {
    let u = |rng: &mut R, lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    // a with density proportional to 1/a^2 on [lo, hi]: 1/a is uniform
    let inv_cdf_a = |rng: &mut R, lo: f64, hi: f64| {
        let t_hi = 1.0 / lo;
        let t_lo = if hi.is_infinite() { 0.0 } else { 1.0 / hi };
        loop {
            let t = t_lo + (t_hi - t_lo) * rng.random::<f64>();
            if t > 0.0 {
                return (1.0 / t).clamp(lo, hi);
            }
        }
    };
    match (w, model) {
        (Window::Whole, GroupModel::Torus { dim }) => Ok(GroupElement::from_coords(
            (0..dim).map(|_| rng.random::<f64>()).collect(),
        )),
        (Window::Box { lo, hi }, GroupModel::Euclidean { .. }) => Ok(GroupElement::from_coords(
            lo.iter().zip(hi).map(|(&l, &h)| u(rng, l, h).min(h)).collect(),
        )),
        (Window::Box { lo, hi }, GroupModel::Torus { .. }) => Ok(GroupElement::from_coords(
            lo.iter()
                .zip(hi)
                .map(|(&l, &h)| wrap_unit(u(rng, l, h).min(h)))
                .collect(),
        )),
        (
            Window::AffineBox {
                a_lo,
                a_hi,
                b_lo,
                b_hi,
                shear,
            },
            GroupModel::AxB,
        ) => {
            let a = inv_cdf_a(rng, *a_lo, *a_hi);
            Ok(GroupElement::ab(a, shear * a + u(rng, *b_lo, *b_hi)))
        }
        (
            Window::Cone {
                apex_b,
                slope,
                a_lo,
                a_hi,
            },
            GroupModel::AxB,
        ) => {
            // density 2 slope a / a^2 in a: log-uniform
            let a = (a_lo.ln() + (a_hi / a_lo).ln() * rng.random::<f64>()).exp().clamp(*a_lo, *a_hi);
            Ok(GroupElement::ab(a, apex_b + slope * a * u(rng, -1.0, 1.0)))
        }
        (
            Window::Strip {
                anchor,
                delta,
                a_max,
            },
            GroupModel::AxB,
        ) => {
            let a = inv_cdf_a(rng, anchor.a(), *a_max);
            let half = delta * anchor.a();
            Ok(GroupElement::ab(a, anchor.b() + u(rng, -half, half)))
        }
        (Window::ParallelogramD { delta, a_min }, GroupModel::AxB) => {
            let hull = Window::cone(*delta, *a_min, 1.0);
            loop {
                let p = sample_haar_point(model, &hull, rng)?;
                if contains(model, w, &p) {
                    return Ok(p);
                }
            }
        }
        (Window::Intersection(parts), GroupModel::AxB) => {
            let hull = parts
                .iter()
                .filter_map(|p| haar_mass(model, p).ok().map(|m| (m, p)))
                .min_by(|x, y| x.0.total_cmp(&y.0))
                .ok_or(Error::InfiniteMass)?
                .1;
            loop {
                let p = sample_haar_point(model, hull, rng)?;
                if contains(model, w, &p) {
                    return Ok(p);
                }
            }
        }
        _ => Err(Error::InvalidWindow(w.describe())),
    }
}

/// A realization of `spec` on `window`.
pub fn sample<R: Rng + ?Sized>(
    spec: ProcessSpec,
    model: GroupModel,
    window: &Window,
    rng: &mut R,
) -> Result<PointConfiguration> {
    spec.validate()?;
    window.validate(model)?;
    match spec {
        ProcessSpec::Poisson { intensity } => {
            let mass = haar_mass(model, window)?;
            let mean = intensity * mass;
            let n = if mean > 0.0 {
                Poisson::new(mean)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?
                    .sample(rng) as usize
            } else {
                0
            };
            let points = (0..n)
                .map(|_| sample_haar_point(model, window, rng))
                .collect::<Result<Vec<_>>>()?;
            Ok(PointConfiguration::from_parts(model, window.clone(), points))
        }
        ProcessSpec::Lattice { spacing } => {
            let phase = spacing * rng.random::<f64>();
            lattice(spacing, phase, model, window)
        }
    }
}

fn lattice(spacing: f64, phase: f64, model: GroupModel, window: &Window) -> Result<PointConfiguration> {
    let (lo, hi) = match (model, window) {
        (GroupModel::Euclidean { dim: 1 }, Window::Box { lo, hi }) => (lo[0], hi[0]),
        _ => {
            return Err(Error::InvalidParameter(
                "lattice process needs a one-dimensional Euclidean interval".into(),
            ))
        }
    };
    let k_lo = ((lo - phase) / spacing).ceil() as i64;
    let k_hi = ((hi - phase) / spacing).floor() as i64;
    let points = (k_lo..=k_hi)
        .map(|k| GroupElement::scalar(phase + spacing * k as f64))
        .filter(|p| p.a() >= lo && p.a() <= hi)
        .collect();
    Ok(PointConfiguration::from_parts(model, window.clone(), points))
}

/// Palm version of a Poisson process: a fresh sample plus an atom at the
/// identity.
pub fn palm_sample_slivnyak<R: Rng + ?Sized>(
    spec: ProcessSpec,
    model: GroupModel,
    window: &Window,
    rng: &mut R,
) -> Result<PointConfiguration> {
    if !matches!(spec, ProcessSpec::Poisson { .. }) {
        return Err(Error::InvalidParameter(
            "Slivnyak sampling needs a Poisson process".into(),
        ));
    }
    let e = model.identity();
    if !contains(model, window, &e) {
        return Err(Error::InvalidWindow(format!(
            "{} does not contain the identity",
            window.describe()
        )));
    }
    let mut config = sample(spec, model, window, rng)?;
    config.points.push(e);
    config.origin = Some(config.points.len() - 1);
    Ok(config)
}

/// Palm version of the lattice: the grid anchored at 0.
pub fn palm_sample_lattice(spec: ProcessSpec, window: &Window) -> Result<PointConfiguration> {
    match spec {
        ProcessSpec::Lattice { spacing } => {
            spec.validate()?;
            let mut c = lattice(spacing, 0.0, GroupModel::Euclidean { dim: 1 }, window)?;
            if c.origin.is_none() {
                return Err(Error::MissingIdentity);
            }
            c.window = window.clone();
            Ok(c)
        }
        _ => Err(Error::InvalidParameter("lattice Palm sampling needs a lattice".into())),
    }
}

/// Palm sample by the exact method available for `spec`.
pub fn palm_sample<R: Rng + ?Sized>(
    spec: ProcessSpec,
    model: GroupModel,
    window: &Window,
    rng: &mut R,
) -> Result<PointConfiguration> {
    match spec {
        ProcessSpec::Poisson { .. } => palm_sample_slivnyak(spec, model, window, rng),
        ProcessSpec::Lattice { .. } => palm_sample_lattice(spec, window),
    }
}

/// Sum of `f(config seen from X, X)` over the points `X` in `inner`, with
/// the number of such points. Dividing the replicate mean of the sum by
/// `intensity * haar_mass(inner)` estimates the Palm expectation of `f`.
pub fn palm_expectation_window_average<F>(f: F, config: &PointConfiguration, inner: &Window) -> Result<(f64, usize)>
where
    F: Fn(&PointConfiguration, &GroupElement) -> f64,
{
    window_sum(|c, x| Some(f(c, x)), config, inner)?.ok_or(Error::Censored)
}

/// As [`palm_expectation_window_average`], but `None` from `f` censors the
/// whole replicate.
pub(crate) fn window_sum<F>(f: F, config: &PointConfiguration, inner: &Window) -> Result<Option<(f64, usize)>>
where
    F: Fn(&PointConfiguration, &GroupElement) -> Option<f64>,
{
    let model = config.model;
    let mass = haar_mass(model, inner)?;
    if mass <= 0.0 {
        return Err(Error::InvalidWindow(format!("{} is empty", inner.describe())));
    }
    let mut terms = Vec::new();
    for (i, x) in config.points.iter().enumerate() {
        if contains(model, inner, x) {
            match f(&config.recentered(i)?, x) {
                Some(v) => terms.push(v),
                None => return Ok(None),
            }
        }
    }
    Ok(Some((crate::stats::pairwise_sum(&terms), terms.len())))
}

/// All unordered pairs of points whose feature values are exactly equal.
pub fn separation_check<F>(config: &PointConfiguration, feature: F) -> Vec<(usize, usize)>
where
    F: Fn(&GroupElement) -> f64,
{
    let values: Vec<f64> = config.points.iter().map(&feature).collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        for p in start..end {
            for q in p + 1..end {
                let (i, j) = (order[p], order[q]);
                ties.push((i.min(j), i.max(j)));
            }
        }
        start = end;
    }
    ties.sort_unstable();
    ties
}
