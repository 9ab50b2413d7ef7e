//! Monte Carlo estimators for the two sides of the transport identities.
//!
//! Every estimator draws independent Palm ensembles for the two sides it
//! compares, so the standard errors of the two means are independent and
//! the comparison rule `|m1 - m2| <= 3 sqrt(se1^2 + se2^2)` applies as is.
//! Replicates whose evaluation region leaves the window are discarded and
//! counted; a verdict is withheld when more than half of either side is lost.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel};
use crate::rng::{ensemble, tags};
use crate::sampling::{palm_sample, sample, window_sum, PointConfiguration, ProcessSpec};
use crate::shift::{evaluate, evaluate_all, inbound_complete, reverse, PointShiftSpec};
use crate::stats::{ks_two_sample, Estimate};
use crate::window::{contains, contains_window, haar_mass, Window};

/// Standard-error multiple used by every consistency verdict.
pub const SE_MULTIPLE: f64 = 3.0;
/// Two-sample KS threshold.
pub const KS_LEVEL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Withheld,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Inconsistent => "inconsistent",
            Verdict::Withheld => "withheld",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportReport {
    pub lhs: Estimate,
    pub rhs: Estimate,
    /// Replicates requested per side.
    pub n_samples: usize,
    pub lhs_censored: usize,
    pub rhs_censored: usize,
    pub verdict: Verdict,
}

impl TransportReport {
    pub(crate) fn from_sides(lhs: Vec<Option<f64>>, rhs: Vec<Option<f64>>, n_samples: usize) -> Self {
        let split = |v: Vec<Option<f64>>| {
            let kept: Vec<f64> = v.iter().flatten().copied().collect();
            let lost = v.len() - kept.len();
            (Estimate::from_samples(&kept), lost)
        };
        let (lhs, lhs_censored) = split(lhs);
        let (rhs, rhs_censored) = split(rhs);
        let verdict = if 2 * lhs_censored > n_samples || 2 * rhs_censored > n_samples || lhs.n == 0 || rhs.n == 0 {
            Verdict::Withheld
        } else if lhs.agrees_with(&rhs, SE_MULTIPLE) {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        };
        TransportReport {
            lhs,
            rhs,
            n_samples,
            lhs_censored,
            rhs_censored,
            verdict,
        }
    }

    pub fn lhs_mean(&self) -> f64 {
        self.lhs.mean
    }

    pub fn rhs_mean(&self) -> f64 {
        self.rhs.mean
    }

    pub fn lhs_se(&self) -> f64 {
        self.lhs.se
    }

    pub fn rhs_se(&self) -> f64 {
        self.rhs.se
    }
}

/// Where a kernel may put or take mass, relative to the sender (support)
/// or to the receiver (reverse support).
#[derive(Clone, Debug, PartialEq)]
pub enum Support {
    /// Only the origin itself.
    Origin,
    Region(Window),
    Unbounded,
}

/// A transport kernel in centred form: `tau(x, y)` is the mass the origin
/// of the configuration seen from `x` sends to the point `y`. Kernels of this
/// form are diagonally invariant by construction.
pub trait CenteredKernel: Sync {
    /// Mass from the origin of `centered` to point `target`; `None` when the
    /// window does not determine it.
    fn mass(&self, centered: &PointConfiguration, target: usize) -> Option<f64>;
    fn support(&self, model: GroupModel) -> Support;
    fn reverse_support(&self, model: GroupModel) -> Support;
}

/// The zero kernel.
pub struct ZeroKernel;

impl CenteredKernel for ZeroKernel {
    fn mass(&self, _: &PointConfiguration, _: usize) -> Option<f64> {
        Some(0.0)
    }
    fn support(&self, _: GroupModel) -> Support {
        Support::Origin
    }
    fn reverse_support(&self, _: GroupModel) -> Support {
        Support::Origin
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    Unit,
    /// Mass `Δ(x^{-1} y)` on the edge from `x` to `y`.
    Modular,
}

/// Mass `scale * weight` along the edge from each point to its image.
/// Neighbour shifts need a `radius`: edges longer than it carry no mass,
/// which keeps the support bounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftEdgeKernel {
    pub shift: PointShiftSpec,
    pub weighting: Weighting,
    pub radius: Option<f64>,
    pub scale: f64,
}

impl ShiftEdgeKernel {
    pub fn new(shift: PointShiftSpec) -> Self {
        ShiftEdgeKernel {
            shift,
            weighting: Weighting::Unit,
            radius: None,
            scale: 1.0,
        }
    }

    pub fn with_radius(mut self, r: f64) -> Self {
        self.radius = Some(r);
        self
    }

    pub fn with_weighting(mut self, w: Weighting) -> Self {
        self.weighting = w;
        self
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.scale *= c;
        self
    }

    /// Image of the origin among edges of length at most the radius.
    fn image(&self, c: &PointConfiguration) -> Option<Option<usize>> {
        let o = c.origin?;
        let m = c.model;
        let sees = |w: Window| contains_window(m, &c.window, &w);
        match (self.shift, self.radius) {
            (PointShiftSpec::Identity, _) => Some(Some(o)),
            (PointShiftSpec::Strip { .. }, _) => evaluate(&self.shift, c, o).image.map(Some),
            (PointShiftSpec::RightNeighbor, Some(r)) => {
                let right = c
                    .points
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.a() > 0.0 && p.a() <= r)
                    .min_by(|(_, p), (_, q)| p.a().total_cmp(&q.a()));
                match right {
                    Some((j, p)) if sees(Window::interval(0.0, p.a())) => Some(Some(j)),
                    _ if sees(Window::interval(0.0, r)) => Some(None),
                    _ => None,
                }
            }
            (PointShiftSpec::NearestNeighbor, Some(r)) => {
                let e = m.identity();
                let mut best: Option<(usize, f64)> = None;
                for (j, p) in c.points.iter().enumerate() {
                    if j == o {
                        continue;
                    }
                    let d = m.distance(&e, p);
                    let better = match best {
                        None => true,
                        Some((k, dk)) => d < dk || (d == dk && p.lex_cmp(&c.points[k]).is_lt()),
                    };
                    if better {
                        best = Some((j, d));
                    }
                }
                let ball = |d: f64| matches!(c.window, Window::Whole) || sees(Window::cube(m.dim(), d));
                match best {
                    Some((j, d)) if d <= r && ball(d) => Some(Some(j)),
                    _ if ball(r) => Some(None),
                    _ => None,
                }
            }
            _ => None,
        }
    }
}

impl CenteredKernel for ShiftEdgeKernel {
    fn mass(&self, centered: &PointConfiguration, target: usize) -> Option<f64> {
        let image = self.image(centered)?;
        if image != Some(target) {
            return Some(0.0);
        }
        let w = match self.weighting {
            Weighting::Unit => 1.0,
            Weighting::Modular => centered.model.delta(&centered.points[target]),
        };
        Some(self.scale * w)
    }

    fn support(&self, model: GroupModel) -> Support {
        match (self.shift, self.radius) {
            (PointShiftSpec::Identity, _) => Support::Origin,
            (PointShiftSpec::Strip { delta, a_max }, _) => {
                Support::Region(Window::strip(model.identity(), delta, a_max))
            }
            (PointShiftSpec::RightNeighbor, Some(r)) => Support::Region(Window::interval(0.0, r)),
            (PointShiftSpec::NearestNeighbor, Some(r)) => Support::Region(Window::cube(model.dim(), r)),
            _ => Support::Unbounded,
        }
    }

    fn reverse_support(&self, model: GroupModel) -> Support {
        match (self.shift, self.radius) {
            (PointShiftSpec::Identity, _) => Support::Origin,
            (PointShiftSpec::Strip { delta, a_max }, _) => Support::Region(Window::Cone {
                apex_b: 0.0,
                slope: delta,
                a_lo: 1.0 / a_max,
                a_hi: 1.0,
            }),
            (PointShiftSpec::RightNeighbor, Some(r)) => Support::Region(Window::interval(-r, 0.0)),
            (PointShiftSpec::NearestNeighbor, Some(r)) => Support::Region(Window::cube(model.dim(), r)),
            _ => Support::Unbounded,
        }
    }
}

fn covered(model: GroupModel, window: &Window, s: &Support) -> Result<bool> {
    match s {
        Support::Origin => Ok(contains(model, window, &model.identity())),
        Support::Region(w) => Ok(contains_window(model, window, w)),
        Support::Unbounded => Err(Error::UnboundedSupport),
    }
}

fn in_support(model: GroupModel, s: &Support, x: &GroupElement) -> bool {
    match s {
        Support::Origin => *x == model.identity(),
        Support::Region(w) => contains(model, w, x),
        Support::Unbounded => true,
    }
}

/// Mass sent by the origin of a Palm configuration.
pub fn mass_out<K: CenteredKernel + ?Sized>(kernel: &K, c: &PointConfiguration) -> Result<Option<f64>> {
    let support = kernel.support(c.model);
    if !covered(c.model, &c.window, &support)? {
        return Ok(None);
    }
    let mut total = Vec::new();
    for (y, p) in c.points.iter().enumerate() {
        if in_support(c.model, &support, p) {
            match kernel.mass(c, y) {
                Some(v) => total.push(v),
                None => return Ok(None),
            }
        }
    }
    Ok(Some(crate::stats::pairwise_sum(&total)))
}

/// `Δ(x^{-1})`-weighted mass received by the origin of a Palm configuration.
pub fn mass_in<K: CenteredKernel + ?Sized>(kernel: &K, c: &PointConfiguration) -> Result<Option<f64>> {
    let m = c.model;
    let o = c.origin.ok_or(Error::MissingIdentity)?;
    let support = kernel.reverse_support(m);
    if !covered(m, &c.window, &support)? {
        return Ok(None);
    }
    let mut total = Vec::new();
    for (x, p) in c.points.iter().enumerate() {
        if in_support(m, &support, p) {
            let seen = c.recentered(x)?;
            match kernel.mass(&seen, o) {
                Some(v) => total.push(v / m.delta(p)),
                None => return Ok(None),
            }
        }
    }
    Ok(Some(crate::stats::pairwise_sum(&total)))
}

fn palm_ensemble<T, F>(
    process: ProcessSpec,
    model: GroupModel,
    window: &Window,
    n: usize,
    seed: u64,
    tag: u32,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&PointConfiguration) -> Result<T> + Sync,
{
    ensemble(seed, tag, n, |rng: &mut ChaCha8Rng, _| palm_sample(process, model, window, rng).and_then(|c| f(&c)))
        .into_iter()
        .collect()
}

/// Both sides of the mass transport identity
/// `E Σ_y τ(e, y) = E Σ_x τ(x, e) Δ(x^{-1})` under the Palm law.
pub fn verify_mass_transport<K: CenteredKernel + ?Sized>(
    kernel: &K,
    process: ProcessSpec,
    model: GroupModel,
    window: &Window,
    n_samples: usize,
    seed: u64,
) -> Result<TransportReport> {
    if matches!(kernel.support(model), Support::Unbounded) || matches!(kernel.reverse_support(model), Support::Unbounded) {
        return Err(Error::UnboundedSupport);
    }
    let lhs = palm_ensemble(process, model, window, n_samples, seed, tags::LHS, |c| mass_out(kernel, c))?;
    let rhs = palm_ensemble(process, model, window, n_samples, seed, tags::RHS, |c| mass_in(kernel, c))?;
    Ok(TransportReport::from_sides(lhs, rhs, n_samples))
}

/// `Δ(h^{-1})` for the image `h` of the origin, if decided.
pub fn modular_of_inverse_image(shift: &PointShiftSpec, c: &PointConfiguration) -> Result<Option<f64>> {
    let o = c.origin.ok_or(Error::MissingIdentity)?;
    Ok(evaluate(shift, c, o).image.map(|h| 1.0 / c.model.delta(&c.points[h])))
}

/// Number of preimages of the origin, if decided.
pub fn preimage_count(shift: &PointShiftSpec, c: &PointConfiguration) -> Result<Option<f64>> {
    let o = c.origin.ok_or(Error::MissingIdentity)?;
    if !inbound_complete(shift, c, o) {
        return Ok(None);
    }
    let evals = evaluate_all(shift, c)?;
    if evals.iter().any(|e| e.censored && e.candidate == Some(o)) {
        return Ok(None);
    }
    Ok(Some(evals.iter().filter(|e| e.image == Some(o)).count() as f64))
}

/// `E[Δ(h^{-1})]` against `E[card h^-]`.
pub fn mass_flow_check(
    shift: &PointShiftSpec,
    process: ProcessSpec,
    model: GroupModel,
    window: &Window,
    n_samples: usize,
    seed: u64,
) -> Result<TransportReport> {
    shift.validate(model)?;
    let lhs = palm_ensemble(process, model, window, n_samples, seed, tags::LHS, |c| modular_of_inverse_image(shift, c))?;
    let rhs = palm_ensemble(process, model, window, n_samples, seed, tags::RHS, |c| preimage_count(shift, c))?;
    Ok(TransportReport::from_sides(lhs, rhs, n_samples))
}

/// One statistic compared between two ensembles.
#[derive(Clone, Debug, PartialEq)]
pub struct StatisticComparison {
    pub name: String,
    pub palm: Estimate,
    pub shifted: Estimate,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
}

impl StatisticComparison {
    fn new(name: &str, x: &[f64], y: &[f64]) -> Self {
        let (d, p) = ks_two_sample(x, y);
        StatisticComparison {
            name: name.to_string(),
            palm: Estimate::from_samples(x),
            shifted: Estimate::from_samples(y),
            ks_statistic: d,
            ks_p_value: p,
        }
    }

    pub fn mean_difference(&self) -> f64 {
        self.shifted.mean - self.palm.mean
    }

    pub fn means_agree(&self) -> bool {
        self.palm.agrees_with(&self.shifted, SE_MULTIPLE)
    }

    pub fn ks_passes(&self) -> bool {
        self.ks_p_value.is_nan() || self.ks_p_value > KS_LEVEL
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeckeReport {
    pub statistics: Vec<StatisticComparison>,
    pub n_samples: usize,
    pub palm_censored: usize,
    pub shifted_censored: usize,
    pub verdict: Verdict,
}

impl MeckeReport {
    fn build(names: &[&str], palm: Vec<Option<Vec<f64>>>, shifted: Vec<Option<Vec<f64>>>, n: usize) -> Self {
        let columns = |rows: &[Option<Vec<f64>>]| {
            let kept: Vec<&Vec<f64>> = rows.iter().flatten().collect();
            let cols: Vec<Vec<f64>> = (0..names.len()).map(|k| kept.iter().map(|r| r[k]).collect()).collect();
            (cols, rows.len() - kept.len())
        };
        let (pc, palm_censored) = columns(&palm);
        let (sc, shifted_censored) = columns(&shifted);
        let statistics: Vec<StatisticComparison> = names
            .iter()
            .enumerate()
            .map(|(k, name)| StatisticComparison::new(name, &pc[k], &sc[k]))
            .collect();
        let verdict = if 2 * palm_censored > n || 2 * shifted_censored > n {
            Verdict::Withheld
        } else if statistics.iter().all(|s| s.ks_passes() && s.means_agree()) {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        };
        MeckeReport {
            statistics,
            n_samples: n,
            palm_censored,
            shifted_censored,
            verdict,
        }
    }

    pub fn min_p_value(&self) -> f64 {
        self.statistics.iter().map(|s| s.ks_p_value).fold(1.0, f64::min)
    }
}

/// The default statistics evaluated on a configuration seen from its origin.
pub struct Battery {
    pub names: Vec<&'static str>,
    model: GroupModel,
    scale: f64,
}

impl Battery {
    pub fn for_model(model: GroupModel, intensity: f64) -> Self {
        let names = match model {
            GroupModel::Euclidean { dim: 1 } => vec!["count[-2,-0.5]", "count[0.5,2]", "count[-1,1]", "gap1", "gap2", "gap_left"],
            GroupModel::AxB => vec!["count_w1", "count_w2", "count_w3"],
            _ => vec!["count_r1", "count_r2", "nn1", "nn2"],
        };
        Battery {
            names,
            model,
            scale: intensity.powf(-1.0 / model.dim().max(1) as f64),
        }
    }

    fn ax_b_windows() -> [Window; 3] {
        [
            Window::ab_box(1.0, 10.0, -0.1, 0.1),
            Window::ab_box(0.25, 1.0, -0.25, 0.25),
            Window::ab_box(1.0, 4.0, 0.1, 0.5),
        ]
    }

    /// Statistic vector, or `None` when the window does not decide it.
    pub fn evaluate(&self, c: &PointConfiguration) -> Option<Vec<f64>> {
        let m = self.model;
        let o = c.origin?;
        let others = || c.points.iter().enumerate().filter(move |(j, _)| *j != o).map(|(_, p)| p);
        match m {
            GroupModel::Euclidean { dim: 1 } => {
                if !contains_window(m, &c.window, &Window::interval(-2.0, 2.0)) {
                    return None;
                }
                let count = |lo: f64, hi: f64| others().filter(|p| p.a() >= lo && p.a() <= hi).count() as f64;
                let mut right: Vec<f64> = others().map(|p| p.a()).filter(|&x| x > 0.0).collect();
                right.sort_by(f64::total_cmp);
                let left = others().map(|p| p.a()).filter(|&x| x < 0.0).fold(f64::NEG_INFINITY, f64::max);
                if right.len() < 2 || left.is_infinite() {
                    return None;
                }
                Some(vec![
                    count(-2.0, -0.5),
                    count(0.5, 2.0),
                    count(-1.0, 1.0),
                    right[0],
                    right[1] - right[0],
                    -left,
                ])
            }
            GroupModel::AxB => {
                let ws = Self::ax_b_windows();
                if ws.iter().any(|w| !contains_window(m, &c.window, w)) {
                    return None;
                }
                Some(ws.iter().map(|w| others().filter(|p| contains(m, w, p)).count() as f64).collect())
            }
            _ => {
                let l = self.scale;
                let e = m.identity();
                let mut d: Vec<f64> = others().map(|p| m.distance(&e, p)).collect();
                d.sort_by(f64::total_cmp);
                if d.len() < 2 {
                    return None;
                }
                let reach = d[1].max(2.0 * l);
                if !matches!(c.window, Window::Whole) && !contains_window(m, &c.window, &Window::cube(m.dim(), reach)) {
                    return None;
                }
                let within = |r: f64| d.iter().filter(|&&x| x <= r).count() as f64;
                Some(vec![within(l), within(2.0 * l), d[0], d[1]])
            }
        }
    }
}

/// Compares the battery under the Palm law with the battery seen from the
/// image of the origin, on independent ensembles.
pub fn mecke_invariance_test(
    shift: &PointShiftSpec,
    process: ProcessSpec,
    model: GroupModel,
    window: &Window,
    n_samples: usize,
    seed: u64,
) -> Result<MeckeReport> {
    shift.validate(model)?;
    let battery = Battery::for_model(model, process.intensity());
    let palm = palm_ensemble(process, model, window, n_samples, seed, tags::PALM, |c| Ok(battery.evaluate(c)))?;
    let shifted = palm_ensemble(process, model, window, n_samples, seed, tags::SHIFTED, |c| {
        let o = c.origin.ok_or(Error::MissingIdentity)?;
        match evaluate(shift, c, o).image {
            Some(h) => Ok(battery.evaluate(&c.recentered(h)?)),
            None => Ok(None),
        }
    })?;
    Ok(MeckeReport::build(&battery.names, palm, shifted, n_samples))
}

/// Compares the laws of `h^{-1}` and of the preimage `h^-` of the origin,
/// coordinate by coordinate.
pub fn reciprocal_vs_reverse_test(
    shift: &PointShiftSpec,
    process: ProcessSpec,
    model: GroupModel,
    window: &Window,
    n_samples: usize,
    seed: u64,
) -> Result<MeckeReport> {
    shift.validate(model)?;
    let names: Vec<&str> = ["coord0", "coord1", "coord2", "coord3"][..model.dim()].to_vec();
    let reciprocal = palm_ensemble(process, model, window, n_samples, seed, tags::PALM, |c| {
        let o = c.origin.ok_or(Error::MissingIdentity)?;
        Ok(evaluate(shift, c, o).image.map(|h| model.inv(&c.points[h]).coords().to_vec()))
    })?;
    let reversed = palm_ensemble(process, model, window, n_samples, seed, tags::SHIFTED, |c| {
        let o = c.origin.ok_or(Error::MissingIdentity)?;
        let r = reverse(shift, c, o)?;
        Ok(r.image.map(|y| c.points[y].coords().to_vec()))
    })?;
    Ok(MeckeReport::build(&names, reciprocal, reversed, n_samples))
}

/// Functional of a configuration seen from one of its points, given that
/// point's original location. `None` means the window does not decide it.
pub type Functional<'a> = dyn Fn(&PointConfiguration, &GroupElement) -> Option<f64> + Sync + 'a;

/// Palm expectation of `f` by Slivnyak sampling (left) and by window
/// averaging over ordinary samples (right).
pub fn dual_palm_consistency(
    f: &Functional<'_>,
    process: ProcessSpec,
    model: GroupModel,
    window: &Window,
    inner: &Window,
    n_samples: usize,
    seed: u64,
) -> Result<TransportReport> {
    let intensity = match process {
        ProcessSpec::Poisson { intensity } => intensity,
        _ => return Err(Error::InvalidParameter("dual Palm estimators need a Poisson process".into())),
    };
    if !contains_window(model, window, inner) {
        return Err(Error::InvalidWindow(format!("{} is not inside the window", inner.describe())));
    }
    let norm = intensity * haar_mass(model, inner)?;
    let e = model.identity();
    let lhs = palm_ensemble(process, model, window, n_samples, seed, tags::LHS, |c| Ok(f(c, &e)))?;
    let rhs: Vec<Option<f64>> = ensemble(seed, tags::WINDOW_AVERAGE, n_samples, |rng, _| {
        let c = sample(process, model, window, rng)?;
        Ok(window_sum(f, &c, inner)?.map(|(s, _)| s / norm))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(TransportReport::from_sides(lhs, rhs, n_samples))
}

/// Ready-made functionals.
pub mod functionals {
    use super::*;

    /// Constant one.
    pub fn one() -> impl Fn(&PointConfiguration, &GroupElement) -> Option<f64> + Sync {
        |_, _| Some(1.0)
    }

    /// Number of points other than the origin in `region`.
    pub fn count_in(region: Window) -> impl Fn(&PointConfiguration, &GroupElement) -> Option<f64> + Sync {
        move |c, _| {
            if !contains_window(c.model, &c.window, &region) {
                return None;
            }
            let o = c.origin?;
            Some(
                c.points
                    .iter()
                    .enumerate()
                    .filter(|&(j, p)| j != o && contains(c.model, &region, p))
                    .count() as f64,
            )
        }
    }

    /// `Δ(h^{-1})` for the image `h` of the origin.
    pub fn modular_of_inverse_image(
        shift: PointShiftSpec,
    ) -> impl Fn(&PointConfiguration, &GroupElement) -> Option<f64> + Sync {
        move |c, _| super::modular_of_inverse_image(&shift, c).ok().flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const E1: GroupModel = GroupModel::Euclidean { dim: 1 };

    #[test]
    fn zero_kernel_is_exactly_zero() {
        let r = verify_mass_transport(&ZeroKernel, ProcessSpec::Poisson { intensity: 1.0 }, E1, &Window::interval(-5.0, 5.0), 100, 1).unwrap();
        assert_eq!(r.lhs_mean(), 0.0);
        assert_eq!(r.rhs_mean(), 0.0);
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn lattice_right_neighbor_transport_is_exact() {
        let k = ShiftEdgeKernel::new(PointShiftSpec::RightNeighbor).with_radius(2.0);
        let r = verify_mass_transport(&k, ProcessSpec::Lattice { spacing: 1.0 }, E1, &Window::interval(-5.0, 5.0), 50, 1).unwrap();
        assert_eq!((r.lhs_mean(), r.rhs_mean()), (1.0, 1.0));
        assert_eq!((r.lhs_se(), r.rhs_se()), (0.0, 0.0));
    }

    #[test]
    fn unbounded_kernel_rejected() {
        let k = ShiftEdgeKernel::new(PointShiftSpec::RightNeighbor);
        assert_eq!(
            verify_mass_transport(&k, ProcessSpec::Poisson { intensity: 1.0 }, E1, &Window::interval(-5.0, 5.0), 10, 1),
            Err(Error::UnboundedSupport)
        );
    }

    #[test]
    fn identity_mass_flow_is_one() {
        let r = mass_flow_check(&PointShiftSpec::Identity, ProcessSpec::Poisson { intensity: 1.0 }, GroupModel::AxB, &Window::ab_box(0.5, 2.0, -1.0, 1.0), 200, 3).unwrap();
        assert_eq!((r.lhs_mean(), r.rhs_mean()), (1.0, 1.0));
    }

    #[test]
    fn scaling_is_linear_per_sample() {
        let spec = ProcessSpec::Poisson { intensity: 1.0 };
        let w = Window::interval(-8.0, 8.0);
        let k = ShiftEdgeKernel::new(PointShiftSpec::NearestNeighbor).with_radius(3.0);
        let a = verify_mass_transport(&k, spec, E1, &w, 300, 9).unwrap();
        let b = verify_mass_transport(&k.scaled(4.0), spec, E1, &w, 300, 9).unwrap();
        assert_eq!(b.lhs_mean(), 4.0 * a.lhs_mean());
        assert_eq!(b.rhs_mean(), 4.0 * a.rhs_mean());
    }

    #[test]
    fn lattice_mecke_and_reverse_are_exact() {
        let spec = ProcessSpec::Lattice { spacing: 1.0 };
        let w = Window::interval(-10.0, 10.0);
        let m = mecke_invariance_test(&PointShiftSpec::RightNeighbor, spec, E1, &w, 50, 2).unwrap();
        assert!(m.statistics.iter().all(|s| s.mean_difference() == 0.0 && s.ks_statistic == 0.0));
        let r = reciprocal_vs_reverse_test(&PointShiftSpec::RightNeighbor, spec, E1, &w, 50, 2).unwrap();
        assert_eq!(r.statistics[0].palm.mean, -1.0);
        assert_eq!(r.statistics[0].shifted.mean, -1.0);
    }

    #[test]
    fn reverse_test_rejects_non_bijective_shift() {
        let spec = ProcessSpec::Poisson { intensity: 1.0 };
        let w = Window::Whole;
        let r = reciprocal_vs_reverse_test(&PointShiftSpec::NearestNeighbor, spec, GroupModel::Torus { dim: 2 }, &w, 200, 2);
        assert!(matches!(r, Err(Error::NotBijective(_))));
    }

    #[test]
    fn identity_reciprocal_is_identity() {
        let spec = ProcessSpec::Poisson { intensity: 2.0 };
        let r = reciprocal_vs_reverse_test(&PointShiftSpec::Identity, spec, GroupModel::AxB, &Window::ab_box(0.5, 2.0, -1.0, 1.0), 50, 2).unwrap();
        assert_eq!(r.statistics[0].palm.mean, 1.0);
        assert_eq!(r.statistics[1].shifted.mean, 0.0);
    }

    #[test]
    fn dual_estimators_of_one() {
        let spec = ProcessSpec::Poisson { intensity: 1.0 };
        let f = functionals::one();
        let r = dual_palm_consistency(&f, spec, E1, &Window::interval(-10.0, 10.0), &Window::interval(-5.0, 5.0), 4000, 4).unwrap();
        assert_eq!(r.lhs_mean(), 1.0);
        assert_eq!(r.verdict, Verdict::Consistent);
    }
}
