use palmshift_core::graph::ComponentClass;
use palmshift_core::rng::ensemble;
use palmshift_core::stats::Estimate;
use palmshift_core::transport::{functionals, Functional, SE_MULTIPLE};
use palmshift_core::*;

use crate::report::{Outcome, ReportRecord, StatisticRecord};
use crate::spec::{ExperimentKind, ExperimentSpec, FunctionalSpec, NetworkMass};
use crate::CliError;

type CliResult<T> = std::result::Result<T, CliError>;

const ROUND_TRIP_TOLERANCE: f64 = 1e-12;
const STABILIZATION_TARGET: f64 = 0.99;

fn stat(name: &str, est: &Estimate, verdict: Outcome, censored: usize) -> StatisticRecord {
    StatisticRecord {
        name: name.to_string(),
        estimate: est.mean,
        std_error: est.se,
        verdict,
        censored,
    }
}

fn value(name: &str, v: f64, verdict: Outcome) -> StatisticRecord {
    StatisticRecord {
        name: name.to_string(),
        estimate: v,
        std_error: f64::NAN,
        verdict,
        censored: 0,
    }
}

fn two_sided(r: &TransportReport, lhs: &str, rhs: &str) -> Vec<StatisticRecord> {
    let v = Outcome::from(r.verdict);
    vec![stat(lhs, &r.lhs, v, r.lhs_censored), stat(rhs, &r.rhs, v, r.rhs_censored)]
}

fn comparison_rows(r: &MeckeReport) -> Vec<StatisticRecord> {
    let mut rows = Vec::new();
    for s in &r.statistics {
        rows.push(StatisticRecord {
            name: format!("{}.mean_difference", s.name),
            estimate: s.mean_difference(),
            std_error: s.palm.se.hypot(s.shifted.se),
            verdict: Outcome::check(s.means_agree()),
            censored: r.palm_censored + r.shifted_censored,
        });
        rows.push(value(&format!("{}.ks_p_value", s.name), s.ks_p_value, Outcome::check(s.ks_passes())));
    }
    rows.push(value("overall", f64::NAN, Outcome::from(r.verdict)));
    rows
}

fn shift_of(spec: &ExperimentSpec) -> CliResult<PointShiftSpec> {
    spec.shift
        .ok_or_else(|| CliError::Config(format!("`{}` needs `shift.kind`", spec.kind.name())))
}

/// Runs one experiment. Deterministic given the experiment spec and
/// independent of the number of worker threads.
pub fn run(spec: &ExperimentSpec) -> CliResult<ReportRecord> {
    let (model, process, window, n, seed) = (spec.model, spec.process, &spec.window, spec.n_samples, spec.seed);
    let statistics = match spec.kind {
        ExperimentKind::Sample => sample_experiment(spec)?,
        ExperimentKind::MassTransport => {
            let mut k = ShiftEdgeKernel::new(shift_of(spec)?).with_weighting(spec.weighting);
            if let Some(r) = spec.kernel_radius {
                k = k.with_radius(r);
            }
            two_sided(&verify_mass_transport(&k, process, model, window, n, seed)?, "mass_out", "mass_in")
        }
        ExperimentKind::MassFlow => two_sided(
            &mass_flow_check(&shift_of(spec)?, process, model, window, n, seed)?,
            "modular_inverse_image",
            "preimage_count",
        ),
        ExperimentKind::Mecke => comparison_rows(&mecke_invariance_test(&shift_of(spec)?, process, model, window, n, seed)?),
        ExperimentKind::ReciprocalReverse => {
            comparison_rows(&reciprocal_vs_reverse_test(&shift_of(spec)?, process, model, window, n, seed)?)
        }
        ExperimentKind::DualPalm => dual_palm_experiment(spec)?,
        ExperimentKind::Classify => classify_experiment(spec)?,
        ExperimentKind::StripCounterexample => strip_experiment(spec)?,
        ExperimentKind::EmbedRoundtrip => embed_experiment(spec)?,
        ExperimentKind::Unimodularity => unimodularity_experiment(spec)?,
    };
    Ok(ReportRecord {
        name: spec.name.clone(),
        kind: spec.kind.name().to_string(),
        seed,
        n_samples: n,
        config: spec.echo.clone(),
        statistics,
        duration_secs: None,
    })
}

fn sample_experiment(spec: &ExperimentSpec) -> CliResult<Vec<StatisticRecord>> {
    let mass = haar_mass(spec.model, &spec.window)?;
    let expected = match spec.process {
        ProcessSpec::Poisson { intensity } => intensity * mass,
        ProcessSpec::Lattice { spacing } => mass / spacing,
    };
    let rows: Vec<(f64, usize)> = ensemble(spec.seed, rng::tags::SAMPLE, spec.n_samples, |rng, _| {
        let c = sample(spec.process, spec.model, &spec.window, rng)?;
        Ok::<_, Error>((c.len() as f64, separation_check(&c, |p| p.coords()[0]).len()))
    })
    .into_iter()
    .collect::<std::result::Result<_, _>>()?;
    let counts: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let ties: usize = rows.iter().map(|r| r.1).sum();
    let est = Estimate::from_samples(&counts);
    let lattice = matches!(spec.process, ProcessSpec::Lattice { .. });
    let count_verdict = if lattice {
        // a lattice count differs from the mean by less than one point
        Outcome::check((est.mean - expected).abs() <= 1.0)
    } else if est.covers(expected, SE_MULTIPLE) {
        Outcome::Consistent
    } else {
        Outcome::Inconsistent
    };
    Ok(vec![
        stat("count", &est, count_verdict, 0),
        value("expected_count", expected, Outcome::Info),
        value("first_coordinate_ties", ties as f64, if lattice { Outcome::Info } else { Outcome::check(ties == 0) }),
    ])
}

fn dual_palm_experiment(spec: &ExperimentSpec) -> CliResult<Vec<StatisticRecord>> {
    let inner = spec.inner.as_ref().ok_or_else(|| CliError::Config("dual-palm needs `inner`".into()))?;
    let run = |f: &Functional<'_>| dual_palm_consistency(f, spec.process, spec.model, &spec.window, inner, spec.n_samples, spec.seed);
    let r = match spec.functional {
        Some(FunctionalSpec::One) => run(&functionals::one())?,
        Some(FunctionalSpec::CountIn) => {
            let region = spec.region.clone().ok_or_else(|| CliError::Config("missing `functional.region`".into()))?;
            run(&functionals::count_in(region))?
        }
        Some(FunctionalSpec::ModularOfInverseImage) => run(&functionals::modular_of_inverse_image(shift_of(spec)?))?,
        None => return Err(CliError::Config("dual-palm needs `functional.kind`".into())),
    };
    Ok(two_sided(&r, "slivnyak", "window_average"))
}

fn classify_experiment(spec: &ExperimentSpec) -> CliResult<Vec<StatisticRecord>> {
    let shift = shift_of(spec)?;
    // (components, certified FF, violations)
    let rows: Vec<(f64, f64, f64)> = ensemble(spec.seed, rng::tags::SAMPLE, spec.n_samples, |rng, _| {
        let c = sample(spec.process, spec.model, &spec.window, rng)?;
        let g = build_graph(&shift, &c)?;
        let comps = components(&g);
        let mut ff = 0.0;
        let mut bad = 0.0;
        for comp in &comps {
            if comp.class == ComponentClass::FF {
                ff += 1.0;
                let foils_match = comp.cycle.as_ref().map(Vec::len) == Some(comp.foils.len());
                if !foils_match || check_finite_component(&g, comp).is_err() {
                    bad += 1.0;
                }
            }
        }
        Ok::<_, Error>((comps.len() as f64, ff, bad))
    })
    .into_iter()
    .collect::<std::result::Result<_, _>>()?;
    let col = |f: fn(&(f64, f64, f64)) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let total: f64 = col(|r| r.0).iter().sum();
    let ff: f64 = col(|r| r.1).iter().sum();
    let violations: f64 = col(|r| r.2).iter().sum();
    Ok(vec![
        stat("components_per_config", &Estimate::from_samples(&col(|r| r.0)), Outcome::Info, 0),
        value("certified_ff_fraction", if total > 0.0 { ff / total } else { f64::NAN }, Outcome::Info),
        value("censored_components", total - ff, Outcome::Info),
        value("ff_violations", violations, Outcome::check(violations == 0.0)),
    ])
}

fn strip_experiment(spec: &ExperimentSpec) -> CliResult<Vec<StatisticRecord>> {
    let shift = shift_of(spec)?;
    let PointShiftSpec::Strip { delta, .. } = shift else {
        return Err(CliError::Config("strip-counterexample needs the strip shift".into()));
    };
    let stats: Vec<StripStats> = ensemble(spec.seed, rng::tags::PALM, spec.n_samples, |rng, _| {
        let c = palm_sample(spec.process, spec.model, &spec.window, rng)?;
        strip_fixed_point_stats(&shift, &c, spec.max_steps)
    })
    .into_iter()
    .collect::<std::result::Result<_, _>>()?;
    let censored = stats.iter().filter(|s| s.censored).count();
    let occupancy: Vec<f64> = stats.iter().filter(|s| !s.censored).map(|s| s.occupancy_sum).collect();
    let occ = Estimate::from_samples(&occupancy);
    let rate = 2.0 * delta * spec.process.intensity();
    let occ_verdict = if rate < 1.0 {
        Outcome::check(occ.mean <= rate / (1.0 - rate) + SE_MULTIPLE * occ.se)
    } else {
        Outcome::Info
    };
    let stable: Vec<f64> = stats
        .iter()
        .map(|s| if s.stabilized && s.steps <= spec.max_steps { 1.0 } else { 0.0 })
        .collect();
    let stable = Estimate::from_samples(&stable);
    let steps: Vec<f64> = stats.iter().filter(|s| s.stabilized).map(|s| s.steps as f64).collect();
    Ok(vec![
        stat("occupancy_sum", &occ, occ_verdict, censored),
        stat("stabilized_fraction", &stable, Outcome::check(stable.mean >= STABILIZATION_TARGET), censored),
        stat("steps_to_fixed_point", &Estimate::from_samples(&steps), Outcome::Info, censored),
    ])
}

fn embed_experiment(spec: &ExperimentSpec) -> CliResult<Vec<StatisticRecord>> {
    let rule = spec.rule.ok_or_else(|| CliError::Config("missing `network.rule`".into()))?;
    let m = spec.model;
    let rows: Vec<Option<f64>> = ensemble(spec.seed, rng::tags::NETWORK, spec.n_samples, |rng, _| {
        let c = palm_sample(spec.process, m, &spec.window, rng)?;
        let net = network_from_config(&c, rule)?;
        let mut dev: f64 = 0.0;
        for v in 0..c.len() {
            let seen = reconstruct(&net.rerooted(v)?)?;
            let want = c.recentered(v)?;
            if seen.len() != want.len() {
                return Ok(None);
            }
            for (p, q) in seen.points.iter().zip(&want.points) {
                dev = dev.max(m.coord_deviation(p, q));
            }
        }
        Ok::<_, Error>(Some(dev))
    })
    .into_iter()
    .collect::<std::result::Result<_, _>>()?;
    let collapsed = rows.iter().filter(|r| r.is_none()).count();
    let worst = rows.iter().flatten().copied().fold(0.0, f64::max);
    let failures = rows.iter().flatten().filter(|&&d| d > ROUND_TRIP_TOLERANCE).count();
    Ok(vec![
        value("max_deviation", worst, Outcome::check(worst <= ROUND_TRIP_TOLERANCE)),
        value("failures", failures as f64, Outcome::check(failures == 0)),
        value("collapsed", collapsed as f64, Outcome::check(collapsed == 0)),
    ])
}

fn unimodularity_experiment(spec: &ExperimentSpec) -> CliResult<Vec<StatisticRecord>> {
    let rule = spec.rule.ok_or_else(|| CliError::Config("missing `network.rule`".into()))?;
    let m = spec.model;
    let sampler = |rng: &mut _| -> Result<Option<RootedNetwork>> {
        let c = palm_sample(spec.process, m, &spec.window, rng)?;
        match network_from_config(&c, rule) {
            Ok(net) => Ok(Some(net)),
            Err(Error::Disconnected) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let e = m.identity();
    let weight = |net: &RootedNetwork, x: usize, y: usize| -> f64 {
        match (spec.network_mass, net.mark(x, y)) {
            (_, None) => 0.0,
            (NetworkMass::DegreeNormalized, Some(_)) => 1.0,
            (NetworkMass::Kernel, Some(mark)) => {
                let d = if m == GroupModel::AxB {
                    mark.a().ln().hypot(mark.b())
                } else {
                    m.distance(&e, mark)
                };
                (-(d / spec.bandwidth).powi(2)).exp()
            }
        }
    };
    let g = |net: &RootedNetwork, x: usize, y: usize| {
        let total: f64 = net.adjacency[x].iter().map(|&(z, _)| weight(net, x, z)).sum();
        if total > 0.0 {
            weight(net, x, y) / total
        } else {
            0.0
        }
    };
    let r = unimodularity_check(sampler, g, spec.network_radius, spec.n_samples, spec.seed)?;
    Ok(two_sided(&r, "mass_out", "mass_in"))
}
