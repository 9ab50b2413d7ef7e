use std::collections::BTreeMap;

use palmshift_core::shift::DEFAULT_STRIP_A_MAX;
use palmshift_core::{GroupModel, PointShiftSpec, ProcessSpec, Weighting, Window};

use crate::config::Config;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Sample,
    MassTransport,
    MassFlow,
    Mecke,
    ReciprocalReverse,
    DualPalm,
    Classify,
    StripCounterexample,
    EmbedRoundtrip,
    Unimodularity,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::Sample,
        ExperimentKind::MassTransport,
        ExperimentKind::MassFlow,
        ExperimentKind::Mecke,
        ExperimentKind::ReciprocalReverse,
        ExperimentKind::DualPalm,
        ExperimentKind::Classify,
        ExperimentKind::StripCounterexample,
        ExperimentKind::EmbedRoundtrip,
        ExperimentKind::Unimodularity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Sample => "sample",
            ExperimentKind::MassTransport => "mass-transport",
            ExperimentKind::MassFlow => "mass-flow",
            ExperimentKind::Mecke => "mecke",
            ExperimentKind::ReciprocalReverse => "reciprocal-reverse",
            ExperimentKind::DualPalm => "dual-palm",
            ExperimentKind::Classify => "classify",
            ExperimentKind::StripCounterexample => "strip-counterexample",
            ExperimentKind::EmbedRoundtrip => "embed-roundtrip",
            ExperimentKind::Unimodularity => "unimodularity",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
            CliError::Config(format!("unknown experiment `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FunctionalSpec {
    One,
    CountIn,
    ModularOfInverseImage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NetworkMass {
    /// `1/deg(x)` to each neighbour.
    DegreeNormalized,
    /// Gaussian weight of the mark length, normalized over neighbours.
    Kernel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    pub model: GroupModel,
    pub process: ProcessSpec,
    pub window: Window,
    /// Inner window for dual-palm.
    pub inner: Option<Window>,
    pub shift: Option<PointShiftSpec>,
    pub kernel_radius: Option<f64>,
    pub weighting: Weighting,
    pub functional: Option<FunctionalSpec>,
    pub region: Option<Window>,
    pub rule: Option<palmshift_core::GraphRule>,
    pub network_radius: usize,
    pub network_mass: NetworkMass,
    pub bandwidth: f64,
    pub max_steps: usize,
    pub n_samples: usize,
    pub seed: u64,
    /// Config entries as read, after any seed override.
    pub echo: BTreeMap<String, String>,
}

fn model(c: &Config) -> Result<GroupModel, CliError> {
    let kind = c.str("model.kind")?;
    let dim = c.opt_u64("model.dim")?;
    let m = match kind.as_str() {
        "euclidean" => GroupModel::Euclidean { dim: dim.unwrap_or(1) as usize },
        "torus" => GroupModel::Torus { dim: dim.unwrap_or(2) as usize },
        "ax_b" => {
            if dim.is_some_and(|d| d != 2) {
                return Err(CliError::Config("`model.dim` must be 2 for ax_b".into()));
            }
            GroupModel::AxB
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown `model.kind` `{other}`; expected euclidean, torus or ax_b"
            )))
        }
    };
    if m.dim() == 0 {
        return Err(CliError::Config("`model.dim` must be positive".into()));
    }
    Ok(m)
}

fn process(c: &Config) -> Result<ProcessSpec, CliError> {
    let p = match c.opt_str("process.kind")?.as_deref().unwrap_or("poisson") {
        "poisson" => ProcessSpec::Poisson {
            intensity: c.opt_f64("process.intensity")?.unwrap_or(1.0),
        },
        "lattice" => ProcessSpec::Lattice {
            spacing: c.opt_f64("process.spacing")?.unwrap_or(1.0),
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown `process.kind` `{other}`; expected poisson or lattice"
            )))
        }
    };
    p.validate()?;
    Ok(p)
}

/// Window described by the keys under `prefix`.
fn read_window(c: &Config, prefix: &str, model: GroupModel) -> Result<Window, CliError> {
    let key = |k: &str| format!("{prefix}.{k}");
    let kind = match c.opt_str(&key("kind"))? {
        Some(k) => k,
        None if matches!(model, GroupModel::Torus { .. }) => "whole".into(),
        None => return Err(CliError::Config(format!("missing `{}`", key("kind")))),
    };
    let w = match kind.as_str() {
        "whole" => Window::Whole,
        "interval" => Window::interval(c.f64(&key("lo"))?, c.f64(&key("hi"))?),
        "box" => {
            let lo = c.f64_list(&key("lo"))?;
            let hi = c.f64_list(&key("hi"))?;
            Window::boxed(&lo, &hi)
        }
        "cube" => Window::cube(model.dim(), c.f64(&key("r"))?),
        "ab_box" => Window::ab_box(
            c.f64(&key("a_lo"))?,
            c.f64(&key("a_hi"))?,
            c.f64(&key("b_lo"))?,
            c.f64(&key("b_hi"))?,
        ),
        "cone" => Window::Cone {
            apex_b: c.opt_f64(&key("apex_b"))?.unwrap_or(0.0),
            slope: c.f64(&key("slope"))?,
            a_lo: c.f64(&key("a_lo"))?,
            a_hi: c.f64(&key("a_hi"))?,
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown `{}` `{other}`; expected whole, interval, box, cube, ab_box or cone",
                key("kind")
            )))
        }
    };
    w.validate(model)
        .map_err(|e| CliError::Config(format!("`{prefix}`: {e}")))?;
    Ok(w)
}

fn shift(c: &Config, model: GroupModel) -> Result<Option<PointShiftSpec>, CliError> {
    let Some(kind) = c.opt_str("shift.kind")? else {
        return Ok(None);
    };
    let s = match kind.as_str() {
        "strip" => PointShiftSpec::Strip {
            delta: c.f64("shift.delta")?,
            a_max: c.opt_f64("shift.a_max")?.unwrap_or(DEFAULT_STRIP_A_MAX),
        },
        "right_neighbor" => PointShiftSpec::RightNeighbor,
        "nearest_neighbor" => PointShiftSpec::NearestNeighbor,
        "identity" => PointShiftSpec::Identity,
        other => {
            return Err(CliError::Config(format!(
                "unknown `shift.kind` `{other}`; expected strip, right_neighbor, nearest_neighbor or identity"
            )))
        }
    };
    s.validate(model)
        .map_err(|e| CliError::Config(format!("`shift`: {e}")))?;
    Ok(Some(s))
}

impl ExperimentSpec {
    /// Reads and validates a spec; `name` is used when the config has none.
    pub fn from_config(c: &Config, name: &str) -> Result<Self, CliError> {
        let kind = ExperimentKind::parse(&c.str("experiment")?)?;
        let name = c.opt_str("name")?.unwrap_or_else(|| name.to_string());
        let model = model(c)?;
        let process = process(c)?;
        let window = read_window(c, "window", model)?;
        let shift = shift(c, model)?;
        let need_shift = matches!(
            kind,
            ExperimentKind::MassTransport
                | ExperimentKind::MassFlow
                | ExperimentKind::Mecke
                | ExperimentKind::ReciprocalReverse
                | ExperimentKind::Classify
                | ExperimentKind::StripCounterexample
        );
        if need_shift && shift.is_none() {
            return Err(CliError::Config(format!("`{}` needs `shift.kind`", kind.name())));
        }
        let mut spec = ExperimentSpec {
            name,
            kind,
            model,
            process,
            window,
            inner: None,
            shift,
            kernel_radius: None,
            weighting: Weighting::Unit,
            functional: None,
            region: None,
            rule: None,
            network_radius: 1,
            network_mass: NetworkMass::DegreeNormalized,
            bandwidth: 0.1,
            max_steps: 50,
            n_samples: c.opt_u64("n_samples")?.unwrap_or(1000) as usize,
            seed: c.opt_u64("seed")?.unwrap_or(1),
            echo: c.echo(),
        };
        if spec.n_samples == 0 {
            return Err(CliError::Config("`n_samples` must be positive".into()));
        }
        match kind {
            ExperimentKind::MassTransport => {
                spec.kernel_radius = c.opt_f64("kernel.radius")?;
                spec.weighting = match c.opt_str("kernel.weighting")?.as_deref().unwrap_or("unit") {
                    "unit" => Weighting::Unit,
                    "modular" => Weighting::Modular,
                    other => {
                        return Err(CliError::Config(format!(
                            "unknown `kernel.weighting` `{other}`; expected unit or modular"
                        )))
                    }
                };
            }
            ExperimentKind::DualPalm => {
                spec.inner = Some(read_window(c, "inner", model)?);
                spec.functional = Some(match c.str("functional.kind")?.as_str() {
                    "one" => FunctionalSpec::One,
                    "count_in" => {
                        spec.region = Some(read_window(c, "functional.region", model)?);
                        FunctionalSpec::CountIn
                    }
                    "modular_of_inverse_image" => {
                        if spec.shift.is_none() {
                            return Err(CliError::Config(
                                "`modular_of_inverse_image` needs `shift.kind`".into(),
                            ));
                        }
                        FunctionalSpec::ModularOfInverseImage
                    }
                    other => {
                        return Err(CliError::Config(format!(
                            "unknown `functional.kind` `{other}`; expected one, count_in or modular_of_inverse_image"
                        )))
                    }
                });
            }
            ExperimentKind::StripCounterexample => {
                if !matches!(spec.shift, Some(PointShiftSpec::Strip { .. })) {
                    return Err(CliError::Config("strip-counterexample needs `shift.kind = \"strip\"`".into()));
                }
                spec.max_steps = c.opt_u64("strip.max_steps")?.unwrap_or(50) as usize;
            }
            ExperimentKind::EmbedRoundtrip | ExperimentKind::Unimodularity => {
                spec.rule = Some(match c.opt_str("network.rule")?.as_deref().unwrap_or("complete") {
                    "complete" => palmshift_core::GraphRule::Complete,
                    "delaunay_1d" => palmshift_core::GraphRule::Delaunay1d,
                    "shift_graph" => palmshift_core::GraphRule::ShiftGraph(spec.shift.ok_or_else(|| {
                        CliError::Config("`network.rule = \"shift_graph\"` needs `shift.kind`".into())
                    })?),
                    other => {
                        return Err(CliError::Config(format!(
                            "unknown `network.rule` `{other}`; expected complete, delaunay_1d or shift_graph"
                        )))
                    }
                });
                if kind == ExperimentKind::Unimodularity {
                    spec.network_radius = c.opt_u64("network.radius")?.unwrap_or(1) as usize;
                    spec.network_mass = match c.opt_str("network.mass")?.as_deref().unwrap_or("degree_normalized") {
                        "degree_normalized" => NetworkMass::DegreeNormalized,
                        "kernel" => NetworkMass::Kernel,
                        other => {
                            return Err(CliError::Config(format!(
                                "unknown `network.mass` `{other}`; expected degree_normalized or kernel"
                            )))
                        }
                    };
                    spec.bandwidth = c.opt_f64("network.bandwidth")?.unwrap_or(0.1);
                    if spec.bandwidth.is_nan() || spec.bandwidth <= 0.0 {
                        return Err(CliError::Config("`network.bandwidth` must be positive".into()));
                    }
                }
            }
            _ => {}
        }
        c.finish()?;
        Ok(spec)
    }
}
