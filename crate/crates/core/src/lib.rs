//! Point-shifts of stationary point processes on concrete groups.
//!
//! The crate samples Poisson and lattice processes on Euclidean space, the
//! ax+b group and the flat torus, evaluates point-shifts on finite windows
//! with explicit censoring, analyses the graphs they induce, and estimates
//! both sides of Palm-calculus identities by Monte Carlo.

pub mod error;
pub mod graph;
pub mod group;
pub mod network;
pub mod rng;
pub mod sampling;
pub mod shift;
pub mod stats;
pub mod transport;
pub mod window;

pub use error::{Error, Result};
pub use group::{Coords, GroupElement, GroupModel};
pub use rng::{ensemble, RngStream};
pub use sampling::{
    palm_expectation_window_average, palm_sample, palm_sample_lattice, palm_sample_slivnyak,
    sample, separation_check, PointConfiguration, ProcessSpec,
};
pub use shift::{
    apply, inbound_complete, isomodularity_defect, iterate, preimages, reverse, Orbit,
    PointShiftSpec, ShiftEvaluation,
};
pub use stats::Estimate;
pub use window::{
    contains, contains_window, haar_mass, haar_mass_quadrature, right_translate_window,
    strip_tail_mass, translate_window, Window,
};
pub use graph::{
    build_graph, check_finite_component, components, descendant_count, fixed_point_preimages,
    parallelogram_mass, preimage_decades, strip_fixed_point_stats, ComponentClass,
    ComponentRecord, Foil, ShiftGraph, StripStats,
};
pub use transport::{
    dual_palm_consistency, functionals, mass_flow_check, mecke_invariance_test,
    reciprocal_vs_reverse_test, verify_mass_transport, CenteredKernel, MeckeReport,
    ShiftEdgeKernel, StatisticComparison, Support, TransportReport, Verdict, Weighting,
    ZeroKernel,
};
pub use network::{
    embedding_map, network_from_config, parse_network, reconstruct, unimodularity_check,
    write_network, GraphRule, RootedNetwork,
};
