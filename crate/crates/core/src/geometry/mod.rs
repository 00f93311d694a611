//! The complexified connection: holomorphic geodesic flow in complex time,
//! `exp^C` and its differential, Jacobi fields and parallel transport.

mod flow;
mod spec;

pub use flow::{
    condition_number, curvature_at, exp_c, exp_c_differential, flow_generic, flow_transport_generic, geodesic_flow,
    geodesic_flow_path, jacobi_field, max_abs, max_curvature, max_diff, parallel_transport, to_complex, FlowJacobian,
    JacobiSample, PhaseState,
};
pub use spec::{signature_of, ChartDomain, ManifoldSpec, DEFAULT_BLOWUP_BOUND, DEFAULT_TUBE_RADIUS};

/// Default RK4 step count per straight complex-time segment.
pub const DEFAULT_STEPS: usize = 200;

#[cfg(test)]
mod tests;
