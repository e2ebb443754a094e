//! Phantom DTDs, Rician noise and the Monte-Carlo accuracy/precision
//! protocol.

mod monte_carlo;
mod noise;
mod phantoms;
mod quadrature;

pub use monte_carlo::{
    quantile, realization_seed, run_monte_carlo, run_realization, summarize, DescriptorSummary,
    Estimate, Fitter, McSummary, Realization, DEFAULT_REALIZATIONS,
};
pub use noise::{add_rician, rician_sample};
pub use phantoms::{
    phantom_aniso, phantom_aniso_from_mean, phantom_bimodal_iso, phantom_mixed, AnisoShape,
    Phantom, PhantomResolution, BIMODAL_SIGMA, ANISO_D_ISO,
};
pub use quadrature::{
    fibonacci_sphere, normal_nodes, truncated_normal_nodes, watson_axis_order, watson_op, watson_weights,
};
