//! Schedule synthesis and simulation for single-excitation state generation
//! on pulsed XX spin networks.
//!
//! A quasi-one-dimensional network of 2N sites decomposes, in a ± pair
//! basis, into N independent two-site chains. Interleaving free evolution
//! with Z pulses walks a single excitation down the chains, and the exact
//! closed form of that walk can be inverted: for any target probability
//! profile there are coupling strengths Jₖ, pulse intervals tₖ, and a local
//! phase layer that generate the target exactly. This crate provides
//!
//! * [`chain`] — network Hamiltonian, virtual-basis transform, pulse
//!   operators;
//! * [`synthesis`] — the inverse problem: profiles → schedules → phases;
//! * [`dynamics`] — closed-form and dense propagation engines plus
//!   fidelity;
//! * [`states`] — stock target profiles (uniform, Gaussian, random);
//! * [`sensitivity`] — pulse-timing error sweeps and 1/N precision
//!   scaling;
//! * [`formats`] — schedule JSON and plot-ready CSV emission.

pub mod chain;
pub mod dynamics;
pub mod error;
pub mod formats;
pub mod sensitivity;
pub mod states;
pub mod synthesis;

pub use chain::{
    build_network_hamiltonian, pulse_operator, virtual_basis_transform, ChainSize,
    CouplingProfile, NetworkHamiltonian, SingleExcitationState,
};
pub use dynamics::{
    evolve_virtual_closed_form, expm_symmetric, fidelity, propagate_full, sample_evolution,
    two_site_rotation, Propagator, TraceSample,
};
pub use error::{Error, Result};
pub use sensitivity::{
    fidelity_curve, perturbed_intervals, scaling_analysis, tolerance_threshold, FidelityCurve,
    ScalingRow, SensitivityReport, SweepContext, Threshold,
};
pub use states::{
    custom_profile_from_file, gaussian_state_profile, random_profile, w_state_profile,
    ProfileFamily,
};
pub use synthesis::{
    coupling_bounds_check, phase_corrections, residual_weights, site_to_virtual_probabilities,
    solve_schedule, synthesize, target_state, virtual_to_site_probabilities, BoundsReport,
    ResidualWeights, SiteProbabilityProfile, SynthesisSchedule, VirtualProbabilityProfile,
};
