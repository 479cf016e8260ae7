//! Phase balancing of planar unit-speed agents with heterogeneous controller gains.
//!
//! Each agent moves at unit speed with a steerable heading:
//!
//! ```text
//! dr_k/dt = e^{iθ_k}        dθ_k/dt = u_k
//! ```
//!
//! The group is *balanced* when the phase order parameter
//! `p_θ = (1/N) Σ e^{iθ_k}` vanishes, which is exactly when the centroid stops
//! moving. The steering law
//!
//! ```text
//! u_k = ω₀ − K_k ∂U/∂θ_k,      U(θ) = (N/2) |p_θ|²
//! ```
//!
//! descends the balancing potential with a per-agent gain `K_k`. Choosing the
//! gains unequally selects *which* balanced arrangement is reached.
//!
//! The crate is split into:
//!
//! * [`model`]: order parameters, potentials, gradients, Hessian.
//! * [`control`]: steering laws and gain-condition checks.
//! * [`sim`]: deterministic fixed-step integration and trace capture.
//! * [`analysis`]: closed-form predictions (reference direction, reachable
//!   set, perturbation bounds, gain synthesis, two-agent trajectories,
//!   convergence points and their loci).
//! * [`scenario`] and [`report`]: configuration, pinned fixtures and the
//!   CSV/JSON output formats used by the `phasebal` binary.
//!
//! All angles are radians and headings are kept unwrapped (on the real line)
//! everywhere; wrapping into `(−π, π]` is a presentation concern.
//!
//! ```
//! use phase_balance::model::{order_parameter, potential_u};
//!
//! let balanced = [0.0, std::f64::consts::PI];
//! assert!(order_parameter(&balanced, 1).unwrap().magnitude < 1e-15);
//! assert!(potential_u(&balanced).unwrap().value < 1e-15);
//! ```

pub mod analysis;
pub mod angle;
pub mod control;
mod error;
pub mod model;
pub mod quadrature;
pub mod report;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/order-parameter.md")]
    mod order_parameter {}
    #[doc = include_str!("../../../book/src/steering.md")]
    mod steering {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/reference-direction.md")]
    mod reference_direction {}
    #[doc = include_str!("../../../book/src/two-agents.md")]
    mod two_agents {}
    #[doc = include_str!("../../../book/src/splay.md")]
    mod splay {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
