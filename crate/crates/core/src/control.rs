//! Steering laws and checks on the gains they are run with.
//!
//! Balancing law: `u_k = ω₀ − K_k ∂U/∂θ_k = ω₀ − (K_k/N) Σ_j sin(θ_j − θ_k)`.
//!
//! Splay law: `u_k = ω₀ − K_k ∂W/∂θ_k = ω₀ − (K_k/N) Σ_j Σ_m (1/m) sin(m(θ_j − θ_k))`
//! with `m = 1..⌊N/2⌋`. For `N ∈ {2, 3}` there is a single harmonic and the two
//! laws coincide exactly.
//!
//! Gain checks are advisory: [`crate::sim`] runs with any finite gains, and the
//! checks here only report which sufficient conditions hold.

use serde::{Deserialize, Serialize};

use crate::angle::wrap_pi;
use crate::model::{
    grad_u_into, grad_w_into, order_parameter, GainCondition, GainVector, Point, SwarmState,
};
use crate::{Error, Result};

/// Angular tolerance for treating an agent as lying on the `Ψ₀` axis.
pub const ON_AXIS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    #[default]
    Balance,
    Splay,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlLaw {
    pub kind: LawKind,
    /// Common turn rate ω₀ in rad/s.
    pub omega0: f64,
    pub gains: GainVector,
}

impl ControlLaw {
    pub fn balance(gains: GainVector, omega0: f64) -> Self {
        ControlLaw {
            kind: LawKind::Balance,
            omega0,
            gains,
        }
    }

    pub fn splay(gains: GainVector, omega0: f64) -> Self {
        ControlLaw {
            kind: LawKind::Splay,
            omega0,
            gains,
        }
    }
}

/// Evaluates the law at `headings` into `out` without allocating.
pub(crate) fn control_into(headings: &[f64], law: &ControlLaw, out: &mut [f64]) {
    match law.kind {
        LawKind::Balance => grad_u_into(headings, out),
        LawKind::Splay => grad_w_into(headings, out),
    }
    for (u, &k) in out.iter_mut().zip(law.gains.as_slice()) {
        *u = law.omega0 - k * *u;
    }
}

/// Turn-rate commands `u_k` in rad/s.
pub fn control_input(state: &SwarmState, law: &ControlLaw) -> Result<Vec<f64>> {
    let n = state.n();
    if law.gains.len() != n {
        return Err(Error::DimensionMismatch {
            what: "gains",
            expected: n,
            got: law.gains.len(),
        });
    }
    if n < 2 {
        return Err(Error::TooFewAgents { min: 2, got: n });
    }
    let mut out = vec![0.0; n];
    control_into(&state.headings, law, &mut out);
    Ok(out)
}

/// Agents split by which side of the initial order-parameter axis they lie on.
/// Indices are 0-based and ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgroupPartition {
    /// Phase `Ψ₀` of the initial order parameter.
    pub reference_psi: f64,
    /// `0 < Ψ₀ − θ_k0 < π`: clockwise of the axis.
    pub subgroup1: Vec<usize>,
    /// `−π < Ψ₀ − θ_k0 < 0`: anticlockwise of the axis.
    pub subgroup2: Vec<usize>,
    /// On the axis, or exactly opposite it. Gains here are unconstrained.
    pub on_axis: Vec<usize>,
    /// Wrapped `Ψ₀ − θ_k0` for every agent.
    pub offsets: Vec<f64>,
}

pub(crate) fn check_cyclic_order(headings: &[f64]) -> Result<()> {
    if headings.len() < 2 {
        return Err(Error::TooFewAgents {
            min: 2,
            got: headings.len(),
        });
    }
    if headings.iter().any(|h| !h.is_finite()) {
        return Err(Error::NonFinite("initial headings"));
    }
    if headings.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "initial headings must be strictly increasing".into(),
        ));
    }
    let span = headings[headings.len() - 1] - headings[0];
    if span >= crate::angle::TAU {
        return Err(Error::InvalidInput(
            "initial headings must span less than one turn".into(),
        ));
    }
    Ok(())
}

/// Splits agents about the initial order-parameter direction.
///
/// Fails with [`Error::PsiUndefined`] when the initial configuration is
/// already balanced, in which case the partition does not exist.
pub fn partition_subgroups(initial_headings: &[f64]) -> Result<SubgroupPartition> {
    check_cyclic_order(initial_headings)?;
    let p0 = order_parameter(initial_headings, 1)?;
    let psi0 = p0.psi().ok_or(Error::PsiUndefined)?;

    let mut part = SubgroupPartition {
        reference_psi: psi0,
        subgroup1: Vec::new(),
        subgroup2: Vec::new(),
        on_axis: Vec::new(),
        offsets: Vec::with_capacity(initial_headings.len()),
    };
    for (k, &th) in initial_headings.iter().enumerate() {
        let d = wrap_pi(psi0 - th);
        part.offsets.push(d);
        if d.abs() <= ON_AXIS_TOL || d.abs() >= std::f64::consts::PI - ON_AXIS_TOL {
            part.on_axis.push(k);
        } else if d > 0.0 {
            part.subgroup1.push(k);
        } else {
            part.subgroup2.push(k);
        }
    }
    Ok(part)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Assumption1 {
    Satisfied,
    NegativeGain { agent: usize },
    /// Gains decrease moving away from the axis between these two agents
    /// (ascending indices) of the given subgroup.
    OrderViolated { subgroup: u8, pair: (usize, usize) },
}

impl Assumption1 {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, Assumption1::Satisfied)
    }
}

/// Gains must be non-negative and non-decreasing with angular distance from
/// the `Ψ₀` axis within each subgroup.
pub fn validate_assumption1(
    partition: &SubgroupPartition,
    gains: &GainVector,
) -> Result<Assumption1> {
    let n = partition.offsets.len();
    if gains.len() != n {
        return Err(Error::DimensionMismatch {
            what: "gains",
            expected: n,
            got: gains.len(),
        });
    }
    let k = gains.as_slice();
    for (label, group) in [(1u8, &partition.subgroup1), (2u8, &partition.subgroup2)] {
        if let Some(&agent) = group.iter().find(|&&a| k[a] < 0.0) {
            return Ok(Assumption1::NegativeGain { agent });
        }
        let mut by_distance = group.clone();
        by_distance.sort_by(|&a, &b| {
            partition.offsets[a]
                .abs()
                .total_cmp(&partition.offsets[b].abs())
        });
        for w in by_distance.windows(2) {
            let (near, far) = (w[0], w[1]);
            let tie = (partition.offsets[far].abs() - partition.offsets[near].abs()) <= ON_AXIS_TOL;
            if !tie && k[far] < k[near] {
                return Ok(Assumption1::OrderViolated {
                    subgroup: label,
                    pair: (near.min(far), near.max(far)),
                });
            }
        }
    }
    Ok(Assumption1::Satisfied)
}

/// Checks the gains against one of the sufficient conditions for convergence
/// to a balanced formation.
pub fn validate_theorem1_condition(gains: &GainVector, mode: GainCondition) -> Result<()> {
    let k = gains.as_slice();
    let n = k.len();
    match mode {
        GainCondition::Unchecked => Ok(()),
        GainCondition::AllPositive => match k.iter().position(|&g| g <= 0.0) {
            Some(i) => Err(Error::GainCondition(format!(
                "gain of agent {} is {} (must be positive)",
                i + 1,
                k[i]
            ))),
            None => Ok(()),
        },
        GainCondition::AllowZeros => {
            if let Some(i) = k.iter().position(|&g| g < 0.0) {
                return Err(Error::GainCondition(format!(
                    "gain of agent {} is negative",
                    i + 1
                )));
            }
            let zeros = k.iter().filter(|&&g| g == 0.0).count();
            if zeros > n / 2 {
                return Err(Error::GainCondition(format!(
                    "{zeros} zero gains exceed floor(N/2) = {}",
                    n / 2
                )));
            }
            Ok(())
        }
        GainCondition::TwoAgentSum => {
            if n != 2 {
                return Err(Error::InvalidInput(format!(
                    "two-agent sum condition needs N = 2, got {n}"
                )));
            }
            if k[0] + k[1] > 0.0 {
                Ok(())
            } else {
                Err(Error::GainCondition(format!(
                    "K1 + K2 = {} is not positive",
                    k[0] + k[1]
                )))
            }
        }
    }
}

/// Center of the circle traced by agent `k` turning at constant rate ω₀:
/// `c_k = r_k + i ω₀⁻¹ e^{iθ_k}`.
pub fn circle_center(state: &SwarmState, k: usize, omega0: f64) -> Result<Point> {
    if omega0 == 0.0 {
        return Err(Error::ZeroOmega);
    }
    if k >= state.n() {
        return Err(Error::InvalidInput(format!(
            "agent index {k} out of range for N = {}",
            state.n()
        )));
    }
    let (s, c) = state.headings[k].sin_cos();
    let r = state.positions[k];
    Ok(Point::new(r.x - s / omega0, r.y + c / omega0))
}
