//! Closed-form predictions for two and three agents.
//!
//! Label agents in cyclic order and shift their initial headings by the
//! balanced spacing, `θ̃_k0 = θ_k0 − 2(k−1)π/N`. Because `Σ θ_k/K_k` is
//! conserved along the flow, the steady heading of agent 1 is
//!
//! ```text
//! θ_f = Σ λ_k θ̃_k0,      λ_k = (1/K_k) / Σ_j (1/K_j)
//! ```
//!
//! and agent `k` settles at `θ_f + 2(k−1)π/N`. With positive gains the weights
//! are convex, so `θ_f` is confined to `(min θ̃, max θ̃)`; two agents with
//! signed gains (`K₁ + K₂ > 0`) can reach any direction.
//!
//! [`two_agent`] has the explicit two-agent trajectories, the limit of the
//! centroid and the line those limits trace as the gains are scaled.

use serde::Serialize;

use crate::angle::TAU;
use crate::control::{check_cyclic_order, partition_subgroups, validate_assumption1, Assumption1};
use crate::model::GainVector;
use crate::{Error, Result};

pub mod two_agent;

pub use two_agent::{convergence_point, locus_line, two_agent_headings, ConvergencePoint, LocusLine, Slope, TwoAgentClosedForm};

/// Tolerance for treating two shifted headings, or an interval endpoint and a
/// bound, as equal.
pub const ENDPOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftedInitialHeadings {
    /// `θ̃_k0 = θ_k0 − 2(k−1)π/N`.
    pub theta_tilde: Vec<f64>,
    /// Smallest shifted heading, `θ̃_m0`.
    pub min: f64,
    /// Largest shifted heading, `θ̃_M0`.
    pub max: f64,
}

impl ShiftedInitialHeadings {
    pub fn is_degenerate(&self) -> bool {
        self.max - self.min <= ENDPOINT_TOL
    }
}

pub fn shifted_headings(theta0: &[f64]) -> Result<ShiftedInitialHeadings> {
    if theta0.is_empty() {
        return Err(Error::EmptyHeadings);
    }
    if theta0.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("initial headings"));
    }
    let n = theta0.len() as f64;
    let theta_tilde: Vec<f64> = theta0
        .iter()
        .enumerate()
        .map(|(k, &t)| t - k as f64 * TAU / n)
        .collect();
    let min = theta_tilde.iter().copied().fold(f64::INFINITY, f64::min);
    let max = theta_tilde.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ShiftedInitialHeadings {
        theta_tilde,
        min,
        max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    PositiveGains,
    TwoAgentSigned,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachabilityReport {
    /// Predicted steady heading of agent 1, `θ_f`, unwrapped.
    pub reference_direction: f64,
    /// Directions reachable in this regime.
    pub interval: Interval,
    pub regime: Regime,
    pub lambda: Vec<f64>,
    /// `θ_f + 2(k−1)π/N` for each agent.
    pub predicted_headings: Vec<f64>,
    pub shifted: ShiftedInitialHeadings,
    /// `None` when the initial order parameter vanishes and the check is skipped.
    pub assumption1: Option<Assumption1>,
}

fn require_small_group(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::OutOfScope(format!(
            "steady-direction formula holds for N = 2 or 3, got N = {n}"
        )))
    }
}

fn check_gains(theta0: &[f64], gains: &GainVector) -> Result<()> {
    if gains.len() != theta0.len() {
        return Err(Error::DimensionMismatch {
            what: "gains",
            expected: theta0.len(),
            got: gains.len(),
        });
    }
    match gains.as_slice().iter().position(|&k| k == 0.0) {
        Some(index) => Err(Error::ZeroGain { index }),
        None => Ok(()),
    }
}

fn assumption1_for(theta0: &[f64], gains: &GainVector) -> Result<Option<Assumption1>> {
    match partition_subgroups(theta0) {
        Ok(part) => Ok(Some(validate_assumption1(&part, gains)?)),
        Err(Error::PsiUndefined) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Predicts the steady heading of agent 1 and the set it could have been
/// steered to.
///
/// `theta0` must be in cyclic order (strictly increasing, span under one
/// turn). Positive gains must satisfy the ordering assumption of
/// [`validate_assumption1`]; signed gains are only handled for two agents with
/// `K₁ + K₂ > 0`.
///
/// ```
/// use phase_balance::analysis::predict_reference_direction;
/// use phase_balance::model::GainVector;
///
/// let theta0 = [0.0, 120f64.to_radians()];
/// let gains = GainVector::new(vec![3.0, -1.0]).unwrap();
/// let report = predict_reference_direction(&theta0, &gains).unwrap();
/// assert!((report.reference_direction.to_degrees() + 90.0).abs() < 1e-9);
/// ```
pub fn predict_reference_direction(theta0: &[f64], gains: &GainVector) -> Result<ReachabilityReport> {
    require_small_group(theta0.len())?;
    check_cyclic_order(theta0)?;
    check_gains(theta0, gains)?;
    let k = gains.as_slice();
    let n = theta0.len();
    let shifted = shifted_headings(theta0)?;

    let (regime, interval, assumption1) = if k.iter().all(|&g| g > 0.0) {
        let a1 = assumption1_for(theta0, gains)?;
        if let Some(status) = a1 {
            if !status.is_satisfied() {
                return Err(Error::OutOfScope(format!(
                    "gains do not satisfy the ordering assumption ({status:?})"
                )));
            }
        }
        let interval = if shifted.is_degenerate() {
            Interval::closed(shifted.min, shifted.max)
        } else {
            Interval::open(shifted.min, shifted.max)
        };
        (Regime::PositiveGains, interval, a1)
    } else if n == 2 {
        if k[0] + k[1] <= 0.0 {
            return Err(Error::GainCondition(format!(
                "K1 + K2 = {} is not positive",
                k[0] + k[1]
            )));
        }
        (Regime::TwoAgentSigned, signed_window(theta0), None)
    } else {
        return Err(Error::OutOfScope(
            "no steady-direction result for three agents with non-positive gains".into(),
        ));
    };

    let inv_sum: f64 = k.iter().map(|g| 1.0 / g).sum();
    let weighted: f64 = shifted.theta_tilde.iter().zip(k).map(|(t, g)| t / g).sum();
    let theta_f = weighted / inv_sum;
    let lambda = k.iter().map(|g| (1.0 / g) / inv_sum).collect();
    let predicted_headings = (0..n).map(|i| theta_f + i as f64 * TAU / n as f64).collect();

    Ok(ReachabilityReport {
        reference_direction: theta_f,
        interval,
        regime,
        lambda,
        predicted_headings,
        shifted,
        assumption1,
    })
}

// Every balanced pair is some rotation of agent 1 within half a turn of
// where it started.
fn signed_window(theta0: &[f64]) -> Interval {
    Interval::closed(theta0[0] - std::f64::consts::PI, theta0[0] + std::f64::consts::PI)
}

/// Directions reachable with positive gains: `(min θ̃, max θ̃)`, endpoints
/// excluded.
pub fn reachable_interval(theta0: &[f64]) -> Result<Interval> {
    require_small_group(theta0.len())?;
    let s = shifted_headings(theta0)?;
    if s.is_degenerate() {
        return Err(Error::Degenerate(
            "all shifted headings coincide; no direction can be selected".into(),
        ));
    }
    Ok(Interval::open(s.min, s.max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainSynthesis {
    pub gains: GainVector,
    pub regime: Regime,
    /// Weights `λ_k` the gains were built from.
    pub weights: Vec<f64>,
}

/// Builds gains whose predicted steady direction is `target`.
///
/// Targets strictly inside [`reachable_interval`] get positive gains
/// `K_k = c/λ_k`. For two agents, targets outside it (but within half a turn
/// of agent 1's start) get signed gains with `K₁ + K₂ = 1/c`. Interval
/// endpoints would need a zero gain and are refused.
///
/// With three agents the middle agent's weight is picked so that the
/// ordering assumption holds; weights are not unique and the choice here is
/// just reproducible.
pub fn synthesize_gains(theta0: &[f64], target: f64, c: f64) -> Result<GainSynthesis> {
    require_small_group(theta0.len())?;
    check_cyclic_order(theta0)?;
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidInput(format!("scale c must be positive, got {c}")));
    }
    if !target.is_finite() {
        return Err(Error::NonFinite("target"));
    }
    let s = shifted_headings(theta0)?;
    if s.is_degenerate() {
        return Err(Error::Degenerate(
            "all shifted headings coincide; no direction can be selected".into(),
        ));
    }
    let near = |x: f64| (target - x).abs() <= ENDPOINT_TOL;
    if near(s.min) || near(s.max) {
        return Err(Error::Unreachable {
            target,
            reason: "interval endpoints need a zero gain".into(),
        });
    }
    if target > s.min && target < s.max {
        return match theta0.len() {
            2 => synthesize_pair(&s.theta_tilde, target, c, Regime::PositiveGains),
            _ => synthesize_three(theta0, &s, target, c),
        };
    }
    if theta0.len() == 3 {
        return Err(Error::Unreachable {
            target,
            reason: format!(
                "three agents with positive gains reach only ({}, {}) rad",
                s.min, s.max
            ),
        });
    }
    if !signed_window(theta0).contains(target) {
        return Err(Error::Unreachable {
            target,
            reason: "more than half a turn from agent 1's initial heading".into(),
        });
    }
    // Work with agent 1 rotated onto the x-axis, then undo the rotation.
    // Gains do not depend on the frame.
    let rot = theta0[0];
    let tilde: Vec<f64> = s.theta_tilde.iter().map(|t| t - rot).collect();
    synthesize_pair(&tilde, target - rot, c, Regime::TwoAgentSigned)
}

fn synthesize_pair(tilde: &[f64], target: f64, c: f64, regime: Regime) -> Result<GainSynthesis> {
    let l1 = (target - tilde[1]) / (tilde[0] - tilde[1]);
    let l2 = 1.0 - l1;
    let gains = match regime {
        Regime::PositiveGains => vec![c / l1, c / l2],
        // K₁ = λ₂/c, K₂ = λ₁/c keeps 1/K_k proportional to λ_k and K₁ + K₂ = 1/c
        Regime::TwoAgentSigned => vec![l2 / c, l1 / c],
    };
    let mode = match regime {
        Regime::PositiveGains => crate::model::GainCondition::AllPositive,
        Regime::TwoAgentSigned => crate::model::GainCondition::TwoAgentSum,
    };
    Ok(GainSynthesis {
        gains: GainVector::new(gains)?.validated(mode)?,
        regime,
        weights: vec![l1, l2],
    })
}

// Fractions of the largest admissible middle weight, in bisection order:
// 1/2, 1/4, 3/4, 1/8, 3/8, ...
fn bisection_fractions(levels: u32) -> impl Iterator<Item = f64> {
    (1..=levels).flat_map(|level| {
        let denom = (1u64 << level) as f64;
        (1..(1u64 << level)).step_by(2).map(move |num| num as f64 / denom)
    })
}

fn synthesize_three(theta0: &[f64], s: &ShiftedInitialHeadings, target: f64, c: f64) -> Result<GainSynthesis> {
    let t = &s.theta_tilde;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| t[i].total_cmp(&t[j]));
    let [lo, mid, hi] = order;
    let (a, m, b) = (t[lo], t[mid], t[hi]);

    let bound = |num: f64, den: f64| if den > ENDPOINT_TOL { num / den } else { f64::INFINITY };
    let s_max = bound(target - a, m - a).min(bound(b - target, b - m)).min(1.0);

    for f in bisection_fractions(12) {
        let w_mid = f * s_max;
        let w_hi = (target - w_mid * m - (1.0 - w_mid) * a) / (b - a);
        let w_lo = 1.0 - w_mid - w_hi;
        if !(w_lo > 0.0 && w_hi > 0.0 && w_mid > 0.0) {
            continue;
        }
        let mut weights = [0.0; 3];
        weights[lo] = w_lo;
        weights[mid] = w_mid;
        weights[hi] = w_hi;
        let gains = GainVector::new(weights.iter().map(|w| c / w).collect())?
            .validated(crate::model::GainCondition::AllPositive)?;
        let ok = assumption1_for(theta0, &gains)?.is_none_or(|a| a.is_satisfied());
        if ok {
            return Ok(GainSynthesis {
                gains,
                regime: Regime::PositiveGains,
                weights: weights.to_vec(),
            });
        }
    }
    Err(Error::Unreachable {
        target,
        reason: "no positive gains found that also satisfy the ordering assumption".into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationBounds {
    /// Steady direction with equal gains, the mean of `θ̃`.
    pub nominal: f64,
    pub sigma: f64,
    /// Largest downward deviation, `Δ̌ = −2σ/(1−σ) · θ̄_f`.
    pub delta_lower: f64,
    /// Largest upward deviation, `Δ̂ = −2σ/(1+σ) · θ̄_f`.
    pub delta_upper: f64,
    /// `[θ̄_f − Δ̌, θ̄_f + Δ̂]` before clipping.
    pub raw: Interval,
    /// `raw` intersected with the reachable interval.
    pub interval: Interval,
}

/// Where the steady direction can land if equal gains `K` are realised as
/// `K(1 ± σ_k)` with every `σ_k ≤ sigma`.
///
/// Only defined when no shifted heading is positive.
pub fn perturbation_bounds(theta0: &[f64], sigma: f64) -> Result<PerturbationBounds> {
    require_small_group(theta0.len())?;
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::InvalidInput(format!("sigma must lie in [0, 1), got {sigma}")));
    }
    let s = shifted_headings(theta0)?;
    if let Some(i) = s.theta_tilde.iter().position(|&t| t > ENDPOINT_TOL) {
        return Err(Error::OutOfScope(format!(
            "shifted heading of agent {} is positive ({} rad)",
            i + 1,
            s.theta_tilde[i]
        )));
    }
    if s.is_degenerate() {
        return Err(Error::Degenerate(
            "all shifted headings coincide; no direction can be selected".into(),
        ));
    }
    let nominal = s.theta_tilde.iter().sum::<f64>() / s.theta_tilde.len() as f64;
    let delta_lower = -(2.0 * sigma / (1.0 - sigma)) * nominal;
    let delta_upper = -(2.0 * sigma / (1.0 + sigma)) * nominal;
    let raw = Interval::closed(nominal - delta_lower, nominal + delta_upper);

    let (lo, lo_closed) = if raw.lo <= s.min + ENDPOINT_TOL {
        (s.min, false)
    } else {
        (raw.lo, true)
    };
    let (hi, hi_closed) = if raw.hi >= s.max - ENDPOINT_TOL {
        (s.max, false)
    } else {
        (raw.hi, true)
    };
    Ok(PerturbationBounds {
        nominal,
        sigma,
        delta_lower,
        delta_upper,
        raw,
        interval: Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        },
    })
}
