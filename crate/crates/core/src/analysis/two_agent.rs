//! Two agents in closed form.
//!
//! With `δ = θ₂ − θ₁` the balancing flow reduces to `δ' = κ sin δ`,
//! `κ = (K₁ + K₂)/2`, so
//!
//! ```text
//! tan(δ(t)/2) = φ₀ e^{κt},     φ₀ = tan(δ₀/2)
//! θ₁(t) = λ₂ (K₂ c₂ − δ(t))     θ₂(t) = λ₁ (K₁ c₂ + δ(t))
//! ```
//!
//! with `c₂ = θ₁₀/K₁ + θ₂₀/K₂`, `λ₁ = K₂/(K₁+K₂)`, `λ₂ = K₁/(K₁+K₂)`.
//!
//! Substituting `ξ = δ/2` turns the centroid displacement into finite
//! integrals with a bounded integrand:
//!
//! ```text
//! x_c(∞) − x_c0 = (1/κ) ∫_{δ₀/2}^{ξ∞} cos(λ₁θ₁₀ + λ₂θ₂₀ + (λ₁−λ₂)ξ) / sin ξ dξ
//! y_c(∞) − y_c0 = (1/κ) ∫_{δ₀/2}^{ξ∞} sin(λ₁θ₁₀ + λ₂θ₂₀ + (λ₁−λ₂)ξ) / sin ξ dξ
//! ```
//!
//! where `2ξ∞` is the limiting separation, `±π` up to whole turns.

use std::f64::consts::PI;

use serde::Serialize;

use crate::model::Point;
use crate::quadrature::{adaptive_simpson, DEFAULT_MAX_DEPTH, DEFAULT_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoAgentClosedForm {
    pub theta10: f64,
    pub theta20: f64,
    pub k1: f64,
    pub k2: f64,
    /// `(K₁ + K₂)/2`.
    pub kappa: f64,
    /// `θ₂₀ − θ₁₀`.
    pub delta0: f64,
    /// `tan(δ₀/2)`.
    pub phi0: f64,
    /// `θ₁₀/K₁ + θ₂₀/K₂`.
    pub c2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Whole turns separating `δ₀` from `2·atan(φ₀)`.
    pub branch: i64,
}

impl TwoAgentClosedForm {
    /// Fails when `K₁ + K₂ ≤ 0`, a gain is zero, or the agents start
    /// synchronized (`sin(δ₀/2) = 0`, nothing to balance).
    pub fn new(theta0: [f64; 2], gains: [f64; 2]) -> Result<Self> {
        let [theta10, theta20] = theta0;
        let [k1, k2] = gains;
        if !(theta10.is_finite() && theta20.is_finite()) {
            return Err(Error::NonFinite("initial headings"));
        }
        if !(k1.is_finite() && k2.is_finite()) {
            return Err(Error::NonFinite("gains"));
        }
        for (index, k) in [k1, k2].into_iter().enumerate() {
            if k == 0.0 {
                return Err(Error::ZeroGain { index });
            }
        }
        let kappa = 0.5 * (k1 + k2);
        if kappa <= 0.0 {
            return Err(Error::GainCondition(format!(
                "K1 + K2 = {} is not positive",
                k1 + k2
            )));
        }
        let delta0 = theta20 - theta10;
        if (0.5 * delta0).sin().abs() < 1e-12 {
            return Err(Error::Degenerate(
                "agents start synchronized; the separation never changes".into(),
            ));
        }
        let phi0 = (0.5 * delta0).tan();
        let branch = ((delta0 - 2.0 * phi0.atan()) / (2.0 * PI)).round() as i64;
        Ok(TwoAgentClosedForm {
            theta10,
            theta20,
            k1,
            k2,
            kappa,
            delta0,
            phi0,
            c2: theta10 / k1 + theta20 / k2,
            lambda1: k2 / (k1 + k2),
            lambda2: k1 / (k1 + k2),
            branch,
        })
    }

    /// `δ(t) = θ₂(t) − θ₁(t)`, continuous from `δ₀`.
    pub fn separation(&self, t: f64) -> f64 {
        2.0 * (self.phi0 * (self.kappa * t).exp()).atan() + 2.0 * PI * self.branch as f64
    }

    /// `lim δ(t) = sgn(φ₀) π` plus the branch's whole turns.
    pub fn limit_separation(&self) -> f64 {
        self.phi0.signum() * PI + 2.0 * PI * self.branch as f64
    }

    /// `λ₁θ₁₀ + λ₂θ₂₀`, the part of the mean heading that does not move.
    fn anchor_phase(&self) -> f64 {
        self.lambda1 * self.theta10 + self.lambda2 * self.theta20
    }
}

/// `(θ₁(t), θ₂(t))`, unwrapped.
///
/// ```
/// use phase_balance::analysis::{two_agent_headings, TwoAgentClosedForm};
///
/// let cf = TwoAgentClosedForm::new([0.0, 2.0], [1.0, 3.0]).unwrap();
/// let (a, b) = two_agent_headings(&cf, 0.0);
/// assert!(a.abs() < 1e-15 && (b - 2.0).abs() < 1e-15);
/// ```
pub fn two_agent_headings(cf: &TwoAgentClosedForm, t: f64) -> (f64, f64) {
    if t == 0.0 {
        return (cf.theta10, cf.theta20);
    }
    let delta = cf.separation(t);
    (
        cf.lambda2 * (cf.k2 * cf.c2 - delta),
        cf.lambda1 * (cf.k1 * cf.c2 + delta),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub point: Point,
    /// Displacement from the initial centroid.
    pub offset: Point,
    pub initial_centroid: Point,
    pub quadrature_error_estimate: f64,
}

// ∫ (cos f, sin f)(ξ) / sin ξ over [δ₀/2, ξ∞], f(ξ) = phase + slope·ξ
fn centroid_integrals(delta0: f64, limit: f64, phase: f64, slope: f64) -> Result<(f64, f64, f64)> {
    let (a, b) = (0.5 * delta0, 0.5 * limit);
    let ix = adaptive_simpson(|x: f64| (phase + slope * x).cos() / x.sin(), a, b, DEFAULT_TOL, DEFAULT_MAX_DEPTH)?;
    let iy = adaptive_simpson(|x: f64| (phase + slope * x).sin() / x.sin(), a, b, DEFAULT_TOL, DEFAULT_MAX_DEPTH)?;
    Ok((ix.value, iy.value, ix.error_estimate + iy.error_estimate))
}

/// Where the centroid of a two-agent balancing run comes to rest.
///
/// ```
/// use phase_balance::analysis::convergence_point;
/// use phase_balance::model::Point;
///
/// let cp = convergence_point(
///     [0.0, 120f64.to_radians()],
///     [Point::new(-1.0, -2.0), Point::new(5.0, -2.0)],
///     [1.0, 1.0],
/// )
/// .unwrap();
/// assert!((cp.offset.x - 0.25 * 3f64.ln()).abs() < 1e-8);
/// ```
pub fn convergence_point(theta0: [f64; 2], r0: [Point; 2], gains: [f64; 2]) -> Result<ConvergencePoint> {
    let cf = TwoAgentClosedForm::new(theta0, gains)?;
    if !r0.iter().all(|p| p.x.is_finite() && p.y.is_finite()) {
        return Err(Error::NonFinite("initial positions"));
    }
    let (ix, iy, err) = centroid_integrals(
        cf.delta0,
        cf.limit_separation(),
        cf.anchor_phase(),
        cf.lambda1 - cf.lambda2,
    )?;
    let initial_centroid = Point::new(0.5 * (r0[0].x + r0[1].x), 0.5 * (r0[0].y + r0[1].y));
    let offset = Point::new(ix / cf.kappa, iy / cf.kappa);
    Ok(ConvergencePoint {
        point: Point::new(initial_centroid.x + offset.x, initial_centroid.y + offset.y),
        offset,
        initial_centroid,
        quadrature_error_estimate: err / cf.kappa.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Slope {
    Finite(f64),
    Vertical,
}

/// Convergence points for gains `K = (η, η/ρ)` as `η` varies.
///
/// They all lie on one line through the initial centroid, at offset
/// `2ρ/(η(1+ρ)) · (h₁, h₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocusLine {
    pub rho: f64,
    pub slope: Slope,
    pub anchor: Point,
    pub h1: f64,
    pub h2: f64,
    pub theta0: [f64; 2],
}

impl LocusLine {
    /// Gain scale is admissible when `ηρ(1+ρ) > 0`, which is `K₁ + K₂ > 0`.
    pub fn admits(&self, eta: f64) -> bool {
        eta.is_finite() && eta * self.rho * (1.0 + self.rho) > 0.0
    }

    pub fn point_for_eta(&self, eta: f64) -> Result<Point> {
        if !self.admits(eta) {
            return Err(Error::GainCondition(format!(
                "eta = {eta} with rho = {} gives K1 + K2 <= 0",
                self.rho
            )));
        }
        let scale = 2.0 * self.rho / (eta * (1.0 + self.rho));
        Ok(Point::new(self.anchor.x + scale * self.h1, self.anchor.y + scale * self.h2))
    }

    /// Perpendicular distance from `p` to the line.
    pub fn distance_to(&self, p: Point) -> f64 {
        let (dx, dy) = (p.x - self.anchor.x, p.y - self.anchor.y);
        let norm = self.h1.hypot(self.h2);
        (dx * self.h2 - dy * self.h1).abs() / norm
    }
}

/// The line of convergence points for gain ratio `rho = K₁/K₂`, anchored at the
/// initial centroid.
pub fn locus_line(theta0: [f64; 2], anchor: Point, rho: f64) -> Result<LocusLine> {
    if !rho.is_finite() || rho == 0.0 {
        return Err(Error::InvalidInput(format!("gain ratio must be finite and nonzero, got {rho}")));
    }
    if rho == -1.0 {
        return Err(Error::GainCondition("rho = -1 makes K1 + K2 = 0 for every eta".into()));
    }
    // any admissible η gives the same λ's and limit; use the one with K₁ + K₂ > 0
    let eta = if rho * (1.0 + rho) > 0.0 { 1.0 } else { -1.0 };
    let cf = TwoAgentClosedForm::new(theta0, [eta, eta / rho])?;
    let (h1, h2, _) = centroid_integrals(
        cf.delta0,
        cf.limit_separation(),
        cf.anchor_phase(),
        cf.lambda1 - cf.lambda2,
    )?;
    let slope = if h1.abs() <= 1e-12 * h2.abs().max(1.0) {
        Slope::Vertical
    } else {
        Slope::Finite(h2 / h1)
    };
    Ok(LocusLine {
        rho,
        slope,
        anchor,
        h1,
        h2,
        theta0,
    })
}
