//! Swarm state, order parameters, the balancing and splay potentials, and
//! their derivatives.
//!
//! The `m`-th harmonic of the phase order parameter is
//!
//! ```text
//! p_mθ = (1/(mN)) Σ_k e^{imθ_k} = |p_mθ| e^{iΨ_m},      0 ≤ |p_mθ| ≤ 1/m
//! ```
//!
//! and the two potentials are
//!
//! ```text
//! U(θ) = (N/2) |p_θ|²                 (balancing, minimised at p_θ = 0)
//! W(θ) = (N/2) Σ_{m=1}^{⌊N/2⌋} |p_mθ|²   (splay, minimised at equal spacing)
//! ```
//!
//! Gradients are evaluated as `Re(conj(p_mθ) · i e^{imθ_k})` so that the
//! phase `Ψ_m` is never needed; it is undefined when the order parameter
//! vanishes.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Below this magnitude the phase of an order parameter is reported undefined.
pub const PSI_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Positions and unwrapped headings of `N` agents at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwarmState {
    pub t: f64,
    pub positions: Vec<Point>,
    /// Unwrapped headings in radians. Never reduced modulo 2π.
    pub headings: Vec<f64>,
}

impl SwarmState {
    pub fn new(t: f64, positions: Vec<Point>, headings: Vec<f64>) -> Result<Self> {
        if headings.len() < 2 {
            return Err(Error::TooFewAgents {
                min: 2,
                got: headings.len(),
            });
        }
        if positions.len() != headings.len() {
            return Err(Error::DimensionMismatch {
                what: "positions",
                expected: headings.len(),
                got: positions.len(),
            });
        }
        if !t.is_finite() {
            return Err(Error::NonFinite("time"));
        }
        if headings.iter().any(|h| !h.is_finite()) {
            return Err(Error::NonFinite("headings"));
        }
        if positions.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::NonFinite("positions"));
        }
        Ok(SwarmState {
            t,
            positions,
            headings,
        })
    }

    pub fn n(&self) -> usize {
        self.headings.len()
    }

    /// Position centroid `R = (1/N) Σ r_k`.
    pub fn centroid(&self) -> Point {
        let n = self.positions.len() as f64;
        let (sx, sy) = self
            .positions
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point::new(sx / n, sy / n)
    }
}

/// Which sufficient condition on the gains a [`GainVector`] has been checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainCondition {
    Unchecked,
    /// Every gain strictly positive.
    AllPositive,
    /// At most `⌊N/2⌋` zero gains, the rest positive.
    AllowZeros,
    /// Two agents with `K₁ + K₂ > 0`.
    TwoAgentSum,
}

/// Per-agent controller gains `K_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainVector {
    gains: Vec<f64>,
    condition: GainCondition,
}

impl GainVector {
    pub fn new(gains: Vec<f64>) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::InvalidInput("gain vector is empty".into()));
        }
        if gains.iter().any(|k| !k.is_finite()) {
            return Err(Error::NonFinite("gains"));
        }
        Ok(GainVector {
            gains,
            condition: GainCondition::Unchecked,
        })
    }

    /// Checks the gains against `mode` and records it on success.
    pub fn validated(mut self, mode: GainCondition) -> Result<Self> {
        crate::control::validate_theorem1_condition(&self, mode)?;
        self.condition = mode;
        Ok(self)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn condition(&self) -> GainCondition {
        self.condition
    }

    pub fn all_nonzero(&self) -> bool {
        self.gains.iter().all(|&k| k != 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        GainVector::new(self.gains.iter().map(|k| k * factor).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderParameter {
    pub re: f64,
    pub im: f64,
    pub magnitude: f64,
    /// Phase `Ψ_m`; reported as 0 when `psi_defined` is false.
    pub psi: f64,
    pub harmonic: u32,
    pub psi_defined: bool,
}

impl OrderParameter {
    fn from_complex(p: Complex64, harmonic: u32) -> Self {
        let magnitude = p.norm();
        let psi_defined = magnitude >= PSI_THRESHOLD;
        OrderParameter {
            re: p.re,
            im: p.im,
            magnitude,
            psi: if psi_defined { p.arg() } else { 0.0 },
            harmonic,
            psi_defined,
        }
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// The phase, or `None` when it is undefined.
    pub fn psi(&self) -> Option<f64> {
        self.psi_defined.then_some(self.psi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    BalancingU,
    SplayW,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialValue {
    pub value: f64,
    pub kind: PotentialKind,
}

/// Number of harmonics in the splay potential, `⌊N/2⌋`.
pub fn splay_harmonics(n: usize) -> u32 {
    (n / 2) as u32
}

pub(crate) fn harmonic_sum(headings: &[f64], m: u32) -> Complex64 {
    let mf = m as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for &th in headings {
        let (s, c) = (mf * th).sin_cos();
        re += c;
        im += s;
    }
    let scale = 1.0 / (mf * headings.len() as f64);
    Complex64::new(re * scale, im * scale)
}

/// Writes (or adds, when `accumulate`) `∂U_m/∂θ_k = Re(conj(p_mθ) · i e^{imθ_k})` into `out`.
pub(crate) fn harmonic_gradient(headings: &[f64], m: u32, out: &mut [f64], accumulate: bool) {
    let p = harmonic_sum(headings, m);
    let mf = m as f64;
    for (o, &th) in out.iter_mut().zip(headings) {
        let (s, c) = (mf * th).sin_cos();
        let g = p.im * c - p.re * s;
        if accumulate {
            *o += g;
        } else {
            *o = g;
        }
    }
}

pub(crate) fn grad_u_into(headings: &[f64], out: &mut [f64]) {
    harmonic_gradient(headings, 1, out, false);
}

pub(crate) fn grad_w_into(headings: &[f64], out: &mut [f64]) {
    // harmonic 1 shares its code path with grad_u_into, so for N ∈ {2, 3}
    // the two gradients are bit-identical
    harmonic_gradient(headings, 1, out, false);
    for m in 2..=splay_harmonics(headings.len()) {
        harmonic_gradient(headings, m, out, true);
    }
}

fn require_agents(headings: &[f64], min: usize) -> Result<()> {
    if headings.len() < min {
        return Err(if headings.is_empty() {
            Error::EmptyHeadings
        } else {
            Error::TooFewAgents {
                min,
                got: headings.len(),
            }
        });
    }
    if headings.iter().any(|h| !h.is_finite()) {
        return Err(Error::NonFinite("headings"));
    }
    Ok(())
}

/// `m`-th harmonic of the phase order parameter; `m = 1` gives `p_θ`.
pub fn order_parameter(headings: &[f64], m: u32) -> Result<OrderParameter> {
    require_agents(headings, 1)?;
    if m == 0 {
        return Err(Error::ZeroHarmonic);
    }
    Ok(OrderParameter::from_complex(harmonic_sum(headings, m), m))
}

/// `U_m(θ) = (N/2) |p_mθ|²`.
pub fn harmonic_potential(headings: &[f64], m: u32) -> Result<f64> {
    require_agents(headings, 2)?;
    if m == 0 {
        return Err(Error::ZeroHarmonic);
    }
    Ok(0.5 * headings.len() as f64 * harmonic_sum(headings, m).norm_sqr())
}

pub fn potential_u(headings: &[f64]) -> Result<PotentialValue> {
    Ok(PotentialValue {
        value: harmonic_potential(headings, 1)?,
        kind: PotentialKind::BalancingU,
    })
}

pub fn potential_w(headings: &[f64]) -> Result<PotentialValue> {
    require_agents(headings, 2)?;
    let mut value = 0.0;
    for m in 1..=splay_harmonics(headings.len()) {
        value += harmonic_potential(headings, m)?;
    }
    Ok(PotentialValue {
        value,
        kind: PotentialKind::SplayW,
    })
}

/// `∂U/∂θ_k = |p_θ| sin(Ψ − θ_k) = (1/N) Σ_j sin(θ_j − θ_k)`.
pub fn grad_u(headings: &[f64]) -> Result<Vec<f64>> {
    require_agents(headings, 2)?;
    let mut out = vec![0.0; headings.len()];
    grad_u_into(headings, &mut out);
    Ok(out)
}

/// `∂W/∂θ_k = Σ_{m=1}^{⌊N/2⌋} (1/(mN)) Σ_j sin(m(θ_j − θ_k))`.
pub fn grad_w(headings: &[f64]) -> Result<Vec<f64>> {
    require_agents(headings, 2)?;
    let mut out = vec![0.0; headings.len()];
    grad_w_into(headings, &mut out);
    Ok(out)
}

/// Hessian of `U`:
/// `h_kk = 1/N − Re(conj(p_θ) e^{iθ_k})`, `h_jk = (1/N) cos(θ_j − θ_k)`.
pub fn hessian_u(headings: &[f64]) -> Result<DMatrix<f64>> {
    require_agents(headings, 2)?;
    let n = headings.len();
    let inv_n = 1.0 / n as f64;
    let p = harmonic_sum(headings, 1);
    Ok(DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            let (s, c) = headings[k].sin_cos();
            inv_n - (p.re * c + p.im * s)
        } else {
            inv_n * (headings[j] - headings[k]).cos()
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalPoint {
    Minimum,
    Maximum,
    Saddle,
    NotCritical,
}

/// Classifies `θ` as a critical point of `U` by the signs of the Hessian
/// eigenvalues. Eigenvalues within `1e-8·N` of zero are ignored; the
/// rotational symmetry always contributes one.
pub fn classify_critical_point(headings: &[f64], tol: f64) -> Result<CriticalPoint> {
    let grad = grad_u(headings)?;
    if grad.iter().any(|g| g.abs() > tol) {
        return Ok(CriticalPoint::NotCritical);
    }
    let eig_tol = 1e-8 * headings.len() as f64;
    let eig = SymmetricEigen::new(hessian_u(headings)?).eigenvalues;
    let positive = eig.iter().any(|&l| l > eig_tol);
    let negative = eig.iter().any(|&l| l < -eig_tol);
    Ok(match (positive, negative) {
        (true, true) => CriticalPoint::Saddle,
        (false, true) => CriticalPoint::Maximum,
        _ => CriticalPoint::Minimum,
    })
}
