//! Fixed-step integration of the closed loop
//!
//! ```text
//! dx_k/dt = cos θ_k    dy_k/dt = sin θ_k    dθ_k/dt = u_k(θ)
//! ```
//!
//! Positions and headings are advanced together as one flat state vector.
//! The run stops at the first step where the group is balanced (or splayed,
//! for the splay law) to within `balance_tol`, or at the horizon.
//!
//! Nothing here is random: the same inputs give the same trace, bit for bit.

use serde::{Deserialize, Serialize};

use crate::control::{control_into, ControlLaw, LawKind};
use crate::model::{harmonic_sum, splay_harmonics, Point, SwarmState, PSI_THRESHOLD};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorSettings {
    pub dt: f64,
    pub t_max: f64,
    pub method: Method,
    /// Stop once `|p_θ|` (balance) or every `|p_mθ|`, `m ≤ ⌊N/2⌋` (splay)
    /// drops below this.
    pub balance_tol: f64,
    /// Steps between recorded samples. The first and last steps are always
    /// recorded.
    pub record_stride: u64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            dt: 1e-3,
            t_max: 200.0,
            method: Method::Rk4,
            balance_tol: 1e-6,
            record_stride: 100,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max >= self.dt) {
            return Err(Error::InvalidInput(format!(
                "t_max must be at least dt, got {}",
                self.t_max
            )));
        }
        if !(self.balance_tol.is_finite() && self.balance_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "balance_tol must be positive, got {}",
                self.balance_tol
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidInput("record_stride must be at least 1".into()));
        }
        Ok(())
    }

    fn steps(&self) -> u64 {
        (self.t_max / self.dt - 1e-9).ceil() as u64
    }
}

/// Everything [`simulate`] needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub initial: SwarmState,
    pub law: ControlLaw,
    pub settings: IntegratorSettings,
}

impl Scenario {
    pub fn new(initial: SwarmState, law: ControlLaw, settings: IntegratorSettings) -> Result<Self> {
        if law.gains.len() != initial.n() {
            return Err(Error::DimensionMismatch {
                what: "gains",
                expected: initial.n(),
                got: law.gains.len(),
            });
        }
        if !law.omega0.is_finite() {
            return Err(Error::NonFinite("omega0"));
        }
        settings.validate()?;
        Ok(Scenario {
            initial,
            law,
            settings,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub state: SwarmState,
    /// `|p_θ|`.
    pub p_mag: f64,
    /// Phase of `p_θ`, absent when it is undefined.
    pub psi: Option<f64>,
    pub u: Vec<f64>,
    /// `Σ (θ_k − ω₀t)/K_k`, absent when a gain is zero.
    pub conserved: Option<f64>,
    pub centroid: Point,
}

impl Sample {
    pub fn t(&self) -> f64 {
        self.state.t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Outcome {
    Converged { t: f64 },
    HorizonReached { t: f64 },
}

impl Outcome {
    pub fn is_converged(&self) -> bool {
        matches!(self, Outcome::Converged { .. })
    }

    pub fn t(&self) -> f64 {
        match *self {
            Outcome::Converged { t } | Outcome::HorizonReached { t } => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Frame {
    Inertial,
    /// Headings, `psi` and `u` are relative to a frame turning at `omega0`.
    /// Positions are still inertial and no longer consistent with headings.
    Rotating { omega0: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationTrace {
    pub samples: Vec<Sample>,
    pub outcome: Outcome,
    pub law: ControlLaw,
    pub settings: IntegratorSettings,
    pub frame: Frame,
}

impl SimulationTrace {
    pub fn n(&self) -> usize {
        self.law.gains.len()
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trace always has a sample")
    }

    /// Largest `|conserved(t) − conserved(0)|` over the samples.
    pub fn conserved_drift(&self) -> Option<f64> {
        let c0 = self.first().conserved?;
        self.samples
            .iter()
            .map(|s| s.conserved.map(|c| (c - c0).abs()))
            .try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))
    }
}

/// Flat work buffers so a step does not allocate.
struct Workspace {
    n: usize,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
    u: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        let z = || vec![0.0; 3 * n];
        Workspace {
            n,
            k: [z(), z(), z(), z()],
            tmp: z(),
            u: vec![0.0; n],
        }
    }
}

// Layout of y and dy: [x_1..x_N, y_1..y_N, θ_1..θ_N].
fn deriv(y: &[f64], law: &ControlLaw, n: usize, u: &mut [f64], dy: &mut [f64]) {
    let theta = &y[2 * n..];
    control_into(theta, law, u);
    for k in 0..n {
        let (s, c) = theta[k].sin_cos();
        dy[k] = c;
        dy[n + k] = s;
        dy[2 * n + k] = u[k];
    }
}

fn step_rk4(y: &mut [f64], law: &ControlLaw, dt: f64, ws: &mut Workspace) {
    let n = ws.n;
    let [k1, k2, k3, k4] = &mut ws.k;
    deriv(y, law, n, &mut ws.u, k1);
    for i in 0..y.len() {
        ws.tmp[i] = y[i] + 0.5 * dt * k1[i];
    }
    deriv(&ws.tmp, law, n, &mut ws.u, k2);
    for i in 0..y.len() {
        ws.tmp[i] = y[i] + 0.5 * dt * k2[i];
    }
    deriv(&ws.tmp, law, n, &mut ws.u, k3);
    for i in 0..y.len() {
        ws.tmp[i] = y[i] + dt * k3[i];
    }
    deriv(&ws.tmp, law, n, &mut ws.u, k4);
    for i in 0..y.len() {
        y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

fn step_euler(y: &mut [f64], law: &ControlLaw, dt: f64, ws: &mut Workspace) {
    let n = ws.n;
    let k1 = &mut ws.k[0];
    deriv(y, law, n, &mut ws.u, k1);
    for i in 0..y.len() {
        y[i] += dt * k1[i];
    }
}

/// Quantity compared against `balance_tol`.
pub(crate) fn convergence_metric(headings: &[f64], kind: LawKind) -> f64 {
    let top = match kind {
        LawKind::Balance => 1,
        LawKind::Splay => splay_harmonics(headings.len()).max(1),
    };
    (1..=top)
        .map(|m| harmonic_sum(headings, m).norm())
        .fold(0.0, f64::max)
}

fn unpack(y: &[f64], n: usize, t: f64) -> SwarmState {
    SwarmState {
        t,
        positions: (0..n).map(|k| Point::new(y[k], y[n + k])).collect(),
        headings: y[2 * n..].to_vec(),
    }
}

fn sample_at(y: &[f64], t: f64, law: &ControlLaw, ws: &mut Workspace) -> Sample {
    let n = ws.n;
    let state = unpack(y, n, t);
    let p = harmonic_sum(&state.headings, 1);
    let p_mag = p.norm();
    let psi = (p_mag >= PSI_THRESHOLD).then(|| p.arg());
    control_into(&state.headings, law, &mut ws.u);
    let gains = law.gains.as_slice();
    let conserved = gains.iter().all(|&k| k != 0.0).then(|| {
        state
            .headings
            .iter()
            .zip(gains)
            .map(|(&th, &k)| (th - law.omega0 * t) / k)
            .sum()
    });
    let centroid = state.centroid();
    Sample {
        state,
        p_mag,
        psi,
        u: ws.u.clone(),
        conserved,
        centroid,
    }
}

/// Runs the scenario to convergence or to the horizon.
///
/// Fails with [`Error::NumericalBlowup`] if the state stops being finite.
pub fn simulate(scenario: &Scenario) -> Result<SimulationTrace> {
    let Scenario {
        initial,
        law,
        settings,
    } = scenario;
    settings.validate()?;
    let n = initial.n();
    if law.gains.len() != n {
        return Err(Error::DimensionMismatch {
            what: "gains",
            expected: n,
            got: law.gains.len(),
        });
    }

    let mut y = Vec::with_capacity(3 * n);
    y.extend(initial.positions.iter().map(|p| p.x));
    y.extend(initial.positions.iter().map(|p| p.y));
    y.extend_from_slice(&initial.headings);

    let mut ws = Workspace::new(n);
    let mut prev = y.clone();
    let mut samples = Vec::new();
    let total = settings.steps();
    let t0 = initial.t;
    let mut step: u64 = 0;
    let outcome = loop {
        let t = t0 + step as f64 * settings.dt;
        let converged = convergence_metric(&y[2 * n..], law.kind) < settings.balance_tol;
        let last = converged || step >= total;
        if step.is_multiple_of(settings.record_stride) || last {
            samples.push(sample_at(&y, t, law, &mut ws));
        }
        if converged {
            break Outcome::Converged { t };
        }
        if step >= total {
            break Outcome::HorizonReached { t };
        }
        prev.copy_from_slice(&y);
        match settings.method {
            Method::Rk4 => step_rk4(&mut y, law, settings.dt, &mut ws),
            Method::Euler => step_euler(&mut y, law, settings.dt, &mut ws),
        }
        step += 1;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBlowup {
                step,
                t: t0 + step as f64 * settings.dt,
                last_good: Box::new(unpack(&prev, n, t)),
            });
        }
    };

    Ok(SimulationTrace {
        samples,
        outcome,
        law: law.clone(),
        settings: *settings,
        frame: Frame::Inertial,
    })
}

/// Re-expresses headings in a frame turning at `omega0`: `θ_k(t) − ω₀t`.
///
/// `psi` and `u` are shifted to match. Positions are left as they were.
pub fn rotating_frame(trace: &SimulationTrace, omega0: f64) -> SimulationTrace {
    let mut out = trace.clone();
    if omega0 == 0.0 {
        return out;
    }
    for s in &mut out.samples {
        let shift = omega0 * s.state.t;
        for th in &mut s.state.headings {
            *th -= shift;
        }
        if let Some(psi) = s.psi.as_mut() {
            *psi = crate::angle::wrap_pi(*psi - shift);
        }
        for u in &mut s.u {
            *u -= omega0;
        }
    }
    out.frame = match trace.frame {
        Frame::Inertial => Frame::Rotating { omega0 },
        Frame::Rotating { omega0: w } => Frame::Rotating { omega0: w + omega0 },
    };
    out
}

/// Final headings of a converged run.
///
/// Also checks that every agent has settled: `‖u − ω₀‖∞` must be within what
/// the convergence tolerance allows, `max|K_k| · ⌊N/2⌋ · balance_tol` for the
/// splay law and `max|K_k| · balance_tol` for balancing.
pub fn detect_steady_headings(trace: &SimulationTrace) -> Result<Vec<f64>> {
    if !trace.outcome.is_converged() {
        return Err(Error::NotConverged);
    }
    let last = trace.last();
    let omega = match trace.frame {
        Frame::Inertial => trace.law.omega0,
        Frame::Rotating { omega0 } => trace.law.omega0 - omega0,
    };
    let residual = last
        .u
        .iter()
        .map(|u| (u - omega).abs())
        .fold(0.0, f64::max);
    let kmax = trace
        .law
        .gains
        .as_slice()
        .iter()
        .map(|k| k.abs())
        .fold(0.0, f64::max);
    let harmonics = match trace.law.kind {
        LawKind::Balance => 1.0,
        LawKind::Splay => splay_harmonics(trace.n()).max(1) as f64,
    };
    let threshold = kmax * harmonics * trace.settings.balance_tol * (1.0 + 1e-9) + 1e-12;
    if residual > threshold {
        return Err(Error::NotSteady {
            residual,
            threshold,
        });
    }
    Ok(last.state.headings.clone())
}
