//! Output formats: the per-sample CSV trace and the JSON reports.
//!
//! CSV columns, in order:
//!
//! ```text
//! t, x1..xN, y1..yN, theta1..thetaN, p_mag, psi, u1..uN, conserved, xc, yc
//! ```
//!
//! Headings are unwrapped radians. `psi` is empty while the order parameter
//! vanishes and `conserved` is empty when some gain is zero. Floats are
//! written with 17 significant digits so a trace round-trips exactly.

use std::io::{self, Write};

use serde::Serialize;

use crate::analysis::{
    convergence_point, locus_line, perturbation_bounds, predict_reference_direction, reachable_interval,
    shifted_headings, ConvergencePoint, Interval, Regime, Slope,
};
use crate::angle::{wrap_pi, wrap_two_pi, Angle};
use crate::control::{circle_center, partition_subgroups, validate_assumption1, validate_theorem1_condition, Assumption1, LawKind};
use crate::model::{GainCondition, GainVector, Point};
use crate::scenario::ScenarioConfig;
use crate::sim::{detect_steady_headings, IntegratorSettings, Outcome, SimulationTrace};
use crate::{Error, Result};

/// Bumped whenever a report field changes meaning or is removed.
pub const SCHEMA_VERSION: u32 = 1;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_header(n: usize) -> String {
    let mut cols = vec!["t".to_string()];
    for prefix in ["x", "y", "theta"] {
        cols.extend((1..=n).map(|k| format!("{prefix}{k}")));
    }
    cols.push("p_mag".into());
    cols.push("psi".into());
    cols.extend((1..=n).map(|k| format!("u{k}")));
    cols.extend(["conserved", "xc", "yc"].map(String::from));
    cols.join(",")
}

pub fn write_trace_csv<W: Write>(trace: &SimulationTrace, mut w: W) -> io::Result<()> {
    writeln!(w, "{}", csv_header(trace.n()))?;
    let mut row = Vec::new();
    for s in &trace.samples {
        row.clear();
        row.push(num(s.state.t));
        row.extend(s.state.positions.iter().map(|p| num(p.x)));
        row.extend(s.state.positions.iter().map(|p| num(p.y)));
        row.extend(s.state.headings.iter().map(|&h| num(h)));
        row.push(num(s.p_mag));
        row.push(s.psi.map(num).unwrap_or_default());
        row.extend(s.u.iter().map(|&u| num(u)));
        row.push(s.conserved.map(num).unwrap_or_default());
        row.push(num(s.centroid.x));
        row.push(num(s.centroid.y));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn trace_csv_string(trace: &SimulationTrace) -> String {
    let mut buf = Vec::new();
    write_trace_csv(trace, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// Either a computed value or the reason it was not computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "kebab-case")]
pub enum Section<T> {
    Computed(T),
    Refused { kind: String, reason: String },
}

impl<T> Section<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Section::Computed(v),
            Err(e) => Section::Refused {
                kind: error_kind(&e).into(),
                reason: e.to_string(),
            },
        }
    }

    pub fn computed(&self) -> Option<&T> {
        match self {
            Section::Computed(v) => Some(v),
            Section::Refused { .. } => None,
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::OutOfScope(_) => "outside-proven-scope",
        Error::Unreachable { .. } => "unreachable",
        Error::Degenerate(_) | Error::PsiUndefined => "degenerate",
        Error::GainCondition(_) | Error::ZeroGain { .. } => "gain-condition",
        _ => "invalid-input",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalReport {
    pub lo: Angle,
    pub hi: Angle,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl From<Interval> for IntervalReport {
    fn from(i: Interval) -> Self {
        IntervalReport {
            lo: i.lo.into(),
            hi: i.hi.into(),
            lo_closed: i.lo_closed,
            hi_closed: i.hi_closed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionReport {
    pub theta_f: Angle,
    pub regime: Regime,
    pub lambda: Vec<f64>,
    pub interval: IntervalReport,
    pub predicted_headings: Vec<Angle>,
    pub assumption1: Option<Assumption1>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub sigma: f64,
    pub nominal: Angle,
    pub delta_lower: Angle,
    pub delta_upper: Angle,
    pub raw: IntervalReport,
    pub interval: IntervalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocusReport {
    pub rho: f64,
    pub slope: Slope,
    pub anchor: Point,
    pub h1: f64,
    pub h2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub shifted_headings: Vec<Angle>,
    pub reference_direction: Section<PredictionReport>,
    pub reachable_interval: Section<IntervalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Section<PerturbationReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_point: Option<Section<ConvergencePoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub locus: Option<Section<LocusReport>>,
}

impl AnalysisReport {
    pub fn theta_f(&self) -> Option<f64> {
        self.reference_direction.computed().map(|p| p.theta_f.rad)
    }
}

/// Runs every analytical prediction that applies to `cfg`.
///
/// Requests outside what the closed forms cover come back as
/// [`Section::Refused`] rather than an error.
pub fn analyze(cfg: &ScenarioConfig, sigma: Option<f64>, rho: Option<f64>) -> Result<AnalysisReport> {
    cfg.validate()?;
    let theta0 = cfg.theta0();
    let gains = cfg.gain_vector()?;
    let shifted = shifted_headings(&theta0)?;

    let reference_direction = Section::from_result(predict_reference_direction(&theta0, &gains).map(|r| {
        PredictionReport {
            theta_f: r.reference_direction.into(),
            regime: r.regime,
            lambda: r.lambda,
            interval: r.interval.into(),
            predicted_headings: r.predicted_headings.into_iter().map(Angle::from).collect(),
            assumption1: r.assumption1,
        }
    }));
    let reachable = Section::from_result(reachable_interval(&theta0).map(IntervalReport::from));
    let perturbation = sigma.map(|s| {
        Section::from_result(perturbation_bounds(&theta0, s).map(|b| PerturbationReport {
            sigma: b.sigma,
            nominal: b.nominal.into(),
            delta_lower: b.delta_lower.into(),
            delta_upper: b.delta_upper.into(),
            raw: b.raw.into(),
            interval: b.interval.into(),
        }))
    });

    let (convergence, locus) = if theta0.len() == 2 {
        let pos = cfg.positions();
        let th = [theta0[0], theta0[1]];
        let cp = Section::from_result(convergence_point(th, [pos[0], pos[1]], [cfg.gains[0], cfg.gains[1]]));
        let anchor = Point::new(0.5 * (pos[0].x + pos[1].x), 0.5 * (pos[0].y + pos[1].y));
        let locus = rho.map(|r| {
            Section::from_result(locus_line(th, anchor, r).map(|l| LocusReport {
                rho: l.rho,
                slope: l.slope,
                anchor: l.anchor,
                h1: l.h1,
                h2: l.h2,
            }))
        });
        (Some(cp), locus)
    } else {
        let locus = rho.map(|_| Section::Refused {
            kind: "outside-proven-scope".into(),
            reason: "convergence-point locus is only known for two agents".into(),
        });
        (None, locus)
    };

    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        shifted_headings: shifted.theta_tilde.into_iter().map(Angle::from).collect(),
        reference_direction,
        reachable_interval: reachable,
        perturbation,
        convergence_point: convergence,
        locus,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Assumption1Record {
    Checked { result: Assumption1 },
    Skipped { reason: String },
}

/// Which gain conditions hold. Purely informational: runs go ahead regardless.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validation {
    pub all_positive: bool,
    pub allow_zeros: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_agent_sum: Option<bool>,
    pub assumption1: Assumption1Record,
    pub warnings: Vec<String>,
}

pub fn validate_gains(theta0: &[f64], gains: &GainVector) -> Validation {
    let holds = |mode| validate_theorem1_condition(gains, mode).is_ok();
    let all_positive = holds(GainCondition::AllPositive);
    let allow_zeros = holds(GainCondition::AllowZeros);
    let two_agent_sum = (gains.len() == 2).then(|| holds(GainCondition::TwoAgentSum));
    let mut warnings = Vec::new();
    if !(all_positive || allow_zeros || two_agent_sum == Some(true)) {
        warnings.push("gains meet none of the sufficient conditions for balancing".to_string());
    }
    let assumption1 = match partition_subgroups(theta0).and_then(|p| validate_assumption1(&p, gains)) {
        Ok(result) => {
            // Signed two-agent gains are covered by K₁ + K₂ > 0 instead.
            if two_agent_sum != Some(true) {
                match result {
                    Assumption1::Satisfied => {}
                    Assumption1::NegativeGain { agent } => {
                        warnings.push(format!("gain ordering fails: agent {} has a negative gain", agent + 1))
                    }
                    Assumption1::OrderViolated { subgroup, pair: (a, b) } => warnings.push(format!(
                        "gain ordering fails: agents {} and {} in subgroup {subgroup} have gains decreasing away from the axis",
                        a + 1,
                        b + 1
                    )),
                }
            }
            Assumption1Record::Checked { result }
        }
        Err(e) => {
            warnings.push(format!("gain ordering check skipped: {e}"));
            Assumption1Record::Skipped { reason: e.to_string() }
        }
    };
    Validation {
        all_positive,
        allow_zeros,
        two_agent_sum,
        assumption1,
        warnings,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeadingReport {
    pub unwrapped_rad: f64,
    /// Wrapped into `(−180°, 180°]`.
    pub wrapped_deg: f64,
}

impl From<f64> for HeadingReport {
    fn from(rad: f64) -> Self {
        HeadingReport {
            unwrapped_rad: rad,
            wrapped_deg: wrap_pi(rad).to_degrees(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub n: usize,
    pub law: LawKind,
    pub omega0: f64,
    pub gains: Vec<f64>,
    pub integrator: IntegratorSettings,
    pub outcome: Outcome,
    pub samples: usize,
    pub final_headings: Vec<HeadingReport>,
    /// Gaps between consecutive final headings around the circle, degrees.
    pub sorted_separations_deg: Vec<f64>,
    pub final_p_mag: f64,
    pub final_centroid: Point,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conserved_drift: Option<f64>,
    /// Error from the steady-state check, if it failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steady_check: Option<String>,
    /// Agent 1's final heading less `ω₀t`.
    pub theta_f_sim: Angle,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_f_pred: Option<Angle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_f_delta_rad: Option<f64>,
    pub validation: Validation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circle_centers: Option<Vec<Point>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisReport>,
}

/// Gaps between consecutive headings once sorted around the circle.
pub fn sorted_separations(headings: &[f64]) -> Vec<f64> {
    let mut w: Vec<f64> = headings.iter().map(|&h| wrap_two_pi(h)).collect();
    w.sort_by(f64::total_cmp);
    let n = w.len();
    (0..n)
        .map(|i| {
            if i + 1 < n {
                w[i + 1] - w[i]
            } else {
                w[0] + crate::angle::TAU - w[n - 1]
            }
        })
        .collect()
}

pub fn run_report(cfg: &ScenarioConfig, trace: &SimulationTrace, analysis: Option<AnalysisReport>) -> Result<RunReport> {
    let last = trace.last();
    let t = last.state.t;
    let headings = &last.state.headings;
    let theta_f_sim = headings[0] - trace.law.omega0 * t;
    let theta_f_pred = analysis.as_ref().and_then(AnalysisReport::theta_f);
    let steady_check = match detect_steady_headings(trace) {
        Ok(_) => None,
        Err(e) => Some(e.to_string()),
    };
    let circle_centers = if trace.law.omega0 != 0.0 {
        Some(
            (0..trace.n())
                .map(|k| circle_center(&last.state, k, trace.law.omega0))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        preset: cfg.seed_name.clone(),
        n: trace.n(),
        law: trace.law.kind,
        omega0: trace.law.omega0,
        gains: trace.law.gains.as_slice().to_vec(),
        integrator: trace.settings,
        outcome: trace.outcome,
        samples: trace.samples.len(),
        final_headings: headings.iter().map(|&h| HeadingReport::from(h)).collect(),
        sorted_separations_deg: sorted_separations(headings).into_iter().map(f64::to_degrees).collect(),
        final_p_mag: last.p_mag,
        final_centroid: last.centroid,
        conserved_drift: trace.conserved_drift(),
        steady_check,
        theta_f_sim: theta_f_sim.into(),
        theta_f_pred: theta_f_pred.map(Angle::from),
        theta_f_delta_rad: theta_f_pred.map(|p| theta_f_sim - p),
        validation: validate_gains(&cfg.theta0(), &trace.law.gains),
        circle_centers,
        analysis,
    })
}
