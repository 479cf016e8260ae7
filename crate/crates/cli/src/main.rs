use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phase_balance::analysis::{convergence_point, predict_reference_direction, synthesize_gains};
use phase_balance::angle::Angle;
use phase_balance::model::GainVector;
use phase_balance::report::{analyze, run_report, write_trace_csv, SCHEMA_VERSION};
use phase_balance::scenario::{ScenarioConfig, PRESETS};
use phase_balance::sim::{simulate, Outcome};
use phase_balance::Error;
use rayon::prelude::*;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "phasebal", version, about = "Simulate and predict phase balancing with heterogeneous gains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario; writes trace.csv and report.json
    Run(RunArgs),
    /// Closed-form predictions only, printed as JSON
    Predict(PredictArgs),
    /// Find gains that steer agent 1 to a target direction
    Synthesize(SynthArgs),
    /// Simulate many gain sets in parallel; writes sweep.csv
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Source {
    /// Built-in scenario
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS), conflicts_with = "config")]
    preset: Option<String>,
    /// Flat JSON scenario file
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Turn rate, rad/s
    #[arg(long, allow_hyphen_values = true)]
    omega0: Option<f64>,
    /// Integrator step, seconds
    #[arg(long)]
    dt: Option<f64>,
    /// Simulation horizon, seconds
    #[arg(long)]
    tmax: Option<f64>,
    /// Convergence tolerance on the order parameter
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Comma-separated gains, e.g. `3,-1`
    #[arg(long, allow_hyphen_values = true)]
    gains: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Relative gain error for the perturbation bound
    #[arg(long)]
    sigma: Option<f64>,
    /// Gain ratio K1/K2 for the locus of convergence points
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, allow_hyphen_values = true)]
    gains: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    /// Also write report.json here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    source: Source,
    /// Target direction for agent 1, degrees
    #[arg(long, allow_hyphen_values = true)]
    target: f64,
    /// Positive gain scale
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    c: f64,
    /// Confirm the result by simulation
    #[arg(long)]
    simulate: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: Source,
    /// One gain set per flag
    #[arg(long, allow_hyphen_values = true)]
    gains: Vec<String>,
    /// Two agents: gain ratio K1/K2, swept over --eta with K = (eta, eta/rho)
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    /// Gain scale for the --rho sweep; repeatable (default 0.5, 1, 2, 4, 8)
    #[arg(long, allow_hyphen_values = true)]
    eta: Vec<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::UnknownPreset(_) => 2,
            Error::NumericalBlowup { .. } => 4,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn parse_gains(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure {
            code: 2,
            message: format!("bad gain list `{text}`: {e}"),
        })
}

fn load(source: &Source, gains: Option<&str>) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match (&source.preset, &source.config) {
        (Some(name), _) => ScenarioConfig::preset(name)?,
        (None, Some(path)) => ScenarioConfig::from_path(path)?,
        (None, None) => {
            return Err(Failure {
                code: 2,
                message: "need --preset or --config".into(),
            })
        }
    };
    if let Some(g) = gains {
        cfg.gains = parse_gains(g)?;
    }
    if let Some(w) = source.omega0 {
        cfg.omega0 = w;
    }
    if let Some(dt) = source.dt {
        cfg.dt = dt;
    }
    if let Some(t) = source.tmax {
        cfg.t_max = t;
    }
    if let Some(tol) = source.tol {
        cfg.balance_tol = tol;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    fs::write(dir.join(name), text + "\n")?;
    Ok(())
}

fn write_trace(dir: &Path, trace: &phase_balance::sim::SimulationTrace) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let file = fs::File::create(dir.join("trace.csv"))?;
    write_trace_csv(trace, BufWriter::new(file))?;
    Ok(())
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let cfg = load(&args.source, args.gains.as_deref())?;
    let trace = simulate(&cfg.to_scenario()?)?;
    let analysis = analyze(&cfg, args.sigma, args.rho)?;
    let report = run_report(&cfg, &trace, Some(analysis))?;
    write_trace(&args.out, &trace)?;
    write_json(&args.out, "report.json", &report)?;

    emit(&match trace.outcome {
        Outcome::Converged { t } => format!("converged at t = {t} s"),
        Outcome::HorizonReached { t } => format!("horizon reached at t = {t} s (not balanced)"),
    })?;
    emit(&format!("theta_f (sim)  = {:.6} deg", report.theta_f_sim.deg))?;
    if let Some(p) = report.theta_f_pred {
        emit(&format!("theta_f (pred) = {:.6} deg", p.deg))?;
    }
    for w in &report.validation.warnings {
        eprintln!("warning: {w}");
    }
    emit(&format!("wrote {}", args.out.display()))?;
    Ok(())
}

fn predict(args: &PredictArgs) -> Result<(), Failure> {
    let cfg = load(&args.source, args.gains.as_deref())?;
    let report = analyze(&cfg, args.sigma, args.rho)?;
    emit(&serde_json::to_string_pretty(&report).expect("report serializes"))?;
    if let Some(out) = &args.out {
        write_json(out, "report.json", &report)?;
    }
    Ok(())
}

fn refusal(e: &Error) -> Option<Value> {
    let kind = match e {
        Error::Unreachable { .. } => "unreachable",
        Error::OutOfScope(_) => "outside-proven-scope",
        Error::Degenerate(_) => "degenerate",
        _ => return None,
    };
    Some(json!({
        "schema_version": SCHEMA_VERSION,
        "status": "refused",
        "kind": kind,
        "reason": e.to_string(),
    }))
}

fn synthesize(args: &SynthArgs) -> Result<(), Failure> {
    let mut cfg = load(&args.source, None)?;
    let theta0 = cfg.theta0();
    let target = args.target.to_radians();
    let synth = match synthesize_gains(&theta0, target, args.c) {
        Ok(s) => s,
        Err(e) => {
            let record = refusal(&e).ok_or_else(|| Failure::from(e))?;
            emit(&serde_json::to_string_pretty(&record).expect("record serializes"))?;
            if let Some(out) = &args.out {
                write_json(out, "report.json", &record)?;
            }
            return Ok(());
        }
    };
    let back = predict_reference_direction(&theta0, &synth.gains)?;
    let mut record = json!({
        "schema_version": SCHEMA_VERSION,
        "status": "computed",
        "target": Angle::from(target),
        "c": args.c,
        "regime": synth.regime,
        "gains": synth.gains.as_slice(),
        "weights": synth.weights,
        "round_trip": {
            "theta_f": Angle::from(back.reference_direction),
            "error_rad": back.reference_direction - target,
        },
    });
    if args.simulate {
        cfg.gains = synth.gains.as_slice().to_vec();
        let trace = simulate(&cfg.to_scenario()?)?;
        let last = trace.last();
        let sim = last.state.headings[0] - cfg.omega0 * last.state.t;
        record["simulation"] = json!({
            "outcome": trace.outcome,
            "theta_f": Angle::from(sim),
            "error_rad": sim - target,
        });
        if let Some(out) = &args.out {
            write_trace(out, &trace)?;
        }
    }
    emit(&serde_json::to_string_pretty(&record).expect("record serializes"))?;
    if let Some(out) = &args.out {
        write_json(out, "report.json", &record)?;
    }
    Ok(())
}

struct SweepCase {
    label: String,
    gains: Vec<f64>,
}

fn csv_field(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

fn sweep_row(base: &ScenarioConfig, case: &SweepCase) -> String {
    let mut cfg = base.clone();
    cfg.gains = case.gains.clone();
    let gains = case.gains.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(";");
    let theta0 = cfg.theta0();
    let pred = GainVector::new(cfg.gains.clone())
        .and_then(|g| predict_reference_direction(&theta0, &g))
        .ok()
        .map(|r| r.reference_direction);
    let cp = (cfg.len() == 2)
        .then(|| {
            let pos = cfg.positions();
            convergence_point([theta0[0], theta0[1]], [pos[0], pos[1]], [cfg.gains[0], cfg.gains[1]]).ok()
        })
        .flatten();

    let sim = cfg.to_scenario().and_then(|s| simulate(&s));
    let (status, t_end, theta_f, p_mag, centroid) = match &sim {
        Ok(trace) => {
            let last = trace.last();
            let status = if trace.outcome.is_converged() { "converged" } else { "horizon" };
            (
                status.to_string(),
                Some(trace.outcome.t()),
                Some(last.state.headings[0] - cfg.omega0 * last.state.t),
                Some(last.p_mag),
                Some(last.centroid),
            )
        }
        Err(Error::NumericalBlowup { .. }) => ("blowup".into(), None, None, None, None),
        Err(_) => ("invalid".into(), None, None, None, None),
    };
    [
        case.label.clone(),
        gains,
        status,
        csv_field(t_end),
        csv_field(theta_f.map(f64::to_degrees)),
        csv_field(pred.map(f64::to_degrees)),
        csv_field(theta_f.zip(pred).map(|(s, p)| s - p)),
        csv_field(p_mag),
        csv_field(centroid.map(|c| c.x)),
        csv_field(centroid.map(|c| c.y)),
        csv_field(cp.map(|c| c.point.x)),
        csv_field(cp.map(|c| c.point.y)),
    ]
    .join(",")
}

fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let base = load(&args.source, None)?;
    let mut cases = Vec::new();
    for (i, g) in args.gains.iter().enumerate() {
        cases.push(SweepCase {
            label: format!("set{}", i + 1),
            gains: parse_gains(g)?,
        });
    }
    if let Some(rho) = args.rho {
        if base.len() != 2 {
            return Err(Failure {
                code: 3,
                message: "--rho sweeps need a two-agent scenario".into(),
            });
        }
        let etas = if args.eta.is_empty() { vec![0.5, 1.0, 2.0, 4.0, 8.0] } else { args.eta.clone() };
        for eta in etas {
            cases.push(SweepCase {
                label: format!("eta={eta}"),
                gains: vec![eta, eta / rho],
            });
        }
    }
    if cases.is_empty() {
        cases.push(SweepCase {
            label: "base".into(),
            gains: base.gains.clone(),
        });
    }
    for c in &cases {
        if c.gains.len() != base.len() {
            return Err(Error::DimensionMismatch {
                what: "gains",
                expected: base.len(),
                got: c.gains.len(),
            }
            .into());
        }
    }

    let rows: Vec<String> = cases.par_iter().map(|c| sweep_row(&base, c)).collect();
    fs::create_dir_all(&args.out)?;
    let mut text = String::from(
        "label,gains,outcome,t_end,theta_f_sim_deg,theta_f_pred_deg,theta_f_delta_rad,p_mag,xc,yc,cp_x,cp_y\n",
    );
    for r in rows {
        text.push_str(&r);
        text.push('\n');
    }
    fs::write(args.out.join("sweep.csv"), text)?;
    emit(&format!("wrote {} rows to {}", cases.len(), args.out.join("sweep.csv").display()))?;
    Ok(())
}

/// Writes a line to stdout. A closed pipe (`| head`) is not an error.
fn emit(line: &str) -> Result<(), Failure> {
    match writeln!(io::stdout().lock(), "{line}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Predict(a) => predict(a),
        Command::Synthesize(a) => synthesize(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
