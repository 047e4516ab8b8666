//! Command-line front end: precision-bound tables, Monte Carlo simulation
//! plans, Fisher-information diagnostics, and the optical error budget.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gmtomo::bounds::{
    gm_bound_mse, gm_scheme_metric, optimal_probabilities_diagonal, standard_mse_theory,
};
use gmtomo::estimation::{
    fisher_information, gm_trace, quantum_fisher, MeasurementEnsemble,
};
use gmtomo::harness::{run_plan_with_threads, ExperimentPlan};
use gmtomo::optics::{systematic_budget, OpticsParams};
use gmtomo::qubit::{BlochState, PauliAxis, Vec3};

/// Argument or validation problems exit with 2, runtime failures with 1.
const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "gmtomo",
    about = "Qubit tomography precision bounds, adaptive-strategy simulation, and error budgets",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Gill-Massar bound, optimal probabilities, and (for the MSE)
    /// the standard-tomography reference over one radius or a grid.
    Bound(BoundArgs),
    /// Run a simulation plan file and write JSON/CSV reports.
    Simulate(SimulateArgs),
    /// Print Fisher matrices and check the Gill-Massar inequality for an
    /// ensemble of measurement axes.
    Fisher(FisherArgs),
    /// Print the first-order systematic error budget of the waveplate/PBS
    /// measurement chain.
    ErrorBudget(ErrorBudgetArgs),
}

#[derive(Args)]
struct BoundArgs {
    /// Figure of merit: mse, bures, or wmse.
    #[arg(long)]
    fom: String,
    /// Metric order for --fom wmse (1 = Bures, 2 = quantum Chernoff).
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Bloch-vector length.
    #[arg(long, conflicts_with = "s_grid")]
    s: Option<f64>,
    /// Radius grid `from:to:step`, inclusive of both ends.
    #[arg(long)]
    s_grid: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Path to a JSON plan file.
    plan: PathBuf,
    /// Output prefix; writes <prefix>.json and <prefix>.csv.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads for the trial sweep.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct FisherArgs {
    /// True state as `x,y,z`.
    #[arg(long)]
    s: String,
    /// Measurement axis with weight, `x,y,z:weight`; repeatable.
    #[arg(long = "axis", required = true)]
    axes: Vec<String>,
}

#[derive(Args)]
struct ErrorBudgetArgs {
    /// Use the published calibrated instrument parameters.
    #[arg(long)]
    paper_defaults: bool,
    /// Bloch-vector length entering the PBS-leakage term.
    #[arg(long, default_value_t = 1.0)]
    s_len: f64,
    /// Uncertainty of the PBS leakage beta.
    #[arg(long)]
    beta_unc: Option<f64>,
    /// Uncertainty of the efficiency unbalance eta.
    #[arg(long)]
    eta_unc: Option<f64>,
    /// Waveplate phase uncertainty (applies to both plates); accepts
    /// `deg`/`rad` suffixes, default radians.
    #[arg(long)]
    delta_unc: Option<String>,
    /// Waveplate angle uncertainty (applies to both plates); accepts
    /// `deg`/`rad` suffixes, default radians.
    #[arg(long)]
    theta_unc: Option<String>,
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn runtime(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bound(args) => cmd_bound(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fisher(args) => cmd_fisher(args),
        Command::ErrorBudget(args) => cmd_error_budget(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Parses an angle with an optional `deg` or `rad` suffix (default radians).
fn parse_angle(text: &str) -> Result<f64, Failure> {
    let t = text.trim();
    let (num, factor) = if let Some(stripped) = t.strip_suffix("deg") {
        (stripped, std::f64::consts::PI / 180.0)
    } else if let Some(stripped) = t.strip_suffix("rad") {
        (stripped, 1.0)
    } else {
        (t, 1.0)
    };
    num.trim()
        .parse::<f64>()
        .map(|v| v * factor)
        .map_err(|_| usage(format!("cannot parse angle `{text}` (use e.g. 0.3deg or 0.0052rad)")))
}

fn parse_radius(s: f64) -> Result<f64, Failure> {
    if !(0.0..=1.0).contains(&s) {
        return Err(usage(format!(
            "radius s = {s} is out of range: the Bloch-vector length must lie in [0, 1]"
        )));
    }
    Ok(s)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!("grid `{spec}` must have the form from:to:step")));
    }
    let from: f64 = parts[0]
        .parse()
        .map_err(|_| usage(format!("bad grid start `{}`", parts[0])))?;
    let to: f64 = parts[1]
        .parse()
        .map_err(|_| usage(format!("bad grid end `{}`", parts[1])))?;
    let step: f64 = parts[2]
        .parse()
        .map_err(|_| usage(format!("bad grid step `{}`", parts[2])))?;
    if step <= 0.0 || to < from {
        return Err(usage(format!("grid `{spec}` must satisfy from <= to and step > 0")));
    }
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let s = from + step * k as f64;
        if s > to + 1e-12 {
            break;
        }
        out.push(parse_radius(s)?);
        k += 1;
    }
    Ok(out)
}

fn cmd_bound(args: BoundArgs) -> Result<(), Failure> {
    let grid = match (&args.s, &args.s_grid) {
        (Some(s), None) => vec![parse_radius(*s)?],
        (None, Some(spec)) => parse_grid(spec)?,
        (None, None) => return Err(usage("one of --s or --s-grid is required")),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };

    match args.fom.as_str() {
        "mse" => {
            println!(
                "{:>8}  {:>12}  {:>10}  {:>10}  {:>10}  {:>12}",
                "s", "gm_bound", "p1", "p2", "p3", "standard"
            );
            for &s in &grid {
                let probs = optimal_probabilities_diagonal([1.0, 1.0, 1.0], s)
                    .map_err(|e| runtime(e.to_string()))?;
                println!(
                    "{:>8.4}  {:>12.6}  {:>10.6}  {:>10.6}  {:>10.6}  {:>12.6}",
                    s,
                    gm_bound_mse(s),
                    probs[0],
                    probs[1],
                    probs[2],
                    standard_mse_theory(s)
                );
            }
        }
        "bures" | "wmse" => {
            let n = if args.fom == "bures" { 1 } else { args.n };
            if n == 0 {
                return Err(usage("metric order --n must be at least 1"));
            }
            println!(
                "{:>8}  {:>12}  {:>10}  {:>10}  {:>10}",
                "s", "gm_bound", "p1", "p2", "p3"
            );
            for &s in &grid {
                let scheme = gm_scheme_metric(s, n).map_err(|_| {
                    usage(format!(
                        "radius s = {s} is out of range: the metric weighting needs s in [0, 1)"
                    ))
                })?;
                println!(
                    "{:>8.4}  {:>12.6}  {:>10.6}  {:>10.6}  {:>10.6}",
                    s,
                    scheme.bound,
                    scheme.probabilities[0],
                    scheme.probabilities[1],
                    scheme.probabilities[2]
                );
            }
        }
        other => {
            return Err(usage(format!(
                "unknown figure of merit `{other}` (expected mse, bures, or wmse)"
            )))
        }
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.plan)
        .map_err(|e| runtime(format!("cannot read plan {}: {e}", args.plan.display())))?;
    let plan: ExperimentPlan = serde_json::from_str(&text)
        .map_err(|e| runtime(format!("plan {} is invalid: {e}", args.plan.display())))?;
    plan.validate()
        .map_err(|e| runtime(format!("plan {} is invalid: {e}", args.plan.display())))?;

    let prefix = args
        .out
        .clone()
        .or_else(|| plan.output_prefix.clone())
        .ok_or_else(|| usage("no output prefix: pass --out or set output_prefix in the plan"))?;
    let threads = args.threads.or(plan.threads);

    let report = run_plan_with_threads(&plan, threads).map_err(|e| runtime(e.to_string()))?;

    let json_path = PathBuf::from(format!("{prefix}.json"));
    let csv_path = PathBuf::from(format!("{prefix}.csv"));
    report
        .write_json(&json_path)
        .map_err(|e| runtime(format!("cannot write {}: {e}", json_path.display())))?;
    report
        .write_csv(&csv_path)
        .map_err(|e| runtime(format!("cannot write {}: {e}", csv_path.display())))?;

    println!(
        "{:>8}  {:>12}  {:>8}  {:>12}  {:>12}  {:>10}  {:>8}",
        "s", "strategy", "fom", "scaled_error", "sem", "gm_bound", "reps"
    );
    for c in &report.cells {
        println!(
            "{:>8.4}  {:>12}  {:>8}  {:>12.6}  {:>12.6}  {:>10.6}  {:>8}",
            c.s, c.strategy, c.fom, c.scaled_error, c.sem, c.gm_bound, c.n_reps
        );
    }
    eprintln!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(())
}

fn parse_vec3(text: &str) -> Result<Vec3, Failure> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(usage(format!("`{text}` must be three comma-separated numbers")));
    }
    let mut v = [0.0; 3];
    for (k, p) in parts.iter().enumerate() {
        v[k] = p
            .trim()
            .parse()
            .map_err(|_| usage(format!("cannot parse component `{p}` of `{text}`")))?;
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

fn cmd_fisher(args: FisherArgs) -> Result<(), Failure> {
    let s = parse_vec3(&args.s)?;
    let state = BlochState::new(s).map_err(|e| usage(e.to_string()))?;

    let mut items = Vec::new();
    for spec in &args.axes {
        let (dir_text, weight_text) = spec
            .rsplit_once(':')
            .ok_or_else(|| usage(format!("axis `{spec}` must have the form x,y,z:weight")))?;
        let dir = parse_vec3(dir_text)?;
        let weight: f64 = weight_text
            .trim()
            .parse()
            .map_err(|_| usage(format!("cannot parse weight `{weight_text}`")))?;
        let axis = PauliAxis::from_direction(dir).map_err(|e| usage(e.to_string()))?;
        items.push((axis, weight));
    }
    let ensemble = MeasurementEnsemble::new(items).map_err(|e| usage(e.to_string()))?;

    let info = fisher_information(&state, &ensemble).map_err(|e| usage(e.to_string()))?;
    let j = quantum_fisher(&state).map_err(|e| usage(e.to_string()))?;
    let trace = gm_trace(&state, &ensemble).map_err(|e| usage(e.to_string()))?;

    println!("Fisher information I:");
    print_matrix(&info.matrix());
    println!("quantum Fisher J:");
    print_matrix(&j.matrix());
    let verdict = if trace <= 1.0 + 1e-9 { "PASS" } else { "FAIL" };
    println!("tr(J^-1 I) = {trace:.9}  gill-massar (<= 1): {verdict}");
    Ok(())
}

fn print_matrix(m: &gmtomo::qubit::Mat3) {
    for i in 0..3 {
        println!(
            "  {:>12.6}  {:>12.6}  {:>12.6}",
            m[(i, 0)],
            m[(i, 1)],
            m[(i, 2)]
        );
    }
}

fn cmd_error_budget(args: ErrorBudgetArgs) -> Result<(), Failure> {
    let mut params = if args.paper_defaults {
        OpticsParams::calibrated_reference()
    } else {
        OpticsParams {
            beta: 0.0,
            eta: 0.0,
            delta1: gmtomo::optics::IDEAL_DELTA1,
            delta2: gmtomo::optics::IDEAL_DELTA2,
            theta1: 0.0,
            theta2: 0.0,
            d_beta: 0.0,
            d_eta: 0.0,
            d_delta1: 0.0,
            d_delta2: 0.0,
            d_theta1: 0.0,
            d_theta2: 0.0,
        }
    };
    if let Some(v) = args.beta_unc {
        params.d_beta = v;
    }
    if let Some(v) = args.eta_unc {
        params.d_eta = v;
    }
    if let Some(text) = &args.delta_unc {
        let v = parse_angle(text)?;
        params.d_delta1 = v;
        params.d_delta2 = v;
    }
    if let Some(text) = &args.theta_unc {
        let v = parse_angle(text)?;
        params.d_theta1 = v;
        params.d_theta2 = v;
    }
    params.validate().map_err(|e| usage(e.to_string()))?;
    if !(0.0..=1.0).contains(&args.s_len) {
        return Err(usage(format!(
            "--s-len {} is out of range: the Bloch-vector length must lie in [0, 1]",
            args.s_len
        )));
    }

    let report = systematic_budget(&params, args.s_len);
    println!("{:>8}  {:>14}  assumption", "source", "contribution");
    for (name, line) in report.lines() {
        println!("{:>8}  {:>14.6e}  {}", name, line.contribution, line.assumption);
    }
    println!("{:>8}  {:>14.6e}", "total", report.total);
    Ok(())
}
