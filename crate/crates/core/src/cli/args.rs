use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "stieltjes", version, about = "Stieltjes differential equations and the PV thermal-stress model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize a derivator and write its variation and Jordan parts.
    Decompose(DecomposeArgs),
    /// Integrate a function against μ_g, |μ_g| or the continuous part of μ_g.
    Integrate(IntegrateArgs),
    /// Tabulate the g-exponential e_h(t; a).
    Gexp(GexpArgs),
    /// Solve an IVP described by a TOML file.
    Solve(SolveArgs),
    /// Run the PV/battery scenario.
    Simulate(SimulateArgs),
    /// Write a synthetic clear-sky weather CSV.
    SynthWeather(SynthArgs),
    /// Euler error table for a sequence of steps.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Derivator JSON file.
    #[arg(long, short = 'g')]
    pub derivator: PathBuf,
    /// Directory for variation.json, positive.json and negative.json.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MeasureKind {
    Signed,
    Abs,
    Continuous,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RuleArg {
    LeftRectangle,
    Trapezoid,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[arg(long, short = 'g')]
    pub derivator: PathBuf,
    /// Number, `table:t0:v0,t1:v1,...`, `poly:c0,c1,...` or `expr:...` in `t`.
    #[arg(long, short = 'f', allow_hyphen_values = true)]
    pub integrand: String,
    /// Left end of [from, to); defaults to the domain start.
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    /// Right end of [from, to); defaults to the domain end.
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long, value_enum, default_value = "signed")]
    pub measure: MeasureKind,
    /// Overrides the rule of sampled densities.
    #[arg(long, value_enum)]
    pub quadrature: Option<RuleArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GexpRoute {
    Product,
    Hbar,
}

#[derive(Debug, Args)]
pub struct GexpArgs {
    #[arg(long, short = 'g')]
    pub derivator: PathBuf,
    /// Same forms as `integrate --integrand`.
    #[arg(long, allow_hyphen_values = true)]
    pub h: String,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub step: f64,
    #[arg(long, value_enum, default_value = "product")]
    pub route: GexpRoute,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Scheme {
    Euler,
    Picard,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// IVP description (TOML).
    #[arg(long)]
    pub ivp: PathBuf,
    #[arg(long)]
    pub step: f64,
    #[arg(long, value_enum, default_value = "euler")]
    pub scheme: Scheme,
    /// Picard stopping tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario TOML; the built-in seven-day scenario when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Trajectory CSV; stdout when omitted.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// `key=v1,v2,...` over dotted config keys; repeat for a grid of runs.
    #[arg(long)]
    pub sweep: Vec<String>,
    /// Directory receiving one CSV per sweep run.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 7)]
    pub days: usize,
    #[arg(long, default_value_t = 900.0)]
    pub peak_poa: f64,
    #[arg(long, default_value_t = 26.0, allow_hyphen_values = true)]
    pub t_min: f64,
    #[arg(long, default_value_t = 36.0, allow_hyphen_values = true)]
    pub t_max: f64,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[arg(long)]
    pub ivp: PathBuf,
    /// Comma-separated steps, largest first.
    #[arg(long, value_delimiter = ',', required = true)]
    pub steps: Vec<f64>,
    /// Exact final state, comma-separated; otherwise a fine Euler run is the reference.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub exact: Option<Vec<f64>>,
    /// Step of the reference run; defaults to the smallest step / 16.
    #[arg(long)]
    pub reference_step: Option<f64>,
}
