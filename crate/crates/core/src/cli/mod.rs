//! Command-line front end. `run` returns the process exit code: 0 on
//! success, 2 for bad input, 3 for numerical failure.

mod args;
mod ivp_file;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::thread;

use clap::Parser;

pub use args::Cli;
use args::*;
pub use ivp_file::{load_derivator, load_ivp};

use crate::derivator::{DerivatorError, Quadrature};
use crate::expr::FunctionSpec;
use crate::g_exponential::{classify_jumps, g_exp, g_exp_with, GExpError};
use crate::ls_measure::{integrate, integrate_continuous, MeasureError, SignedMeasureView};
use crate::pv::{simulate, synth_clear_sky, PvError, Scenario, WEATHER_HEADER};
use crate::solver::{convergence_study, euler_solve, picard_solve, Reference, SolverError};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Failure classified by cause: bad input or a numerical breakdown.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.message())
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(format!("io: {e}"))
    }
}

impl From<DerivatorError> for CliError {
    fn from(e: DerivatorError) -> Self {
        CliError::Input(format!("derivator: {e}"))
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::Interval { .. } => CliError::Input(format!("ls_measure: {e}")),
            MeasureError::NonFinite { .. } => CliError::Numerical(format!("ls_measure: {e}")),
        }
    }
}

impl From<GExpError> for CliError {
    fn from(e: GExpError) -> Self {
        match e {
            GExpError::Measure(m) => m.into(),
            GExpError::NonFinite { .. } => CliError::Numerical(format!("g_exponential: {e}")),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::GuardViolation { .. } | SolverError::NonFiniteState { .. } | SolverError::NoConvergence { .. } => {
                CliError::Numerical(format!("solver: {e}"))
            }
            SolverError::Measure(m) => m.into(),
            _ => CliError::Input(format!("solver: {e}")),
        }
    }
}

impl From<PvError> for CliError {
    fn from(e: PvError) -> Self {
        match e {
            PvError::Solver(s) => s.into(),
            _ => CliError::Input(format!("pv: {e}")),
        }
    }
}

fn spec(text: &str) -> Result<FunctionSpec, CliError> {
    text.parse().map_err(|e| CliError::Input(format!("function spec: {e}")))
}

/// Writes to `path`, or to `stdout` when no path is given.
fn emit(path: Option<&Path>, stdout: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
        }
        None => body(stdout)?,
    }
    Ok(())
}

/// Parses `args` (program name first) and executes the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = if e.use_stderr() { write!(stderr, "{}", e.render()) } else { write!(stdout, "{}", e.render()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Decompose(a) => decompose(a, stdout),
        Command::Integrate(a) => integrate_cmd(a, stdout),
        Command::Gexp(a) => gexp(a, stdout),
        Command::Solve(a) => solve(a, stdout),
        Command::Simulate(a) => simulate_cmd(a, stdout, stderr),
        Command::SynthWeather(a) => synth(a, stdout),
        Command::Convergence(a) => convergence(a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.code()
        }
    }
}

fn decompose(a: DecomposeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let g = load_derivator(&a.derivator)?;
    let (lo, hi) = g.domain();
    let variation = g.variation();
    let (pos, neg) = g.jordan();
    writeln!(out, "domain: [{lo}, {hi}]")?;
    writeln!(out, "anchor: {}", g.anchor())?;
    writeln!(out, "segments: {}", g.segment_count())?;
    writeln!(out, "total_variation: {}", g.total_variation())?;
    writeln!(out, "nondecreasing: {}", g.is_nondecreasing())?;
    let jumps: Vec<String> = g.jump_points().map(|(t, d)| format!("{t}:{d}")).collect();
    writeln!(out, "jumps: {}", if jumps.is_empty() { "none".into() } else { jumps.join(",") })?;
    let flats: Vec<String> = g.constancy_components().iter().map(|(s, e)| format!("[{s}, {e}]")).collect();
    writeln!(out, "constancy_components: {}", if flats.is_empty() { "none".into() } else { flats.join(" ") })?;
    writeln!(out, "b_in_ng_plus: {}", g.b_in_ng_plus())?;
    writeln!(out, "positive_variation_at_b: {}", pos.eval(hi)?)?;
    writeln!(out, "negative_variation_at_b: {}", neg.eval(hi)?)?;
    writeln!(out, "variation_at_b: {}", variation.eval(hi)?)?;
    if let Some(dir) = a.out_dir {
        std::fs::create_dir_all(&dir)?;
        for (name, d) in [("variation.json", &variation), ("positive.json", &pos), ("negative.json", &neg)] {
            std::fs::write(dir.join(name), d.to_json())?;
        }
        writeln!(out, "wrote: {}", dir.display())?;
    }
    Ok(())
}

fn integrate_cmd(a: IntegrateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut g = load_derivator(&a.derivator)?;
    if let Some(rule) = a.quadrature {
        g = g.with_quadrature(match rule {
            RuleArg::LeftRectangle => Quadrature::LeftRectangle,
            RuleArg::Trapezoid => Quadrature::Trapezoid,
        });
    }
    let f = spec(&a.integrand)?;
    let f = f.to_integrand();
    let (lo, hi) = g.domain();
    let (u, v) = (a.from.unwrap_or(lo), a.to.unwrap_or(hi));
    let value = match a.measure {
        MeasureKind::Signed => integrate(&f, &g, u, v)?,
        MeasureKind::Abs => SignedMeasureView::new(&g).integrate_abs(&f, u, v)?,
        MeasureKind::Continuous => integrate_continuous(&f, &g, u, v)?,
    };
    writeln!(out, "{value}")?;
    Ok(())
}

/// `from, from + step, ...` up to and including `to`.
fn time_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && step.is_finite()) || !(from <= to) {
        return Err(CliError::Input(format!("need step > 0 and from <= to (step {step}, from {from}, to {to})")));
    }
    let tol = 1e-9 * step;
    let mut ts: Vec<f64> = (0..).map(|k| from + k as f64 * step).take_while(|&t| t < to - tol).collect();
    ts.push(to);
    Ok(ts)
}

fn gexp(a: GexpArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let g = load_derivator(&a.derivator)?;
    let h = spec(&a.h)?;
    let h = h.to_integrand();
    let (lo, hi) = g.domain();
    let ts = time_grid(a.from.unwrap_or(lo), a.to.unwrap_or(hi), a.step)?;
    let values: Vec<f64> = match a.route {
        GexpRoute::Product => ts.iter().map(|&t| g_exp(&h, &g, t)).collect::<Result<_, _>>()?,
        GexpRoute::Hbar => {
            let dec = classify_jumps(&h, &g)?;
            ts.iter().map(|&t| g_exp_with(&dec, &h, &g, t)).collect::<Result<_, _>>()?
        }
    };
    emit(a.out.as_deref(), out, |w| {
        writeln!(w, "t,e_h")?;
        ts.iter().zip(&values).try_for_each(|(t, v)| writeln!(w, "{t},{v}"))
    })
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let ivp = load_ivp(&a.ivp)?;
    let traj = match a.scheme {
        Scheme::Euler => euler_solve(&ivp, a.step)?,
        Scheme::Picard => picard_solve(&ivp, a.tol, a.max_iter, a.step)?.0,
    };
    emit(a.out.as_deref(), out, |w| traj.write_csv(w))
}

fn parse_sweeps(raw: &[String]) -> Result<Vec<Vec<(String, String)>>, CliError> {
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for item in raw {
        let (key, values) = item
            .split_once('=')
            .filter(|(k, v)| !k.trim().is_empty() && !v.trim().is_empty())
            .ok_or_else(|| CliError::Input(format!("sweep `{item}` must look like key=v1,v2")))?;
        let values: Vec<&str> = values.split(',').map(str::trim).collect();
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((key.trim().to_string(), v.to_string()));
                    c
                })
            })
            .collect();
    }
    Ok(combos)
}

fn simulate_cmd(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let (text, base) = match &a.config {
        Some(p) => (
            std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
            p.parent().unwrap_or(Path::new(".")).to_path_buf(),
        ),
        None => (String::new(), Path::new(".").to_path_buf()),
    };
    if a.sweep.is_empty() {
        let sc = Scenario::from_toml_str(&text, &base)?;
        let run = simulate(&sc)?;
        let last = run.trajectory.final_state();
        writeln!(err, "simulated {} steps; final E = {} Wh, H = {}, S = {}", run.trajectory.meta.steps, last[0], last[1], last[2])?;
        return emit(a.out.as_deref(), out, |w| run.write_csv(w));
    }

    let dir = a.out_dir.ok_or_else(|| CliError::Input("--sweep needs --out-dir".into()))?;
    std::fs::create_dir_all(&dir)?;
    let combos = parse_sweeps(&a.sweep)?;
    let workers = a
        .threads
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, combos.len());
    let run_one = |i: usize| -> Result<String, CliError> {
        let sc = Scenario::from_toml_with_overrides(&text, &base, &combos[i])?;
        let run = simulate(&sc)?;
        let file = dir.join(format!("run_{i:03}.csv"));
        emit(Some(&file), &mut io::sink(), |w| run.write_csv(w))?;
        let last = run.trajectory.final_state();
        let label: Vec<String> = combos[i].iter().map(|(k, v)| format!("{k}={v}")).collect();
        Ok(format!("{i},{},{},{},{},{}", label.join(";"), file.display(), last[0], last[1], last[2]))
    };
    let mut rows: Vec<(usize, Result<String, CliError>)> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let run_one = &run_one;
                let n = combos.len();
                s.spawn(move || (w..n).step_by(workers).map(|i| (i, run_one(i))).collect::<Vec<_>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    rows.sort_by_key(|r| r.0);
    writeln!(out, "run,overrides,file,final_E_wh,final_H,final_S")?;
    for (_, row) in rows {
        writeln!(out, "{}", row?)?;
    }
    Ok(())
}

fn synth(a: SynthArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let w = synth_clear_sky(a.days, a.peak_poa, a.t_min, a.t_max)?;
    emit(a.out.as_deref(), out, |o| {
        writeln!(o, "{WEATHER_HEADER}")?;
        for k in 0..w.len() {
            writeln!(o, "{},{},{}", w.time(k), w.t_ambient()[k], w.poa()[k])?;
        }
        Ok(())
    })
}

fn convergence(a: ConvergenceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let ivp = load_ivp(&a.ivp)?;
    let reference = match a.exact {
        Some(x) => {
            if x.len() != ivp.dim() {
                return Err(CliError::Input(format!("--exact needs {} values", ivp.dim())));
            }
            Reference::ClosedForm(Box::new(move |_| x.clone()))
        }
        None => {
            let smallest = a.steps.iter().copied().fold(f64::INFINITY, f64::min);
            Reference::Trajectory(euler_solve(&ivp, a.reference_step.unwrap_or(smallest / 16.0))?)
        }
    };
    let rows = convergence_study(&ivp, &a.steps, &reference)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    writeln!(out, "step,error,ratio,order")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.step, r.error, opt(r.ratio), opt(r.order))?;
    }
    Ok(())
}
