use std::io::{self, Write};
use std::sync::Arc;

use super::weather::cell_temperature_at;
use super::{BatteryParams, PanelParams, PvError, Scenario, WeatherSeries};
use crate::derivator::{Derivator, Quadrature};
use crate::solver::{euler_solve, Guard, GuardPolicy, Limit, StieltjesIvp, Trajectory};

pub const TRAJECTORY_HEADER: &str = "time_hours,E_wh,H,S,t_cell_c,power_w,demand_w,alpha";

/// `α = α_ref (1 − γ(T_cell − T_op))(1 − ρ S)`.
pub fn efficiency(panel: &PanelParams, t_cell: f64, s: f64) -> f64 {
    panel.alpha_ref * (1.0 - panel.gamma * (t_cell - panel.t_op)) * (1.0 - panel.rho * s)
}

/// `P = A α I_POA` in W.
pub fn power(panel: &PanelParams, t_cell: f64, poa: f64, s: f64) -> f64 {
    panel.area * efficiency(panel, t_cell, s) * poa
}

fn g2_density(battery: &BatteryParams, t_ambient: f64) -> f64 {
    (battery.beta_thermal * (t_ambient - battery.t_thresh).max(0.0)).exp()
}

fn g3_density(panel: &PanelParams, t_cell: f64) -> f64 {
    let hot = (t_cell - panel.t_op).max(0.0);
    let cold = (panel.t_op - t_cell).max(0.0);
    let heat = if hot > 0.0 { panel.mu1 * hot.powf(panel.beta) } else { 0.0 };
    let cool = if cold > 0.0 { panel.mu2 * cold.powf(panel.beta_r) } else { 0.0 };
    heat - cool
}

fn sampled(w: &WeatherSeries, density: impl Fn(f64, f64) -> f64) -> Result<Derivator, PvError> {
    let (a, b) = w.span();
    let values = w.t_ambient().iter().zip(w.poa()).map(|(&ta, &p)| density(ta, p)).collect();
    Ok(Derivator::sampled(a, b, 0.0, values, Quadrature::LeftRectangle)?)
}

/// Thermal-exposure clock: density `exp(β_thermal · max(0, T_amb − T_thresh))`.
pub fn build_g2(w: &WeatherSeries, battery: &BatteryParams) -> Result<Derivator, PvError> {
    sampled(w, |ta, _| g2_density(battery, ta))
}

/// Thermal-stress clock: density `μ1 max(0, T_cell − T_op)^β − μ2 max(0, T_op − T_cell)^β_r`.
pub fn build_g3(w: &WeatherSeries, panel: &PanelParams) -> Result<Derivator, PvError> {
    sampled(w, |ta, p| g3_density(panel, cell_temperature_at(ta, p, panel.noct)))
}

/// Rates `(f1, f2, f3)` for the state `(E, H, S)` at `t` hours.
pub fn rhs(sc: &Scenario, t: f64, state: [f64; 3]) -> [f64; 3] {
    let (ta, poa) = sc.weather.at(t);
    rates(&sc.panel, &sc.battery, sc.demand.at(t), ta, poa, state)
}

fn rates(panel: &PanelParams, bat: &BatteryParams, demand: f64, ta: f64, poa: f64, [e, h, s]: [f64; 3]) -> [f64; 3] {
    let t_cell = cell_temperature_at(ta, poa, panel.noct);
    let p = power(panel, t_cell, poa, s);
    let soc = e / (bat.e_max * h);
    let storage = bat.eta0 * h * (p - demand) / (1.0 + bat.delta_t * (ta - bat.t_opt).powi(2));
    let leak = bat.lambda0 * (1.0 + bat.delta * (1.0 - h).powi(2)) * e;
    let rate_e = storage * (1.0 - soc) - leak;
    let rate_h = -bat.nu * (soc - 0.5).powi(4) * h;
    let rate_s = if t_cell >= panel.t_op { 1.0 - s } else { s };
    [rate_e, rate_h, rate_s]
}

/// Trajectory of `(E, H, S)` with the driving series on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PvRun {
    pub trajectory: Trajectory,
    pub t_cell: Vec<f64>,
    pub power: Vec<f64>,
    pub demand: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl PvRun {
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "{TRAJECTORY_HEADER}")?;
        for (k, (t, x)) in self.trajectory.grid.iter().zip(&self.trajectory.states).enumerate() {
            writeln!(
                out,
                "{t},{},{},{},{},{},{},{}",
                x[0], x[1], x[2], self.t_cell[k], self.power[k], self.demand[k], self.alpha[k]
            )?;
        }
        Ok(())
    }

    /// Largest `α` within each whole or partial day.
    pub fn daily_peak_alpha(&self) -> Vec<f64> {
        let mut peaks: Vec<f64> = Vec::new();
        for (t, a) in self.trajectory.grid.iter().zip(&self.alpha) {
            let day = (t / 24.0).floor() as usize;
            if day >= peaks.len() {
                peaks.resize(day + 1, f64::NEG_INFINITY);
            }
            peaks[day] = peaks[day].max(*a);
        }
        peaks
    }
}

/// Assembles the system `(Id, g2, g3)` and runs Euler at the scenario step.
pub fn simulate(sc: &Scenario) -> Result<PvRun, PvError> {
    sc.validate()?;
    let w = sc.solver_weather()?;
    let x0 = vec![sc.initial.e0, sc.initial.h0, sc.initial.s0];
    let trajectory = if w.len() == 1 {
        Trajectory {
            grid: vec![w.time(0)],
            states: vec![x0],
            post_jump: Vec::new(),
            meta: Trajectory::meta_for("euler", sc.step, &[w.time(0)]),
        }
    } else {
        let (a, b) = w.span();
        let derivators = vec![Derivator::identity(a, b)?, build_g2(&w, &sc.battery)?, build_g3(&w, &sc.panel)?];
        let (panel, battery, demand, series) = (sc.panel, sc.battery, sc.demand.clone(), Arc::new(w.clone()));
        let rhs = move |t: f64, x: &[f64], out: &mut [f64]| {
            let (ta, poa) = series.at(t);
            out.copy_from_slice(&rates(&panel, &battery, demand.at(t), ta, poa, [x[0], x[1], x[2]]));
        };
        let ivp = StieltjesIvp::new(derivators, x0, rhs)?
            .with_guard(1, Guard::clamp(sc.h_floor, 1.0))?
            .with_guard(
                0,
                Guard {
                    lower: Limit::Const(0.0),
                    upper: Limit::Scaled { component: 1, factor: sc.battery.e_max },
                    policy: GuardPolicy::Clamp,
                    tolerance: 0.0,
                },
            )?
            .with_guard(2, Guard::clamp(0.0, 1.0))?;
        euler_solve(&ivp, sc.step)?
    };
    let n = trajectory.grid.len();
    let (mut t_cell, mut power_w, mut demand, mut alpha) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (t, x) in trajectory.grid.iter().zip(&trajectory.states) {
        let (ta, poa) = w.at(*t);
        let tc = cell_temperature_at(ta, poa, sc.panel.noct);
        t_cell.push(tc);
        alpha.push(efficiency(&sc.panel, tc, x[2]));
        power_w.push(power(&sc.panel, tc, poa, x[2]));
        demand.push(sc.demand.at(*t));
    }
    Ok(PvRun { trajectory, t_cell, power: power_w, demand, alpha })
}
