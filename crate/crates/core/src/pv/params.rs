use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::PvError;

/// Serde adapter: kWh on disk, Wh in memory.
mod kwh {
    use super::*;

    pub fn serialize<S: Serializer>(wh: &f64, s: S) -> Result<S::Ok, S::Error> {
        (wh / 1000.0).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d).map(|kwh| kwh * 1000.0)
    }
}

fn check(ok: bool, what: &str) -> Result<(), PvError> {
    if ok {
        Ok(())
    } else {
        Err(PvError::InvalidParameter(what.to_string()))
    }
}

/// Panel efficiency and thermal-stress parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PanelParams {
    /// m².
    pub area: f64,
    pub alpha_ref: f64,
    /// 1/°C.
    pub gamma: f64,
    pub rho: f64,
    /// °C.
    pub noct: f64,
    /// °C; also the efficiency reference temperature.
    pub t_op: f64,
    /// 1/(°C·h).
    pub mu1: f64,
    /// 1/(°C·h).
    pub mu2: f64,
    pub beta: f64,
    pub beta_r: f64,
}

impl Default for PanelParams {
    fn default() -> Self {
        Self {
            area: 18.0,
            alpha_ref: 0.18,
            gamma: 0.004,
            rho: 0.3,
            noct: 45.0,
            t_op: 25.0,
            mu1: 1e-4,
            mu2: 0.5e-4,
            beta: 1.0,
            beta_r: 1.0,
        }
    }
}

impl PanelParams {
    pub fn validate(&self) -> Result<(), PvError> {
        check(self.area > 0.0, "panel.area must be positive")?;
        check(self.alpha_ref > 0.0 && self.alpha_ref < 1.0, "panel.alpha_ref must lie in (0, 1)")?;
        check(self.rho >= 0.0, "panel.rho must be nonnegative")?;
        check(self.noct >= 20.0, "panel.noct must be at least 20")?;
        check(self.mu1 >= 0.0 && self.mu2 >= 0.0, "panel.mu1 and panel.mu2 must be nonnegative")?;
        check(self.beta >= 1.0 && self.beta_r >= 1.0, "panel.beta and panel.beta_r must be at least 1")?;
        check(
            [self.gamma, self.t_op].iter().all(|v| v.is_finite()),
            "panel.gamma and panel.t_op must be finite",
        )
    }
}

/// Storage and battery-health parameters. Energy is held in Wh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BatteryParams {
    #[serde(rename = "e_max_kwh", with = "kwh")]
    pub e_max: f64,
    pub eta0: f64,
    /// °C.
    pub t_opt: f64,
    /// 1/°C².
    pub delta_t: f64,
    /// 1/h.
    pub lambda0: f64,
    pub delta: f64,
    /// 1/h.
    pub nu: f64,
    /// °C.
    pub t_thresh: f64,
    /// 1/°C.
    pub beta_thermal: f64,
}

impl Default for BatteryParams {
    fn default() -> Self {
        Self {
            e_max: 20_000.0,
            eta0: 0.95,
            t_opt: 25.0,
            delta_t: 0.005,
            lambda0: 1e-4,
            delta: 1.0,
            nu: 2e-4,
            t_thresh: 30.0,
            beta_thermal: 0.07,
        }
    }
}

impl BatteryParams {
    pub fn validate(&self) -> Result<(), PvError> {
        check(self.e_max > 0.0 && self.e_max.is_finite(), "battery.e_max_kwh must be positive")?;
        check(self.eta0 > 0.0 && self.eta0 < 1.0, "battery.eta0 must lie in (0, 1)")?;
        check(self.lambda0 >= 0.0 && self.nu >= 0.0, "battery.lambda0 and battery.nu must be nonnegative")?;
        check(self.delta_t >= 0.0 && self.delta >= 0.0, "battery.delta_t and battery.delta must be nonnegative")?;
        check(
            [self.t_opt, self.t_thresh, self.beta_thermal].iter().all(|v| v.is_finite()),
            "battery temperatures and beta_thermal must be finite",
        )
    }
}

/// `(E0, H0, S0)` with `E0` in Wh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialState {
    #[serde(rename = "e0_kwh", with = "kwh")]
    pub e0: f64,
    pub h0: f64,
    pub s0: f64,
}

impl Default for InitialState {
    fn default() -> Self {
        Self { e0: 16_000.0, h0: 0.9, s0: 0.1 }
    }
}

impl InitialState {
    pub fn validate(&self, battery: &BatteryParams) -> Result<(), PvError> {
        check(self.h0 > 0.0 && self.h0 <= 1.0, "initial.h0 must lie in (0, 1]")?;
        check((0.0..=1.0).contains(&self.s0), "initial.s0 must lie in [0, 1]")?;
        check(
            self.e0 >= 0.0 && self.e0 <= battery.e_max * self.h0,
            "initial.e0_kwh must lie in [0, e_max_kwh * h0]",
        )
    }
}

/// Daily piecewise-constant load: `(start hour, watts)` branches covering
/// `[0, 24)`, each holding until the next start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DemandSchedule {
    branches: Vec<(f64, f64)>,
}

impl Default for DemandSchedule {
    fn default() -> Self {
        let branches =
            vec![(0.0, 120.0), (6.0, 180.0), (9.0, 130.0), (13.0, 180.0), (15.0, 130.0), (18.0, 200.0), (23.0, 120.0)];
        Self { branches }
    }
}

impl TryFrom<Vec<(f64, f64)>> for DemandSchedule {
    type Error = PvError;

    fn try_from(branches: Vec<(f64, f64)>) -> Result<Self, PvError> {
        Self::new(branches)
    }
}

impl From<DemandSchedule> for Vec<(f64, f64)> {
    fn from(d: DemandSchedule) -> Self {
        d.branches
    }
}

impl DemandSchedule {
    pub fn new(branches: Vec<(f64, f64)>) -> Result<Self, PvError> {
        let bad = |m: &str| Err(PvError::Demand(m.to_string()));
        match branches.first() {
            None => return bad("schedule is empty"),
            Some(&(start, _)) if start != 0.0 => return bad("first branch must start at hour 0"),
            _ => {}
        }
        if branches.windows(2).any(|w| w[1].0 <= w[0].0) {
            return bad("branch start hours must be strictly increasing");
        }
        if branches.iter().any(|&(s, w)| !(s < 24.0) || !w.is_finite()) {
            return bad("branch starts must be below 24 and loads finite");
        }
        Ok(Self { branches })
    }

    pub fn branches(&self) -> &[(f64, f64)] {
        &self.branches
    }

    /// Load in W at `t` hours, periodic with period 24.
    pub fn at(&self, t: f64) -> f64 {
        let h = t.rem_euclid(24.0);
        let k = self.branches.partition_point(|&(s, _)| s <= h).saturating_sub(1);
        self.branches[k].1
    }
}
