use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{load_weather_csv, synth_clear_sky, BatteryParams, DemandSchedule, InitialState, PanelParams, PvError, WeatherSeries};

pub const DEFAULT_H_FLOOR: f64 = 1e-3;

/// Everything `simulate` needs. Energies in Wh, times in hours.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub weather: WeatherSeries,
    pub panel: PanelParams,
    pub battery: BatteryParams,
    pub demand: DemandSchedule,
    pub initial: InitialState,
    pub step: f64,
    pub h_floor: f64,
}

impl Scenario {
    /// Default parameters with a 7-day synthetic summer week in which the
    /// cell stays above the panel's optimal temperature.
    pub fn reference() -> Self {
        Self {
            weather: WeatherConfig::default().load(Path::new(".")).expect("default weather is valid"),
            panel: PanelParams::default(),
            battery: BatteryParams::default(),
            demand: DemandSchedule::default(),
            initial: InitialState::default(),
            step: 0.1,
            h_floor: DEFAULT_H_FLOOR,
        }
    }

    pub fn validate(&self) -> Result<(), PvError> {
        self.panel.validate()?;
        self.battery.validate()?;
        self.initial.validate(&self.battery)?;
        if !(self.h_floor > 0.0 && self.h_floor <= self.initial.h0) {
            return Err(PvError::InvalidParameter("guards.h_floor must lie in (0, h0]".into()));
        }
        self.solver_weather().map(|_| ())
    }

    /// Weather on the solver grid; the step must divide or be a multiple
    /// of the weather step.
    pub fn solver_weather(&self) -> Result<WeatherSeries, PvError> {
        let dt = self.weather.step();
        let step = self.step;
        if !(step > 0.0 && step.is_finite()) {
            return Err(PvError::Step { step, weather_step: dt });
        }
        let integral = |r: f64| (r - r.round()).abs() <= 1e-9 * r.max(1.0) && r.round() >= 1.0;
        if step == dt {
            return Ok(self.weather.clone());
        }
        if !(integral(step / dt) || integral(dt / step)) {
            return Err(PvError::Step { step, weather_step: dt });
        }
        let (a, b) = self.weather.span();
        if ((b - a) / step - ((b - a) / step).round()).abs() > 1e-9 * ((b - a) / step).max(1.0) {
            return Err(PvError::Step { step, weather_step: dt });
        }
        self.weather.resample(step)
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, PvError> {
        Self::from_toml_with_overrides(text, base_dir, &[])
    }

    pub fn from_toml_file(path: &Path) -> Result<Self, PvError> {
        let text = std::fs::read_to_string(path).map_err(|e| PvError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses a scenario after replacing dotted keys such as `panel.rho`
    /// with TOML literals.
    pub fn from_toml_with_overrides(text: &str, base_dir: &Path, overrides: &[(String, String)]) -> Result<Self, PvError> {
        let mut value: toml::Value = toml::from_str(text).map_err(|e| PvError::Config(e.to_string()))?;
        for (key, raw) in overrides {
            set_dotted(&mut value, key, raw)?;
        }
        let cfg: ScenarioConfig = value.try_into().map_err(|e: toml::de::Error| PvError::Config(e.to_string()))?;
        cfg.into_scenario(base_dir)
    }
}

fn set_dotted(root: &mut toml::Value, key: &str, raw: &str) -> Result<(), PvError> {
    let parsed: toml::Table =
        toml::from_str(&format!("v = {raw}")).map_err(|e| PvError::Config(format!("override {key}={raw}: {e}")))?;
    let new = parsed["v"].clone();
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = node.as_table_mut().ok_or_else(|| PvError::Config(format!("override {key}: `{part}` is not a table")))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), new);
            return Ok(());
        }
        node = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    Err(PvError::Config("empty override key".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioConfig {
    #[serde(default = "default_step")]
    step_hours: f64,
    #[serde(default)]
    panel: PanelParams,
    #[serde(default)]
    battery: BatteryParams,
    #[serde(default)]
    initial: InitialState,
    #[serde(default)]
    demand: DemandConfig,
    #[serde(default)]
    weather: WeatherConfig,
    #[serde(default)]
    guards: GuardConfig,
}

fn default_step() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemandConfig {
    #[serde(default)]
    schedule: DemandSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GuardConfig {
    h_floor: f64,
}

impl Default for GuardConfig {
    fn default() -> Self {
        Self { h_floor: DEFAULT_H_FLOOR }
    }
}

/// Where the weather comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeatherConfig {
    Synthetic { days: usize, peak_poa_wm2: f64, t_min_c: f64, t_max_c: f64 },
    Csv { path: PathBuf },
}

impl Default for WeatherConfig {
    fn default() -> Self {
        WeatherConfig::Synthetic { days: 7, peak_poa_wm2: 900.0, t_min_c: 26.0, t_max_c: 36.0 }
    }
}

impl WeatherConfig {
    /// Relative CSV paths resolve against `base_dir`.
    pub fn load(&self, base_dir: &Path) -> Result<WeatherSeries, PvError> {
        match self {
            WeatherConfig::Synthetic { days, peak_poa_wm2, t_min_c, t_max_c } => {
                synth_clear_sky(*days, *peak_poa_wm2, *t_min_c, *t_max_c)
            }
            WeatherConfig::Csv { path } => load_weather_csv(base_dir.join(path)),
        }
    }
}

impl ScenarioConfig {
    fn into_scenario(self, base_dir: &Path) -> Result<Scenario, PvError> {
        let sc = Scenario {
            weather: self.weather.load(base_dir)?,
            panel: self.panel,
            battery: self.battery,
            demand: self.demand.schedule,
            initial: self.initial,
            step: self.step_hours,
            h_floor: self.guards.h_floor,
        };
        sc.validate()?;
        Ok(sc)
    }
}
