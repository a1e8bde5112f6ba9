//! Photovoltaic panel with battery storage: stored energy `E` against time,
//! battery health `H` against a thermal-exposure clock `g2`, and panel
//! stress `S` against a thermal-stress clock `g3`.

mod model;
mod params;
mod scenario;
mod weather;

pub use model::{build_g2, build_g3, efficiency, power, rhs, simulate, PvRun, TRAJECTORY_HEADER};
pub use params::{BatteryParams, DemandSchedule, InitialState, PanelParams};
pub use scenario::{Scenario, WeatherConfig, DEFAULT_H_FLOOR};
pub use weather::{
    cell_temperature, cell_temperature_at, load_weather_csv, parse_weather_csv, synth_clear_sky, WeatherSeries,
    WEATHER_HEADER,
};

use thiserror::Error;

use crate::derivator::DerivatorError;
use crate::solver::SolverError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PvError {
    #[error("weather file row {row}, column {column}: {message}")]
    Schema { row: usize, column: usize, message: String },
    #[error("weather time column is not uniform at row {row}")]
    NonUniformGrid { row: usize },
    #[error("{0}")]
    Io(String),
    #[error("scenario config: {0}")]
    Config(String),
    #[error("demand schedule: {0}")]
    Demand(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("step {step} h must divide or be a multiple of the weather step {weather_step} h and tile the horizon")]
    Step { step: f64, weather_step: f64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Derivator(#[from] DerivatorError),
}
