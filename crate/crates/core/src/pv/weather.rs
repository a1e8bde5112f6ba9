use std::f64::consts::PI;
use std::path::Path;

use super::PvError;

pub const WEATHER_HEADER: &str = "time_hours,t_ambient_c,poa_wm2";
const SYNTH_STEP: f64 = 0.1;

/// Ambient temperature and plane-of-array irradiance on a uniform grid
/// `t0 + k·dt` (hours).
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    t0: f64,
    dt: f64,
    t_ambient: Vec<f64>,
    poa: Vec<f64>,
}

impl WeatherSeries {
    pub fn new(t0: f64, dt: f64, t_ambient: Vec<f64>, poa: Vec<f64>) -> Result<Self, PvError> {
        let fail = |m: &str| Err(PvError::InvalidParameter(m.to_string()));
        if t_ambient.is_empty() || t_ambient.len() != poa.len() {
            return fail("weather series must be nonempty and of equal length");
        }
        if !(dt > 0.0 && dt.is_finite() && t0.is_finite()) {
            return fail("weather grid needs a finite start and positive step");
        }
        if t_ambient.iter().chain(&poa).any(|v| !v.is_finite()) || poa.iter().any(|&p| p < 0.0) {
            return fail("weather values must be finite with nonnegative irradiance");
        }
        Ok(Self { t0, dt, t_ambient, poa })
    }

    pub fn len(&self) -> usize {
        self.poa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poa.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.t0, self.time(self.len() - 1))
    }

    pub fn t_ambient(&self) -> &[f64] {
        &self.t_ambient
    }

    pub fn poa(&self) -> &[f64] {
        &self.poa
    }

    /// Linear interpolation of `(T_ambient, POA)`; exact on grid nodes and
    /// held constant outside the span.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let n = self.len();
        let r = ((t - self.t0) / self.dt).clamp(0.0, (n - 1) as f64);
        let near = r.round();
        if (r - near).abs() <= 1e-9 * near.max(1.0) {
            let k = near as usize;
            return (self.t_ambient[k], self.poa[k]);
        }
        let k = (r.floor() as usize).min(n - 2);
        let w = r - k as f64;
        let lerp = |v: &[f64]| v[k] + w * (v[k + 1] - v[k]);
        (lerp(&self.t_ambient), lerp(&self.poa))
    }

    /// Resamples onto the grid of spacing `dt` over the same span.
    pub fn resample(&self, dt: f64) -> Result<Self, PvError> {
        let (a, b) = self.span();
        let n = ((b - a) / dt).round() as usize;
        let (ta, poa): (Vec<f64>, Vec<f64>) = (0..=n).map(|k| self.at(a + k as f64 * dt)).unzip();
        Self::new(a, dt, ta, poa)
    }
}

/// Ross relation `T_cell = T_ambient + (NOCT − 20)/800 · I_POA`.
pub fn cell_temperature_at(t_ambient: f64, poa: f64, noct: f64) -> f64 {
    t_ambient + (noct - 20.0) / 800.0 * poa
}

pub fn cell_temperature(w: &WeatherSeries, noct: f64) -> Vec<f64> {
    w.t_ambient.iter().zip(&w.poa).map(|(&ta, &p)| cell_temperature_at(ta, p, noct)).collect()
}

/// Deterministic clear-sky days on a 0.1 h grid: a half-sine irradiance
/// from 06:00 to 20:00 peaking at 13:00, and an ambient temperature that
/// rises by a half-cosine from `t_min` at 05:00 to `t_max` at 15:00 and
/// falls back over the following 14 hours.
pub fn synth_clear_sky(days: usize, peak_poa: f64, t_min: f64, t_max: f64) -> Result<WeatherSeries, PvError> {
    if !(peak_poa >= 0.0 && t_min <= t_max && t_min.is_finite() && t_max.is_finite()) {
        return Err(PvError::InvalidParameter("need peak_poa >= 0 and finite t_min <= t_max".into()));
    }
    let n = days * 240;
    let (mut ta, mut poa) = (Vec::with_capacity(n + 1), Vec::with_capacity(n + 1));
    for k in 0..=n {
        let h = (k as f64 * SYNTH_STEP).rem_euclid(24.0);
        poa.push(if (6.0..=20.0).contains(&h) { peak_poa * (PI * (h - 6.0) / 14.0).sin().max(0.0) } else { 0.0 });
        // phase 0 at the 05:00 minimum, 1 at the 15:00 maximum
        let since_min = (h - 5.0).rem_euclid(24.0);
        let phase = if since_min <= 10.0 { since_min / 10.0 } else { 1.0 - (since_min - 10.0) / 14.0 };
        ta.push(t_min + (t_max - t_min) * 0.5 * (1.0 - (PI * phase).cos()));
    }
    WeatherSeries::new(0.0, SYNTH_STEP, ta, poa)
}

/// Reads `time_hours,t_ambient_c,poa_wm2` rows with a strictly uniform time column.
pub fn load_weather_csv(path: impl AsRef<Path>) -> Result<WeatherSeries, PvError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| PvError::Io(format!("{}: {e}", path.display())))?;
    parse_weather_csv(&text)
}

pub fn parse_weather_csv(text: &str) -> Result<WeatherSeries, PvError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let schema = |row: usize, column: usize, message: String| PvError::Schema { row, column, message };
    match lines.next() {
        Some((_, header)) if header.trim() == WEATHER_HEADER => {}
        Some((i, header)) => return Err(schema(i + 1, 1, format!("expected header `{WEATHER_HEADER}`, found `{header}`"))),
        None => return Err(schema(1, 1, "file is empty".into())),
    }
    let (mut times, mut ta, mut poa) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in lines {
        let row = i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(schema(row, fields.len().min(3) + 1, format!("expected 3 columns, found {}", fields.len())));
        }
        let mut vals = [0.0; 3];
        for (c, f) in fields.iter().enumerate() {
            vals[c] = f
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| schema(row, c + 1, format!("`{f}` is not a finite number")))?;
        }
        if vals[2] < 0.0 {
            return Err(schema(row, 3, format!("negative irradiance {}", vals[2])));
        }
        times.push((row, vals[0]));
        ta.push(vals[1]);
        poa.push(vals[2]);
    }
    if times.is_empty() {
        return Err(schema(2, 1, "no data rows".into()));
    }
    let t0 = times[0].1;
    let dt = if times.len() > 1 { (times[times.len() - 1].1 - t0) / (times.len() - 1) as f64 } else { 1.0 };
    for (k, &(row, t)) in times.iter().enumerate() {
        let expected = t0 + k as f64 * dt;
        if !(dt > 0.0) || (t - expected).abs() > 1e-6 * dt {
            return Err(PvError::NonUniformGrid { row });
        }
    }
    WeatherSeries::new(t0, dt, ta, poa)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ross_examples() {
        assert_eq!(cell_temperature_at(30.0, 800.0, 45.0), 55.0);
        assert_eq!(cell_temperature_at(30.0, 0.0, 45.0), 30.0);
        assert_eq!(cell_temperature_at(30.0, 700.0, 20.0), 30.0);
    }

    #[test]
    fn synthetic_profile() {
        let w = synth_clear_sky(7, 900.0, 22.0, 36.0).unwrap();
        assert_eq!(w.len(), 7 * 240 + 1);
        assert!((w.poa()[130] - 900.0).abs() < 1e-9);
        assert_eq!(w.poa()[30], 0.0);
        assert!((w.t_ambient()[50] - 22.0).abs() < 1e-12);
        assert!((w.t_ambient()[150] - 36.0).abs() < 1e-12);
        assert!(w.t_ambient().iter().all(|&t| (22.0..=36.0).contains(&t)));
        assert!(synth_clear_sky(2, 0.0, 20.0, 30.0).unwrap().poa().iter().all(|&p| p == 0.0));
        assert!(synth_clear_sky(1, 900.0, 30.0, 20.0).is_err());
    }

    #[test]
    fn csv_parsing() {
        let ok = "time_hours,t_ambient_c,poa_wm2\n0,20,0\n0.5,21,100\n1.0,22,200\n";
        let w = parse_weather_csv(ok).unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(w.step(), 0.5);
        assert_eq!(w.at(0.75), (21.5, 150.0));
        let neg = "time_hours,t_ambient_c,poa_wm2\n0,20,0\n1,21,-5\n";
        assert!(matches!(parse_weather_csv(neg), Err(PvError::Schema { row: 3, column: 3, .. })));
        let uneven = "time_hours,t_ambient_c,poa_wm2\n0,20,0\n1,21,5\n3,22,5\n";
        assert!(matches!(parse_weather_csv(uneven), Err(PvError::NonUniformGrid { .. })));
        assert!(matches!(parse_weather_csv("a,b,c\n0,1,2\n"), Err(PvError::Schema { row: 1, .. })));
        assert!(matches!(
            parse_weather_csv("time_hours,t_ambient_c,poa_wm2\n0,x,1\n"),
            Err(PvError::Schema { row: 2, column: 2, .. })
        ));
    }

    #[test]
    fn resampling_keeps_nodes() {
        let w = synth_clear_sky(1, 900.0, 26.0, 36.0).unwrap();
        let fine = w.resample(0.05).unwrap();
        assert_eq!(fine.len(), 481);
        assert_eq!(fine.at(13.0), w.at(13.0));
        let coarse = w.resample(0.2).unwrap();
        assert_eq!(coarse.len(), 121);
    }
}
