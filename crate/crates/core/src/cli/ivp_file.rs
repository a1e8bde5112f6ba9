//! IVP description files.
//!
//! ```toml
//! derivators = ["g.json", { anchor = 0.0, breakpoints = [0.0, 1.0], segments = [{ kind = "constant_slope", slope = 1.0 }], jumps = [] }]
//! x0 = [1.0]
//!
//! [rhs]
//! kind = "expr"            # or "linear" with matrix/offset, or "zero"
//! components = ["-2*x1"]
//!
//! [[guards]]
//! component = 0
//! lower = { const = 0.0 }
//! upper = { const = 10.0 }
//! policy = "clamp"
//! ```

use std::path::Path;

use serde::Deserialize;

use super::CliError;
use crate::derivator::{Derivator, DerivatorSpec};
use crate::expr::StateExpr;
use crate::solver::{Guard, GuardPolicy, Limit, StieltjesIvp};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IvpFile {
    derivators: Vec<DerivatorEntry>,
    x0: Vec<f64>,
    rhs: RhsSpec,
    #[serde(default)]
    guards: Vec<GuardEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum DerivatorEntry {
    Path(String),
    Inline(DerivatorSpec),
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RhsSpec {
    Zero,
    /// `A x + b`.
    Linear { matrix: Vec<Vec<f64>>, #[serde(default)] offset: Vec<f64> },
    Expr { components: Vec<String> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GuardEntry {
    component: usize,
    lower: Limit,
    upper: Limit,
    #[serde(default)]
    policy: GuardPolicy,
    #[serde(default)]
    tolerance: f64,
}

pub fn load_derivator(path: &Path) -> Result<Derivator, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Derivator::from_json(&text).map_err(|e| CliError::Input(format!("derivator {}: {e}", path.display())))
}

pub fn load_ivp(path: &Path) -> Result<StieltjesIvp, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let file: IvpFile = toml::from_str(&text).map_err(|e| CliError::Input(format!("ivp {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let derivators = file
        .derivators
        .iter()
        .map(|entry| match entry {
            DerivatorEntry::Path(p) => load_derivator(&base.join(p)),
            DerivatorEntry::Inline(spec) => {
                Derivator::from_spec(spec).map_err(|e| CliError::Input(format!("inline derivator: {e}")))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = file.x0.len();
    let bad = |m: String| CliError::Input(format!("ivp rhs: {m}"));
    let ivp = match file.rhs {
        RhsSpec::Zero => StieltjesIvp::new(derivators, file.x0, |_, _, out| out.fill(0.0))?,
        RhsSpec::Linear { matrix, offset } => {
            if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
                return Err(bad(format!("matrix must be {n}x{n}")));
            }
            let offset = if offset.is_empty() { vec![0.0; n] } else { offset };
            if offset.len() != n {
                return Err(bad(format!("offset must have {n} entries")));
            }
            StieltjesIvp::new(derivators, file.x0, move |_, x, out| {
                for (i, row) in matrix.iter().enumerate() {
                    out[i] = offset[i] + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
                }
            })?
        }
        RhsSpec::Expr { components } => {
            if components.len() != n {
                return Err(bad(format!("need {n} component expressions, found {}", components.len())));
            }
            let exprs = components
                .iter()
                .map(|c| StateExpr::parse(c, n))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| bad(e.to_string()))?;
            StieltjesIvp::new(derivators, file.x0, move |t, x, out| {
                for (o, e) in out.iter_mut().zip(&exprs) {
                    *o = e.eval(t, x);
                }
            })?
        }
    };
    file.guards.into_iter().try_fold(ivp, |ivp, g| {
        let guard = Guard { lower: g.lower, upper: g.upper, policy: g.policy, tolerance: g.tolerance };
        Ok(ivp.with_guard(g.component, guard)?)
    })
}
