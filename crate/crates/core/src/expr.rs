//! Textual function specifications used by the CLI and config files.
//!
//! A scalar function of time is written as a number (`2.5`), a
//! right-continuous step table (`table:0:1.0,1.5:-2`), a polynomial in `t`
//! (`poly:1,0,3` for `1 + 3t²`) or an arithmetic expression
//! (`expr:sin(t) + 2*t`). Right-hand sides use expressions in `t` and
//! `x1..xn` (`x` aliases `x1`).

use std::str::FromStr;

use meval::{Context, ContextProvider, Expr, FuncEvalError};
use thiserror::Error;

use crate::ls_measure::Integrand;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("cannot parse `{input}`: {reason}")]
pub struct ExprError {
    pub input: String,
    pub reason: String,
}

fn err(input: &str, reason: impl Into<String>) -> ExprError {
    ExprError { input: input.to_string(), reason: reason.into() }
}

thread_local! {
    static BUILTINS: Context<'static> = Context::new();
}

struct Vars<'a> {
    t: f64,
    x: &'a [f64],
}

impl ContextProvider for Vars<'_> {
    fn get_var(&self, name: &str) -> Option<f64> {
        match name {
            "t" => Some(self.t),
            "x" if self.x.len() == 1 => Some(self.x[0]),
            _ => {
                let i: usize = name.strip_prefix('x')?.parse().ok()?;
                self.x.get(i.checked_sub(1)?).copied()
            }
        }
    }

    fn eval_func(&self, _: &str, _: &[f64]) -> Result<f64, FuncEvalError> {
        Err(FuncEvalError::UnknownFunction)
    }
}

/// Arithmetic expression over `t` and an `n`-dimensional state.
#[derive(Debug, Clone)]
pub struct StateExpr {
    expr: Expr,
    source: String,
}

impl StateExpr {
    /// Parses and checks that only `t`, `x1..xn` and builtin functions occur.
    pub fn parse(source: &str, dim: usize) -> Result<Self, ExprError> {
        let expr = Expr::from_str(source).map_err(|e| err(source, e.to_string()))?;
        let probe = vec![0.5; dim];
        BUILTINS
            .with(|b| expr.eval_with_context((Vars { t: 0.5, x: &probe }, b)))
            .map_err(|e| err(source, e.to_string()))?;
        Ok(Self { expr, source: source.to_string() })
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        BUILTINS.with(|b| self.expr.eval_with_context((Vars { t, x }, b))).unwrap_or(f64::NAN)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// Scalar function of time.
#[derive(Debug, Clone)]
pub enum FunctionSpec {
    Constant(f64),
    /// `(start, value)` pairs, each value holding until the next start.
    Table(Vec<(f64, f64)>),
    Polynomial(Vec<f64>),
    Expr(StateExpr),
}

impl FromStr for FunctionSpec {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, ExprError> {
        let s = s.trim();
        let numbers = |body: &str| -> Result<Vec<f64>, ExprError> {
            body.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| err(s, format!("`{v}` is not a number")))).collect()
        };
        if let Some(body) = s.strip_prefix("table:") {
            let mut rows = Vec::new();
            for pair in body.split(',') {
                let (t, v) = pair.split_once(':').ok_or_else(|| err(s, "table entries are `time:value`"))?;
                let parse = |x: &str| x.trim().parse::<f64>().map_err(|_| err(s, format!("`{x}` is not a number")));
                rows.push((parse(t)?, parse(v)?));
            }
            if rows.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(err(s, "table times must be strictly increasing"));
            }
            Ok(FunctionSpec::Table(rows))
        } else if let Some(body) = s.strip_prefix("poly:") {
            Ok(FunctionSpec::Polynomial(numbers(body)?))
        } else if let Some(body) = s.strip_prefix("expr:") {
            Ok(FunctionSpec::Expr(StateExpr::parse(body, 0)?))
        } else {
            s.parse::<f64>().map(FunctionSpec::Constant).map_err(|_| {
                err(s, "expected a number, `table:t:v,...`, `poly:c0,c1,...` or `expr:...`")
            })
        }
    }
}

impl FunctionSpec {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            FunctionSpec::Constant(c) => *c,
            FunctionSpec::Table(rows) => rows[rows.partition_point(|&(s, _)| s <= t).saturating_sub(1)].1,
            FunctionSpec::Polynomial(c) => crate::poly::eval(c, t),
            FunctionSpec::Expr(e) => e.eval(t, &[]),
        }
    }

    pub fn to_integrand(&self) -> Integrand<'_> {
        match self {
            FunctionSpec::Constant(c) => Integrand::constant(*c),
            FunctionSpec::Table(rows) => {
                Integrand::step(rows.iter().map(|r| r.0).collect(), rows.iter().map(|r| r.1).collect())
            }
            FunctionSpec::Polynomial(c) => Integrand::polynomial(c.clone()),
            FunctionSpec::Expr(e) => Integrand::new(move |t| e.eval(t, &[])),
        }
    }
}
