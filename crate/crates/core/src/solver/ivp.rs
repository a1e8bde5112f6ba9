use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::derivator::Derivator;

/// Right-hand side `(t, x, out)`; writes `f_i(t, x)` into `out[i]`.
pub type Rhs = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    Const(f64),
    /// `factor · x[component]`, read after constant-limit guards ran.
    Scaled { component: usize, factor: f64 },
}

impl Limit {
    fn resolve(&self, x: &[f64]) -> f64 {
        match *self {
            Limit::Const(c) => c,
            Limit::Scaled { component, factor } => factor * x[component],
        }
    }

    fn is_const(&self) -> bool {
        matches!(self, Limit::Const(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardPolicy {
    #[default]
    Clamp,
    Reject,
}

/// Admissible interval for one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Guard {
    pub lower: Limit,
    pub upper: Limit,
    #[serde(default)]
    pub policy: GuardPolicy,
    /// Excursions up to this size are clamped even under `Reject`.
    #[serde(default)]
    pub tolerance: f64,
}

impl Guard {
    pub fn clamp(lower: f64, upper: f64) -> Self {
        Self { lower: Limit::Const(lower), upper: Limit::Const(upper), policy: GuardPolicy::Clamp, tolerance: 0.0 }
    }
}

#[derive(Clone)]
pub struct StieltjesIvp {
    derivators: Vec<Derivator>,
    rhs: Arc<Rhs>,
    x0: Vec<f64>,
    guards: Vec<Option<Guard>>,
}

impl fmt::Debug for StieltjesIvp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StieltjesIvp")
            .field("derivators", &self.derivators.len())
            .field("x0", &self.x0)
            .field("guards", &self.guards)
            .finish()
    }
}

impl StieltjesIvp {
    pub fn new(
        derivators: Vec<Derivator>,
        x0: Vec<f64>,
        rhs: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Result<Self, SolverError> {
        Self::from_arc(derivators, x0, Arc::new(rhs))
    }

    pub fn from_arc(derivators: Vec<Derivator>, x0: Vec<f64>, rhs: Arc<Rhs>) -> Result<Self, SolverError> {
        let first = derivators.first().ok_or(SolverError::Empty)?.domain();
        for (index, g) in derivators.iter().enumerate() {
            let (a, b) = g.domain();
            if (a, b) != first {
                return Err(SolverError::DomainMismatch { index, a, b });
            }
        }
        if x0.len() != derivators.len() {
            return Err(SolverError::Dimension { expected: derivators.len(), got: x0.len() });
        }
        let guards = vec![None; x0.len()];
        Ok(Self { derivators, rhs, x0, guards })
    }

    pub fn with_guard(mut self, component: usize, guard: Guard) -> Result<Self, SolverError> {
        let n = self.dim();
        let bad = |l: &Limit| matches!(*l, Limit::Scaled { component: c, .. } if c >= n);
        if component >= n || bad(&guard.lower) || bad(&guard.upper) {
            return Err(SolverError::GuardTarget { component });
        }
        self.guards[component] = Some(guard);
        Ok(self)
    }

    pub fn with_x0(mut self, x0: Vec<f64>) -> Result<Self, SolverError> {
        if x0.len() != self.dim() {
            return Err(SolverError::Dimension { expected: self.dim(), got: x0.len() });
        }
        self.x0 = x0;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.derivators[0].domain()
    }

    pub fn derivators(&self) -> &[Derivator] {
        &self.derivators
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn guards(&self) -> &[Option<Guard>] {
        &self.guards
    }

    pub fn rhs(&self) -> &Arc<Rhs> {
        &self.rhs
    }

    pub fn eval_rhs(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.rhs)(t, x, out)
    }

    /// Applies guards in two passes: constant bounds, then bounds scaled
    /// by other components.
    pub(crate) fn apply_guards(&self, t: f64, x: &mut [f64]) -> Result<(), SolverError> {
        for pass_const in [true, false] {
            for (i, guard) in self.guards.iter().enumerate() {
                let Some(g) = guard else { continue };
                if (g.lower.is_const() && g.upper.is_const()) != pass_const {
                    continue;
                }
                let (lower, upper) = (g.lower.resolve(x), g.upper.resolve(x));
                let v = x[i];
                if g.policy == GuardPolicy::Reject && (v < lower - g.tolerance || v > upper + g.tolerance) {
                    return Err(SolverError::GuardViolation { component: i, t, value: v, lower, upper });
                }
                x[i] = v.max(lower).min(upper);
            }
        }
        Ok(())
    }
}
