//! The g-exponential `e_h(·; a)` for signed derivators.
//!
//! Two independent routes are provided: the product form, which multiplies
//! the jump factors `1 + h(s)Δ⁺g(s)` directly, and the h̄ form, which
//! integrates a modified integrand and tracks the sign separately.

use thiserror::Error;

use crate::derivator::Derivator;
use crate::ls_measure::{integrate, integrate_continuous, Integrand, MeasureError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GExpError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("h is not finite at the jump point {at}")]
    NonFinite { at: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorSign {
    Positive,
    Negative,
    Zero,
}

/// One jump point with its factor `1 + h(t)Δ⁺g(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpFactor {
    pub at: f64,
    pub jump: f64,
    pub h: f64,
    /// Snapped to exactly 0 when classified as zero.
    pub factor: f64,
    pub sign: FactorSign,
}

/// Tolerance below which a jump factor counts as exactly zero.
pub fn zero_cut(h_jump: f64) -> f64 {
    1e-14 * (1.0 + h_jump.abs())
}

fn jump_factor(at: f64, jump: f64, h: f64) -> JumpFactor {
    let hd = h * jump;
    let raw = 1.0 + hd;
    let (factor, sign) = if raw.abs() <= zero_cut(hd) {
        (0.0, FactorSign::Zero)
    } else if raw < 0.0 {
        (raw, FactorSign::Negative)
    } else {
        (raw, FactorSign::Positive)
    };
    JumpFactor { at, jump, h, factor, sign }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpDecomposition {
    pub factors: Vec<JumpFactor>,
    /// Jump points with a nonpositive factor.
    pub t_minus: Vec<f64>,
    /// Jump points with a negative factor.
    pub t_n: Vec<f64>,
    /// Jump points with a zero factor.
    pub t_zero: Vec<f64>,
    /// First zero factor, or `b`.
    pub tau0: f64,
    /// Negative-factor points strictly below `tau0`.
    pub sign_breaks: Vec<f64>,
}

impl ExpDecomposition {
    pub fn kappa(&self) -> usize {
        self.sign_breaks.len()
    }

    /// `(-1)^i` where `i` counts sign breaks strictly below `t`.
    pub fn sign_at(&self, t: f64) -> f64 {
        if self.sign_breaks.partition_point(|&s| s < t) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Value of h̄ at the jump point `t`: `log|1 + hΔ|/Δ` below `tau0`, 0 from it on.
    pub fn hbar_atom(&self, t: f64) -> f64 {
        match self.factors.binary_search_by(|f| f.at.total_cmp(&t)) {
            Ok(k) if t < self.tau0 => self.factors[k].factor.abs().ln() / self.factors[k].jump,
            _ => 0.0,
        }
    }

    /// `Σ |log|1 + hΔ||` over the jumps; `None` when some factor is zero.
    pub fn log_summability(&self) -> Option<f64> {
        if !self.t_zero.is_empty() {
            return None;
        }
        Some(self.factors.iter().map(|f| f.factor.abs().ln().abs()).sum())
    }
}

pub fn classify_jumps(h: &Integrand<'_>, g: &Derivator) -> Result<ExpDecomposition, GExpError> {
    let (_, b) = g.domain();
    let mut factors = Vec::new();
    for (at, jump) in g.jump_points() {
        let hv = h.atom_value(at);
        if !hv.is_finite() {
            return Err(GExpError::NonFinite { at });
        }
        factors.push(jump_factor(at, jump, hv));
    }
    let pick = |want: &dyn Fn(FactorSign) -> bool| -> Vec<f64> {
        factors.iter().filter(|f| want(f.sign)).map(|f| f.at).collect()
    };
    let t_minus = pick(&|s| s != FactorSign::Positive);
    let t_n = pick(&|s| s == FactorSign::Negative);
    let t_zero = pick(&|s| s == FactorSign::Zero);
    let tau0 = t_zero.first().copied().unwrap_or(b);
    let sign_breaks = t_n.iter().copied().filter(|&s| s < tau0).collect();
    Ok(ExpDecomposition { factors, t_minus, t_n, t_zero, tau0, sign_breaks })
}

/// `Π_{[a,t) ∩ D_g} (1 + hΔ⁺g) · exp(∫_{[a,t) \ D_g} h dμ_g)`.
pub fn g_exp(h: &Integrand<'_>, g: &Derivator, t: f64) -> Result<f64, GExpError> {
    let (a, _) = g.domain();
    let continuous = integrate_continuous(h, g, a, t)?;
    let mut product = 1.0;
    for (at, jump) in g.jumps_in(a, t) {
        let hv = h.atom_value(at);
        if !hv.is_finite() {
            return Err(GExpError::NonFinite { at });
        }
        product *= jump_factor(at, jump, hv).factor;
    }
    if product == 0.0 {
        return Ok(0.0);
    }
    Ok(product * continuous.exp())
}

/// Same value through `sign · exp(∫_{[a,t)} h̄ dμ_g)`, zero past `tau0`.
pub fn g_exp_via_hbar(h: &Integrand<'_>, g: &Derivator, t: f64) -> Result<f64, GExpError> {
    let dec = classify_jumps(h, g)?;
    g_exp_with(&dec, h, g, t)
}

/// The h̄ route with a precomputed decomposition.
pub fn g_exp_with(dec: &ExpDecomposition, h: &Integrand<'_>, g: &Derivator, t: f64) -> Result<f64, GExpError> {
    let (a, _) = g.domain();
    if t > dec.tau0 {
        // still validates t against the domain
        integrate(&Integrand::constant(0.0), g, a, t)?;
        return Ok(0.0);
    }
    let hbar = h.by_ref().with_atoms(|s| dec.hbar_atom(s));
    Ok(dec.sign_at(t) * integrate(&hbar, g, a, t)?.exp())
}

/// Solution of `x'_g = h x`, `x(a) = x0`.
pub fn linear_solution(x0: f64, h: &Integrand<'_>, g: &Derivator, t: f64) -> Result<f64, GExpError> {
    Ok(x0 * g_exp(h, g, t)?)
}
