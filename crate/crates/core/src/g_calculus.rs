//! Stieltjes derivatives, the two chain-rule formulas and an FTC round-trip
//! check.

use thiserror::Error;

use crate::derivator::{Derivator, DerivatorError};
use crate::ls_measure::{integrate, Integrand, MeasureError};
use crate::quadrature::gauss_legendre;

/// Number of geometric window levels tried by the limit quotient.
pub const WINDOW_LEVELS: usize = 40;
/// Probe points per side per level.
pub const PROBES_PER_SIDE: usize = 8;
const CHAIN_RULE_ORDER: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GCalculusError {
    #[error(transparent)]
    Derivator(#[from] DerivatorError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("tolerance must be positive and finite, got {0}")]
    Tolerance(f64),
    #[error("difference quotient at t = {t} did not settle: best spread {best_spread:e} above tolerance {tol:e}")]
    NonConvergence { t: f64, best_spread: f64, tol: f64 },
    #[error("g is constant on every probe near t = {t}")]
    DegenerateDenominator { t: f64 },
    #[error("non-finite function value at {at}")]
    NonFinite { at: f64 },
    #[error("equal values branch of the implicit chain rule needs a derivative of h")]
    MissingDerivative,
}

/// A real function of time, optionally able to report exact right limits.
pub trait GFunction {
    fn value(&self, t: f64) -> f64;

    /// `f(t⁺)` when known exactly.
    fn right_limit(&self, _t: f64) -> Option<f64> {
        None
    }
}

impl<F: Fn(f64) -> f64 + ?Sized> GFunction for F {
    fn value(&self, t: f64) -> f64 {
        self(t)
    }
}

/// Pairs a function with an exact right-limit oracle.
pub struct WithRightLimit<F, R> {
    pub f: F,
    pub right: R,
}

impl<F: Fn(f64) -> f64, R: Fn(f64) -> f64> GFunction for WithRightLimit<F, R> {
    fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    fn right_limit(&self, t: f64) -> Option<f64> {
        Some((self.right)(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMethod {
    JumpQuotient,
    LimitQuotient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GDerivativeResult {
    pub value: f64,
    pub method: DerivativeMethod,
    /// Half-width of the last window used; for an extrapolated right limit,
    /// the smaller offset.
    pub window: f64,
    pub achieved_spread: f64,
}

fn finite(y: f64, at: f64) -> Result<f64, GCalculusError> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(GCalculusError::NonFinite { at })
    }
}

fn initial_window(g: &Derivator) -> f64 {
    let (a, b) = g.domain();
    (b - a) / 16.0
}

/// `f'_g(t)`.
pub fn g_derivative<F: GFunction + ?Sized>(
    f: &F,
    g: &Derivator,
    t: f64,
    tol: f64,
) -> Result<GDerivativeResult, GCalculusError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(GCalculusError::Tolerance(tol));
    }
    let star = g.star(t)?;
    let jump = g.jump_at(star);
    if jump != 0.0 {
        jump_quotient(f, g, star, jump)
    } else {
        limit_quotient(f, g, star, tol)
    }
}

fn jump_quotient<F: GFunction + ?Sized>(
    f: &F,
    g: &Derivator,
    star: f64,
    jump: f64,
) -> Result<GDerivativeResult, GCalculusError> {
    let at = finite(f.value(star), star)?;
    let (right, window, spread) = match f.right_limit(star) {
        Some(r) => (finite(r, star)?, 0.0, 0.0),
        None => {
            let (_, b) = g.domain();
            let e1 = initial_window(g) * 0.5f64.powi(WINDOW_LEVELS as i32 - 1);
            let e2 = 2.0 * e1;
            let y1 = finite(f.value((star + e1).min(b)), star + e1)?;
            let y2 = finite(f.value((star + e2).min(b)), star + e2)?;
            (2.0 * y1 - y2, e1, ((y1 - y2) / jump).abs())
        }
    };
    Ok(GDerivativeResult {
        value: (right - at) / jump,
        method: DerivativeMethod::JumpQuotient,
        window,
        achieved_spread: spread,
    })
}

fn limit_quotient<F: GFunction + ?Sized>(
    f: &F,
    g: &Derivator,
    star: f64,
    tol: f64,
) -> Result<GDerivativeResult, GCalculusError> {
    let (a, b) = g.domain();
    let g0 = g.value(star);
    let f0 = finite(f.value(star), star)?;
    let mut best_spread = f64::INFINITY;
    let mut w = initial_window(g);
    for _ in 0..WINDOW_LEVELS {
        let (mut lo, mut hi, mut count) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
        for i in 1..=PROBES_PER_SIDE {
            let d = w * i as f64 / PROBES_PER_SIDE as f64;
            for s in [star - d, star + d] {
                if s < a || s > b || s == star {
                    continue;
                }
                let dg = g.value(s) - g0;
                if dg == 0.0 {
                    continue;
                }
                let q = (finite(f.value(s), s)? - f0) / dg;
                lo = lo.min(q);
                hi = hi.max(q);
                count += 1;
            }
        }
        if count >= 2 {
            let spread = hi - lo;
            best_spread = best_spread.min(spread);
            if spread < tol {
                return Ok(GDerivativeResult {
                    value: 0.5 * (lo + hi),
                    method: DerivativeMethod::LimitQuotient,
                    window: w,
                    achieved_spread: spread,
                });
            }
        }
        w *= 0.5;
    }
    if best_spread.is_finite() {
        Err(GCalculusError::NonConvergence { t: star, best_spread, tol })
    } else {
        Err(GCalculusError::DegenerateDenominator { t: star })
    }
}

/// `f'_g(t) · ∫₀¹ h′(f(t*) + r f'_g(t) Δ⁺g(t*)) dr`.
pub fn chain_rule_explicit(
    fg: f64,
    f_star: f64,
    jump: f64,
    hprime: impl Fn(f64) -> f64,
) -> Result<f64, GCalculusError> {
    if jump == 0.0 {
        return Ok(finite(hprime(f_star), f_star)? * fg);
    }
    let mut bad = None;
    let inner = gauss_legendre(CHAIN_RULE_ORDER, 0.0, 1.0, |r| {
        let y = f_star + r * fg * jump;
        let v = hprime(y);
        if !v.is_finite() {
            bad.get_or_insert(y);
        }
        v
    });
    match bad {
        Some(at) => Err(GCalculusError::NonFinite { at }),
        None => Ok(fg * inner),
    }
}

/// Difference quotient of `h` between `f(t*)` and `f(t*⁺)` times `f'_g(t)`,
/// or `h′(f(t*)) f'_g(t)` when the two values coincide.
pub fn chain_rule_implicit(
    f_star: f64,
    f_star_right: f64,
    fg: f64,
    h: impl Fn(f64) -> f64,
    hprime: Option<&dyn Fn(f64) -> f64>,
) -> Result<f64, GCalculusError> {
    if f_star_right == f_star {
        let hp = hprime.ok_or(GCalculusError::MissingDerivative)?;
        return Ok(finite(hp(f_star), f_star)? * fg);
    }
    let h1 = finite(h(f_star_right), f_star_right)?;
    let h0 = finite(h(f_star), f_star)?;
    Ok((h1 - h0) / (f_star_right - f_star) * fg)
}

/// Max over `probes` of `|F'_g(t) − f(t*)|` for `F(t) = ∫_{[a,t)} f dμ_g`.
/// Probes where the quotient degenerates are skipped.
pub fn ftc_residual(f: &Integrand<'_>, g: &Derivator, probes: &[f64], tol: f64) -> Result<f64, GCalculusError> {
    let (a, _) = g.domain();
    let primitive = |t: f64| integrate(f, g, a, t).unwrap_or(f64::NAN);
    let big_f = WithRightLimit {
        f: primitive,
        right: |t: f64| primitive(t) + f.atom_value(t) * g.jump_at(t),
    };
    let mut worst: f64 = 0.0;
    for &t in probes {
        // surfaces domain errors and non-finite integrands with their cause
        integrate(f, g, a, t)?;
        let star = g.star(t)?;
        let d = match g_derivative(&big_f, g, t, tol) {
            Ok(d) => d,
            Err(GCalculusError::DegenerateDenominator { .. }) => continue,
            Err(e) => return Err(e),
        };
        let target = if g.is_jump_point(star) { f.atom_value(star) } else { f.eval(star) };
        worst = worst.max((d.value - target).abs());
    }
    Ok(worst)
}
