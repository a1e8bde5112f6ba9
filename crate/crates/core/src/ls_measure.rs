//! Lebesgue–Stieltjes measures of left-closed/right-open intervals and
//! integration of scalar functions against `μ_g` and `|μ_g|`.
//!
//! Every integral splits into an atomic part, `Σ f(s) Δ⁺g(s)` over jump
//! points in `[u, v)`, and a Lebesgue part `∫ f · density`. The Lebesgue
//! part is computed segment by segment: Gauss–Legendre for constant and
//! polynomial densities (exact up to the integrand's degree hint), and the
//! declared rule on a sampled density's own cells.

use thiserror::Error;

use crate::derivator::{Density, Derivator, Piece, Quadrature, SegmentRef};
use crate::poly;
use crate::quadrature::{gauss_legendre, order_for_degree, DEFAULT_ORDER};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("interval [{u}, {v}) is reversed or leaves the domain [{a}, {b}]")]
    Interval { u: f64, v: f64, a: f64, b: f64 },
    #[error("integrand is not finite near t = {at}")]
    NonFinite { at: f64 },
}

type RealFn<'a> = Box<dyn Fn(f64) -> f64 + 'a>;

/// A real function of time prepared for integration.
///
/// The optional degree hint makes Gauss–Legendre exact on polynomial
/// pieces; `breaks` lists points where the function is not smooth (the
/// Lebesgue part is split there); `atoms` overrides the value used for the
/// jump contributions, for functions that differ from `func` only on `D_g`.
pub struct Integrand<'a> {
    func: RealFn<'a>,
    atoms: Option<RealFn<'a>>,
    degree: Option<usize>,
    breaks: Vec<f64>,
}

impl<'a> Integrand<'a> {
    pub fn new(func: impl Fn(f64) -> f64 + 'a) -> Self {
        Self { func: Box::new(func), atoms: None, degree: None, breaks: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c).with_degree(0)
    }

    /// `Σ c_i t^i`.
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let degree = poly::degree(&coeffs);
        Self::new(move |t| poly::eval(&coeffs, t)).with_degree(degree)
    }

    /// Right-continuous step function equal to `values[k]` on
    /// `[nodes[k], nodes[k + 1])`; the last value also holds at and after
    /// the final node.
    pub fn step(nodes: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(nodes.len(), values.len(), "one value per node");
        let breaks = nodes.clone();
        Self::new(move |t| {
            let k = nodes.partition_point(|&x| x <= t).saturating_sub(1);
            values[k]
        })
        .with_degree(0)
        .with_breaks(breaks)
    }

    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree = Some(degree);
        self
    }

    pub fn with_breaks(mut self, mut breaks: Vec<f64>) -> Self {
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        self.breaks = breaks;
        self
    }

    pub fn with_atoms(mut self, atoms: impl Fn(f64) -> f64 + 'a) -> Self {
        self.atoms = Some(Box::new(atoms));
        self
    }

    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// A borrowing copy that keeps the degree hint, breaks and atom values.
    pub fn by_ref(&self) -> Integrand<'_> {
        let mut out = Integrand::new(|t| self.eval(t));
        out.degree = self.degree;
        out.breaks = self.breaks.clone();
        if self.atoms.is_some() {
            out.atoms = Some(Box::new(|t| self.atom_value(t)));
        }
        out
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.func)(t)
    }

    /// Value used for the jump contribution at `t`.
    pub fn atom_value(&self, t: f64) -> f64 {
        match &self.atoms {
            Some(a) => a(t),
            None => (self.func)(t),
        }
    }
}

fn check_interval(g: &Derivator, u: f64, v: f64) -> Result<(), MeasureError> {
    let (a, b) = g.domain();
    if u.is_finite() && v.is_finite() && a <= u && u <= v && v <= b {
        Ok(())
    } else {
        Err(MeasureError::Interval { u, v, a, b })
    }
}

/// `μ_g([u, v)) = g(v) - g(u)`; includes `Δ⁺g(u)`, excludes `Δ⁺g(v)`.
pub fn measure_interval(g: &Derivator, u: f64, v: f64) -> Result<f64, MeasureError> {
    check_interval(g, u, v)?;
    Ok(g.measure(u, v))
}

/// `∫_{[u,v)} f dμ_g`.
pub fn integrate(f: &Integrand<'_>, g: &Derivator, u: f64, v: f64) -> Result<f64, MeasureError> {
    check_interval(g, u, v)?;
    accumulate(f, g, u, v, true)
}

/// `∫_{[u,v) \ D_g} f dμ_g`: the jump contributions are left out.
pub fn integrate_continuous(f: &Integrand<'_>, g: &Derivator, u: f64, v: f64) -> Result<f64, MeasureError> {
    check_interval(g, u, v)?;
    accumulate(f, g, u, v, false)
}

fn accumulate(f: &Integrand<'_>, g: &Derivator, u: f64, v: f64, with_atoms: bool) -> Result<f64, MeasureError> {
    let mut total = 0.0;
    let mut bad: Option<f64> = None;
    g.for_each_piece(u, v, |piece| match piece {
        Piece::Atom { at, jump } if with_atoms => {
            let y = f.atom_value(at);
            if !y.is_finite() {
                bad.get_or_insert(at);
            }
            total += y * jump;
        }
        Piece::Atom { .. } => {}
        Piece::Span { seg, lo, hi } => {
            let part = lebesgue_part(f, seg, lo, hi);
            if !part.is_finite() {
                bad.get_or_insert(lo);
            }
            total += part;
        }
    });
    match bad {
        Some(at) => Err(MeasureError::NonFinite { at }),
        None => Ok(total),
    }
}

/// `∫_lo^hi f · density` on one segment, split at the integrand's breaks.
fn lebesgue_part(f: &Integrand<'_>, seg: SegmentRef<'_>, lo: f64, hi: f64) -> f64 {
    let first = f.breaks.partition_point(|&x| x <= lo);
    let last = f.breaks.partition_point(|&x| x < hi);
    let mut total = 0.0;
    let mut p = lo;
    for &q in f.breaks[first..last].iter().chain(std::iter::once(&hi)) {
        if q > p {
            total += smooth_piece(f, seg, p, q);
        }
        p = q;
    }
    total
}

fn smooth_piece(f: &Integrand<'_>, seg: SegmentRef<'_>, p: f64, q: f64) -> f64 {
    if f.degree == Some(0) {
        return f.eval(p) * seg.integral(p, q);
    }
    let order = |density_degree: usize| match f.degree {
        Some(d) => order_for_degree(d + density_degree),
        None => DEFAULT_ORDER,
    };
    match seg.density {
        Density::Zero => 0.0,
        Density::ConstantSlope(c) => c * gauss_legendre(order(0), p, q, |x| f.eval(x)),
        Density::Polynomial(coeffs) => {
            let start = seg.start;
            gauss_legendre(order(poly::degree(coeffs)), p, q, |x| f.eval(x) * poly::eval(coeffs, x - start))
        }
        Density::Sampled { values, rule } => {
            let (mut j, _, _) = seg.cell_of(p);
            let mut total = 0.0;
            while j < seg.cells() {
                let x0 = seg.node(j).max(p);
                let x1 = seg.node(j + 1).min(q);
                if x0 >= q {
                    break;
                }
                if x1 > x0 {
                    total += match rule {
                        Quadrature::LeftRectangle => f.eval(x0) * values[j] * (x1 - x0),
                        Quadrature::Trapezoid => {
                            0.5 * (x1 - x0) * (f.eval(x0) * seg.density_at(x0) + f.eval(x1) * seg.density_at(x1))
                        }
                    };
                }
                j += 1;
            }
            total
        }
    }
}

/// Interval measures `μ_g`, `|μ_g|`, `μ_g^±` and integrals against them.
#[derive(Debug, Clone)]
pub struct SignedMeasureView<'a> {
    g: &'a Derivator,
    variation: Derivator,
    positive: Derivator,
    negative: Derivator,
}

impl<'a> SignedMeasureView<'a> {
    pub fn new(g: &'a Derivator) -> Self {
        let (positive, negative) = g.jordan();
        Self { g, variation: g.variation(), positive, negative }
    }

    pub fn derivator(&self) -> &Derivator {
        self.g
    }

    pub fn variation(&self) -> &Derivator {
        &self.variation
    }

    pub fn measure_interval(&self, u: f64, v: f64) -> Result<f64, MeasureError> {
        measure_interval(self.g, u, v)
    }

    /// `|μ_g|([u, v)) = var_g[u, v]`.
    pub fn total_variation(&self, u: f64, v: f64) -> Result<f64, MeasureError> {
        measure_interval(&self.variation, u, v)
    }

    pub fn positive_part(&self, u: f64, v: f64) -> Result<f64, MeasureError> {
        measure_interval(&self.positive, u, v)
    }

    pub fn negative_part(&self, u: f64, v: f64) -> Result<f64, MeasureError> {
        measure_interval(&self.negative, u, v)
    }

    pub fn integrate(&self, f: &Integrand<'_>, u: f64, v: f64) -> Result<f64, MeasureError> {
        integrate(f, self.g, u, v)
    }

    /// Integral against `|μ_g|`.
    pub fn integrate_abs(&self, f: &Integrand<'_>, u: f64, v: f64) -> Result<f64, MeasureError> {
        integrate(f, &self.variation, u, v)
    }

    /// `‖f‖_{L¹_g} = ∫_{[a,b)} |f| d|μ_g|`.
    pub fn l1_norm(&self, f: &Integrand<'_>) -> Result<f64, MeasureError> {
        let (a, b) = self.g.domain();
        let abs = Integrand { func: Box::new(|t| f.eval(t).abs()), atoms: None, degree: None, breaks: f.breaks.clone() };
        let abs = match &f.atoms {
            Some(at) => abs.with_atoms(move |t| at(t).abs()),
            None => abs,
        };
        self.integrate_abs(&abs, a, b)
    }
}
