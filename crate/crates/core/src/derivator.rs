//! Left-continuous bounded-variation derivators on a compact interval.
//!
//! A [`Derivator`] is stored piecewise: strictly increasing breakpoints
//! `a = t_0 < ... < t_m = b`, one absolutely continuous density per open
//! segment `(t_k, t_{k+1})`, a jump map `t_k -> Δ⁺g(t_k)` for `k < m`, and
//! the anchor value `g(a)`. Left-continuity is structural: `g(t_k)` is the
//! left limit and the jump is added only to the right of `t_k`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DerivatorError {
    #[error("time {t} outside domain [{a}, {b}]")]
    Domain { t: f64, a: f64, b: f64 },
    #[error("breakpoints must be finite, strictly increasing and at least two")]
    Breakpoints,
    #[error("expected {expected} segment densities, got {got}")]
    SegmentCount { expected: usize, got: usize },
    #[error("jump at {0} does not sit on a breakpoint in [a, b)")]
    JumpLocation(f64),
    #[error("duplicate jump entry at {0}")]
    DuplicateJump(f64),
    #[error("non-finite value in derivator description")]
    NonFinite,
    #[error("sampled density needs at least two samples")]
    SampledTooShort,
    #[error("derivators do not share the same domain")]
    DomainMismatch,
    #[error("cannot sum an empty list of derivators")]
    Empty,
    #[error("densities on [{0}, {1}] cannot be combined exactly (misaligned or mixed sampled grids)")]
    IncompatibleDensities(f64, f64),
    #[error("g is constant on a left neighbourhood of b (b belongs to N_g^+)")]
    EndpointInNgPlus,
    #[error("invalid derivator description: {0}")]
    Parse(String),
}

/// Quadrature attached to a sampled density. Left-rectangle treats the
/// density as piecewise constant (value at the left node of each cell);
/// trapezoid treats it as piecewise linear between nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    #[default]
    LeftRectangle,
    Trapezoid,
}

/// Density of the absolutely continuous part of `g` on one segment.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Zero,
    ConstantSlope(f64),
    /// Coefficients in powers of `t - t_k` (local to the segment start).
    Polynomial(Vec<f64>),
    /// Values at `n + 1` uniform nodes spanning the segment.
    Sampled { values: Vec<f64>, rule: Quadrature },
}

impl Density {
    fn normalized(self) -> Self {
        match self {
            Density::ConstantSlope(0.0) => Density::Zero,
            Density::Polynomial(c) => {
                let t = poly::trim(&c);
                match t.len() {
                    0 => Density::Zero,
                    1 => Density::ConstantSlope(t[0]),
                    _ => Density::Polynomial(t.to_vec()),
                }
            }
            Density::Sampled { values, rule } => {
                let used = match rule {
                    Quadrature::LeftRectangle => &values[..values.len() - 1],
                    Quadrature::Trapezoid => &values[..],
                };
                if used.iter().all(|&v| v == 0.0) {
                    Density::Zero
                } else {
                    Density::Sampled { values, rule }
                }
            }
            other => other,
        }
    }

    fn check(&self) -> Result<(), DerivatorError> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            Density::Zero => Ok(()),
            Density::ConstantSlope(c) if c.is_finite() => Ok(()),
            Density::Polynomial(c) if finite(c) => Ok(()),
            Density::Sampled { values, .. } if values.len() < 2 => Err(DerivatorError::SampledTooShort),
            Density::Sampled { values, .. } if finite(values) => Ok(()),
            _ => Err(DerivatorError::NonFinite),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Density::Zero)
    }

    /// Polynomial degree of the density, `None` for sampled densities.
    pub fn degree(&self) -> Option<usize> {
        match self {
            Density::Zero | Density::ConstantSlope(_) => Some(0),
            Density::Polynomial(c) => Some(poly::degree(c)),
            Density::Sampled { .. } => None,
        }
    }

    fn with_rule(self, new_rule: Quadrature) -> Self {
        match self {
            Density::Sampled { values, .. } => Density::Sampled { values, rule: new_rule },
            other => other,
        }
    }

    /// Splits the density on `[start, end]` into pieces on which a
    /// per-value sign map is exact: polynomial pieces of constant sign and
    /// trapezoid runs without a sign change strictly inside a cell.
    fn sign_pieces(&self, start: f64, end: f64) -> Vec<(f64, f64, Density)> {
        match self {
            Density::Polynomial(c) => {
                let len = end - start;
                let mut cuts = vec![0.0];
                // roots this close to an end only produce slivers of rounding noise
                let edge = 1e-12 * len;
                cuts.extend(poly::roots_in(c, 0.0, len).into_iter().filter(|&r| r > edge && r < len - edge));
                cuts.push(len);
                let mut out: Vec<(f64, f64, Density)> = Vec::new();
                for w in cuts.windows(2) {
                    if w[1] <= w[0] {
                        continue;
                    }
                    let lo = if w[0] == 0.0 { start } else { start + w[0] };
                    let hi = if w[1] == len { end } else { start + w[1] };
                    if hi <= lo {
                        continue;
                    }
                    out.push((lo, hi, Density::Polynomial(poly::shift(c, w[0]))));
                }
                out
            }
            Density::Sampled { values, rule: Quadrature::Trapezoid } => {
                let n = values.len() - 1;
                let h = (end - start) / n as f64;
                let node = |j: usize| if j == n { end } else { start + j as f64 * h };
                let mut out = Vec::new();
                let mut run_start = 0usize;
                for j in 0..n {
                    let (v0, v1) = (values[j], values[j + 1]);
                    if v0 * v1 < 0.0 {
                        if j > run_start {
                            out.push((
                                node(run_start),
                                node(j),
                                Density::Sampled { values: values[run_start..=j].to_vec(), rule: Quadrature::Trapezoid },
                            ));
                        }
                        let slope = (v1 - v0) / h;
                        let cross = node(j) + h * v0 / (v0 - v1);
                        out.push((node(j), cross, Density::Polynomial(vec![v0, slope])));
                        out.push((cross, node(j + 1), Density::Polynomial(vec![0.0, slope])));
                        run_start = j + 1;
                    }
                }
                if run_start < n {
                    out.push((
                        node(run_start),
                        end,
                        Density::Sampled { values: values[run_start..].to_vec(), rule: Quadrature::Trapezoid },
                    ));
                }
                out
            }
            other => vec![(start, end, other.clone())],
        }
    }

    /// Applies a sign map to a piece produced by [`Density::sign_pieces`].
    fn map_sign(&self, op: SignOp, len: f64) -> Density {
        let f = |v: f64| op.apply(v);
        match self {
            Density::Zero => Density::Zero,
            Density::ConstantSlope(c) => Density::ConstantSlope(f(*c)),
            Density::Polynomial(c) => {
                let s = poly::eval(c, 0.5 * len).signum();
                match op.apply(s) {
                    0.0 => Density::Zero,
                    _ if s < 0.0 => Density::Polynomial(c.iter().map(|x| -x).collect()),
                    _ => Density::Polynomial(c.clone()),
                }
            }
            Density::Sampled { values, rule } => {
                Density::Sampled { values: values.iter().map(|&v| f(v)).collect(), rule: *rule }
            }
        }
        .normalized()
    }

    /// Restriction to `[lo, hi] ⊆ [start, end]`, re-expressed in coordinates
    /// local to `lo`.
    fn restrict(&self, start: f64, end: f64, lo: f64, hi: f64, tol: f64) -> Result<Density, DerivatorError> {
        match self {
            Density::Polynomial(c) => Ok(Density::Polynomial(poly::shift(c, lo - start))),
            Density::Sampled { values, rule } => {
                if lo == start && hi == end {
                    return Ok(self.clone());
                }
                let n = values.len() - 1;
                let h = (end - start) / n as f64;
                let index = |x: f64| {
                    let r = (x - start) / h;
                    let j = r.round();
                    ((r - j).abs() * h <= tol).then_some(j as usize)
                };
                match (index(lo), index(hi)) {
                    (Some(j0), Some(j1)) if j1 > j0 => {
                        Ok(Density::Sampled { values: values[j0..=j1].to_vec(), rule: *rule })
                    }
                    _ => Err(DerivatorError::IncompatibleDensities(lo, hi)),
                }
            }
            other => Ok(other.clone()),
        }
    }

    fn add(&self, other: &Density, lo: f64, hi: f64) -> Result<Density, DerivatorError> {
        use Density::*;
        let out = match (self, other) {
            (Zero, x) | (x, Zero) => x.clone(),
            (ConstantSlope(a), ConstantSlope(b)) => ConstantSlope(a + b),
            (ConstantSlope(a), Polynomial(p)) | (Polynomial(p), ConstantSlope(a)) => Polynomial(poly::add(p, &[*a])),
            (Polynomial(p), Polynomial(q)) => Polynomial(poly::add(p, q)),
            (ConstantSlope(c), Sampled { values, rule }) | (Sampled { values, rule }, ConstantSlope(c)) => {
                Sampled { values: values.iter().map(|v| v + c).collect(), rule: *rule }
            }
            (Sampled { values: v, rule: r }, Sampled { values: w, rule: s }) if r == s && v.len() == w.len() => {
                Sampled { values: v.iter().zip(w).map(|(x, y)| x + y).collect(), rule: *r }
            }
            _ => return Err(DerivatorError::IncompatibleDensities(lo, hi)),
        };
        Ok(out.normalized())
    }
}

#[derive(Debug, Clone, Copy)]
enum SignOp {
    Abs,
    Positive,
    Negative,
}

impl SignOp {
    fn apply(self, v: f64) -> f64 {
        match self {
            SignOp::Abs => v.abs(),
            SignOp::Positive => v.max(0.0),
            SignOp::Negative => (-v).max(0.0),
        }
    }
}

/// Borrowed view of one segment, used by the measure and integration code.
#[derive(Debug, Clone, Copy)]
pub struct SegmentRef<'a> {
    pub start: f64,
    pub end: f64,
    pub density: &'a Density,
    prefix: &'a [f64],
}

impl SegmentRef<'_> {
    /// `∫_start^x density`.
    fn primitive(&self, x: f64) -> f64 {
        match self.density {
            Density::Zero => 0.0,
            Density::ConstantSlope(c) => c * (x - self.start),
            Density::Polynomial(p) => poly::antiderivative_at(p, x - self.start),
            Density::Sampled { values, rule } => {
                let n = values.len() - 1;
                if x >= self.end {
                    return self.prefix[n];
                }
                let (j, d, h) = self.cell_of(x);
                match rule {
                    Quadrature::LeftRectangle => self.prefix[j] + values[j] * d,
                    Quadrature::Trapezoid => {
                        self.prefix[j] + values[j] * d + (values[j + 1] - values[j]) * d * d / (2.0 * h)
                    }
                }
            }
        }
    }

    /// Cell index containing `x`, offset from the cell's left node, cell width.
    pub fn cell_of(&self, x: f64) -> (usize, f64, f64) {
        let n = self.cells();
        let h = self.cell_width();
        let r = (x - self.start) / h;
        // a point within rounding of a node belongs to the cell starting there
        let near = r.round();
        let r = if (r - near).abs() <= 1e-9 * near.max(1.0) { near } else { r.floor() };
        let j = (r.max(0.0) as usize).min(n - 1);
        (j, (x - self.node(j)).max(0.0), h)
    }

    pub fn cells(&self) -> usize {
        match self.density {
            Density::Sampled { values, .. } => values.len() - 1,
            _ => 1,
        }
    }

    pub fn cell_width(&self) -> f64 {
        (self.end - self.start) / self.cells() as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        if j == self.cells() {
            self.end
        } else {
            self.start + j as f64 * self.cell_width()
        }
    }

    /// Density value at `x` (piecewise-constant or piecewise-linear reading
    /// for sampled densities).
    pub fn density_at(&self, x: f64) -> f64 {
        match self.density {
            Density::Zero => 0.0,
            Density::ConstantSlope(c) => *c,
            Density::Polynomial(p) => poly::eval(p, x - self.start),
            Density::Sampled { values, rule } => {
                let (j, d, h) = self.cell_of(x);
                match rule {
                    Quadrature::LeftRectangle => values[j],
                    Quadrature::Trapezoid => values[j] + (values[j + 1] - values[j]) * d / h,
                }
            }
        }
    }

    /// `∫_lo^hi density` for `start <= lo <= hi <= end`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        match self.density {
            Density::Zero => 0.0,
            Density::ConstantSlope(c) => c * (hi - lo),
            _ => self.primitive(hi) - self.primitive(lo),
        }
    }
}

/// One step of a walk over `[u, v)`.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Piece<'a> {
    Atom { at: f64, jump: f64 },
    Span { seg: SegmentRef<'a>, lo: f64, hi: f64 },
}

/// Classification of a point relative to the jump and constancy sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointTag {
    /// `t ∈ D_g`.
    Jump,
    /// `t` lies in a constancy component, or is `a ∉ D_g` with `g` flat
    /// immediately to its right; in both cases `t*` is the component's right end.
    ConstancyInterior,
    /// Left end of a constancy component, not a jump point and not `a`.
    NgMinus,
    /// Right end of a constancy component, not a jump point.
    NgPlus,
    Regular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointClass {
    pub tag: PointTag,
    /// The representative point `t*`.
    pub star: f64,
}

/// Piecewise left-continuous BV function on `[a, b]`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivator {
    breakpoints: Vec<f64>,
    densities: Vec<Density>,
    jumps: Vec<f64>,
    anchor: f64,
    left_values: Vec<f64>,
    prefix: Vec<Vec<f64>>,
    components: Vec<(f64, f64)>,
    total_variation: f64,
}

impl Derivator {
    /// Builds a derivator from breakpoints, one density per segment and a
    /// list of `(time, jump)` pairs located on breakpoints in `[a, b)`.
    pub fn new(
        anchor: f64,
        breakpoints: Vec<f64>,
        densities: Vec<Density>,
        jumps: &[(f64, f64)],
    ) -> Result<Self, DerivatorError> {
        if breakpoints.len() < 2
            || breakpoints.iter().any(|t| !t.is_finite())
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(DerivatorError::Breakpoints);
        }
        let m = breakpoints.len() - 1;
        if densities.len() != m {
            return Err(DerivatorError::SegmentCount { expected: m, got: densities.len() });
        }
        if !anchor.is_finite() {
            return Err(DerivatorError::NonFinite);
        }
        for d in &densities {
            d.check()?;
        }
        let densities: Vec<Density> = densities.into_iter().map(Density::normalized).collect();

        let mut jump_sizes = vec![0.0; m];
        let mut seen = vec![false; m];
        for &(t, size) in jumps {
            if !size.is_finite() || !t.is_finite() {
                return Err(DerivatorError::NonFinite);
            }
            let k = breakpoints[..m]
                .binary_search_by(|x| x.total_cmp(&t))
                .map_err(|_| DerivatorError::JumpLocation(t))?;
            if seen[k] {
                return Err(DerivatorError::DuplicateJump(t));
            }
            seen[k] = true;
            jump_sizes[k] = size;
        }
        Ok(Self::assemble(anchor, breakpoints, densities, jump_sizes))
    }

    fn assemble(anchor: f64, breakpoints: Vec<f64>, densities: Vec<Density>, jumps: Vec<f64>) -> Self {
        let m = densities.len();
        let prefix: Vec<Vec<f64>> = densities
            .iter()
            .enumerate()
            .map(|(k, d)| match d {
                Density::Sampled { values, rule } => {
                    let n = values.len() - 1;
                    let h = (breakpoints[k + 1] - breakpoints[k]) / n as f64;
                    let mut acc = Vec::with_capacity(n + 1);
                    acc.push(0.0);
                    for j in 0..n {
                        let cell = match rule {
                            Quadrature::LeftRectangle => values[j] * h,
                            Quadrature::Trapezoid => 0.5 * h * (values[j] + values[j + 1]),
                        };
                        acc.push(acc[j] + cell);
                    }
                    acc
                }
                _ => Vec::new(),
            })
            .collect();

        let mut g = Self {
            breakpoints,
            densities,
            jumps,
            anchor,
            left_values: Vec::with_capacity(m + 1),
            prefix,
            components: Vec::new(),
            total_variation: 0.0,
        };
        let mut value = anchor;
        let mut left_values = vec![value];
        let mut tv = 0.0;
        for k in 0..m {
            let seg = g.segment(k);
            value += g.jumps[k] + seg.integral(seg.start, seg.end);
            left_values.push(value);
            tv += g.jumps[k].abs();
            for (lo, hi, piece) in seg.density.sign_pieces(seg.start, seg.end) {
                let abs = piece.map_sign(SignOp::Abs, hi - lo);
                let dummy_prefix = Self::prefix_for(&abs, lo, hi);
                tv += SegmentRef { start: lo, end: hi, density: &abs, prefix: &dummy_prefix }.integral(lo, hi);
            }
        }
        g.left_values = left_values;
        g.total_variation = tv;
        g.components = g.compute_components();
        g
    }

    fn prefix_for(d: &Density, lo: f64, hi: f64) -> Vec<f64> {
        match d {
            Density::Sampled { values, rule } => {
                let n = values.len() - 1;
                let h = (hi - lo) / n as f64;
                let mut acc = vec![0.0];
                for j in 0..n {
                    let cell = match rule {
                        Quadrature::LeftRectangle => values[j] * h,
                        Quadrature::Trapezoid => 0.5 * h * (values[j] + values[j + 1]),
                    };
                    acc.push(acc[j] + cell);
                }
                acc
            }
            _ => Vec::new(),
        }
    }

    /// `g(t) = t` on `[a, b]`.
    pub fn identity(a: f64, b: f64) -> Result<Self, DerivatorError> {
        Self::new(a, vec![a, b], vec![Density::ConstantSlope(1.0)], &[])
    }

    /// `g(t) = anchor + slope (t - a)`.
    pub fn linear(a: f64, b: f64, anchor: f64, slope: f64) -> Result<Self, DerivatorError> {
        Self::new(anchor, vec![a, b], vec![Density::ConstantSlope(slope)], &[])
    }

    /// Piecewise-linear derivator with one slope per segment.
    pub fn piecewise_linear(
        anchor: f64,
        breakpoints: Vec<f64>,
        slopes: &[f64],
        jumps: &[(f64, f64)],
    ) -> Result<Self, DerivatorError> {
        let d = slopes.iter().map(|&c| Density::ConstantSlope(c)).collect();
        Self::new(anchor, breakpoints, d, jumps)
    }

    /// Single-segment derivator whose density is sampled on a uniform grid.
    pub fn sampled(a: f64, b: f64, anchor: f64, values: Vec<f64>, rule: Quadrature) -> Result<Self, DerivatorError> {
        Self::new(anchor, vec![a, b], vec![Density::Sampled { values, rule }], &[])
    }

    /// Adds jumps to an existing derivator, inserting breakpoints as needed.
    pub fn with_jumps(&self, jumps: &[(f64, f64)]) -> Result<Self, DerivatorError> {
        let (a, b) = self.domain();
        let mut g = self.clone();
        for &(t, _) in jumps {
            if !(a..b).contains(&t) {
                return Err(DerivatorError::JumpLocation(t));
            }
            if g.breakpoints.binary_search_by(|x| x.total_cmp(&t)).is_err() {
                g = g.refined_at(t)?;
            }
        }
        let mut all: Vec<(f64, f64)> = g.jump_points().collect();
        for &(t, size) in jumps {
            match all.iter_mut().find(|(s, _)| *s == t) {
                Some(entry) => entry.1 += size,
                None => all.push((t, size)),
            }
        }
        Self::new(g.anchor, g.breakpoints.clone(), g.densities.clone(), &all)
    }

    /// Same function with an extra (jump-free) breakpoint at `t`.
    fn refined_at(&self, t: f64) -> Result<Self, DerivatorError> {
        let k = self.segment_index(t);
        let seg = self.segment(k);
        let tol = 1e-12 * (self.domain().1 - self.domain().0);
        let left = seg.density.restrict(seg.start, seg.end, seg.start, t, tol)?;
        let right = seg.density.restrict(seg.start, seg.end, t, seg.end, tol)?;
        let mut bp = self.breakpoints.clone();
        bp.insert(k + 1, t);
        let mut dens = self.densities.clone();
        dens.splice(k..=k, [left, right]);
        let jumps: Vec<(f64, f64)> = self.jump_points().collect();
        Self::new(self.anchor, bp, dens, &jumps)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn densities(&self) -> &[Density] {
        &self.densities
    }

    pub fn segment_count(&self) -> usize {
        self.densities.len()
    }

    pub fn segment(&self, k: usize) -> SegmentRef<'_> {
        SegmentRef {
            start: self.breakpoints[k],
            end: self.breakpoints[k + 1],
            density: &self.densities[k],
            prefix: &self.prefix[k],
        }
    }

    /// Index `k` of the segment with `t_k < t <= t_{k+1}` (0 for `t = a`).
    fn segment_index(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&x| x < t).saturating_sub(1).min(self.segment_count() - 1)
    }

    /// Jump points `(t, Δ⁺g(t))` with nonzero jump, in increasing order.
    pub fn jump_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.iter().zip(&self.jumps).filter(|(_, &j)| j != 0.0).map(|(&t, &j)| (t, j))
    }

    /// Jump points lying in `[u, v)`.
    pub fn jumps_in(&self, u: f64, v: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let lo = self.breakpoints.partition_point(|&x| x < u);
        let hi = self.breakpoints.partition_point(|&x| x < v).min(self.jumps.len());
        (lo..hi.max(lo)).filter(|&k| self.jumps[k] != 0.0).map(|k| (self.breakpoints[k], self.jumps[k]))
    }

    /// `Δ⁺g(t)`; zero off the breakpoints.
    pub fn jump_at(&self, t: f64) -> f64 {
        match self.breakpoints[..self.jumps.len()].binary_search_by(|x| x.total_cmp(&t)) {
            Ok(k) => self.jumps[k],
            Err(_) => 0.0,
        }
    }

    pub fn is_jump_point(&self, t: f64) -> bool {
        self.jump_at(t) != 0.0
    }

    fn check_domain(&self, t: f64) -> Result<(), DerivatorError> {
        let (a, b) = self.domain();
        if t.is_finite() && t >= a && t <= b {
            Ok(())
        } else {
            Err(DerivatorError::Domain { t, a, b })
        }
    }

    /// `g(t)`, left-continuous at every interior breakpoint.
    pub fn eval(&self, t: f64) -> Result<f64, DerivatorError> {
        self.check_domain(t)?;
        Ok(self.value(t))
    }

    pub(crate) fn value(&self, t: f64) -> f64 {
        if t <= self.breakpoints[0] {
            return self.anchor;
        }
        let k = self.segment_index(t);
        if t == self.breakpoints[k + 1] {
            return self.left_values[k + 1];
        }
        let seg = self.segment(k);
        self.left_values[k] + self.jumps[k] + seg.integral(seg.start, t)
    }

    /// `g(t⁺) = g(t) + Δ⁺g(t)` for `t ∈ [a, b)`.
    pub fn eval_right(&self, t: f64) -> Result<f64, DerivatorError> {
        let (a, b) = self.domain();
        if !(t.is_finite() && t >= a && t < b) {
            return Err(DerivatorError::Domain { t, a, b });
        }
        Ok(self.value(t) + self.jump_at(t))
    }

    /// `μ_g([u, v)) = g(v) - g(u)`, assembled from segment integrals and the
    /// jumps in `[u, v)`. Caller guarantees `a <= u <= v <= b`.
    pub(crate) fn measure(&self, u: f64, v: f64) -> f64 {
        if v <= u {
            return 0.0;
        }
        let mut total = 0.0;
        self.for_each_piece(u, v, |p| match p {
            Piece::Atom { jump, .. } => total += jump,
            Piece::Span { seg, lo, hi } => total += seg.integral(lo, hi),
        });
        total
    }

    /// Walks `[u, v)` in increasing order, visiting each jump point in
    /// `[u, v)` and each nonempty overlap with a non-flat segment.
    pub(crate) fn for_each_piece<F>(&self, u: f64, v: f64, mut visit: F)
    where
        F: FnMut(Piece<'_>),
    {
        if v <= u {
            return;
        }
        let first = self.segment_index(u);
        let first = if u == self.breakpoints[first + 1] { first + 1 } else { first };
        for k in first..self.segment_count() {
            let seg = self.segment(k);
            if seg.start >= v {
                break;
            }
            if seg.start >= u && self.jumps[k] != 0.0 {
                visit(Piece::Atom { at: seg.start, jump: self.jumps[k] });
            }
            let lo = seg.start.max(u);
            let hi = seg.end.min(v);
            if hi > lo && !seg.density.is_zero() {
                visit(Piece::Span { seg, lo, hi });
            }
        }
    }

    /// Total variation `var_g[a, b]`.
    pub fn total_variation(&self) -> f64 {
        self.total_variation
    }

    /// `max(1, var_g[a, b])`, the unit for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.total_variation.max(1.0)
    }

    fn sign_mapped(&self, op: SignOp) -> Self {
        let mut bps = vec![self.breakpoints[0]];
        let mut dens = Vec::new();
        let mut jumps = Vec::new();
        for k in 0..self.segment_count() {
            let seg = self.segment(k);
            jumps.push(op.apply(self.jumps[k]));
            for (idx, (lo, hi, piece)) in seg.density.sign_pieces(seg.start, seg.end).into_iter().enumerate() {
                if idx > 0 {
                    jumps.push(0.0);
                }
                bps.push(hi);
                dens.push(piece.map_sign(op, hi - lo));
            }
        }
        Self::assemble(0.0, bps, dens, jumps)
    }

    /// Variation function `g̃(t) = var_g[a, t]`: nondecreasing, `g̃(a) = 0`,
    /// densities replaced by their absolute value and jumps by `|Δ⁺g|`.
    /// Segments whose density changes sign are split at the sign changes.
    pub fn variation(&self) -> Self {
        self.sign_mapped(SignOp::Abs)
    }

    /// Jordan decomposition `g = g(a) + g₁ - g₂` into the positive and
    /// negative variations, both nondecreasing and vanishing at `a`.
    pub fn jordan(&self) -> (Self, Self) {
        (self.sign_mapped(SignOp::Positive), self.sign_mapped(SignOp::Negative))
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.jumps.iter().all(|&j| j >= 0.0)
            && (0..self.segment_count()).all(|k| {
                let seg = self.segment(k);
                seg.density.sign_pieces(seg.start, seg.end).iter().all(|(lo, hi, d)| match d {
                    Density::Zero => true,
                    Density::ConstantSlope(c) => *c >= 0.0,
                    Density::Polynomial(p) => poly::eval(p, 0.5 * (hi - lo)) >= 0.0,
                    Density::Sampled { values, rule } => match rule {
                        Quadrature::LeftRectangle => values[..values.len() - 1].iter().all(|&v| v >= 0.0),
                        Quadrature::Trapezoid => values.iter().all(|&v| v >= 0.0),
                    },
                })
            })
    }

    fn compute_components(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        let mut open: Option<(f64, f64)> = None;
        for k in 0..self.segment_count() {
            let seg = self.segment(k);
            if seg.density.is_zero() {
                open = match open {
                    Some((lo, hi)) if hi == seg.start && self.jumps[k] == 0.0 => Some((lo, seg.end)),
                    Some(run) => {
                        out.push(run);
                        Some((seg.start, seg.end))
                    }
                    None => Some((seg.start, seg.end)),
                };
            } else if let Some(run) = open.take() {
                out.push(run);
            }
        }
        out.extend(open);
        out
    }

    /// Maximal open intervals on which `g` is constant, sorted.
    pub fn constancy_components(&self) -> &[(f64, f64)] {
        &self.components
    }

    /// Whether `b ∈ N_g^+`, i.e. `g` is flat on a left neighbourhood of `b`.
    pub fn b_in_ng_plus(&self) -> bool {
        let b = self.domain().1;
        self.components.last().is_some_and(|&(_, hi)| hi == b)
    }

    /// Checks the standing assumption `b ∉ N_g^+`. With `strict` the
    /// violation is an error; otherwise it is reported as `Ok(false)`.
    pub fn validate(&self, strict: bool) -> Result<bool, DerivatorError> {
        match (self.b_in_ng_plus(), strict) {
            (true, true) => Err(DerivatorError::EndpointInNgPlus),
            (violated, _) => Ok(!violated),
        }
    }

    /// Point classification and the representative `t*`.
    pub fn classify_point(&self, t: f64) -> Result<PointClass, DerivatorError> {
        self.check_domain(t)?;
        let (a, _) = self.domain();
        if self.is_jump_point(t) {
            return Ok(PointClass { tag: PointTag::Jump, star: t });
        }
        let idx = self.components.partition_point(|&(_, hi)| hi < t);
        if let Some(&(lo, hi)) = self.components.get(idx) {
            if (lo < t && t < hi) || (t == a && lo == a) {
                return Ok(PointClass { tag: PointTag::ConstancyInterior, star: hi });
            }
            if t == hi {
                return Ok(PointClass { tag: PointTag::NgPlus, star: t });
            }
            if t == lo {
                return Ok(PointClass { tag: PointTag::NgMinus, star: t });
            }
        }
        Ok(PointClass { tag: PointTag::Regular, star: t })
    }

    /// `t*` for `t` in the domain.
    pub fn star(&self, t: f64) -> Result<f64, DerivatorError> {
        self.classify_point(t).map(|c| c.star)
    }

    /// Copy with every sampled density switched to `rule`.
    pub fn with_quadrature(&self, rule: Quadrature) -> Self {
        let dens = self.densities.iter().cloned().map(|d| d.with_rule(rule).normalized()).collect();
        Self::assemble(self.anchor, self.breakpoints.clone(), dens, self.jumps.clone())
    }

    pub fn to_spec(&self) -> DerivatorSpec {
        DerivatorSpec {
            anchor: self.anchor,
            breakpoints: self.breakpoints.clone(),
            segments: self.densities.iter().map(SegmentSpec::from).collect(),
            jumps: self.jump_points().map(|(at, size)| JumpSpec { at, size }).collect(),
        }
    }

    pub fn from_spec(spec: &DerivatorSpec) -> Result<Self, DerivatorError> {
        let dens = spec.segments.iter().cloned().map(Density::from).collect();
        let jumps: Vec<(f64, f64)> = spec.jumps.iter().map(|j| (j.at, j.size)).collect();
        Self::new(spec.anchor, spec.breakpoints.clone(), dens, &jumps)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("derivator spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DerivatorError> {
        let spec: DerivatorSpec = serde_json::from_str(text).map_err(|e| DerivatorError::Parse(e.to_string()))?;
        Self::from_spec(&spec)
    }
}

/// Pointwise sum of derivators sharing a domain. Breakpoints are merged
/// and jumps add. Sampled densities must align with the merged grid.
pub fn sum(gs: &[Derivator]) -> Result<Derivator, DerivatorError> {
    let first = gs.first().ok_or(DerivatorError::Empty)?;
    let (a, b) = first.domain();
    if gs.iter().any(|g| g.domain() != (a, b)) {
        return Err(DerivatorError::DomainMismatch);
    }
    let tol = 1e-12 * (b - a);
    let mut merged: Vec<f64> = gs.iter().flat_map(|g| g.breakpoints.iter().copied()).collect();
    merged.sort_by(f64::total_cmp);
    merged.dedup_by(|x, y| (*x - *y).abs() <= tol);
    *merged.last_mut().unwrap() = b;

    let mut dens = Vec::with_capacity(merged.len() - 1);
    for w in merged.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let mut acc = Density::Zero;
        for g in gs {
            let seg = g.segment(g.segment_index(mid));
            let part = seg.density.restrict(seg.start, seg.end, lo, hi, tol)?;
            acc = acc.add(&part, lo, hi)?;
        }
        dens.push(acc);
    }
    let mut jumps: Vec<(f64, f64)> = Vec::new();
    for &t in &merged[..merged.len() - 1] {
        let total: f64 = gs
            .iter()
            .flat_map(|g| g.jump_points())
            .filter(|&(s, _)| (s - t).abs() <= tol)
            .map(|(_, j)| j)
            .sum();
        if total != 0.0 {
            jumps.push((t, total));
        }
    }
    let anchor = gs.iter().map(|g| g.anchor).sum();
    Derivator::new(anchor, merged, dens, &jumps)
}

/// Serialized derivator: anchor, breakpoints, one segment description per
/// open segment, and the nonzero jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivatorSpec {
    pub anchor: f64,
    pub breakpoints: Vec<f64>,
    pub segments: Vec<SegmentSpec>,
    #[serde(default)]
    pub jumps: Vec<JumpSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SegmentSpec {
    Zero,
    ConstantSlope {
        slope: f64,
    },
    Polynomial {
        coefficients: Vec<f64>,
    },
    Sampled {
        values: Vec<f64>,
        #[serde(default)]
        rule: Quadrature,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub at: f64,
    pub size: f64,
}

impl From<&Density> for SegmentSpec {
    fn from(d: &Density) -> Self {
        match d {
            Density::Zero => SegmentSpec::Zero,
            Density::ConstantSlope(slope) => SegmentSpec::ConstantSlope { slope: *slope },
            Density::Polynomial(c) => SegmentSpec::Polynomial { coefficients: c.clone() },
            Density::Sampled { values, rule } => SegmentSpec::Sampled { values: values.clone(), rule: *rule },
        }
    }
}

impl From<SegmentSpec> for Density {
    fn from(s: SegmentSpec) -> Self {
        match s {
            SegmentSpec::Zero => Density::Zero,
            SegmentSpec::ConstantSlope { slope } => Density::ConstantSlope(slope),
            SegmentSpec::Polynomial { coefficients } => Density::Polynomial(coefficients),
            SegmentSpec::Sampled { values, rule } => Density::Sampled { values, rule },
        }
    }
}
