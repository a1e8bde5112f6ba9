//! Dense real polynomials in monomial form, `c[0] + c[1] x + c[2] x^2 + ...`.

/// Horner evaluation.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Value of the antiderivative vanishing at 0.
pub fn antiderivative_at(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for (i, &c) in coeffs.iter().enumerate().rev() {
        acc = acc * x + c / (i as f64 + 1.0);
    }
    acc * x
}

pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as f64)
        .collect()
}

/// Drops trailing zero coefficients.
pub fn trim(coeffs: &[f64]) -> &[f64] {
    let len = coeffs.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
    &coeffs[..len]
}

pub fn degree(coeffs: &[f64]) -> usize {
    trim(coeffs).len().saturating_sub(1)
}

/// Coefficients of `p(x + shift)` (Taylor shift, synthetic division).
pub fn shift(coeffs: &[f64], shift: f64) -> Vec<f64> {
    let mut out = coeffs.to_vec();
    let n = out.len();
    if shift == 0.0 {
        return out;
    }
    for i in 0..n {
        for j in (i..n - 1).rev() {
            out[j] += shift * out[j + 1];
        }
    }
    out
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// Real roots of `p` strictly inside `(lo, hi)`, sorted. Roots of even
/// multiplicity are reported only when `p` touches zero at a sampled
/// extremum; callers that care about sign changes re-check the sign on
/// each resulting sub-interval.
pub fn roots_in(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let p = trim(coeffs);
    if p.len() <= 1 || lo >= hi {
        return Vec::new();
    }
    if p.len() == 2 {
        let r = -p[0] / p[1];
        return if r > lo && r < hi { vec![r] } else { Vec::new() };
    }
    // Critical points split [lo, hi] into monotone pieces.
    let mut knots = vec![lo];
    knots.extend(roots_in(&derivative(p), lo, hi));
    knots.push(hi);

    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let (f0, f1) = (eval(p, x0), eval(p, x1));
        if f0 == 0.0 {
            if x0 > lo && roots.last() != Some(&x0) {
                roots.push(x0);
            }
            continue;
        }
        if f0.signum() != f1.signum() && f1 != 0.0 {
            roots.push(bisect(p, x0, x1, f0));
        }
    }
    roots
}

fn bisect(p: &[f64], mut x0: f64, mut x1: f64, f0: f64) -> f64 {
    let s0 = f0.signum();
    for _ in 0..200 {
        let mid = 0.5 * (x0 + x1);
        if mid <= x0 || mid >= x1 {
            break;
        }
        let fm = eval(p, mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == s0 {
            x0 = mid;
        } else {
            x1 = mid;
        }
    }
    0.5 * (x0 + x1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_and_antiderivative() {
        let p = [1.0, -2.0, 3.0];
        assert_eq!(eval(&p, 2.0), 1.0 - 4.0 + 12.0);
        assert!((antiderivative_at(&p, 2.0) - (2.0 - 4.0 + 8.0)).abs() < 1e-15);
    }

    #[test]
    fn shift_matches_direct_evaluation() {
        let p = [0.5, -1.0, 2.0, 0.25];
        let q = shift(&p, 1.5);
        for x in [-1.0, 0.0, 0.3, 2.0] {
            assert!((eval(&q, x) - eval(&p, x + 1.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn finds_roots_of_cubic() {
        // (x - 0.2)(x - 0.5)(x - 0.9)
        let p = [-0.09, 0.73, -1.6, 1.0];
        let r = roots_in(&p, 0.0, 1.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([0.2, 0.5, 0.9]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(roots_in(&p, 0.95, 2.0).is_empty());
    }

    #[test]
    fn trim_and_degree() {
        assert_eq!(trim(&[1.0, 0.0, 0.0]), &[1.0]);
        assert_eq!(degree(&[0.0, 0.0]), 0);
        assert_eq!(degree(&[0.0, 2.0, 1.0]), 2);
    }
}
