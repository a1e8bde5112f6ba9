//! Cached Gauss–Legendre rules on arbitrary intervals.

use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

/// Largest rule order kept in the cache.
pub const MAX_ORDER: usize = 64;

/// Order used when an integrand carries no polynomial-degree hint.
pub const DEFAULT_ORDER: usize = 16;

static RULES: [OnceLock<GaussLegendre>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];

fn rule(order: usize) -> &'static GaussLegendre {
    let order = order.clamp(2, MAX_ORDER);
    RULES[order].get_or_init(|| GaussLegendre::new(order).expect("order >= 2"))
}

/// Integrates `f` over `[lo, hi]` with an `order`-point rule (exact for
/// polynomials of degree `2 * order - 1`).
pub fn gauss_legendre<F: FnMut(f64) -> f64>(order: usize, lo: f64, hi: f64, f: F) -> f64 {
    if hi == lo {
        return 0.0;
    }
    rule(order).integrate(lo, hi, f)
}

/// Smallest order that integrates a polynomial of the given degree exactly.
pub fn order_for_degree(degree: usize) -> usize {
    (degree / 2 + 1).clamp(2, MAX_ORDER)
}
