use serde::{Deserialize, Serialize};

use super::euler::{add_increment, cells, check_finite};
use super::{build_grid, lipschitz_probe, PostJump, Region, SolverError, StieltjesIvp, Trajectory};

const PROBE_SAMPLES: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    pub iterations: usize,
    pub final_delta: f64,
    /// `‖x^{n+1} − x^n‖ / ‖x^n − x^{n−1}‖` in the sup norm.
    pub contraction_estimates: Vec<f64>,
    /// Lipschitz constant sampled on the hull of the final trajectory.
    pub lipschitz_estimate: f64,
    pub bielecki_weight: String,
    /// Same ratios measured in the weighted norm `sup |x(t)| / e_L(t; t0)`.
    pub weighted_contraction_estimates: Vec<f64>,
    /// Set when the plain ratios exceed 1 somewhere.
    pub weighted_norm_suggested: bool,
}

/// Iterates the discrete integral operator from the constant iterate
/// `x^0 ≡ x0`:
///
/// `x^{n+1}(s_{k+1}) = x^{n+1}(s_k) + f(s_k, x^n(s_k)) Δ⁺g(s_k) + f(s_k, x^n(s_k⁺)) μ_g((s_k, s_{k+1}))`
///
/// with the post-jump states iterated alongside. Without active guards the fixed point is the Euler
/// solution on the same grid.
pub fn picard_solve(
    ivp: &StieltjesIvp,
    tol: f64,
    max_iter: usize,
    grid_step: f64,
) -> Result<(Trajectory, PicardReport), SolverError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SolverError::Tolerance(tol));
    }
    let grid = build_grid(ivp.derivators(), grid_step)?;
    let cells = cells(ivp, &grid)?;
    let n = ivp.dim();
    check_finite(grid[0], ivp.x0())?;

    // iterates hold node states and, for jump cells, post-jump states
    let mut current = vec![ivp.x0().to_vec(); grid.len()];
    let mut current_plus: Vec<Option<Vec<f64>>> =
        cells.iter().map(|c| c.jump.as_ref().map(|_| ivp.x0().to_vec())).collect();
    let mut next = current.clone();
    let mut next_plus = current_plus.clone();
    let mut rate = vec![0.0; n];
    let mut diffs: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut deltas = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter.max(1) {
        for (k, cell) in cells.iter().enumerate() {
            let s = grid[k];
            ivp.eval_rhs(s, &current[k], &mut rate);
            check_finite(s, &rate)?;
            let mut x = next[k].clone();
            if let Some(jump) = &cell.jump {
                add_increment(&mut x, &rate, jump);
                ivp.apply_guards(s, &mut x)?;
                check_finite(s, &x)?;
                next_plus[k] = Some(x.clone());
                let left = current_plus[k].as_deref().unwrap_or(&current[k]);
                ivp.eval_rhs(s, left, &mut rate);
                check_finite(s, &rate)?;
            }
            add_increment(&mut x, &rate, &cell.rest);
            ivp.apply_guards(grid[k + 1], &mut x)?;
            check_finite(grid[k + 1], &x)?;
            next[k + 1] = x;
        }
        let diff: Vec<Vec<f64>> =
            next.iter().zip(&current).map(|(a, b)| a.iter().zip(b).map(|(p, q)| p - q).collect()).collect();
        let plus_delta = next_plus
            .iter()
            .zip(&current_plus)
            .filter_map(|(a, b)| Some(a.as_ref()?.iter().zip(b.as_ref()?).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)))
            .fold(0.0f64, f64::max);
        let delta = diff.iter().flatten().fold(plus_delta, |m, d| m.max(d.abs()));
        diffs.push(diff);
        deltas.push(delta);
        std::mem::swap(&mut current, &mut next);
        std::mem::swap(&mut current_plus, &mut next_plus);
        if delta < tol {
            converged = true;
            break;
        }
    }
    let final_delta = *deltas.last().unwrap_or(&0.0);
    if !converged {
        return Err(SolverError::NoConvergence { iterations: deltas.len(), final_delta });
    }

    let post_jump = current_plus
        .iter()
        .enumerate()
        .filter_map(|(index, p)| Some(PostJump { index, state: p.clone()? }))
        .collect();

    let region = hull(&current, ivp.domain());
    let lipschitz = lipschitz_probe(ivp.rhs().as_ref(), &region, PROBE_SAMPLES, 0)?;
    let weight = bielecki_weight(ivp, &grid, lipschitz);
    let weighted: Vec<f64> = diffs
        .iter()
        .map(|d| d.iter().zip(&weight).map(|(x, w)| x.iter().fold(0.0f64, |m, v| m.max(v.abs())) / w).fold(0.0, f64::max))
        .collect();
    let ratios = |v: &[f64]| -> Vec<f64> { v.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect() };
    let contraction_estimates = ratios(&deltas);
    let report = PicardReport {
        iterations: deltas.len(),
        final_delta,
        weighted_norm_suggested: contraction_estimates.iter().any(|&r| r > 1.0),
        contraction_estimates,
        lipschitz_estimate: lipschitz,
        bielecki_weight: format!("e_L(t; t0) for the sum of component variations, L = {lipschitz:e}"),
        weighted_contraction_estimates: ratios(&weighted),
    };
    let meta = Trajectory::meta_for("picard", grid_step, &grid);
    Ok((Trajectory { grid, states: current, post_jump, meta }, report))
}

fn hull(states: &[Vec<f64>], t: (f64, f64)) -> Region {
    let n = states[0].len();
    let mut lower = vec![f64::INFINITY; n];
    let mut upper = vec![f64::NEG_INFINITY; n];
    for x in states {
        for i in 0..n {
            lower[i] = lower[i].min(x[i]);
            upper[i] = upper[i].max(x[i]);
        }
    }
    for i in 0..n {
        let pad = 1e-6 * (1.0 + (upper[i] - lower[i]).abs());
        lower[i] -= pad;
        upper[i] += pad;
    }
    Region { t, lower, upper }
}

/// `e_L(s_k; t0)` for the nondecreasing derivator `Σ_i var g_i`: jumps
/// contribute `1 + LΔ`, the continuous part `exp(L · increment)`.
fn bielecki_weight(ivp: &StieltjesIvp, grid: &[f64], l: f64) -> Vec<f64> {
    let variations: Vec<_> = ivp.derivators().iter().map(|g| g.variation()).collect();
    let mut w = vec![1.0; grid.len()];
    for k in 0..grid.len() - 1 {
        let (s, e) = (grid[k], grid[k + 1]);
        let jump: f64 = variations.iter().map(|v| v.jump_at(s)).sum();
        let total: f64 = variations.iter().map(|v| v.eval(e).unwrap_or(0.0) - v.eval(s).unwrap_or(0.0)).sum();
        w[k + 1] = w[k] * (1.0 + l * jump) * (l * (total - jump)).exp();
    }
    w
}
