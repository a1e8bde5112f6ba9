use super::{build_grid, PostJump, SolverError, StieltjesIvp, Trajectory};
use crate::ls_measure::{integrate_continuous, measure_interval, Integrand, MeasureError};

pub(super) fn check_finite(t: f64, x: &[f64]) -> Result<(), SolverError> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(component) => Err(SolverError::NonFiniteState { component, t }),
        None => Ok(()),
    }
}

/// Increments of one cell `[s_k, s_{k+1})`: the atoms `Δ⁺g_i(s_k)` when
/// some derivator jumps at `s_k`, and the remaining mass of the cell.
#[derive(Debug, Clone)]
pub(super) struct Cell {
    pub jump: Option<Vec<f64>>,
    pub rest: Vec<f64>,
}

pub(super) fn cells(ivp: &StieltjesIvp, grid: &[f64]) -> Result<Vec<Cell>, SolverError> {
    let one = Integrand::constant(1.0);
    grid.windows(2)
        .map(|w| {
            let gs = ivp.derivators();
            if gs.iter().any(|g| g.jump_at(w[0]) != 0.0) {
                let jump = gs.iter().map(|g| g.jump_at(w[0])).collect();
                let rest = gs.iter().map(|g| integrate_continuous(&one, g, w[0], w[1])).collect::<Result<_, _>>()?;
                Ok(Cell { jump: Some(jump), rest })
            } else {
                let rest = gs.iter().map(|g| measure_interval(g, w[0], w[1])).collect::<Result<_, _>>()?;
                Ok(Cell { jump: None, rest })
            }
        })
        .collect::<Result<_, MeasureError>>()
        .map_err(SolverError::from)
}

/// `x_i += rate_i · m_i`, skipping components with no mass so that flat
/// stretches leave the state untouched.
pub(super) fn add_increment(x: &mut [f64], rate: &[f64], m: &[f64]) {
    for i in 0..x.len() {
        if m[i] != 0.0 {
            x[i] += rate[i] * m[i];
        }
    }
}

/// Left-endpoint scheme with the atoms taken first: at a jump node
/// `x(s_k⁺) = x(s_k) + f(s_k, x(s_k)) Δ⁺g(s_k)`, then
/// `x(s_{k+1}) = x(s_k⁺) + f(s_k, x(s_k⁺)) μ_g((s_k, s_{k+1}))`.
/// Away from jumps this is `x(s_k) + f(s_k, x(s_k)) μ_g([s_k, s_{k+1}))`.
/// Guards act after each update.
pub fn euler_solve(ivp: &StieltjesIvp, step: f64) -> Result<Trajectory, SolverError> {
    let grid = build_grid(ivp.derivators(), step)?;
    let cells = cells(ivp, &grid)?;
    let n = ivp.dim();
    let mut x = ivp.x0().to_vec();
    check_finite(grid[0], &x)?;
    let mut rate = vec![0.0; n];
    let mut states = Vec::with_capacity(grid.len());
    let mut post_jump = Vec::new();
    states.push(x.clone());
    for (k, cell) in cells.iter().enumerate() {
        let s = grid[k];
        ivp.eval_rhs(s, &x, &mut rate);
        check_finite(s, &rate)?;
        if let Some(jump) = &cell.jump {
            add_increment(&mut x, &rate, jump);
            ivp.apply_guards(s, &mut x)?;
            check_finite(s, &x)?;
            post_jump.push(PostJump { index: k, state: x.clone() });
            if cell.rest.iter().any(|&m| m != 0.0) {
                ivp.eval_rhs(s, &x, &mut rate);
                check_finite(s, &rate)?;
            }
        }
        add_increment(&mut x, &rate, &cell.rest);
        let next = grid[k + 1];
        ivp.apply_guards(next, &mut x)?;
        check_finite(next, &x)?;
        states.push(x.clone());
    }
    let meta = Trajectory::meta_for("euler", step, &grid);
    Ok(Trajectory { grid, states, post_jump, meta })
}
