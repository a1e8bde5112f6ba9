use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::euler::{add_increment, cells};
use super::{euler_solve, Rhs, SolverError, StieltjesIvp, Trajectory};

/// Box `[t.0, t.1] × Π [lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub t: (f64, f64),
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

fn sup_norm(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest sampled `‖f(t,u) − f(t,v)‖∞ / ‖u − v‖∞`. Half the pairs are
/// drawn from box corners, where linear maps attain their induced norm.
pub fn lipschitz_probe(rhs: &Rhs, region: &Region, samples: usize, seed: u64) -> Result<f64, SolverError> {
    if samples < 2 {
        return Err(SolverError::Samples);
    }
    let n = region.lower.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut u, mut v) = (vec![0.0; n], vec![0.0; n]);
    let (mut fu, mut fv) = (vec![0.0; n], vec![0.0; n]);
    let mut best: f64 = 0.0;
    for k in 0..samples {
        let t = sample(&mut rng, region.t.0, region.t.1);
        for i in 0..n {
            let (lo, hi) = (region.lower[i], region.upper[i]);
            if k % 2 == 0 {
                u[i] = sample(&mut rng, lo, hi);
                v[i] = sample(&mut rng, lo, hi);
            } else {
                u[i] = if rng.gen::<bool>() { lo } else { hi };
                v[i] = if rng.gen::<bool>() { lo } else { hi };
            }
        }
        let d = sup_norm(u.iter().zip(&v).map(|(a, b)| a - b));
        if d == 0.0 {
            continue;
        }
        rhs(t, &u, &mut fu);
        rhs(t, &v, &mut fv);
        let ratio = sup_norm(fu.iter().zip(&fv).map(|(a, b)| a - b)) / d;
        if ratio.is_finite() {
            best = best.max(ratio);
        }
    }
    Ok(best)
}

fn sample(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// Max over nodes and components of
/// `|x_i(s_k) − x0_i − ∫_{[a, s_k)} f_i(s, x̂(s)) dμ_{g_i}|`, where `x̂` takes the
/// node state at each node and the post-jump state on the open cell after it.
pub fn residual(traj: &Trajectory, ivp: &StieltjesIvp) -> Result<f64, SolverError> {
    let (a, b) = ivp.domain();
    let grid = &traj.grid;
    if grid.len() < 2 || grid[0] != a || *grid.last().unwrap() != b {
        return Err(SolverError::GridMismatch("grid does not span the problem domain".into()));
    }
    if traj.states.len() != grid.len() {
        return Err(SolverError::GridMismatch("one state per grid node expected".into()));
    }
    let n = ivp.dim();
    if traj.states.iter().any(|x| x.len() != n) {
        return Err(SolverError::GridMismatch(format!("states must have {n} components")));
    }
    if ivp.derivators().iter().flat_map(|g| g.jump_points()).any(|(t, _)| grid.binary_search_by(|s| s.total_cmp(&t)).is_err()) {
        return Err(SolverError::GridMismatch("a jump point is missing from the grid".into()));
    }
    let cells = cells(ivp, grid)?;
    let mut acc = ivp.x0().to_vec();
    let mut rate = vec![0.0; n];
    let mut worst = sup_norm(acc.iter().zip(&traj.states[0]).map(|(p, q)| p - q));
    for (k, cell) in cells.iter().enumerate() {
        let x = &traj.states[k];
        ivp.eval_rhs(grid[k], x, &mut rate);
        if let Some(jump) = &cell.jump {
            add_increment(&mut acc, &rate, jump);
            let plus = traj
                .post_jump
                .iter()
                .find(|p| p.index == k)
                .ok_or_else(|| SolverError::GridMismatch(format!("no post-jump state at t = {}", grid[k])))?;
            ivp.eval_rhs(grid[k], &plus.state, &mut rate);
        }
        add_increment(&mut acc, &rate, &cell.rest);
        worst = worst.max(sup_norm(acc.iter().zip(&traj.states[k + 1]).map(|(p, q)| p - q)));
    }
    Ok(worst)
}

/// What a convergence study measures the final state against.
pub enum Reference {
    ClosedForm(Box<dyn Fn(f64) -> Vec<f64>>),
    Trajectory(Trajectory),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub step: f64,
    pub error: f64,
    /// `e(previous step) / e(step)`.
    pub ratio: Option<f64>,
    /// `log2(ratio)`.
    pub order: Option<f64>,
}

/// Euler error at the final time for each step.
pub fn convergence_study(ivp: &StieltjesIvp, steps: &[f64], reference: &Reference) -> Result<Vec<ConvergenceRow>, SolverError> {
    let (_, b) = ivp.domain();
    let target = match reference {
        Reference::ClosedForm(f) => f(b),
        Reference::Trajectory(t) => t.final_state().to_vec(),
    };
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(steps.len());
    for &step in steps {
        let tr = euler_solve(ivp, step)?;
        let error = sup_norm(tr.final_state().iter().zip(&target).map(|(p, q)| p - q));
        let ratio = rows.last().filter(|r| error > 0.0 && r.error > 0.0).map(|r| r.error / error);
        rows.push(ConvergenceRow { step, error, ratio, order: ratio.map(f64::log2) });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivator::Derivator;

    #[test]
    fn lipschitz_of_linear_map_reaches_row_norm() {
        let a = [[1.0, -2.0, 0.5], [0.3, 0.2, -0.1], [-1.5, 1.0, 1.0]];
        let rhs = move |_: f64, x: &[f64], out: &mut [f64]| {
            for i in 0..3 {
                out[i] = (0..3).map(|j| a[i][j] * x[j]).sum();
            }
        };
        let region = Region { t: (0.0, 1.0), lower: vec![-1.0; 3], upper: vec![1.0; 3] };
        let l = lipschitz_probe(&rhs, &region, 2000, 7).unwrap();
        let exact = 3.5;
        assert!(l <= exact + 1e-12 && l > 0.99 * exact, "{l}");
        assert_eq!(l, lipschitz_probe(&rhs, &region, 2000, 7).unwrap());
    }

    #[test]
    fn lipschitz_constant_and_square() {
        let region = Region { t: (0.0, 1.0), lower: vec![0.0], upper: vec![1.0] };
        assert_eq!(lipschitz_probe(&|_: f64, _: &[f64], o: &mut [f64]| o[0] = 4.0, &region, 100, 1).unwrap(), 0.0);
        let l = lipschitz_probe(&|_: f64, x: &[f64], o: &mut [f64]| o[0] = x[0] * x[0], &region, 4000, 1).unwrap();
        assert!(l <= 2.0 && l > 1.9, "{l}");
        assert!(lipschitz_probe(&|_: f64, _: &[f64], _: &mut [f64]| {}, &region, 1, 1).is_err());
    }

    #[test]
    fn residual_detects_corruption() {
        let g = Derivator::identity(0.0, 2.0).unwrap().with_jumps(&[(1.0, 1.0)]).unwrap();
        let ivp = StieltjesIvp::new(vec![g], vec![1.0], |_, x, out| out[0] = -2.0 * x[0]).unwrap();
        let mut tr = euler_solve(&ivp, 0.01).unwrap();
        assert!(residual(&tr, &ivp).unwrap() <= 1e-10);
        tr.states[50][0] += 1.0;
        assert!(residual(&tr, &ivp).unwrap() >= 0.99);
        tr.grid.pop();
        assert!(matches!(residual(&tr, &ivp), Err(SolverError::GridMismatch(_))));
    }

    #[test]
    fn study_on_pure_jump_measure_is_exact() {
        let g = Derivator::linear(0.0, 2.0, 0.0, 0.0).unwrap().with_jumps(&[(0.5, 1.0), (1.0, 0.5)]).unwrap();
        let ivp = StieltjesIvp::new(vec![g], vec![1.0], |_, x, out| out[0] = 0.5 * x[0]).unwrap();
        let rows = convergence_study(&ivp, &[0.5, 0.25], &Reference::ClosedForm(Box::new(|_| vec![1.5 * 1.25]))).unwrap();
        assert!(rows.iter().all(|r| r.error == 0.0 && r.order.is_none()));
    }
}
