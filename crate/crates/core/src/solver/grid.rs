use super::SolverError;
use crate::derivator::Derivator;

/// Uniform grid of spacing `step` on the common domain, merged with every
/// jump point. Nodes closer than `1e-12·T` are merged, keeping jump points
/// and the final time.
pub fn build_grid(derivators: &[Derivator], step: f64) -> Result<Vec<f64>, SolverError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(SolverError::Step(step));
    }
    let (a, b) = derivators.first().ok_or(SolverError::Empty)?.domain();
    let span = b - a;
    let tol = 1e-12 * span;

    // (time, pinned) where pinned nodes win over uniform ones when merging
    let mut nodes: Vec<(f64, bool)> = Vec::new();
    let count = (span / step).ceil() as usize;
    nodes.extend((0..count).map(|k| (a + k as f64 * step, k == 0)));
    nodes.push((b, true));
    for g in derivators {
        nodes.extend(g.jump_points().map(|(t, _)| (t, true)));
    }
    nodes.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut grid: Vec<(f64, bool)> = Vec::with_capacity(nodes.len());
    for node in nodes {
        match grid.last_mut() {
            Some(last) if node.0 - last.0 <= tol => {
                if node.1 && !last.1 {
                    *last = node;
                }
            }
            _ => grid.push(node),
        }
    }
    Ok(grid.into_iter().map(|(t, _)| t).collect())
}
