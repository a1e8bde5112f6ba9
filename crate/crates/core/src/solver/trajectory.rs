use std::io::{self, Write};

use serde::{Deserialize, Serialize};

/// Right-limit state at a grid node that is a jump point of some derivator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostJump {
    pub index: usize,
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub scheme: String,
    pub nominal_step: f64,
    pub steps: usize,
    pub min_step: f64,
    pub max_step: f64,
}

/// Discrete solution: one state per grid node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub post_jump: Vec<PostJump>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub(crate) fn meta_for(scheme: &str, nominal_step: f64, grid: &[f64]) -> TrajectoryMeta {
        let widths = grid.windows(2).map(|w| w[1] - w[0]);
        TrajectoryMeta {
            scheme: scheme.to_string(),
            nominal_step,
            steps: grid.len().saturating_sub(1),
            min_step: widths.clone().fold(f64::INFINITY, f64::min),
            max_step: widths.fold(0.0, f64::max),
        }
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map_or(&[], Vec::as_slice)
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[i]).collect()
    }

    /// Left-constant interpolant: the state at the last node `≤ t`.
    pub fn state_at(&self, t: f64) -> &[f64] {
        let k = self.grid.partition_point(|&s| s <= t).saturating_sub(1);
        &self.states[k]
    }

    /// CSV with columns `time, x1..xn, post_jump`; each post-jump state is
    /// an extra row flagged with 1 right after its node.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        let n = self.dim();
        let header: Vec<String> = std::iter::once("time".to_string())
            .chain((1..=n).map(|i| format!("x{i}")))
            .chain(std::iter::once("post_jump".to_string()))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        let mut jumps = self.post_jump.iter().peekable();
        for (k, (t, x)) in self.grid.iter().zip(&self.states).enumerate() {
            write_row(&mut out, *t, x, 0)?;
            while let Some(pj) = jumps.next_if(|pj| pj.index == k) {
                write_row(&mut out, *t, &pj.state, 1)?;
            }
        }
        Ok(())
    }
}

fn write_row(out: &mut impl Write, t: f64, x: &[f64], flag: u8) -> io::Result<()> {
    write!(out, "{t}")?;
    for v in x {
        write!(out, ",{v}")?;
    }
    writeln!(out, ",{flag}")
}
