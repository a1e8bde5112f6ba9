//! Seeded random instances shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stieltjes::{Density, Derivator, Quadrature};

/// Strictly increasing breakpoints on `[0, len]` with `segments` pieces,
/// each at least `len / (4 segments)` wide.
pub fn breakpoints(rng: &mut ChaCha8Rng, len: f64, segments: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..segments).map(|_| rng.gen_range(1.0..4.0)).collect();
    let total: f64 = w.iter().sum();
    let mut acc = 0.0;
    let mut bps = vec![0.0];
    for wi in &w[..segments - 1] {
        acc += wi / total * len;
        bps.push(acc);
    }
    bps.push(len);
    bps
}

/// Jumps on a random subset of the breakpoints in `[a, b)`, magnitudes in
/// `[0.2, 1.5]` with random sign when `signed`.
pub fn jumps_on(rng: &mut ChaCha8Rng, bps: &[f64], max: usize, signed: bool) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &t in &bps[..bps.len() - 1] {
        if out.len() < max && rng.gen_bool(0.5) {
            let m = rng.gen_range(0.2..1.5);
            out.push((t, if signed && rng.gen_bool(0.4) { -m } else { m }));
        }
    }
    out
}

pub fn slope(rng: &mut ChaCha8Rng, signed: bool) -> f64 {
    let m = rng.gen_range(0.3..2.0);
    if signed && rng.gen_bool(0.4) {
        -m
    } else {
        m
    }
}

/// Mixed densities of either sign, including flat and sampled segments.
pub fn bv_derivator(rng: &mut ChaCha8Rng) -> Derivator {
    bv_with(rng, true)
}

/// As `bv_derivator` without sampled densities.
pub fn exact_derivator(rng: &mut ChaCha8Rng) -> Derivator {
    bv_with(rng, false)
}

fn bv_with(rng: &mut ChaCha8Rng, sampled: bool) -> Derivator {
    let len = rng.gen_range(1.0..5.0);
    let m = rng.gen_range(1..7);
    let bps = breakpoints(rng, len, m);
    let kinds = if sampled { 4 } else { 3 };
    let dens = (0..m)
        .map(|_| match rng.gen_range(0..kinds) {
            0 => Density::Zero,
            1 => Density::ConstantSlope(slope(rng, true)),
            2 => Density::Polynomial((0..rng.gen_range(2..5)).map(|_| rng.gen_range(-2.0..2.0)).collect()),
            _ => Density::Sampled {
                values: (0..rng.gen_range(2..12)).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                rule: if rng.gen_bool(0.5) { Quadrature::Trapezoid } else { Quadrature::LeftRectangle },
            },
        })
        .collect();
    let jumps = jumps_on(rng, &bps, 8, true);
    Derivator::new(rng.gen_range(-1.0..1.0), bps, dens, &jumps).expect("valid random derivator")
}

/// Piecewise-linear derivator with jumps, together with its description
/// so tests can evaluate it independently.
pub struct Linear {
    pub g: Derivator,
    pub anchor: f64,
    pub bps: Vec<f64>,
    pub slopes: Vec<f64>,
    pub jumps: Vec<(f64, f64)>,
}

impl Linear {
    /// `g(t)` from the description: anchor plus slopes plus jumps strictly before `t`.
    pub fn value(&self, t: f64) -> f64 {
        let mut v = self.anchor;
        for (k, w) in self.bps.windows(2).enumerate() {
            v += self.slopes[k] * (t.min(w[1]) - w[0]).max(0.0);
        }
        v + self.jumps.iter().filter(|j| j.0 < t).map(|j| j.1).sum::<f64>()
    }

    /// Total variation on `[a, t]` from the description.
    pub fn variation(&self, t: f64) -> f64 {
        let mut v = 0.0;
        for (k, w) in self.bps.windows(2).enumerate() {
            v += self.slopes[k].abs() * (t.min(w[1]) - w[0]).max(0.0);
        }
        v + self.jumps.iter().filter(|j| j.0 < t).map(|j| j.1.abs()).sum::<f64>()
    }
}

pub fn linear_derivator(rng: &mut ChaCha8Rng, max_jumps: usize, signed: bool, flats: bool) -> Linear {
    let len = rng.gen_range(1.0..4.0);
    let m = rng.gen_range(1..9);
    let bps = breakpoints(rng, len, m);
    let slopes: Vec<f64> = (0..m).map(|_| if flats && rng.gen_bool(0.2) { 0.0 } else { slope(rng, signed) }).collect();
    let jumps = jumps_on(rng, &bps, max_jumps, signed);
    let anchor = rng.gen_range(-1.0..1.0);
    let g = Derivator::piecewise_linear(anchor, bps.clone(), &slopes, &jumps).expect("valid linear derivator");
    Linear { g, anchor, bps, slopes, jumps }
}

/// Right-continuous step function: `values[i]` on `[nodes[i], nodes[i+1])`.
#[derive(Debug, Clone)]
pub struct Step {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl Step {
    pub fn at(&self, t: f64) -> f64 {
        self.values[self.nodes.partition_point(|&s| s <= t).saturating_sub(1)]
    }
}

/// `∫_{[u,v)} h dμ_g` over the continuous part of a piecewise-linear `g`,
/// computed by overlapping the two partitions.
pub fn continuous_integral(h: &Step, lin: &Linear, u: f64, v: f64) -> f64 {
    let mut cuts: Vec<f64> = lin.bps.iter().chain(&h.nodes).copied().filter(|&s| s > u && s < v).collect();
    cuts.push(u);
    cuts.push(v);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let k = lin.bps.partition_point(|&s| s <= mid).saturating_sub(1).min(lin.slopes.len() - 1);
            h.at(mid) * lin.slopes[k] * (w[1] - w[0])
        })
        .sum()
}

/// Probe times: uniform interior points plus every breakpoint.
pub fn probes(g: &Derivator, n: usize) -> Vec<f64> {
    let (a, b) = g.domain();
    let mut ts: Vec<f64> = (0..=n).map(|k| (a + (b - a) * k as f64 / n as f64).min(b)).collect();
    ts.extend_from_slice(g.breakpoints());
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}
