//! Empirical measures, integrated currents, box densities and martingale
//! diagnostics computed from trajectories.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::continuum::{FourierField, ScalarFunction};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fields::{discretize_field, sobolev_dual_norm, DiscreteVectorField, DualNorm, FourierMode};
use crate::lattice::{canonical_to_directed, directed_to_canonical, Neighbourhoods, Torus, Vertex};
use crate::model::{Configuration, Model};
use crate::sim::Trajectory;

/// `pi^N(f) = N^{-2} sum_x eta(x) f(x/N)`.
pub fn empirical_pairing<F: ScalarFunction + ?Sized>(torus: &Torus, config: &Configuration, f: &F) -> f64 {
    let occ = config.occupations();
    let s: f64 = torus
        .vertices()
        .filter(|&v| occ[torus.index(v)] == 1)
        .map(|v| f.eval(torus.position(v)))
        .sum();
    s / torus.num_vertices() as f64
}

/// `pi^N(f)` for a function already sampled on the lattice.
pub fn empirical_pairing_values(config: &Configuration, f: &[f64]) -> f64 {
    let s: f64 = config
        .occupations()
        .iter()
        .zip(f)
        .filter(|(&o, _)| o == 1)
        .map(|(_, v)| v)
        .sum();
    s / f.len() as f64
}

/// `N^{-2} sum_{canonical e} G_N(e) J(e)` for a vector of net crossings.
pub fn current_pairing(g_n: &DiscreteVectorField, crossings: &[i64]) -> f64 {
    let n2 = (g_n.side() * g_n.side()) as f64;
    g_n.canonical_values()
        .iter()
        .zip(crossings)
        .map(|(g, &j)| g * j as f64)
        .sum::<f64>()
        / n2
}

/// The integrated current field `J^N_t(G)` at a recorded time `t`.
pub fn current_functional(traj: &Trajectory, g_n: &DiscreteVectorField, t: f64) -> Result<f64> {
    Ok(current_pairing(g_n, &traj.snapshot_at(t)?.crossings))
}

/// Integer interval of lattice offsets `1..=l` or `-l..=-1`.
fn box_offsets(p: i32, l: usize) -> impl Iterator<Item = isize> {
    let l = l as isize;
    (1..=l).map(move |k| if p > 0 { k } else { -k })
}

/// Density in the box `B^l_{p,q}(x)` of side `l` having `x` as a corner.
/// The anchor itself never belongs to the box.
pub fn box_density(torus: &Torus, config: &Configuration, x: Vertex, p: i32, q: i32, l: usize) -> Result<f64> {
    if l == 0 || l >= torus.side() {
        return Err(Error::InvalidParameter(format!("box side must be in [1, N), got {l}")));
    }
    check_quadrant(p, q)?;
    let occ = config.occupations();
    let mut count = 0usize;
    for dj in box_offsets(q, l) {
        for di in box_offsets(p, l) {
            count += occ[torus.index(torus.translate(x, di, dj))] as usize;
        }
    }
    Ok(count as f64 / (l * l) as f64)
}

fn check_quadrant(p: i32, q: i32) -> Result<()> {
    if p.abs() != 1 || q.abs() != 1 {
        return Err(Error::InvalidParameter(format!(
            "quadrant must be in {{-1, 1}}^2, got ({p}, {q})"
        )));
    }
    Ok(())
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-9 {
        r
    } else {
        v
    }
}

/// `pi^N(i^{(p,q,u)}_eps)`: the empirical measure of the half-open square
/// of side `eps` in quadrant `(p, q)` at `u`, divided by `eps^2`.
///
/// Intervals: `p = 1` gives `[u1, u1 + eps)`, `p = -1` gives `(u1 - eps, u1]`,
/// except in the `(-1, -1)` quadrant whose first interval is open at both ends.
pub fn kernel_pairing(torus: &Torus, config: &Configuration, u: [f64; 2], eps: f64, p: i32, q: i32) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!("eps must be in (0, 1/2), got {eps}")));
    }
    check_quadrant(p, q)?;
    let n = torus.side() as f64;
    // work in lattice units so that grid-aligned inputs compare exactly
    let a = [snap(u[0] * n), snap(u[1] * n)];
    let w = snap(eps * n);
    let inside = |y: f64, a: f64, forward: bool, open_end: bool| {
        let d = if forward { y - a } else { a - y }.rem_euclid(n);
        d < w && !(open_end && d == 0.0)
    };
    let open_first = p == -1 && q == -1;
    let occ = config.occupations();
    let mut count = 0usize;
    for v in torus.vertices() {
        if occ[torus.index(v)] == 0 {
            continue;
        }
        if inside(v.i as f64, a[0], p > 0, open_first) && inside(v.j as f64, a[1], q > 0, false) {
            count += 1;
        }
    }
    Ok(count as f64 / (n * n * eps * eps))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingalePoint {
    pub time: f64,
    pub current: f64,
    /// `J_t(G) - int_0^t sum_e j(e) G_N(e) ds`.
    pub residual: f64,
    /// `N^{-2} int_0^t sum_e (c_{x,y} + c_{y,x}) G_N(e)^2 ds`.
    pub quadratic_variation: f64,
}

/// Replays the event log and integrates the compensator of `J_t(G)` exactly
/// between jumps. `times` must be recorded snapshot times.
pub fn martingale_diagnostics(
    model: &Model,
    traj: &Trajectory,
    g_n: &DiscreteVectorField,
    times: &[f64],
) -> Result<Vec<MartingalePoint>> {
    let log = traj.log.as_ref().ok_or(Error::EventLogMissing)?;
    let torus = model.torus();
    let nb = Neighbourhoods::new(torus);
    let g = g_n.canonical_values();
    let mut occ = traj.initial().occupations().to_vec();

    let edge_terms = |occ: &[u8], c: usize| -> (f64, f64) {
        let fwd = canonical_to_directed(c);
        let a = model.rate_at(occ, fwd);
        let b = model.rate_at(occ, torus.reverse_index(fwd));
        ((a - b) * g[c], (a + b) * g[c] * g[c])
    };
    let mut drift = vec![0.0; torus.num_edges()];
    let mut noise = vec![0.0; torus.num_edges()];
    for c in 0..torus.num_edges() {
        (drift[c], noise[c]) = edge_terms(&occ, c);
    }
    let mut s: f64 = drift.iter().sum();
    let mut q: f64 = noise.iter().sum();
    let n2 = torus.num_vertices() as f64;

    let mut out = Vec::with_capacity(times.len());
    let mut int_s = 0.0;
    let mut int_q = 0.0;
    let mut now = 0.0;
    let mut events = log.iter().peekable();
    for &t in times {
        let snap = traj.snapshot_at(t)?;
        while let Some(ev) = events.next_if(|ev| ev.time <= t) {
            int_s += s * (ev.time - now);
            int_q += q * (ev.time - now);
            now = ev.time;
            let k = ev.edge as usize;
            let st = torus.stencil(k);
            occ.swap(st.tail as usize, st.head as usize);
            let (c, _) = directed_to_canonical(torus, k);
            for &d in nb.get(c) {
                let d = d as usize;
                let (ds, dq) = edge_terms(&occ, d);
                s += ds - drift[d];
                q += dq - noise[d];
                drift[d] = ds;
                noise[d] = dq;
            }
        }
        int_s += s * (t - now);
        int_q += q * (t - now);
        now = t;
        // refresh the running sums to keep rounding from accumulating
        s = drift.iter().sum();
        q = noise.iter().sum();
        let current = current_pairing(g_n, &snap.crossings);
        out.push(MartingalePoint {
            time: t,
            current,
            residual: current - int_s,
            quadratic_variation: int_q / n2,
        });
    }
    Ok(out)
}

/// Discretized test fields `I^{j,z}` for all modes with `|z|_inf <= zmax`.
#[derive(Clone, Debug)]
pub struct FourierBasis {
    pub zmax: i32,
    pub modes: Vec<(FourierMode, DiscreteVectorField)>,
}

impl FourierBasis {
    pub fn new(torus: &Torus, zmax: i32, exec: Execution) -> Self {
        let modes = FourierMode::all_up_to(zmax);
        let fields = exec.map_indexed(modes.len(), |i| {
            let m = modes[i];
            discretize_field(&FourierField::basis(m.component as usize, m.z), torus)
        });
        Self {
            zmax,
            modes: modes.into_iter().zip(fields).collect(),
        }
    }

    pub fn pairings(&self, crossings: &[i64]) -> HashMap<FourierMode, f64> {
        self.modes
            .iter()
            .map(|(m, g)| (*m, current_pairing(g, crossings)))
            .collect()
    }

    /// `||J_t||^2_{-k}` truncated at `zmax`.
    pub fn dual_norm(&self, crossings: &[i64], k: f64) -> Result<DualNorm> {
        sobolev_dual_norm(&self.pairings(crossings), k, self.zmax)
    }
}
