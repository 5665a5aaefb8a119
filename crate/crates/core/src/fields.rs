//! Discrete vector fields, 2-forms and the Hodge splitting on the torus.
//!
//! A [`DiscreteVectorField`] stores one value per undirected edge, read on
//! the canonical (rightward / upward) orientation, so antisymmetry
//! `phi(x, y) = -phi(y, x)` holds by construction. A [`TwoForm`] stores one
//! value per face, read on the anticlockwise orientation.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::continuum::{line_integral, VectorFunction};
use crate::error::{Error, Result};
use crate::lattice::{Axis, DirectedEdge, Direction, Face, Orientation, Torus, Vertex};
use crate::spectral::Fft2;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteVectorField {
    n: usize,
    values: Vec<f64>,
}

impl DiscreteVectorField {
    pub fn zeros(torus: &Torus) -> Self {
        Self {
            n: torus.side(),
            values: vec![0.0; torus.num_edges()],
        }
    }

    /// Field with the given canonical values, indexed by undirected edge.
    pub fn from_canonical(torus: &Torus, values: Vec<f64>) -> Result<Self> {
        if values.len() != torus.num_edges() {
            return Err(Error::InvalidParameter(format!(
                "expected {} edge values, got {}",
                torus.num_edges(),
                values.len()
            )));
        }
        Ok(Self {
            n: torus.side(),
            values,
        })
    }

    /// Build from a function of canonically oriented edges.
    pub fn from_fn(torus: &Torus, mut f: impl FnMut(&DirectedEdge) -> f64) -> Self {
        let values = torus.canonical_edges().map(|e| f(&e)).collect();
        Self {
            n: torus.side(),
            values,
        }
    }

    /// Discrete gradient `f(y) - f(x)` of a vertex function.
    pub fn gradient(torus: &Torus, f: &[f64]) -> Self {
        Self::from_fn(torus, |e| f[torus.index(e.head)] - f[torus.index(e.tail)])
    }

    /// Harmonic basis field: 1 on every edge `(x, x + e_axis)`, 0 on the others.
    pub fn harmonic(torus: &Torus, axis: Axis) -> Self {
        Self::from_fn(torus, |e| if e.dir.axis() == axis { 1.0 } else { 0.0 })
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn canonical_values(&self) -> &[f64] {
        &self.values
    }

    pub fn canonical_values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, torus: &Torus, e: &DirectedEdge) -> f64 {
        let (k, s) = torus.canonical(e);
        s * self.values[k]
    }

    pub fn set(&mut self, torus: &Torus, e: &DirectedEdge, v: f64) {
        let (k, s) = torus.canonical(e);
        self.values[k] = s * v;
    }

    /// `<phi, psi> = sum over directed edges`, i.e. twice the canonical sum.
    pub fn inner(&self, other: &Self) -> f64 {
        2.0 * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    n: usize,
    values: Vec<f64>,
}

impl TwoForm {
    pub fn zeros(torus: &Torus) -> Self {
        Self {
            n: torus.side(),
            values: vec![0.0; torus.num_faces()],
        }
    }

    /// Values on anticlockwise faces, indexed by anchor vertex.
    pub fn from_values(torus: &Torus, values: Vec<f64>) -> Result<Self> {
        if values.len() != torus.num_faces() {
            return Err(Error::InvalidParameter(format!(
                "expected {} face values, got {}",
                torus.num_faces(),
                values.len()
            )));
        }
        Ok(Self {
            n: torus.side(),
            values,
        })
    }

    pub fn get(&self, torus: &Torus, f: &Face) -> f64 {
        let v = self.values[torus.index(f.anchor)];
        match f.orientation {
            Orientation::Anticlockwise => v,
            Orientation::Clockwise => -v,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `sum_y phi(x, y)` over the four out-edges of `x`.
pub fn divergence(torus: &Torus, phi: &DiscreteVectorField, x: Vertex) -> f64 {
    Direction::ALL.iter().map(|&d| phi.get(torus, &torus.edge(x, d))).sum()
}

pub fn divergence_all(torus: &Torus, phi: &DiscreteVectorField) -> Vec<f64> {
    let n = torus.side();
    let mut out = vec![0.0; n * n];
    for (k, v) in phi.canonical_values().iter().enumerate() {
        let e = torus.canonical_edge_at(k);
        out[torus.index(e.tail)] += v;
        out[torus.index(e.head)] -= v;
    }
    out
}

/// Boundary `delta psi(e) = psi(f+(e)) - psi(f-(e))`.
pub fn two_form_boundary(torus: &Torus, psi: &TwoForm) -> DiscreteVectorField {
    DiscreteVectorField::from_fn(torus, |e| {
        let (fp, fm) = torus.adjacent_faces(e);
        psi.get(torus, &fp) - psi.get(torus, &fm)
    })
}

/// Sum of `phi` along the traversal of `f`.
pub fn face_circulation(torus: &Torus, phi: &DiscreteVectorField, f: &Face) -> f64 {
    torus.face_edges(f).iter().map(|e| phi.get(torus, e)).sum()
}

/// The three orthogonal components of a discrete vector field.
#[derive(Clone, Debug)]
pub struct HodgeParts {
    pub gradient: DiscreteVectorField,
    pub circulation: DiscreteVectorField,
    pub harmonic: DiscreteVectorField,
    /// Coefficients of the harmonic part on the two basis fields.
    pub harmonic_coefficients: [f64; 2],
    /// Potential `f` with `gradient = grad f`, normalized to zero mean.
    pub potential: Vec<f64>,
}

/// Split `phi` into gradient, circulation and harmonic parts.
///
/// The gradient part comes from an FFT solve of the graph Poisson equation
/// `div grad f = div phi`; the circulation part is the remainder, which is
/// then checked to be divergence free with vanishing axis sums.
pub fn hodge_decompose(torus: &Torus, phi: &DiscreteVectorField) -> Result<HodgeParts> {
    let n = torus.side();
    let nn = (n * n) as f64;
    let mut coeff = [0.0; 2];
    for (k, v) in phi.canonical_values().iter().enumerate() {
        coeff[k % 2] += v;
    }
    coeff[0] /= nn;
    coeff[1] /= nn;
    let mut harmonic = DiscreteVectorField::harmonic(torus, Axis::X);
    for (k, v) in harmonic.canonical_values_mut().iter_mut().enumerate() {
        *v = coeff[k % 2];
    }

    let div = divergence_all(torus, phi);
    let potential = solve_graph_poisson(n, &div);
    let gradient = DiscreteVectorField::gradient(torus, &potential);
    let circulation = phi.sub(&gradient).sub(&harmonic);

    let scale = phi.max_abs().max(f64::MIN_POSITIVE);
    let residual_div = divergence_all(torus, &circulation)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let mut axis_sums = [0.0f64; 2];
    for (k, v) in circulation.canonical_values().iter().enumerate() {
        axis_sums[k % 2] += v;
    }
    let residual = residual_div.max(axis_sums[0].abs() / nn).max(axis_sums[1].abs() / nn);
    if residual > 1e-9 * scale {
        return Err(Error::SolverResidual { residual });
    }

    Ok(HodgeParts {
        gradient,
        circulation,
        harmonic,
        harmonic_coefficients: coeff,
        potential,
    })
}

/// Zero-mean solution `f` of `sum_y (f(y) - f(x)) = rhs(x)` on the `n x n`
/// torus. The mean of `rhs` is discarded.
pub fn solve_graph_poisson(n: usize, rhs: &[f64]) -> Vec<f64> {
    let fft = Fft2::new(n);
    let mut hat = fft.forward_real(rhs);
    for k2 in 0..n {
        for k1 in 0..n {
            let idx = k2 * n + k1;
            if idx == 0 {
                hat[idx] = Complex64::default();
                continue;
            }
            let lam =
                4.0 - 2.0 * (2.0 * PI * k1 as f64 / n as f64).cos() - 2.0 * (2.0 * PI * k2 as f64 / n as f64).cos();
            hat[idx] /= -lam;
        }
    }
    fft.inverse_real(hat)
}

/// Dimensions of the gradient, circulation and harmonic subspaces and of
/// their sum, measured as numerical matrix ranks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubspaceRanks {
    pub gradient: usize,
    pub circulation: usize,
    pub harmonic: usize,
    pub total: usize,
}

pub fn subspace_ranks(torus: &Torus) -> SubspaceRanks {
    let nv = torus.num_vertices();
    let ne = torus.num_edges();
    let mut grad = DMatrix::<f64>::zeros(ne, nv);
    for v in 0..nv {
        let mut f = vec![0.0; nv];
        f[v] = 1.0;
        let g = DiscreteVectorField::gradient(torus, &f);
        grad.set_column(v, &nalgebra::DVector::from_column_slice(g.canonical_values()));
    }
    let mut circ = DMatrix::<f64>::zeros(ne, nv);
    for a in 0..nv {
        let mut psi = vec![0.0; nv];
        psi[a] = 1.0;
        let d = two_form_boundary(torus, &TwoForm::from_values(torus, psi).expect("size"));
        circ.set_column(a, &nalgebra::DVector::from_column_slice(d.canonical_values()));
    }
    let mut harm = DMatrix::<f64>::zeros(ne, 2);
    for axis in Axis::ALL {
        let h = DiscreteVectorField::harmonic(torus, axis);
        harm.set_column(
            axis.index(),
            &nalgebra::DVector::from_column_slice(h.canonical_values()),
        );
    }
    let mut all = DMatrix::<f64>::zeros(ne, 2 * nv + 2);
    all.columns_mut(0, nv).copy_from(&grad);
    all.columns_mut(nv, nv).copy_from(&circ);
    all.columns_mut(2 * nv, 2).copy_from(&harm);
    let tol = 1e-9;
    SubspaceRanks {
        gradient: grad.rank(tol),
        circulation: circ.rank(tol),
        harmonic: harm.rank(tol),
        total: all.rank(tol),
    }
}

/// Discretize a continuum vector field by line integrals along each edge.
pub fn discretize_field<G: VectorFunction + ?Sized>(g: &G, torus: &Torus) -> DiscreteVectorField {
    let h = 1.0 / torus.side() as f64;
    DiscreteVectorField::from_fn(torus, |e| {
        let a = torus.position(e.tail);
        let b = match e.dir.axis() {
            Axis::X => [a[0] + h, a[1]],
            Axis::Y => [a[0], a[1] + h],
        };
        line_integral(g, a, b)
    })
}

/// Test-field label: component `j` in `{1, 2}` and wave vector `z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FourierMode {
    pub z: [i32; 2],
    pub component: u8,
}

impl FourierMode {
    pub fn new(component: u8, z: [i32; 2]) -> Self {
        Self { z, component }
    }

    /// Eigenvalue `1 + 4 pi^2 |z|^2` of `1 - Laplacian` on `h_z`.
    pub fn gamma(&self) -> f64 {
        let z2 = (self.z[0] as f64).powi(2) + (self.z[1] as f64).powi(2);
        1.0 + 4.0 * PI * PI * z2
    }

    /// `max(|z1|, |z2|)`.
    pub fn shell(&self) -> i32 {
        self.z[0].abs().max(self.z[1].abs())
    }

    /// All modes with `|z|_inf <= zmax`, both components.
    pub fn all_up_to(zmax: i32) -> Vec<FourierMode> {
        let mut out = Vec::new();
        for z1 in -zmax..=zmax {
            for z2 in -zmax..=zmax {
                for c in [1, 2] {
                    out.push(FourierMode::new(c, [z1, z2]));
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualNorm {
    /// Truncated squared norm.
    pub value: f64,
    /// Contribution of the outermost shell `|z|_inf = zmax`.
    pub last_shell: f64,
}

/// Truncated squared dual Sobolev norm `sum gamma_z^{-k} phi(I^{j,z})^2`.
pub fn sobolev_dual_norm(pairings: &HashMap<FourierMode, f64>, k: f64, zmax: i32) -> Result<DualNorm> {
    if !(k > 2.0) {
        return Err(Error::SobolevOrder(k));
    }
    let mut value = 0.0;
    let mut last_shell = 0.0;
    for mode in FourierMode::all_up_to(zmax) {
        let p = pairings
            .get(&mode)
            .ok_or_else(|| Error::InvalidParameter(format!("missing pairing for mode {mode:?}")))?;
        let term = mode.gamma().powf(-k) * p * p;
        value += term;
        if mode.shell() == zmax {
            last_shell += term;
        }
    }
    Ok(DualNorm { value, last_shell })
}
