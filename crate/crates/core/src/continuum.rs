//! Smooth functions and vector fields on the unit torus, represented as
//! finite trigonometric series so that heat flow, derivatives and
//! serialization are all closed-form.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

const TWO_PI: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    Cos,
    Sin,
}

/// `amplitude * trig(2 pi k . u)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub amplitude: f64,
    pub k: [i32; 2],
    pub trig: Trig,
}

impl Wave {
    fn phase(&self, u: [f64; 2]) -> f64 {
        TWO_PI * (self.k[0] as f64 * u[0] + self.k[1] as f64 * u[1])
    }

    pub fn value(&self, u: [f64; 2]) -> f64 {
        let p = self.phase(u);
        self.amplitude
            * match self.trig {
                Trig::Cos => p.cos(),
                Trig::Sin => p.sin(),
            }
    }

    /// Partial derivative along axis `a` (0 or 1).
    pub fn derivative(&self, u: [f64; 2], a: usize) -> f64 {
        let p = self.phase(u);
        let c = TWO_PI * self.k[a] as f64 * self.amplitude;
        match self.trig {
            Trig::Cos => -c * p.sin(),
            Trig::Sin => c * p.cos(),
        }
    }

    pub fn wavenumber_sq(&self) -> f64 {
        let (a, b) = (self.k[0] as f64, self.k[1] as f64);
        a * a + b * b
    }
}

/// Real scalar function on the unit torus: a constant plus a finite sum of
/// plane waves.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScalarSeries {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub waves: Vec<Wave>,
}

/// True when `z` is positive in the lexicographic order of `Z^2`.
fn lex_positive(z: [i32; 2]) -> bool {
    z[0] > 0 || (z[0] == 0 && z[1] > 0)
}

impl ScalarSeries {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            waves: Vec::new(),
        }
    }

    /// Element `h_z` of the real orthonormal Fourier basis: `1` for `z = 0`,
    /// `sqrt(2) cos(2 pi z.u)` for lexicographically positive `z` and
    /// `sqrt(2) sin(2 pi z.u)` otherwise.
    pub fn basis(z: [i32; 2]) -> Self {
        if z == [0, 0] {
            return Self::constant(1.0);
        }
        let trig = if lex_positive(z) { Trig::Cos } else { Trig::Sin };
        Self {
            constant: 0.0,
            waves: vec![Wave {
                amplitude: SQRT_2,
                k: z,
                trig,
            }],
        }
    }

    pub fn with_wave(mut self, amplitude: f64, k: [i32; 2], trig: Trig) -> Self {
        self.waves.push(Wave { amplitude, k, trig });
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            constant: self.constant * s,
            waves: self
                .waves
                .iter()
                .map(|w| Wave {
                    amplitude: w.amplitude * s,
                    ..*w
                })
                .collect(),
        }
    }

    pub fn value(&self, u: [f64; 2]) -> f64 {
        self.constant + self.waves.iter().map(|w| w.value(u)).sum::<f64>()
    }

    pub fn gradient(&self, u: [f64; 2]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for w in &self.waves {
            g[0] += w.derivative(u, 0);
            g[1] += w.derivative(u, 1);
        }
        g
    }

    pub fn partial(&self, u: [f64; 2], axis: usize) -> f64 {
        self.waves.iter().map(|w| w.derivative(u, axis)).sum()
    }

    /// Exact solution of the heat equation `d rho/dt = Laplacian rho` at time `t`.
    pub fn heat_evolved(&self, t: f64) -> Self {
        Self {
            constant: self.constant,
            waves: self
                .waves
                .iter()
                .map(|w| Wave {
                    amplitude: w.amplitude * (-4.0 * PI * PI * w.wavenumber_sq() * t).exp(),
                    ..*w
                })
                .collect(),
        }
    }

    /// Upper bound on `sup |f|`.
    pub fn sup_bound(&self) -> f64 {
        self.constant.abs() + self.waves.iter().map(|w| w.amplitude.abs()).sum::<f64>()
    }

    pub fn max_wavenumber(&self) -> f64 {
        self.waves.iter().map(|w| w.wavenumber_sq().sqrt()).fold(0.0, f64::max)
    }
}

/// Smooth vector field on the unit torus with trigonometric components.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FourierField {
    pub components: [ScalarSeries; 2],
}

impl FourierField {
    pub fn new(g1: ScalarSeries, g2: ScalarSeries) -> Self {
        Self { components: [g1, g2] }
    }

    pub fn constant(c: [f64; 2]) -> Self {
        Self::new(ScalarSeries::constant(c[0]), ScalarSeries::constant(c[1]))
    }

    /// The test field `I^{j,z}`: component `j` (1 or 2) equals `h_z`, the
    /// other vanishes.
    pub fn basis(j: usize, z: [i32; 2]) -> Self {
        assert!(j == 1 || j == 2, "component index must be 1 or 2");
        let mut f = Self::default();
        f.components[j - 1] = ScalarSeries::basis(z);
        f
    }

    /// `grad V` of a scalar potential.
    pub fn gradient_of(potential: &ScalarSeries) -> Self {
        let mut g = Self::default();
        for w in &potential.waves {
            for a in 0..2 {
                let c = TWO_PI * w.k[a] as f64 * w.amplitude;
                if c == 0.0 {
                    continue;
                }
                let (amplitude, trig) = match w.trig {
                    Trig::Cos => (-c, Trig::Sin),
                    Trig::Sin => (c, Trig::Cos),
                };
                g.components[a].waves.push(Wave {
                    amplitude,
                    k: w.k,
                    trig,
                });
            }
        }
        g
    }

    pub fn value(&self, u: [f64; 2]) -> [f64; 2] {
        [self.components[0].value(u), self.components[1].value(u)]
    }

    pub fn divergence(&self, u: [f64; 2]) -> f64 {
        self.components[0].partial(u, 0) + self.components[1].partial(u, 1)
    }

    /// Two-dimensional curl `-d2 G1 + d1 G2`.
    pub fn curl(&self, u: [f64; 2]) -> f64 {
        -self.components[0].partial(u, 1) + self.components[1].partial(u, 0)
    }

    /// Upper bound on `max_i sup |G_i|`.
    pub fn sup_bound(&self) -> f64 {
        self.components[0].sup_bound().max(self.components[1].sup_bound())
    }

    pub fn max_wavenumber(&self) -> f64 {
        self.components[0]
            .max_wavenumber()
            .max(self.components[1].max_wavenumber())
    }

    pub fn is_zero(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.constant == 0.0 && c.waves.iter().all(|w| w.amplitude == 0.0))
    }
}

/// A scalar function that can be sampled on the torus.
pub trait ScalarFunction: Sync {
    fn eval(&self, u: [f64; 2]) -> f64;
}

impl ScalarFunction for ScalarSeries {
    fn eval(&self, u: [f64; 2]) -> f64 {
        self.value(u)
    }
}

impl<F: Fn([f64; 2]) -> f64 + Sync> ScalarFunction for F {
    fn eval(&self, u: [f64; 2]) -> f64 {
        self(u)
    }
}

/// A vector field that can be integrated along lattice segments.
pub trait VectorFunction: Sync {
    fn eval(&self, u: [f64; 2]) -> [f64; 2];

    /// Largest spatial frequency `|k|` present; sets the number of
    /// quadrature panels used for line integrals.
    fn max_wavenumber(&self) -> f64 {
        0.0
    }
}

impl VectorFunction for FourierField {
    fn eval(&self, u: [f64; 2]) -> [f64; 2] {
        self.value(u)
    }

    fn max_wavenumber(&self) -> f64 {
        FourierField::max_wavenumber(self)
    }
}

/// A closure-backed vector field with a declared frequency bound.
pub struct FnField<F> {
    pub f: F,
    pub wavenumber: f64,
}

impl<F: Fn([f64; 2]) -> [f64; 2] + Sync> VectorFunction for FnField<F> {
    fn eval(&self, u: [f64; 2]) -> [f64; 2] {
        (self.f)(u)
    }

    fn max_wavenumber(&self) -> f64 {
        self.wavenumber
    }
}

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Largest phase change `2 pi |k| h` allowed inside one quadrature panel.
const MAX_PANEL_PHASE: f64 = 0.5;

/// Line integral of `G . dl` along the straight segment `a -> b`, by
/// composite 4-point Gauss-Legendre quadrature.
pub fn line_integral<G: VectorFunction + ?Sized>(g: &G, a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let panels = ((TWO_PI * g.max_wavenumber() * len) / MAX_PANEL_PHASE).ceil().max(1.0) as usize;
    let mut acc = 0.0;
    for p in 0..panels {
        let s0 = p as f64 / panels as f64;
        let half = 0.5 / panels as f64;
        let mid = s0 + half;
        for (x, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
            let s = mid + half * x;
            let v = g.eval([a[0] + s * d[0], a[1] + s * d[1]]);
            acc += w * half * (v[0] * d[0] + v[1] * d[1]);
        }
    }
    acc
}
