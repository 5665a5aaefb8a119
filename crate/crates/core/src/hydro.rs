//! Transport coefficients and continuum reference solutions.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::continuum::{FourierField, ScalarFunction, ScalarSeries};
use crate::error::{Error, Result};
use crate::spectral::{derivative_frequency, frequency, Fft2};

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

/// Coefficients of the hydrodynamic equations at density `rho`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub rho: f64,
    pub a: f64,
    pub a_prime: f64,
    /// `[[0, -a'], [a', 0]]`.
    pub antisymmetric: [[f64; 2]; 2],
    /// Mobility, `rho (1 - rho) I`.
    pub mobility: [[f64; 2]; 2],
    pub free_energy: f64,
    /// `None` at the endpoints, where the free energy is not twice differentiable.
    pub free_energy_second: Option<f64>,
    /// Max-norm of `I - sigma f''`.
    pub einstein_gap: Option<f64>,
}

/// `a(rho) = 2 alpha rho^2 (1 - rho)^2`.
pub fn circulation_coefficient(rho: f64, alpha: f64) -> f64 {
    let s = rho * (1.0 - rho);
    2.0 * alpha * s * s
}

pub fn free_energy_second(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "f'' requires rho in (0, 1), got {rho}"
        )));
    }
    Ok(1.0 / (rho * (1.0 - rho)))
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

pub fn coefficients(rho: f64, alpha: f64) -> Result<Coefficients> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("rho must be in [0, 1], got {rho}")));
    }
    let s = rho * (1.0 - rho);
    let a_prime = 4.0 * alpha * s * (1.0 - 2.0 * rho);
    let f2 = free_energy_second(rho).ok();
    Ok(Coefficients {
        rho,
        a: circulation_coefficient(rho, alpha),
        a_prime,
        antisymmetric: [[0.0, -a_prime], [a_prime, 0.0]],
        mobility: [[s, 0.0], [0.0, s]],
        free_energy: xlogx(rho) + xlogx(1.0 - rho),
        free_energy_second: f2,
        einstein_gap: f2.map(|f2| {
            // the diffusion matrix of this model is the identity
            let d = [[1.0, 0.0], [0.0, 1.0]];
            let sf = [[s * f2, 0.0], [0.0, s * f2]];
            let mut gap = 0.0f64;
            for i in 0..2 {
                for j in 0..2 {
                    gap = gap.max((d[i][j] - sf[i][j]).abs());
                }
            }
            gap
        }),
    })
}

/// Density on an `m x m` grid of the unit torus, row-major, at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub m: usize,
    pub t: f64,
    pub values: Vec<f64>,
}

impl DensityField {
    pub fn from_fn<F: ScalarFunction + ?Sized>(m: usize, t: f64, f: &F) -> Self {
        let h = 1.0 / m as f64;
        let mut values = Vec::with_capacity(m * m);
        for j in 0..m {
            for i in 0..m {
                values.push(f.eval([i as f64 * h, j as f64 * h]));
            }
        }
        Self { m, t, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.m + i]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Grid quadrature of `int f rho`.
    pub fn pair<F: ScalarFunction + ?Sized>(&self, f: &F) -> f64 {
        let h = 1.0 / self.m as f64;
        let mut s = 0.0;
        for j in 0..self.m {
            for i in 0..self.m {
                s += self.values[j * self.m + i] * f.eval([i as f64 * h, j as f64 * h]);
            }
        }
        s * h * h
    }

    pub fn max_abs_diff(&self, other: &DensityField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn wavenumber_sq(k1: usize, k2: usize, m: usize) -> f64 {
    let a = frequency(k1, m) as f64;
    let b = frequency(k2, m) as f64;
    a * a + b * b
}

/// Heat flow of a trigonometric initial profile, evaluated on the grid.
pub fn solve_heat(initial: &ScalarSeries, t: f64, m: usize) -> DensityField {
    DensityField::from_fn(m, t, &initial.heat_evolved(t))
}

/// Spectral heat flow of grid data: each Fourier mode decays by `exp(-4 pi^2 |z|^2 t)`.
pub fn solve_heat_grid(initial: &DensityField, t: f64) -> DensityField {
    let m = initial.m;
    let fft = Fft2::new(m);
    let mut hat = fft.forward_real(&initial.values);
    for k2 in 0..m {
        for k1 in 0..m {
            hat[k2 * m + k1] *= (-FOUR_PI_SQ * wavenumber_sq(k1, k2, m) * t).exp();
        }
    }
    DensityField {
        m,
        t: initial.t + t,
        values: fft.inverse_real(hat),
    }
}

/// Second-order five-point Laplacian with classical RK4 in time.
pub fn solve_heat_fd(initial: &DensityField, t: f64) -> DensityField {
    let m = initial.m;
    let m2 = (m * m) as f64;
    let steps = ((t * m2) / 0.2).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let lap = |u: &[f64], out: &mut [f64]| {
        for j in 0..m {
            let jp = (j + 1) % m;
            let jm = (j + m - 1) % m;
            for i in 0..m {
                let ip = (i + 1) % m;
                let im = (i + m - 1) % m;
                out[j * m + i] =
                    m2 * (u[j * m + ip] + u[j * m + im] + u[jp * m + i] + u[jm * m + i] - 4.0 * u[j * m + i]);
            }
        }
    };
    let mut u = initial.values.clone();
    let len = u.len();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    let mut tmp = vec![0.0; len];
    for _ in 0..steps {
        lap(&u, &mut k1);
        for x in 0..len {
            tmp[x] = u[x] + 0.5 * dt * k1[x];
        }
        lap(&tmp, &mut k2);
        for x in 0..len {
            tmp[x] = u[x] + 0.5 * dt * k2[x];
        }
        lap(&tmp, &mut k3);
        for x in 0..len {
            tmp[x] = u[x] + dt * k3[x];
        }
        lap(&tmp, &mut k4);
        for x in 0..len {
            u[x] += dt / 6.0 * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x]);
        }
    }
    DensityField {
        m,
        t: initial.t + t,
        values: u,
    }
}

/// Default drift-diffusion step `0.25 / M^2`.
pub fn default_step(m: usize) -> f64 {
    0.25 / (m * m) as f64
}

/// Pseudo-spectral solver for `d rho = div(grad rho - 2 rho (1 - rho) H)`.
///
/// Diffusion is integrated exactly in Fourier space and the drift is
/// treated explicitly (first-order exponential time differencing), so the
/// fixed points are exactly the discrete stationary states and `H = 0`
/// reduces to the spectral heat flow.
pub struct DriftDiffusion {
    m: usize,
    fft: Fft2,
    field: [Vec<f64>; 2],
    field_bound: f64,
}

impl DriftDiffusion {
    pub fn new(m: usize, h: &FourierField) -> Self {
        let sample = |c: usize| {
            let d = DensityField::from_fn(m, 0.0, &h.components[c]);
            d.values
        };
        Self {
            m,
            fft: Fft2::new(m),
            field: [sample(0), sample(1)],
            field_bound: h.sup_bound(),
        }
    }

    /// `-div(2 rho (1 - rho) H)` in Fourier space.
    fn drift_hat(&self, rho: &[f64]) -> Vec<Complex64> {
        let m = self.m;
        let mut out = vec![Complex64::default(); m * m];
        for c in 0..2 {
            let flux: Vec<f64> = rho
                .iter()
                .zip(&self.field[c])
                .map(|(r, h)| 2.0 * r * (1.0 - r) * h)
                .collect();
            let hat = self.fft.forward_real(&flux);
            for k2 in 0..m {
                for k1 in 0..m {
                    let kc = if c == 0 { k1 } else { k2 };
                    let ik = Complex64::new(0.0, 2.0 * PI * derivative_frequency(kc, m));
                    out[k2 * m + k1] -= ik * hat[k2 * m + k1];
                }
            }
        }
        out
    }

    /// Largest stable explicit step for the drift.
    pub fn step_limit(&self) -> f64 {
        if self.field_bound == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (2.0 * self.field_bound * PI * self.m as f64)
        }
    }

    /// Advance by `t` with steps no longer than `max_dt`.
    pub fn solve(&self, initial: &DensityField, t: f64, max_dt: f64) -> Result<DensityField> {
        Ok(self.solve_recording(initial, t, max_dt, 1)?.pop().expect("final state"))
    }

    /// Solve on `[0, t]` and return the states at `t * i / intervals`, `i = 0..=intervals`.
    pub fn solve_recording(
        &self,
        initial: &DensityField,
        t: f64,
        max_dt: f64,
        intervals: usize,
    ) -> Result<Vec<DensityField>> {
        let m = self.m;
        if initial.m != m {
            return Err(Error::InvalidParameter("grid size mismatch".into()));
        }
        if !(max_dt > 0.0) || intervals == 0 {
            return Err(Error::InvalidParameter(
                "step and interval count must be positive".into(),
            ));
        }
        let per = ((t / intervals as f64) / max_dt).ceil().max(1.0) as usize;
        let dt = t / (per * intervals) as f64;
        if dt > self.step_limit() {
            return Err(Error::StepRejected {
                dt,
                limit: self.step_limit(),
            });
        }
        let mut decay = vec![0.0; m * m];
        let mut phi = vec![0.0; m * m];
        for k2 in 0..m {
            for k1 in 0..m {
                let l = -FOUR_PI_SQ * wavenumber_sq(k1, k2, m);
                let z = l * dt;
                decay[k2 * m + k1] = z.exp();
                phi[k2 * m + k1] = if z == 0.0 { dt } else { z.exp_m1() / l };
            }
        }
        let mut rho = initial.values.clone();
        let mut hat = self.fft.forward_real(&rho);
        let mut out = vec![initial.clone()];
        for i in 1..=intervals {
            for _ in 0..per {
                let nl = self.drift_hat(&rho);
                for x in 0..m * m {
                    hat[x] = hat[x] * decay[x] + nl[x] * phi[x];
                }
                rho = self.fft.inverse_real(hat.clone());
            }
            out.push(DensityField {
                m,
                t: initial.t + t * i as f64 / intervals as f64,
                values: rho.clone(),
            });
        }
        Ok(out)
    }
}

/// `solve_drift_diffusion` with the default step.
pub fn solve_drift_diffusion(initial: &DensityField, h: &FourierField, t: f64) -> Result<DensityField> {
    DriftDiffusion::new(initial.m, h).solve(initial, t, default_step(initial.m))
}

/// Both evaluations of a predicted current pairing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedPairing {
    /// `int_0^t int rho div G + a(rho) curl G + 2 sigma H.G`.
    pub weak: f64,
    /// `int_0^t int J(rho) . G` with `J = -grad rho - A grad rho + 2 sigma H`.
    pub strong: f64,
    /// Contribution of the `a(rho)` term alone.
    pub circulation: f64,
}

pub struct CurrentPrediction<'a> {
    pub initial: &'a ScalarSeries,
    pub alpha: f64,
    pub field: Option<&'a FourierField>,
    /// Grid side.
    pub m: usize,
    /// Simpson intervals in time (rounded up to even).
    pub time_intervals: usize,
}

impl<'a> CurrentPrediction<'a> {
    pub fn new(initial: &'a ScalarSeries, alpha: f64, m: usize) -> Self {
        Self {
            initial,
            alpha,
            field: None,
            m,
            time_intervals: 200,
        }
    }

    pub fn with_field(mut self, h: &'a FourierField) -> Self {
        self.field = Some(h);
        self
    }

    fn densities(&self, t: f64, intervals: usize) -> Result<Vec<DensityField>> {
        match self.field {
            Some(h) if !h.is_zero() => {
                let init = DensityField::from_fn(self.m, 0.0, self.initial);
                DriftDiffusion::new(self.m, h).solve_recording(&init, t, default_step(self.m), intervals)
            }
            _ => Ok((0..=intervals)
                .map(|i| solve_heat(self.initial, t * i as f64 / intervals as f64, self.m))
                .collect()),
        }
    }

    /// Predicted pairings for each test field at time `t`.
    pub fn pairings(&self, fields: &[FourierField], t: f64) -> Result<Vec<PredictedPairing>> {
        let m = self.m;
        let intervals = self.time_intervals.max(2).div_ceil(2) * 2;
        let rhos = self.densities(t, intervals)?;
        let fft = Fft2::new(m);
        let grid = |f: &(dyn Fn([f64; 2]) -> f64 + Sync)| DensityField::from_fn(m, 0.0, &|u: [f64; 2]| f(u)).values;
        let h_grid = self
            .field
            .map(|h| [grid(&|u| h.components[0].value(u)), grid(&|u| h.components[1].value(u))]);
        let g_data: Vec<_> = fields
            .iter()
            .map(|g| {
                (
                    grid(&|u| g.components[0].value(u)),
                    grid(&|u| g.components[1].value(u)),
                    grid(&|u| g.divergence(u)),
                    grid(&|u| g.curl(u)),
                )
            })
            .collect();
        let cell = 1.0 / (m * m) as f64;
        let mut acc = vec![[0.0f64; 3]; fields.len()];
        for (step, rho) in rhos.iter().enumerate() {
            let w = if step == 0 || step == intervals {
                1.0
            } else if step % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let a: Vec<f64> = rho
                .values
                .iter()
                .map(|&r| circulation_coefficient(r, self.alpha))
                .collect();
            let (drho, da) = (spectral_gradient(&fft, &rho.values), spectral_gradient(&fft, &a));
            for (gi, (g1, g2, div, curl)) in g_data.iter().enumerate() {
                let mut weak = 0.0;
                let mut strong = 0.0;
                let mut circ = 0.0;
                for x in 0..m * m {
                    let r = rho.values[x];
                    let mut drift = 0.0;
                    if let Some(h) = &h_grid {
                        drift = 2.0 * r * (1.0 - r) * (h[0][x] * g1[x] + h[1][x] * g2[x]);
                    }
                    weak += r * div[x] + a[x] * curl[x] + drift;
                    circ += a[x] * curl[x];
                    // J = -grad rho - (-d2 a, d1 a) + 2 sigma H
                    let j1 = -drho[0][x] + da[1][x];
                    let j2 = -drho[1][x] - da[0][x];
                    strong += j1 * g1[x] + j2 * g2[x] + drift;
                }
                acc[gi][0] += w * weak * cell;
                acc[gi][1] += w * strong * cell;
                acc[gi][2] += w * circ * cell;
            }
        }
        let ds = t / intervals as f64;
        Ok(acc
            .into_iter()
            .map(|[w, s, c]| PredictedPairing {
                weak: w * ds / 3.0,
                strong: s * ds / 3.0,
                circulation: c * ds / 3.0,
            })
            .collect())
    }
}

/// Spectral gradient of grid data with the Nyquist bin dropped.
pub fn spectral_gradient(fft: &Fft2, values: &[f64]) -> [Vec<f64>; 2] {
    let m = fft.side();
    let hat = fft.forward_real(values);
    let mut out = [Vec::new(), Vec::new()];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut d = hat.clone();
        for k2 in 0..m {
            for k1 in 0..m {
                let kc = if c == 0 { k1 } else { k2 };
                d[k2 * m + k1] *= Complex64::new(0.0, 2.0 * PI * derivative_frequency(kc, m));
            }
        }
        *slot = fft.inverse_real(d);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::Trig;

    fn profile() -> ScalarSeries {
        ScalarSeries::constant(0.5).with_wave(0.25, [1, 0], Trig::Sin)
    }

    #[test]
    fn coefficient_examples() {
        let c = coefficients(0.0, 0.5).unwrap();
        assert_eq!((c.a, c.a_prime, c.free_energy), (0.0, 0.0, 0.0));
        assert_eq!(c.mobility, [[0.0, 0.0], [0.0, 0.0]]);
        assert_eq!(c.free_energy_second, None);
        let c = coefficients(0.5, 0.5).unwrap();
        assert_eq!(c.a, 0.0625);
        assert_eq!(c.a_prime, 0.0);
        assert!(coefficients(1.2, 0.5).is_err());
        assert!(free_energy_second(1.0).is_err());
        for k in 1..100 {
            let rho = k as f64 / 100.0;
            let c = coefficients(rho, 0.3).unwrap();
            assert!(c.einstein_gap.unwrap() <= 4.0 * f64::EPSILON);
            assert!((c.a - circulation_coefficient(1.0 - rho, 0.3)).abs() < 1e-16);
            assert_eq!(c.antisymmetric[0][1], -c.antisymmetric[1][0]);
        }
    }

    #[test]
    fn a_prime_is_derivative() {
        for k in 1..20 {
            let r = k as f64 / 20.0;
            let h = 1e-6;
            let fd = (circulation_coefficient(r + h, 0.7) - circulation_coefficient(r - h, 0.7)) / (2.0 * h);
            assert!((fd - coefficients(r, 0.7).unwrap().a_prime).abs() < 1e-8);
        }
    }

    #[test]
    fn heat_constant_and_single_mode() {
        let c = solve_heat(&ScalarSeries::constant(0.3), 0.7, 16);
        assert!(c.values.iter().all(|&v| v == 0.3));
        let init = ScalarSeries::constant(0.5).with_wave(0.25 * 2f64.sqrt(), [1, 0], Trig::Cos);
        let t = 0.05;
        let grid = solve_heat_grid(&DensityField::from_fn(32, 0.0, &init), t);
        let decay = (-4.0 * PI * PI * t).exp();
        let exact = |u: [f64; 2]| 0.5 + 0.25 * decay * 2f64.sqrt() * (2.0 * PI * u[0]).cos();
        assert!(grid.max_abs_diff(&DensityField::from_fn(32, t, &exact)) < 1e-14);
        assert!(solve_heat(&init, t, 32).max_abs_diff(&grid) < 1e-14);
        assert!((grid.mean() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn fd_converges_at_second_order() {
        let init = profile().with_wave(0.1, [1, 2], Trig::Cos);
        let t = 0.01;
        let mut errs = Vec::new();
        let ms = [8usize, 16, 32, 64];
        for &m in &ms {
            let fd = solve_heat_fd(&DensityField::from_fn(m, 0.0, &init), t);
            errs.push(fd.max_abs_diff(&solve_heat(&init, t, m)));
        }
        let xs: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let slope = crate::stats::fit_slope(&xs, &ys);
        assert!((-2.3..=-1.7).contains(&slope), "slope {slope}, errors {errs:?}");
    }

    #[test]
    fn drift_diffusion_without_field_is_heat() {
        let m = 32;
        let init = DensityField::from_fn(m, 0.0, &profile());
        let dd = solve_drift_diffusion(&init, &FourierField::default(), 0.05).unwrap();
        assert!(dd.max_abs_diff(&solve_heat(&profile(), 0.05, m)) < 1e-10);
    }

    #[test]
    fn drift_diffusion_uniform_state_with_constant_field() {
        let init = DensityField::from_fn(16, 0.0, &ScalarSeries::constant(0.3));
        let out = solve_drift_diffusion(&init, &FourierField::constant([0.5, -0.2]), 0.1).unwrap();
        assert!(out.values.iter().all(|v| (v - 0.3).abs() < 1e-14));
    }

    #[test]
    fn drift_diffusion_conserves_mass_and_rejects_large_steps() {
        let m = 24;
        let init = DensityField::from_fn(m, 0.0, &profile());
        let h = FourierField::new(
            ScalarSeries::default().with_wave(0.8, [0, 1], Trig::Cos),
            ScalarSeries::constant(0.3),
        );
        let out = solve_drift_diffusion(&init, &h, 0.05).unwrap();
        assert!((out.mean() - init.mean()).abs() < 1e-12);
        let dd = DriftDiffusion::new(m, &h);
        assert!(matches!(dd.solve(&init, 0.05, 0.01), Err(Error::StepRejected { .. })));
    }

    #[test]
    fn drift_diffusion_reaches_logit_profile() {
        let m = 32;
        let v = ScalarSeries::default().with_wave(0.1, [1, 1], Trig::Sin);
        let h = FourierField::gradient_of(&v);
        let init = DensityField::from_fn(m, 0.0, &ScalarSeries::constant(0.4));
        let out = solve_drift_diffusion(&init, &h, 1.0).unwrap();
        let vg = DensityField::from_fn(m, 0.0, &v);
        let resid: Vec<f64> = out
            .values
            .iter()
            .zip(&vg.values)
            .map(|(r, v)| (r / (1.0 - r)).ln() - 2.0 * v)
            .collect();
        let spread = resid.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - resid.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(spread < 1e-6, "spread {spread}");
    }

    #[test]
    fn predicted_pairing_examples() {
        let harmonic = FourierField::constant([1.0, -0.5]);
        let p = CurrentPrediction::new(&profile(), 0.5, 32)
            .pairings(&[harmonic], 0.05)
            .unwrap()[0];
        assert!(p.weak.abs() < 1e-14 && p.strong.abs() < 1e-12);
        let g = FourierField::new(ScalarSeries::basis([1, 2]), ScalarSeries::basis([-2, 1]));
        let flat = ScalarSeries::constant(0.4);
        let p = CurrentPrediction::new(&flat, 0.5, 32).pairings(&[g], 0.05).unwrap()[0];
        assert!(p.weak.abs() < 1e-14 && p.strong.abs() < 1e-14);
    }

    #[test]
    fn weak_and_strong_routes_agree() {
        let init = profile().with_wave(0.1, [2, -1], Trig::Cos);
        let fields = [
            FourierField::new(ScalarSeries::basis([1, 1]), ScalarSeries::basis([0, -2])),
            FourierField::new(
                ScalarSeries::default(),
                ScalarSeries::default().with_wave(1.0, [1, 0], Trig::Sin),
            ),
            FourierField::new(ScalarSeries::basis([-3, 2]), ScalarSeries::basis([1, 0])),
        ];
        for alpha in [0.0, 0.5, -0.8] {
            for p in CurrentPrediction::new(&init, alpha, 32)
                .pairings(&fields, 0.03)
                .unwrap()
            {
                assert!((p.weak - p.strong).abs() < 1e-8, "{p:?}");
            }
            let h = FourierField::new(ScalarSeries::basis([0, 1]).scaled(0.3), ScalarSeries::constant(0.2));
            for p in CurrentPrediction::new(&init, alpha, 32)
                .with_field(&h)
                .pairings(&fields, 0.03)
                .unwrap()
            {
                assert!((p.weak - p.strong).abs() < 1e-8, "{p:?}");
            }
        }
    }

    #[test]
    fn circulation_term_scales_with_alpha() {
        let g = FourierField::new(
            ScalarSeries::default(),
            ScalarSeries::default().with_wave(1.0, [2, 0], Trig::Sin),
        );
        let p = |alpha| {
            CurrentPrediction::new(&profile(), alpha, 32)
                .pairings(std::slice::from_ref(&g), 0.05)
                .unwrap()[0]
        };
        let (a, b, z) = (p(0.5), p(-0.5), p(0.0));
        assert!(a.circulation.abs() > 1e-4);
        assert!((a.circulation + b.circulation).abs() < 1e-15);
        assert!((a.weak - z.weak - a.circulation).abs() < 1e-14);
    }
}
