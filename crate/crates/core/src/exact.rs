//! Finite, exact verification of the algebraic identities of the model on
//! small tori and local windows.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fields::{divergence_all, hodge_decompose, DiscreteVectorField};
use crate::lattice::{DirectedEdge, Torus};
use crate::model::{face_g, rate_with, Configuration, FaceWeights};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub instances: u64,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub runtime_secs: f64,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, instances: u64, max_violation: f64, tolerance: f64, start: Instant) -> Self {
        Self {
            name: name.into(),
            instances,
            max_violation,
            tolerance,
            passed: max_violation <= tolerance,
            runtime_secs: start.elapsed().as_secs_f64(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{:<28} {:<4} instances={:<8} max_violation={:.3e} tol={:.1e} time={:.3}s",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.instances,
            self.max_violation,
            self.tolerance,
            self.runtime_secs
        )
    }
}

/// Deliberate corruption of the rates used to show that the checks can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    #[default]
    None,
    /// The anti-diagonal face pattern gets weight `2 alpha` instead of `alpha`.
    DoubleAntiDiagonal,
}

impl Mutation {
    pub fn weights<T: Num + Clone>(self, alpha: T) -> FaceWeights<T> {
        match self {
            Mutation::None => FaceWeights::uniform(alpha),
            Mutation::DoubleAntiDiagonal => FaceWeights {
                main: alpha.clone(),
                anti: alpha.clone() + alpha,
            },
        }
    }
}

fn abs_f64(r: &Rational64) -> f64 {
    r.abs().to_f64().unwrap_or(f64::INFINITY)
}

fn check_small(n: usize) -> Result<()> {
    if !(3..=4).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "exhaustive checks need n in {{3, 4}}, got {n}"
        )));
    }
    Ok(())
}

/// Run `f` over all `2^(n^2)` configurations in chunks, reducing the max.
fn enumerate_max<F>(n: usize, exec: Execution, f: F) -> f64
where
    F: Fn(&[u8]) -> f64 + Sync + Send,
{
    let total = 1u64 << (n * n);
    let chunks = 64u64.min(total);
    let per = total / chunks;
    exec.map_indexed(chunks as usize, |c| {
        let mut worst = 0.0f64;
        let mut occ = vec![0u8; n * n];
        for bits in c as u64 * per..(c as u64 + 1) * per {
            for (k, o) in occ.iter_mut().enumerate() {
                *o = ((bits >> k) & 1) as u8;
            }
            worst = worst.max(f(&occ));
        }
        worst
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// `sum c_{x,y}(eta) - sum c_{y,x}(eta^{x,y})` over all directed edges.
pub fn invariance_defect<T: Num + Clone>(torus: &Torus, occ: &[u8], w: &FaceWeights<T>) -> T {
    let mut swapped = occ.to_vec();
    let mut lhs = T::zero();
    let mut rhs = T::zero();
    for k in 0..torus.num_directed_edges() {
        lhs = lhs + rate_with(torus, occ, k, w);
        let s = torus.stencil(k);
        let (x, y) = (s.tail as usize, s.head as usize);
        swapped.swap(x, y);
        rhs = rhs + rate_with(torus, &swapped, torus.reverse_index(k), w);
        swapped.swap(x, y);
    }
    lhs - rhs
}

/// Balance identity behind invariance of the Bernoulli product measures,
/// for every configuration on the `n x n` torus.
pub fn verify_invariance(n: usize, alpha: Rational64, mutation: Mutation, exec: Execution) -> Result<CheckReport> {
    check_small(n)?;
    let start = Instant::now();
    let torus = Torus::new(n)?;
    let w = mutation.weights(alpha);
    let worst = enumerate_max(n, exec, |occ| abs_f64(&invariance_defect(&torus, occ, &w)));
    Ok(CheckReport::new(
        format!("invariance[n={n},alpha={alpha}]"),
        1 << (n * n),
        worst,
        0.0,
        start,
    ))
}

fn swap4(c: [u8; 4], a: usize, b: usize) -> [u8; 4] {
    let mut out = c;
    out.swap(a, b);
    out
}

/// Both sides of the per-face identity for corner occupations `c` listed
/// anticlockwise from the anchor: sums of `eta(x)[g(eta) + g(eta^{x,y})]`
/// along the anticlockwise and the clockwise traversal.
pub fn face_identity_sides<T: Num + Clone>(c: [u8; 4], w: &FaceWeights<T>) -> (T, T) {
    let g0 = w.g(c);
    let term = |x: usize, y: usize| -> T {
        if c[x] == 0 {
            T::zero()
        } else {
            g0.clone() + w.g(swap4(c, x, y))
        }
    };
    let mut anti = T::zero();
    let mut clock = T::zero();
    for i in 0..4 {
        let j = (i + 1) % 4;
        anti = anti + term(i, j);
        clock = clock + term(j, i);
    }
    (anti, clock)
}

pub fn verify_face_identity(alpha: Rational64, mutation: Mutation) -> CheckReport {
    let start = Instant::now();
    let w = mutation.weights(alpha);
    let mut worst = 0.0f64;
    for p in 0..16u8 {
        let c = [p & 1, (p >> 1) & 1, (p >> 2) & 1, (p >> 3) & 1];
        let (a, b) = face_identity_sides(c, &w);
        worst = worst.max(abs_f64(&(a - b)));
        // the diagonal patterns each carry two edges labelled alpha per side
        if c == [1, 0, 1, 0] || c == [0, 1, 0, 1] {
            worst = worst.max(abs_f64(&(a - alpha * 2)));
        }
    }
    CheckReport::new(format!("face-identity[alpha={alpha}]"), 16, worst, 0.0, start)
}

/// Violations of the current structure for one configuration: the
/// decomposition `j = grad(eta) + delta g` with the unperturbed `g`,
/// zero divergence of the circulation part, and zero axis sums of `j`.
fn current_structure_violation(
    torus: &Torus,
    occ: &[u8],
    rates: &FaceWeights<Rational64>,
    reference: &FaceWeights<Rational64>,
) -> f64 {
    let n2 = torus.num_vertices();
    let mut worst = 0.0f64;
    let mut div = vec![Rational64::zero(); n2];
    let mut axis_sum = [Rational64::zero(), Rational64::zero()];
    for k in 0..torus.num_directed_edges() {
        let s = torus.stencil(k);
        let j = rate_with(torus, occ, k, rates) - rate_with(torus, occ, torus.reverse_index(k), rates);
        let grad = Rational64::from_integer(occ[s.tail as usize] as i64 - occ[s.head as usize] as i64);
        let circ =
            face_g(torus, occ, s.face_plus as usize, reference) - face_g(torus, occ, s.face_minus as usize, reference);
        worst = worst.max(abs_f64(&(j - grad - circ)));
        div[s.tail as usize] += circ;
        if k & 3 < 2 {
            axis_sum[k & 3] += j;
        }
    }
    for d in div.iter().chain(axis_sum.iter()) {
        worst = worst.max(abs_f64(d));
    }
    worst
}

/// Exhaustive current-structure check, plus a Hodge decomposition of every
/// `j_eta` whose harmonic coefficients must vanish to `1e-10`.
pub fn verify_current_structure(
    n: usize,
    alpha: Rational64,
    mutation: Mutation,
    exec: Execution,
) -> Result<CheckReport> {
    check_small(n)?;
    let start = Instant::now();
    let torus = Torus::new(n)?;
    let rates = mutation.weights(alpha);
    let reference = FaceWeights::uniform(alpha);
    let alpha_f = alpha.to_f64().unwrap_or(f64::NAN);
    let wf = mutation.weights(alpha_f);
    let worst = enumerate_max(n, exec, |occ| {
        let exact = current_structure_violation(&torus, occ, &rates, &reference);
        let j = DiscreteVectorField::from_fn(&torus, |e| {
            let k = torus.directed_index(e);
            rate_with(&torus, occ, k, &wf) - rate_with(&torus, occ, torus.reverse_index(k), &wf)
        });
        let harmonic = match hodge_decompose(&torus, &j) {
            Ok(h) => h.harmonic_coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs())),
            Err(_) => f64::INFINITY,
        };
        // exact identities must hold exactly; the floating harmonic part is
        // measured against its own tolerance
        exact.max(if harmonic <= 1e-10 { 0.0 } else { harmonic })
    });
    Ok(CheckReport::new(
        format!("current-structure[n={n},alpha={alpha}]"),
        1 << (n * n),
        worst,
        0.0,
        start,
    ))
}

/// Divergence of the circulation part for one configuration, as floats;
/// used by tests as an independent path through `divergence_all`.
pub fn circulation_part(torus: &Torus, config: &Configuration, alpha: f64) -> DiscreteVectorField {
    let w = FaceWeights::uniform(alpha);
    let occ = config.occupations();
    DiscreteVectorField::from_fn(torus, |e: &DirectedEdge| {
        let s = torus.stencil(torus.directed_index(e));
        face_g(torus, occ, s.face_plus as usize, &w) - face_g(torus, occ, s.face_minus as usize, &w)
    })
}

pub fn max_divergence(torus: &Torus, phi: &DiscreteVectorField) -> f64 {
    divergence_all(torus, phi).iter().fold(0.0f64, |m, d| m.max(d.abs()))
}

fn big(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// `E_{nu_rho}[f]` for a function of `window` independent sites, by
/// enumerating all `2^window` patterns.
pub fn grandcanonical_expectation<F>(window: usize, rho: &BigRational, f: F) -> Result<BigRational>
where
    F: Fn(&[u8]) -> BigRational,
{
    if window > 20 {
        return Err(Error::InvalidParameter(format!(
            "window of {window} sites is too large to enumerate"
        )));
    }
    if rho.is_negative() || rho > &BigRational::one() {
        return Err(Error::InvalidParameter(format!("rho must be in [0, 1], got {rho}")));
    }
    let q = BigRational::one() - rho;
    let mut acc = BigRational::zero();
    let mut occ = vec![0u8; window];
    for bits in 0..1u64 << window {
        for (k, o) in occ.iter_mut().enumerate() {
            *o = ((bits >> k) & 1) as u8;
        }
        let ones = bits.count_ones() as i32;
        let weight =
            num_traits::pow(rho.clone(), ones as usize) * num_traits::pow(q.clone(), (window as i32 - ones) as usize);
        acc += weight * f(&occ);
    }
    Ok(acc)
}

/// Window of a vertical edge `x -> y = x + e2` and its two flanking faces:
/// sites `[x - e1, x, x + e1, y - e1, y, y + e1]`.
fn vertical_edge_window_terms(occ: &[u8], w: &FaceWeights<BigRational>) -> (BigRational, BigRational) {
    let (xm, x, xp, ym, y, yp) = (occ[0], occ[1], occ[2], occ[3], occ[4], occ[5]);
    let f_plus = w.g([xm, x, y, ym]);
    let f_minus = w.g([x, xp, yp, y]);
    let grad = BigRational::from_integer(BigInt::from(x as i64 - y as i64));
    (grad.clone() * grad.clone(), grad * (f_plus - f_minus))
}

/// Closed-form coefficients against exact Bernoulli expectations at
/// `rho = 1/10, ..., 9/10`, plus the Einstein relation in exact arithmetic.
pub fn verify_coefficients(alpha: Rational64, mutation: Mutation) -> Result<CheckReport> {
    let start = Instant::now();
    let alpha_b = big(alpha);
    let w = mutation.weights(alpha_b.clone());
    let mut worst = BigRational::zero();
    let mut instances = 0;
    let two = BigRational::from_integer(BigInt::from(2));
    for k in 1..10 {
        let rho = BigRational::new(BigInt::from(k), BigInt::from(10));
        let s = rho.clone() * (BigRational::one() - rho.clone());
        let eg = grandcanonical_expectation(4, &rho, |c| w.g([c[0], c[1], c[2], c[3]]))?;
        let closed = two.clone() * alpha_b.clone() * s.clone() * s.clone();
        let sq = grandcanonical_expectation(6, &rho, |c| vertical_edge_window_terms(c, &w).0)?;
        let mixed = grandcanonical_expectation(6, &rho, |c| vertical_edge_window_terms(c, &w).1)?;
        // D = I and sigma f'' = rho(1-rho) * 1/(rho(1-rho))
        let einstein = BigRational::one() - s.clone() * s.recip();
        for v in [eg - closed, sq - two.clone() * s, mixed, einstein] {
            if v.abs() > worst {
                worst = v.abs();
            }
        }
        instances += 4;
    }
    Ok(CheckReport::new(
        format!("coefficients[alpha={alpha}]"),
        instances,
        worst.to_f64().unwrap_or(f64::INFINITY),
        0.0,
        start,
    ))
}

/// A positive function on configurations used as a density against `nu_rho`.
pub type DensityFn<'a> = &'a (dyn Fn(&Configuration) -> f64 + Sync);

/// Both sides of `-<L sqrt f, sqrt f> = 1/2 sum E[c (grad sqrt f)^2]` on
/// the `n = 3` torus, by enumeration.
pub fn dirichlet_sides(rho: f64, alpha: f64, density: DensityFn, mutation: Mutation) -> Result<(f64, f64)> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("rho must be in (0, 1), got {rho}")));
    }
    let n = 3;
    let torus = Torus::new(n)?;
    let w = mutation.weights(alpha);
    let count = 1usize << (n * n);
    let configs: Vec<Configuration> = (0..count as u64).map(|b| Configuration::from_bits(n, b)).collect();
    let nu: Vec<f64> = configs
        .iter()
        .map(|c| {
            let k = c.particles() as i32;
            rho.powi(k) * (1.0 - rho).powi((n * n) as i32 - k)
        })
        .collect();
    let raw: Vec<f64> = configs.iter().map(density).collect();
    if raw.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("density must be positive".into()));
    }
    let z: f64 = raw.iter().zip(&nu).map(|(f, p)| f * p).sum();
    let root: Vec<f64> = raw.iter().map(|f| (f / z).sqrt()).collect();
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (b, c) in configs.iter().enumerate() {
        let occ = c.occupations();
        for k in 0..torus.num_directed_edges() {
            let r = rate_with(&torus, occ, k, &w);
            if r == 0.0 {
                continue;
            }
            let s = torus.stencil(k);
            let b2 = b ^ (1 << s.tail) ^ (1 << s.head);
            let diff = root[b2] - root[b];
            lhs -= nu[b] * root[b] * r * diff;
            rhs += 0.5 * nu[b] * r * diff * diff;
        }
    }
    Ok((lhs, rhs))
}

/// Site weights for a density that is not a function of the particle number.
fn site_weight(k: usize) -> f64 {
    0.4 * ((k * 7 + 3) as f64).sin()
}

pub fn verify_dirichlet(alpha: f64, mutation: Mutation) -> Result<CheckReport> {
    let start = Instant::now();
    let constant = |_: &Configuration| 1.0;
    let by_number = |c: &Configuration| (0.3 * c.particles() as f64).exp();
    let by_site = |c: &Configuration| {
        let e: f64 = c
            .occupations()
            .iter()
            .enumerate()
            .map(|(k, &o)| o as f64 * site_weight(k))
            .sum();
        e.exp()
    };
    let densities: [DensityFn; 3] = [&constant, &by_number, &by_site];
    let mut worst = 0.0f64;
    let mut instances = 0;
    for rho in [0.5, 0.3] {
        for d in densities {
            let (l, r) = dirichlet_sides(rho, alpha, d, mutation)?;
            worst = worst.max((l - r).abs());
            instances += 1;
        }
    }
    Ok(CheckReport::new(
        format!("dirichlet[alpha={alpha}]"),
        instances,
        worst,
        1e-12,
        start,
    ))
}

/// A configuration and edge with `c_{x,y}(eta) != c_{y,x}(eta^{x,y})`,
/// showing that detailed balance with respect to `nu_rho` fails.
#[derive(Clone, Debug, PartialEq)]
pub struct BalanceWitness {
    pub config: Configuration,
    pub edge: DirectedEdge,
    pub forward: f64,
    pub backward: f64,
}

pub fn detailed_balance_witness(n: usize, alpha: f64) -> Result<Option<BalanceWitness>> {
    check_small(n)?;
    let torus = Torus::new(n)?;
    let w = FaceWeights::uniform(alpha);
    for bits in 0..1u64 << (n * n) {
        let c = Configuration::from_bits(n, bits);
        for k in 0..torus.num_directed_edges() {
            let fwd = rate_with(&torus, c.occupations(), k, &w);
            if fwd == 0.0 {
                continue;
            }
            let e = torus.directed_edge_at(k);
            let sw = c.swapped(&torus, &e);
            let back = rate_with(&torus, sw.occupations(), torus.reverse_index(k), &w);
            if fwd != back {
                return Ok(Some(BalanceWitness {
                    config: c,
                    edge: e,
                    forward: fwd,
                    backward: back,
                }));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    pub exact_n4: bool,
    pub mutation: Mutation,
}

/// The full exact suite with the standard parameter sets.
pub fn run_all(opts: VerifyOptions, exec: Execution) -> Result<Vec<CheckReport>> {
    let mutated = opts.mutation != Mutation::None;
    // at alpha = 0 a mutation of the face weights changes nothing
    let alphas: Vec<Rational64> = [Rational64::new(0, 1), Rational64::new(1, 2), Rational64::new(-3, 4)]
        .into_iter()
        .filter(|a| !(mutated && a.is_zero()))
        .collect();
    let mut out = Vec::new();
    let sizes: &[usize] = if opts.exact_n4 { &[3, 4] } else { &[3] };
    for &n in sizes {
        for &a in &alphas {
            out.push(verify_invariance(n, a, opts.mutation, exec)?);
        }
    }
    for &a in &alphas {
        out.push(verify_face_identity(a, opts.mutation));
    }
    for &n in sizes {
        out.push(verify_current_structure(
            n,
            Rational64::new(7, 10),
            opts.mutation,
            exec,
        )?);
    }
    out.push(verify_coefficients(Rational64::new(1, 2), opts.mutation)?);
    out.push(verify_coefficients(Rational64::new(-3, 4), opts.mutation)?);
    for a in [0.0, 0.5] {
        if mutated && a == 0.0 {
            continue;
        }
        out.push(verify_dirichlet(a, opts.mutation)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn invariance_n3() {
        for a in [r(0, 1), r(1, 2), r(-3, 4)] {
            assert!(
                verify_invariance(3, a, Mutation::None, Execution::Parallel)
                    .unwrap()
                    .passed
            );
        }
        assert!(
            !verify_invariance(3, r(1, 2), Mutation::DoubleAntiDiagonal, Execution::Parallel)
                .unwrap()
                .passed
        );
        assert!(verify_invariance(5, r(1, 2), Mutation::None, Execution::Parallel).is_err());
    }

    #[test]
    fn face_patterns() {
        let w = FaceWeights::uniform(r(1, 2));
        for p in 0..16u8 {
            let c = [p & 1, (p >> 1) & 1, (p >> 2) & 1, (p >> 3) & 1];
            let (a, b) = face_identity_sides(c, &w);
            assert_eq!(a, b);
            let k: u8 = c.iter().sum();
            if k != 2 {
                assert_eq!(a, r(0, 1));
            }
        }
        assert_eq!(face_identity_sides([1, 0, 1, 0], &w), (r(1, 1), r(1, 1)));
        assert_eq!(face_identity_sides([1, 1, 0, 0], &w), (r(1, 2), r(1, 2)));
        let m = Mutation::DoubleAntiDiagonal.weights(r(1, 2));
        assert_eq!(face_identity_sides([1, 1, 0, 0], &m), (r(1, 2), r(1, 1)));
        assert!(verify_face_identity(r(1, 2), Mutation::None).passed);
        assert!(!verify_face_identity(r(1, 2), Mutation::DoubleAntiDiagonal).passed);
    }

    #[test]
    fn current_structure_n3() {
        let rep = verify_current_structure(3, r(7, 10), Mutation::None, Execution::Parallel).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(
            !verify_current_structure(3, r(7, 10), Mutation::DoubleAntiDiagonal, Execution::Parallel)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn single_particle_has_no_circulation() {
        let t = Torus::new(4).unwrap();
        for k in 0..16 {
            let c = Configuration::from_bits(4, 1 << k);
            let circ = circulation_part(&t, &c, 0.5);
            assert_eq!(circ.max_abs(), 0.0);
        }
        let c = Configuration::from_bits(4, 0b1010_0101_1100_0011);
        assert!(max_divergence(&t, &circulation_part(&t, &c, 0.5)) < 1e-15);
    }

    #[test]
    fn expectations() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let w = FaceWeights::uniform(half.clone());
        let eg = grandcanonical_expectation(4, &half, |c| w.g([c[0], c[1], c[2], c[3]])).unwrap();
        assert_eq!(eg, BigRational::new(BigInt::from(1), BigInt::from(16)));
        let sq = grandcanonical_expectation(6, &half, |c| vertical_edge_window_terms(c, &w).0).unwrap();
        assert_eq!(sq, half);
        assert!(grandcanonical_expectation(21, &half, |_| BigRational::zero()).is_err());
        assert!(verify_coefficients(r(1, 2), Mutation::None).unwrap().passed);
        assert!(
            !verify_coefficients(r(1, 2), Mutation::DoubleAntiDiagonal)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn dirichlet() {
        let one = |_: &Configuration| 1.0;
        let (l, r) = dirichlet_sides(0.5, 0.5, &one, Mutation::None).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
        for a in [0.0, 0.5] {
            let rep = verify_dirichlet(a, Mutation::None).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
        assert!(!verify_dirichlet(0.5, Mutation::DoubleAntiDiagonal).unwrap().passed);
    }

    #[test]
    fn witness_only_for_nonzero_alpha() {
        assert!(detailed_balance_witness(3, 0.0).unwrap().is_none());
        let w = detailed_balance_witness(3, 0.5).unwrap().unwrap();
        assert_ne!(w.forward, w.backward);
    }
}
