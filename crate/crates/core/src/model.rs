//! Particle configurations and the rotation-augmented exclusion rates.
//!
//! A particle at `x` jumps to an empty neighbour `y` at rate
//! `1 + g(f+(x,y)) - g(f-(x,y))`, where `g` of a face is `alpha` when the
//! face holds exactly two particles on opposite corners and `0` otherwise.
//! Rates are generic over the scalar type so that the same code serves
//! floating-point simulation and exact rational verification.

use num_traits::{Num, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::DiscreteVectorField;
use crate::lattice::{DirectedEdge, Torus, Vertex};

/// Occupation numbers `eta(x) in {0, 1}`, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    n: usize,
    occ: Vec<u8>,
}

impl Configuration {
    pub fn empty(n: usize) -> Self {
        Self { n, occ: vec![0; n * n] }
    }

    pub fn full(n: usize) -> Self {
        Self { n, occ: vec![1; n * n] }
    }

    pub fn from_occupations(n: usize, occ: Vec<u8>) -> Result<Self> {
        if occ.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "expected {} occupations, got {}",
                n * n,
                occ.len()
            )));
        }
        if occ.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter("occupations must be 0 or 1".into()));
        }
        Ok(Self { n, occ })
    }

    /// Site `k` is occupied iff bit `k` of `bits` is set (`n * n <= 64`).
    pub fn from_bits(n: usize, bits: u64) -> Self {
        assert!(n * n <= 64, "bit encoding holds at most 64 sites");
        Self {
            n,
            occ: (0..n * n).map(|k| ((bits >> k) & 1) as u8).collect(),
        }
    }

    pub fn to_bits(&self) -> u64 {
        assert!(self.n * self.n <= 64);
        self.occ
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &b)| acc | ((b as u64) << k))
    }

    /// Row-major string of `'0'` / `'1'`, one character per site.
    pub fn to_bitstring(&self) -> String {
        self.occ.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(n: usize, s: &str) -> Result<Self> {
        let occ = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidParameter(format!("bad occupation character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_occupations(n, occ)
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn occupations(&self) -> &[u8] {
        &self.occ
    }

    pub(crate) fn occupations_mut(&mut self) -> &mut [u8] {
        &mut self.occ
    }

    pub fn get(&self, torus: &Torus, v: Vertex) -> u8 {
        self.occ[torus.index(v)]
    }

    pub fn set(&mut self, torus: &Torus, v: Vertex, value: bool) {
        self.occ[torus.index(v)] = value as u8;
    }

    pub fn particles(&self) -> usize {
        self.occ.iter().map(|&b| b as usize).sum()
    }

    /// `eta^{x,y}`: occupations of the endpoints of `e` exchanged.
    pub fn swapped(&self, torus: &Torus, e: &DirectedEdge) -> Self {
        let mut out = self.clone();
        out.occ.swap(torus.index(e.tail), torus.index(e.head));
        out
    }

    /// `(tau_z eta)(x) = eta(x - z)`.
    pub fn translated(&self, torus: &Torus, di: isize, dj: isize) -> Self {
        let mut out = self.clone();
        for v in torus.vertices() {
            out.occ[torus.index(torus.translate(v, di, dj))] = self.occ[torus.index(v)];
        }
        out
    }
}

/// Rotation weights of an activated face, one per diagonal.
///
/// `main` applies when `(x, x+e1+e2)` hold the particles, `anti` when
/// `(x+e1, x+e2)` do. The model uses `main = anti = alpha`; other values
/// only serve to show that exact checks can fail.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceWeights<T> {
    pub main: T,
    pub anti: T,
}

impl<T: Clone> FaceWeights<T> {
    pub fn uniform(alpha: T) -> Self {
        Self {
            main: alpha.clone(),
            anti: alpha,
        }
    }
}

impl<T: Clone + Zero> FaceWeights<T> {
    /// `g` of a face from its corners `(x, x+e1, x+e1+e2, x+e2)`.
    pub fn g(&self, c: [u8; 4]) -> T {
        match c {
            [1, 0, 1, 0] => self.main.clone(),
            [0, 1, 0, 1] => self.anti.clone(),
            _ => T::zero(),
        }
    }
}

pub(crate) fn corners(torus: &Torus, occ: &[u8], anchor: usize) -> [u8; 4] {
    let c = torus.face_corner_indices(anchor);
    [occ[c[0]], occ[c[1]], occ[c[2]], occ[c[3]]]
}

/// `g` on the face anchored at vertex index `anchor`.
pub fn face_g<T: Clone + Zero>(torus: &Torus, occ: &[u8], anchor: usize, w: &FaceWeights<T>) -> T {
    w.g(corners(torus, occ, anchor))
}

/// Rate `eta(x)(1 - eta(y)) + eta(x) [g(f+) - g(f-)]` for the directed edge
/// with index `k`, without field.
pub fn rate_with<T: Num + Clone>(torus: &Torus, occ: &[u8], k: usize, w: &FaceWeights<T>) -> T {
    let s = torus.stencil(k);
    if occ[s.tail as usize] == 0 {
        return T::zero();
    }
    let base = if occ[s.head as usize] == 0 { T::one() } else { T::zero() };
    let at = |c: [u32; 4]| {
        [
            occ[c[0] as usize],
            occ[c[1] as usize],
            occ[c[2] as usize],
            occ[c[3] as usize],
        ]
    };
    base + w.g(at(s.plus_corners)) - w.g(at(s.minus_corners))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    /// Discretized external field `H_N`, if any.
    pub field: Option<DiscreteVectorField>,
}

impl ModelParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!("|alpha| must be < 1, got {alpha}")));
        }
        Ok(Self { alpha, field: None })
    }

    pub fn with_field(mut self, field: DiscreteVectorField) -> Self {
        self.field = Some(field);
        self
    }
}

/// Instantaneous current across an edge and its gradient / circulation parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurrentSplit {
    pub total: f64,
    pub gradient: f64,
    pub circulation: f64,
}

/// The exclusion process on a fixed torus with fixed parameters.
#[derive(Clone, Debug)]
pub struct Model {
    torus: Torus,
    params: ModelParams,
    weights: FaceWeights<f64>,
    /// `exp(H_N(e))` per directed edge when a field is set.
    field_factor: Option<Vec<f64>>,
}

impl Model {
    pub fn new(torus: Torus, params: ModelParams) -> Result<Self> {
        ModelParams::new(params.alpha)?;
        let field_factor = match &params.field {
            Some(h) => {
                if h.side() != torus.side() {
                    return Err(Error::InvalidParameter(format!(
                        "field lives on a torus of side {}, model on {}",
                        h.side(),
                        torus.side()
                    )));
                }
                Some(torus.directed_edges().map(|e| h.get(&torus, &e).exp()).collect())
            }
            None => None,
        };
        Ok(Self {
            weights: FaceWeights::uniform(params.alpha),
            torus,
            params,
            field_factor,
        })
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn weights(&self) -> &FaceWeights<f64> {
        &self.weights
    }

    /// `g` on the face anchored at `anchor`.
    pub fn g_value(&self, config: &Configuration, anchor: Vertex) -> f64 {
        face_g(
            &self.torus,
            config.occupations(),
            self.torus.index(anchor),
            &self.weights,
        )
    }

    #[inline]
    pub(crate) fn rate_at(&self, occ: &[u8], k: usize) -> f64 {
        let r = rate_with(&self.torus, occ, k, &self.weights);
        match &self.field_factor {
            Some(f) => r * f[k],
            None => r,
        }
    }

    pub fn jump_rate(&self, config: &Configuration, e: &DirectedEdge) -> f64 {
        let r = self.rate_at(config.occupations(), self.torus.directed_index(e));
        assert!(r >= 0.0, "negative jump rate {r}");
        r
    }

    /// `c_{x,y} - c_{y,x}` for the directed edge with index `k`.
    pub(crate) fn current_at(&self, occ: &[u8], k: usize) -> f64 {
        self.rate_at(occ, k) - self.rate_at(occ, self.torus.reverse_index(k))
    }

    /// Split `j(x,y) = [eta(x) - eta(y)] + [g(f+) - g(f-)]`; only defined
    /// without an external field.
    pub fn instantaneous_current(&self, config: &Configuration, e: &DirectedEdge) -> Result<CurrentSplit> {
        if self.params.field.is_some() {
            return Err(Error::FieldNotSupported);
        }
        let t = &self.torus;
        let occ = config.occupations();
        let k = t.directed_index(e);
        let s = t.stencil(k);
        let gradient = occ[s.tail as usize] as f64 - occ[s.head as usize] as f64;
        let circulation =
            face_g(t, occ, s.face_plus as usize, &self.weights) - face_g(t, occ, s.face_minus as usize, &self.weights);
        Ok(CurrentSplit {
            total: self.current_at(occ, k),
            gradient,
            circulation,
        })
    }

    /// The instantaneous current `j_eta` as a discrete vector field.
    pub fn current_field(&self, config: &Configuration) -> DiscreteVectorField {
        let t = &self.torus;
        let occ = config.occupations();
        DiscreteVectorField::from_fn(t, |e| self.current_at(occ, t.directed_index(e)))
    }

    /// Sum of all jump rates (without the diffusive `N^2` factor).
    pub fn total_rate(&self, config: &Configuration) -> f64 {
        (0..self.torus.num_directed_edges())
            .map(|k| self.rate_at(config.occupations(), k))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Direction;

    fn model(n: usize, alpha: f64) -> Model {
        Model::new(Torus::new(n).unwrap(), ModelParams::new(alpha).unwrap()).unwrap()
    }

    fn with_sites(n: usize, t: &Torus, sites: &[(isize, isize)]) -> Configuration {
        let mut c = Configuration::empty(n);
        for &(i, j) in sites {
            c.set(t, t.vertex(i, j), true);
        }
        c
    }

    #[test]
    fn g_examples() {
        let w = FaceWeights::uniform(0.5);
        assert_eq!(w.g([1, 0, 1, 0]), 0.5);
        assert_eq!(w.g([0, 1, 0, 1]), 0.5);
        for c in [[1, 1, 0, 0], [1, 1, 1, 1], [0, 0, 0, 0], [1, 0, 0, 0], [1, 1, 1, 0]] {
            assert_eq!(w.g(c), 0.0);
        }
        let m = model(4, 0.5);
        let t = m.torus().clone();
        let c = with_sites(4, &t, &[(1, 1), (2, 2)]);
        assert_eq!(m.g_value(&c, Vertex::new(1, 1)), 0.5);
        assert_eq!(m.g_value(&c, Vertex::new(0, 0)), 0.0);
    }

    #[test]
    fn rejects_large_alpha() {
        assert!(ModelParams::new(1.0).is_err());
        assert!(ModelParams::new(-1.2).is_err());
        assert!(ModelParams::new(f64::NAN).is_err());
        assert!(ModelParams::new(0.99).is_ok());
    }

    #[test]
    fn rate_examples_upward_edge() {
        let m = model(5, 0.5);
        let t = m.torus().clone();
        let x = Vertex::new(2, 2);
        let e = t.edge(x, Direction::North);
        // f+ is the face to the left, anchored at (1,2): corners (1,2),(2,2),(2,3),(1,3).
        // Activate it with the anti diagonal (2,2),(1,3).
        let b = with_sites(5, &t, &[(2, 2), (1, 3)]);
        assert_eq!(m.jump_rate(&b, &e), 1.5);
        // f- anchored at x: corners (2,2),(3,2),(3,3),(2,3); main diagonal (2,2),(3,3).
        let c = with_sites(5, &t, &[(2, 2), (3, 3)]);
        assert_eq!(m.jump_rate(&c, &e), 0.5);
        let d = with_sites(5, &t, &[(2, 2), (1, 3), (3, 3)]);
        assert_eq!(m.jump_rate(&d, &e), 1.0);
        let single = with_sites(5, &t, &[(2, 2)]);
        for dir in Direction::ALL {
            assert_eq!(m.jump_rate(&single, &t.edge(x, dir)), 1.0);
        }
        let blocked = with_sites(5, &t, &[(2, 2), (2, 3)]);
        assert_eq!(m.jump_rate(&blocked, &e), 0.0);
    }

    /// Figure-style rate table for a vertical edge with occupied tail and
    /// empty head: type A (no activated face) 1, B (left face activated)
    /// 1 + alpha, C (right face activated) 1 - alpha, D (both) 1.
    #[test]
    fn rate_panel_types() {
        let alpha = 0.3;
        let m = model(5, alpha);
        let t = m.torus().clone();
        let x = Vertex::new(2, 2);
        let e = t.edge(x, Direction::North);
        // left column sites (1,2) below, (1,3) above; right column (3,2), (3,3)
        let left_cases: Vec<[u8; 2]> = vec![[0, 0], [1, 0], [1, 1], [0, 1]];
        for l in &left_cases {
            for r in &left_cases {
                let mut c = with_sites(5, &t, &[(2, 2)]);
                c.set(&t, Vertex::new(1, 2), l[0] == 1);
                c.set(&t, Vertex::new(1, 3), l[1] == 1);
                c.set(&t, Vertex::new(3, 2), r[0] == 1);
                c.set(&t, Vertex::new(3, 3), r[1] == 1);
                // left face activated iff its other two corners are (0,1): (1,2) empty, (1,3) full
                let left_active = *l == [0, 1];
                let right_active = *r == [0, 1];
                let expected = 1.0 + if left_active { alpha } else { 0.0 } - if right_active { alpha } else { 0.0 };
                assert!((m.jump_rate(&c, &e) - expected).abs() < 1e-15, "{l:?} {r:?}");
            }
        }
    }

    #[test]
    fn rates_positive_and_translation_covariant_on_n3() {
        for alpha in [0.99, -0.99, 0.5] {
            let m = model(3, alpha);
            let t = m.torus().clone();
            for bits in 0..512u64 {
                let c = Configuration::from_bits(3, bits);
                for e in t.directed_edges() {
                    let r = m.jump_rate(&c, &e);
                    let movable = c.get(&t, e.tail) == 1 && c.get(&t, e.head) == 0;
                    assert_eq!(r > 0.0, movable);
                    assert!(r >= 0.0);
                    for (di, dj) in [(1, 0), (0, 1), (2, 1)] {
                        let ct = c.translated(&t, di, dj);
                        let et = t.edge(t.translate(e.tail, di, dj), e.dir);
                        assert_eq!(m.jump_rate(&ct, &et), r);
                    }
                }
            }
        }
    }

    #[test]
    fn current_split_examples() {
        let m = model(4, 0.5);
        let t = m.torus().clone();
        let c = with_sites(4, &t, &[(1, 1)]);
        let e = t.edge(Vertex::new(1, 1), Direction::East);
        let s = m.instantaneous_current(&c, &e).unwrap();
        assert_eq!((s.total, s.gradient, s.circulation), (1.0, 1.0, 0.0));

        let c = with_sites(4, &t, &[(1, 1), (2, 1), (2, 2)]);
        let s = m.instantaneous_current(&c, &e).unwrap();
        assert_eq!(s.gradient, 0.0);
        assert_eq!(s.total, s.circulation);
    }

    #[test]
    fn current_split_exhaustive_n3() {
        let m = model(3, 0.7);
        let t = m.torus().clone();
        for bits in 0..512u64 {
            let c = Configuration::from_bits(3, bits);
            for e in t.directed_edges() {
                let s = m.instantaneous_current(&c, &e).unwrap();
                assert_eq!(s.total, s.gradient + s.circulation);
            }
        }
    }

    #[test]
    fn split_rejected_under_field() {
        let t = Torus::new(4).unwrap();
        let h = DiscreteVectorField::zeros(&t);
        let m = Model::new(t.clone(), ModelParams::new(0.1).unwrap().with_field(h)).unwrap();
        let e = t.edge(Vertex::new(0, 0), Direction::East);
        assert!(matches!(
            m.instantaneous_current(&Configuration::empty(4), &e),
            Err(Error::FieldNotSupported)
        ));
    }

    #[test]
    fn field_multiplies_rates() {
        let t = Torus::new(4).unwrap();
        let h = DiscreteVectorField::from_fn(&t, |e| if e.dir == Direction::East { 0.25 } else { 0.0 });
        let m = Model::new(t.clone(), ModelParams::new(0.0).unwrap().with_field(h)).unwrap();
        let c = with_sites(4, &t, &[(1, 1)]);
        let x = Vertex::new(1, 1);
        assert!((m.jump_rate(&c, &t.edge(x, Direction::East)) - 0.25f64.exp()).abs() < 1e-15);
        assert!((m.jump_rate(&c, &t.edge(x, Direction::West)) - (-0.25f64).exp()).abs() < 1e-15);
        assert_eq!(m.jump_rate(&c, &t.edge(x, Direction::North)), 1.0);
    }

    #[test]
    fn swap_is_conservative_involution() {
        let t = Torus::new(3).unwrap();
        for bits in 0..512u64 {
            let c = Configuration::from_bits(3, bits);
            for e in t.directed_edges() {
                let s = c.swapped(&t, &e);
                assert_eq!(s.particles(), c.particles());
                assert_eq!(s.swapped(&t, &e), c);
                assert_eq!(s.get(&t, e.tail), c.get(&t, e.head));
            }
        }
    }

    #[test]
    fn bitstring_round_trip() {
        let c = Configuration::from_bits(3, 0b101_100_011);
        assert_eq!(c.to_bitstring(), "110001101");
        assert_eq!(Configuration::from_bitstring(3, &c.to_bitstring()).unwrap(), c);
        assert!(Configuration::from_bitstring(3, "11").is_err());
        assert!(Configuration::from_bitstring(2, "1x01").is_err());
    }
}
