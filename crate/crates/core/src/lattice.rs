//! Geometry of the discrete two-dimensional torus with mesh `1/N`.
//!
//! Vertices are integer pairs `(i, j)` in `{0, .., N-1}^2`; the physical
//! position of a vertex is `(i/N, j/N)` and is only used where continuum
//! functions are evaluated. Vertex indices are row-major: `j * N + i`.
//!
//! Every undirected edge has a canonical orientation (rightward or upward)
//! and is stored once, indexed by `2 * vertex + axis`. Directed edges are
//! indexed by `4 * tail + direction`. Faces are identified by their
//! lower-left anchor vertex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest side length for which the torus has no double edges.
pub const MIN_SIDE: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub i: usize,
    pub j: usize,
}

impl Vertex {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X = 0,
    Y = 1,
}

impl Axis {
    pub const ALL: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Positive direction along this axis.
    pub fn forward(self) -> Direction {
        match self {
            Axis::X => Direction::East,
            Axis::Y => Direction::North,
        }
    }
}

/// The four lattice directions `+e1, +e2, -e1, -e2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    East = 0,
    North = 1,
    West = 2,
    South = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::East, Direction::North, Direction::West, Direction::South];

    pub fn offset(self) -> (isize, isize) {
        match self {
            Direction::East => (1, 0),
            Direction::North => (0, 1),
            Direction::West => (-1, 0),
            Direction::South => (0, -1),
        }
    }

    pub fn reverse(self) -> Direction {
        match self {
            Direction::East => Direction::West,
            Direction::North => Direction::South,
            Direction::West => Direction::East,
            Direction::South => Direction::North,
        }
    }

    pub fn axis(self) -> Axis {
        match self {
            Direction::East | Direction::West => Axis::X,
            Direction::North | Direction::South => Axis::Y,
        }
    }

    /// True for the canonical orientations (rightward, upward).
    pub fn is_canonical(self) -> bool {
        matches!(self, Direction::East | Direction::North)
    }

    pub fn from_index(k: usize) -> Direction {
        Self::ALL[k & 3]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub tail: Vertex,
    pub head: Vertex,
    pub dir: Direction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Anticlockwise,
    Clockwise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Face {
    /// Lower-left corner.
    pub anchor: Vertex,
    pub orientation: Orientation,
}

impl Face {
    pub fn anticlockwise(anchor: Vertex) -> Self {
        Self {
            anchor,
            orientation: Orientation::Anticlockwise,
        }
    }

    pub fn negate(self) -> Self {
        let orientation = match self.orientation {
            Orientation::Anticlockwise => Orientation::Clockwise,
            Orientation::Clockwise => Orientation::Anticlockwise,
        };
        Self { orientation, ..self }
    }
}

/// Per directed edge: tail, head, and the anchors and corners of the faces
/// `f+(e)` and `f-(e)`, all as vertex indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct EdgeStencil {
    pub tail: u32,
    pub head: u32,
    pub face_plus: u32,
    pub face_minus: u32,
    pub plus_corners: [u32; 4],
    pub minus_corners: [u32; 4],
}

/// The rescaled discrete torus of side `N`.
#[derive(Clone, Debug)]
pub struct Torus {
    n: usize,
    stencils: Vec<EdgeStencil>,
}

impl PartialEq for Torus {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Torus {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_SIDE {
            return Err(Error::InvalidParameter(format!(
                "torus side must be at least {MIN_SIDE}, got {n}"
            )));
        }
        if n > (1 << 14) {
            return Err(Error::InvalidParameter(format!("torus side {n} is too large")));
        }
        let mut torus = Self {
            n,
            stencils: Vec::new(),
        };
        let stencils = (0..4 * n * n)
            .map(|k| {
                let e = torus.directed_edge_at(k);
                let (fp, fm) = torus.adjacent_faces(&e);
                EdgeStencil {
                    tail: torus.index(e.tail) as u32,
                    head: torus.index(e.head) as u32,
                    face_plus: torus.index(fp.anchor) as u32,
                    face_minus: torus.index(fm.anchor) as u32,
                    plus_corners: torus.face_corner_indices(torus.index(fp.anchor)).map(|c| c as u32),
                    minus_corners: torus.face_corner_indices(torus.index(fm.anchor)).map(|c| c as u32),
                }
            })
            .collect();
        torus.stencils = stencils;
        Ok(torus)
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        self.n * self.n
    }

    pub fn num_edges(&self) -> usize {
        2 * self.n * self.n
    }

    pub fn num_directed_edges(&self) -> usize {
        4 * self.n * self.n
    }

    pub fn num_faces(&self) -> usize {
        self.n * self.n
    }

    /// Vertex with coordinates reduced modulo `N`.
    pub fn vertex(&self, i: isize, j: isize) -> Vertex {
        let n = self.n as isize;
        Vertex::new(i.rem_euclid(n) as usize, j.rem_euclid(n) as usize)
    }

    pub fn index(&self, v: Vertex) -> usize {
        v.j * self.n + v.i
    }

    pub fn vertex_at(&self, idx: usize) -> Vertex {
        Vertex::new(idx % self.n, idx / self.n)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.num_vertices()).map(|k| self.vertex_at(k))
    }

    pub fn translate(&self, v: Vertex, di: isize, dj: isize) -> Vertex {
        self.vertex(v.i as isize + di, v.j as isize + dj)
    }

    pub fn step(&self, v: Vertex, dir: Direction) -> Vertex {
        let (di, dj) = dir.offset();
        self.translate(v, di, dj)
    }

    /// Physical coordinates `(i/N, j/N)` in the unit torus.
    pub fn position(&self, v: Vertex) -> [f64; 2] {
        let h = 1.0 / self.n as f64;
        [v.i as f64 * h, v.j as f64 * h]
    }

    pub fn edge(&self, tail: Vertex, dir: Direction) -> DirectedEdge {
        DirectedEdge {
            tail,
            head: self.step(tail, dir),
            dir,
        }
    }

    pub fn reverse(&self, e: &DirectedEdge) -> DirectedEdge {
        DirectedEdge {
            tail: e.head,
            head: e.tail,
            dir: e.dir.reverse(),
        }
    }

    pub fn directed_index(&self, e: &DirectedEdge) -> usize {
        4 * self.index(e.tail) + e.dir as usize
    }

    pub fn directed_edge_at(&self, k: usize) -> DirectedEdge {
        self.edge(self.vertex_at(k / 4), Direction::from_index(k % 4))
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = DirectedEdge> + '_ {
        (0..self.num_directed_edges()).map(|k| self.directed_edge_at(k))
    }

    /// Canonical undirected index of `e` and the sign relating `e` to the
    /// canonical orientation (`+1` when `e` is rightward/upward).
    pub fn canonical(&self, e: &DirectedEdge) -> (usize, f64) {
        if e.dir.is_canonical() {
            (2 * self.index(e.tail) + e.dir.axis().index(), 1.0)
        } else {
            (2 * self.index(e.head) + e.dir.axis().index(), -1.0)
        }
    }

    /// The canonically oriented edge with undirected index `k`.
    pub fn canonical_edge_at(&self, k: usize) -> DirectedEdge {
        let axis = if k.is_multiple_of(2) { Axis::X } else { Axis::Y };
        self.edge(self.vertex_at(k / 2), axis.forward())
    }

    pub fn canonical_edges(&self) -> impl Iterator<Item = DirectedEdge> + '_ {
        (0..self.num_edges()).map(|k| self.canonical_edge_at(k))
    }

    pub fn faces(&self) -> impl Iterator<Item = Face> + '_ {
        self.vertices().map(Face::anticlockwise)
    }

    /// The four corners of the face anchored at `anchor`, listed as
    /// `(x, x+e1, x+e1+e2, x+e2)`.
    pub fn face_corners(&self, anchor: Vertex) -> [Vertex; 4] {
        [
            anchor,
            self.translate(anchor, 1, 0),
            self.translate(anchor, 1, 1),
            self.translate(anchor, 0, 1),
        ]
    }

    /// Edges met while going around `f` according to its orientation.
    pub fn face_edges(&self, f: &Face) -> [DirectedEdge; 4] {
        let x = f.anchor;
        let ccw = [
            self.edge(x, Direction::East),
            self.edge(self.translate(x, 1, 0), Direction::North),
            self.edge(self.translate(x, 1, 1), Direction::West),
            self.edge(self.translate(x, 0, 1), Direction::South),
        ];
        match f.orientation {
            Orientation::Anticlockwise => ccw,
            Orientation::Clockwise => {
                let mut cw = [ccw[3], ccw[2], ccw[1], ccw[0]];
                for e in cw.iter_mut() {
                    *e = self.reverse(e);
                }
                cw
            }
        }
    }

    /// The anticlockwise faces `(f+(e), f-(e))`: `e` is traversed by `f+`
    /// along its orientation and by `f-` against it.
    pub fn adjacent_faces(&self, e: &DirectedEdge) -> (Face, Face) {
        let x = e.tail;
        let (plus, minus) = match e.dir {
            Direction::East => (x, self.translate(x, 0, -1)),
            Direction::North => (self.translate(x, -1, 0), x),
            Direction::West => (self.translate(x, -1, -1), self.translate(x, -1, 0)),
            Direction::South => (self.translate(x, 0, -1), self.translate(x, -1, -1)),
        };
        (Face::anticlockwise(plus), Face::anticlockwise(minus))
    }

    pub(crate) fn stencil(&self, directed: usize) -> &EdgeStencil {
        &self.stencils[directed]
    }

    /// Directed index of the reverse of edge `directed`.
    #[inline]
    pub(crate) fn reverse_index(&self, directed: usize) -> usize {
        4 * self.stencils[directed].head as usize + ((directed & 3) ^ 2)
    }

    pub(crate) fn face_corner_indices(&self, anchor: usize) -> [usize; 4] {
        let n = self.n;
        let (i, j) = (anchor % n, anchor / n);
        let ip = if i + 1 == n { 0 } else { i + 1 };
        let jp = if j + 1 == n { 0 } else { j + 1 };
        [j * n + i, j * n + ip, jp * n + ip, jp * n + i]
    }

    /// Canonical indices of the undirected edges whose flanking faces contain
    /// either endpoint of the undirected edge `k`. These are exactly the
    /// edges whose jump rates can change when a particle crosses `k`.
    pub(crate) fn rate_neighbourhood(&self, k: usize) -> Vec<usize> {
        let e = self.canonical_edge_at(k);
        let mut out = Vec::with_capacity(17);
        for v in [e.tail, e.head] {
            for (di, dj) in [(0, 0), (-1, 0), (0, -1), (-1, -1)] {
                let anchor = self.translate(v, di, dj);
                for fe in self.face_edges(&Face::anticlockwise(anchor)) {
                    let (idx, _) = self.canonical(&fe);
                    if !out.contains(&idx) {
                        out.push(idx);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// `rate_neighbourhood` of every undirected edge, flattened.
#[derive(Clone, Debug)]
pub(crate) struct Neighbourhoods {
    edges: Vec<u32>,
    offsets: Vec<usize>,
}

impl Neighbourhoods {
    pub fn new(torus: &Torus) -> Self {
        let mut edges = Vec::with_capacity(17 * torus.num_edges());
        let mut offsets = Vec::with_capacity(torus.num_edges() + 1);
        offsets.push(0);
        for c in 0..torus.num_edges() {
            edges.extend(torus.rate_neighbourhood(c).into_iter().map(|d| d as u32));
            offsets.push(edges.len());
        }
        Self { edges, offsets }
    }

    #[inline]
    pub fn get(&self, c: usize) -> &[u32] {
        &self.edges[self.offsets[c]..self.offsets[c + 1]]
    }
}

/// Directed index of canonical edge `c` in its canonical orientation.
#[inline]
pub(crate) fn canonical_to_directed(c: usize) -> usize {
    4 * (c / 2) + c % 2
}

/// Canonical index and sign of the directed edge `k`.
#[inline]
pub(crate) fn directed_to_canonical(torus: &Torus, k: usize) -> (usize, i64) {
    let dir = k & 3;
    if dir < 2 {
        (2 * (k / 4) + dir, 1)
    } else {
        (2 * torus.stencil(k).head as usize + dir - 2, -1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contains(t: &Torus, f: &Face, e: &DirectedEdge) -> bool {
        t.face_edges(f).iter().any(|x| x == e)
    }

    #[test]
    fn rejects_small_tori() {
        assert!(Torus::new(2).is_err());
        assert!(Torus::new(3).is_ok());
    }

    #[test]
    fn anticlockwise_face_at_origin() {
        let t = Torus::new(4).unwrap();
        let f = Face::anticlockwise(Vertex::new(0, 0));
        let tails: Vec<_> = t.face_edges(&f).iter().map(|e| (e.tail.i, e.tail.j)).collect();
        assert_eq!(tails, vec![(0, 0), (1, 0), (1, 1), (0, 1)]);
        let heads: Vec<_> = t.face_edges(&f).iter().map(|e| (e.head.i, e.head.j)).collect();
        assert_eq!(heads, vec![(1, 0), (1, 1), (0, 1), (0, 0)]);

        let cw: Vec<_> = t.face_edges(&f.negate()).iter().map(|e| (e.tail.i, e.tail.j)).collect();
        assert_eq!(cw, vec![(0, 0), (0, 1), (1, 1), (1, 0)]);
    }

    #[test]
    fn adjacent_faces_examples() {
        let t = Torus::new(4).unwrap();
        let x = Vertex::new(2, 1);
        let up = t.edge(x, Direction::North);
        let (fp, fm) = t.adjacent_faces(&up);
        assert_eq!(fp.anchor, Vertex::new(1, 1));
        assert_eq!(fm.anchor, x);

        let right = t.edge(x, Direction::East);
        let (fp, fm) = t.adjacent_faces(&right);
        assert_eq!(fp.anchor, x);
        assert_eq!(fm.anchor, Vertex::new(2, 0));
    }

    // Oracle: enumerate every oriented face and test traversal membership.
    #[test]
    fn adjacent_faces_match_traversal_membership() {
        for n in 3..=8 {
            let t = Torus::new(n).unwrap();
            for e in t.directed_edges() {
                let (fp, fm) = t.adjacent_faces(&e);
                assert!(contains(&t, &fp, &e));
                assert!(contains(&t, &fm.negate(), &e));
                assert!(contains(&t, &fm, &t.reverse(&e)));

                let ccw: Vec<_> = t.faces().filter(|f| contains(&t, f, &e)).collect();
                let cw: Vec<_> = t.faces().map(|f| f.negate()).filter(|f| contains(&t, f, &e)).collect();
                assert_eq!(ccw, vec![fp]);
                assert_eq!(cw, vec![fm.negate()]);

                let (rp, rm) = t.adjacent_faces(&t.reverse(&e));
                assert_eq!((rp, rm), (fm, fp));
            }
        }
    }

    #[test]
    fn incidence_counts() {
        let t = Torus::new(5).unwrap();
        for v in t.vertices() {
            let touching = t.faces().filter(|f| t.face_corners(f.anchor).contains(&v)).count();
            assert_eq!(touching, 4);
            let out = t.directed_edges().filter(|e| e.tail == v).count();
            let inc = t.directed_edges().filter(|e| e.head == v).count();
            assert_eq!((out, inc), (4, 4));
        }
        for f in t.faces() {
            let corners = t.face_corners(f.anchor);
            for a in 0..4 {
                for b in 0..a {
                    assert_ne!(corners[a], corners[b]);
                }
            }
        }
    }

    #[test]
    fn translation_equivariance() {
        let t = Torus::new(5).unwrap();
        for e in t.directed_edges() {
            let (fp, fm) = t.adjacent_faces(&e);
            for di in 0..5 {
                for dj in 0..5 {
                    let moved = t.edge(t.translate(e.tail, di, dj), e.dir);
                    let (mp, mm) = t.adjacent_faces(&moved);
                    assert_eq!(mp.anchor, t.translate(fp.anchor, di, dj));
                    assert_eq!(mm.anchor, t.translate(fm.anchor, di, dj));
                }
            }
        }
    }

    #[test]
    fn canonical_round_trip() {
        let t = Torus::new(4).unwrap();
        for e in t.directed_edges() {
            let (k, s) = t.canonical(&e);
            let c = t.canonical_edge_at(k);
            if s > 0.0 {
                assert_eq!(c, e);
            } else {
                assert_eq!(c, t.reverse(&e));
            }
        }
    }

    #[test]
    fn gradient_sums_to_zero_around_faces() {
        let t = Torus::new(6).unwrap();
        let f = |v: Vertex| ((v.i * 7 + v.j * 13) % 11) as f64;
        for face in t.faces() {
            for face in [face, face.negate()] {
                let s: f64 = t.face_edges(&face).iter().map(|e| f(e.head) - f(e.tail)).sum();
                assert_eq!(s, 0.0);
            }
        }
    }

    #[test]
    fn rate_neighbourhood_has_fixed_size() {
        let t = Torus::new(6).unwrap();
        for k in 0..t.num_edges() {
            assert_eq!(t.rate_neighbourhood(k).len(), 17);
        }
    }
}
