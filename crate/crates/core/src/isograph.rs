//! Periodic isoradial graphs built from train-track data.
//!
//! Each track is a straight line of primitive homology `(h, v)` on the
//! combinatorial torus; its lifts to the plane form a periodic line
//! arrangement. Faces of the arrangement are the vertices of the diamond
//! graph, labelled by how many lifts of every track lie to their right.
//! Crossing a lift of track `T` from right to left is a rhombus step
//! `e^{iᾱ_T}`, so a face labelled `c` sits at `Σ_T c_T e^{iᾱ_T}`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

/// Smallest admissible rhombus half-angle (and distance to `π/2`).
pub const FLAT_EPS: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("need at least two non-parallel tracks")]
    TooFewTracks,
    #[error("track {0}: homology ({1}, {2}) is not primitive")]
    NotPrimitive(usize, i64, i64),
    #[error("track {0}: angle is not finite")]
    BadAngle(usize),
    #[error("diamond graph is not bipartite on the torus: Σ|h| = {0}, Σ|v| = {1} must both be even")]
    NotBipartite(i64, i64),
    #[error("tracks {0} and {1}: crossing orientation disagrees with the angle order")]
    Orientation(usize, usize),
    #[error("tracks {0} and {1}: rhombus is flat (half-angle {2})")]
    FlatRhombus(usize, usize, f64),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("graph spec must give either `tracks` or `preset`")]
    EmptySpec,
    #[error("half-angles at vertex {0} sum to {1}, not π")]
    AngleSum(usize, f64),
    #[error("torus {0}x{1} is too small: it creates self-loops")]
    TorusTooSmall(usize, usize),
    #[error("vertex not found in graph")]
    MissingVertex,
    #[error("tracks {0}, {1} and {2} meet at a point")]
    TriplePoint(usize, usize, usize),
    #[error("bad graph spec: {0}")]
    Spec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub h: i64,
    pub v: i64,
    pub alpha_bar: f64,
}

/// JSON graph description: either explicit tracks or a named preset.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GraphSpec {
    #[serde(default)]
    pub tracks: Option<Vec<Track>>,
    #[serde(default)]
    pub preset: Option<String>,
    /// Which face parity class is primal (0 or 1).
    #[serde(default)]
    pub parity: Option<u8>,
}

impl GraphSpec {
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        serde_json::from_str(text).map_err(|e| GraphError::Spec(e.to_string()))
    }

    pub fn build(&self) -> Result<PeriodicGraph, GraphError> {
        match (&self.tracks, &self.preset) {
            (Some(t), _) => PeriodicGraph::from_tracks(t, self.parity.unwrap_or(0)),
            (None, Some(p)) => PeriodicGraph::preset(p),
            (None, None) => Err(GraphError::EmptySpec),
        }
    }
}

pub const PRESETS: [&str; 4] = ["square", "triangular", "hexagonal", "paper-fig4"];

/// A primal vertex of the infinite graph: fundamental-domain index plus the
/// lattice translation of its cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexRef {
    pub idx: usize,
    pub cell: [i64; 2],
}

impl VertexRef {
    pub fn new(idx: usize, a: i64, b: i64) -> Self {
        VertexRef { idx, cell: [a, b] }
    }
    pub fn translate(self, a: i64, b: i64) -> Self {
        VertexRef { idx: self.idx, cell: [self.cell[0] + a, self.cell[1] + b] }
    }
}

/// Primal edge `x → y` with `y = x + e^{iᾱ} + e^{iβ̄}` and `β̄ = ᾱ + 2θ̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    /// Cell of `head` relative to the cell of `tail`.
    pub shift: [i64; 2],
    pub theta_bar: f64,
    pub alpha_bar: f64,
    pub beta_bar: f64,
}

impl Edge {
    fn reversed(&self) -> Edge {
        Edge {
            tail: self.head,
            head: self.tail,
            shift: [-self.shift[0], -self.shift[1]],
            theta_bar: self.theta_bar,
            alpha_bar: wrap(self.alpha_bar + PI),
            beta_bar: wrap(self.alpha_bar + PI) + 2.0 * self.theta_bar,
        }
    }
}

/// One step direction of a minimal diamond path with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub alpha_bar: f64,
    pub count: u32,
}

#[derive(Debug, Clone)]
pub struct PeriodicGraph {
    tracks: Vec<Track>,
    offsets: Vec<f64>,
    /// Label vectors of the primal vertices of the fundamental domain.
    labels: Vec<Vec<i64>>,
    dual_labels: Vec<Vec<i64>>,
    edges: Vec<Edge>,
    /// Outgoing edges per vertex (each undirected edge appears at both ends).
    incidence: Vec<Vec<Edge>>,
    period: [C64; 2],
    anchor: (usize, usize),
}

fn wrap(a: f64) -> f64 {
    a.rem_euclid(2.0 * PI)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if (2..c).take_while(|d| d * d <= c).all(|d| c % d != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

fn wedge(a: (i64, i64), b: (i64, i64)) -> i64 {
    a.0 * b.1 - b.0 * a.1
}

fn floor_div(p: i64, q: i64) -> i64 {
    let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
    p.div_euclid(q)
}

impl PeriodicGraph {
    pub fn preset(name: &str) -> Result<Self, GraphError> {
        let t = |h, v, a: f64| Track { h, v, alpha_bar: a };
        match name {
            "square" => Self::from_tracks(&[t(1, 1, PI / 4.0), t(-1, 1, 3.0 * PI / 4.0)], 0),
            "triangular" | "hexagonal" => {
                let tracks = [t(1, 0, 0.0), t(1, 1, PI / 3.0), t(0, 1, 2.0 * PI / 3.0)];
                let want = if name == "triangular" { 1 } else { 2 };
                let g = Self::from_tracks(&tracks, 0)?;
                if g.num_vertices() == want {
                    Ok(g)
                } else {
                    Self::from_tracks(&tracks, 1)
                }
            }
            "paper-fig4" => Self::from_tracks(
                &[t(2, 1, 0.1 * PI), t(1, 1, 0.3 * PI), t(0, 1, 0.5 * PI), t(-1, 1, 0.75 * PI)],
                0,
            ),
            other => Err(GraphError::UnknownPreset(other.to_string())),
        }
    }

    pub fn from_tracks(tracks: &[Track], parity: u8) -> Result<Self, GraphError> {
        for (i, t) in tracks.iter().enumerate() {
            if !t.alpha_bar.is_finite() {
                return Err(GraphError::BadAngle(i));
            }
            if gcd(t.h, t.v) != 1 {
                return Err(GraphError::NotPrimitive(i, t.h, t.v));
            }
        }
        let hom: Vec<(i64, i64)> = tracks.iter().map(|t| (t.h, t.v)).collect();
        let n = tracks.len();
        let anchor = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| wedge(hom[i], hom[j]) != 0)
            .ok_or(GraphError::TooFewTracks)?;
        let sh: i64 = hom.iter().map(|p| p.0.abs()).sum();
        let sv: i64 = hom.iter().map(|p| p.1.abs()).sum();
        if sh % 2 != 0 || sv % 2 != 0 {
            return Err(GraphError::NotBipartite(sh, sv));
        }
        for i in 0..n {
            for j in i + 1..n {
                let w = wedge(hom[i], hom[j]);
                if w == 0 {
                    continue;
                }
                let s = (tracks[j].alpha_bar - tracks[i].alpha_bar).sin();
                if s.abs() < (2.0 * FLAT_EPS).sin() {
                    return Err(GraphError::FlatRhombus(i, j, 0.5 * s.abs().asin()));
                }
                if (s > 0.0) != (w > 0) {
                    return Err(GraphError::Orientation(i, j));
                }
            }
        }
        // Deterministic generic offsets: square roots of distinct primes are
        // linearly independent over Q, so no three lines can be concurrent.
        let offsets: Vec<f64> = primes(n).into_iter().map(|p| (p as f64).sqrt().fract()).collect();

        let mut g = PeriodicGraph {
            tracks: tracks.to_vec(),
            offsets,
            labels: vec![],
            dual_labels: vec![],
            edges: vec![],
            incidence: vec![],
            period: [C64::new(0.0, 0.0); 2],
            anchor,
        };
        g.period = [g.delta_position(1, 0), g.delta_position(0, 1)];
        g.assemble(parity)?;
        Ok(g)
    }

    /// `Δ_T(a, b) = (h_T, v_T) ∧ (a, b)`: label change under translation.
    fn delta(&self, a: i64, b: i64) -> Vec<i64> {
        self.tracks.iter().map(|t| t.h * b - t.v * a).collect()
    }

    fn delta_position(&self, a: i64, b: i64) -> C64 {
        self.delta(a, b).iter().zip(&self.tracks).map(|(&d, t)| C64::from_polar(d as f64, t.alpha_bar)).sum()
    }

    /// Canonical representative of a label modulo lattice translations,
    /// together with the translation that maps it back.
    fn canonical(&self, c: &[i64]) -> (Vec<i64>, [i64; 2]) {
        let (i, j) = self.anchor;
        let (t1, t2) = (self.tracks[i], self.tracks[j]);
        let det = wedge((t1.h, t1.v), (t2.h, t2.v));
        let a = floor_div(t2.h * c[i] - t1.h * c[j], det);
        let b = floor_div(t2.v * c[i] - t1.v * c[j], det);
        let d = self.delta(a, b);
        (c.iter().zip(&d).map(|(x, y)| x - y).collect(), [a, b])
    }

    fn assemble(&mut self, parity: u8) -> Result<(), GraphError> {
        let n = self.tracks.len();
        let mut primal: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut dual: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut edges = Vec::new();
        let line = |s: usize, p: (f64, f64)| {
            let t = &self.tracks[s];
            t.h as f64 * p.1 - t.v as f64 * p.0 - self.offsets[s]
        };
        for ti in 0..n {
            for tj in ti + 1..n {
                let (a, b) = (self.tracks[ti], self.tracks[tj]);
                let det = wedge((a.h, a.v), (b.h, b.v));
                if det == 0 {
                    continue;
                }
                let m = det.abs();
                let mut seen: Vec<(f64, f64)> = Vec::new();
                for ni in 0..m {
                    for nj in 0..m {
                        // -v x + h y = s + n for both tracks
                        let r1 = self.offsets[ti] + ni as f64;
                        let r2 = self.offsets[tj] + nj as f64;
                        let x = (b.h as f64 * r1 - a.h as f64 * r2) / det as f64;
                        let y = (b.v as f64 * r1 - a.v as f64 * r2) / det as f64;
                        let p = (x.rem_euclid(1.0), y.rem_euclid(1.0));
                        let close = |q: &(f64, f64)| {
                            let dx = (p.0 - q.0 + 0.5).rem_euclid(1.0) - 0.5;
                            let dy = (p.1 - q.1 + 0.5).rem_euclid(1.0) - 0.5;
                            dx.abs() < 1e-9 && dy.abs() < 1e-9
                        };
                        if seen.iter().any(close) {
                            continue;
                        }
                        seen.push(p);
                        let mut c0: Vec<i64> = Vec::with_capacity(n);
                        for s in 0..n {
                            let l = line(s, p);
                            if s != ti && s != tj && (l - l.round()).abs() < 1e-9 {
                                return Err(GraphError::TriplePoint(ti, tj, s));
                            }
                            c0.push(l.floor() as i64);
                        }
                        c0[ti] = line(ti, p).round() as i64 - 1;
                        c0[tj] = line(tj, p).round() as i64 - 1;
                        let mut ca = c0.clone();
                        ca[ti] += 1;
                        let mut cb = c0.clone();
                        cb[tj] += 1;
                        let mut cab = ca.clone();
                        cab[tj] += 1;
                        let par = c0.iter().sum::<i64>().rem_euclid(2) as u8;
                        let (x, y, ua, ub, dx, dy) = if par == parity {
                            (c0, cab, a.alpha_bar, b.alpha_bar, ca, cb)
                        } else {
                            (ca, cb, b.alpha_bar, a.alpha_bar + PI, c0, cab)
                        };
                        let intern = |map: &mut HashMap<Vec<i64>, usize>, c: &[i64]| {
                            let (canon, cell) = self.canonical(c);
                            let len = map.len();
                            (*map.entry(canon).or_insert(len), cell)
                        };
                        let (xi, xc) = intern(&mut primal, &x);
                        let (yi, yc) = intern(&mut primal, &y);
                        intern(&mut dual, &dx);
                        intern(&mut dual, &dy);
                        let delta = (wrap(ub - ua) + PI).rem_euclid(2.0 * PI) - PI;
                        let (alpha, theta) = if delta > 0.0 { (wrap(ua), 0.5 * delta) } else { (wrap(ub), -0.5 * delta) };
                        if theta < FLAT_EPS || theta > PI / 2.0 - FLAT_EPS {
                            return Err(GraphError::FlatRhombus(ti, tj, theta));
                        }
                        edges.push(Edge {
                            tail: xi,
                            head: yi,
                            shift: [yc[0] - xc[0], yc[1] - xc[1]],
                            theta_bar: theta,
                            alpha_bar: alpha,
                            beta_bar: alpha + 2.0 * theta,
                        });
                    }
                }
            }
        }
        let mut labels = vec![vec![]; primal.len()];
        for (c, i) in primal {
            labels[i] = c;
        }
        let mut dual_labels = vec![vec![]; dual.len()];
        for (c, i) in dual {
            dual_labels[i] = c;
        }
        let mut incidence = vec![Vec::new(); labels.len()];
        for e in &edges {
            incidence[e.tail].push(*e);
            incidence[e.head].push(e.reversed());
        }
        for (i, inc) in incidence.iter().enumerate() {
            let s: f64 = inc.iter().map(|e| e.theta_bar).sum();
            if (s - PI).abs() > 1e-9 {
                return Err(GraphError::AngleSum(i, s));
            }
        }
        self.labels = labels;
        self.dual_labels = dual_labels;
        self.edges = edges;
        self.incidence = incidence;
        Ok(())
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }
    /// `|V₁|`, primal vertices per fundamental domain.
    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }
    pub fn num_dual_vertices(&self) -> usize {
        self.dual_labels.len()
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    /// Edges leaving `idx`, both orientations of every incident edge.
    pub fn incident(&self, idx: usize) -> &[Edge] {
        &self.incidence[idx]
    }
    /// Period vectors `(ω_x, ω_y)` of the embedding.
    pub fn period(&self) -> [C64; 2] {
        self.period
    }

    /// `(p_x, p_y)` with `2 p_x = Σ|v_T|`, `2 p_y = Σ|h_T|`.
    pub fn half_degrees(&self) -> (usize, usize) {
        let sv: i64 = self.tracks.iter().map(|t| t.v.abs()).sum();
        let sh: i64 = self.tracks.iter().map(|t| t.h.abs()).sum();
        ((sv / 2) as usize, (sh / 2) as usize)
    }

    /// Label (count of lifts to the right, per track) of a primal vertex.
    pub fn label(&self, x: VertexRef) -> Vec<i64> {
        let d = self.delta(x.cell[0], x.cell[1]);
        self.labels[x.idx].iter().zip(&d).map(|(a, b)| a + b).collect()
    }

    pub fn position(&self, x: VertexRef) -> C64 {
        self.label(x).iter().zip(&self.tracks).map(|(&c, t)| C64::from_polar(c as f64, t.alpha_bar)).sum()
    }

    /// Label differences `c(y) - c(x)` per track.
    pub fn label_diff(&self, x: VertexRef, y: VertexRef) -> Vec<i64> {
        self.label(y).iter().zip(self.label(x)).map(|(a, b)| a - b).collect()
    }

    /// Diamond-graph distance.
    pub fn distance(&self, x: VertexRef, y: VertexRef) -> u64 {
        self.label_diff(x, y).iter().map(|d| d.unsigned_abs()).sum()
    }

    /// Step multiset of a minimal diamond path from `x` to `y`; equal
    /// directions are merged.
    pub fn path_steps(&self, x: VertexRef, y: VertexRef) -> Vec<Step> {
        let mut steps: Vec<Step> = Vec::new();
        for (d, t) in self.label_diff(x, y).into_iter().zip(&self.tracks) {
            if d == 0 {
                continue;
            }
            let a = if d > 0 { wrap(t.alpha_bar) } else { wrap(t.alpha_bar + PI) };
            let count = d.unsigned_abs() as u32;
            match steps.iter_mut().find(|s| ((s.alpha_bar - a + PI).rem_euclid(2.0 * PI) - PI).abs() < 1e-12) {
                Some(s) => s.count += count,
                None => steps.push(Step { alpha_bar: a, count }),
            }
        }
        steps.sort_by(|a, b| a.alpha_bar.total_cmp(&b.alpha_bar));
        steps
    }

    pub fn neighbors(&self, x: VertexRef) -> impl Iterator<Item = (VertexRef, &Edge)> + '_ {
        self.incidence[x.idx]
            .iter()
            .map(move |e| (VertexRef::new(e.head, x.cell[0] + e.shift[0], x.cell[1] + e.shift[1]), e))
    }

    /// Primal ball of graph radius `radius` around `centers`.
    pub fn ball(&self, centers: &[VertexRef], radius: usize) -> Vec<VertexRef> {
        let mut seen: HashMap<VertexRef, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        for &c in centers {
            if seen.insert(c, 0).is_none() {
                queue.push_back(c);
            }
        }
        let mut out = Vec::new();
        while let Some(x) = queue.pop_front() {
            out.push(x);
            let d = seen[&x];
            if d == radius {
                continue;
            }
            for (y, _) in self.neighbors(x) {
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(y) {
                    e.insert(d + 1);
                    queue.push_back(y);
                }
            }
        }
        out
    }

    /// Finite graph induced on `verts`; edges leaving the set are recorded
    /// as outer (killed) half-angles.
    pub fn induced(&self, verts: &[VertexRef]) -> FiniteGraph {
        let index: HashMap<VertexRef, usize> = verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut g = FiniteGraph {
            pos: verts.iter().map(|&v| self.position(v)).collect(),
            edges: vec![],
            outer: vec![vec![]; verts.len()],
        };
        for (i, &x) in verts.iter().enumerate() {
            for (y, e) in self.neighbors(x) {
                match index.get(&y) {
                    Some(&j) if i < j => g.edges.push(FEdge { a: i, b: j, theta_bar: e.theta_bar }),
                    Some(_) => {}
                    None => g.outer[i].push(e.theta_bar),
                }
            }
        }
        g
    }

    /// Quotient by the sublattice `nx Z × ny Z`.
    pub fn torus(&self, nx: usize, ny: usize) -> Result<FiniteGraph, GraphError> {
        let nv = self.num_vertices();
        let id = |i: usize, a: i64, b: i64| {
            (a.rem_euclid(nx as i64) as usize * ny + b.rem_euclid(ny as i64) as usize) * nv + i
        };
        let mut g = FiniteGraph { pos: vec![C64::new(0.0, 0.0); nv * nx * ny], edges: vec![], outer: vec![vec![]; nv * nx * ny] };
        for a in 0..nx as i64 {
            for b in 0..ny as i64 {
                for i in 0..nv {
                    g.pos[id(i, a, b)] = self.position(VertexRef::new(i, a, b));
                }
                for e in &self.edges {
                    let (p, q) = (id(e.tail, a, b), id(e.head, a + e.shift[0], b + e.shift[1]));
                    if p == q {
                        return Err(GraphError::TorusTooSmall(nx, ny));
                    }
                    g.edges.push(FEdge { a: p, b: q, theta_bar: e.theta_bar });
                }
            }
        }
        Ok(g)
    }
}

/// Undirected edge of a finite isoradial graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FEdge {
    pub a: usize,
    pub b: usize,
    pub theta_bar: f64,
}

/// Finite piece of an isoradial graph: a torus quotient or a patch with
/// killed boundary (the half-angles of edges leaving the patch are kept so
/// vertex masses are those of the ambient graph).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteGraph {
    pub pos: Vec<C64>,
    pub edges: Vec<FEdge>,
    pub outer: Vec<Vec<f64>>,
}

impl FiniteGraph {
    pub fn len(&self) -> usize {
        self.pos.len()
    }
    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }
    /// All half-angles at each vertex, inner and outer.
    pub fn angles(&self) -> Vec<Vec<f64>> {
        let mut out = self.outer.clone();
        for e in &self.edges {
            out[e.a].push(e.theta_bar);
            out[e.b].push(e.theta_bar);
        }
        out
    }
    pub fn degree(&self, v: usize) -> usize {
        self.outer[v].len() + self.edges.iter().filter(|e| e.a == v || e.b == v).count()
    }
}
