//! Finite graphs with unit edges as quotients of their universal-cover trees.
//!
//! A geodesic in the quotient is the projection of a tree geodesic, i.e. a
//! non-backtracking edge path with fractional first and last pieces. Edges
//! carry a fixed orientation (tail → head) for offset bookkeeping; a *dart*
//! is an edge with a direction, `2e` running tail → head and `2e + 1` back.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::apartment::{ApartmentGroup, Window};
use crate::blocking::{EdgePiece, GeodesicSpace, HitParam, LightRay, LightSource, RayPath, RaySpace};
use crate::entropy::GrowthSeries;
use crate::rational::{self as q, format_rational, serde_rational, to_f64, Rational};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub name: String,
    pub tail: usize,
    pub head: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphPoint {
    Vertex {
        vertex: usize,
    },
    /// Interior point of an edge, `0 < offset < 1` from its tail.
    EdgePoint {
        edge: usize,
        #[serde(with = "serde_rational")]
        offset: Rational,
    },
}

impl GraphPoint {
    fn on_edge(&self, e: usize) -> Option<&Rational> {
        match self {
            GraphPoint::EdgePoint { edge, offset } if *edge == e => Some(offset),
            _ => None,
        }
    }

    fn is_vertex(&self, v: usize) -> bool {
        matches!(self, GraphPoint::Vertex { vertex } if *vertex == v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    #[serde(skip)]
    darts_from: Vec<Vec<usize>>,
}

impl QuotientGraph {
    /// Validates and builds a graph from vertex names and `(name, tail, head)`
    /// edges. The graph must be connected with every degree at least two.
    pub fn new(vertices: Vec<String>, edges: Vec<(String, String, String)>) -> Result<Self> {
        if vertices.is_empty() || edges.is_empty() {
            return Err(Error::InvalidGraph("need at least one vertex and one edge".into()));
        }
        let index = |name: &str| {
            vertices
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::InvalidGraph(format!("unknown vertex `{name}`")))
        };
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !seen.insert(v.clone()) {
                return Err(Error::InvalidGraph(format!("duplicate vertex `{v}`")));
            }
        }
        let mut built = Vec::with_capacity(edges.len());
        let mut names = BTreeSet::new();
        for (name, tail, head) in &edges {
            if !names.insert(name.clone()) || seen.contains(name) {
                return Err(Error::InvalidGraph(format!("duplicate name `{name}`")));
            }
            built.push(Edge { name: name.clone(), tail: index(tail)?, head: index(head)? });
        }
        let mut g = Self { vertices, edges: built, darts_from: Vec::new() };
        g.index_darts();
        g.validate()?;
        Ok(g)
    }

    fn index_darts(&mut self) {
        let mut from = vec![Vec::new(); self.vertices.len()];
        for d in 0..2 * self.edges.len() {
            from[self.origin(d)].push(d);
        }
        self.darts_from = from;
    }

    fn validate(&self) -> Result<()> {
        for (v, darts) in self.darts_from.iter().enumerate() {
            if darts.len() < 2 {
                return Err(Error::InvalidGraph(format!("vertex `{}` has degree {} < 2", self.vertices[v], darts.len())));
            }
        }
        let mut reached = vec![false; self.vertices.len()];
        let mut stack = vec![0];
        reached[0] = true;
        while let Some(v) = stack.pop() {
            for &d in &self.darts_from[v] {
                let w = self.terminus(d);
                if !reached[w] {
                    reached[w] = true;
                    stack.push(w);
                }
            }
        }
        if let Some(v) = reached.iter().position(|r| !r) {
            return Err(Error::InvalidGraph(format!("vertex `{}` is not connected to `{}`", self.vertices[v], self.vertices[0])));
        }
        Ok(())
    }

    fn named(vertices: &[&str], edges: &[(&str, &str, &str)]) -> Self {
        Self::new(
            vertices.iter().map(|s| s.to_string()).collect(),
            edges.iter().map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string())).collect(),
        )
        .expect("built-in graph is valid")
    }

    /// One vertex `v` with loops `a` and `b`.
    pub fn wedge() -> Self {
        Self::named(&["v"], &[("a", "v", "v"), ("b", "v", "v")])
    }

    /// Vertices `u`, `w` joined by edges `a`, `b`, `c`.
    pub fn theta() -> Self {
        Self::named(&["u", "w"], &[("a", "u", "w"), ("b", "u", "w"), ("c", "u", "w")])
    }

    /// Cycle of `len` edges `e0 … e{len-1}` through vertices `v0 … v{len-1}`.
    pub fn cycle(len: usize) -> Result<Self> {
        let vertices: Vec<String> = (0..len).map(|i| format!("v{i}")).collect();
        let edges = (0..len).map(|i| (format!("e{i}"), format!("v{i}"), format!("v{}", (i + 1) % len))).collect();
        Self::new(vertices, edges)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn origin(&self, d: usize) -> usize {
        let e = &self.edges[d / 2];
        if d.is_multiple_of(2) {
            e.tail
        } else {
            e.head
        }
    }

    pub fn terminus(&self, d: usize) -> usize {
        self.origin(d ^ 1)
    }

    pub fn vertex(&self, name: &str) -> Result<GraphPoint> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .map(|vertex| GraphPoint::Vertex { vertex })
            .ok_or_else(|| Error::Invalid(format!("unknown vertex `{name}`")))
    }

    /// The point at `offset ∈ [0, 1]` along edge `name`; the endpoints are
    /// canonicalized to vertices.
    pub fn edge_point(&self, name: &str, offset: Rational) -> Result<GraphPoint> {
        let edge = self
            .edges
            .iter()
            .position(|e| e.name == name)
            .ok_or_else(|| Error::Invalid(format!("unknown edge `{name}`")))?;
        self.point_on(edge, offset)
    }

    pub fn point_on(&self, edge: usize, offset: Rational) -> Result<GraphPoint> {
        if edge >= self.edges.len() {
            return Err(Error::Invalid(format!("edge index {edge} out of range")));
        }
        if offset.is_negative() || offset > Rational::one() {
            return Err(Error::Invalid(format!("offset {} outside [0, 1]", format_rational(&offset))));
        }
        Ok(if offset.is_zero() {
            GraphPoint::Vertex { vertex: self.edges[edge].tail }
        } else if offset.is_one() {
            GraphPoint::Vertex { vertex: self.edges[edge].head }
        } else {
            GraphPoint::EdgePoint { edge, offset }
        })
    }

    /// Parses `v` (vertex name) or `edge@p/q`.
    pub fn parse_point(&self, text: &str) -> Result<GraphPoint> {
        match text.split_once('@') {
            Some((edge, offset)) => self.edge_point(edge.trim(), q::parse_rational(offset)?),
            None => self.vertex(text.trim()),
        }
    }

    fn check_point(&self, p: &GraphPoint) -> Result<()> {
        match p {
            GraphPoint::Vertex { vertex } if *vertex < self.vertices.len() => Ok(()),
            GraphPoint::EdgePoint { edge, offset }
                if *edge < self.edges.len() && offset.is_positive() && offset < &Rational::one() =>
            {
                Ok(())
            }
            _ => Err(Error::Invalid(format!("point {p:?} is not a canonical point of this graph"))),
        }
    }

    fn full_piece(&self, d: usize) -> EdgePiece {
        let (from, to) = if d.is_multiple_of(2) { (0, 1) } else { (1, 0) };
        EdgePiece { edge: d / 2, from: q::int(from), to: q::int(to) }
    }

    fn horizon_limit(horizon: f64) -> Result<Rational> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Invalid(format!("horizon {horizon} must be positive and finite")));
        }
        Ok(q::from_f64(horizon).expect("finite"))
    }

    fn search(&self, x: &GraphPoint, y: &GraphPoint, horizon: f64, light: bool) -> Result<Vec<LightRay>> {
        self.check_point(x)?;
        self.check_point(y)?;
        let limit = Self::horizon_limit(horizon)?;
        let mut walk = Walk { g: self, x, y, limit, light, pieces: Vec::new(), found: Vec::new() };
        match x {
            GraphPoint::Vertex { vertex } => walk.visit(*vertex, None, Rational::zero()),
            GraphPoint::EdgePoint { edge, offset: a } => {
                let e = &self.edges[*edge];
                let one = Rational::one();
                if let Some(b) = y.on_edge(*edge) {
                    if b != a {
                        let len = (b - a).abs();
                        if len <= walk.limit {
                            walk.emit(vec![EdgePiece { edge: *edge, from: a.clone(), to: b.clone() }], len);
                        }
                    }
                }
                let passes_y = |lo: &Rational, hi: &Rational| y.on_edge(*edge).is_some_and(|b| lo < b && b < hi);
                let forward = &one - a;
                if forward <= walk.limit && !(light && passes_y(a, &one)) {
                    walk.pieces.push(EdgePiece { edge: *edge, from: a.clone(), to: one.clone() });
                    walk.visit(e.head, Some(2 * edge), forward);
                    walk.pieces.pop();
                }
                if a <= &walk.limit && !(light && passes_y(&Rational::zero(), a)) {
                    walk.pieces.push(EdgePiece { edge: *edge, from: a.clone(), to: Rational::zero() });
                    walk.visit(e.tail, Some(2 * edge + 1), a.clone());
                    walk.pieces.pop();
                }
            }
        }
        let source = self.point_label(x);
        let target = self.point_label(y);
        let mut rays: Vec<LightRay> = walk.found.into_iter().map(|(p, len)| self.make_ray(&source, &target, p, len)).collect();
        crate::blocking::sort_canonical(&mut rays);
        Ok(rays)
    }

    fn make_ray(&self, source: &str, target: &str, pieces: Vec<EdgePiece>, len: Rational) -> LightRay {
        let id = pieces
            .iter()
            .map(|p| format!("{}[{}>{}]", self.edges[p.edge].name, format_rational(&p.from), format_rational(&p.to)))
            .collect::<Vec<_>>()
            .join(" ");
        LightRay {
            id,
            space: self.tag(),
            source: source.to_string(),
            target: target.to_string(),
            length: to_f64(&len),
            length_sq: Some(&len * &len),
            path: RayPath::TreePath { pieces },
        }
    }

    /// All locally geodesic paths from `x` to `y` of length at most `horizon`.
    pub fn enumerate_geodesics(&self, x: &GraphPoint, y: &GraphPoint, horizon: f64) -> Result<Vec<LightRay>> {
        self.search(x, y, horizon, false)
    }

    /// The geodesics whose interiors avoid `x` and `y`.
    pub fn enumerate_light(&self, x: &GraphPoint, y: &GraphPoint, horizon: f64) -> Result<Vec<LightRay>> {
        self.search(x, y, horizon, true)
    }

    /// Cumulative path counts at each horizon by dynamic programming over
    /// darts (geodesics, or light rays when `light`).
    pub fn count_paths(&self, x: &GraphPoint, y: &GraphPoint, horizons: &[f64], light: bool) -> Result<Vec<u128>> {
        self.check_point(x)?;
        self.check_point(y)?;
        let t_max = *horizons.last().ok_or_else(|| Error::Invalid("no horizons".into()))?;
        let limits: Vec<Rational> = horizons.iter().map(|&h| Self::horizon_limit(h)).collect::<Result<_>>()?;
        let limit = limits.last().expect("nonempty").clone();
        let mut buckets = vec![0u128; horizons.len()];
        let mut record = |len: &Rational, count: u128| -> Result<()> {
            let idx = limits.partition_point(|h| h < len);
            if idx < buckets.len() {
                buckets[idx] = buckets[idx].checked_add(count).ok_or(q::RationalError::Overflow("path count"))?;
            }
            Ok(())
        };
        let blocked = |edge: usize| light && (x.on_edge(edge).is_some() || y.on_edge(edge).is_some());
        let n_darts = 2 * self.edges.len();

        // (length at the terminus of the current darts, counts per dart)
        let mut groups: Vec<(Rational, Vec<u128>)> = Vec::new();
        match x {
            GraphPoint::Vertex { vertex } => {
                let mut c = vec![0u128; n_darts];
                for &d in &self.darts_from[*vertex] {
                    if !blocked(d / 2) {
                        c[d] = 1;
                    }
                }
                groups.push((Rational::one(), c));
            }
            GraphPoint::EdgePoint { edge, offset: a } => {
                if let Some(b) = y.on_edge(*edge) {
                    if a != b {
                        record(&(a - b).abs(), 1)?;
                    }
                }
                let one = Rational::one();
                let y_at = y.on_edge(*edge);
                let mut fwd = vec![0u128; n_darts];
                if !(light && y_at.is_some_and(|b| b > a)) {
                    fwd[2 * edge] = 1;
                }
                groups.push((&one - a, fwd));
                let mut back = vec![0u128; n_darts];
                if !(light && y_at.is_some_and(|b| b < a)) {
                    back[2 * edge + 1] = 1;
                }
                groups.push((a.clone(), back));
            }
        }
        let _ = t_max;
        for (mut len, mut counts) in groups {
            while len <= limit && counts.iter().any(|&c| c > 0) {
                let mut next = vec![0u128; n_darts];
                for d in 0..n_darts {
                    let c = counts[d];
                    if c == 0 {
                        continue;
                    }
                    let t = self.terminus(d);
                    if y.is_vertex(t) {
                        record(&len, c)?;
                    }
                    if let GraphPoint::EdgePoint { edge: e, offset: b } = y {
                        let a = x.on_edge(*e);
                        if self.edges[*e].tail == t && d != 2 * e + 1 && !(light && a.is_some_and(|a| a < b)) {
                            record(&(&len + b), c)?;
                        }
                        if self.edges[*e].head == t && d != 2 * e && !(light && a.is_some_and(|a| a > b)) {
                            record(&(&len + (Rational::one() - b)), c)?;
                        }
                    }
                    if light && (x.is_vertex(t) || y.is_vertex(t)) {
                        continue;
                    }
                    for &d2 in &self.darts_from[t] {
                        if d2 == d ^ 1 || blocked(d2 / 2) {
                            continue;
                        }
                        next[d2] = next[d2].checked_add(c).ok_or(q::RationalError::Overflow("path count"))?;
                    }
                }
                counts = next;
                len += Rational::one();
            }
        }
        let mut total = 0u128;
        Ok(buckets
            .into_iter()
            .map(|b| {
                total += b;
                total
            })
            .collect())
    }

    /// `n_T` and `m_T` at `T = step, 2·step, …, ≤ t_max`. The injectivity
    /// radius is a declared input for graphs.
    pub fn growth_series(&self, x: &GraphPoint, y: &GraphPoint, t_max: f64, step: f64, inj: Option<f64>) -> Result<GrowthSeries> {
        if !(step > 0.0 && step <= t_max) || !t_max.is_finite() {
            return Err(Error::Invalid(format!("need 0 < step ≤ T_max, got step {step}, T_max {t_max}")));
        }
        let horizons: Vec<f64> = (1..)
            .map(|i| step * i as f64)
            .take_while(|t| *t <= t_max * (1.0 + 1e-12))
            .collect();
        let n = self.count_paths(x, y, &horizons, false)?;
        let m = self.count_paths(x, y, &horizons, true)?;
        GrowthSeries::new(self.point_label(x), self.point_label(y), horizons, n, m, inj)
    }

    /// Spectral radius of the non-backtracking dart operator by power
    /// iteration on `B + I` (the shift removes periodicity).
    pub fn growth_oracle(&self) -> Result<f64> {
        const MAX_ITER: usize = 1_000_000;
        let n = 2 * self.edges.len();
        let mut v = vec![1.0f64; n];
        let mut previous = f64::NAN;
        let mut stable = 0;
        for iteration in 1..=MAX_ITER {
            let mut w = v.clone();
            for d in 0..n {
                let t = self.terminus(d);
                for &d2 in &self.darts_from[t] {
                    if d2 != d ^ 1 {
                        w[d2] += v[d];
                    }
                }
            }
            let norm_v: f64 = v.iter().sum();
            let norm_w: f64 = w.iter().sum();
            let ratio = norm_w / norm_v;
            for x in w.iter_mut() {
                *x /= norm_w;
            }
            v = w;
            if (ratio - previous).abs() <= 1e-10 * ratio {
                stable += 1;
                if stable >= 3 {
                    return Ok(ratio - 1.0);
                }
            } else {
                stable = 0;
            }
            previous = ratio;
            if iteration == MAX_ITER {
                break;
            }
        }
        Err(Error::NonConvergence { iterations: MAX_ITER })
    }

    fn point_types(p: &GraphPoint) -> Vec<Rational> {
        match p {
            GraphPoint::Vertex { .. } => vec![Rational::zero(), Rational::one()],
            GraphPoint::EdgePoint { offset, .. } => vec![offset.clone(), Rational::one() - offset],
        }
    }

    /// Every point whose type is a rank-1 midpoint type of `(x, y)`. Edge
    /// orientation is not intrinsic, so both `t` and `1 − t` are taken for
    /// every type, and all vertices are included when a vertex type occurs.
    pub fn type_blocking_set(&self, x: &GraphPoint, y: &GraphPoint) -> Result<Vec<GraphPoint>> {
        self.check_point(x)?;
        self.check_point(y)?;
        let group = ApartmentGroup::new(vec![Rational::one()])?;
        let window = Window::new(vec![q::int(-2)], vec![q::int(2)]);
        let mut offsets = BTreeSet::new();
        for a in Self::point_types(x) {
            for b in Self::point_types(y) {
                for t in group.midpoint_types(std::slice::from_ref(&a), &[b], &window)? {
                    let t = t.0[0].clone();
                    offsets.insert(Rational::one() - &t);
                    offsets.insert(t);
                }
            }
        }
        let mut out = Vec::new();
        if offsets.contains(&Rational::zero()) {
            out.extend((0..self.vertices.len()).map(|vertex| GraphPoint::Vertex { vertex }));
        }
        for edge in 0..self.edges.len() {
            for c in &offsets {
                if c.is_positive() && c < &Rational::one() {
                    out.push(GraphPoint::EdgePoint { edge, offset: c.clone() });
                }
            }
        }
        Ok(out)
    }

    fn vertex_distances(&self, x: &GraphPoint) -> Vec<Rational> {
        let big = q::int(i64::MAX / 4);
        let mut dist = vec![big; self.vertices.len()];
        match x {
            GraphPoint::Vertex { vertex } => dist[*vertex] = Rational::zero(),
            GraphPoint::EdgePoint { edge, offset } => {
                let e = &self.edges[*edge];
                dist[e.tail] = offset.clone();
                let to_head = Rational::one() - offset;
                if to_head < dist[e.head] {
                    dist[e.head] = to_head;
                }
            }
        }
        loop {
            let mut changed = false;
            for e in &self.edges {
                for (a, b) in [(e.tail, e.head), (e.head, e.tail)] {
                    let through = &dist[a] + Rational::one();
                    if through < dist[b] {
                        dist[b] = through;
                        changed = true;
                    }
                }
            }
            if !changed {
                return dist;
            }
        }
    }

    /// Exact metric distance.
    pub fn distance_exact(&self, x: &GraphPoint, y: &GraphPoint) -> Rational {
        if x == y {
            return Rational::zero();
        }
        let dist = self.vertex_distances(x);
        match y {
            GraphPoint::Vertex { vertex } => dist[*vertex].clone(),
            GraphPoint::EdgePoint { edge, offset: b } => {
                let e = &self.edges[*edge];
                let mut best = &dist[e.tail] + b;
                let other = &dist[e.head] + (Rational::one() - b);
                if other < best {
                    best = other;
                }
                if let Some(a) = x.on_edge(*edge) {
                    let direct = (a - b).abs();
                    if direct < best {
                        best = direct;
                    }
                }
                best
            }
        }
    }

    /// Exact diameter: the distance function is piecewise linear with
    /// breakpoints on the quarter-offset grid, so the maximum is attained there.
    pub fn diameter_exact(&self) -> Rational {
        let mut grid: Vec<GraphPoint> = (0..self.vertices.len()).map(|vertex| GraphPoint::Vertex { vertex }).collect();
        for edge in 0..self.edges.len() {
            for k in 1..4 {
                grid.push(GraphPoint::EdgePoint { edge, offset: q::rat(k, 4) });
            }
        }
        let mut best = Rational::zero();
        for a in &grid {
            for b in &grid {
                let d = self.distance_exact(a, b);
                if d > best {
                    best = d;
                }
            }
        }
        best
    }

    fn pieces<'r>(&self, ray: &'r LightRay) -> Result<&'r [EdgePiece]> {
        match &ray.path {
            RayPath::TreePath { pieces } if pieces.iter().all(|p| p.edge < self.edges.len()) => Ok(pieces),
            _ => Err(Error::Invalid(format!("ray `{}` is not a path of this graph", ray.id))),
        }
    }

    /// Vertex at the end of a piece that stops on a vertex.
    fn piece_end_vertex(&self, p: &EdgePiece) -> Option<usize> {
        let e = &self.edges[p.edge];
        if p.to.is_zero() {
            Some(e.tail)
        } else if p.to.is_one() {
            Some(e.head)
        } else {
            None
        }
    }

    fn junctions(&self, pieces: &[EdgePiece]) -> Vec<usize> {
        pieces[..pieces.len().saturating_sub(1)].iter().filter_map(|p| self.piece_end_vertex(p)).collect()
    }
}

struct Walk<'a> {
    g: &'a QuotientGraph,
    x: &'a GraphPoint,
    y: &'a GraphPoint,
    limit: Rational,
    light: bool,
    pieces: Vec<EdgePiece>,
    found: Vec<(Vec<EdgePiece>, Rational)>,
}

impl Walk<'_> {
    fn emit(&mut self, pieces: Vec<EdgePiece>, len: Rational) {
        self.found.push((pieces, len));
    }

    fn visit(&mut self, w: usize, prev: Option<usize>, len: Rational) {
        let g = self.g;
        if !self.pieces.is_empty() {
            if self.y.is_vertex(w) {
                self.emit(self.pieces.clone(), len.clone());
                if self.light {
                    return;
                }
            }
            if self.light && self.x.is_vertex(w) {
                return;
            }
        }
        if let GraphPoint::EdgePoint { edge: e, offset: b } = self.y {
            let a = self.x.on_edge(*e);
            let edge = &g.edges[*e];
            if edge.tail == w && prev != Some(2 * e + 1) && !(self.light && a.is_some_and(|a| a < b)) {
                let total = &len + b;
                if total <= self.limit {
                    let mut p = self.pieces.clone();
                    p.push(EdgePiece { edge: *e, from: Rational::zero(), to: b.clone() });
                    self.emit(p, total);
                }
            }
            if edge.head == w && prev != Some(2 * e) && !(self.light && a.is_some_and(|a| a > b)) {
                let total = &len + (Rational::one() - b);
                if total <= self.limit {
                    let mut p = self.pieces.clone();
                    p.push(EdgePiece { edge: *e, from: Rational::one(), to: b.clone() });
                    self.emit(p, total);
                }
            }
        }
        let next = &len + Rational::one();
        if next > self.limit {
            return;
        }
        for i in 0..g.darts_from[w].len() {
            let d = g.darts_from[w][i];
            if prev == Some(d ^ 1) {
                continue;
            }
            if self.light && (self.x.on_edge(d / 2).is_some() || self.y.on_edge(d / 2).is_some()) {
                continue;
            }
            self.pieces.push(g.full_piece(d));
            self.visit(g.terminus(d), Some(d), next.clone());
            self.pieces.pop();
        }
    }
}

impl fmt::Display for QuotientGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self
            .edges
            .iter()
            .map(|e| format!("{}:{}-{}", e.name, self.vertices[e.tail], self.vertices[e.head]))
            .collect();
        write!(f, "graph[{}]", edges.join(","))
    }
}

fn total_length(pieces: &[EdgePiece]) -> Rational {
    pieces.iter().map(EdgePiece::length).sum()
}

impl RaySpace for QuotientGraph {
    type Point = GraphPoint;

    fn tag(&self) -> String {
        self.to_string()
    }

    fn exact(&self) -> bool {
        true
    }

    fn point_label(&self, p: &GraphPoint) -> String {
        match p {
            GraphPoint::Vertex { vertex } => self.vertices.get(*vertex).cloned().unwrap_or_else(|| format!("#{vertex}")),
            GraphPoint::EdgePoint { edge, offset } => {
                let name = self.edges.get(*edge).map_or_else(|| format!("#{edge}"), |e| e.name.clone());
                format!("{name}@{}", format_rational(offset))
            }
        }
    }

    fn interior_hits(&self, ray: &LightRay, point: &GraphPoint, _tol: f64) -> Result<Vec<HitParam>> {
        let pieces = self.pieces(ray)?;
        let total = total_length(pieces);
        if total.is_zero() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut cum = Rational::zero();
        for (i, p) in pieces.iter().enumerate() {
            if let Some(c) = point.on_edge(p.edge) {
                let (lo, hi) = if p.from < p.to { (&p.from, &p.to) } else { (&p.to, &p.from) };
                if lo < c && c < hi {
                    out.push(HitParam::exact((&cum + (c - &p.from).abs()) / &total, ray.length));
                }
            }
            cum += p.length();
            if i + 1 < pieces.len() {
                if let (Some(v), GraphPoint::Vertex { vertex }) = (self.piece_end_vertex(p), point) {
                    if v == *vertex {
                        out.push(HitParam::exact(&cum / &total, ray.length));
                    }
                }
            }
        }
        Ok(out)
    }

    fn interiors_meet(&self, a: &LightRay, b: &LightRay, _tol: f64) -> Result<bool> {
        let pa = self.pieces(a)?;
        let pb = self.pieces(b)?;
        let ja = self.junctions(pa);
        let jb = self.junctions(pb);
        if ja.iter().any(|v| jb.contains(v)) {
            return Ok(true);
        }
        for x in pa {
            for y in pb {
                if x.edge != y.edge {
                    continue;
                }
                let (xl, xh) = if x.from < x.to { (&x.from, &x.to) } else { (&x.to, &x.from) };
                let (yl, yh) = if y.from < y.to { (&y.from, &y.to) } else { (&y.to, &y.from) };
                if xl.max(yl) < xh.min(yh) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

impl LightSource for QuotientGraph {
    fn enumerate_light(&self, x: &GraphPoint, y: &GraphPoint, horizon: f64) -> Result<Vec<LightRay>> {
        QuotientGraph::enumerate_light(self, x, y, horizon)
    }

    fn distance(&self, x: &GraphPoint, y: &GraphPoint) -> Result<f64> {
        Ok(to_f64(&self.distance_exact(x, y)))
    }

    fn diameter(&self) -> Result<f64> {
        Ok(to_f64(&self.diameter_exact()))
    }

    fn same_point(&self, x: &GraphPoint, y: &GraphPoint) -> bool {
        x == y
    }

    fn candidate_blockers(&self, x: &GraphPoint, y: &GraphPoint) -> Result<Option<Vec<GraphPoint>>> {
        self.type_blocking_set(x, y).map(Some)
    }
}

impl GeodesicSpace for QuotientGraph {
    fn enumerate_geodesics(&self, x: &GraphPoint, y: &GraphPoint, horizon: f64) -> Result<Vec<LightRay>> {
        QuotientGraph::enumerate_geodesics(self, x, y, horizon)
    }

    fn sub_ray(&self, ray: &LightRay, from: &Rational, to: &Rational, source: &str, target: &str) -> Result<LightRay> {
        if !(from < to) {
            return Err(Error::Invalid("sub-ray fractions must satisfy from < to".into()));
        }
        let pieces = self.pieces(ray)?;
        let total = total_length(pieces);
        let s0 = from * &total;
        let s1 = to * &total;
        let mut out = Vec::new();
        let mut cum = Rational::zero();
        for p in pieces {
            let len = p.length();
            let lo = if s0 > cum { s0.clone() } else { cum.clone() };
            let end = &cum + &len;
            let hi = if s1 < end { s1.clone() } else { end.clone() };
            if lo < hi {
                let dir = if p.to > p.from { Rational::one() } else { -Rational::one() };
                out.push(EdgePiece {
                    edge: p.edge,
                    from: &p.from + &dir * (&lo - &cum),
                    to: &p.from + &dir * (&hi - &cum),
                });
            }
            cum = end;
        }
        Ok(self.make_ray(source, target, out, s1 - s0))
    }

    fn same_geodesic(&self, a: &LightRay, b: &LightRay) -> Result<bool> {
        Ok(self.pieces(a)? == self.pieces(b)?)
    }

    fn project_to_light(&self, segment: &LightRay, x: &GraphPoint, y: &GraphPoint) -> Result<LightRay> {
        let mut x_visits = vec![Rational::zero()];
        x_visits.extend(self.interior_hits(segment, x, 0.0)?.into_iter().filter_map(|h| h.fraction));
        let t1 = x_visits.into_iter().max().expect("nonempty");
        let mut y_visits: Vec<Rational> =
            self.interior_hits(segment, y, 0.0)?.into_iter().filter_map(|h| h.fraction).collect();
        y_visits.push(Rational::one());
        let t2 = y_visits
            .into_iter()
            .filter(|t| t > &t1)
            .min()
            .ok_or_else(|| Error::ProjectionFailure(segment.id.clone()))?;
        self.sub_ray(segment, &t1, &t2, &segment.source, &segment.target)
    }
}
