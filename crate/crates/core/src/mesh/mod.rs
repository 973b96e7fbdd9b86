//! Weighted triangulated planar domains.
//!
//! A [`WeightedMesh`] carries chart coordinates, a triangulation with
//! counterclockwise orientation, ordered boundary loops, a per-vertex bulk
//! weight `alpha` (density against the area measure) and a per-boundary-vertex
//! weight `beta` (density against arclength). The metric is either the chart
//! metric itself or a conformal rescaling of it; all measured quantities
//! (areas, lengths, subset measures) refer to the metric.
//!
//! Weights enter every measure through per-simplex vertex means. That choice
//! makes the complementation identities of subset measures exact, which the
//! Cheeger-constant orderings rely on.

mod generators;
mod io;

pub use generators::{
    generate_disk_mesh, generate_dumbbell_mesh, square_disk_dumbbell, unit_square, wedge_disk,
};
pub use io::{mesh_from_json, mesh_hash, mesh_to_json};

use crate::scalar::{cast, Real};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("mesh has no triangles")]
    Empty,
    #[error("triangle {tri} references vertex {vertex} out of range")]
    BadIndex { tri: usize, vertex: usize },
    #[error("triangle {tri} has non-positive chart area {area}")]
    NonPositiveArea { tri: usize, area: f64 },
    #[error("edge ({a},{b}) is shared by {count} triangles")]
    NonManifoldEdge { a: usize, b: usize, count: usize },
    #[error("boundary vertex {vertex} has {count} incident boundary edges")]
    OpenBoundary { vertex: usize, count: usize },
    #[error("supplied boundary loops do not match the triangulation boundary")]
    LoopMismatch,
    #[error("negative weight at vertex {vertex}")]
    NegativeWeight { vertex: usize },
    #[error("beta weight given at interior vertex {vertex}")]
    InteriorBeta { vertex: usize },
    #[error("alpha vanishes on all vertices of triangle {tri}")]
    ZeroAlphaTriangle { tri: usize },
    #[error("beta vanishes on both endpoints of boundary edge ({a},{b})")]
    ZeroBetaEdge { a: usize, b: usize },
    #[error("vertex {vertex} lies outside the conformal chart")]
    OutsideChart { vertex: usize },
    #[error("boundary edge ({a},{b}) has zero length")]
    DegenerateBoundaryEdge { a: usize, b: usize },
    #[error("total weighted measure is zero; cannot normalize")]
    ZeroTotalMeasure,
    #[error("subset contains invalid or duplicate triangle index {index}")]
    InvalidSubset { index: usize },
    #[error("invalid generator parameters: {0}")]
    BadParameters(String),
    #[error("mesh json: {0}")]
    Json(String),
}

/// Geometry selector for the disk generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Geometry {
    Euclidean,
    Hyperbolic,
}

/// Named conformal factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConformalKind {
    /// Poincare disk factor 2/(1-|x|^2): lengths scale by it, areas by its
    /// square.
    Poincare,
}

impl ConformalKind {
    pub fn factor<T: Real>(&self, p: [T; 2]) -> T {
        match self {
            ConformalKind::Poincare => {
                let r2 = p[0] * p[0] + p[1] * p[1];
                cast::<T>(2.0) / (T::one() - r2)
            }
        }
    }
}

/// Metric descriptor of the chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    Euclidean,
    Conformal(ConformalKind),
}

#[derive(Debug, Clone, Copy)]
pub struct Edge {
    /// endpoint vertices, sorted
    pub v: [usize; 2],
    /// adjacent triangles; `tris[1] == usize::MAX` on the boundary
    pub tris: [usize; 2],
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.tris[1] == usize::MAX
    }
}

/// Derived connectivity, built once at construction.
#[derive(Debug, Clone)]
pub struct Topology {
    pub edges: Vec<Edge>,
    pub interior_edges: Vec<usize>,
    pub boundary_edges: Vec<usize>,
    pub is_boundary_vertex: Vec<bool>,
    /// for each boundary vertex, the two incident boundary edge indices
    pub boundary_edges_at_vertex: Vec<[usize; 2]>,
}

#[derive(Debug, Clone)]
pub struct WeightedMesh<T> {
    vertices: Vec<[T; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_loops: Vec<Vec<usize>>,
    alpha: Vec<T>,
    beta: Vec<T>,
    metric: Metric,
    metric_scale: T,
    topo: Topology,
}

/// The four weighted measures of a triangle subset A:
/// bulk |A|_a, interior cut |d_I A|_a, exterior arc |d_E A|_b and the
/// endpoint count |dd_E A|_b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetMeasures<T> {
    pub bulk: T,
    pub interior_cut: T,
    pub exterior_arc: T,
    pub arc_endpoints: T,
}

/// A set of triangles of a parent mesh.
#[derive(Debug, Clone)]
pub struct TriangleSubset<'a, T> {
    mesh: &'a WeightedMesh<T>,
    members: Vec<usize>,
    mask: Vec<bool>,
}

impl<'a, T: Real> TriangleSubset<'a, T> {
    pub fn new(mesh: &'a WeightedMesh<T>, members: &[usize]) -> Result<Self, MeshError> {
        let mut mask = vec![false; mesh.num_triangles()];
        for &t in members {
            if t >= mesh.num_triangles() || mask[t] {
                return Err(MeshError::InvalidSubset { index: t });
            }
            mask[t] = true;
        }
        let mut members = members.to_vec();
        members.sort_unstable();
        Ok(TriangleSubset { mesh, members, mask })
    }

    pub fn from_mask(mesh: &'a WeightedMesh<T>, mask: &[bool]) -> Self {
        assert_eq!(mask.len(), mesh.num_triangles());
        let members = mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect();
        TriangleSubset { mesh, members, mask: mask.to_vec() }
    }

    pub fn mesh(&self) -> &'a WeightedMesh<T> {
        self.mesh
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn complement(&self) -> TriangleSubset<'a, T> {
        let mask: Vec<bool> = self.mask.iter().map(|&m| !m).collect();
        TriangleSubset::from_mask(self.mesh, &mask)
    }

    pub fn measures(&self) -> SubsetMeasures<T> {
        self.mesh.subset_measures(self)
    }
}

impl<T: Real> WeightedMesh<T> {
    /// Builds and validates a mesh. When `boundary_loops` is `None` the loops
    /// are derived from the triangulation; otherwise the supplied loops are
    /// checked against the derived boundary.
    pub fn new(
        vertices: Vec<[T; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_loops: Option<Vec<Vec<usize>>>,
        alpha: Vec<T>,
        beta: Vec<T>,
        metric: Metric,
    ) -> Result<Self, MeshError> {
        Self::with_scale(vertices, triangles, boundary_loops, alpha, beta, metric, T::one())
    }

    fn with_scale(
        vertices: Vec<[T; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_loops: Option<Vec<Vec<usize>>>,
        alpha: Vec<T>,
        beta: Vec<T>,
        metric: Metric,
        metric_scale: T,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let n = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(MeshError::BadIndex { tri: t, vertex: v });
                }
            }
        }
        if let Metric::Conformal(_) = metric {
            for (i, p) in vertices.iter().enumerate() {
                let r2 = p[0] * p[0] + p[1] * p[1];
                if r2 >= T::one() {
                    return Err(MeshError::OutsideChart { vertex: i });
                }
            }
        }
        let topo = build_topology(n, &triangles)?;
        let derived_loops = derive_loops(&topo)?;
        let loops = match boundary_loops {
            None => derived_loops,
            Some(given) => {
                if !loops_match(&given, &derived_loops) {
                    return Err(MeshError::LoopMismatch);
                }
                given
            }
        };
        let mesh = WeightedMesh {
            vertices,
            triangles,
            boundary_loops: loops,
            alpha,
            beta,
            metric,
            metric_scale,
            topo,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<(), MeshError> {
        if self.alpha.len() != self.vertices.len() || self.beta.len() != self.vertices.len() {
            return Err(MeshError::Json("weight vector length mismatch".into()));
        }
        for (t, _) in self.triangles.iter().enumerate() {
            let a = self.chart_area(t);
            if a <= T::zero() {
                return Err(MeshError::NonPositiveArea {
                    tri: t,
                    area: a.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        for (i, &a) in self.alpha.iter().enumerate() {
            if a < T::zero() {
                return Err(MeshError::NegativeWeight { vertex: i });
            }
        }
        for (i, &b) in self.beta.iter().enumerate() {
            if b < T::zero() {
                return Err(MeshError::NegativeWeight { vertex: i });
            }
            if b > T::zero() && !self.topo.is_boundary_vertex[i] {
                return Err(MeshError::InteriorBeta { vertex: i });
            }
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().all(|&v| self.alpha[v] == T::zero()) {
                return Err(MeshError::ZeroAlphaTriangle { tri: t });
            }
        }
        for &e in &self.topo.boundary_edges {
            let [a, b] = self.topo.edges[e].v;
            if self.beta[a] == T::zero() && self.beta[b] == T::zero() {
                return Err(MeshError::ZeroBetaEdge { a, b });
            }
            if self.chart_edge_length(a, b) <= T::zero() {
                return Err(MeshError::DegenerateBoundaryEdge { a, b });
            }
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.boundary_loops
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn beta(&self) -> &[T] {
        &self.beta
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn metric_scale(&self) -> T {
        self.metric_scale
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.topo.is_boundary_vertex[v]
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.num_vertices()).filter(|&v| self.topo.is_boundary_vertex[v]).collect()
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.num_vertices()).filter(|&v| !self.topo.is_boundary_vertex[v]).collect()
    }

    fn conformal_factor(&self, p: [T; 2]) -> T {
        match self.metric {
            Metric::Euclidean => T::one(),
            Metric::Conformal(kind) => kind.factor(p),
        }
    }

    pub fn chart_area(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        let ux = pb[0] - pa[0];
        let uy = pb[1] - pa[1];
        let vx = pc[0] - pa[0];
        let vy = pc[1] - pa[1];
        (ux * vy - uy * vx) / cast::<T>(2.0)
    }

    fn chart_edge_length(&self, a: usize, b: usize) -> T {
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let dx = pb[0] - pa[0];
        let dy = pb[1] - pa[1];
        (dx * dx + dy * dy).sqrt()
    }

    pub fn centroid(&self, t: usize) -> [T; 2] {
        let [a, b, c] = self.triangles[t];
        let third = T::one() / cast::<T>(3.0);
        [
            (self.vertices[a][0] + self.vertices[b][0] + self.vertices[c][0]) * third,
            (self.vertices[a][1] + self.vertices[b][1] + self.vertices[c][1]) * third,
        ]
    }

    fn midpoint(&self, a: usize, b: usize) -> [T; 2] {
        let half = cast::<T>(0.5);
        [
            (self.vertices[a][0] + self.vertices[b][0]) * half,
            (self.vertices[a][1] + self.vertices[b][1]) * half,
        ]
    }

    /// Metric area of a triangle. The conformal factor is evaluated at the
    /// chart centroid, which is second-order consistent.
    pub fn triangle_area(&self, t: usize) -> T {
        let phi = self.conformal_factor(self.centroid(t));
        self.chart_area(t) * phi * phi * self.metric_scale * self.metric_scale
    }

    /// Metric length of an edge; conformal factor at the chart midpoint.
    pub fn edge_length(&self, a: usize, b: usize) -> T {
        let phi = self.conformal_factor(self.midpoint(a, b));
        self.chart_edge_length(a, b) * phi * self.metric_scale
    }

    pub fn mean_alpha(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t];
        (self.alpha[a] + self.alpha[b] + self.alpha[c]) / cast::<T>(3.0)
    }

    pub fn mean_beta_edge(&self, a: usize, b: usize) -> T {
        (self.beta[a] + self.beta[b]) / cast::<T>(2.0)
    }

    /// |Omega|_alpha: total alpha-weighted metric area.
    pub fn bulk_measure(&self) -> T {
        (0..self.num_triangles()).map(|t| self.triangle_area(t) * self.mean_alpha(t)).sum()
    }

    /// |dOmega|_beta: total beta-weighted metric boundary length.
    pub fn boundary_measure(&self) -> T {
        self.topo
            .boundary_edges
            .iter()
            .map(|&e| {
                let [a, b] = self.topo.edges[e].v;
                self.edge_length(a, b) * self.mean_beta_edge(a, b)
            })
            .sum()
    }

    /// Total metric area, unweighted.
    pub fn total_area(&self) -> T {
        (0..self.num_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// Total metric boundary length, unweighted.
    pub fn total_boundary_length(&self) -> T {
        self.topo
            .boundary_edges
            .iter()
            .map(|&e| {
                let [a, b] = self.topo.edges[e].v;
                self.edge_length(a, b)
            })
            .sum()
    }

    pub fn subset(&self, members: &[usize]) -> Result<TriangleSubset<'_, T>, MeshError> {
        TriangleSubset::new(self, members)
    }

    /// The four measures of a triangle subset; see [`SubsetMeasures`].
    pub fn subset_measures(&self, subset: &TriangleSubset<'_, T>) -> SubsetMeasures<T> {
        let mask = subset.mask();
        let mut bulk = T::zero();
        for &t in subset.members() {
            bulk += self.triangle_area(t) * self.mean_alpha(t);
        }
        let mut interior_cut = T::zero();
        for &e in &self.topo.interior_edges {
            let edge = self.topo.edges[e];
            if mask[edge.tris[0]] != mask[edge.tris[1]] {
                let [a, b] = edge.v;
                let mean_alpha = (self.alpha[a] + self.alpha[b]) / cast::<T>(2.0);
                interior_cut += self.edge_length(a, b) * mean_alpha;
            }
        }
        let mut exterior_arc = T::zero();
        for &e in &self.topo.boundary_edges {
            let edge = self.topo.edges[e];
            if mask[edge.tris[0]] {
                let [a, b] = edge.v;
                exterior_arc += self.edge_length(a, b) * self.mean_beta_edge(a, b);
            }
        }
        let mut arc_endpoints = T::zero();
        for (v, flag) in self.topo.is_boundary_vertex.iter().enumerate() {
            if !flag {
                continue;
            }
            let [e1, e2] = self.topo.boundary_edges_at_vertex[v];
            let m1 = mask[self.topo.edges[e1].tris[0]];
            let m2 = mask[self.topo.edges[e2].tris[0]];
            if m1 != m2 {
                arc_endpoints += self.beta[v];
            }
        }
        SubsetMeasures { bulk, interior_cut, exterior_arc, arc_endpoints }
    }

    /// Rescales both weights by the same constant so the total measure is 1.
    pub fn normalize_weights(&self) -> Result<Self, MeshError> {
        let total = self.bulk_measure() + self.boundary_measure();
        if !(total > T::zero()) {
            return Err(MeshError::ZeroTotalMeasure);
        }
        let c = T::one() / total;
        let mut out = self.clone();
        for a in &mut out.alpha {
            *a = *a * c;
        }
        for b in &mut out.beta {
            *b = *b * c;
        }
        Ok(out)
    }

    pub fn is_normalized(&self, tol: T) -> bool {
        ((self.bulk_measure() + self.boundary_measure()) - T::one()).abs() <= tol
    }

    /// Multiplies all metric lengths by `factor` (areas by its square).
    /// Weights are untouched; any re-normalization is the caller's choice.
    pub fn scale_metric(&self, factor: T) -> Self {
        assert!(factor > T::zero(), "metric scale factor must be positive");
        let mut out = self.clone();
        out.metric_scale = self.metric_scale * factor;
        out
    }

    /// Replaces the weights, revalidating.
    pub fn with_weights(&self, alpha: Vec<T>, beta: Vec<T>) -> Result<Self, MeshError> {
        let mut out = self.clone();
        out.alpha = alpha;
        out.beta = beta;
        out.validate()?;
        Ok(out)
    }

    pub(crate) fn from_parts_with_scale(
        vertices: Vec<[T; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_loops: Option<Vec<Vec<usize>>>,
        alpha: Vec<T>,
        beta: Vec<T>,
        metric: Metric,
        metric_scale: T,
    ) -> Result<Self, MeshError> {
        Self::with_scale(vertices, triangles, boundary_loops, alpha, beta, metric, metric_scale)
    }
}

fn build_topology(num_vertices: usize, triangles: &[[usize; 3]]) -> Result<Topology, MeshError> {
    use std::collections::HashMap;
    let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            let key = (a.min(b), a.max(b));
            match edge_map.get(&key) {
                None => {
                    edge_map.insert(key, edges.len());
                    edges.push(Edge { v: [key.0, key.1], tris: [t, usize::MAX] });
                }
                Some(&e) => {
                    if edges[e].tris[1] != usize::MAX {
                        return Err(MeshError::NonManifoldEdge { a: key.0, b: key.1, count: 3 });
                    }
                    edges[e].tris[1] = t;
                }
            }
        }
    }
    let mut interior_edges = Vec::new();
    let mut boundary_edges = Vec::new();
    let mut is_boundary_vertex = vec![false; num_vertices];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); num_vertices];
    for (e, edge) in edges.iter().enumerate() {
        if edge.is_boundary() {
            boundary_edges.push(e);
            for &v in &edge.v {
                is_boundary_vertex[v] = true;
                incident[v].push(e);
            }
        } else {
            interior_edges.push(e);
        }
    }
    let mut boundary_edges_at_vertex = vec![[usize::MAX; 2]; num_vertices];
    for v in 0..num_vertices {
        if is_boundary_vertex[v] {
            if incident[v].len() != 2 {
                return Err(MeshError::OpenBoundary { vertex: v, count: incident[v].len() });
            }
            boundary_edges_at_vertex[v] = [incident[v][0], incident[v][1]];
        }
    }
    Ok(Topology {
        edges,
        interior_edges,
        boundary_edges,
        is_boundary_vertex,
        boundary_edges_at_vertex,
    })
}

/// Chains the boundary edges into closed vertex cycles.
fn derive_loops(topo: &Topology) -> Result<Vec<Vec<usize>>, MeshError> {
    let mut used = vec![false; topo.edges.len()];
    let mut loops = Vec::new();
    for &start_edge in &topo.boundary_edges {
        if used[start_edge] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut v = topo.edges[start_edge].v[0];
        let mut e = start_edge;
        loop {
            used[e] = true;
            cycle.push(v);
            let [a, b] = topo.edges[e].v;
            let next_v = if a == v { b } else { a };
            let [f1, f2] = topo.boundary_edges_at_vertex[next_v];
            let next_e = [f1, f2].into_iter().find(|&f| f != e && !used[f]);
            v = next_v;
            match next_e {
                Some(f) => e = f,
                None => break,
            }
        }
        loops.push(cycle);
    }
    Ok(loops)
}

/// Two loop sets match when they cover the same undirected edge multiset.
fn loops_match(given: &[Vec<usize>], derived: &[Vec<usize>]) -> bool {
    fn edge_set(loops: &[Vec<usize>]) -> Option<std::collections::BTreeSet<(usize, usize)>> {
        let mut set = std::collections::BTreeSet::new();
        for cycle in loops {
            if cycle.len() < 3 {
                return None;
            }
            for i in 0..cycle.len() {
                let a = cycle[i];
                let b = cycle[(i + 1) % cycle.len()];
                if !set.insert((a.min(b), a.max(b))) {
                    return None; // repeated edge
                }
            }
        }
        Some(set)
    }
    match (edge_set(given), edge_set(derived)) {
        (Some(g), Some(d)) => g == d,
        _ => false,
    }
}
