//! Mesh generators: structured disks (Euclidean chart or Poincare chart),
//! dumbbells, and small hand-built fixtures for exhaustive subset
//! enumeration.
//!
//! All generators start from a coarse seed and refine 1->4 by edge midpoints;
//! midpoints of boundary edges that carry a circular-arc tag are projected
//! back onto their circle. The coordinate axes of the disk seed are mesh
//! lines at every level, so half-plane cuts through the center are exact
//! edge paths.

use super::{ConformalKind, Geometry, MeshError, Metric, WeightedMesh};
use crate::scalar::{cast, Real};
use std::collections::HashMap;

struct Builder<T> {
    vertices: Vec<[T; 2]>,
    triangles: Vec<[usize; 3]>,
    circles: Vec<([T; 2], T)>,
    /// boundary edge (sorted pair) -> circle index for midpoint projection
    edge_curve: HashMap<(usize, usize), usize>,
}

impl<T: Real> Builder<T> {
    fn new() -> Self {
        Builder {
            vertices: Vec::new(),
            triangles: Vec::new(),
            circles: Vec::new(),
            edge_curve: HashMap::new(),
        }
    }

    fn tag(&mut self, a: usize, b: usize, circle: usize) {
        self.edge_curve.insert((a.min(b), a.max(b)), circle);
    }

    fn refine(&self) -> Self {
        let mut out = Builder::<T> {
            vertices: self.vertices.clone(),
            triangles: Vec::with_capacity(self.triangles.len() * 4),
            circles: self.circles.clone(),
            edge_curve: HashMap::new(),
        };
        let mut midpoint_of: HashMap<(usize, usize), usize> = HashMap::new();
        let half = cast::<T>(0.5);
        for tri in &self.triangles {
            let mut mids = [0usize; 3];
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                let m = *midpoint_of.entry(key).or_insert_with(|| {
                    let pa = self.vertices[a];
                    let pb = self.vertices[b];
                    let mut p = [(pa[0] + pb[0]) * half, (pa[1] + pb[1]) * half];
                    if let Some(&c) = self.edge_curve.get(&key) {
                        let (center, radius) = self.circles[c];
                        let dx = p[0] - center[0];
                        let dy = p[1] - center[1];
                        let norm = (dx * dx + dy * dy).sqrt();
                        p = [center[0] + radius * dx / norm, center[1] + radius * dy / norm];
                    }
                    out.vertices.push(p);
                    out.vertices.len() - 1
                });
                mids[k] = m;
                if let Some(&c) = self.edge_curve.get(&key) {
                    out.edge_curve.insert((a.min(m), a.max(m)), c);
                    out.edge_curve.insert((b.min(m), b.max(m)), c);
                }
            }
            let [a, b, c] = *tri;
            let [mab, mbc, mca] = mids;
            out.triangles.push([a, mab, mca]);
            out.triangles.push([mab, b, mbc]);
            out.triangles.push([mca, mbc, c]);
            out.triangles.push([mab, mbc, mca]);
        }
        out
    }

    fn refine_times(mut self, level: usize) -> Self {
        for _ in 0..level {
            self = self.refine();
        }
        self
    }
}

/// Builds the final mesh with unit weights from raw builder parts.
fn finalize<T: Real>(b: Builder<T>, metric: Metric) -> Result<WeightedMesh<T>, MeshError> {
    let n = b.vertices.len();
    // Derive boundary vertices from edge incidence to set beta.
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in &b.triangles {
        for k in 0..3 {
            let a = tri[k];
            let bb = tri[(k + 1) % 3];
            *count.entry((a.min(bb), a.max(bb))).or_insert(0) += 1;
        }
    }
    let mut beta = vec![T::zero(); n];
    for (&(a, bb), &c) in &count {
        if c == 1 {
            beta[a] = T::one();
            beta[bb] = T::one();
        }
    }
    WeightedMesh::new(b.vertices, b.triangles, None, vec![T::one(); n], beta, metric)
}

/// Triangulates the unit disk (Euclidean) or the hyperbolic unit ball in the
/// Poincare chart (a chart disk of radius tanh(1/2) with the Poincare
/// conformal factor). The vertex count grows by roughly 4x per level.
pub fn generate_disk_mesh<T: Real>(
    refinement_level: usize,
    geometry: Geometry,
) -> Result<WeightedMesh<T>, MeshError> {
    let (radius, metric) = match geometry {
        Geometry::Euclidean => (T::one(), Metric::Euclidean),
        Geometry::Hyperbolic => (
            cast::<T>(0.5).tanh(),
            Metric::Conformal(ConformalKind::Poincare),
        ),
    };
    let mut b = Builder::<T>::new();
    b.vertices.push([T::zero(), T::zero()]);
    let k8 = 8usize;
    for m in 0..k8 {
        let theta = cast::<T>(2.0) * T::PI() * cast::<T>(m as f64) / cast::<T>(k8 as f64);
        b.vertices.push([radius * theta.cos(), radius * theta.sin()]);
    }
    b.circles.push(([T::zero(), T::zero()], radius));
    for m in 0..k8 {
        let i = 1 + m;
        let j = 1 + (m + 1) % k8;
        b.triangles.push([0, i, j]);
        b.tag(i, j, 0);
    }
    finalize(b.refine_times(refinement_level), metric)
}

/// Two disks of the given radius joined by a rectangular neck. The neck has
/// full width `neck_width` and length `neck_length`; the disk segments meet
/// the neck exactly at its corners, producing a single boundary loop.
pub fn generate_dumbbell_mesh<T: Real>(
    ball_radius: T,
    neck_width: T,
    neck_length: T,
    refinement_level: usize,
) -> Result<WeightedMesh<T>, MeshError> {
    if !(ball_radius > T::zero()) || !(neck_length > T::zero()) {
        return Err(MeshError::BadParameters("radius and neck length must be positive".into()));
    }
    if !(neck_width > T::zero()) || !(neck_width < ball_radius) {
        return Err(MeshError::BadParameters(
            "neck width must satisfy 0 < width < ball radius".into(),
        ));
    }
    let r = ball_radius;
    let w2 = neck_width / cast::<T>(2.0);
    let l2 = neck_length / cast::<T>(2.0);
    let d = (r * r - w2 * w2).sqrt();
    let cx = l2 + d;

    let mut b = Builder::<T>::new();
    // neck grid, nb blocks along x
    let ratio = (neck_length / neck_width).to_f64().unwrap();
    let nb = (ratio.round() as usize).clamp(1, 32);
    let mut bottom = Vec::with_capacity(nb + 1);
    let mut top = Vec::with_capacity(nb + 1);
    for i in 0..=nb {
        let x = -l2 + neck_length * cast::<T>(i as f64) / cast::<T>(nb as f64);
        bottom.push(b.vertices.len());
        b.vertices.push([x, -w2]);
        top.push(b.vertices.len());
        b.vertices.push([x, w2]);
    }
    for i in 0..nb {
        b.triangles.push([bottom[i], bottom[i + 1], top[i + 1]]);
        b.triangles.push([bottom[i], top[i + 1], top[i]]);
    }
    let (cb_r, ct_r) = (bottom[nb], top[nb]);
    let (cb_l, ct_l) = (bottom[0], top[0]);

    let psi = w2.to_f64().unwrap().atan2(d.to_f64().unwrap());
    let segments = 8usize;

    // right ball: arc from -(pi-psi) to +(pi-psi) through angle 0
    let right_circle = b.circles.len();
    b.circles.push(([cx, T::zero()], r));
    let mut right_arc = vec![cb_r];
    let span = 2.0 * (std::f64::consts::PI - psi);
    for s in 1..segments {
        let theta = -(std::f64::consts::PI - psi) + span * s as f64 / segments as f64;
        right_arc.push(b.vertices.len());
        b.vertices.push([cx + r * cast::<T>(theta.cos()), r * cast::<T>(theta.sin())]);
    }
    right_arc.push(ct_r);
    let o_r = b.vertices.len();
    b.vertices.push([cx, T::zero()]);
    for s in 0..segments {
        b.triangles.push([o_r, right_arc[s], right_arc[s + 1]]);
        b.tag(right_arc[s], right_arc[s + 1], right_circle);
    }
    b.triangles.push([cb_r, o_r, ct_r]);

    // left ball: arc from psi to 2pi - psi through angle pi
    let left_circle = b.circles.len();
    b.circles.push(([-cx, T::zero()], r));
    let mut left_arc = vec![ct_l];
    let span = 2.0 * (std::f64::consts::PI - psi);
    for s in 1..segments {
        let theta = psi + span * s as f64 / segments as f64;
        left_arc.push(b.vertices.len());
        b.vertices.push([-cx + r * cast::<T>(theta.cos()), r * cast::<T>(theta.sin())]);
    }
    left_arc.push(cb_l);
    let o_l = b.vertices.len();
    b.vertices.push([-cx, T::zero()]);
    for s in 0..segments {
        b.triangles.push([o_l, left_arc[s], left_arc[s + 1]]);
        b.tag(left_arc[s], left_arc[s + 1], left_circle);
    }
    b.triangles.push([o_l, cb_l, ct_l]);

    finalize(b.refine_times(refinement_level), Metric::Euclidean)
}

/// Fan triangulation of the unit disk with `n` wedges (`n` triangles). Used
/// for exhaustive subset enumeration, which needs tiny triangle counts.
pub fn wedge_disk<T: Real>(n: usize) -> Result<WeightedMesh<T>, MeshError> {
    if n < 3 {
        return Err(MeshError::BadParameters("wedge disk needs at least 3 wedges".into()));
    }
    let mut b = Builder::<T>::new();
    b.vertices.push([T::zero(), T::zero()]);
    for m in 0..n {
        let theta = cast::<T>(2.0) * T::PI() * cast::<T>(m as f64) / cast::<T>(n as f64);
        b.vertices.push([theta.cos(), theta.sin()]);
    }
    for m in 0..n {
        b.triangles.push([0, 1 + m, 1 + (m + 1) % n]);
    }
    finalize(b, Metric::Euclidean)
}

/// The unit square split along one diagonal: the smallest valid mesh.
pub fn unit_square<T: Real>() -> Result<WeightedMesh<T>, MeshError> {
    let mut b = Builder::<T>::new();
    b.vertices = vec![
        [T::zero(), T::zero()],
        [T::one(), T::zero()],
        [T::one(), T::one()],
        [T::zero(), T::one()],
    ];
    b.triangles = vec![[0, 1, 2], [0, 2, 3]];
    finalize(b, Metric::Euclidean)
}

/// Asymmetric dumbbell analogue: one ball replaced by a square of equal
/// area, 14 triangles. The bulk and combined smallness restrictions select
/// different sides of the neck here, so the restriction variants of the
/// Cheeger constants genuinely differ.
pub fn square_disk_dumbbell<T: Real>() -> Result<WeightedMesh<T>, MeshError> {
    let r = T::one();
    let w2 = cast::<T>(0.25);
    let l2 = cast::<T>(0.5);
    let d = (r * r - w2 * w2).sqrt();
    let cx = l2 + d;
    let s2 = cast::<T>(std::f64::consts::PI.sqrt() / 2.0); // half side of the square

    let mut b = Builder::<T>::new();
    // neck corners
    let cb_l = 0;
    let ct_l = 1;
    let cb_r = 2;
    let ct_r = 3;
    b.vertices.push([-l2, -w2]);
    b.vertices.push([-l2, w2]);
    b.vertices.push([l2, -w2]);
    b.vertices.push([l2, w2]);
    b.triangles.push([cb_l, cb_r, ct_r]);
    b.triangles.push([cb_l, ct_r, ct_l]);

    // right: disk segment, 5 arc pieces + chord triangle
    let circle = b.circles.len();
    b.circles.push(([cx, T::zero()], r));
    let psi = w2.to_f64().unwrap().atan2(d.to_f64().unwrap());
    let segments = 5usize;
    let span = 2.0 * (std::f64::consts::PI - psi);
    let mut arc = vec![cb_r];
    for s in 1..segments {
        let theta = -(std::f64::consts::PI - psi) + span * s as f64 / segments as f64;
        arc.push(b.vertices.len());
        b.vertices.push([cx + r * cast::<T>(theta.cos()), r * cast::<T>(theta.sin())]);
    }
    arc.push(ct_r);
    let o_r = b.vertices.len();
    b.vertices.push([cx, T::zero()]);
    for s in 0..segments {
        b.triangles.push([o_r, arc[s], arc[s + 1]]);
        b.tag(arc[s], arc[s + 1], circle);
    }
    b.triangles.push([cb_r, o_r, ct_r]);

    // left: square of side 2*s2 fanned from its center; its right side is
    // split by the neck corner vertices
    let xl = -l2 - s2 - s2; // far side
    let o_l = b.vertices.len();
    b.vertices.push([-l2 - s2, T::zero()]);
    let sq_br = b.vertices.len();
    b.vertices.push([-l2, -s2]);
    let sq_tr = b.vertices.len();
    b.vertices.push([-l2, s2]);
    let sq_bl = b.vertices.len();
    b.vertices.push([xl, -s2]);
    let sq_tl = b.vertices.len();
    b.vertices.push([xl, s2]);
    // perimeter counterclockwise starting at bottom-right
    let perim = [sq_br, cb_l, ct_l, sq_tr, sq_tl, sq_bl];
    for i in 0..perim.len() {
        b.triangles.push([o_l, perim[i], perim[(i + 1) % perim.len()]]);
    }
    finalize(b, Metric::Euclidean)
}
