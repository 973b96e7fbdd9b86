//! Cheeger-type constants of weighted meshes.
//!
//! Seven ratio functionals are covered. With A, B, C triangle subsets and
//! |.|_a, |.|_b the weighted measures of [`crate::mesh::SubsetMeasures`]:
//!
//! * `HC`: |d_I A|_a / |A|_a — the classical constant;
//! * `HJ`: |d_I A|_a / |d_E A|_b — the trace (Steklov) constant;
//! * `HB`: |d_I A|_a / (|A|_a + |d_E A|_b) — bulk-boundary interaction;
//! * `HE`: (|d_I B|_a + delta |dd_E B|_b) / (|B|_a + |d_E B|_b);
//! * `HD`: the three-set sum
//!   (|d_I A|/|A|) (|d_I B|/(|B|+|d_E B|))
//!   + delta (|dd_E B|/(|B|+|d_E B|)) (|dd_E C|/|d_E C|);
//! * `HCBoundary`: |dC|_b / |C|_b over boundary arcs C (see
//!   [`boundary_cheeger`]);
//! * `HCTildeBulkOnly`: the HC functional under the boundary restriction,
//!   as it appears in the boundary-diffusion lower bound.
//!
//! Each infimum runs over one of three smallness restrictions
//! ([`RestrictionVariant`]): bulk measure at most half, exterior-arc measure
//! at most half, or combined measure at most 1/2 (the latter presumes
//! normalized weights). Brute force enumerates every proper subset —
//! disconnected ones included, since the continuum infimum ranges over all
//! measurable sets — and certifies the witness; eigenfunction sweeps give
//! upper bounds on fine meshes.

use crate::assembly::{assemble_problem, ProblemKind};
use crate::eigensolver::{solve_generalized, SolveError};
use crate::mesh::{MeshError, SubsetMeasures, TriangleSubset, WeightedMesh};
use crate::scalar::{cast, Real};
use rayon::prelude::*;
use serde::Serialize;

/// Enumeration cap for single-set constants.
pub const MAX_BRUTE_FORCE_TRIANGLES: usize = 20;
/// Enumeration cap for the three-set constant.
pub const MAX_BRUTE_FORCE_TRIANGLES_HD: usize = 14;

/// Relative slack when testing the smallness restrictions, so that exact
/// half-measure witnesses (half disks) survive last-ulp rounding.
const ADMISSIBILITY_SLACK: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum CheegerError {
    #[error("{count} triangles exceed the enumeration limit {limit}; use the sweep method")]
    TooManyTriangles { count: usize, limit: usize },
    #[error("kind {kind} takes {expected} set(s), got {got}")]
    WrongSetCount { kind: String, expected: usize, got: usize },
    #[error("set is inadmissible for {kind}: zero denominator")]
    Inadmissible { kind: String },
    #[error("the combined restriction requires normalized weights (total measure 1)")]
    NotNormalized,
    #[error("h_C(dOmega) is an arc constant; use boundary_cheeger")]
    ArcConstant,
    #[error("no admissible subset exists")]
    NoAdmissibleSet,
    #[error("mesh: {0}")]
    Mesh(#[from] MeshError),
    #[error("eigensolve for sweep failed: {0}")]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    Hc,
    Hj,
    Hb,
    Hd,
    He,
    HcBoundary,
    HcTildeBulkOnly,
}

impl ConstantKind {
    pub fn set_count(&self) -> usize {
        match self {
            ConstantKind::Hd => 3,
            _ => 1,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ConstantKind::Hc => "h_C",
            ConstantKind::Hj => "h_J",
            ConstantKind::Hb => "h_B",
            ConstantKind::Hd => "h_D",
            ConstantKind::He => "h_E",
            ConstantKind::HcBoundary => "h_C(dOmega)",
            ConstantKind::HcTildeBulkOnly => "h_C~(Omega)",
        }
    }
}

/// Which smallness restriction constrains the infimum. `Bulk` gives the
/// plain constants, `Boundary` the tilde family, `Combined` the bar family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RestrictionVariant {
    Bulk,
    Boundary,
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BruteForce,
    Sweep,
}

/// Result of a constant computation: the value, the witness subsets that
/// attain it (as triangle index lists), and how it was obtained.
#[derive(Debug, Clone, Serialize)]
pub struct CheegerReport<T> {
    pub kind: ConstantKind,
    pub variant: RestrictionVariant,
    pub delta: T,
    pub value: T,
    pub witnesses: Vec<Vec<usize>>,
    pub method: Method,
}

// ---------------------------------------------------------------------------
// mask-based measure cache

struct Cache<T> {
    tri_bulk: Vec<T>,
    /// interior edges as (tri1, tri2, alpha-weighted length)
    interior: Vec<(u32, u32, T)>,
    /// boundary edges as (tri, beta-weighted length)
    boundary: Vec<(u32, T)>,
    /// boundary vertices as (edge_tri_1, edge_tri_2, beta)
    corners: Vec<(u32, u32, T)>,
    total_bulk: T,
    total_boundary: T,
}

impl<T: Real> Cache<T> {
    fn build(mesh: &WeightedMesh<T>) -> Self {
        let topo = mesh.topology();
        let tri_bulk: Vec<T> =
            (0..mesh.num_triangles()).map(|t| mesh.triangle_area(t) * mesh.mean_alpha(t)).collect();
        let mut interior = Vec::with_capacity(topo.interior_edges.len());
        for &e in &topo.interior_edges {
            let edge = topo.edges[e];
            let [a, b] = edge.v;
            let w = mesh.edge_length(a, b) * (mesh.alpha()[a] + mesh.alpha()[b]) / cast::<T>(2.0);
            interior.push((edge.tris[0] as u32, edge.tris[1] as u32, w));
        }
        let mut boundary = Vec::with_capacity(topo.boundary_edges.len());
        for &e in &topo.boundary_edges {
            let edge = topo.edges[e];
            let [a, b] = edge.v;
            let w = mesh.edge_length(a, b) * mesh.mean_beta_edge(a, b);
            boundary.push((edge.tris[0] as u32, w));
        }
        let mut corners = Vec::new();
        for (v, flag) in topo.is_boundary_vertex.iter().enumerate() {
            if *flag {
                let [e1, e2] = topo.boundary_edges_at_vertex[v];
                corners.push((
                    topo.edges[e1].tris[0] as u32,
                    topo.edges[e2].tris[0] as u32,
                    mesh.beta()[v],
                ));
            }
        }
        let total_bulk = tri_bulk.iter().copied().sum();
        let total_boundary = boundary.iter().map(|&(_, w)| w).sum();
        Cache { tri_bulk, interior, boundary, corners, total_bulk, total_boundary }
    }

    #[inline]
    fn measures(&self, mask: u64) -> SubsetMeasures<T> {
        let inside = |t: u32| mask >> t & 1 == 1;
        let mut bulk = T::zero();
        for (t, &b) in self.tri_bulk.iter().enumerate() {
            if inside(t as u32) {
                bulk += b;
            }
        }
        let mut interior_cut = T::zero();
        for &(t1, t2, w) in &self.interior {
            if inside(t1) != inside(t2) {
                interior_cut += w;
            }
        }
        let mut exterior_arc = T::zero();
        for &(t, w) in &self.boundary {
            if inside(t) {
                exterior_arc += w;
            }
        }
        let mut arc_endpoints = T::zero();
        for &(t1, t2, beta) in &self.corners {
            if inside(t1) != inside(t2) {
                arc_endpoints += beta;
            }
        }
        SubsetMeasures { bulk, interior_cut, exterior_arc, arc_endpoints }
    }

    fn admissible(&self, variant: RestrictionVariant, m: &SubsetMeasures<T>) -> bool {
        let slack = T::one() + cast::<T>(ADMISSIBILITY_SLACK);
        let half = cast::<T>(0.5);
        match variant {
            RestrictionVariant::Bulk => m.bulk <= self.total_bulk * half * slack,
            RestrictionVariant::Boundary => {
                m.exterior_arc <= self.total_boundary * half * slack
            }
            RestrictionVariant::Combined => m.bulk + m.exterior_arc <= half * slack,
        }
    }
}

/// single-set ratio; None marks a zero denominator (inadmissible set)
fn single_ratio<T: Real>(kind: ConstantKind, m: &SubsetMeasures<T>, delta: T) -> Option<T> {
    match kind {
        ConstantKind::Hc | ConstantKind::HcTildeBulkOnly => {
            (m.bulk > T::zero()).then(|| m.interior_cut / m.bulk)
        }
        ConstantKind::Hj => {
            (m.exterior_arc > T::zero()).then(|| m.interior_cut / m.exterior_arc)
        }
        ConstantKind::Hb => {
            let den = m.bulk + m.exterior_arc;
            (den > T::zero()).then(|| m.interior_cut / den)
        }
        ConstantKind::He => {
            let den = m.bulk + m.exterior_arc;
            (den > T::zero()).then(|| (m.interior_cut + delta * m.arc_endpoints) / den)
        }
        _ => None,
    }
}

fn hd_ratio<T: Real>(
    a: &SubsetMeasures<T>,
    b: &SubsetMeasures<T>,
    c: &SubsetMeasures<T>,
    delta: T,
) -> Option<T> {
    if !(a.bulk > T::zero()) || !(c.exterior_arc > T::zero()) {
        return None;
    }
    let den_b = b.bulk + b.exterior_arc;
    if !(den_b > T::zero()) {
        return None;
    }
    let first = (a.interior_cut / a.bulk) * (b.interior_cut / den_b);
    let second = delta * (b.arc_endpoints / den_b) * (c.arc_endpoints / c.exterior_arc);
    Some(first + second)
}

/// Exact ratio of a constant functional on explicit subsets (one for the
/// single-set kinds, three (A, B, C) for `Hd`).
pub fn ratio<T: Real>(
    kind: ConstantKind,
    sets: &[&TriangleSubset<'_, T>],
    delta: T,
) -> Result<T, CheegerError> {
    if kind == ConstantKind::HcBoundary {
        return Err(CheegerError::ArcConstant);
    }
    let expected = kind.set_count();
    if sets.len() != expected {
        return Err(CheegerError::WrongSetCount {
            kind: kind.label().into(),
            expected,
            got: sets.len(),
        });
    }
    let value = if kind == ConstantKind::Hd {
        let (ma, mb, mc) = (sets[0].measures(), sets[1].measures(), sets[2].measures());
        hd_ratio(&ma, &mb, &mc, delta)
    } else {
        single_ratio(kind, &sets[0].measures(), delta)
    };
    value.ok_or(CheegerError::Inadmissible { kind: kind.label().into() })
}

// ---------------------------------------------------------------------------
// brute force

/// Best candidate under the deterministic total order: smaller ratio, then
/// smaller bulk measure, then lexicographically smaller member list (the
/// mask with the lowest set bit at the first difference).
#[derive(Clone, Copy, Debug)]
struct Candidate<T> {
    ratio: T,
    bulk: T,
    mask: u64,
}

fn mask_lex_less(a: u64, b: u64) -> bool {
    // compare ascending bit positions lexicographically; shorter prefix wins
    let (mut x, mut y) = (a, b);
    loop {
        match (x == 0, y == 0) {
            (true, _) => return y != 0 || a < b,
            (false, true) => return false,
            _ => {}
        }
        let (ta, tb) = (x.trailing_zeros(), y.trailing_zeros());
        if ta != tb {
            return ta < tb;
        }
        x &= x - 1;
        y &= y - 1;
    }
}

impl<T: Real> Candidate<T> {
    fn better(&self, other: &Candidate<T>) -> bool {
        if self.ratio != other.ratio {
            return self.ratio < other.ratio;
        }
        if self.bulk != other.bulk {
            return self.bulk < other.bulk;
        }
        if self.mask != other.mask {
            return mask_lex_less(self.mask, other.mask);
        }
        false
    }
}

fn merge<T: Real>(a: Option<Candidate<T>>, b: Option<Candidate<T>>) -> Option<Candidate<T>> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.better(&x) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

fn mask_members(mask: u64) -> Vec<usize> {
    (0..64).filter(|&t| mask >> t & 1 == 1).collect()
}

fn check_size(count: usize, limit: usize) -> Result<(), CheegerError> {
    if count > limit {
        return Err(CheegerError::TooManyTriangles { count, limit });
    }
    Ok(())
}

fn check_normalized<T: Real>(
    mesh: &WeightedMesh<T>,
    variant: RestrictionVariant,
) -> Result<(), CheegerError> {
    if variant == RestrictionVariant::Combined && !mesh.is_normalized(cast::<T>(1e-9)) {
        return Err(CheegerError::NotNormalized);
    }
    Ok(())
}

/// minimum of a per-mask functional over admissible proper subsets
fn enumerate_min<T, F>(cache: &Cache<T>, count: usize, eval: F) -> Option<Candidate<T>>
where
    T: Real,
    F: Fn(&SubsetMeasures<T>) -> Option<T> + Sync,
{
    let full: u64 = (1 << count) - 1;
    // fixed-prefix partition of the subset lattice; min-merge is associative
    // and the candidate order total, so the reduction is deterministic
    (1..full)
        .into_par_iter()
        .fold(
            || None,
            |best: Option<Candidate<T>>, mask| {
                let m = cache.measures(mask);
                match eval(&m) {
                    Some(r) => {
                        let cand = Candidate { ratio: r, bulk: m.bulk, mask };
                        merge(best, Some(cand))
                    }
                    None => best,
                }
            },
        )
        .reduce(|| None, merge)
}

/// Exact minimum of the constant over all admissible nonempty proper
/// triangle subsets, with witness extraction.
pub fn brute_force_constant<T: Real>(
    mesh: &WeightedMesh<T>,
    kind: ConstantKind,
    variant: RestrictionVariant,
    delta: T,
) -> Result<CheegerReport<T>, CheegerError> {
    if kind == ConstantKind::HcBoundary {
        return Err(CheegerError::ArcConstant);
    }
    check_normalized(mesh, variant)?;
    let count = mesh.num_triangles();
    if kind == ConstantKind::Hd {
        check_size(count, MAX_BRUTE_FORCE_TRIANGLES_HD)?;
        return brute_force_hd(mesh, variant, delta);
    }
    check_size(count, MAX_BRUTE_FORCE_TRIANGLES)?;
    let cache = Cache::build(mesh);
    let best = enumerate_min(&cache, count, |m| {
        if !cache.admissible(variant, m) {
            return None;
        }
        single_ratio(kind, m, delta)
    });
    match best {
        Some(c) => Ok(CheegerReport {
            kind,
            variant,
            delta,
            value: c.ratio,
            witnesses: vec![mask_members(c.mask)],
            method: Method::BruteForce,
        }),
        None => Err(CheegerError::NoAdmissibleSet),
    }
}

/// The three-set infimum separates: with f(A) the HC ratio, g(C) the
/// arc-endpoint ratio and r1, r2 the two B-dependent factors,
/// inf f(A) r1(B) + delta r2(B) g(C) = inf_B [ (inf f) r1(B)
/// + delta r2(B) (inf g) ] because all factors are nonnegative and the sets
/// range independently. The full triple enumeration is kept as a test
/// oracle.
fn brute_force_hd<T: Real>(
    mesh: &WeightedMesh<T>,
    variant: RestrictionVariant,
    delta: T,
) -> Result<CheegerReport<T>, CheegerError> {
    let count = mesh.num_triangles();
    let cache = Cache::build(mesh);
    let best_a = enumerate_min(&cache, count, |m| {
        if !cache.admissible(variant, m) {
            return None;
        }
        single_ratio(ConstantKind::Hc, m, delta)
    })
    .ok_or(CheegerError::NoAdmissibleSet)?;
    let best_c = enumerate_min(&cache, count, |m| {
        if !cache.admissible(variant, m) || !(m.exterior_arc > T::zero()) {
            return None;
        }
        Some(m.arc_endpoints / m.exterior_arc)
    })
    .ok_or(CheegerError::NoAdmissibleSet)?;
    let (ha, hc_arc) = (best_a.ratio, best_c.ratio);
    let best_b = enumerate_min(&cache, count, |m| {
        if !cache.admissible(variant, m) {
            return None;
        }
        let den = m.bulk + m.exterior_arc;
        if !(den > T::zero()) {
            return None;
        }
        Some(ha * (m.interior_cut / den) + delta * (m.arc_endpoints / den) * hc_arc)
    })
    .ok_or(CheegerError::NoAdmissibleSet)?;
    Ok(CheegerReport {
        kind: ConstantKind::Hd,
        variant,
        delta,
        value: best_b.ratio,
        witnesses: vec![
            mask_members(best_a.mask),
            mask_members(best_b.mask),
            mask_members(best_c.mask),
        ],
        method: Method::BruteForce,
    })
}

// ---------------------------------------------------------------------------
// eigenfunction sweep

/// Evaluates the constant on the superlevel family of an eigenfunction:
/// subsets { triangles whose vertex mean of f exceeds t } for t over the
/// distinct vertex values, both signs of f. Returns the best admissible
/// ratio — an upper bound for the constant. For the three-set kind the
/// triple (D_t, D_t, D_t) is used. If no admissible superlevel set exists
/// the report carries value +infinity and no witness.
pub fn sweep_upper_bound<T: Real>(
    mesh: &WeightedMesh<T>,
    eigenfunction: &[T],
    kind: ConstantKind,
    variant: RestrictionVariant,
    delta: T,
) -> Result<CheegerReport<T>, CheegerError> {
    if kind == ConstantKind::HcBoundary {
        return Err(CheegerError::ArcConstant);
    }
    if eigenfunction.len() != mesh.num_vertices() {
        return Err(CheegerError::WrongSetCount {
            kind: "eigenfunction dof vector".into(),
            expected: mesh.num_vertices(),
            got: eigenfunction.len(),
        });
    }
    check_normalized(mesh, variant)?;

    let topo = mesh.topology();
    let nt = mesh.num_triangles();
    // adjacency used by the incremental superlevel walk
    let tri_bulk: Vec<T> =
        (0..nt).map(|t| mesh.triangle_area(t) * mesh.mean_alpha(t)).collect();
    let mut tri_interior: Vec<Vec<(usize, T)>> = vec![Vec::new(); nt];
    for &e in &topo.interior_edges {
        let edge = topo.edges[e];
        let [a, b] = edge.v;
        let w = mesh.edge_length(a, b) * (mesh.alpha()[a] + mesh.alpha()[b]) / cast::<T>(2.0);
        tri_interior[edge.tris[0]].push((edge.tris[1], w));
        tri_interior[edge.tris[1]].push((edge.tris[0], w));
    }
    // boundary edges and the corner bookkeeping
    let mut tri_boundary: Vec<Vec<(usize, T)>> = vec![Vec::new(); nt]; // (edge id, weight)
    let mut edge_corner_vertices: Vec<Vec<usize>> = vec![Vec::new(); topo.edges.len()];
    for &e in &topo.boundary_edges {
        let edge = topo.edges[e];
        let [a, b] = edge.v;
        let w = mesh.edge_length(a, b) * mesh.mean_beta_edge(a, b);
        tri_boundary[edge.tris[0]].push((e, w));
        edge_corner_vertices[e].push(a);
        edge_corner_vertices[e].push(b);
    }
    let total_bulk: T = tri_bulk.iter().copied().sum();
    let total_boundary: T = topo
        .boundary_edges
        .iter()
        .map(|&e| {
            let [a, b] = topo.edges[e].v;
            mesh.edge_length(a, b) * mesh.mean_beta_edge(a, b)
        })
        .sum();
    let slack = T::one() + cast::<T>(ADMISSIBILITY_SLACK);
    let half = cast::<T>(0.5);
    let admissible = |m: &SubsetMeasures<T>| match variant {
        RestrictionVariant::Bulk => m.bulk <= total_bulk * half * slack,
        RestrictionVariant::Boundary => m.exterior_arc <= total_boundary * half * slack,
        RestrictionVariant::Combined => m.bulk + m.exterior_arc <= half * slack,
    };

    let evaluate = |m: &SubsetMeasures<T>| -> Option<T> {
        if kind == ConstantKind::Hd {
            hd_ratio(m, m, m, delta)
        } else {
            single_ratio(kind, m, delta)
        }
    };

    let mut best: Option<(T, T, Vec<usize>)> = None; // (ratio, bulk, members)
    for sign in [T::one(), -T::one()] {
        let values: Vec<T> = eigenfunction.iter().map(|&v| sign * v).collect();
        let mut thresholds: Vec<T> = values.clone();
        thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
        thresholds.dedup();
        let third = T::one() / cast::<T>(3.0);
        let mean_of: Vec<T> = mesh
            .triangles()
            .iter()
            .map(|t| (values[t[0]] + values[t[1]] + values[t[2]]) * third)
            .collect();
        let mut order: Vec<usize> = (0..nt).collect();
        order.sort_by(|&a, &b| mean_of[b].partial_cmp(&mean_of[a]).unwrap());

        let mut in_set = vec![false; nt];
        let mut edge_in = vec![false; topo.edges.len()];
        let mut corner_on = vec![false; mesh.num_vertices()];
        let mut m = SubsetMeasures {
            bulk: T::zero(),
            interior_cut: T::zero(),
            exterior_arc: T::zero(),
            arc_endpoints: T::zero(),
        };
        let mut p = 0usize;
        let mut members: Vec<usize> = Vec::new();
        for &t in &thresholds {
            while p < nt && mean_of[order[p]] > t {
                let tri = order[p];
                p += 1;
                in_set[tri] = true;
                members.push(tri);
                m.bulk += tri_bulk[tri];
                for &(u, w) in &tri_interior[tri] {
                    if in_set[u] {
                        m.interior_cut -= w;
                    } else {
                        m.interior_cut += w;
                    }
                }
                for &(e, w) in &tri_boundary[tri] {
                    m.exterior_arc += w;
                    edge_in[e] = true;
                    for &v in &edge_corner_vertices[e] {
                        let [e1, e2] = topo.boundary_edges_at_vertex[v];
                        let now = edge_in[e1] != edge_in[e2];
                        if now != corner_on[v] {
                            if now {
                                m.arc_endpoints += mesh.beta()[v];
                            } else {
                                m.arc_endpoints -= mesh.beta()[v];
                            }
                            corner_on[v] = now;
                        }
                    }
                }
            }
            if members.is_empty() || members.len() == nt {
                continue;
            }
            if !admissible(&m) {
                continue;
            }
            if let Some(r) = evaluate(&m) {
                let replace = match &best {
                    None => true,
                    Some((br, bb, _)) => {
                        r < *br || (r == *br && m.bulk < *bb)
                    }
                };
                if replace {
                    let mut sorted = members.clone();
                    sorted.sort_unstable();
                    best = Some((r, m.bulk, sorted));
                }
            }
        }
    }
    match best {
        Some((value, _, witness)) => {
            let witnesses = if kind == ConstantKind::Hd {
                vec![witness.clone(), witness.clone(), witness]
            } else {
                vec![witness]
            };
            Ok(CheegerReport { kind, variant, delta, value, witnesses, method: Method::Sweep })
        }
        None => Ok(CheegerReport {
            kind,
            variant,
            delta,
            value: T::infinity(),
            witnesses: vec![],
            method: Method::Sweep,
        }),
    }
}

// ---------------------------------------------------------------------------
// the full constant matrix and the theorem lower bounds

/// All brute-force constants of a small mesh: the
/// {plain, tilde, bar} x {C, J, B} grid, the three h_D variants and the
/// boundary-diffusion constant h~_E.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantMatrix<T> {
    pub delta: f64,
    pub h_c: T,
    pub h_c_tilde: T,
    pub h_c_bar: T,
    pub h_j: T,
    pub h_j_tilde: T,
    pub h_j_bar: T,
    pub h_b: T,
    pub h_b_tilde: T,
    pub h_b_bar: T,
    pub h_d: T,
    pub h_d_tilde: T,
    pub h_d_bar: T,
    pub h_e_tilde: T,
}

/// One ordering relation between two named constants.
#[derive(Debug, Clone, Serialize)]
pub struct Ordering<T> {
    pub name: &'static str,
    pub lhs: T,
    pub rhs: T,
}

impl<T: Real> ConstantMatrix<T> {
    /// The nine comparison-lemma orderings, stated as lhs <= rhs.
    pub fn orderings(&self) -> Vec<Ordering<T>> {
        let half = cast::<T>(0.5);
        vec![
            Ordering { name: "h~_C <= hbar_C", lhs: self.h_c_tilde, rhs: self.h_c_bar },
            Ordering { name: "hbar_C <= h_C", lhs: self.h_c_bar, rhs: self.h_c },
            Ordering { name: "h_J <= hbar_J", lhs: self.h_j, rhs: self.h_j_bar },
            Ordering { name: "hbar_J <= h~_J", lhs: self.h_j_bar, rhs: self.h_j_tilde },
            Ordering { name: "h_B <= hbar_B", lhs: self.h_b, rhs: self.h_b_bar },
            Ordering { name: "h~_B <= hbar_B", lhs: self.h_b_tilde, rhs: self.h_b_bar },
            Ordering { name: "h_B <= h_C", lhs: self.h_b, rhs: self.h_c },
            Ordering { name: "h_B <= h_J", lhs: self.h_b, rhs: self.h_j },
            Ordering {
                name: "min(h_C,h_J)/2 <= h_B",
                lhs: self.h_c.min(self.h_j) * half,
                rhs: self.h_b,
            },
        ]
    }

    /// The nine single-set constants whose strict positivity the comparison
    /// lemma asserts.
    pub fn positivity(&self) -> Vec<(&'static str, T)> {
        vec![
            ("h_C", self.h_c),
            ("h~_C", self.h_c_tilde),
            ("hbar_C", self.h_c_bar),
            ("h_J", self.h_j),
            ("h~_J", self.h_j_tilde),
            ("hbar_J", self.h_j_bar),
            ("h_B", self.h_b),
            ("h~_B", self.h_b_tilde),
            ("hbar_B", self.h_b_bar),
        ]
    }
}

/// Brute-force constant matrix. Weights are normalized internally (the bar
/// variants need a probability measure; the ratios themselves are invariant
/// under joint weight scaling).
pub fn constant_matrix<T: Real>(
    mesh: &WeightedMesh<T>,
    delta: T,
) -> Result<ConstantMatrix<T>, CheegerError> {
    check_size(mesh.num_triangles(), MAX_BRUTE_FORCE_TRIANGLES)?;
    check_size(mesh.num_triangles(), MAX_BRUTE_FORCE_TRIANGLES_HD)?;
    let mesh = mesh.normalize_weights()?;
    let bf = |kind, variant| -> Result<T, CheegerError> {
        Ok(brute_force_constant(&mesh, kind, variant, delta)?.value)
    };
    use ConstantKind::*;
    use RestrictionVariant::*;
    Ok(ConstantMatrix {
        delta: delta.to_f64().unwrap(),
        h_c: bf(Hc, Bulk)?,
        h_c_tilde: bf(Hc, Boundary)?,
        h_c_bar: bf(Hc, Combined)?,
        h_j: bf(Hj, Bulk)?,
        h_j_tilde: bf(Hj, Boundary)?,
        h_j_bar: bf(Hj, Combined)?,
        h_b: bf(Hb, Bulk)?,
        h_b_tilde: bf(Hb, Boundary)?,
        h_b_bar: bf(Hb, Combined)?,
        h_d: bf(Hd, Bulk)?,
        h_d_tilde: bf(Hd, Boundary)?,
        h_d_bar: bf(Hd, Combined)?,
        h_e_tilde: bf(He, Boundary)?,
    })
}

/// Exact boundary Cheeger constant h_C(dOmega): minimum over contiguous
/// boundary arcs C with |C|_b at most half of (beta(p1) + beta(p2)) / |C|_b,
/// p1, p2 the arc endpoints. With several loops, whole loops are candidates
/// too (their arc boundary is empty, ratio zero, admissible whenever the
/// loop measure respects the restriction).
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryCheeger<T> {
    pub value: T,
    /// vertex indices of the witness arc endpoints (empty for a whole loop)
    pub endpoints: Vec<usize>,
    /// ordered vertices of the witness arc
    pub arc: Vec<usize>,
}

pub fn boundary_cheeger<T: Real>(
    mesh: &WeightedMesh<T>,
) -> Result<BoundaryCheeger<T>, CheegerError> {
    let slack = T::one() + cast::<T>(ADMISSIBILITY_SLACK);
    let total = mesh.boundary_measure();
    let half = total * cast::<T>(0.5) * slack;
    let mut best: Option<BoundaryCheeger<T>> = None;
    let mut consider = |value: T, endpoints: Vec<usize>, arc: Vec<usize>| {
        let better = match &best {
            None => true,
            Some(b) => value < b.value,
        };
        if better {
            best = Some(BoundaryCheeger { value, endpoints, arc });
        }
    };
    for cycle in mesh.boundary_loops() {
        let m = cycle.len();
        // beta-weighted length of edge i = (v_i, v_{i+1})
        let w: Vec<T> = (0..m)
            .map(|i| {
                let (a, b) = (cycle[i], cycle[(i + 1) % m]);
                mesh.edge_length(a, b) * mesh.mean_beta_edge(a, b)
            })
            .collect();
        let loop_total: T = w.iter().copied().sum();
        if mesh.boundary_loops().len() > 1 && loop_total <= half {
            consider(T::zero(), vec![], cycle.clone());
        }
        for start in 0..m {
            let mut measure = T::zero();
            for len in 1..m {
                measure += w[(start + len - 1) % m];
                if measure > half {
                    break;
                }
                if !(measure > T::zero()) {
                    continue;
                }
                let p1 = cycle[start];
                let p2 = cycle[(start + len) % m];
                let cut = mesh.beta()[p1] + mesh.beta()[p2];
                let arc: Vec<usize> =
                    (0..=len).map(|i| cycle[(start + i) % m]).collect();
                consider(cut / measure, vec![p1, p2], arc);
            }
        }
    }
    best.ok_or(CheegerError::NoAdmissibleSet)
}

/// Which lower-bound statement to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremBound {
    /// lambda_1^SR >= hbar_B hbar_C / 4
    SrCombined,
    /// lambda_1^SR >= h_B h_C / 4
    SrBulk,
    /// lambda_1^SR >= h~_B h~_C / 4
    SrBoundary,
    /// lambda_1^SRBD >= hbar_D / 4
    SrbdD,
    /// lambda_1^SRBD >= min(h~_C(Omega), h_C(dOmega)) h~_E / 4
    SrbdE,
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBound<T> {
    pub theorem: TheoremBound,
    pub delta: f64,
    pub value: T,
    /// true when every ingredient is an exact brute-force (or arc) infimum;
    /// sweep-based ingredients only give an upper-bound-based, uncertified
    /// number
    pub certified: bool,
}

/// Evaluates the right-hand side of one theorem bound. Small meshes use the
/// exact enumeration; larger ones fall back to eigenfunction sweeps and the
/// result is flagged as not certified.
pub fn lower_bound<T: Real + nalgebra::RealField>(
    mesh: &WeightedMesh<T>,
    theorem: TheoremBound,
    delta: T,
) -> Result<LowerBound<T>, CheegerError> {
    let mesh = mesh.normalize_weights()?;
    let nt = mesh.num_triangles();
    let brute = match theorem {
        TheoremBound::SrbdD => nt <= MAX_BRUTE_FORCE_TRIANGLES_HD,
        _ => nt <= MAX_BRUTE_FORCE_TRIANGLES,
    };
    use ConstantKind::*;
    use RestrictionVariant::*;
    let quarter = cast::<T>(0.25);
    let constant = |kind: ConstantKind, variant: RestrictionVariant| -> Result<T, CheegerError> {
        if brute {
            Ok(brute_force_constant(&mesh, kind, variant, delta)?.value)
        } else {
            let problem_kind = match theorem {
                TheoremBound::SrbdD | TheoremBound::SrbdE => {
                    ProblemKind::StickyReflectionBoundaryDiffusion(delta)
                }
                _ => ProblemKind::StickyReflection,
            };
            let problem = assemble_problem(&mesh, problem_kind)
                .map_err(SolveError::Assembly)?;
            let solved = solve_generalized(&problem, 2, cast::<T>(1e-9))?;
            Ok(sweep_upper_bound(&mesh, &solved.eigenvectors[1], kind, variant, delta)?.value)
        }
    };
    let value = match theorem {
        TheoremBound::SrCombined => constant(Hb, Combined)? * constant(Hc, Combined)? * quarter,
        TheoremBound::SrBulk => constant(Hb, Bulk)? * constant(Hc, Bulk)? * quarter,
        TheoremBound::SrBoundary => constant(Hb, Boundary)? * constant(Hc, Boundary)? * quarter,
        TheoremBound::SrbdD => constant(Hd, Combined)? * quarter,
        TheoremBound::SrbdE => {
            let hc_tilde = constant(Hc, Boundary)?;
            let hc_arc = boundary_cheeger(&mesh)?.value;
            let he_tilde = constant(He, Boundary)?;
            num_traits::Float::min(hc_tilde, hc_arc) * he_tilde * quarter
        }
    };
    Ok(LowerBound { theorem, delta: delta.to_f64().unwrap(), value, certified: brute })
}
