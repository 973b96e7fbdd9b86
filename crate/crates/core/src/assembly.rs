//! P1 finite element assembly of the bilinear forms behind the eigenvalue
//! problems: weighted Dirichlet energy and weighted mass in the bulk, and
//! weighted tangential energy and mass along the boundary loops.
//!
//! Metric bookkeeping (the single most error-prone fact here): in two
//! dimensions the Dirichlet energy is conformally invariant, so the bulk
//! stiffness uses plain chart gradients weighted by alpha only. The conformal
//! factor enters the bulk mass squared (areas), and the boundary mass and
//! stiffness linearly (lengths, with the stiffness dividing by length).
//! Weights are evaluated as vertex means per simplex; the conformal factor at
//! chart midpoints, which is second-order consistent.

use crate::mesh::WeightedMesh;
use crate::scalar::{cast, Real};
use crate::sparse::{BandedCholesky, Csr, SparseError};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum AssemblyError {
    #[error("triangle {tri} is degenerate (chart area {area})")]
    DegenerateTriangle { tri: usize, area: f64 },
    #[error("boundary edge ({a},{b}) has zero metric length")]
    ZeroLengthEdge { a: usize, b: usize },
    #[error("problem kind {0} needs at least one interior vertex")]
    NoInteriorVertices(String),
    #[error("interior stiffness block is numerically singular: {0}")]
    SingularInteriorBlock(#[from] SparseError),
}

/// Which eigenvalue problem to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProblemKind<T> {
    #[serde(rename = "neumann")]
    Neumann,
    #[serde(rename = "dirichlet")]
    Dirichlet,
    #[serde(rename = "steklov")]
    Steklov,
    #[serde(rename = "sr")]
    StickyReflection,
    /// Sticky reflection plus tangential boundary diffusion at speed delta.
    #[serde(rename = "srbd")]
    StickyReflectionBoundaryDiffusion(T),
}

impl<T: Real> ProblemKind<T> {
    pub fn label(&self) -> String {
        match self {
            ProblemKind::Neumann => "neumann".into(),
            ProblemKind::Dirichlet => "dirichlet".into(),
            ProblemKind::Steklov => "steklov".into(),
            ProblemKind::StickyReflection => "sr".into(),
            ProblemKind::StickyReflectionBoundaryDiffusion(d) => format!("srbd({d})"),
        }
    }
}

/// Row/column meaning of an assembled pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DofMap {
    AllVertices,
    /// rows correspond to these mesh vertices (interior only)
    Interior(Vec<usize>),
    /// rows correspond to these mesh vertices (boundary only)
    Boundary(Vec<usize>),
}

impl DofMap {
    pub fn len_for(&self, mesh_vertices: usize) -> usize {
        match self {
            DofMap::AllVertices => mesh_vertices,
            DofMap::Interior(v) | DofMap::Boundary(v) => v.len(),
        }
    }

    /// Mesh vertex index of a dof row.
    pub fn vertex(&self, row: usize) -> usize {
        match self {
            DofMap::AllVertices => row,
            DofMap::Interior(v) | DofMap::Boundary(v) => v[row],
        }
    }
}

/// Assembled symmetric pair (stiffness, mass) for one problem kind.
#[derive(Debug, Clone)]
pub struct SpectralProblem<T> {
    pub stiffness: Csr<T>,
    pub mass: Csr<T>,
    pub dof_map: DofMap,
    pub kind: ProblemKind<T>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AssemblyOptions {
    /// Replace the consistent mass matrices by their row-lumped diagonals.
    pub lumped_mass: bool,
}

/// Weighted P1 stiffness over the bulk. Conformally invariant in 2D: entries
/// are chart-geometric, weighted by the triangle mean of alpha.
pub fn assemble_bulk_stiffness<T: Real>(
    mesh: &WeightedMesh<T>,
) -> Result<Csr<T>, AssemblyError> {
    let n = mesh.num_vertices();
    let mut triplets = Vec::with_capacity(9 * mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.chart_area(t);
        if area <= T::zero() {
            return Err(AssemblyError::DegenerateTriangle {
                tri: t,
                area: area.to_f64().unwrap_or(f64::NAN),
            });
        }
        let p = [
            mesh.vertices()[tri[0]],
            mesh.vertices()[tri[1]],
            mesh.vertices()[tri[2]],
        ];
        // edge vector opposite vertex k
        let e = [
            [p[2][0] - p[1][0], p[2][1] - p[1][1]],
            [p[0][0] - p[2][0], p[0][1] - p[2][1]],
            [p[1][0] - p[0][0], p[1][1] - p[0][1]],
        ];
        let coeff = mesh.mean_alpha(t) / (cast::<T>(4.0) * area);
        for i in 0..3 {
            for j in 0..3 {
                let v = coeff * (e[i][0] * e[j][0] + e[i][1] * e[j][1]);
                triplets.push((tri[i], tri[j], v));
            }
        }
    }
    Ok(Csr::from_triplets(n, n, &triplets))
}

/// Weighted consistent P1 mass over the bulk; metric areas carry the squared
/// conformal factor. The sum of all entries equals |Omega|_alpha.
pub fn assemble_bulk_mass<T: Real>(mesh: &WeightedMesh<T>) -> Result<Csr<T>, AssemblyError> {
    assemble_bulk_mass_with(mesh, AssemblyOptions::default())
}

pub fn assemble_bulk_mass_with<T: Real>(
    mesh: &WeightedMesh<T>,
    options: AssemblyOptions,
) -> Result<Csr<T>, AssemblyError> {
    let n = mesh.num_vertices();
    let mut triplets = Vec::with_capacity(9 * mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        if area <= T::zero() {
            return Err(AssemblyError::DegenerateTriangle {
                tri: t,
                area: area.to_f64().unwrap_or(f64::NAN),
            });
        }
        let scaled = mesh.mean_alpha(t) * area;
        if options.lumped_mass {
            let third = scaled / cast::<T>(3.0);
            for &v in tri {
                triplets.push((v, v, third));
            }
        } else {
            let twelfth = scaled / cast::<T>(12.0);
            for i in 0..3 {
                for j in 0..3 {
                    let v = if i == j { twelfth + twelfth } else { twelfth };
                    triplets.push((tri[i], tri[j], v));
                }
            }
        }
    }
    Ok(Csr::from_triplets(n, n, &triplets))
}

/// 1D P1 stiffness along the boundary loops: tangential Dirichlet energy
/// weighted by beta. Edge coefficient is (mean beta) / (metric length).
pub fn assemble_boundary_stiffness<T: Real>(
    mesh: &WeightedMesh<T>,
) -> Result<Csr<T>, AssemblyError> {
    let n = mesh.num_vertices();
    let topo = mesh.topology();
    let mut triplets = Vec::new();
    for &e in &topo.boundary_edges {
        let [a, b] = topo.edges[e].v;
        let len = mesh.edge_length(a, b);
        if !(len > T::zero()) {
            return Err(AssemblyError::ZeroLengthEdge { a, b });
        }
        let c = mesh.mean_beta_edge(a, b) / len;
        triplets.push((a, a, c));
        triplets.push((b, b, c));
        triplets.push((a, b, -c));
        triplets.push((b, a, -c));
    }
    Ok(Csr::from_triplets(n, n, &triplets))
}

/// 1D P1 consistent mass along the boundary loops. The entry sum equals
/// |dOmega|_beta.
pub fn assemble_boundary_mass<T: Real>(mesh: &WeightedMesh<T>) -> Result<Csr<T>, AssemblyError> {
    assemble_boundary_mass_with(mesh, AssemblyOptions::default())
}

pub fn assemble_boundary_mass_with<T: Real>(
    mesh: &WeightedMesh<T>,
    options: AssemblyOptions,
) -> Result<Csr<T>, AssemblyError> {
    let n = mesh.num_vertices();
    let topo = mesh.topology();
    let mut triplets = Vec::new();
    for &e in &topo.boundary_edges {
        let [a, b] = topo.edges[e].v;
        let scaled = mesh.mean_beta_edge(a, b) * mesh.edge_length(a, b);
        if options.lumped_mass {
            let half = scaled / cast::<T>(2.0);
            triplets.push((a, a, half));
            triplets.push((b, b, half));
        } else {
            let sixth = scaled / cast::<T>(6.0);
            triplets.push((a, a, sixth + sixth));
            triplets.push((b, b, sixth + sixth));
            triplets.push((a, b, sixth));
            triplets.push((b, a, sixth));
        }
    }
    Ok(Csr::from_triplets(n, n, &triplets))
}

/// Assembles the matrix pair for the requested problem kind.
pub fn assemble_problem<T: Real>(
    mesh: &WeightedMesh<T>,
    kind: ProblemKind<T>,
) -> Result<SpectralProblem<T>, AssemblyError> {
    assemble_problem_with(mesh, kind, AssemblyOptions::default())
}

pub fn assemble_problem_with<T: Real>(
    mesh: &WeightedMesh<T>,
    kind: ProblemKind<T>,
    options: AssemblyOptions,
) -> Result<SpectralProblem<T>, AssemblyError> {
    let k_bulk = assemble_bulk_stiffness(mesh)?;
    let m_bulk = assemble_bulk_mass_with(mesh, options)?;
    match kind {
        ProblemKind::Neumann => Ok(SpectralProblem {
            stiffness: k_bulk,
            mass: m_bulk,
            dof_map: DofMap::AllVertices,
            kind,
        }),
        ProblemKind::Dirichlet => {
            let interior = mesh.interior_vertices();
            if interior.is_empty() {
                return Err(AssemblyError::NoInteriorVertices("dirichlet".into()));
            }
            Ok(SpectralProblem {
                stiffness: k_bulk.restrict(&interior, &interior),
                mass: m_bulk.restrict(&interior, &interior),
                dof_map: DofMap::Interior(interior),
                kind,
            })
        }
        ProblemKind::StickyReflection => {
            let m_bnd = assemble_boundary_mass_with(mesh, options)?;
            Ok(SpectralProblem {
                stiffness: k_bulk,
                mass: m_bulk.add_scaled(&m_bnd, T::one()),
                dof_map: DofMap::AllVertices,
                kind,
            })
        }
        ProblemKind::StickyReflectionBoundaryDiffusion(delta) => {
            let m_bnd = assemble_boundary_mass_with(mesh, options)?;
            // delta = 0 must reproduce the sticky-reflection pair entry for
            // entry, including the sparsity pattern.
            let stiffness = if delta == T::zero() {
                k_bulk
            } else {
                let k_bnd = assemble_boundary_stiffness(mesh)?;
                k_bulk.add_scaled(&k_bnd, delta)
            };
            Ok(SpectralProblem {
                stiffness,
                mass: m_bulk.add_scaled(&m_bnd, T::one()),
                dof_map: DofMap::AllVertices,
                kind,
            })
        }
        ProblemKind::Steklov => {
            let interior = mesh.interior_vertices();
            let boundary = mesh.boundary_vertices();
            if interior.is_empty() {
                return Err(AssemblyError::NoInteriorVertices("steklov".into()));
            }
            let k_ii = k_bulk.restrict(&interior, &interior);
            let k_ib = k_bulk.restrict(&interior, &boundary);
            let k_bi = k_bulk.restrict(&boundary, &interior);
            let k_bb = k_bulk.restrict(&boundary, &boundary);
            let chol = BandedCholesky::factor(&k_ii)?;
            // S = K_bb - K_bi K_ii^-1 K_ib, the discrete Dirichlet-to-Neumann map
            let nb = boundary.len();
            let ni = interior.len();
            let mut columns: Vec<Vec<(usize, T)>> = vec![Vec::new(); nb];
            for (i, j, v) in k_ib.triplets() {
                columns[j].push((i, v));
            }
            let mut schur = k_bb.to_dense();
            for j in 0..nb {
                let mut col = vec![T::zero(); ni];
                for &(i, v) in &columns[j] {
                    col[i] = v;
                }
                let x = chol.solve(&col);
                let y = k_bi.matvec_alloc(&x);
                for b in 0..nb {
                    schur[(b, j)] -= y[b];
                }
            }
            // symmetrize rounding
            for i in 0..nb {
                for j in (i + 1)..nb {
                    let avg = (schur[(i, j)] + schur[(j, i)]) / cast::<T>(2.0);
                    schur[(i, j)] = avg;
                    schur[(j, i)] = avg;
                }
            }
            let mut triplets = Vec::with_capacity(nb * nb);
            for i in 0..nb {
                for j in 0..nb {
                    let v = schur[(i, j)];
                    if v != T::zero() {
                        triplets.push((i, j, v));
                    }
                }
            }
            let m_bnd = assemble_boundary_mass_with(mesh, options)?;
            Ok(SpectralProblem {
                stiffness: Csr::from_triplets(nb, nb, &triplets),
                mass: m_bnd.restrict(&boundary, &boundary),
                dof_map: DofMap::Boundary(boundary),
                kind,
            })
        }
    }
}
