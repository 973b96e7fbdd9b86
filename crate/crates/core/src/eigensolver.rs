//! Solvers for the smallest eigenpairs of the assembled symmetric pencils
//! (A, B) with B positive definite.
//!
//! Two paths:
//! * dense (dimension <= 3000 by default): Cholesky-reduce B and run a full
//!   symmetric eigendecomposition; deterministic and simple;
//! * iterative: shift-inverted blocked subspace iteration. The operator
//!   (A + sigma B)^-1 B is applied through a banded Cholesky factorization
//!   after reverse Cuthill-McKee reordering, the block is kept
//!   B-orthonormal, and the known constant kernel of the full-dof kinds is
//!   deflated exactly instead of being approximated.
//!
//! Every returned pair carries the residual |Av - lambda Bv| / |Bv| as a
//! certificate.

use crate::assembly::{DofMap, ProblemKind, SpectralProblem};
use crate::mesh::{mesh_hash, WeightedMesh};
use crate::scalar::{cast, Real};
use crate::sparse::BandedCholesky;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("requested {count} pairs from a {dim}-dimensional problem")]
    CountTooLarge { count: usize, dim: usize },
    #[error("mass matrix is not positive definite")]
    IndefiniteMass,
    #[error("factorization failed: {0}")]
    Factorization(#[from] crate::sparse::SparseError),
    #[error("no convergence after {iterations} iterations; best residuals {residuals:?}")]
    NotConverged { iterations: usize, residuals: Vec<f64> },
    #[error("vector has zero B-norm")]
    ZeroBNorm,
    #[error("assembly: {0}")]
    Assembly(#[from] crate::assembly::AssemblyError),
}

/// Eigenpairs in ascending order with residual certificates. Eigenvectors
/// are B-orthonormal.
#[derive(Debug, Clone)]
pub struct SpectralResult<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Vec<Vec<T>>,
    pub kind: ProblemKind<T>,
    pub residuals: Vec<T>,
}

/// JSON-facing summary (eigenvectors omitted).
#[derive(Debug, Clone, Serialize)]
pub struct SpectralSummary {
    pub kind: String,
    pub mesh_hash: String,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl<T: Real> SpectralResult<T> {
    pub fn summary(&self, mesh_hash_hex: &str) -> SpectralSummary {
        SpectralSummary {
            kind: self.kind.label(),
            mesh_hash: mesh_hash_hex.to_string(),
            eigenvalues: self.eigenvalues.iter().map(|v| v.to_f64().unwrap()).collect(),
            residuals: self.residuals.iter().map(|v| v.to_f64().unwrap()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverPath {
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions<T> {
    pub tol: T,
    pub dense_threshold: usize,
    pub force_path: Option<SolverPath>,
    pub seed: u64,
    pub max_iterations: usize,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        SolveOptions {
            tol: cast::<T>(1e-9),
            dense_threshold: 3000,
            force_path: None,
            seed: 0x5eed,
            max_iterations: 400,
        }
    }
}

/// Smallest `count` eigenpairs of the problem at residual tolerance `tol`.
pub fn solve_generalized<T: Real + nalgebra::RealField>(
    problem: &SpectralProblem<T>,
    count: usize,
    tol: T,
) -> Result<SpectralResult<T>, SolveError> {
    solve_with(problem, count, SolveOptions { tol, ..SolveOptions::default() })
}

pub fn solve_with<T: Real + nalgebra::RealField>(
    problem: &SpectralProblem<T>,
    count: usize,
    options: SolveOptions<T>,
) -> Result<SpectralResult<T>, SolveError> {
    let dim = problem.stiffness.nrows();
    if count == 0 || count > dim {
        return Err(SolveError::CountTooLarge { count, dim });
    }
    let path = options.force_path.unwrap_or(if dim <= options.dense_threshold {
        SolverPath::Dense
    } else {
        SolverPath::Iterative
    });
    let (mut eigenvalues, mut eigenvectors) = match path {
        SolverPath::Dense => dense_smallest(problem, count)?,
        SolverPath::Iterative => iterative_smallest(problem, count, &options)?,
    };
    // B-normalize and certify
    let mut residuals = Vec::with_capacity(count);
    for i in 0..count {
        let v = &mut eigenvectors[i];
        let bv = problem.mass.matvec_alloc(v);
        let bnorm = num_traits::Float::sqrt(dot(v, &bv));
        if !(bnorm > T::zero()) {
            return Err(SolveError::ZeroBNorm);
        }
        for x in v.iter_mut() {
            *x = *x / bnorm;
        }
        let av = problem.stiffness.matvec_alloc(v);
        let bv = problem.mass.matvec_alloc(v);
        let lam = eigenvalues[i];
        let mut num = T::zero();
        let mut den = T::zero();
        for k in 0..dim {
            let r = av[k] - lam * bv[k];
            num += r * r;
            den += bv[k] * bv[k];
        }
        residuals.push(num_traits::Float::sqrt(num / den));
    }
    let worst = residuals
        .iter()
        .copied()
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    if worst > options.tol * cast::<T>(10.0) {
        return Err(SolveError::NotConverged {
            iterations: options.max_iterations,
            residuals: residuals.iter().map(|r| r.to_f64().unwrap()).collect(),
        });
    }
    // enforce ascending order
    let mut idx: Vec<usize> = (0..count).collect();
    idx.sort_by(|&a, &b| eigenvalues[a].partial_cmp(&eigenvalues[b]).unwrap());
    eigenvalues = idx.iter().map(|&i| eigenvalues[i]).collect();
    eigenvectors = idx.iter().map(|&i| eigenvectors[i].clone()).collect();
    let residuals = idx.iter().map(|&i| residuals[i]).collect();
    Ok(SpectralResult { eigenvalues, eigenvectors, kind: problem.kind, residuals })
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Full dense route: B = L L', solve the standard problem for
/// C = L^-1 A L^-', map eigenvectors back through L^-'. The pencil is
/// Jacobi-equilibrated first: the mass matrix mixes bulk (h^2) and boundary
/// (h) scales, and the diagonal rescaling keeps the reduction residuals
/// near machine precision.
fn dense_smallest<T: Real + nalgebra::RealField>(
    problem: &SpectralProblem<T>,
    count: usize,
) -> Result<(Vec<T>, Vec<Vec<T>>), SolveError> {
    let mut a = problem.stiffness.to_dense();
    let mut b = problem.mass.to_dense();
    let dim = a.nrows();
    let mut scale = vec![T::one(); dim];
    for i in 0..dim {
        let d = b[(i, i)];
        if !(d > T::zero()) {
            return Err(SolveError::IndefiniteMass);
        }
        scale[i] = T::one() / num_traits::Float::sqrt(d);
    }
    for i in 0..dim {
        for j in 0..dim {
            let s = scale[i] * scale[j];
            a[(i, j)] *= s;
            b[(i, j)] *= s;
        }
    }
    let chol = nalgebra::Cholesky::new(b).ok_or(SolveError::IndefiniteMass)?;
    let l = chol.l();
    let x = l.solve_lower_triangular(&a).ok_or(SolveError::IndefiniteMass)?;
    let y = l
        .solve_lower_triangular(&x.transpose())
        .ok_or(SolveError::IndefiniteMass)?;
    let mut c = y.transpose();
    // symmetrize rounding noise before the symmetric eigensolver
    let n = c.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (c[(i, j)] + c[(j, i)]) / cast::<T>(2.0);
            c[(i, j)] = avg;
            c[(j, i)] = avg;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(c);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&p, &q| eig.eigenvalues[p].partial_cmp(&eig.eigenvalues[q]).unwrap());
    let lt = l.transpose();
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for &i in idx.iter().take(count) {
        values.push(eig.eigenvalues[i]);
        let y: DVector<T> = eig.eigenvectors.column(i).into_owned();
        let x = lt
            .solve_upper_triangular(&y)
            .ok_or(SolveError::IndefiniteMass)?;
        // undo the equilibration
        vectors.push(x.iter().zip(&scale).map(|(&v, &s)| v * s).collect());
    }
    Ok((values, vectors))
}

/// Shift-inverted blocked subspace iteration with exact deflation of the
/// constant kernel for full-dof kinds.
fn iterative_smallest<T: Real + nalgebra::RealField>(
    problem: &SpectralProblem<T>,
    count: usize,
    options: &SolveOptions<T>,
) -> Result<(Vec<T>, Vec<Vec<T>>), SolveError> {
    let dim = problem.stiffness.nrows();
    let a = &problem.stiffness;
    let b = &problem.mass;

    // The constant vector spans the stiffness kernel exactly for the kinds
    // assembled on all vertices.
    let deflate_constants = matches!(problem.dof_map, DofMap::AllVertices)
        && !matches!(problem.kind, ProblemKind::Dirichlet | ProblemKind::Steklov);
    let kernel = if deflate_constants {
        let ones = vec![T::one(); dim];
        let bn = num_traits::Float::sqrt(b.quadratic_form(&ones));
        Some(ones.into_iter().map(|x| x / bn).collect::<Vec<T>>())
    } else {
        None
    };
    let want = if kernel.is_some() { count.saturating_sub(1) } else { count };
    if want == 0 {
        let v0 = kernel.unwrap();
        return Ok((vec![T::zero()], vec![v0]));
    }

    // sigma keeps A + sigma B well conditioned without hurting contraction
    let tr_a: T = (0..dim).map(|i| a.get(i, i)).sum();
    let tr_b: T = (0..dim).map(|i| b.get(i, i)).sum();
    let sigma = {
        let ratio = tr_a / tr_b;
        let floor = cast::<T>(1e-8);
        let s = ratio * cast::<T>(1e-3);
        if s > floor {
            s
        } else {
            floor
        }
    };
    let shifted = a.add_scaled(b, sigma);
    let chol = BandedCholesky::factor(&shifted)?;

    let p = (want + 8).min(dim - kernel.iter().len());
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut block: Vec<Vec<T>> = (0..p)
        .map(|_| (0..dim).map(|_| cast::<T>(rng.gen_range(-1.0..1.0))).collect())
        .collect();

    let deflate = |v: &mut Vec<T>, kernel: &Option<Vec<T>>| {
        if let Some(k) = kernel {
            let bk = b.matvec_alloc(k);
            let c = dot(v, &bk);
            for i in 0..v.len() {
                v[i] = v[i] - c * k[i];
            }
        }
    };

    let mut values = vec![T::zero(); want];
    for iteration in 0..options.max_iterations {
        // Y = (A + sigma B)^-1 B X, deflated
        for v in block.iter_mut() {
            let bx = b.matvec_alloc(v);
            *v = chol.solve(&bx);
            deflate(v, &kernel);
        }
        // B-orthonormalize (modified Gram-Schmidt, two passes)
        for _pass in 0..2 {
            for i in 0..p {
                for j in 0..i {
                    let bj = b.matvec_alloc(&block[j]);
                    let c = dot(&block[i], &bj);
                    for k in 0..dim {
                        block[i][k] = block[i][k] - c * block[j][k];
                    }
                }
                let norm = num_traits::Float::sqrt(b.quadratic_form(&block[i]));
                if norm > T::zero() {
                    for k in 0..dim {
                        block[i][k] = block[i][k] / norm;
                    }
                }
            }
        }
        // Rayleigh-Ritz on the block
        let mut ar = DMatrix::<T>::zeros(p, p);
        let mut br = DMatrix::<T>::zeros(p, p);
        let a_cols: Vec<Vec<T>> = block.iter().map(|v| a.matvec_alloc(v)).collect();
        let b_cols: Vec<Vec<T>> = block.iter().map(|v| b.matvec_alloc(v)).collect();
        for i in 0..p {
            for j in 0..p {
                ar[(i, j)] = dot(&block[i], &a_cols[j]);
                br[(i, j)] = dot(&block[i], &b_cols[j]);
            }
        }
        for i in 0..p {
            for j in (i + 1)..p {
                let avg = (ar[(i, j)] + ar[(j, i)]) / cast::<T>(2.0);
                ar[(i, j)] = avg;
                ar[(j, i)] = avg;
                let avg = (br[(i, j)] + br[(j, i)]) / cast::<T>(2.0);
                br[(i, j)] = avg;
                br[(j, i)] = avg;
            }
        }
        let chol_br = nalgebra::Cholesky::new(br).ok_or(SolveError::IndefiniteMass)?;
        let lb = chol_br.l();
        let x = lb.solve_lower_triangular(&ar).ok_or(SolveError::IndefiniteMass)?;
        let y = lb
            .solve_lower_triangular(&x.transpose())
            .ok_or(SolveError::IndefiniteMass)?;
        let eig = nalgebra::SymmetricEigen::new(y.transpose());
        let mut idx: Vec<usize> = (0..p).collect();
        idx.sort_by(|&u, &v| eig.eigenvalues[u].partial_cmp(&eig.eigenvalues[v]).unwrap());
        // rotate the block to the Ritz basis
        let lbt = lb.transpose();
        let mut rotation = DMatrix::<T>::zeros(p, p);
        for (new, &old) in idx.iter().enumerate() {
            let col: DVector<T> = eig.eigenvectors.column(old).into_owned();
            let w = lbt
                .solve_upper_triangular(&col)
                .ok_or(SolveError::IndefiniteMass)?;
            for r in 0..p {
                rotation[(r, new)] = w[r];
            }
        }
        let old = block.clone();
        for (new_i, v) in block.iter_mut().enumerate() {
            for k in 0..dim {
                let mut acc = T::zero();
                for r in 0..p {
                    acc += old[r][k] * rotation[(r, new_i)];
                }
                v[k] = acc;
            }
        }
        for (new, &old_i) in idx.iter().enumerate() {
            if new < want {
                values[new] = eig.eigenvalues[old_i];
            }
        }
        // convergence of the wanted Ritz pairs
        let mut worst = T::zero();
        for i in 0..want {
            let av = a.matvec_alloc(&block[i]);
            let bv = b.matvec_alloc(&block[i]);
            let mut num = T::zero();
            let mut den = T::zero();
            for k in 0..dim {
                let r = av[k] - values[i] * bv[k];
                num += r * r;
                den += bv[k] * bv[k];
            }
            let res = num_traits::Float::sqrt(num / den);
            if res > worst {
                worst = res;
            }
        }
        if worst <= options.tol {
            let mut out_vals = Vec::with_capacity(count);
            let mut out_vecs = Vec::with_capacity(count);
            if let Some(k) = kernel {
                out_vals.push(T::zero());
                out_vecs.push(k);
            }
            for i in 0..want {
                out_vals.push(values[i]);
                out_vecs.push(block[i].clone());
            }
            return Ok((out_vals, out_vecs));
        }
        if iteration + 1 == options.max_iterations {
            let mut residuals = Vec::new();
            for i in 0..want {
                let av = a.matvec_alloc(&block[i]);
                let bv = b.matvec_alloc(&block[i]);
                let mut num = T::zero();
                let mut den = T::zero();
                for k in 0..dim {
                    let r = av[k] - values[i] * bv[k];
                    num += r * r;
                    den += bv[k] * bv[k];
                }
                residuals.push(num_traits::Float::sqrt(num / den).to_f64().unwrap());
            }
            return Err(SolveError::NotConverged {
                iterations: options.max_iterations,
                residuals,
            });
        }
    }
    unreachable!()
}

/// (u' A u) / (u' B u). By min-max this is at least the smallest eigenvalue,
/// and at least the second one if u is B-orthogonal to the first
/// eigenvector.
pub fn rayleigh_quotient<T: Real>(
    problem: &SpectralProblem<T>,
    vector: &[T],
) -> Result<T, SolveError> {
    let den = problem.mass.quadratic_form(vector);
    if !(den > T::zero()) {
        return Err(SolveError::ZeroBNorm);
    }
    Ok(problem.stiffness.quadratic_form(vector) / den)
}

/// Eigenvalue table: rows are problem kinds, columns the first `count`
/// eigenvalues, aligned by index. Inputs to the ordering checks
/// lambda_k^SR <= min(lambda_k^N, lambda_k^D, lambda_k^S) and
/// lambda_k^SRBD >= lambda_k^SR.
#[derive(Debug, Clone, Serialize)]
pub struct EigenTable {
    pub kinds: Vec<String>,
    pub eigenvalues: Vec<Vec<f64>>,
}

pub fn eigenvalue_table<T: Real + nalgebra::RealField>(
    mesh: &WeightedMesh<T>,
    kinds: &[ProblemKind<T>],
    count: usize,
) -> Result<EigenTable, SolveError> {
    let mut table = EigenTable { kinds: Vec::new(), eigenvalues: Vec::new() };
    for &kind in kinds {
        let problem = crate::assembly::assemble_problem(mesh, kind)?;
        let result = solve_generalized(&problem, count, cast::<T>(1e-9))?;
        table.kinds.push(kind.label());
        table
            .eigenvalues
            .push(result.eigenvalues.iter().map(|v| v.to_f64().unwrap()).collect());
    }
    let _ = mesh_hash(mesh);
    Ok(table)
}

/// Re-normalization that keeps the weighted measure fixed when the metric is
/// scaled by `factor`: alpha picks up 1/factor^2 (areas), beta 1/factor
/// (lengths). Under this convention every eigenvalue of every kind scales by
/// exactly 1/factor^2.
pub fn rescale_weights_for_metric<T: Real>(
    mesh: &WeightedMesh<T>,
    factor: T,
) -> Result<WeightedMesh<T>, crate::mesh::MeshError> {
    let a2 = factor * factor;
    mesh.with_weights(
        mesh.alpha().iter().map(|&a| a / a2).collect(),
        mesh.beta().iter().map(|&b| b / factor).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_problem, ProblemKind};
    use crate::mesh::{generate_disk_mesh, wedge_disk, Geometry};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sr_disk_has_zero_mode_with_constant_eigenfunction() {
        let mesh = generate_disk_mesh::<f64>(2, Geometry::Euclidean).unwrap();
        let p = assemble_problem(&mesh, ProblemKind::StickyReflection).unwrap();
        let r = solve_generalized(&p, 3, 1e-9).unwrap();
        assert!(r.eigenvalues[0].abs() < 1e-8);
        assert!(r.eigenvalues[1] > 0.0);
        let v0 = &r.eigenvectors[0];
        let mean = v0.iter().sum::<f64>() / v0.len() as f64;
        for &x in v0 {
            assert!((x - mean).abs() <= 1e-6 * mean.abs());
        }
    }

    #[test]
    fn residual_certificates_hold() {
        let mesh = generate_disk_mesh::<f64>(2, Geometry::Hyperbolic).unwrap();
        for kind in [ProblemKind::Neumann, ProblemKind::Dirichlet, ProblemKind::Steklov] {
            let p = assemble_problem(&mesh, kind).unwrap();
            let r = solve_generalized(&p, 4, 1e-9).unwrap();
            for (i, &res) in r.residuals.iter().enumerate() {
                assert!(res <= 1e-8, "{kind:?} pair {i} residual {res}");
            }
            for w in r.eigenvalues.windows(2) {
                assert!(w[0] <= w[1] + 1e-12);
            }
        }
    }

    #[test]
    fn eigenvectors_are_b_orthonormal() {
        let mesh = generate_disk_mesh::<f64>(2, Geometry::Euclidean).unwrap();
        let p = assemble_problem(&mesh, ProblemKind::StickyReflection).unwrap();
        let r = solve_generalized(&p, 4, 1e-9).unwrap();
        for i in 0..4 {
            for j in 0..=i {
                let bv = p.mass.matvec_alloc(&r.eigenvectors[j]);
                let d = dot(&r.eigenvectors[i], &bv);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-8, "({i},{j}) -> {d}");
            }
        }
    }

    #[test]
    fn dense_and_iterative_paths_agree() {
        // refinement 4 disk: 1089 dofs, inside the 500..1500 window
        let mesh = generate_disk_mesh::<f64>(4, Geometry::Euclidean).unwrap();
        assert!(mesh.num_vertices() >= 500 && mesh.num_vertices() <= 1500);
        for kind in [ProblemKind::Neumann, ProblemKind::StickyReflection] {
            let p = assemble_problem(&mesh, kind).unwrap();
            let dense = solve_with(
                &p,
                5,
                SolveOptions { force_path: Some(SolverPath::Dense), ..Default::default() },
            )
            .unwrap();
            let iter = solve_with(
                &p,
                5,
                SolveOptions { force_path: Some(SolverPath::Iterative), ..Default::default() },
            )
            .unwrap();
            for k in 0..5 {
                let (a, b) = (dense.eigenvalues[k], iter.eigenvalues[k]);
                assert!(
                    (a - b).abs() <= 1e-7 * a.abs().max(1.0),
                    "{kind:?} k={k}: dense {a} vs iterative {b}"
                );
            }
        }
    }

    #[test]
    fn rayleigh_quotient_bounds() {
        let mesh = generate_disk_mesh::<f64>(2, Geometry::Euclidean).unwrap();
        let p = assemble_problem(&mesh, ProblemKind::StickyReflection).unwrap();
        let r = solve_generalized(&p, 2, 1e-9).unwrap();
        let ones = vec![1.0; mesh.num_vertices()];
        assert!(rayleigh_quotient(&p, &ones).unwrap().abs() < 1e-10);
        // first eigenvector reproduces lambda_1
        let q = rayleigh_quotient(&p, &r.eigenvectors[1]).unwrap();
        assert!((q - r.eigenvalues[1]).abs() < 1e-8);
        // random vector B-orthogonal to constants is above lambda_1
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let mut v: Vec<f64> =
                (0..mesh.num_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b1 = p.mass.matvec_alloc(&ones);
            let c = dot(&v, &b1) / dot(&ones, &b1);
            for (x, o) in v.iter_mut().zip(&ones) {
                *x -= c * o;
            }
            let q = rayleigh_quotient(&p, &v).unwrap();
            assert!(q >= r.eigenvalues[1] - 1e-10);
        }
        // zero vector errors
        assert!(matches!(
            rayleigh_quotient(&p, &vec![0.0; mesh.num_vertices()]),
            Err(SolveError::ZeroBNorm)
        ));
    }

    #[test]
    fn count_bounds_checked() {
        let mesh = wedge_disk::<f64>(6).unwrap();
        let p = assemble_problem(&mesh, ProblemKind::Neumann).unwrap();
        assert!(matches!(
            solve_generalized(&p, 100, 1e-9),
            Err(SolveError::CountTooLarge { .. })
        ));
    }

    #[test]
    fn f32_instantiation_solves() {
        // Dirichlet has no zero mode, so f32 rounding does not dominate the
        // residual scale. First Dirichlet eigenvalue of the unit disk is
        // j_{0,1}^2 = 5.7832, overestimated on the coarse mesh.
        let mesh = generate_disk_mesh::<f32>(2, Geometry::Euclidean).unwrap();
        let p = assemble_problem(&mesh, ProblemKind::Dirichlet).unwrap();
        let r = solve_with(&p, 1, SolveOptions { tol: 1e-3_f32, ..Default::default() }).unwrap();
        assert!((r.eigenvalues[0] - 5.78).abs() < 0.6, "{}", r.eigenvalues[0]);
    }
}
