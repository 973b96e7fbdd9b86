//! Spectral integration tests: classical reference eigenvalues, the
//! eigenvalue comparison orderings, scaling laws and refinement behaviour.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sticky_spectra_core::assembly::{
    assemble_boundary_mass, assemble_boundary_stiffness, assemble_problem, DofMap, ProblemKind,
    SpectralProblem,
};
use sticky_spectra_core::disk::{disk_gap, DiskModel};
use sticky_spectra_core::eigensolver::{
    eigenvalue_table, rescale_weights_for_metric, solve_generalized,
};
use sticky_spectra_core::mesh::{
    generate_disk_mesh, generate_dumbbell_mesh, wedge_disk, Geometry, WeightedMesh,
};
use sticky_spectra_core::sparse::Csr;

const LAMBDA_N_EUCLID: f64 = 3.3899577166718887;
const LAMBDA_N_HYPER: f64 = 2.9613966295212686;

fn constant_weight_disk(
    geometry: Geometry,
    level: usize,
    alpha_bar: f64,
) -> (WeightedMesh<f64>, DiskModel<f64>) {
    let model = DiskModel::new(geometry, alpha_bar, 0.0).unwrap();
    let mesh = generate_disk_mesh::<f64>(level, geometry).unwrap();
    let a = alpha_bar / model.domain_area();
    let b = (1.0 - alpha_bar) / model.domain_perimeter();
    let alpha = vec![a; mesh.num_vertices()];
    let beta: Vec<f64> = (0..mesh.num_vertices())
        .map(|v| if mesh.is_boundary_vertex(v) { b } else { 0.0 })
        .collect();
    (mesh.with_weights(alpha, beta).unwrap(), model)
}

#[test]
fn neumann_gap_euclidean_within_spec() {
    let mesh = generate_disk_mesh::<f64>(4, Geometry::Euclidean).unwrap();
    let p = assemble_problem(&mesh, ProblemKind::Neumann).unwrap();
    let r = solve_generalized(&p, 2, 1e-9).unwrap();
    let rel = (r.eigenvalues[1] - LAMBDA_N_EUCLID) / LAMBDA_N_EUCLID;
    assert!(rel.abs() < 0.01, "relative error {rel}");
}

#[test]
fn neumann_gap_hyperbolic_within_spec() {
    let mesh = generate_disk_mesh::<f64>(4, Geometry::Hyperbolic).unwrap();
    let p = assemble_problem(&mesh, ProblemKind::Neumann).unwrap();
    let r = solve_generalized(&p, 2, 1e-9).unwrap();
    let rel = (r.eigenvalues[1] - LAMBDA_N_HYPER) / LAMBDA_N_HYPER;
    assert!(rel.abs() < 0.02, "relative error {rel}");
}

#[test]
fn boundary_pair_first_circle_eigenvalue() {
    // the boundary (K, M) pair restricted to the circle has spectrum k^2
    // (circumference 2 pi): the first nonzero eigenvalue is 1
    let mesh = generate_disk_mesh::<f64>(5, Geometry::Euclidean).unwrap();
    let k = assemble_boundary_stiffness(&mesh).unwrap();
    let m = assemble_boundary_mass(&mesh).unwrap();
    let boundary = mesh.boundary_vertices();
    let problem = SpectralProblem {
        stiffness: k.restrict(&boundary, &boundary),
        mass: m.restrict(&boundary, &boundary),
        dof_map: DofMap::Boundary(boundary),
        kind: ProblemKind::Neumann,
    };
    let r = solve_generalized(&problem, 3, 1e-9).unwrap();
    assert!(r.eigenvalues[0].abs() < 1e-8);
    assert!((r.eigenvalues[1] - 1.0).abs() < 0.01, "{}", r.eigenvalues[1]);
    // double multiplicity: cos and sin modes
    assert!((r.eigenvalues[2] - 1.0).abs() < 0.01);
}

#[test]
fn steklov_disk_constant_weights() {
    // harmonic modes r^k e^{ik theta}: lambda_k^S = k alpha / beta
    let mesh = generate_disk_mesh::<f64>(4, Geometry::Euclidean).unwrap();
    let alpha = vec![2.0; mesh.num_vertices()];
    let beta: Vec<f64> = (0..mesh.num_vertices())
        .map(|v| if mesh.is_boundary_vertex(v) { 0.5 } else { 0.0 })
        .collect();
    let mesh = mesh.with_weights(alpha, beta).unwrap();
    let p = assemble_problem(&mesh, ProblemKind::Steklov).unwrap();
    let r = solve_generalized(&p, 4, 1e-9).unwrap();
    assert!(r.eigenvalues[0].abs() < 1e-8);
    let ratio = 2.0 / 0.5;
    assert!((r.eigenvalues[1] - ratio).abs() / ratio < 0.01, "{}", r.eigenvalues[1]);
    assert!((r.eigenvalues[2] - ratio).abs() / ratio < 0.01);
}

fn ordering_kinds(delta: f64) -> [ProblemKind<f64>; 5] {
    [
        ProblemKind::StickyReflection,
        ProblemKind::Neumann,
        ProblemKind::Dirichlet,
        ProblemKind::Steklov,
        ProblemKind::StickyReflectionBoundaryDiffusion(delta),
    ]
}

fn assert_orderings(mesh: &WeightedMesh<f64>, label: &str) {
    let table = eigenvalue_table(mesh, &ordering_kinds(1.0), 4).unwrap();
    let row = |kind: &str| -> &Vec<f64> {
        let i = table.kinds.iter().position(|k| k.starts_with(kind)).unwrap();
        &table.eigenvalues[i]
    };
    let (sr, n, d, s, srbd) =
        (row("sr"), row("neumann"), row("dirichlet"), row("steklov"), row("srbd"));
    for k in 1..4 {
        assert!(sr[k] <= n[k] + 1e-8, "{label}: sr[{k}]={} vs neumann {}", sr[k], n[k]);
        assert!(sr[k] <= d[k] + 1e-8, "{label}: sr[{k}]={} vs dirichlet {}", sr[k], d[k]);
        assert!(sr[k] <= s[k] + 1e-8, "{label}: sr[{k}]={} vs steklov {}", sr[k], s[k]);
        assert!(srbd[k] >= sr[k] - 1e-8, "{label}: srbd[{k}]={} vs sr {}", srbd[k], sr[k]);
    }
}

#[test]
fn eigenvalue_orderings_on_disk_and_dumbbell() {
    let disk = generate_disk_mesh::<f64>(2, Geometry::Euclidean).unwrap();
    assert_orderings(&disk, "disk");
    let dumbbell = generate_dumbbell_mesh::<f64>(1.0, 0.3, 1.0, 1).unwrap();
    assert_orderings(&dumbbell, "dumbbell");
    // random weights keep the orderings (they hold pointwise in the
    // variational quotients)
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for seed in 0..3 {
        let alpha: Vec<f64> = (0..disk.num_vertices()).map(|_| rng.gen_range(0.2..2.0)).collect();
        let beta: Vec<f64> = (0..disk.num_vertices())
            .map(|v| if disk.is_boundary_vertex(v) { rng.gen_range(0.2..2.0) } else { 0.0 })
            .collect();
        let mesh = disk.with_weights(alpha, beta).unwrap();
        assert_orderings(&mesh, &format!("disk seed {seed}"));
    }
}

#[test]
fn srbd_gap_nondecreasing_in_delta() {
    let mesh = generate_disk_mesh::<f64>(2, Geometry::Euclidean).unwrap();
    let mut prev = f64::NEG_INFINITY;
    for delta in [0.0, 0.5, 1.0, 2.0] {
        let p =
            assemble_problem(&mesh, ProblemKind::StickyReflectionBoundaryDiffusion(delta))
                .unwrap();
        let r = solve_generalized(&p, 2, 1e-9).unwrap();
        assert!(r.eigenvalues[1] >= prev - 1e-8, "delta {delta}");
        prev = r.eigenvalues[1];
    }
}

#[test]
fn metric_scaling_divides_every_gap_by_the_square() {
    // weights re-normalized to keep the measure fixed: alpha/s^2, beta/s
    let mesh = generate_disk_mesh::<f64>(2, Geometry::Hyperbolic).unwrap();
    let s = 2.0;
    let scaled = rescale_weights_for_metric(&mesh.scale_metric(s), s).unwrap();
    for kind in ordering_kinds(1.0) {
        let p0 = assemble_problem(&mesh, kind).unwrap();
        let p1 = assemble_problem(&scaled, kind).unwrap();
        let r0 = solve_generalized(&p0, 3, 1e-9).unwrap();
        let r1 = solve_generalized(&p1, 3, 1e-9).unwrap();
        for k in 0..3 {
            let want = r0.eigenvalues[k] / (s * s);
            let got = r1.eigenvalues[k];
            assert!(
                (got - want).abs() <= 1e-6 * want.abs().max(1e-9),
                "{kind:?} k={k}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn joint_weight_scaling_leaves_eigenvalues_unchanged() {
    let mesh = wedge_disk::<f64>(12).unwrap();
    let scaled = mesh
        .with_weights(
            mesh.alpha().iter().map(|a| 0.37 * a).collect(),
            mesh.beta().iter().map(|b| 0.37 * b).collect(),
        )
        .unwrap();
    for kind in ordering_kinds(1.0) {
        let r0 =
            solve_generalized(&assemble_problem(&mesh, kind).unwrap(), 3, 1e-9).unwrap();
        let r1 =
            solve_generalized(&assemble_problem(&scaled, kind).unwrap(), 3, 1e-9).unwrap();
        for k in 0..3 {
            let (a, b) = (r0.eigenvalues[k], r1.eigenvalues[k]);
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{kind:?} k={k}");
        }
    }
}

#[test]
fn gap_converges_monotonically_under_refinement() {
    // nested P1 spaces: discrete eigenvalues decrease with refinement and
    // consecutive changes shrink
    for kind in [ProblemKind::Neumann, ProblemKind::StickyReflection, ProblemKind::Dirichlet] {
        let mut gaps = Vec::new();
        for level in 1..=4 {
            let mesh = generate_disk_mesh::<f64>(level, Geometry::Euclidean).unwrap();
            let p = assemble_problem(&mesh, kind).unwrap();
            let idx = match kind {
                ProblemKind::Dirichlet => 0,
                _ => 1,
            };
            let r = solve_generalized(&p, idx + 1, 1e-9).unwrap();
            gaps.push(r.eigenvalues[idx]);
        }
        for w in gaps.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "{kind:?}: not decreasing {gaps:?}");
        }
        let changes: Vec<f64> =
            gaps.windows(2).map(|w| ((w[1] - w[0]) / w[0]).abs()).collect();
        for c in changes.windows(2) {
            assert!(c[1] < c[0], "{kind:?}: changes not shrinking {changes:?}");
        }
    }
}

#[test]
fn fem_cross_validates_semi_analytic_gaps() {
    // moderate-size spot check; the acceptance suite runs the full grid at
    // refinement 5
    for geometry in [Geometry::Euclidean, Geometry::Hyperbolic] {
        let (mesh, model) = constant_weight_disk(geometry, 4, 0.5);
        let exact = disk_gap(&model).unwrap();
        let p = assemble_problem(&mesh, ProblemKind::StickyReflection).unwrap();
        let r = solve_generalized(&p, 2, 1e-9).unwrap();
        let rel = ((r.eigenvalues[1] - exact) / exact).abs();
        assert!(rel < 0.01, "{geometry:?}: FEM {} vs exact {exact}", r.eigenvalues[1]);
    }
}

#[test]
fn matrix_market_export_round_trips_through_text() {
    let mesh = wedge_disk::<f64>(8).unwrap();
    let p = assemble_problem(&mesh, ProblemKind::StickyReflection).unwrap();
    let mut buf = Vec::new();
    p.stiffness.write_matrix_market(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().contains("coordinate real"));
    let header: Vec<usize> =
        lines.next().unwrap().split_whitespace().map(|t| t.parse().unwrap()).collect();
    let mut triplets = Vec::new();
    for line in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let (i, j): (usize, usize) = (parts[0].parse().unwrap(), parts[1].parse().unwrap());
        let v: f64 = parts[2].parse().unwrap();
        triplets.push((i - 1, j - 1, v));
    }
    assert_eq!(triplets.len(), header[2]);
    let back = Csr::from_triplets(header[0], header[1], &triplets);
    for (i, j, v) in p.stiffness.triplets() {
        assert_eq!(back.get(i, j), v);
    }
}
