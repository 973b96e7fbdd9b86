//! Measure-theoretic invariants of subset measures: exact complementation,
//! additivity, refinement consistency and the half-disk reference values.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sticky_spectra_core::mesh::{
    generate_disk_mesh, generate_dumbbell_mesh, mesh_from_json, mesh_to_json, Geometry,
    TriangleSubset, WeightedMesh,
};

fn random_mask(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.gen_bool(0.5)).collect()
}

fn test_meshes() -> Vec<WeightedMesh<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut meshes = vec![
        generate_disk_mesh::<f64>(2, Geometry::Euclidean).unwrap(),
        generate_disk_mesh::<f64>(2, Geometry::Hyperbolic).unwrap(),
        generate_dumbbell_mesh::<f64>(1.0, 0.3, 1.0, 1).unwrap(),
    ];
    // one mesh with rough random weights
    let base = generate_disk_mesh::<f64>(2, Geometry::Euclidean).unwrap();
    let alpha: Vec<f64> = (0..base.num_vertices()).map(|_| rng.gen_range(0.1..3.0)).collect();
    let beta: Vec<f64> = (0..base.num_vertices())
        .map(|v| if base.is_boundary_vertex(v) { rng.gen_range(0.1..3.0) } else { 0.0 })
        .collect();
    meshes.push(base.with_weights(alpha, beta).unwrap());
    meshes
}

#[test]
fn complementation_identities_hold_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for mesh in test_meshes() {
        let total_bulk = mesh.bulk_measure();
        let total_boundary = mesh.boundary_measure();
        for _ in 0..50 {
            let mask = random_mask(&mut rng, mesh.num_triangles());
            let subset = TriangleSubset::from_mask(&mesh, &mask);
            let complement = subset.complement();
            let m = subset.measures();
            let mc = complement.measures();
            assert_eq!(m.interior_cut, mc.interior_cut);
            assert_eq!(m.arc_endpoints, mc.arc_endpoints);
            assert!((m.bulk + mc.bulk - total_bulk).abs() <= 1e-12 * total_bulk.max(1.0));
            assert!(
                (m.exterior_arc + mc.exterior_arc - total_boundary).abs()
                    <= 1e-12 * total_boundary.max(1.0)
            );
        }
    }
}

#[test]
fn bulk_is_additive_over_disjoint_subsets() {
    let mesh = generate_disk_mesh::<f64>(2, Geometry::Euclidean).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for t in 0..mesh.num_triangles() {
            match rng.gen_range(0..3) {
                0 => a.push(t),
                1 => b.push(t),
                _ => {}
            }
        }
        let sa = mesh.subset(&a).unwrap();
        let sb = mesh.subset(&b).unwrap();
        let su = mesh.subset(&[a.clone(), b.clone()].concat()).unwrap();
        let sum = sa.measures().bulk + sb.measures().bulk;
        assert!((su.measures().bulk - sum).abs() <= 1e-12 * sum.max(1.0));
    }
}

/// triangles with centroid x >= 0; the y axis is a mesh line at every level
fn half_disk(mesh: &WeightedMesh<f64>) -> Vec<usize> {
    (0..mesh.num_triangles()).filter(|&t| mesh.centroid(t)[0] >= 0.0).collect()
}

#[test]
fn half_disk_measures_converge_to_continuum() {
    // continuum: bulk pi/2, cut 2 (the diameter), arc pi, endpoints 2
    let pi = std::f64::consts::PI;
    let mesh = generate_disk_mesh::<f64>(4, Geometry::Euclidean).unwrap();
    let subset = mesh.subset(&half_disk(&mesh)).unwrap();
    let m = subset.measures();
    assert!((m.bulk - pi / 2.0).abs() / (pi / 2.0) < 0.02, "bulk {}", m.bulk);
    assert!((m.interior_cut - 2.0).abs() / 2.0 < 0.02, "cut {}", m.interior_cut);
    assert!((m.exterior_arc - pi).abs() / pi < 0.02, "arc {}", m.exterior_arc);
    assert!((m.arc_endpoints - 2.0).abs() / 2.0 < 0.02, "endpoints {}", m.arc_endpoints);
}

#[test]
fn half_disk_measures_are_cauchy_in_refinement() {
    let mut prev: Option<[f64; 4]> = None;
    let mut changes = Vec::new();
    for level in 3..=5 {
        let mesh = generate_disk_mesh::<f64>(level, Geometry::Euclidean).unwrap();
        let m = mesh.subset(&half_disk(&mesh)).unwrap().measures();
        let cur = [m.bulk, m.interior_cut, m.exterior_arc, m.arc_endpoints];
        if let Some(p) = prev {
            let rel: f64 = (0..4).map(|i| ((cur[i] - p[i]) / p[i]).abs()).fold(0.0, f64::max);
            changes.push(rel);
        }
        prev = Some(cur);
    }
    assert!(changes.iter().all(|&c| c < 0.02), "changes {changes:?}");
}

#[test]
fn metric_scaling_acts_exactly_on_measures() {
    let mesh = generate_disk_mesh::<f64>(2, Geometry::Euclidean).unwrap();
    let subset_tris = half_disk(&mesh);
    let m = mesh.subset(&subset_tris).unwrap().measures();
    for s in [0.5, 2.0, 7.0] {
        let scaled = mesh.scale_metric(s);
        let ms = scaled.subset(&subset_tris).unwrap().measures();
        assert!((ms.bulk - s * s * m.bulk).abs() <= 1e-12 * ms.bulk.abs());
        assert!((ms.interior_cut - s * m.interior_cut).abs() <= 1e-12 * ms.interior_cut.abs());
        assert!((ms.exterior_arc - s * m.exterior_arc).abs() <= 1e-12 * ms.exterior_arc.abs());
        assert_eq!(ms.arc_endpoints, m.arc_endpoints);
    }
    // identity scale changes nothing at all
    let same = mesh.scale_metric(1.0);
    assert_eq!(same.subset(&subset_tris).unwrap().measures(), m);
}

#[test]
fn normalization_reaches_unit_total_measure() {
    // alpha = beta = 1 on the unit disk: the continuum constant is
    // 1/(pi + 2 pi) = 1/(3 pi)
    let mesh = generate_disk_mesh::<f64>(4, Geometry::Euclidean).unwrap();
    let normalized = mesh.normalize_weights().unwrap();
    assert!(normalized.is_normalized(1e-12));
    let c = normalized.alpha()[0];
    let expect = 1.0 / (3.0 * std::f64::consts::PI);
    assert!((c - expect).abs() / expect < 0.01, "{c} vs {expect}");
    // idempotence
    let again = normalized.normalize_weights().unwrap();
    for (a, b) in normalized.alpha().iter().zip(again.alpha()) {
        assert!((a - b).abs() <= 1e-15 * a.abs());
    }
    // joint scaling invariance
    let scaled = mesh
        .with_weights(
            mesh.alpha().iter().map(|a| 7.0 * a).collect(),
            mesh.beta().iter().map(|b| 7.0 * b).collect(),
        )
        .unwrap()
        .normalize_weights()
        .unwrap();
    for (a, b) in normalized.alpha().iter().zip(scaled.alpha()) {
        assert!((a - b).abs() <= 1e-14 * a.abs());
    }
}

#[test]
fn dumbbell_cheeger_estimate_decreases_with_neck_width() {
    use sticky_spectra_core::assembly::{assemble_problem, ProblemKind};
    use sticky_spectra_core::cheeger::{sweep_upper_bound, ConstantKind, RestrictionVariant};
    use sticky_spectra_core::eigensolver::solve_generalized;
    let mut estimates = Vec::new();
    for width in [0.4, 0.1] {
        let mesh = generate_dumbbell_mesh::<f64>(1.0, width, 1.0, 2)
            .unwrap()
            .normalize_weights()
            .unwrap();
        let problem = assemble_problem(&mesh, ProblemKind::StickyReflection).unwrap();
        let solved = solve_generalized(&problem, 2, 1e-9).unwrap();
        let sweep = sweep_upper_bound(
            &mesh,
            &solved.eigenvectors[1],
            ConstantKind::Hc,
            RestrictionVariant::Bulk,
            0.0,
        )
        .unwrap();
        estimates.push(sweep.value);
    }
    assert!(
        estimates[1] < estimates[0],
        "narrower neck must have the smaller Cheeger estimate: {estimates:?}"
    );
}

#[test]
fn wide_neck_dumbbell_compares_to_convex_domain() {
    use sticky_spectra_core::assembly::{assemble_problem, ProblemKind};
    use sticky_spectra_core::cheeger::{sweep_upper_bound, ConstantKind, RestrictionVariant};
    use sticky_spectra_core::eigensolver::solve_generalized;
    // at width 0.99 the profile is nearly convex; the Cheeger estimate
    // should sit within a factor ~2 of the unit disk's 4/pi
    let mesh =
        generate_dumbbell_mesh::<f64>(1.0, 0.99, 1.0, 3).unwrap().normalize_weights().unwrap();
    let problem = assemble_problem(&mesh, ProblemKind::StickyReflection).unwrap();
    let solved = solve_generalized(&problem, 2, 1e-9).unwrap();
    let sweep = sweep_upper_bound(
        &mesh,
        &solved.eigenvectors[1],
        ConstantKind::Hc,
        RestrictionVariant::Bulk,
        0.0,
    )
    .unwrap();
    let disk_value = 4.0 / std::f64::consts::PI;
    assert!(sweep.value > disk_value / 3.0 && sweep.value < disk_value * 3.0, "{}", sweep.value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn json_round_trip_preserves_measures(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = generate_disk_mesh::<f64>(1, Geometry::Euclidean).unwrap();
        let alpha: Vec<f64> = (0..base.num_vertices()).map(|_| rng.gen_range(0.01..5.0)).collect();
        let beta: Vec<f64> = (0..base.num_vertices())
            .map(|v| if base.is_boundary_vertex(v) { rng.gen_range(0.01..5.0) } else { 0.0 })
            .collect();
        let mesh = base.with_weights(alpha, beta).unwrap();
        let text = mesh_to_json(&mesh).to_string();
        let back = mesh_from_json::<f64>(&text).unwrap();
        prop_assert_eq!(mesh.bulk_measure(), back.bulk_measure());
        prop_assert_eq!(mesh.boundary_measure(), back.boundary_measure());
        let text2 = mesh_to_json(&back).to_string();
        prop_assert_eq!(text, text2);
    }

    #[test]
    fn complement_of_complement_is_identity(mask_seed in 0u64..5000) {
        let mesh = generate_disk_mesh::<f64>(1, Geometry::Euclidean).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(mask_seed);
        let mask = random_mask(&mut rng, mesh.num_triangles());
        let subset = TriangleSubset::from_mask(&mesh, &mask);
        let back = subset.complement().complement();
        prop_assert_eq!(subset.members(), back.members());
    }
}
