use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;
use stressfirst::fem::{apply_divergence, StressSpace};
use stressfirst::mesh::{emit_mesh, parse_mesh};
use stressfirst::tensor::certify_bounds;
use stressfirst::verify::{
    audit_rng, jittered_square, random_anisotropic, random_isotropic, random_mixed_partition,
};
use stressfirst::{ElasticityTensor, StrainOperator, SymTensor, TriangleMesh};

#[test]
fn energy_bounds_on_a_thousand_strains() {
    let mut rng = audit_rng(1, "energy-bounds");
    let tensors = [
        ElasticityTensor::isotropic(1.0, 1.0, 2).unwrap(),
        ElasticityTensor::isotropic(0.0, 0.5, 2).unwrap(),
        random_isotropic(&mut rng),
        random_anisotropic(&mut rng),
    ];
    for c in &tensors {
        let (c0, c_upper) = certify_bounds(c.matrix()).unwrap();
        for _ in 0..1000 {
            let eps = SymTensor::from_mandel(
                DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0)),
                2,
            )
            .unwrap();
            let sigma = c.apply(&eps).unwrap();
            let (energy, norm) = (sigma.dot(&eps), eps.dot(&eps));
            assert!(energy >= c0 * norm * (1.0 - 1e-12));
            assert!(energy <= c_upper * norm * (1.0 + 1e-12));
            let back = c.apply_compliance(&sigma).unwrap();
            assert!((back.components() - eps.components()).amax() <= 1e-12);
        }
    }
}

#[test]
fn weighted_product_is_bounded_by_the_l2_product() {
    let mut rng = audit_rng(2, "weighted-bounds");
    let mesh = jittered_square(4, &mut rng);
    let material: Vec<_> = (0..mesh.triangles().len())
        .map(|_| random_anisotropic(&mut rng))
        .collect();
    let (lo, hi) = material.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), c| {
        let (a, b) = certify_bounds(c.matrix()).unwrap();
        (lo.min(a), hi.max(b))
    });
    let space = StressSpace::new(&mesh, material).unwrap();
    for _ in 0..200 {
        let s = DVector::from_fn(3 * mesh.triangles().len(), |_, _| rng.gen_range(-1.0..1.0));
        let w = space.weighted_ip(&s, &s).unwrap();
        let l2 = space.l2_ip(&s, &s).unwrap();
        assert!(l2 / hi <= w * (1.0 + 1e-12) && w <= l2 / lo * (1.0 + 1e-12));
    }
}

#[test]
fn divergence_is_the_adjoint_of_the_strain() {
    let mut rng = audit_rng(3, "divergence-adjoint");
    for _ in 0..100 {
        let mesh = jittered_square(rng.gen_range(1..=5), &mut rng);
        let partition = random_mixed_partition(&mesh, &mut rng);
        let op = StrainOperator::assemble(&mesh, &partition);
        let nt = mesh.triangles().len();
        let space = StressSpace::new(&mesh, vec![random_isotropic(&mut rng); nt]).unwrap();
        let sigma = DVector::from_fn(3 * nt, |_, _| rng.gen_range(-1.0..1.0));
        let w = DVector::from_fn(op.free_dofs().len(), |_, _| rng.gen_range(-1.0..1.0));
        let lhs = apply_divergence(&space, &op, &sigma).unwrap().dot(&w);
        let rhs = space.l2_ip(&sigma, &op.apply_free(&w)).unwrap();
        assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }
}

#[test]
fn jittered_meshes_survive_a_text_round_trip() {
    let mut rng = audit_rng(4, "mesh-round-trip");
    for _ in 0..10 {
        let mesh = jittered_square(rng.gen_range(1..=6), &mut rng);
        let partition = random_mixed_partition(&mesh, &mut rng);
        let text = emit_mesh(&mesh, &partition);
        let (back, back_part) = parse_mesh::<f64>(&text, false).unwrap();
        assert_eq!(emit_mesh(&back, &back_part), text);
        let area: f64 = back.areas().iter().sum();
        assert!((area - 1.0).abs() <= 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn structured_square_counts_and_area(m in 1usize..16) {
        let mesh = TriangleMesh::structured_unit_square(m).unwrap();
        prop_assert_eq!(mesh.vertices().len(), (m + 1) * (m + 1));
        prop_assert_eq!(mesh.triangles().len(), 2 * m * m);
        prop_assert_eq!(mesh.boundary_edges().len(), 4 * m);
        let area: f64 = mesh.areas().iter().sum();
        prop_assert!((area - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn rigid_motions_have_zero_strain(m in 1usize..6, a in -1.0f64..1.0, b in -1.0f64..1.0, r in -1.0f64..1.0) {
        let mesh = TriangleMesh::structured_unit_square(m).unwrap();
        let op = StrainOperator::with_pinned_dofs(&mesh, &Default::default());
        let u = DVector::from_iterator(
            2 * mesh.vertices().len(),
            mesh.vertices().iter().flat_map(|p| [a - r * p[1], b + r * p[0]]),
        );
        prop_assert!(op.apply(&u).amax() <= 1e-13);
    }
}
