use std::sync::Arc;

use proptest::prelude::*;
use quiverkit::linalg::{self, CMat};
use quiverkit::moment::{moment_map, trace_defect};
use quiverkit::quiver::{
    direct_sum, gauge_act, generated_subrep, invariance_residual, random_representation,
    representation_dimension, DimensionVector, GaugeElement, Quiver, Representation,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mixed_quiver() -> Arc<Quiver> {
    Arc::new(Quiver::from_edges(
        &["a", "b", "c"],
        &[
            ("x", "a", "b"),
            ("y", "b", "c"),
            ("z", "c", "a"),
            ("l", "b", "b"),
        ],
    ))
}

fn random_gauge(rng: &mut ChaCha8Rng, d: &DimensionVector, with_twist: bool) -> GaugeElement {
    let g =
        d.n.iter()
            .map(|&k| linalg::random_invertible(rng, k))
            .collect();
    let g_tw = with_twist.then(|| {
        d.m.iter()
            .map(|&k| linalg::random_invertible(rng, k))
            .collect()
    });
    GaugeElement { g, g_tw }
}

fn random_unitary_gauge(rng: &mut ChaCha8Rng, d: &DimensionVector) -> GaugeElement {
    GaugeElement {
        g: d.n
            .iter()
            .map(|&k| linalg::random_unitary(rng, k))
            .collect(),
        g_tw: Some(
            d.m.iter()
                .map(|&k| linalg::random_unitary(rng, k))
                .collect(),
        ),
    }
}

fn dims() -> impl Strategy<Value = DimensionVector> {
    (
        prop::collection::vec(0usize..4, 3),
        prop::collection::vec(1usize..3, 4),
    )
        .prop_map(|(n, m)| DimensionVector::new(n, m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gauge_action_is_a_left_action(d in dims(), seed in any::<u64>()) {
        let q = mixed_quiver();
        let r = random_representation(q, d.clone(), seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
        let id = gauge_act(&GaugeElement::identity(&d), &r).unwrap();
        prop_assert!(id.distance(&r) <= 1e-12);
        let g = random_gauge(&mut rng, &d, true);
        let h = random_gauge(&mut rng, &d, true);
        let lhs = gauge_act(&g, &gauge_act(&h, &r).unwrap()).unwrap();
        let rhs = gauge_act(&g.compose(&h), &r).unwrap();
        let scale = 1.0 + lhs.norm_sq().sqrt();
        prop_assert!(lhs.distance(&rhs) <= 1e-12 * scale);
    }

    #[test]
    fn dimension_counts_entries(d in dims(), seed in any::<u64>()) {
        let q = mixed_quiver();
        let r = random_representation(q.clone(), d.clone(), seed).unwrap();
        let entries: usize = r.phi().iter().map(|p| p.nrows() * p.ncols()).sum();
        prop_assert_eq!(representation_dimension(&q, &d).unwrap(), entries);
    }

    #[test]
    fn generated_subrep_is_invariant_and_minimal(d in dims(), seed in any::<u64>(), vertex in 0usize..3) {
        let q = mixed_quiver();
        prop_assume!(d.n[vertex] > 0);
        let r = random_representation(q, d.clone(), seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let v = linalg::random_gaussian(&mut rng, d.n[vertex], 1).column(0).into_owned();
        let u = generated_subrep(&r, &[(vertex, v.clone())]);
        prop_assert!(u.invariance_residual <= 1e-10);
        prop_assert!(invariance_residual(&r, &u.subspace) <= 1e-10);
        // a second seed already inside does not enlarge it
        let inside = &u.subspace.bases[vertex] * linalg::random_gaussian(&mut rng, u.subspace.bases[vertex].ncols(), 1);
        let again = generated_subrep(&r, &[(vertex, v), (vertex, inside.column(0).into_owned())]);
        prop_assert!(again.subspace.same_as(&u.subspace));
    }

    #[test]
    fn direct_sum_commutes_with_block_gauge(d1 in dims(), d2 in dims(), seed in any::<u64>()) {
        let q = mixed_quiver();
        let d2 = DimensionVector::new(d2.n, d1.m.clone());
        let r1 = random_representation(q.clone(), d1.clone(), seed).unwrap();
        let r2 = random_representation(q, d2.clone(), seed ^ 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 99);
        let g1 = random_gauge(&mut rng, &d1, false);
        let g2 = random_gauge(&mut rng, &d2, false);
        let block = GaugeElement::vertex(g1.g.iter().zip(&g2.g).map(|(a, b)| linalg::block_diag(a, b)).collect());
        let lhs = gauge_act(&block, &direct_sum(&r1, &r2).unwrap()).unwrap();
        let rhs = direct_sum(&gauge_act(&g1, &r1).unwrap(), &gauge_act(&g2, &r2).unwrap()).unwrap();
        prop_assert!(lhs.distance(&rhs) <= 1e-10 * (1.0 + lhs.norm_sq().sqrt()));
    }

    #[test]
    fn moment_map_is_hermitian_traceless_and_equivariant(d in dims(), seed in any::<u64>()) {
        let q = mixed_quiver();
        let r = random_representation(q, d.clone(), seed).unwrap();
        let h = moment_map(&r);
        let tr: f64 = h.iter().map(|m| linalg::trace(m).re).sum();
        prop_assert!(tr.abs() <= 1e-12 * (1.0 + r.norm_sq()));
        for m in &h {
            prop_assert!(linalg::fro(&(m - m.adjoint())) <= 1e-12 * (1.0 + r.norm_sq()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let k = random_unitary_gauge(&mut rng, &d);
        let hk = moment_map(&gauge_act(&k, &r).unwrap());
        for i in 0..h.len() {
            let rotated = &k.g[i] * &h[i] * k.g[i].adjoint();
            prop_assert!(linalg::fro(&(&hk[i] - rotated)) <= 1e-11 * (1.0 + r.norm_sq()));
        }
    }

    #[test]
    fn direct_sum_moment_map_is_block_diagonal(d1 in dims(), seed in any::<u64>()) {
        let q = mixed_quiver();
        let r1 = random_representation(q.clone(), d1.clone(), seed).unwrap();
        let r2 = random_representation(q, d1, seed ^ 11).unwrap();
        let h = moment_map(&direct_sum(&r1, &r2).unwrap());
        let (h1, h2) = (moment_map(&r1), moment_map(&r2));
        for i in 0..h.len() {
            let expect: CMat = linalg::block_diag(&h1[i], &h2[i]);
            prop_assert!(linalg::fro(&(&h[i] - expect)) <= 1e-12 * (1.0 + r1.norm_sq() + r2.norm_sq()));
        }
    }
}

#[test]
fn zero_dimensional_vertices_are_handled() {
    let q = mixed_quiver();
    let d = DimensionVector::new(vec![0, 2, 0], vec![1, 2, 1, 1]);
    let r = random_representation(q, d.clone(), 4).unwrap();
    assert_eq!(r.arrow(0).shape(), (2, 0));
    let g = GaugeElement::identity(&d);
    assert_eq!(gauge_act(&g, &r).unwrap().distance(&r), 0.0);
    assert_eq!(trace_defect(&[1.0, 0.0, -3.0], &d.n), 0.0);
    let zero = Representation::zero(r.quiver_arc().clone(), d).unwrap();
    assert_eq!(zero.norm_sq(), 0.0);
}
