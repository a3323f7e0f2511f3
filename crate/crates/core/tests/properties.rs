use num_bigint::BigUint;
use proptest::prelude::*;

use torus_spectra_core::bounds::{bound_chain, lattice_wgf_lower, lattice_wgf_truncated, stirling_binomial_lower};
use torus_spectra_core::deletion::{analytic_spectral_radius, charpoly_minus_node, Removal};
use torus_spectra_core::sis::{meanfield_step, montecarlo_step, replica_rng, SisParams};
use torus_spectra_core::spectral::{
    degree_bounds, dense_spectrum, max_abs_difference, spectral_radius_power, torus_eigenvalues,
};
use torus_spectra_core::topology::build_torus;
use torus_spectra_core::walks::{central_binomial, lattice_closed_walks, lattice_walks_to, torus_resolvent};
use torus_spectra_core::{Graph, TorusSpec};

fn small_spec() -> impl Strategy<Value = TorusSpec> {
    prop_oneof![
        (3usize..=8).prop_map(|m| (2, m)),
        (3usize..=4).prop_map(|m| (3, m)),
        (3usize..=12).prop_map(|m| (1, m))
    ]
    .prop_map(|(d, m)| TorusSpec::new(d, m).unwrap())
}

fn random_graph() -> impl Strategy<Value = Graph> {
    (2usize..24).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 1..3 * n).prop_map(move |pairs| {
            let mut edges: Vec<(usize, usize)> =
                pairs.into_iter().filter(|(a, b)| a != b).map(|(a, b)| (a.min(b), a.max(b))).collect();
            edges.sort_unstable();
            edges.dedup();
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn torus_is_regular_with_roundtrip_coords(spec in small_spec()) {
        let g = build_torus(spec);
        prop_assert_eq!(g.edge_count(), spec.edge_count());
        for i in 0..spec.node_count() {
            prop_assert_eq!(g.degree(i), spec.degree());
            prop_assert_eq!(spec.index(&spec.coord(i).unwrap()).unwrap(), i);
        }
    }

    #[test]
    fn closed_form_spectrum_matches_dense(spec in small_spec()) {
        let analytic = torus_eigenvalues(spec);
        let dense = dense_spectrum(&build_torus(spec)).unwrap();
        prop_assert!(max_abs_difference(&analytic, &dense).unwrap() < 1e-8);
        prop_assert!(analytic.trace().abs() < 1e-9);
        prop_assert!((analytic.spectral_radius() - spec.degree() as f64).abs() < 1e-12);
    }

    #[test]
    fn degree_bounds_bracket_power_iteration(g in random_graph()) {
        prop_assume!(g.edge_count() > 0);
        let (lower, upper) = degree_bounds(&g);
        let rho = spectral_radius_power(&g, 1e-9, 2_000_000).unwrap().rho;
        let dense = dense_spectrum(&g).unwrap().spectral_radius();
        prop_assert!(lower <= rho + 1e-9 && rho <= upper + 1e-9);
        prop_assert!((rho - dense).abs() < 1e-6);
    }

    #[test]
    fn lattice_closed_walks_agree(half in 0usize..20) {
        prop_assert_eq!(lattice_walks_to(0, 0, 2 * half).count, lattice_closed_walks(half).count);
        let c = central_binomial(half);
        prop_assert_eq!(lattice_closed_walks(half).count, &c * &c);
    }

    #[test]
    fn lattice_walks_symmetry_and_parity(a in -6i64..=6, b in -6i64..=6, len in 0usize..14) {
        let w = lattice_walks_to(a, b, len);
        prop_assert_eq!(&w, &lattice_walks_to(b, a, len));
        prop_assert_eq!(&w, &lattice_walks_to(-a, b, len));
        let odd = (len as i64 + a + b).rem_euclid(2) == 1;
        prop_assert_eq!(w.parity_mismatch, odd);
        if odd || (a.abs() + b.abs()) as usize > len {
            prop_assert_eq!(w.count, BigUint::default());
        }
    }

    #[test]
    fn resolvent_is_symmetric(spec in small_spec(), x in 0.1f64..6.0, i in 0usize..64, j in 0usize..64) {
        let n = spec.node_count();
        let (i, j) = (i % n, j % n);
        let x = spec.degree() as f64 + x;
        let a = torus_resolvent(spec, i, j, x).unwrap();
        let b = torus_resolvent(spec, j, i, x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert!(a > 0.0);
    }

    #[test]
    fn node_deletion_is_position_free(m in 3usize..=7, i in 0usize..49, x in 4.01f64..7.0) {
        let spec = TorusSpec::new(2, m).unwrap();
        let i = i % spec.node_count();
        let here = charpoly_minus_node(spec, i, x).unwrap();
        let origin = charpoly_minus_node(spec, 0, x).unwrap();
        prop_assert!(here.relative_error(origin) < 1e-9);
    }

    #[test]
    fn deletion_never_raises_radius(m in 4usize..=7, i in 0usize..49) {
        let spec = TorusSpec::new(2, m).unwrap();
        let rho = analytic_spectral_radius(spec, &Removal::Node(i % spec.node_count()), 1e-10).unwrap();
        prop_assert!(rho < 4.0 && rho > 3.0);
    }

    #[test]
    fn stirling_chain(l in 1usize..=60, x in 4.5f64..20.0, m in 3usize..10) {
        prop_assert!(BigUint::from(stirling_binomial_lower(l).unwrap().ceil() as u128) <= central_binomial(l));
        let s = lattice_wgf_lower(x, 400).unwrap();
        let t = lattice_wgf_truncated(x, 400).unwrap();
        prop_assert!(s.closed_form <= t.value + t.tail_bound);
        let report = bound_chain(TorusSpec::new(2, m).unwrap(), x, 400).unwrap();
        prop_assert!(report.chain_holds());
    }

    #[test]
    fn meanfield_stays_in_unit_interval(
        beta in 0.0f64..=1.0,
        delta in 0.0f64..=1.0,
        p in proptest::collection::vec(0.0f64..=1.0, 25),
    ) {
        let g = build_torus(TorusSpec::new(2, 5).unwrap());
        let params = SisParams::rates(beta, delta).unwrap();
        let mut p = p;
        for _ in 0..10 {
            p = meanfield_step(&g, &p, &params).unwrap();
            prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        prop_assert!(meanfield_step(&g, &[0.0; 25], &params).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn no_spread_means_no_growth(delta in 0.0f64..=1.0, seed in any::<u64>(), state in proptest::collection::vec(any::<bool>(), 25)) {
        let g = build_torus(TorusSpec::new(2, 5).unwrap());
        let params = SisParams::rates(0.0, delta).unwrap();
        let mut rng = replica_rng(seed, 0);
        let mut state = state;
        let mut count = state.iter().filter(|&&s| s).count();
        for _ in 0..20 {
            let next = montecarlo_step(&g, &state, &params, &mut rng).unwrap();
            prop_assert!(next.iter().zip(&state).all(|(&n, &s)| !n || s));
            let c = next.iter().filter(|&&s| s).count();
            prop_assert!(c <= count);
            count = c;
            state = next;
        }
    }
}

#[test]
fn linearization_error_is_quadratic() {
    let g = build_torus(TorusSpec::new(2, 5).unwrap());
    let params = SisParams::rates(0.3, 0.7).unwrap();
    let jac = torus_spectra_core::sis::jacobian_matrix(&g, &params);
    let direction: Vec<f64> = (0..25).map(|i| 1.0 + (i % 4) as f64).collect();
    let error = |scale: f64| {
        let p: Vec<f64> = direction.iter().map(|v| v * scale).collect();
        let step = meanfield_step(&g, &p, &params).unwrap();
        let linear = &jac * nalgebra::DVector::from_vec(p);
        step.iter().zip(linear.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (error(1e-3), error(5e-4));
    // halving p quarters the error
    assert!((e1 / e2 - 4.0).abs() < 0.05, "{e1} {e2}");
    assert!(error(1e-6) < 1e-10);
}
