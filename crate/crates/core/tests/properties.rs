use chcl_core::families::gnp;
use chcl_core::hodge::{enumerate_triangles, hodge_laplacian_1, HodgeComplex};
use chcl_core::linalg::symmetric_eigenvalues;
use chcl_core::signature::joint_signature;
use chcl_core::spectral::{
    brute_force_cheeger, lambda2, normalized_laplacian, smallest_eigenvalues_with, SolverPolicy,
};
use proptest::prelude::*;

fn graph() -> impl Strategy<Value = chcl_core::Graph> {
    (2usize..14, 0.05f64..0.9, any::<u64>()).prop_map(|(n, p, s)| gnp(n, p, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_of_boundary_vanishes(g in graph()) {
        let c = HodgeComplex::new(&g);
        prop_assert!(c.b1.mul(&c.b2).is_zero());
    }

    #[test]
    fn triangles_match_trace_of_cubed_adjacency(g in graph()) {
        let n = g.n();
        let mut a = vec![0i64; n * n];
        for &(u, v) in g.edges() {
            a[u * n + v] = 1;
            a[v * n + u] = 1;
        }
        let mut trace = 0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    trace += a[i * n + j] * a[j * n + k] * a[k * n + i];
                }
            }
        }
        prop_assert_eq!(enumerate_triangles(&g).len() as i64, trace / 6);
    }

    #[test]
    fn lambda2_in_range(g in graph()) {
        let l = lambda2(&g).unwrap();
        prop_assert!((0.0..=2.0 + 1e-12).contains(&l));
        prop_assert_eq!(l == 0.0, !g.is_connected());
    }

    #[test]
    fn cheeger_bounds_hold(g in graph().prop_filter("connected", |g| g.is_connected())) {
        let l = lambda2(&g).unwrap();
        let h = brute_force_cheeger(&g).unwrap();
        prop_assert!(l / 2.0 <= h + 1e-9);
        prop_assert!(h <= (2.0 * l).sqrt() + 1e-9);
    }

    #[test]
    fn solvers_agree(g in graph()) {
        let m = normalized_laplacian(&g);
        let k = g.n().min(4);
        let d = smallest_eigenvalues_with(&m, k, SolverPolicy::Dense);
        let i = smallest_eigenvalues_with(&m, k, SolverPolicy::Iterative);
        for (a, b) in d.eigenvalues.iter().zip(&i.eigenvalues) {
            prop_assert!((a - b).abs() < 1e-8, "{:?} vs {:?}", d.eigenvalues, i.eigenvalues);
        }
    }

    #[test]
    fn hodge_laplacian_is_psd(g in graph().prop_filter("has edges", |g| g.m() > 0)) {
        let l1 = hodge_laplacian_1(&g).unwrap().to_dense();
        prop_assert!(symmetric_eigenvalues(&l1).iter().all(|&v| v > -1e-9));
    }

    #[test]
    fn joint_length_is_fixed(g in graph(), d_c in 2usize..10, d_h in 1usize..16) {
        prop_assert_eq!(joint_signature(&g, d_c, d_h).unwrap().values().len(), d_c + d_h);
    }
}
