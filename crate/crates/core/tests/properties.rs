use lasso_corr::bounds::{improved_slow_rate, in_cone, re_constant_estimate, re_ratio, slow_rate_bound};
use lasso_corr::correlation::{
    audit_certificate, correlation_profile, dual_norm_sup, sconv_membership, CorrelationProfile, ProfileOptions,
    DEFAULT_TOL,
};
use lasso_corr::design::{
    expand_design, gen_clustered, gen_equicorrelated, gen_instance, parse_vector_csv, vector_to_csv, DesignMatrix,
};
use lasso_corr::lasso::{coordinate_descent_solve, kkt_check, lars_lasso_path, LassoPath};
use lasso_corr::simcore::{normal_vector, Matrix, Seed, Vector};
use proptest::prelude::*;

fn assert_normalized(d: &DesignMatrix) {
    let n = d.n() as f64;
    for sq in d.matrix().column_norms_sq() {
        assert!((sq - n).abs() <= 1e-9 * n, "{sq} vs {n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn seeds_determine_streams(seed in any::<u64>(), len in 1usize..64) {
        prop_assert_eq!(normal_vector(Seed(seed), len).unwrap(), normal_vector(Seed(seed), len).unwrap());
    }

    #[test]
    fn matvec_is_additive(seed in any::<u64>()) {
        let n = 50;
        let a = Matrix::from_fn(n, n, |i, j| normal_vector(Seed(seed).derive((i * n + j) as u64), 1).unwrap()[0]);
        let u = normal_vector(Seed(seed).derive(1 << 40), n).unwrap();
        let v = normal_vector(Seed(seed).derive(1 << 41), n).unwrap();
        let lhs = a.matvec(&u.add(&v)).unwrap();
        let rhs = a.matvec(&u).unwrap().add(&a.matvec(&v).unwrap());
        prop_assert!(lhs.sub(&rhs).max_abs() <= 1e-10);
    }

    #[test]
    fn generated_designs_are_normalized(n in 1usize..30, p in 1usize..30, rho in 0.0f64..0.999, nu in 0.0f64..2.0, seed in any::<u64>()) {
        assert_normalized(&gen_equicorrelated(n, p, rho, Seed(seed)).unwrap());
        assert_normalized(&gen_clustered(n, p, nu, Seed(seed)).unwrap());
    }

    #[test]
    fn expansion_keeps_originals_first(n in 2usize..12, p in 1usize..7, eta in 1e-6f64..1.0, seed in any::<u64>()) {
        let base = gen_equicorrelated(n, p, 0.5, Seed(seed)).unwrap();
        let big = expand_design(&base, eta, Seed(seed).derive(9)).unwrap();
        prop_assert_eq!(big.p(), p * p);
        assert_normalized(&big);
        for j in 0..p {
            let a = base.matrix().column(j);
            let b = big.matrix().column(j);
            prop_assert!(a.sub(&b).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn design_csv_roundtrips(n in 1usize..10, p in 1usize..10, rho in 0.0f64..0.99, seed in any::<u64>()) {
        let d = gen_equicorrelated(n, p, rho, Seed(seed)).unwrap();
        prop_assert_eq!(DesignMatrix::parse_csv(&d.to_csv_string()).unwrap(), d);
    }

    #[test]
    fn vector_csv_roundtrips(values in prop::collection::vec(-1e6f64..1e6, 1..40)) {
        let v = parse_vector_csv(&vector_to_csv(&values)).unwrap();
        prop_assert_eq!(v.into_inner(), values);
    }

    #[test]
    fn instance_satisfies_the_model(n in 1usize..20, p in 1usize..20, sigma in 0.0f64..5.0, seed in any::<u64>()) {
        let d = gen_equicorrelated(n, p, 0.3, Seed(seed)).unwrap();
        let inst = gen_instance(&d, p.min(3), sigma, Seed(seed).derive(1)).unwrap();
        let fit = d.matrix().matvec(&inst.beta0).unwrap();
        for i in 0..n {
            prop_assert!((inst.y[i] - fit[i] - sigma * inst.eps[i]).abs() <= 1e-12 * (1.0 + inst.y[i].abs()));
        }
        prop_assert_eq!(inst.s, p.min(3));
    }

    #[test]
    fn lasso_path_invariants(n in 2usize..25, p in 1usize..35, rho in 0.0f64..0.95, seed in any::<u64>()) {
        let d = gen_equicorrelated(n, p, rho, Seed(seed)).unwrap();
        let y = gen_instance(&d, p.min(4), 1.0, Seed(seed).derive(1)).unwrap().y;
        let path = lars_lasso_path(&d, &y).unwrap();
        let z = d.matrix().tr_matvec(&y).unwrap();
        prop_assert!((path.lambda_max() - 2.0 * z.max_abs()).abs() <= 1e-12 * path.lambda_max().max(1.0));
        prop_assert!(path.solve_at(path.lambda_max()).unwrap().max_abs() == 0.0);
        prop_assert!(path.max_active() <= n.min(p));
        let knots = path.knots();
        let mut prev_rss = f64::NEG_INFINITY;
        for (k, &lambda) in knots.iter().enumerate().rev() {
            let beta = path.solve_at(lambda).unwrap();
            prop_assert!(kkt_check(&d, &y, &beta, lambda, 1e-8).unwrap().pass(), "knot {}", k);
            if k + 1 < knots.len() {
                let mid = 0.5 * (lambda + knots[k + 1]);
                let b = path.solve_at(mid).unwrap();
                prop_assert!(kkt_check(&d, &y, &b, mid, 1e-8).unwrap().pass(), "midpoint {}", k);
            }
            let r = y.sub(&d.matrix().matvec(&beta).unwrap());
            let rss = r.dot(&r);
            prop_assert!(rss + 1e-10 * (1.0 + rss) >= prev_rss);
            prev_rss = rss;
        }
        for seg in path.segments() {
            for (lambda, knot_beta) in [(seg.upper, path.solve_at(seg.upper).unwrap()), (seg.lower, path.solve_at(seg.lower).unwrap())] {
                let affine = seg.base.add(&seg.slope.scaled(lambda));
                prop_assert!(affine.sub(&knot_beta).max_abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn path_csv_roundtrips(n in 2usize..10, p in 1usize..10, seed in any::<u64>()) {
        let d = gen_equicorrelated(n, p, 0.2, Seed(seed)).unwrap();
        let y = gen_instance(&d, p.min(2), 1.0, Seed(seed).derive(1)).unwrap().y;
        let path = lars_lasso_path(&d, &y).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let back = LassoPath::parse_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(back.knots(), path.knots());
        prop_assert_eq!(back.knot_coefs(), path.knot_coefs());
    }

    #[test]
    fn membership_contains_every_budgeted_combination(
        seed in any::<u64>(),
        coefs in prop::collection::vec(-1.0f64..1.0, 1..6),
        slack in 1e-6f64..0.5,
    ) {
        let n = 8;
        let atoms: Vec<Vector> = (0..coefs.len())
            .map(|k| {
                let v = normal_vector(Seed(seed).derive(k as u64), n).unwrap();
                let s = (n as f64).sqrt() / v.norm();
                v.scaled(s)
            })
            .collect();
        let mut t = Vector::zeros(n);
        for (a, c) in atoms.iter().zip(&coefs) {
            t = t.add(&a.scaled(*c));
        }
        let l1: f64 = coefs.iter().map(|c| c.abs()).sum();
        prop_assert!(sconv_membership(&atoms, &t, l1 + slack, 1e-6));
    }

    #[test]
    fn re_witness_is_feasible(n in 3usize..12, p in 2usize..15, sbar in 1usize..4, seed in any::<u64>()) {
        let sbar = sbar.min(p);
        let d = gen_equicorrelated(n, p, 0.5, Seed(seed)).unwrap();
        let est = re_constant_estimate(&d, sbar, 8, Seed(seed).derive(3)).unwrap();
        prop_assert!(est.j0.len() <= sbar);
        prop_assert!(in_cone(&est.j0, &est.delta));
        let ratio = re_ratio(d.matrix(), &est.j0, &est.delta);
        prop_assert!((ratio - est.phi_hat).abs() <= 1e-9 * (1.0 + ratio));
    }

    #[test]
    fn improved_bound_never_exceeds_slow_bound(
        lambda in 0.0f64..50.0,
        pairs in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, any::<bool>()), 1..20),
    ) {
        let beta0: Vec<f64> = pairs.iter().map(|(b, _, on)| if *on { *b } else { 0.0 }).collect();
        let betahat: Vec<f64> = pairs.iter().map(|(_, b, _)| *b).collect();
        let improved = improved_slow_rate(lambda, &beta0, &betahat).unwrap();
        prop_assert!(improved <= slow_rate_bound(lambda, &beta0) + 1e-8);
        prop_assert!(improved >= 0.0);
    }

    #[test]
    fn dual_norm_dominates_any_direction(n in 1usize..15, p in 1usize..15, seed in any::<u64>()) {
        let d = gen_equicorrelated(n, p, 0.4, Seed(seed)).unwrap();
        let eps = normal_vector(Seed(seed).derive(1), n).unwrap();
        let sup = dual_norm_sup(&d, &eps).unwrap();
        for k in 0..20u64 {
            let b = normal_vector(Seed(seed).derive(10 + k), p).unwrap();
            let fit = d.matrix().matvec(&b).unwrap();
            prop_assert!(eps.dot(&fit).abs() / b.l1_norm() <= sup + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lars_agrees_with_coordinate_descent(n in 3usize..30, p in 2usize..30, seed in any::<u64>()) {
        let d = gen_equicorrelated(n, p, 0.3, Seed(seed)).unwrap();
        let y = gen_instance(&d, p.min(3), 1.0, Seed(seed).derive(1)).unwrap().y;
        let path = lars_lasso_path(&d, &y).unwrap();
        for i in 0..20 {
            let lambda = path.lambda_max() * (0.05 + 0.95 * i as f64 / 19.0);
            let a = path.solve_at(lambda).unwrap();
            let b = coordinate_descent_solve(&d, &y, lambda, 1e-13).unwrap();
            prop_assert!(a.sub(&b).max_abs() <= 1e-6, "lambda {}", lambda);
        }
    }

    #[test]
    fn profiles_are_monotone_and_certified(n in 3usize..10, p in 2usize..24, rho in 0.0f64..0.99, seed in any::<u64>()) {
        let d = gen_equicorrelated(n, p, rho, Seed(seed)).unwrap();
        let mut opts = ProfileOptions::new(n, 0.05);
        opts.prune = false;
        let prof = correlation_profile(&d, &opts).unwrap();
        prop_assert!(prof.k_upper.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(prof.k_upper.iter().all(|&k| k >= 1 && k <= p));
        prop_assert!(prof.k_kappa_hat > 0.0 && prof.k_kappa_hat <= 1.0);
        prop_assert!(prof.f_hat > 0.0 && prof.f_hat <= 1.0);
        let root_n = (n as f64).sqrt();
        for (i, cert) in prof.certificate.iter().enumerate() {
            prop_assert!(cert.iter().all(|v| (v.norm() - root_n).abs() < 1e-9));
            prop_assert!(audit_certificate(&d, cert, prof.x_grid[i], DEFAULT_TOL));
        }
        let back = CorrelationProfile::from_json(&prof.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.k_upper, prof.k_upper);
        prop_assert_eq!(back.k_kappa_hat, prof.k_kappa_hat);
    }
}
