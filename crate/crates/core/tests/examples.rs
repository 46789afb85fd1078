use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

use sar2d_core::macoef::hypergeometric_terminating;
use sar2d_core::*;

fn p(a: f64, b: f64, c: f64) -> Params {
    Params::new(a, b, c).unwrap()
}

fn q(k1: usize, l1: usize, k2: usize, l2: usize) -> CovQuery {
    CovQuery::new(k1, l1, k2, l2).unwrap()
}

#[test]
fn classification() {
    let kind = |a, b, c| classify(&p(a, b, c), 1e-12).unwrap();
    assert_eq!(kind(0.2, 0.1, 0.3).kind, DomainKind::Stable);
    assert_eq!(kind(0.2, 0.1, 0.3).rho, Rho::Zero);
    assert!(matches!(kind(0.3, 0.3, 0.4).kind, DomainKind::FaceA { .. }));
    assert_eq!(kind(0.3, 0.3, 0.4).rho, Rho::Quarter);
    assert_eq!(
        kind(1.0, -0.5, 0.5).kind,
        DomainKind::EdgeB { axis: Axis::Alpha }
    );
    assert_eq!(kind(1.0, -0.5, 0.5).rho, Rho::Half);
    assert_eq!(kind(1.0, 1.0, -1.0).kind, DomainKind::VertexC);
    assert_eq!(kind(0.5, 0.5, -1.0).kind, DomainKind::MissingGammaEdge);
    assert!(classify(
        &Params {
            alpha: f64::NAN,
            beta: 0.0,
            gamma: 0.0
        },
        1e-12
    )
    .is_err());
}

#[test]
fn canonicalization_preserves_variances() {
    let (c, map) = canonicalize(&p(-0.8, 0.1, 0.3));
    assert_eq!(c, p(0.8, 0.1, -0.3));
    assert_eq!(
        map,
        SignMap {
            flip_k: true,
            flip_l: false
        }
    );
    let a = var_table(6, 6, &p(-0.8, 0.1, 0.3)).unwrap();
    let b = var_table(6, 6, &c).unwrap();
    // brute force: sum G^2 from the direct formula
    for k in 1..=6 {
        for l in 1..=6 {
            let brute: f64 = (0..k)
                .flat_map(|m| (0..l).map(move |n| (m, n)))
                .map(|(m, n)| g_direct(m, n, &c).unwrap().powi(2))
                .sum();
            assert_eq!(a.get(k, l), b.get(k, l));
            assert!((a.get(k, l) - brute).abs() < 1e-13 * brute);
        }
    }
    assert_eq!(
        canonicalize(&p(-0.3, -0.3, 0.4)),
        (
            p(0.3, 0.3, 0.4),
            SignMap {
                flip_k: true,
                flip_l: true
            }
        )
    );
    assert_eq!(canonicalize(&p(0.2, 0.1, 0.3)).1, SignMap::IDENTITY);
}

#[test]
fn coefficient_values() {
    let q1 = p(0.5, 0.3, 0.2);
    assert_eq!(g_direct(0, 0, &q1).unwrap(), 1.0);
    assert_eq!(g_direct(2, 0, &q1).unwrap(), 0.25);
    assert!((g_direct(1, 1, &q1).unwrap() - 0.5).abs() < 1e-15);
    assert!((g_table(1, 1, &q1).unwrap().get(1, 1) - 0.5).abs() < 1e-15);
    assert!((g_hypergeom(1, 1, &q1).unwrap() - 0.5).abs() < 1e-15);
    assert!((g_direct(3, 2, &p(0.4, 0.5, -0.2)).unwrap() - 0.016).abs() < 1e-16);
    for m in 0..8 {
        for n in 0..8 {
            let want = 0.4f64.powi(m as i32) * 0.5f64.powi(n as i32);
            assert!((g_hypergeom(m, n, &p(0.4, 0.5, -0.2)).unwrap() - want).abs() < 1e-15);
        }
    }
    assert!((g_hypergeom(4, 0, &p(0.7, 0.2, 0.1)).unwrap() - 0.2401).abs() < 1e-15);
    assert!(g_hypergeom(1, 1, &p(0.0, 0.3, 0.2)).is_err());

    let impulse = g_table(2, 2, &p(0.0, 0.0, 0.0)).unwrap();
    for m in 0..=2 {
        for n in 0..=2 {
            assert_eq!(impulse.get(m, n), if m == 0 && n == 0 { 1.0 } else { 0.0 });
        }
    }

    let f = p(0.3, 0.5, 0.2);
    assert!((g_binomial(1, 1, &f).unwrap() - 0.5).abs() < 1e-15);
    assert!((g_face(1, 1, &f).unwrap() - 0.5).abs() < 1e-15);
    for n in 0..10 {
        assert!((g_face(0, n, &f).unwrap() - 0.5f64.powi(n as i32)).abs() < 1e-15);
    }
    let b = p(0.25, 0.35, 0.1);
    assert!((g_binomial(2, 3, &b).unwrap() - g_direct(2, 3, &b).unwrap()).abs() < 1e-13);
    for m in 0..8 {
        assert!((g_binomial(m, 0, &b).unwrap() - 0.25f64.powi(m as i32)).abs() < 1e-15);
    }
}

#[test]
fn hypergeometric_values() {
    assert_eq!(hypergeometric_terminating(0, 3.5, -2.0, 0.7).unwrap(), 1.0);
    assert!((hypergeometric_terminating(2, -3.0, -5.0, 1.0).unwrap() - 0.1).abs() < 1e-15);
    assert_eq!(hypergeometric_terminating(2, -3.0, -5.0, 0.0).unwrap(), 1.0);
}

#[test]
fn table_matches_direct_on_random_stable_triples() {
    let mut rng = Pcg64Mcg::seed_from_u64(11);
    let mut done = 0;
    while done < 50 {
        let r = p(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if classify(&r, DEFAULT_TOL).unwrap().kind != DomainKind::Stable {
            continue;
        }
        let t = g_table(20, 20, &r).unwrap();
        for m in 0..=20 {
            for n in 0..=20 {
                let d = g_direct(m, n, &r).unwrap();
                assert!(
                    (t.get(m, n) - d).abs() <= (1e-10 * d.abs()).max(1e-13),
                    "{r:?} {m} {n}"
                );
            }
        }
        done += 1;
    }
}

#[test]
fn binomial_values() {
    assert_eq!(pmf_binomial(20, 0.5, 10).unwrap(), 0.17619705200195313);
    assert_eq!(pmf_binomial(7, 0.0, 0).unwrap(), 1.0);
    assert_eq!(pmf_binomial(5, 1.0, 5).unwrap(), 1.0);
    assert_eq!(pmf_binomial(5, 0.3, 6).unwrap(), 0.0);
    assert_eq!(pmf_binomial(5, 0.3, -1).unwrap(), 0.0);

    let s = BinomialSumSpec::new(1, 1, 0.3, 0.5).unwrap();
    assert!((s.pmf(1) - 0.5).abs() < 1e-15);
    let d = BinomialSumSpec::new(9, 0, 0.35, 0.8).unwrap();
    for j in 0..=9 {
        assert!((d.pmf(j) - pmf_binomial(9, 0.35, j).unwrap()).abs() < 1e-16);
    }

    let c = BinomialSumSpec::new(10, 10, 0.5, 0.5).unwrap();
    assert!((c.local_clt_density(10).unwrap() - 0.1784124116).abs() < 1e-10);
    let profile = c.clt_error_profile().unwrap();
    assert_eq!(profile.argmax, 10);
    assert!((profile.product - 0.011076798066619875).abs() < 1e-12);
    assert!(BinomialSumSpec::new(4, 4, 0.0, 1.0)
        .unwrap()
        .clt_error_profile()
        .is_err());
}

#[test]
fn covariance_values() {
    assert_eq!(cov_exact(&q(1, 1, 1, 1), &p(0.0, 0.0, 0.0)).unwrap(), 1.0);
    assert_eq!(cov_exact(&q(2, 3, 4, 1), &p(1.0, -1.0, 1.0)).unwrap(), 2.0);
    let r = p(0.2, 0.1, 0.3);
    let brute: f64 = (0..3)
        .flat_map(|m| (0..3).map(move |n| (m, n)))
        .map(|(m, n)| g_direct(m, n, &r).unwrap().powi(2))
        .sum();
    assert!((cov_exact(&q(3, 3, 3, 3), &r).unwrap() - brute).abs() < 1e-15);

    assert_eq!(var_table(1, 1, &r).unwrap().get(1, 1), 1.0);
    let e = p(1.0, 0.3, -0.3);
    let t = var_table(20, 20, &e).unwrap();
    for k in 1..=20 {
        for l in 1..=20 {
            let want = k as f64 * (1.0 - 0.09f64.powi(l as i32)) / 0.91;
            assert!((t.get(k, l) - want).abs() <= 1e-13 * want);
        }
    }

    for k in 1..6 {
        for l in 1..6 {
            assert_eq!(
                cov_edge(&q(k, l, k, l), &p(1.0, 0.0, 0.0)).unwrap(),
                k as f64
            );
        }
    }
    let h = p(1.0, 0.5, -0.5);
    assert!((cov_edge(&q(3, 2, 3, 5), &h).unwrap() - 0.46875).abs() < 1e-15);
    assert!(cov_edge(&q(1, 1, 1, 1), &r).is_err());

    assert_eq!(cov_vertex(&q(2, 3, 4, 1), &p(1.0, 1.0, -1.0)).unwrap(), 2.0);
    assert_eq!(
        cov_vertex(&q(5, 7, 5, 7), &p(-1.0, 1.0, 1.0)).unwrap(),
        35.0
    );
    assert_eq!(
        cov_vertex(&q(2, 2, 3, 3), &p(1.0, -1.0, 1.0)).unwrap(),
        -4.0
    );
    assert_eq!(cov_exact(&q(2, 2, 3, 3), &p(1.0, -1.0, 1.0)).unwrap(), -4.0);
    assert!(cov_vertex(&q(1, 1, 1, 1), &h).is_err());
}

#[test]
fn edge_covariance_matches_exact_on_random_queries() {
    let mut rng = Pcg64Mcg::seed_from_u64(12);
    for i in 0..50 {
        let b: f64 = rng.random_range(-0.95..0.95);
        let e = match i % 4 {
            0 => p(1.0, b, -b),
            1 => p(-1.0, b, b),
            2 => p(b, 1.0, -b),
            _ => p(b, -1.0, b),
        };
        let mut idx = || rng.random_range(1..=30usize);
        let c = q(idx(), idx(), idx(), idx());
        let exact = cov_exact(&c, &e).unwrap();
        let closed = cov_edge(&c, &e).unwrap();
        assert!(
            (exact - closed).abs() <= 1e-12 * exact.abs().max(1.0),
            "{e:?} {c:?}: {exact} vs {closed}"
        );
    }
}

#[test]
fn bound_checks() {
    let r = check_bounds(&p(0.2, 0.1, 0.2), 100, 20, 1).unwrap();
    assert!(r.passed && r.violations == 0);
    assert!(check_bounds(&p(1.0, 0.5, -0.5), 100, 20, 1).unwrap().passed);
    assert!(check_bounds(&p(1.0, 1.0, -1.0), 100, 20, 1).unwrap().passed);
    assert!(check_bounds(&p(0.5, 0.5, -1.0), 100, 20, 1).is_err());
}

#[test]
fn limits() {
    assert_eq!(sigma2_stable(&p(0.0, 0.0, 0.0)).unwrap(), 1.0);
    assert!((sigma2_stable(&p(0.2, 0.1, 0.3)).unwrap() - 1.219875).abs() < 1e-6);
    assert!((limit_face(&p(0.3, 0.3, 0.4), 1.0, 1.0).unwrap() - 1.24366).abs() < 1e-5);
    assert!((limit_face(&p(0.5, 0.5, 0.0), 1.0, 1.0).unwrap() - 1.59577).abs() < 1e-5);
    assert!((limit_edge(&p(1.0, 0.5, -0.5), 2.0, 1.0).unwrap() - 8.0 / 3.0).abs() < 1e-15);
    assert_eq!(limit_edge(&p(1.0, 0.0, 0.0), 3.0, 1.0).unwrap(), 3.0);
    assert_eq!(limit_vertex(2.0, 3.0), 6.0);
    assert_eq!(limit_trivial_gamma_edge(2.0, 3.0), 2.0);
    assert_eq!(
        variance_limit(&p(-0.3, -0.3, 0.4), 1.0, 1.0)
            .unwrap()
            .value(),
        variance_limit(&p(0.3, 0.3, 0.4), 1.0, 1.0).unwrap().value()
    );
    assert_eq!(
        variance_limit(&p(0.5, 0.5, -1.0), 1.0, 1.0)
            .unwrap()
            .value(),
        None
    );
    // the exact vertex variance [ns][nt] / n^2 tends to st
    let v = var_table(30, 45, &p(1.0, 1.0, -1.0)).unwrap();
    assert_eq!(v.get(30, 45) / 15.0f64.powi(2), limit_vertex(2.0, 3.0));
}

#[test]
fn boundary_representations() {
    assert!((jacobi_p0b(1, 1, 2.0 * 0.36 - 1.0) + 0.92).abs() < 1e-15);
    for n in 0..20 {
        assert!((jacobi_p0b(n, 0, -1.0) - if n % 2 == 0 { 1.0 } else { -1.0 }).abs() < 1e-12);
    }
    let alpha = 0.5;
    let dp = var_table(10, 10, &p(alpha, alpha, -1.0))
        .unwrap()
        .get(10, 10);
    assert!((var_gamma_edge(10, 10, alpha).unwrap() - dp).abs() <= 1e-11 * dp);

    let mut rng = Pcg64Mcg::seed_from_u64(13);
    for face in 0..2 {
        for _ in 0..5 {
            let a: f64 = rng.random_range(0.3..0.95);
            let b = rng.random_range(0.02..a - 0.01);
            let r = if face == 0 {
                p(a, b, a - b - 1.0)
            } else {
                p(b, a, a - b - 1.0)
            };
            for m in 0..=15 {
                for n in 0..=15 {
                    let d = g_direct(m, n, &r).unwrap();
                    let v = g_missing_face(m, n, &r).unwrap();
                    assert!(
                        (v - d).abs() <= (1e-10 * d.abs()).max(1e-13),
                        "{r:?} {m} {n}"
                    );
                }
            }
        }
    }
}

fn within(e: &McEstimate, want: f64, width: f64) {
    assert!(
        (e.variance - want).abs() <= width * e.std_error,
        "{} vs {want} (se {})",
        e.variance,
        e.std_error
    );
}

#[test]
fn monte_carlo_examples() {
    let gauss = NoiseSpec::new(NoiseKind::Gaussian, 7);
    within(
        &mc_variance(5, 5, &p(0.0, 0.0, 0.0), &gauss, 10_000).unwrap(),
        1.0,
        4.0,
    );
    within(
        &mc_variance(3, 4, &p(1.0, 1.0, -1.0), &gauss, 10_000).unwrap(),
        12.0,
        4.0,
    );
    within(
        &mc_covariance(&q(2, 3, 4, 1), &p(1.0, -1.0, 1.0), &gauss, 10_000).unwrap(),
        2.0,
        4.0,
    );
    let r = p(0.2, 0.1, 0.2);
    let c = q(3, 3, 5, 5);
    within(
        &mc_covariance(&c, &r, &gauss, 10_000).unwrap(),
        cov_exact(&c, &r).unwrap(),
        4.0,
    );

    let diag = mc_covariance(&q(4, 2, 4, 2), &r, &gauss, 500).unwrap();
    let var = mc_variance(4, 2, &r, &gauss, 500).unwrap();
    assert_eq!(diag.variance, var.variance);
}

#[test]
fn noise_distribution_does_not_matter() {
    let r = p(0.2, 0.1, 0.3);
    let est: Vec<McEstimate> = [
        NoiseKind::Gaussian,
        NoiseKind::Rademacher,
        NoiseKind::UniformCentered,
    ]
    .into_iter()
    .map(|kind| mc_variance(20, 20, &r, &NoiseSpec::new(kind, 99), 10_000).unwrap())
    .collect();
    for a in &est {
        for b in &est {
            let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            assert!((a.variance - b.variance).abs() <= 5.0 * se);
        }
    }
}

#[test]
fn partial_sum_sheet_at_the_vertex() {
    let noise = NoiseSpec::new(NoiseKind::UniformCentered, 3);
    let f = generate_field(8, 6, &p(1.0, 1.0, -1.0), &noise, 4).unwrap();
    let white = generate_field(8, 6, &p(0.0, 0.0, 0.0), &noise, 4).unwrap();
    for k in 1..=8 {
        for l in 1..=6 {
            let sum: f64 = (1..=k)
                .flat_map(|i| (1..=l).map(move |j| (i, j)))
                .map(|(i, j)| white.get(i, j))
                .sum();
            assert!((f.get(k, l) - sum).abs() < 1e-12);
        }
    }
    assert_eq!(
        f,
        generate_field(8, 6, &p(1.0, 1.0, -1.0), &noise, 4).unwrap()
    );
}
