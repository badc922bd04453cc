use std::f64::consts::PI;

use lane_emden::bounds::{eta0, sobolev_constant, Embedding, SystemConstants};
use lane_emden::geometry::{faber_krahn_bound, sigma_constant, unit_ball_volume, Domain};
use lane_emden::gle::{classify, h_value, principal_lambda_star, theta_star, Exponents, GleSystem, SurfaceSide};
use lane_emden::operators::{
    assemble, scalar_principal_eigen, solve_dirichlet, EllipticOperator, GridFunction, ScalarField,
};
use lane_emden::polyharmonic::{navier_eigen, navier_eigen_with, poly_bounds, NavierOptions, NavierProblem};
use proptest::prelude::*;

fn exponents(m: usize) -> impl Strategy<Value = Exponents<f64>> {
    prop::collection::vec(-1.5f64..1.5, m - 1).prop_map(move |mut logs| {
        logs.push(-logs.iter().sum::<f64>());
        let mut a: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
        let p: f64 = a.iter().product();
        a[m - 1] /= p;
        Exponents::new(a).unwrap()
    })
}

fn exponents_any() -> impl Strategy<Value = Exponents<f64>> {
    (2usize..=4).prop_flat_map(exponents)
}

fn lambda1(d: &Domain<f64>, op: &EllipticOperator<f64>) -> f64 {
    let a = assemble(op, d).unwrap();
    scalar_principal_eigen(&a, &GridFunction::constant(a.grid().clone(), 1.0)).unwrap().lambda
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `∫_0^∞ f(r) dr` through `r = tan t` and composite Simpson.
fn half_line(f: impl Fn(f64) -> f64) -> f64 {
    let n = 20_000;
    let h = PI / 2.0 / n as f64;
    let g = |t: f64| {
        let t = t.min(PI / 2.0 - 1e-12);
        f(t.tan()) / t.cos().powi(2)
    };
    let mut s = g(0.0) + g(PI / 2.0);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn sobolev_constant_is_attained_by_the_bubble() {
    for n in 3..=8usize {
        let nf = n as f64;
        let area = nf * unit_ball_volume::<f64>(n);
        let crit = 2.0 * nf / (nf - 2.0);
        let grad = area * half_line(|r| ((nf - 2.0) * r * (1.0 + r * r).powf(-nf / 2.0)).powi(2) * r.powf(nf - 1.0));
        let lq = (area * half_line(|r| (1.0 + r * r).powf(-nf) * r.powf(nf - 1.0))).powf(2.0 / crit);
        let cn = sobolev_constant::<f64>(n).unwrap();
        assert!(rel(lq / grad, cn) < 1e-6, "n = {n}: {} vs {cn}", lq / grad);
    }
}

#[test]
fn eigenvalue_error_is_second_order() {
    let err = |n: usize| (lambda1(&Domain::interval(1.0, n).unwrap(), &EllipticOperator::laplacian(1)) - PI * PI).abs();
    for n in [16, 32, 64] {
        let factor = err(n) / err(2 * n);
        assert!((factor - 4.0).abs() < 0.05, "N = {n}: factor {factor}");
    }
}

#[test]
fn navier_scaling_in_length() {
    for m in 1..=3usize {
        for l in [0.5, 1.0, 2.0] {
            let e = navier_eigen(&NavierProblem::unweighted(m, Domain::interval(l, 256).unwrap()).unwrap()).unwrap();
            let exact = (PI / l).powi(2 * m as i32);
            assert!(rel(e.lambda, exact) < 5e-3, "m = {m}, L = {l}: {}", e.lambda);
        }
    }
}

#[test]
fn eigenvalues_decrease_with_length() {
    let sys = GleSystem::laplacian(1, Exponents::new(vec![2.0, 0.5]).unwrap()).unwrap();
    let (mut prev_star, mut prev_scalar) = (f64::INFINITY, f64::INFINITY);
    for l in [0.5, 1.0, 2.0] {
        let d = Domain::interval(l, 128).unwrap();
        let ls = principal_lambda_star(&sys, &d).unwrap().lambda_star;
        let l1 = lambda1(&d, &EllipticOperator::laplacian(1));
        assert!(ls < prev_star && l1 < prev_scalar, "L = {l}");
        (prev_star, prev_scalar) = (ls, l1);
    }
}

proptest! {
    #[test]
    fn ball_volume_recursion(n in 3usize..=32) {
        let v = unit_ball_volume::<f64>(n);
        let w = unit_ball_volume::<f64>(n - 2) * 2.0 * PI / n as f64;
        prop_assert!(rel(v, w) < 1e-13);
    }

    #[test]
    fn sigma_dominates_cheeger(n in 1usize..=32) {
        let nf = n as f64;
        prop_assert!(sigma_constant::<f64>(n).unwrap() >= nf * nf / 4.0);
    }

    #[test]
    fn faber_krahn_measure_scaling(n in 1usize..=12, v in 1e-3f64..1e3) {
        let a = faber_krahn_bound::<f64>(n, v).unwrap();
        let b = faber_krahn_bound::<f64>(n, 2.0 * v).unwrap();
        prop_assert!(rel(a / b, 2f64.powf(2.0 / n as f64)) < 1e-13);
    }

    #[test]
    fn hypersurface_identity(
        (alpha, sigma) in exponents_any().prop_flat_map(|a| {
            let m = a.len();
            (Just(a), prop::collection::vec(0.01f64..10.0, m - 1))
        }),
        ls in 1e-2f64..1e5,
    ) {
        let th = theta_star(&sigma, ls, &alpha).unwrap();
        let mut lam = vec![th];
        lam.extend(sigma.iter().map(|s| th * s));
        prop_assert!(rel(h_value(&lam, &alpha).unwrap(), ls) < 1e-12);
    }

    #[test]
    fn h_is_homogeneous(
        (alpha, lam) in exponents_any().prop_flat_map(|a| {
            let m = a.len();
            (Just(a), prop::collection::vec(0.05f64..20.0, m))
        }),
        t in 0.05f64..20.0,
    ) {
        let scaled: Vec<f64> = lam.iter().map(|l| t * l).collect();
        let lhs = h_value(&scaled, &alpha).unwrap();
        let rhs = t.powf(alpha.degree_sum()) * h_value(&lam, &alpha).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-12);
    }

    #[test]
    fn classify_flips_under_reflection(
        (alpha, lam) in exponents_any().prop_flat_map(|a| {
            let m = a.len();
            (Just(a), prop::collection::vec(0.05f64..20.0, m))
        }),
        log_gap in -3.0f64..3.0,
    ) {
        prop_assume!(log_gap.abs() > 1e-6);
        let h = h_value(&lam, &alpha).unwrap();
        let ls = h * log_gap.exp();
        let side = classify(&lam, ls, &alpha).unwrap();
        let flipped = classify(&lam, h * h / ls, &alpha).unwrap();
        let expect = if log_gap > 0.0 { SurfaceSide::BelowSurface } else { SurfaceSide::AboveSurface };
        prop_assert_eq!(side, expect);
        prop_assert_ne!(flipped, side);
        prop_assert_ne!(flipped, SurfaceSide::OnSurface);
        prop_assert_eq!(classify(&lam, h, &alpha).unwrap(), SurfaceSide::OnSurface);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrete_weak_maximum_principle(
        diffusion in 0.1f64..3.0,
        drift in -5.0f64..5.0,
        potential in -3.0f64..0.0,
        length in 0.2f64..3.0,
        f in prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..10.0], 63),
    ) {
        let d = Domain::interval(length, 64).unwrap();
        let a = assemble(&EllipticOperator::isotropic(1, diffusion, vec![drift], potential), &d).unwrap();
        prop_assume!(a.m_matrix_report().is_m_matrix());
        let u = solve_dirichlet(&a, &GridFunction::new(a.grid().clone(), f).unwrap()).unwrap();
        prop_assert!(u.min() >= 0.0);
    }

    #[test]
    fn discrete_eigenvalue_exceeds_faber_krahn(
        sides in prop::collection::vec(0.2f64..2.0, 1..=2),
        radius in 0.2f64..2.0,
        use_ball in any::<bool>(),
    ) {
        let d = if use_ball {
            Domain::ball(radius, sides.len() + 1, 128).unwrap()
        } else {
            let res = vec![32; sides.len()];
            Domain::cuboid(sides.clone(), res).unwrap()
        };
        let fk = faber_krahn_bound(d.dim(), d.measure()).unwrap();
        prop_assert!(lambda1(&d, &EllipticOperator::laplacian(d.dim())) >= 0.98 * fk);
    }

    #[test]
    fn hypotheses_monotone_in_measure(
        m in 2usize..=3,
        drift in 0.0f64..2.0,
        potential in -2.0f64..0.0,
        weight in 0.5f64..2.0,
        v_small in 0.01f64..2.0,
        factor in 1.0f64..5.0,
    ) {
        let n = 1;
        let ops = vec![EllipticOperator::isotropic(n, 1.0, vec![drift], potential); m];
        let sys = GleSystem::new(ops, vec![ScalarField::constant(weight); m], Exponents::linear(m), f64::INFINITY).unwrap();
        let k = SystemConstants::compute(&sys, &Domain::interval(1.0, 16).unwrap()).unwrap();
        let cn = Embedding::default().constant::<f64>(n).unwrap();
        let v_big = v_small * factor;
        let pairs = [
            (vec![k.system_drift_smallness(v_small)], vec![k.system_drift_smallness(v_big)]),
            (k.drift_smallness(v_small), k.drift_smallness(v_big)),
            (k.principal_margin(v_small), k.principal_margin(v_big)),
            (k.weighted_drift(v_small), k.weighted_drift(v_big)),
            (vec![k.measure_cap(v_small, cn)], vec![k.measure_cap(v_big, cn)]),
        ];
        for (small, big) in pairs {
            for (s, b) in small.iter().zip(&big) {
                prop_assert!(!b.holds || s.holds, "{} holds at {v_big} but not at {v_small}", b.name);
            }
        }
        prop_assert!(k.interpolation_value(v_small, cn) >= k.interpolation_value(v_big, cn));
        // quadratic in V^{-1/n}, increasing wherever it is positive
        if k.linear_margin(v_big) > 0.0 {
            prop_assert!(k.linear_margin(v_small) >= k.linear_margin(v_big));
        }
    }

    #[test]
    fn eta0_separates_admissible_measures(
        m in 2usize..=3,
        drift in 0.0f64..1.0,
        lam in prop::collection::vec(0.1f64..5.0, 3),
        nonlinear in any::<bool>(),
    ) {
        let alpha = if nonlinear && m == 2 { Exponents::new(vec![2.0, 0.5]).unwrap() } else { Exponents::linear(m) };
        let ops = vec![EllipticOperator::isotropic(1, 1.0, vec![drift], 0.0); m];
        let sys = GleSystem::new(ops, vec![ScalarField::constant(1.0); m], alpha, f64::INFINITY).unwrap();
        let emb = Embedding::default();
        let lam = &lam[..m];
        let e = eta0(&sys, &Domain::interval(1.0, 16).unwrap(), lam, &emb).unwrap();
        let below = eta0(&sys, &Domain::interval(0.999 * e.value, 16).unwrap(), lam, &emb).unwrap();
        let above = eta0(&sys, &Domain::interval(1.001 * e.value, 16).unwrap(), lam, &emb).unwrap();
        prop_assert!(below.admissible);
        prop_assert!(!above.admissible);
        prop_assert!(rel(below.value, e.value) < 1e-12);
    }

    #[test]
    fn larger_weight_lowers_lambda_star(bump in 0.0f64..2.0, which in 0usize..2) {
        let d = Domain::interval(1.0, 64).unwrap();
        let base = GleSystem::laplacian(1, Exponents::new(vec![2.0, 0.5]).unwrap()).unwrap();
        let heavier = base.clone().with_weight(which, ScalarField::new(move |x: &[f64]| 1.0 + bump * x[0]));
        let l0 = principal_lambda_star(&base, &d).unwrap().lambda_star;
        let l1 = principal_lambda_star(&heavier, &d).unwrap().lambda_star;
        prop_assert!(l1 <= l0 * (1.0 + 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rotation_raises_lambda_star_to_inverse_first_exponent(log_a in -0.7f64..0.7) {
        let a = log_a.exp();
        let sys = GleSystem::laplacian(1, Exponents::new(vec![a, 1.0 / a]).unwrap()).unwrap();
        let d = Domain::interval(1.0, 64).unwrap();
        let ls = principal_lambda_star(&sys, &d).unwrap().lambda_star;
        let rotated = principal_lambda_star(&sys.rotated(), &d).unwrap().lambda_star;
        prop_assert!(rel(rotated, ls.powf(1.0 / a)) < 1e-6, "{rotated} vs {}", ls.powf(1.0 / a));
    }

    #[test]
    fn navier_chain_positive_for_positive_weights(
        m in 1usize..=3,
        a in 0.0f64..2.0,
        b in 0.0f64..2.0,
        ball in any::<bool>(),
    ) {
        let (d, w) = if ball {
            (Domain::ball(1.0, 2, 64).unwrap(), ScalarField::new(move |x: &[f64]| 1.0 + a * (x[0] * x[0] + x[1] * x[1])))
        } else {
            (Domain::interval(1.0, 64).unwrap(), ScalarField::new(move |x: &[f64]| 1.0 + a * x[0] + b * x[0] * x[0]))
        };
        let e = navier_eigen(&NavierProblem::new(m, d, w, f64::INFINITY).unwrap()).unwrap();
        prop_assert!(e.all_positive());
        prop_assert!(e.agreement < 1e-8, "{}", e.agreement);
    }

    #[test]
    fn navier_sandwich_on_sampled_balls(
        m in 1usize..=2,
        s in 0.3f64..1.0,
        fill in 0.05f64..1.0,
        r_frac in 0.05f64..0.95,
    ) {
        let sigma = sigma_constant::<f64>(2).unwrap();
        let c = fill * sigma / (m as f64 * s * s);
        let ball = Domain::ball(s, 2, 128).unwrap();
        let w = ScalarField::constant(c);
        let radius = r_frac * s.min(1.0);
        let sw = poly_bounds(m, &ball, &w, radius, c).unwrap();
        let e = navier_eigen(&NavierProblem::new(m, ball, w, f64::INFINITY).unwrap()).unwrap();
        // the radial scheme approaches λ_1 from below, O(h²) with h = s/128
        let lambda = e.lambda * (1.0 + 1e-4);
        prop_assert!(sw.contains(lambda), "{} ≤ {} ≤ {}", sw.lower, e.lambda, sw.upper);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1))]

    #[test]
    fn navier_is_simple(inits in prop::collection::vec(prop::collection::vec(0.1f64..10.0, 127), 5)) {
        let prob = NavierProblem::unweighted(2, Domain::interval(1.0, 128).unwrap()).unwrap();
        let grid = GridFunction::constant(lane_emden::operators::Grid::new(prob.domain()), 1.0).grid().clone();
        let values: Vec<f64> = inits
            .into_iter()
            .map(|v| {
                let opts = NavierOptions { initial: Some(GridFunction::new(grid.clone(), v).unwrap()) };
                navier_eigen_with(&prob, &opts).unwrap().lambda
            })
            .collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(0.0, f64::max);
        prop_assert!(rel(hi, lo) < 1e-8, "{values:?}");
    }
}
