use diracl2::algebra::{Blade, Multivector};
use diracl2::field::{integrate, weighted_norm_sq, Bump, CliffordField, Grid, TestFunction, WeightSpec};
use diracl2::solver::{
    check_minimality, slab_bound_report, solve_min_norm, DiscreteDiracOperator, SolverError, DEFAULT_TOL,
};
use diracl2::verify::observed_orders;
use proptest::prelude::*;

fn bump_rhs(g: &Grid, mask: u32) -> CliffordField {
    TestFunction::blade(g, 0.1, Blade::new(g.n(), mask).unwrap()).unwrap().sample(g)
}

fn times_right(f: &CliffordField, e: &Multivector<f64>) -> CliffordField {
    let g = f.grid();
    let mut values = Vec::with_capacity(f.values().len());
    for k in 0..g.len() {
        values.extend_from_slice(f.multivector(k).mul(e).unwrap().coeffs());
    }
    CliffordField::from_values(g, values).unwrap()
}

fn weight_strategy() -> impl Strategy<Value = WeightSpec> {
    prop_oneof![
        Just(WeightSpec::Zero),
        Just(WeightSpec::Quadratic0),
        Just(WeightSpec::AnisoQuadratic),
        Just(WeightSpec::AxialPoly {
            axis: 1,
            coeffs: vec![0.0, 0.3, 1.0]
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transpose_is_the_weighted_adjoint(
        (n, nodes) in prop_oneof![Just((1usize, 7usize)), Just((2, 5)), Just((3, 4))],
        w in weight_strategy(),
        seed in any::<u64>(),
    ) {
        prop_assume!(!(n == 1 && matches!(w, WeightSpec::AxialPoly { .. })));
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = Grid::cube(n, nodes, -1.0, 1.0).unwrap();
        let op = DiscreteDiracOperator::new(&g, &w).unwrap();
        let len = op.unknowns();
        let u: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = op.restrict_interior(&v);
        let lhs = op.dot_interior(&op.apply(&u), &v);
        let rhs = op.dot(&u, &op.adjoint(&v));
        let scale = (op.dot(&u, &u) * op.dot(&v, &v)).sqrt();
        prop_assert!((lhs - rhs).abs() <= 1e-11 * scale, "{} vs {}", lhs, rhs);
    }
}

#[test]
fn zero_rhs_gives_zero_solution() {
    let g = Grid::cube(2, 9, -1.0, 1.0).unwrap();
    let (u, r) = solve_min_norm(&CliffordField::zeros(&g), &WeightSpec::AnisoQuadratic, DEFAULT_TOL, None).unwrap();
    assert_eq!(r.iterations, 0);
    assert!(r.converged);
    assert!(u.values().iter().all(|v| *v == 0.0));
}

#[test]
fn bad_inputs_are_rejected() {
    let g = Grid::cube(1, 9, -1.0, 1.0).unwrap();
    let f = bump_rhs(&g, 0);
    assert!(matches!(
        solve_min_norm(&f, &WeightSpec::Zero, 0.0, None),
        Err(SolverError::InvalidTolerance(_))
    ));
    let mut bad = f.clone();
    bad.values_mut()[3] = f64::NAN;
    assert!(solve_min_norm(&bad, &WeightSpec::Zero, DEFAULT_TOL, None).is_err());
}

#[test]
fn solution_solves_the_system_at_interior_nodes() {
    let g = Grid::cube(2, 13, -1.0, 1.0).unwrap();
    let f = bump_rhs(&g, 0b10);
    let w = WeightSpec::AnisoQuadratic;
    let (u, r) = solve_min_norm(&f, &w, DEFAULT_TOL, None).unwrap();
    assert!(r.converged && r.relative_residual <= DEFAULT_TOL);
    let op = DiscreteDiracOperator::new(&g, &w).unwrap();
    let lu = op.apply_field(&u).unwrap();
    let target = op.restrict_interior(f.values());
    let err: f64 = lu.values().iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-8 * f.max_abs(), "{err}");
}

/// Right multiplication by `e_A` commutes with the discrete operator and
/// preserves `|·|_0`, so it carries solutions to solutions.
#[test]
fn right_multiplication_by_a_blade_carries_solutions() {
    let g = Grid::cube(2, 13, -1.0, 1.0).unwrap();
    let w = WeightSpec::AnisoQuadratic;
    let f = bump_rhs(&g, 0);
    let (u, r) = solve_min_norm(&f, &w, 1e-12, None).unwrap();
    for mask in 1..4 {
        let e = Multivector::basis(Blade::new(2, mask).unwrap());
        let (ue, re) = solve_min_norm(&times_right(&f, &e), &w, 1e-12, None).unwrap();
        let expected = times_right(&u, &e);
        let diff = ue.sub(&expected).unwrap().max_abs();
        assert!(diff <= 1e-9 * u.max_abs(), "mask {mask}: {diff}");
        assert!((re.norm_sq - r.norm_sq).abs() <= 1e-9 * r.norm_sq);
    }
}

#[test]
fn solution_is_orthogonal_to_the_null_space() {
    let g = Grid::cube(1, 17, -1.0, 1.0).unwrap();
    let w = WeightSpec::Quadratic0;
    let (u, _) = solve_min_norm(&bump_rhs(&g, 1), &w, 1e-12, None).unwrap();
    let m = check_minimality(&u, &w, 4, 3, 1e-12).unwrap().expect("projections converge");
    assert!(m.max_relative_inner <= 1e-8, "{m:?}");
    assert!(m.max_relative_image <= 1e-6, "{m:?}");
}

#[test]
fn bound_ratios_stay_below_one_under_refinement() {
    let w = WeightSpec::Quadratic0;
    let mut last = f64::INFINITY;
    for nodes in [17, 33, 65] {
        let g = Grid::cube(1, nodes, -1.0, 1.0).unwrap();
        let f = bump_rhs(&g, 0);
        let (u, r) = solve_min_norm(&f, &w, DEFAULT_TOL, None).unwrap();
        let ratio = r.unscaled_bound_ratio.unwrap();
        assert!(ratio <= 1.0 && ratio <= last * (1.0 + 1e-9), "{nodes}: {ratio} after {last}");
        last = ratio;
        let slab = slab_bound_report(&u, &f, &w).unwrap();
        assert!(slab.ratio <= 1.0, "{slab:?}");
    }
}

#[test]
fn slab_bound_needs_the_quadratic_weight() {
    let g = Grid::cube(1, 9, -1.0, 1.0).unwrap();
    let f = bump_rhs(&g, 0);
    let w = WeightSpec::AnisoQuadratic;
    let (u, _) = solve_min_norm(&f, &w, DEFAULT_TOL, None).unwrap();
    assert!(matches!(slab_bound_report(&u, &f, &w), Err(SolverError::SlabWeight(_))));
}

/// The discrete adjoint `W⁻¹ Lᵀ W` applied to a bump matches the exact
/// `(Dφ)α - Dα` at second order in the weighted norm. The bump's steep
/// edges keep coarser grids pre-asymptotic.
#[test]
fn discrete_adjoint_converges_to_the_exact_dual() {
    for w in [WeightSpec::Zero, WeightSpec::Quadratic0, WeightSpec::AnisoQuadratic] {
        let mut errs = Vec::new();
        let mut hs = Vec::new();
        for nodes in [129, 257, 513] {
            let g = Grid::cube(1, nodes, -1.0, 1.0).unwrap();
            let alpha = TestFunction::new(Bump::inside(&g, 0.05).unwrap(), Multivector::basis(Blade::new(1, 1).unwrap()));
            let op = DiscreteDiracOperator::new(&g, &w).unwrap();
            let a = CliffordField::from_values(&g, op.restrict_interior(alpha.sample(&g).values())).unwrap();
            let exact = alpha.sample_dual(&g, &w);
            let diff = op.adjoint_field(&a).unwrap().sub(&exact).unwrap();
            errs.push((weighted_norm_sq(&diff, &w).unwrap() / weighted_norm_sq(&exact, &w).unwrap()).sqrt());
            hs.push(g.max_spacing());
        }
        let orders = observed_orders(&errs, &hs);
        assert!(orders.iter().all(|o| (o - 2.0).abs() < 0.1), "{w}: {errs:?} {orders:?}");
    }
}

#[test]
fn trapezoid_rule_is_second_order() {
    // ∫_{[0,1]^2} e^{x+y} = (e - 1)^2
    let exact = (std::f64::consts::E - 1.0).powi(2);
    let mut errs = Vec::new();
    let mut hs = Vec::new();
    for nodes in [9, 17, 33] {
        let g = Grid::cube(1, nodes, 0.0, 1.0).unwrap();
        errs.push(integrate(&g, |_, x| (x[0] + x[1]).exp()) - exact);
        hs.push(g.max_spacing());
    }
    let orders = observed_orders(&errs, &hs);
    assert!(orders.iter().all(|o| (o - 2.0).abs() < 0.05), "{orders:?}");
}
