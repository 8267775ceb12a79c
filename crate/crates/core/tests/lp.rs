mod common;

use svgic_core::fixtures::running_example;
use svgic_core::lp::*;
use svgic_core::oracle::{brute_force, brute_force_st, gen_lemma1, gen_random};
use svgic_core::{Edge, Instance, ObjectiveMode, StParams};

const LP_TOL: f64 = 1e-6;

fn optimum(model: &LpModel) -> f64 {
    let result = solve_lp(model).unwrap();
    assert!(result.is_optimal(), "status {:?}", result.status);
    result.objective
}

#[test]
fn bounded_single_variable() {
    let mut model = LpModel::maximize();
    let x = model.add_var("x", 0.0, f64::INFINITY);
    model.set_objective(x, 1.0);
    model.add_constraint("cap", vec![(x, 1.0)], Sense::Le, 1.0);
    assert!((optimum(&model) - 1.0).abs() < 1e-12);
}

#[test]
fn infeasible_and_unbounded_are_reported() {
    let mut model = LpModel::maximize();
    let x = model.add_var("x", 0.0, f64::INFINITY);
    model.set_objective(x, 1.0);
    assert_eq!(solve_lp(&model).unwrap().status, LpStatus::Unbounded);
    model.add_constraint("lo", vec![(x, 1.0)], Sense::Ge, 2.0);
    model.add_constraint("hi", vec![(x, 1.0)], Sense::Le, 1.0);
    assert_eq!(solve_lp(&model).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn running_example_model_sizes() {
    let inst = running_example();
    assert_eq!(build_full_lp(&inst).num_vars(), 160);
    assert_eq!(build_simplified_lp(&inst).num_vars(), 40);
}

#[test]
fn running_example_relaxation_value() {
    // Independent LP solve of the compact model gives 10.45.
    let inst = running_example();
    let full = optimum(&build_full_lp(&inst));
    let compact = optimum(&build_simplified_lp(&inst));
    assert!((full - 10.45).abs() < LP_TOL);
    assert!((compact - full).abs() < LP_TOL);
    assert!(compact >= 10.35 - LP_TOL);
}

#[test]
fn single_cell_instance() {
    let inst = Instance::new(1, 1, 1, 0.5, vec![vec![0.7]], vec![]).unwrap();
    let model = build_full_lp(&inst);
    assert_eq!(model.vars().iter().filter(|v| v.name.starts_with("x_")).count(), 1);
    assert!((optimum(&model) - 0.7).abs() < 1e-12);
}

#[test]
fn all_items_shown_when_k_equals_m() {
    let inst = gen_random(3, 3, 3, 0.7, 4).unwrap();
    let model = build_simplified_lp(&inst);
    let result = solve_lp(&model).unwrap();
    for (j, var) in model.vars().iter().enumerate() {
        if var.name.starts_with("xu_") {
            assert!((result.values[j] - 1.0).abs() < LP_TOL, "{} = {}", var.name, result.values[j]);
        }
    }
}

#[test]
fn lemma1_relaxation_equals_full_co_display() {
    // n(n-1)·τ·k with n = 3, τ = 1, k = 2.
    let inst = gen_lemma1(3, 4, 2, 1.0).unwrap();
    assert!((optimum(&build_simplified_lp(&inst)) - 12.0).abs() < LP_TOL);
    let (_, opt) = brute_force(&inst, ObjectiveMode::UnitSum).unwrap();
    assert!((opt - 12.0).abs() < 1e-9);
}

#[test]
fn full_and_compact_agree_and_bound_the_optimum() {
    for inst in common::random_corpus(25, 77) {
        let full = optimum(&build_full_lp(&inst));
        let compact = optimum(&build_simplified_lp(&inst));
        assert!((full - compact).abs() < LP_TOL, "full {full} compact {compact}");
        let (_, opt) = brute_force(&inst, ObjectiveMode::UnitSum).unwrap();
        assert!(compact >= opt - LP_TOL);
    }
}

#[test]
fn expanded_solutions_satisfy_both_sum_rules() {
    for inst in common::random_corpus(15, 3) {
        let result = solve_lp(&build_simplified_lp(&inst)).unwrap();
        let frac = expand_solution(&result, &inst).unwrap();
        frac.check_invariants().unwrap();
        let (n, m, k) = frac.dims();
        for u in 0..n {
            for s in 0..k {
                let sum: f64 = (0..m).map(|c| frac.get(u, c, s)).sum();
                assert!((sum - 1.0).abs() < LP_TOL);
            }
            for c in 0..m {
                let sum: f64 = (0..k).map(|s| frac.get(u, c, s)).sum();
                assert!(sum <= 1.0 + LP_TOL);
            }
        }
    }
}

#[test]
fn fixing_the_optimal_value_keeps_the_model_feasible() {
    for inst in common::random_corpus(10, 8) {
        let mut model = build_simplified_lp(&inst);
        let value = optimum(&model);
        let coefs: Vec<(usize, f64)> =
            model.objective().iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(j, &c)| (j, c)).collect();
        model.add_constraint("fix_opt", coefs, Sense::Eq, value);
        let again = solve_lp(&model).unwrap();
        assert!(again.is_optimal());
        assert!((again.objective - value).abs() < LP_TOL);
        assert!(model.max_violation(&again.values) < 1e-7);
    }
}

fn small_st(d_tel: f64, max_size: usize) -> Instance {
    gen_random(3, 3, 2, 0.9, 12).unwrap().with_st(StParams { d_tel, max_size }).unwrap()
}

#[test]
fn teleport_model_without_discount_matches_the_plain_model() {
    let inst = small_st(0.0, 3);
    let st = build_st_lp(&inst).unwrap();
    for (var, coef) in st.vars().iter().zip(st.objective()) {
        if var.name.starts_with('z') {
            assert_eq!(*coef, 0.0, "{}", var.name);
        }
    }
    assert!((optimum(&st) - optimum(&build_full_lp(&inst))).abs() < LP_TOL);
}

#[test]
fn teleport_relaxation_bounds_the_capped_optimum() {
    for max_size in 1..=3 {
        for d_tel in [0.0, 0.3, 0.8] {
            let inst = small_st(d_tel, max_size);
            let (_, opt) = brute_force_st(&inst, ObjectiveMode::UnitSum).unwrap();
            assert!(optimum(&build_st_lp(&inst).unwrap()) >= opt - LP_TOL, "M {max_size} d {d_tel}");
        }
    }
}

#[test]
fn loose_cap_does_not_change_the_teleport_relaxation() {
    let loose = optimum(&build_st_lp(&small_st(0.5, 3)).unwrap());
    let looser = optimum(&build_st_lp(&small_st(0.5, 30)).unwrap());
    assert!((loose - looser).abs() < LP_TOL);
    assert!(build_st_lp(&gen_random(3, 3, 2, 0.5, 1).unwrap()).is_err());
}

#[test]
fn export_without_edges_has_no_pair_rows() {
    let inst = Instance::new(2, 3, 2, 0.5, vec![vec![0.1, 0.2, 0.3]; 2], vec![]).unwrap();
    let text = export_model(&build_full_lp(&inst), false);
    let parsed = parse_lp(&text).unwrap();
    assert!(parsed.vars().iter().all(|v| !v.name.starts_with('y')));
    assert!(parsed.constraints().iter().all(|c| !c.name.starts_with('y')));
}

#[test]
fn export_round_trip_preserves_the_model() {
    let inst = running_example();
    for (model, integral) in [(build_full_lp(&inst), true), (build_simplified_lp(&inst), false)] {
        let parsed = parse_lp(&export_model(&model, integral)).unwrap();
        assert_eq!(parsed.num_vars(), model.num_vars());
        assert_eq!(parsed.num_constraints(), model.num_constraints());
        assert_eq!(parsed.has_integrality(), integral);
        assert!((optimum(&parsed.relaxed()) - optimum(&model)).abs() < LP_TOL);
    }
}

#[test]
fn teleport_export_round_trips() {
    let inst = small_st(0.5, 2);
    let model = build_st_lp(&inst).unwrap();
    let parsed = parse_lp(&export_model(&model, false)).unwrap();
    assert_eq!(parsed.num_constraints(), model.num_constraints());
    assert!((optimum(&parsed) - optimum(&model)).abs() < LP_TOL);
}

#[test]
fn parse_errors_carry_line_numbers() {
    let err = parse_lp("Maximize\n obj: x\nSubject To\n c1: x <=\nEnd\n").unwrap_err();
    assert!(matches!(err, svgic_core::Error::LpParse { line: 4, .. }), "{err}");
}

#[test]
fn social_weights_enter_the_objective() {
    let edge = Edge { u: 0, v: 1, tau_uv: vec![0.4, 0.0], tau_vu: vec![0.1, 0.0] };
    let inst = Instance::new(2, 2, 1, 0.5, vec![vec![0.0, 0.3], vec![0.0, 0.3]], vec![edge]).unwrap();
    // Both users on item 0 earn 0.5; each on item 1 earns 0.6.
    assert!((optimum(&build_simplified_lp(&inst)) - 0.6).abs() < LP_TOL);
}
