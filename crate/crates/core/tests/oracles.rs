//! Frozen-value checks against independently computed constants.
//!
//! Every constant asserted here was produced outside this crate (closed
//! forms evaluated separately, or high-precision arithmetic) and is pinned
//! so regressions in the numeric kernels surface as exact-value failures.

use shallownet::approx1d::{build_relu_approx_1d, step_approximate, step_to_sigma1_net, Target1D};
use shallownet::measure::{
    self, exact_l1_distance_1d, exact_l1_step_vs_cpwl, net_to_cpwl_1d, quad_l1_distance_1d,
    Cpwl1D,
};
use shallownet::surgery::{
    indicator_error_closed_form, indicator_tail_bound, ClassMeasures, IndicatorSpec,
};

/// 1/(e^8 + 1), the per-class closed-form error for m = 2 equal-measure
/// classes at eps = 0.5 (margin 2/0.5 = 4, gap 2 * 4 = 8).
const CLOSED_FORM_M2_EPS_HALF: f64 = 3.353501304664781e-4;

/// 2 * e^{-8}, the tail bound for the same configuration.
const TAIL_M2_EPS_HALF: f64 = 6.709252558050237e-4;

/// 2/pi, the integral of |sin(2 pi x)| over [0, 1].
const ABS_SIN_INTEGRAL: f64 = std::f64::consts::FRAC_2_PI;

#[test]
fn closed_form_matches_pinned_two_class_value() {
    let measures = ClassMeasures::new(vec![0.5, 0.5]).unwrap();
    let per_class = indicator_error_closed_form(&measures, 0.5).unwrap();
    assert_eq!(per_class.len(), 2);
    for v in &per_class {
        assert!(
            (v - CLOSED_FORM_M2_EPS_HALF).abs() <= 1e-19,
            "closed form {v}, pinned {CLOSED_FORM_M2_EPS_HALF}"
        );
    }
}

#[test]
fn tail_bound_matches_pinned_two_class_value() {
    let bound = indicator_tail_bound(2, 0.5).unwrap();
    assert!(
        (bound.tail - TAIL_M2_EPS_HALF).abs() <= 1e-19,
        "tail {}, pinned {TAIL_M2_EPS_HALF}",
        bound.tail
    );
    assert_eq!(bound.guarantee, 0.25);
}

#[test]
fn bound_chain_holds_across_class_and_eps_grids() {
    // closed_form <= m e^{-2m/eps} <= eps/2 for any measures, any eps > 0.
    let eps_grid = [1e-3, 0.01, 0.05, 0.1, 0.5, 1.0, 4.0, 100.0];
    for m in 2..=16usize {
        // Worst closed form comes from concentrating measure on one class.
        let mut per = vec![0.0; m];
        per[0] = 1.0;
        let skew = ClassMeasures::new(per).unwrap();
        let even = ClassMeasures::new(vec![1.0 / m as f64; m]).unwrap();
        for &eps in &eps_grid {
            let bound = indicator_tail_bound(m, eps).unwrap();
            assert!(bound.tail <= bound.guarantee * (1.0 + 1e-15));
            for measures in [&skew, &even] {
                for v in indicator_error_closed_form(measures, eps).unwrap() {
                    assert!(
                        v <= bound.tail * (1.0 + 1e-15),
                        "m={m} eps={eps}: closed form {v} above tail {}",
                        bound.tail
                    );
                }
            }
        }
    }
}

#[test]
fn midpoint_step_error_on_identity_is_quarter_over_cells() {
    // For f(x) = x the midpoint step has per-cell error w^2/4 exactly,
    // summing to 1/(4k).
    let target = Target1D::builtin("x").unwrap();
    for k in [1usize, 2, 4, 10, 37] {
        let step = step_approximate(&target, k).unwrap();
        let f = Cpwl1D::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let report = exact_l1_step_vs_cpwl(&step, &f);
        let expected = 1.0 / (4.0 * k as f64);
        assert!(
            (report.value - expected).abs() <= 1e-12 * expected.max(1.0),
            "k={k}: got {}, expected {expected}",
            report.value
        );
    }
}

#[test]
fn ramp_error_matches_triangle_formula() {
    // A single unit jump h smoothed at slope s leaves two triangles of
    // total area h/(4s); exact integration must agree.
    for (h, s) in [(1.0, 10.0), (0.5, 8.0), (2.0, 64.0)] {
        let step = shallownet::approx1d::StepFn1D::new(vec![0.5], vec![0.0, h]).unwrap();
        let ramp = step_to_sigma1_net(&step, s).unwrap();
        let expected = h / (4.0 * s);
        assert!(
            (ramp.ramp_l1 - expected).abs() <= 1e-15 * expected.max(1.0),
            "declared ramp error {} vs formula {expected}",
            ramp.ramp_l1
        );
        let cpwl = net_to_cpwl_1d(&ramp.net, 0).unwrap();
        let report = exact_l1_step_vs_cpwl(&step, &cpwl);
        assert!(
            (report.value - expected).abs() <= 1e-12 * expected.max(1.0),
            "measured ramp error {} vs formula {expected}",
            report.value
        );
    }
}

#[test]
fn single_jump_slope_ten_costs_exactly_quarter_of_a_tenth() {
    let step = shallownet::approx1d::StepFn1D::new(vec![0.5], vec![0.0, 1.0]).unwrap();
    let ramp = step_to_sigma1_net(&step, 10.0).unwrap();
    let cpwl = net_to_cpwl_1d(&ramp.net, 0).unwrap();
    let report = exact_l1_step_vs_cpwl(&step, &cpwl);
    assert!((report.value - 0.025).abs() <= 1e-15);
}

#[test]
fn adaptive_quadrature_reproduces_abs_sine_integral() {
    let report = quad_l1_distance_1d(
        &|x| (2.0 * std::f64::consts::PI * x).sin(),
        &|_| 0.0,
        &[0.5],
        1e-12,
    )
    .unwrap();
    assert!(
        (report.value - ABS_SIN_INTEGRAL).abs() <= 1e-11,
        "got {}, pinned {ABS_SIN_INTEGRAL}",
        report.value
    );
}

#[test]
fn exact_l1_reproduces_textbook_line_integrals() {
    let x = Cpwl1D::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
    let zero = Cpwl1D::new(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
    let half = Cpwl1D::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
    assert!((exact_l1_distance_1d(&x, &zero).value - 0.5).abs() <= 1e-15);
    assert!((exact_l1_distance_1d(&x, &half).value - 0.25).abs() <= 1e-15);
    assert_eq!(exact_l1_distance_1d(&x, &x).value, 0.0);
}

#[test]
fn built_approximations_meet_their_budgets_exactly_measured() {
    // End-to-end: built nets for every builtin target must measure under
    // the requested budget with the exact or adaptive engine, and the
    // certificate must dominate the measurement.
    for name in ["x", "x2", "sin2pi", "sign"] {
        let target = Target1D::builtin(name).unwrap();
        for eps in [0.2, 0.05] {
            let built = build_relu_approx_1d(&target, eps).unwrap();
            built.certificate.check().unwrap();
            let cpwl = net_to_cpwl_1d(&built.relu_net, 0).unwrap();
            let measured = match target.exact_form() {
                Some(shallownet::approx1d::ExactForm::Cpwl(f)) => {
                    exact_l1_distance_1d(f, &cpwl).value
                }
                Some(shallownet::approx1d::ExactForm::Step(s)) => {
                    exact_l1_step_vs_cpwl(s, &cpwl).value
                }
                None => {
                    let mut hints = cpwl.breakpoints().to_vec();
                    hints.extend_from_slice(target.breakpoints());
                    quad_l1_distance_1d(&|x| target.eval(x), &|x| cpwl.value_at(x), &hints, 1e-12)
                        .unwrap()
                        .value
                }
            };
            assert!(
                measured < eps,
                "{name} at eps={eps}: measured {measured} not under budget"
            );
            assert!(
                built.certificate.total_achieved >= measured - 1e-12,
                "{name} at eps={eps}: certificate {} below measurement {measured}",
                built.certificate.total_achieved
            );
        }
    }
}

#[test]
fn constructive_indicator_certificate_dominates_exact_measurement() {
    let spec = IndicatorSpec::new(1, 3, vec![vec![0.3, 0.7]], vec![0, 1, 2]).unwrap();
    let eps = 0.1;
    let built = shallownet::surgery::build_softmax_indicator_net(
        &spec,
        eps,
        &shallownet::surgery::IndicatorBackend::Constructive1D,
    )
    .unwrap();
    built.certificate.check().unwrap();
    let reports = measure::softmax_vs_onehot_l1_1d(&built.net, &spec, 1e-12).unwrap();
    for (i, report) in reports.iter().enumerate() {
        assert!(
            report.value < eps,
            "class {i}: measured {} not under {eps}",
            report.value
        );
        assert!(
            built.per_class[i] >= report.value - 1e-12,
            "class {i}: stated bound {} below measurement {}",
            built.per_class[i],
            report.value
        );
    }
}
