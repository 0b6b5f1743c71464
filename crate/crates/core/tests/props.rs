//! Property suites over randomized nets, logits, and piecewise functions.

use proptest::prelude::*;
use shallownet::approx1d::{ApproxCertificate, CertMode, NamedValue};
use shallownet::measure::{exact_l1_distance_1d, net_to_cpwl_1d, Cpwl1D};
use shallownet::nets::{softmax, ActivationKind, Net};
use shallownet::surgery::{sigma1_expand_to_relu, stack_outputs};

fn arb_params(
    d: usize,
    max_n: usize,
    max_m: usize,
) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>)> {
    (1..=max_n, 1..=max_m).prop_flat_map(move |(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(-4.0..4.0f64, d), n),
            prop::collection::vec(-4.0..4.0f64, n),
            prop::collection::vec(prop::collection::vec(-4.0..4.0f64, n), m),
        )
    })
}

fn arb_net(d: usize, act: ActivationKind) -> impl Strategy<Value = Net> {
    arb_params(d, 16, 3)
        .prop_map(move |(w, b, a)| Net::new(d, w, b, a, act, false).unwrap())
}

fn arb_point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, d)
}

fn arb_cpwl() -> impl Strategy<Value = Cpwl1D> {
    (1..=6usize)
        .prop_flat_map(|interior| {
            (
                prop::collection::vec(0.01..0.99f64, interior),
                prop::collection::vec(-3.0..3.0f64, interior + 2),
            )
        })
        .prop_filter_map("breakpoints too close", |(mut cuts, values)| {
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            let mut bp = vec![0.0];
            bp.extend(cuts);
            bp.push(1.0);
            let values = values[..bp.len()].to_vec();
            Cpwl1D::new(bp, values).ok()
        })
}

proptest! {
    /// The clipped ramp equals its two-relu decomposition to within one
    /// rounding step of the inputs involved.
    #[test]
    fn sigma1_matches_relu_pair(t in -1e12..1e12f64) {
        let direct = ActivationKind::Sigma1.apply(t);
        let pair = (t + 0.5).max(0.0) - (t - 0.5).max(0.0);
        prop_assert!((direct - pair).abs() <= f64::EPSILON);
    }

    #[test]
    fn sigma1_matches_relu_pair_near_the_ramp(t in -2.0..2.0f64) {
        let direct = ActivationKind::Sigma1.apply(t);
        let pair = (t + 0.5).max(0.0) - (t - 0.5).max(0.0);
        prop_assert!((direct - pair).abs() <= f64::EPSILON);
    }

    /// Softmax output is a probability vector.
    #[test]
    fn softmax_is_a_probability_vector(
        logits in prop::collection::vec(-30.0..30.0f64, 1..8)
    ) {
        let p = softmax(&logits).unwrap();
        let sum: f64 = p.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    /// Adding a constant to every logit leaves softmax unchanged to a few
    /// rounding steps per component (moderate logits keep the exponentials
    /// well scaled).
    #[test]
    fn softmax_shift_invariance(
        logits in prop::collection::vec(-4.0..4.0f64, 2..8),
        c in -4.0..4.0f64,
    ) {
        let base = softmax(&logits).unwrap();
        let shifted_in: Vec<f64> = logits.iter().map(|z| z + c).collect();
        let shifted = softmax(&shifted_in).unwrap();
        for (a, b) in base.iter().zip(&shifted) {
            prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON);
        }
    }

    /// Softmax is 1-Lipschitz in the Euclidean norm.
    #[test]
    fn softmax_is_one_lipschitz(
        logits in prop::collection::vec(-10.0..10.0f64, 2..6),
        delta in prop::collection::vec(-1.0..1.0f64, 6),
    ) {
        let perturbed: Vec<f64> = logits
            .iter()
            .zip(&delta)
            .map(|(z, d)| z + d)
            .collect();
        let p = softmax(&logits).unwrap();
        let q = softmax(&perturbed).unwrap();
        let dist_out: f64 = p
            .iter()
            .zip(&q)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let dist_in: f64 = logits
            .iter()
            .zip(&perturbed)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        prop_assert!(dist_out <= dist_in + 1e-12);
    }

    /// Logits are linear in the output weights: doubling every output row
    /// doubles every logit.
    #[test]
    fn logits_scale_with_output_weights(
        net in arb_net(2, ActivationKind::Relu),
        x in arb_point(2),
        scale in -3.0..3.0f64,
    ) {
        let (d, w, b, a, act, _) = net.clone().into_parts();
        let scaled: Vec<Vec<f64>> = a
            .iter()
            .map(|row| row.iter().map(|v| v * scale).collect())
            .collect();
        let scaled_net = Net::new(d, w, b, scaled, act, false).unwrap();
        let base = net.eval_logits(&x).unwrap();
        let got = scaled_net.eval_logits(&x).unwrap();
        for (u, v) in base.iter().zip(&got) {
            prop_assert!((u * scale - v).abs() <= 1e-12 * u.abs().max(1.0));
        }
    }

    /// JSON round-trips preserve nets exactly, including every parameter
    /// bit (serde prints shortest-round-trip floats).
    #[test]
    fn net_json_round_trip_is_exact(net in arb_net(3, ActivationKind::Sigma1)) {
        let text = serde_json::to_string(&net).unwrap();
        let back: Net = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(net, back);
    }

    /// Expansion doubles the width and preserves the map pointwise.
    #[test]
    fn expansion_preserves_evaluation(
        net in arb_net(2, ActivationKind::Sigma1),
        xs in prop::collection::vec(arb_point(2), 16),
    ) {
        let expanded = sigma1_expand_to_relu(&net).unwrap();
        prop_assert_eq!(expanded.hidden_count(), 2 * net.hidden_count());
        prop_assert_eq!(expanded.activation(), ActivationKind::Relu);
        for x in &xs {
            let want = net.eval(x).unwrap();
            let got = expanded.eval(x).unwrap();
            for (u, v) in want.iter().zip(&got) {
                prop_assert!((u - v).abs() <= 1e-12);
            }
        }
    }

    /// The expanded net keeps the original rows in its first half and the
    /// negated copies in the second, with biases shifted by the half-unit.
    #[test]
    fn expansion_layout_is_the_documented_remap(net in arb_net(1, ActivationKind::Sigma1)) {
        let expanded = sigma1_expand_to_relu(&net).unwrap();
        let n = net.hidden_count();
        for j in 0..n {
            prop_assert_eq!(&expanded.hidden_weights()[j], &net.hidden_weights()[j]);
            prop_assert_eq!(&expanded.hidden_weights()[n + j], &net.hidden_weights()[j]);
            prop_assert_eq!(expanded.hidden_biases()[j], net.hidden_biases()[j] + 0.5);
            prop_assert_eq!(expanded.hidden_biases()[n + j], net.hidden_biases()[j] - 0.5);
            for row in 0..net.output_count() {
                prop_assert_eq!(
                    expanded.output_weights()[row][j],
                    net.output_weights()[row][j]
                );
                prop_assert_eq!(
                    expanded.output_weights()[row][n + j],
                    -net.output_weights()[row][j]
                );
            }
        }
    }

    /// Stacking reproduces both operands and zeroes the off-blocks.
    #[test]
    fn stacking_preserves_both_operands(
        a in arb_net(2, ActivationKind::Relu),
        b in arb_net(2, ActivationKind::Relu),
        xs in prop::collection::vec(arb_point(2), 8),
    ) {
        let stacked = stack_outputs(&[a.clone(), b.clone()]).unwrap();
        prop_assert_eq!(stacked.hidden_count(), a.hidden_count() + b.hidden_count());
        prop_assert_eq!(stacked.output_count(), a.output_count() + b.output_count());
        for row in 0..a.output_count() {
            for col in a.hidden_count()..stacked.hidden_count() {
                prop_assert_eq!(stacked.output_weights()[row][col], 0.0);
            }
        }
        for row in a.output_count()..stacked.output_count() {
            for col in 0..a.hidden_count() {
                prop_assert_eq!(stacked.output_weights()[row][col], 0.0);
            }
        }
        for x in &xs {
            let got = stacked.eval(x).unwrap();
            let first = a.eval(x).unwrap();
            let second = b.eval(x).unwrap();
            for (u, v) in first.iter().chain(&second).zip(&got) {
                prop_assert!((u - v).abs() <= 1e-12);
            }
        }
    }

    /// Stacking three nets in either association evaluates identically.
    #[test]
    fn stacking_is_associative_by_evaluation(
        a in arb_net(1, ActivationKind::Relu),
        b in arb_net(1, ActivationKind::Relu),
        c in arb_net(1, ActivationKind::Relu),
        xs in prop::collection::vec(arb_point(1), 8),
    ) {
        let left = stack_outputs(&[stack_outputs(&[a.clone(), b.clone()]).unwrap(), c.clone()])
            .unwrap();
        let right = stack_outputs(&[a, stack_outputs(&[b, c]).unwrap()]).unwrap();
        for x in &xs {
            let l = left.eval(x).unwrap();
            let r = right.eval(x).unwrap();
            for (u, v) in l.iter().zip(&r) {
                prop_assert!((u - v).abs() <= 1e-12);
            }
        }
    }

    /// The 1-D canonical form reconstructs the net it came from.
    #[test]
    fn cpwl_extraction_is_faithful(
        net in arb_net(1, ActivationKind::Sigma1),
        xs in prop::collection::vec(0.0..1.0f64, 32),
    ) {
        let cpwl = net_to_cpwl_1d(&net, 0).unwrap();
        for &x in &xs {
            let want = net.eval(&[x]).unwrap()[0];
            let got = cpwl.value_at(x);
            prop_assert!(
                (want - got).abs() <= 1e-12,
                "x={x}: net {want}, cpwl {got}"
            );
        }
    }

    /// Exact L1 distance is symmetric and obeys the triangle inequality.
    #[test]
    fn exact_l1_is_a_metric(
        a in arb_cpwl(),
        b in arb_cpwl(),
        c in arb_cpwl(),
    ) {
        let ab = exact_l1_distance_1d(&a, &b).value;
        let ba = exact_l1_distance_1d(&b, &a).value;
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.max(1.0));
        let ac = exact_l1_distance_1d(&a, &c).value;
        let bc = exact_l1_distance_1d(&b, &c).value;
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert_eq!(exact_l1_distance_1d(&a, &a).value, 0.0);
    }

    /// A certificate whose stages exceed their budgets fails the check in
    /// certified mode and passes in measured mode.
    #[test]
    fn certificate_check_enforces_budgets(
        budget in 0.01..1.0f64,
        over in 1.01..3.0f64,
    ) {
        let cert = |achieved: f64, mode| ApproxCertificate {
            requested_eps: 2.0 * budget,
            stage_budgets: vec![
                NamedValue::new("first", budget),
                NamedValue::new("second", budget),
            ],
            stage_achieved: vec![
                NamedValue::new("first", achieved),
                NamedValue::new("second", 0.5 * budget),
            ],
            total_achieved: achieved + 0.5 * budget,
            mode,
        };
        prop_assert!(cert(0.9 * budget, CertMode::Certified).check().is_ok());
        prop_assert!(cert(over * budget, CertMode::Certified).check().is_err());
        prop_assert!(cert(over * budget, CertMode::Measured).check().is_ok());
    }
}
