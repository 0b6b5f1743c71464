//! Exact width surgery on nets, and softmax indicator constructions.
//!
//! Surgery ops rewrite a net without changing its function:
//! [`sigma1_expand_to_relu`] replaces each clipped-ramp unit by a relu pair
//! (the ramp is exactly a difference of two shifted relus), and
//! [`stack_outputs`] merges disjoint nets into one block-diagonal net
//! computing all their outputs side by side.
//!
//! The indicator half builds softmax nets that approximate the one-hot
//! indicator of an axis-aligned region labeling. Driving each class logit to
//! `+m/eps` on its own region and `-m/eps` elsewhere puts every softmax
//! output within `m * exp(-2m/eps)` of one-hot, which never exceeds `eps/2`;
//! [`indicator_error_closed_form`] gives the exact per-class L1 error of
//! those saturated logits and [`indicator_tail_bound`] the two coarser
//! bounds above it.

use serde::{Deserialize, Serialize};

use crate::approx1d::{
    step_to_sigma1_net, ApproxCertificate, CertMode, NamedValue, StepFn1D,
};
use crate::error::{Error, Result};
use crate::fitnd::{fit_indicator_softmax, FitConfig};
use crate::measure;
use crate::nets::{ActivationKind, Net};
use crate::MAX_CELLS;

/// Multiplicative guard keeping certified window measures strictly inside
/// their budget after rounding.
const SLOPE_GUARD: f64 = 1.0 + 1e-9;

/// An axis-aligned labeling of the unit cube: per-dimension cut positions
/// split `[0, 1]^d` into cells, and every cell carries a class label.
///
/// Labels are 0-based in memory and 1-based in JSON. Cells are indexed
/// row-major with the last dimension fastest, and a point lying exactly on
/// a cut belongs to the cell on the cut's upper side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIndicatorSpec", into = "RawIndicatorSpec")]
pub struct IndicatorSpec {
    input_dim: usize,
    class_count: usize,
    axis_cuts: Vec<Vec<f64>>,
    cell_labels: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawIndicatorSpec {
    input_dim: usize,
    class_count: usize,
    axis_cuts: Vec<Vec<f64>>,
    cell_labels: Vec<usize>,
}

impl TryFrom<RawIndicatorSpec> for IndicatorSpec {
    type Error = Error;
    fn try_from(raw: RawIndicatorSpec) -> Result<Self> {
        let labels = raw
            .cell_labels
            .iter()
            .map(|&l| {
                if l == 0 || l > raw.class_count {
                    Err(Error::InvalidInput(format!(
                        "cell label {l} outside 1..={}",
                        raw.class_count
                    )))
                } else {
                    Ok(l - 1)
                }
            })
            .collect::<Result<Vec<usize>>>()?;
        IndicatorSpec::new(raw.input_dim, raw.class_count, raw.axis_cuts, labels)
    }
}

impl From<IndicatorSpec> for RawIndicatorSpec {
    fn from(spec: IndicatorSpec) -> Self {
        RawIndicatorSpec {
            input_dim: spec.input_dim,
            class_count: spec.class_count,
            axis_cuts: spec.axis_cuts,
            cell_labels: spec.cell_labels.iter().map(|l| l + 1).collect(),
        }
    }
}

impl IndicatorSpec {
    /// Builds a labeling from 0-based `cell_labels` in row-major order
    /// (last dimension fastest).
    pub fn new(
        input_dim: usize,
        class_count: usize,
        axis_cuts: Vec<Vec<f64>>,
        cell_labels: Vec<usize>,
    ) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidInput("input_dim must be at least 1".into()));
        }
        if class_count < 2 {
            return Err(Error::InvalidInput(
                "need at least two classes for a softmax indicator".into(),
            ));
        }
        if axis_cuts.len() != input_dim {
            return Err(Error::Shape {
                context: "axis cut lists",
                expected: input_dim,
                got: axis_cuts.len(),
            });
        }
        let mut cells: usize = 1;
        for cuts in &axis_cuts {
            if cuts.iter().any(|c| !c.is_finite() || *c <= 0.0 || *c >= 1.0) {
                return Err(Error::InvalidInput(
                    "axis cuts must lie strictly inside (0, 1)".into(),
                ));
            }
            if cuts.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidInput(
                    "axis cuts must be strictly increasing".into(),
                ));
            }
            cells = cells
                .checked_mul(cuts.len() + 1)
                .filter(|c| *c <= MAX_CELLS)
                .ok_or_else(|| {
                    Error::InvalidInput(format!("cell grid exceeds the cap of {MAX_CELLS}"))
                })?;
        }
        if cell_labels.len() != cells {
            return Err(Error::Shape {
                context: "cell labels",
                expected: cells,
                got: cell_labels.len(),
            });
        }
        if cell_labels.iter().any(|l| *l >= class_count) {
            return Err(Error::InvalidInput(format!(
                "cell label outside 0..{class_count}"
            )));
        }
        Ok(Self {
            input_dim,
            class_count,
            axis_cuts,
            cell_labels,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn axis_cuts(&self) -> &[Vec<f64>] {
        &self.axis_cuts
    }

    /// 0-based labels in row-major cell order.
    pub fn cell_labels(&self) -> &[usize] {
        &self.cell_labels
    }

    pub fn cell_count(&self) -> usize {
        self.cell_labels.len()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Shape {
                context: "indicator input",
                expected: self.input_dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Domain(
                "indicator input must lie in the unit cube".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn cell_index_unchecked(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        for (cuts, xi) in self.axis_cuts.iter().zip(x) {
            idx = idx * (cuts.len() + 1) + cuts.partition_point(|c| c <= xi);
        }
        idx
    }

    /// Row-major cell index of `x`.
    pub fn cell_index_of(&self, x: &[f64]) -> Result<usize> {
        self.check_point(x)?;
        Ok(self.cell_index_unchecked(x))
    }

    pub(crate) fn class_of_unchecked(&self, x: &[f64]) -> usize {
        self.cell_labels[self.cell_index_unchecked(x)]
    }

    /// 0-based class label at `x`.
    pub fn class_of(&self, x: &[f64]) -> Result<usize> {
        self.check_point(x)?;
        Ok(self.class_of_unchecked(x))
    }

    pub(crate) fn onehot_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.class_count];
        v[self.class_of_unchecked(x)] = 1.0;
        v
    }

    /// One-hot class indicator at `x`.
    pub fn onehot_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(self.onehot_unchecked(x))
    }
}

/// Lebesgue measure of each class region on the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ClassMeasures {
    per_class: Vec<f64>,
}

impl TryFrom<Vec<f64>> for ClassMeasures {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ClassMeasures::new(v)
    }
}

impl From<ClassMeasures> for Vec<f64> {
    fn from(m: ClassMeasures) -> Self {
        m.per_class
    }
}

impl ClassMeasures {
    pub fn new(per_class: Vec<f64>) -> Result<Self> {
        if per_class.is_empty() {
            return Err(Error::InvalidInput("no class measures given".into()));
        }
        if per_class.iter().any(|m| !m.is_finite() || *m < 0.0 || *m > 1.0) {
            return Err(Error::InvalidInput(
                "class measures must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = per_class.iter().sum();
        if sum > 1.0 + 1e-9 {
            return Err(Error::InvalidInput(format!(
                "class measures sum to {sum}, above the unit cube's volume"
            )));
        }
        Ok(Self { per_class })
    }

    pub(crate) fn from_raw(per_class: Vec<f64>) -> Self {
        Self { per_class }
    }

    pub fn per_class(&self) -> &[f64] {
        &self.per_class
    }

    pub fn class_count(&self) -> usize {
        self.per_class.len()
    }

    pub fn sum(&self) -> f64 {
        self.per_class.iter().sum()
    }
}

/// Rewrites a clipped-ramp net as a relu net computing the same function.
///
/// Each ramp unit `sigma1(w.x + b)` becomes the pair
/// `relu(w.x + b + 1/2) - relu(w.x + b - 1/2)`: the first keeps the unit's
/// output weights, the second gets them negated. Width doubles; outputs are
/// unchanged up to one rounding ulp per unit.
pub fn sigma1_expand_to_relu(net: &Net) -> Result<Net> {
    if net.activation() != ActivationKind::Sigma1 {
        return Err(Error::InvalidInput(
            "expansion applies to sigma1 nets; this net is already relu".into(),
        ));
    }
    let n = net.hidden_count();
    let mut hidden_weights = Vec::with_capacity(2 * n);
    let mut hidden_biases = Vec::with_capacity(2 * n);
    for (w, b) in net.hidden_weights().iter().zip(net.hidden_biases()) {
        hidden_weights.push(w.clone());
        hidden_biases.push(b + 0.5);
    }
    for (w, b) in net.hidden_weights().iter().zip(net.hidden_biases()) {
        hidden_weights.push(w.clone());
        hidden_biases.push(b - 0.5);
    }
    let output_weights = net
        .output_weights()
        .iter()
        .map(|row| {
            let mut out = Vec::with_capacity(2 * n);
            out.extend_from_slice(row);
            out.extend(row.iter().map(|a| -a));
            out
        })
        .collect();
    Net::new(
        net.input_dim(),
        hidden_weights,
        hidden_biases,
        output_weights,
        ActivationKind::Relu,
        net.softmax_head(),
    )
}

/// Stacks logit nets into one net computing all their outputs side by side.
///
/// Hidden layers concatenate; output weights form a block-diagonal matrix,
/// so every original output is reproduced exactly. All nets must share the
/// input dimension and activation, and none may carry a softmax head (stack
/// first, then attach the head).
pub fn stack_outputs(nets: &[Net]) -> Result<Net> {
    let first = nets
        .first()
        .ok_or_else(|| Error::InvalidInput("nothing to stack".into()))?;
    let input_dim = first.input_dim();
    let activation = first.activation();
    for net in nets {
        if net.input_dim() != input_dim {
            return Err(Error::Shape {
                context: "stacked input_dim",
                expected: input_dim,
                got: net.input_dim(),
            });
        }
        if net.activation() != activation {
            return Err(Error::InvalidInput(
                "stacked nets must share one activation".into(),
            ));
        }
        if net.softmax_head() {
            return Err(Error::InvalidInput(
                "stack logit nets; attach the softmax head afterwards".into(),
            ));
        }
    }
    let total_hidden: usize = nets.iter().map(Net::hidden_count).sum();
    let mut hidden_weights = Vec::with_capacity(total_hidden);
    let mut hidden_biases = Vec::with_capacity(total_hidden);
    let mut output_weights = Vec::new();
    let mut offset = 0;
    for net in nets {
        hidden_weights.extend(net.hidden_weights().iter().cloned());
        hidden_biases.extend_from_slice(net.hidden_biases());
        for row in net.output_weights() {
            let mut full = vec![0.0; total_hidden];
            full[offset..offset + row.len()].copy_from_slice(row);
            output_weights.push(full);
        }
        offset += net.hidden_count();
    }
    Net::new(
        input_dim,
        hidden_weights,
        hidden_biases,
        output_weights,
        activation,
        false,
    )
}

/// Scaled logit targets for a 1-D indicator: class `i`'s step is `+m/eps`
/// on its own cells and `-m/eps` elsewhere.
///
/// This margin is what drives the softmax tail below `eps/2`; see
/// [`indicator_tail_bound`].
pub fn indicator_logits(spec: &IndicatorSpec, eps: f64) -> Result<Vec<StepFn1D>> {
    if spec.input_dim() != 1 {
        return Err(Error::Shape {
            context: "indicator logit targets input_dim",
            expected: 1,
            got: spec.input_dim(),
        });
    }
    check_eps(eps)?;
    let margin = spec.class_count() as f64 / eps;
    if !margin.is_finite() {
        return Err(Error::InvalidInput(format!(
            "eps = {eps} is too small to represent logit targets in f64"
        )));
    }
    let cuts = spec.axis_cuts()[0].clone();
    (0..spec.class_count())
        .map(|class| {
            let values = spec
                .cell_labels()
                .iter()
                .map(|&l| if l == class { margin } else { -margin })
                .collect();
            StepFn1D::new(cuts.clone(), values)
        })
        .collect()
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!(
            "eps must be positive and finite, got {eps}"
        )));
    }
    Ok(())
}

/// Exact per-class L1 error of the saturated-logit softmax indicator.
///
/// With every logit at its `+-m/eps` target, the softmax output is constant
/// on each region, so the error integrates in closed form: writing
/// `q = exp(2m/eps)` and `mu_i` for class `i`'s measure, the own-region
/// error is `(m-1)/(q+m-1)` and each foreign region contributes
/// `1/(q+m-1)`, giving `(mu_i (m-1) + (1 - mu_i)) / (q + m - 1)`.
/// When `q` overflows to infinity the error underflows to exactly 0.
pub fn indicator_error_closed_form(measures: &ClassMeasures, eps: f64) -> Result<Vec<f64>> {
    check_eps(eps)?;
    let m = measures.class_count();
    if m < 2 {
        return Err(Error::InvalidInput(
            "closed-form error needs at least two classes".into(),
        ));
    }
    let mf = m as f64;
    let q = (2.0 * mf / eps).exp();
    let denom = q + (mf - 1.0);
    Ok(measures
        .per_class()
        .iter()
        .map(|mu| (mu * (mf - 1.0) + (1.0 - mu)) / denom)
        .collect())
}

/// The two nested bounds above the closed-form indicator error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    /// `m * exp(-2m/eps)`: bounds every class's L1 error.
    pub tail: f64,
    /// `eps / 2`: the coarser guarantee the tail always sits below.
    pub guarantee: f64,
}

/// Per-class error bounds for a saturated softmax indicator with `m`
/// classes and margin parameter `eps`.
///
/// The chain `closed form <= tail <= guarantee` holds for every `eps > 0`
/// (the last step is `exp(-t) <= 1/t` at `t = 2m/eps`, times `m`).
pub fn indicator_tail_bound(class_count: usize, eps: f64) -> Result<TailBound> {
    if class_count < 2 {
        return Err(Error::InvalidInput(
            "tail bound needs at least two classes".into(),
        ));
    }
    check_eps(eps)?;
    let m = class_count as f64;
    Ok(TailBound {
        tail: m * (-2.0 * m / eps).exp(),
        guarantee: 0.5 * eps,
    })
}

/// How [`build_softmax_indicator_net`] realizes the logit targets.
#[derive(Debug, Clone)]
pub enum IndicatorBackend {
    /// Exact 1-D construction: per-class ramp nets on the region cuts,
    /// stacked, expanded to relu, certified.
    Constructive1D,
    /// Random relu features fitted by ridge regression in any dimension;
    /// error is measured, not certified.
    RandomFeatures(FitConfig),
}

/// A softmax indicator net with its certificate and per-class error
/// accounting.
#[derive(Debug, Clone)]
pub struct BuiltIndicator {
    /// Relu net with a softmax head and one output per class.
    pub net: Net,
    pub certificate: ApproxCertificate,
    /// Per-class L1 bound (constructive) or estimate (random features).
    pub per_class: Vec<f64>,
}

/// Builds a softmax net within per-class L1 error `eps` of the one-hot
/// indicator of `spec`.
///
/// The constructive backend budgets `eps/2` for ramp transition windows
/// (every logit is exact outside them, and no output misses by more than 1
/// inside) and `eps/2` for the softmax tail on the saturated rest, which
/// the margin `m/eps` bounds by `m * exp(-2m/eps) <= eps/2`. The result is
/// certified: both stages carry proven bounds.
///
/// The random-features backend fits the same `+-m/eps` logit targets and
/// reports Monte-Carlo error estimates instead (`measured` mode); a miss is
/// visible in the certificate rather than an error.
pub fn build_softmax_indicator_net(
    spec: &IndicatorSpec,
    eps: f64,
    backend: &IndicatorBackend,
) -> Result<BuiltIndicator> {
    check_eps(eps)?;
    match backend {
        IndicatorBackend::Constructive1D => build_constructive_1d(spec, eps),
        IndicatorBackend::RandomFeatures(cfg) => {
            let outcome = fit_indicator_softmax(spec, eps, cfg)?;
            let worst = outcome
                .report
                .per_class_l1
                .iter()
                .copied()
                .fold(0.0_f64, f64::max);
            let certificate = ApproxCertificate {
                requested_eps: eps,
                stage_budgets: vec![NamedValue::new("fit", eps)],
                stage_achieved: vec![NamedValue::new("fit", worst)],
                total_achieved: worst,
                mode: CertMode::Measured,
            };
            Ok(BuiltIndicator {
                net: outcome.net,
                certificate,
                per_class: outcome.report.per_class_l1,
            })
        }
    }
}

fn build_constructive_1d(spec: &IndicatorSpec, eps: f64) -> Result<BuiltIndicator> {
    if spec.input_dim() != 1 {
        return Err(Error::InvalidInput(
            "the constructive backend handles one input dimension; \
             use the random-features backend for higher dimensions"
                .into(),
        ));
    }
    let steps = indicator_logits(spec, eps)?;
    let cut_count = spec.axis_cuts()[0].len();
    let window_budget = 0.5 * eps / SLOPE_GUARD;
    let tail_budget = 0.5 * eps;
    let min_slope = if cut_count == 0 {
        1.0
    } else {
        2.0 * cut_count as f64 / eps * SLOPE_GUARD
    };
    if !min_slope.is_finite() {
        return Err(Error::InvalidInput(format!(
            "eps = {eps} is too small to realize ramp slopes in f64"
        )));
    }

    // Every class's ramps share one slope (the gap rule sees the full cut
    // list), so the transition windows across all classes union into one
    // window per label-changing cut.
    let changed_cuts = spec
        .cell_labels()
        .windows(2)
        .filter(|w| w[0] != w[1])
        .count();
    let mut ramp_nets = Vec::with_capacity(spec.class_count());
    let mut slope = min_slope;
    for step in &steps {
        let ramp = step_to_sigma1_net(step, min_slope)?;
        slope = ramp.slope;
        ramp_nets.push(ramp.net);
    }
    let window_measure = changed_cuts as f64 / slope;
    debug_assert!(window_measure <= window_budget * (1.0 + 1e-12));

    let stacked = stack_outputs(&ramp_nets)?;
    let expanded = sigma1_expand_to_relu(&stacked)?;
    let net = expanded.with_softmax_head()?;

    let measures = measure::class_measures(spec);
    let closed = indicator_error_closed_form(&measures, eps)?;
    let worst_tail = closed.iter().copied().fold(0.0_f64, f64::max);
    let per_class = closed.iter().map(|c| window_measure + c).collect();

    let certificate = ApproxCertificate {
        requested_eps: eps,
        stage_budgets: vec![
            NamedValue::new("transition_windows", window_budget),
            NamedValue::new("softmax_tail", tail_budget),
        ],
        stage_achieved: vec![
            NamedValue::new("transition_windows", window_measure),
            NamedValue::new("softmax_tail", worst_tail),
        ],
        total_achieved: window_measure + worst_tail,
        mode: CertMode::Certified,
    };
    debug_assert!(certificate.check().is_ok());
    Ok(BuiltIndicator {
        net,
        certificate,
        per_class,
    })
}
