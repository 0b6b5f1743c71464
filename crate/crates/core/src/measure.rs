//! L1 distances between nets, targets, and region indicators on `[0, 1]^d`.
//!
//! Four measurement methods, from strongest to weakest guarantee:
//!
//! - `exact_cpwl`: closed-form integration for pairs of piecewise-linear
//!   (or step) functions in one dimension. Exact up to rounding.
//! - `adaptive_quadrature`: adaptive Simpson per smooth segment, split at
//!   known kinks. Used where an integrand is smooth between breakpoints but
//!   not piecewise linear (e.g. softmax outputs).
//! - `grid_quadrature`: midpoint rule on a uniform grid over the cube.
//! - `monte_carlo`: seeded uniform sampling with a 99% confidence interval.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx1d::StepFn1D;
use crate::error::{Error, Result};
use crate::nets::{ActivationKind, Net};
use crate::quad;
use crate::surgery::{ClassMeasures, IndicatorSpec};

/// Kinks closer than this are merged into one breakpoint.
pub const KINK_MERGE_TOL: f64 = 1e-14;

/// 99% two-sided normal quantile, for Monte-Carlo confidence intervals.
const MC_CI_FACTOR: f64 = 2.576;

/// Hard cap on total grid points in [`grid_l1_distance`].
const MAX_GRID_POINTS: u128 = 1 << 24;

/// How an L1 distance was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum L1Method {
    ExactCpwl,
    AdaptiveQuadrature,
    GridQuadrature,
    MonteCarlo,
}

/// One measured L1 distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Report {
    pub value: f64,
    pub method: L1Method,
    /// Segments (exact/adaptive), total grid points (grid), or samples
    /// (Monte-Carlo).
    pub n: u64,
    /// 99% confidence halfwidth; Monte-Carlo only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_halfwidth: Option<f64>,
    /// RNG seed; Monte-Carlo only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A continuous piecewise-linear function on `[0, 1]`, stored as sorted
/// breakpoints (first 0, last 1) with values at each breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpwl1D {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl Cpwl1D {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidInput(
                "piecewise-linear function needs at least two breakpoints".into(),
            ));
        }
        if values.len() != breakpoints.len() {
            return Err(Error::Shape {
                context: "breakpoint values",
                expected: breakpoints.len(),
                got: values.len(),
            });
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidInput(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("breakpoint value is not finite".into()));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `x`, clamped to `[0, 1]`.
    pub fn value_at(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let hi = self
            .breakpoints
            .partition_point(|b| *b <= x)
            .clamp(1, self.breakpoints.len() - 1);
        let lo = hi - 1;
        let (x0, x1) = (self.breakpoints[lo], self.breakpoints[hi]);
        let (v0, v1) = (self.values[lo], self.values[hi]);
        if x == x0 {
            return v0;
        }
        v0 + (x - x0) * (v1 - v0) / (x1 - x0)
    }
}

/// Interior kink locations of every hidden unit of a 1-D net, unsorted.
pub(crate) fn unit_kinks_1d(net: &Net) -> Vec<f64> {
    let mut kinks = Vec::new();
    for (w, b) in net.hidden_weights().iter().zip(net.hidden_biases()) {
        let w = w[0];
        if w == 0.0 {
            continue;
        }
        match net.activation() {
            ActivationKind::Relu => kinks.push(-b / w),
            ActivationKind::Sigma1 => {
                kinks.push((-0.5 - b) / w);
                kinks.push((0.5 - b) / w);
            }
        }
    }
    kinks
}

/// Sorts interior points, merges any within [`KINK_MERGE_TOL`], and wraps
/// them in the `[0, 1]` endpoints.
pub(crate) fn merged_grid(points: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut interior: Vec<f64> = points
        .into_iter()
        .filter(|p| p.is_finite() && *p > KINK_MERGE_TOL && *p < 1.0 - KINK_MERGE_TOL)
        .collect();
    interior.sort_by(f64::total_cmp);
    let mut grid = vec![0.0];
    for p in interior {
        if p - grid.last().unwrap() > KINK_MERGE_TOL {
            grid.push(p);
        }
    }
    grid.push(1.0);
    grid
}

/// Extracts output `output` of a 1-D logit net as an exact piecewise-linear
/// function on `[0, 1]`.
///
/// The net must have `input_dim == 1` and no softmax head: softmax outputs
/// are not piecewise linear, so only logits admit an exact extraction.
pub fn net_to_cpwl_1d(net: &Net, output: usize) -> Result<Cpwl1D> {
    if net.input_dim() != 1 {
        return Err(Error::Shape {
            context: "piecewise-linear extraction input_dim",
            expected: 1,
            got: net.input_dim(),
        });
    }
    if output >= net.output_count() {
        return Err(Error::InvalidInput(format!(
            "output index {output} out of range for {} outputs",
            net.output_count()
        )));
    }
    if net.softmax_head() {
        return Err(Error::InvalidInput(
            "softmax outputs are not piecewise linear; extract logits from a headless net".into(),
        ));
    }
    let grid = merged_grid(unit_kinks_1d(net));
    let values = grid
        .iter()
        .map(|&x| net.eval_logits_unchecked(&[x])[output])
        .collect();
    Cpwl1D::new(grid, values)
}

/// L1 area of the affine function through `(x0, d0)` and `(x1, d1)`.
fn segment_abs_area(x0: f64, x1: f64, d0: f64, d1: f64) -> f64 {
    let w = x1 - x0;
    if d0 * d1 >= 0.0 {
        0.5 * w * (d0.abs() + d1.abs())
    } else {
        let t = d0 / (d0 - d1);
        0.5 * w * (t * d0.abs() + (1.0 - t) * d1.abs())
    }
}

fn interior_union(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = a
        .iter()
        .chain(b.iter())
        .copied()
        .filter(|p| *p > 0.0 && *p < 1.0)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut grid = vec![0.0];
    grid.extend(pts);
    grid.push(1.0);
    grid
}

/// Exact L1 distance between two piecewise-linear functions on `[0, 1]`.
pub fn exact_l1_distance_1d(f: &Cpwl1D, g: &Cpwl1D) -> L1Report {
    let grid = interior_union(f.breakpoints(), g.breakpoints());
    let mut value = 0.0;
    for w in grid.windows(2) {
        let d0 = f.value_at(w[0]) - g.value_at(w[0]);
        let d1 = f.value_at(w[1]) - g.value_at(w[1]);
        value += segment_abs_area(w[0], w[1], d0, d1);
    }
    L1Report {
        value,
        method: L1Method::ExactCpwl,
        n: (grid.len() - 1) as u64,
        ci_halfwidth: None,
        seed: None,
    }
}

/// Exact L1 distance between a step function and a piecewise-linear function
/// on `[0, 1]`.
pub fn exact_l1_step_vs_cpwl(step: &StepFn1D, f: &Cpwl1D) -> L1Report {
    let grid = interior_union(step.cuts(), f.breakpoints());
    let mut value = 0.0;
    for w in grid.windows(2) {
        let v = step.value_at(0.5 * (w[0] + w[1]));
        let d0 = f.value_at(w[0]) - v;
        let d1 = f.value_at(w[1]) - v;
        value += segment_abs_area(w[0], w[1], d0, d1);
    }
    L1Report {
        value,
        method: L1Method::ExactCpwl,
        n: (grid.len() - 1) as u64,
        ci_halfwidth: None,
        seed: None,
    }
}

/// L1 distance between two scalar functions on `[0, 1]` by adaptive Simpson
/// quadrature, split at the given interior hint points (kinks, cuts, or
/// discontinuities of either function).
pub fn quad_l1_distance_1d(
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    hints: &[f64],
    tol: f64,
) -> Result<L1Report> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput(format!(
            "quadrature tolerance must be positive, got {tol}"
        )));
    }
    let grid = merged_grid(hints.iter().copied());
    let segments = grid.len() - 1;
    let tol_seg = tol / segments as f64;
    let mut value = 0.0;
    for w in grid.windows(2) {
        value += quad::integrate(&|x| (f(x) - g(x)).abs(), w[0], w[1], tol_seg)?;
    }
    Ok(L1Report {
        value,
        method: L1Method::AdaptiveQuadrature,
        n: segments as u64,
        ci_halfwidth: None,
        seed: None,
    })
}

fn check_pair_dims(dim: usize, out_count: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    if out_count == 0 {
        return Err(Error::InvalidInput("need at least one output".into()));
    }
    Ok(())
}

fn check_outputs(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if got != expected {
        return Err(Error::Shape {
            context,
            expected,
            got,
        });
    }
    Ok(())
}

/// Per-output L1 distance between two vector functions on `[0, 1]^dim` by
/// the midpoint rule on a uniform grid with `per_axis` points per axis.
pub fn grid_l1_distance(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    g: &dyn Fn(&[f64]) -> Vec<f64>,
    dim: usize,
    out_count: usize,
    per_axis: usize,
) -> Result<Vec<L1Report>> {
    check_pair_dims(dim, out_count)?;
    if per_axis == 0 {
        return Err(Error::InvalidInput("per_axis must be at least 1".into()));
    }
    let total = (per_axis as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if total > MAX_GRID_POINTS {
        return Err(Error::InvalidInput(format!(
            "grid of {per_axis}^{dim} points exceeds the cap of {MAX_GRID_POINTS}"
        )));
    }
    let total = total as u64;
    let mut acc = vec![0.0_f64; out_count];
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0_f64; dim];
    loop {
        for (xi, i) in x.iter_mut().zip(&idx) {
            *xi = (*i as f64 + 0.5) / per_axis as f64;
        }
        let fv = f(&x);
        let gv = g(&x);
        check_outputs("grid integrand outputs", out_count, fv.len())?;
        check_outputs("grid integrand outputs", out_count, gv.len())?;
        for ((a, fi), gi) in acc.iter_mut().zip(&fv).zip(&gv) {
            *a += (fi - gi).abs();
        }
        let mut carry = dim;
        while carry > 0 {
            idx[carry - 1] += 1;
            if idx[carry - 1] < per_axis {
                break;
            }
            idx[carry - 1] = 0;
            carry -= 1;
        }
        if carry == 0 {
            break;
        }
    }
    Ok(acc
        .into_iter()
        .map(|a| L1Report {
            value: a / total as f64,
            method: L1Method::GridQuadrature,
            n: total,
            ci_halfwidth: None,
            seed: None,
        })
        .collect())
}

/// Per-output L1 distance between two vector functions on `[0, 1]^dim` by
/// seeded Monte-Carlo sampling.
///
/// Sampling is deterministic in `seed`: one ChaCha8 stream, `dim` uniform
/// coordinates per sample. `ci_halfwidth` is the 99% normal-approximation
/// confidence halfwidth.
pub fn mc_l1_distance(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    g: &dyn Fn(&[f64]) -> Vec<f64>,
    dim: usize,
    out_count: usize,
    samples: u64,
    seed: u64,
) -> Result<Vec<L1Report>> {
    check_pair_dims(dim, out_count)?;
    if samples < 2 {
        return Err(Error::InvalidInput(
            "need at least two samples for a variance estimate".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0.0_f64; out_count];
    let mut sumsq = vec![0.0_f64; out_count];
    let mut x = vec![0.0_f64; dim];
    for _ in 0..samples {
        for xi in x.iter_mut() {
            *xi = rng.random_range(0.0..1.0);
        }
        let fv = f(&x);
        let gv = g(&x);
        check_outputs("sampled integrand outputs", out_count, fv.len())?;
        check_outputs("sampled integrand outputs", out_count, gv.len())?;
        for i in 0..out_count {
            let d = (fv[i] - gv[i]).abs();
            sum[i] += d;
            sumsq[i] += d * d;
        }
    }
    let n = samples as f64;
    Ok((0..out_count)
        .map(|i| {
            let mean = sum[i] / n;
            let var = ((sumsq[i] - n * mean * mean) / (n - 1.0)).max(0.0);
            L1Report {
                value: mean,
                method: L1Method::MonteCarlo,
                n: samples,
                ci_halfwidth: Some(MC_CI_FACTOR * (var / n).sqrt()),
                seed: Some(seed),
            }
        })
        .collect())
}

fn check_net_vs_spec(net: &Net, spec: &IndicatorSpec) -> Result<()> {
    check_outputs("net input vs indicator", spec.input_dim(), net.input_dim())?;
    check_outputs("net outputs vs classes", spec.class_count(), net.output_count())?;
    if !net.softmax_head() {
        return Err(Error::InvalidInput(
            "indicator comparison expects a softmax head on the net".into(),
        ));
    }
    Ok(())
}

/// Per-class Monte-Carlo L1 distance between a softmax net and the one-hot
/// indicator of `spec`.
pub fn mc_l1_net_vs_onehot(
    net: &Net,
    spec: &IndicatorSpec,
    samples: u64,
    seed: u64,
) -> Result<Vec<L1Report>> {
    check_net_vs_spec(net, spec)?;
    mc_l1_distance(
        &|x| net.eval_unchecked(x),
        &|x| spec.onehot_unchecked(x),
        spec.input_dim(),
        spec.class_count(),
        samples,
        seed,
    )
}

/// Per-class grid L1 distance between a softmax net and the one-hot
/// indicator of `spec`.
pub fn grid_l1_net_vs_onehot(
    net: &Net,
    spec: &IndicatorSpec,
    per_axis: usize,
) -> Result<Vec<L1Report>> {
    check_net_vs_spec(net, spec)?;
    grid_l1_distance(
        &|x| net.eval_unchecked(x),
        &|x| spec.onehot_unchecked(x),
        spec.input_dim(),
        spec.class_count(),
        per_axis,
    )
}

/// Per-class L1 distance between a 1-D softmax net and the one-hot indicator
/// of `spec`, by adaptive quadrature split at every net kink and region cut.
///
/// Between consecutive split points each logit is affine and the cell label
/// is constant, so every integrand is smooth and the quadrature converges
/// fast. `tol` is the absolute budget per class.
pub fn softmax_vs_onehot_l1_1d(
    net: &Net,
    spec: &IndicatorSpec,
    tol: f64,
) -> Result<Vec<L1Report>> {
    check_net_vs_spec(net, spec)?;
    if spec.input_dim() != 1 {
        return Err(Error::Shape {
            context: "adaptive indicator comparison input_dim",
            expected: 1,
            got: spec.input_dim(),
        });
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput(format!(
            "quadrature tolerance must be positive, got {tol}"
        )));
    }
    let hints = unit_kinks_1d(net)
        .into_iter()
        .chain(spec.axis_cuts()[0].iter().copied());
    let grid = merged_grid(hints);
    let segments = grid.len() - 1;
    let tol_seg = tol / segments as f64;
    let m = spec.class_count();
    let mut values = vec![0.0_f64; m];
    for w in grid.windows(2) {
        let label = spec.class_of_unchecked(&[0.5 * (w[0] + w[1])]);
        for (i, v) in values.iter_mut().enumerate() {
            let want = if i == label { 1.0 } else { 0.0 };
            *v += quad::integrate(
                &|x| (net.eval_unchecked(&[x])[i] - want).abs(),
                w[0],
                w[1],
                tol_seg,
            )?;
        }
    }
    Ok(values
        .into_iter()
        .map(|value| L1Report {
            value,
            method: L1Method::AdaptiveQuadrature,
            n: segments as u64,
            ci_halfwidth: None,
            seed: None,
        })
        .collect())
}

/// Lebesgue measure of each class region of `spec` on the unit cube.
pub fn class_measures(spec: &IndicatorSpec) -> ClassMeasures {
    let mut acc = vec![0.0_f64; spec.class_count()];
    let widths: Vec<Vec<f64>> = spec
        .axis_cuts()
        .iter()
        .map(|cuts| {
            let mut edges = Vec::with_capacity(cuts.len() + 2);
            edges.push(0.0);
            edges.extend_from_slice(cuts);
            edges.push(1.0);
            edges.windows(2).map(|w| w[1] - w[0]).collect()
        })
        .collect();
    let counts: Vec<usize> = widths.iter().map(Vec::len).collect();
    let dim = counts.len();
    let mut idx = vec![0usize; dim];
    let mut cell = 0usize;
    loop {
        let vol: f64 = idx.iter().zip(&widths).map(|(i, w)| w[*i]).product();
        acc[spec.cell_labels()[cell]] += vol;
        cell += 1;
        let mut carry = dim;
        while carry > 0 {
            idx[carry - 1] += 1;
            if idx[carry - 1] < counts[carry - 1] {
                break;
            }
            idx[carry - 1] = 0;
            carry -= 1;
        }
        if carry == 0 {
            break;
        }
    }
    ClassMeasures::from_raw(acc)
}
