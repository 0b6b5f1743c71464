//! One-dimensional targets on `[0, 1]` and certified approximation by
//! single-hidden-layer nets.
//!
//! The pipeline has two stages, each with its own error budget:
//!
//! 1. approximate the target by a step function on a uniform grid
//!    (midpoint sampling, so an `L`-Lipschitz target loses at most
//!    `L / (4 k)` over `k` cells);
//! 2. realize the step function as a clipped-ramp net whose ramps replace
//!    each jump inside a window of width `1/slope`, which costs exactly
//!    `|jump| / (4 slope)` per jump in L1.
//!
//! The resulting [`ApproxCertificate`] records the per-stage budgets and
//! what each stage actually achieved, and whether those numbers are proven
//! bounds (`certified`) or quadrature estimates (`measured`). Ramp nets
//! convert to relu nets exactly via [`crate::surgery::sigma1_expand_to_relu`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{self, Cpwl1D};
use crate::nets::{ActivationKind, Net};
use crate::surgery;
use crate::MAX_CELLS;

/// Multiplicative safety margin so certified stage totals stay strictly
/// inside their budgets after rounding.
const SLOPE_GUARD: f64 = 1.0 + 1e-9;

/// A right-continuous step function on `[0, 1]`: `cuts` are the interior
/// jump locations, `values[i]` is the value on the i-th cell. A point on a
/// cut belongs to the cell on its right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepFn", into = "RawStepFn")]
pub struct StepFn1D {
    cuts: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawStepFn {
    cuts: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawStepFn> for StepFn1D {
    type Error = Error;
    fn try_from(raw: RawStepFn) -> Result<Self> {
        StepFn1D::new(raw.cuts, raw.values)
    }
}

impl From<StepFn1D> for RawStepFn {
    fn from(s: StepFn1D) -> Self {
        RawStepFn {
            cuts: s.cuts,
            values: s.values,
        }
    }
}

impl StepFn1D {
    pub fn new(cuts: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if cuts.iter().any(|c| !c.is_finite() || *c <= 0.0 || *c >= 1.0) {
            return Err(Error::InvalidInput(
                "step cuts must lie strictly inside (0, 1)".into(),
            ));
        }
        if cuts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput(
                "step cuts must be strictly increasing".into(),
            ));
        }
        if values.len() != cuts.len() + 1 {
            return Err(Error::Shape {
                context: "step cell values",
                expected: cuts.len() + 1,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("step value is not finite".into()));
        }
        Ok(Self { cuts, values })
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_count(&self) -> usize {
        self.values.len()
    }

    /// Value at `x`; a point on a cut takes the right cell's value.
    pub fn value_at(&self, x: f64) -> f64 {
        self.values[self.cuts.partition_point(|c| *c <= x)]
    }

    /// `(cut, jump)` pairs for the cuts where the value actually changes.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        self.cuts
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| {
                let h = self.values[i + 1] - self.values[i];
                (h != 0.0).then_some((c, h))
            })
            .collect()
    }
}

/// An exactly known closed form of a target, enabling exact L1 measurement.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactForm {
    Cpwl(Cpwl1D),
    Step(StepFn1D),
}

/// A scalar target on `[0, 1]`.
#[derive(Clone)]
pub struct Target1D {
    name: String,
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lipschitz: Option<f64>,
    breakpoints: Vec<f64>,
    exact_form: Option<ExactForm>,
}

impl fmt::Debug for Target1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Target1D")
            .field("name", &self.name)
            .field("lipschitz", &self.lipschitz)
            .field("breakpoints", &self.breakpoints)
            .field("exact_form", &self.exact_form.is_some())
            .finish()
    }
}

/// Names accepted by [`Target1D::builtin`].
pub const BUILTIN_TARGETS: &[&str] = &["x", "x2", "sin2pi", "sign", "rsqrt"];

impl Target1D {
    /// A custom target. `lipschitz`, if given, must be a valid Lipschitz
    /// constant on `[0, 1]`; `breakpoints` are interior kinks or jumps used
    /// as quadrature split hints.
    pub fn new(
        name: impl Into<String>,
        func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lipschitz: Option<f64>,
        breakpoints: Vec<f64>,
        exact_form: Option<ExactForm>,
    ) -> Result<Self> {
        if let Some(l) = lipschitz {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "Lipschitz constant must be positive and finite, got {l}"
                )));
            }
        }
        let mut breakpoints = breakpoints;
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        if breakpoints.iter().any(|b| !b.is_finite() || *b <= 0.0 || *b >= 1.0) {
            return Err(Error::InvalidInput(
                "breakpoints must lie strictly inside (0, 1)".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            func,
            lipschitz,
            breakpoints,
            exact_form,
        })
    }

    /// A target from the built-in registry:
    ///
    /// - `x`: identity, Lipschitz 1, exactly piecewise linear;
    /// - `x2`: square, Lipschitz 2;
    /// - `sin2pi`: one full sine period, Lipschitz 2 pi;
    /// - `sign`: -1 below 1/2, +1 from 1/2 on, exactly a step;
    /// - `rsqrt`: inverse square root, capped at 100 below 1e-4. No usable
    ///   Lipschitz constant, so builders fall back to measured grids.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "x" => Self::new(
                "x",
                Arc::new(|x| x),
                Some(1.0),
                vec![],
                Some(ExactForm::Cpwl(Cpwl1D::new(
                    vec![0.0, 1.0],
                    vec![0.0, 1.0],
                )?)),
            ),
            "x2" => Self::new("x2", Arc::new(|x| x * x), Some(2.0), vec![], None),
            "sin2pi" => Self::new(
                "sin2pi",
                Arc::new(|x| (2.0 * std::f64::consts::PI * x).sin()),
                Some(2.0 * std::f64::consts::PI),
                vec![],
                None,
            ),
            "sign" => Self::new(
                "sign",
                Arc::new(|x| if x < 0.5 { -1.0 } else { 1.0 }),
                None,
                vec![0.5],
                Some(ExactForm::Step(StepFn1D::new(
                    vec![0.5],
                    vec![-1.0, 1.0],
                )?)),
            ),
            "rsqrt" => Self::new(
                "rsqrt",
                Arc::new(|x: f64| if x <= 1e-4 { 100.0 } else { 1.0 / x.sqrt() }),
                None,
                vec![1e-4],
                None,
            ),
            other => Err(Error::InvalidInput(format!(
                "unknown target {other:?}; known targets: {}",
                BUILTIN_TARGETS.join(", ")
            ))),
        }
    }

    /// A piecewise-linear target through sample points spanning `[0, 1]`.
    /// The Lipschitz constant is the steepest segment slope.
    pub fn from_samples(name: impl Into<String>, xs: &[f64], ys: &[f64]) -> Result<Self> {
        let cpwl = Cpwl1D::new(xs.to_vec(), ys.to_vec())?;
        let lipschitz = xs
            .windows(2)
            .zip(ys.windows(2))
            .map(|(xw, yw)| ((yw[1] - yw[0]) / (xw[1] - xw[0])).abs())
            .fold(0.0_f64, f64::max);
        let interior = xs[1..xs.len() - 1].to_vec();
        let f = cpwl.clone();
        Self::new(
            name,
            Arc::new(move |x| f.value_at(x)),
            (lipschitz > 0.0).then_some(lipschitz),
            interior,
            Some(ExactForm::Cpwl(cpwl)),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn exact_form(&self) -> Option<&ExactForm> {
        self.exact_form.as_ref()
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.func)(x)
    }
}

/// Midpoint step approximation of a target on `cells` uniform cells.
///
/// For an `L`-Lipschitz target the L1 error is at most `L w^2 / 4` per cell
/// of width `w`, hence `L / (4 cells)` in total.
pub fn step_approximate(target: &Target1D, cells: usize) -> Result<StepFn1D> {
    if cells == 0 {
        return Err(Error::InvalidInput("need at least one cell".into()));
    }
    if cells > MAX_CELLS {
        return Err(Error::InvalidInput(format!(
            "{cells} cells exceeds the cap of {MAX_CELLS}"
        )));
    }
    let cuts = (1..cells).map(|i| i as f64 / cells as f64).collect();
    let values = (0..cells)
        .map(|i| target.eval((i as f64 + 0.5) / cells as f64))
        .collect();
    StepFn1D::new(cuts, values)
}

/// A clipped-ramp net realizing a step function, with its exact L1 cost.
#[derive(Debug, Clone)]
pub struct RampNet {
    /// Single-output `sigma1` net, no head.
    pub net: Net,
    /// Uniform ramp slope actually used.
    pub slope: f64,
    /// Exact L1 distance from the net to the step function:
    /// `sum |jump| / (4 slope)`.
    pub ramp_l1: f64,
    /// Total measure of the transition windows, `jumps / slope`.
    pub window_measure: f64,
}

/// Realizes a step function as a `sigma1` net: one constant unit plus one
/// ramp unit per nonzero jump, each ramping inside a window of width
/// `1/slope` centered on its cut.
///
/// The slope is raised to at least `min_slope`, and further until every
/// window fits between its neighboring cuts and the domain ends; the gap
/// rule uses the full cut list (including zero-jump cuts), so parallel
/// steps over the same cuts always share one slope. Outside the windows the
/// net reproduces the step exactly, so its L1 error is exactly the summed
/// triangle area `|jump| / (4 slope)` per jump.
pub fn step_to_sigma1_net(step: &StepFn1D, min_slope: f64) -> Result<RampNet> {
    if !(min_slope > 0.0) || !min_slope.is_finite() {
        return Err(Error::InvalidInput(format!(
            "minimum slope must be positive and finite, got {min_slope}"
        )));
    }
    let mut min_gap = f64::INFINITY;
    let mut prev = 0.0;
    for &c in step.cuts().iter().chain(std::iter::once(&1.0)) {
        min_gap = min_gap.min(c - prev);
        prev = c;
    }
    let slope = min_slope.max(1.0 / min_gap);
    let jumps = step.jumps();

    let mut hidden_weights = vec![vec![0.0]];
    let mut hidden_biases = vec![0.5];
    let mut alpha = vec![step.values()[0]];
    for &(c, h) in &jumps {
        hidden_weights.push(vec![slope]);
        hidden_biases.push(-slope * c);
        alpha.push(h);
    }
    let net = Net::new(
        1,
        hidden_weights,
        hidden_biases,
        vec![alpha],
        ActivationKind::Sigma1,
        false,
    )?;
    let ramp_l1 = jumps.iter().map(|(_, h)| h.abs() / (4.0 * slope)).sum();
    let window_measure = jumps.len() as f64 / slope;
    Ok(RampNet {
        net,
        slope,
        ramp_l1,
        window_measure,
    })
}

/// Whether certificate numbers are proven bounds or quadrature estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertMode {
    Certified,
    Measured,
}

/// A named scalar, used for certificate stage entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

impl NamedValue {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
        }
    }
}

/// Stage-by-stage error accounting for a built net.
///
/// `stage_budgets` split `requested_eps` across construction stages;
/// `stage_achieved` records what each stage actually cost (a proven bound in
/// `certified` mode, an estimate in `measured` mode). `total_achieved` is
/// the sum of the achieved stages and bounds the worst per-output L1 error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxCertificate {
    pub requested_eps: f64,
    pub stage_budgets: Vec<NamedValue>,
    pub stage_achieved: Vec<NamedValue>,
    pub total_achieved: f64,
    pub mode: CertMode,
}

impl ApproxCertificate {
    /// Structural soundness: parallel stage lists, finite nonnegative
    /// entries, budgets within the request, totals consistent with stages,
    /// and (in certified mode) every stage within its budget.
    pub fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidInput(format!("bad certificate: {msg}")));
        if !(self.requested_eps > 0.0) || !self.requested_eps.is_finite() {
            return fail(format!("requested_eps = {}", self.requested_eps));
        }
        if self.stage_budgets.len() != self.stage_achieved.len() {
            return fail("stage lists differ in length".into());
        }
        for (b, a) in self.stage_budgets.iter().zip(&self.stage_achieved) {
            if b.name != a.name {
                return fail(format!("stage names {:?} and {:?} disagree", b.name, a.name));
            }
            if !b.value.is_finite() || b.value < 0.0 || !a.value.is_finite() || a.value < 0.0 {
                return fail(format!("stage {:?} has a bad value", b.name));
            }
        }
        let slack = 1.0 + 1e-12;
        let budget_sum: f64 = self.stage_budgets.iter().map(|s| s.value).sum();
        if budget_sum > self.requested_eps * slack {
            return fail(format!(
                "stage budgets sum to {budget_sum}, above requested {}",
                self.requested_eps
            ));
        }
        let achieved_sum: f64 = self.stage_achieved.iter().map(|s| s.value).sum();
        if (self.total_achieved - achieved_sum).abs()
            > 1e-12 * achieved_sum.abs().max(1.0)
        {
            return fail(format!(
                "total {} does not match stage sum {achieved_sum}",
                self.total_achieved
            ));
        }
        if self.mode == CertMode::Certified {
            for (b, a) in self.stage_budgets.iter().zip(&self.stage_achieved) {
                if a.value > b.value * slack {
                    return fail(format!(
                        "stage {:?} achieved {} above its budget {}",
                        b.name, a.value, b.value
                    ));
                }
            }
            if self.total_achieved > self.requested_eps * slack {
                return fail(format!(
                    "total {} above requested {}",
                    self.total_achieved, self.requested_eps
                ));
            }
        }
        Ok(())
    }

    pub fn within_budget(&self) -> bool {
        self.total_achieved <= self.requested_eps
    }
}

/// A certified (or measured) 1-D approximation: the ramp net, its exact
/// relu expansion, and the certificate covering both.
#[derive(Debug, Clone)]
pub struct Approx1D {
    pub sigma1_net: Net,
    pub relu_net: Net,
    pub certificate: ApproxCertificate,
    /// Step-stage cells used.
    pub cells: usize,
}

/// Builds a relu net within L1 error `eps` of `target` on `[0, 1]`.
///
/// The budget is split evenly between the step stage and the ramp stage.
/// Step-stage accounting depends on what the target declares:
///
/// - an exact step form is reproduced with zero step error;
/// - a Lipschitz constant `L` gives the proven cell count `ceil(L / (2 eps))`
///   (certified mode);
/// - otherwise cells double from 16 until quadrature confirms the step error
///   fits its budget (measured mode).
///
/// Errors with [`Error::BudgetInfeasible`] when no cell count under the
/// [`MAX_CELLS`] cap can meet the step budget.
pub fn build_relu_approx_1d(target: &Target1D, eps: f64) -> Result<Approx1D> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!(
            "eps must be positive and finite, got {eps}"
        )));
    }
    let budget_step = 0.5 * eps;
    let budget_ramp = 0.5 * eps / SLOPE_GUARD;

    let (step, step_achieved, mode) = plan_step_stage(target, eps, budget_step)?;
    let cells = step.cell_count();

    let sum_abs_jumps: f64 = step.jumps().iter().map(|(_, h)| h.abs()).sum();
    let min_slope = if sum_abs_jumps == 0.0 {
        1.0
    } else {
        sum_abs_jumps / (4.0 * budget_ramp) * SLOPE_GUARD
    };
    if !min_slope.is_finite() {
        return Err(Error::InvalidInput(format!(
            "eps = {eps} is too small to realize ramp slopes in f64"
        )));
    }
    let ramp = step_to_sigma1_net(&step, min_slope)?;
    debug_assert!(ramp.ramp_l1 <= budget_ramp);

    let relu_net = surgery::sigma1_expand_to_relu(&ramp.net)?;
    let certificate = ApproxCertificate {
        requested_eps: eps,
        stage_budgets: vec![
            NamedValue::new("step", budget_step),
            NamedValue::new("ramp", budget_ramp),
        ],
        stage_achieved: vec![
            NamedValue::new("step", step_achieved),
            NamedValue::new("ramp", ramp.ramp_l1),
        ],
        total_achieved: step_achieved + ramp.ramp_l1,
        mode,
    };
    debug_assert!(certificate.check().is_ok());
    Ok(Approx1D {
        sigma1_net: ramp.net,
        relu_net,
        certificate,
        cells,
    })
}

fn plan_step_stage(
    target: &Target1D,
    eps: f64,
    budget: f64,
) -> Result<(StepFn1D, f64, CertMode)> {
    if let Some(ExactForm::Step(s)) = target.exact_form() {
        return Ok((s.clone(), 0.0, CertMode::Certified));
    }
    if let Some(l) = target.lipschitz() {
        let cells_real = l / (2.0 * eps);
        if !cells_real.is_finite() || cells_real > MAX_CELLS as f64 {
            return Err(Error::BudgetInfeasible {
                requested: eps,
                achieved: l / (4.0 * MAX_CELLS as f64),
            });
        }
        let cells = (cells_real.ceil() as usize).max(1);
        let step = step_approximate(target, cells)?;
        return Ok((step, l / (4.0 * cells as f64), CertMode::Certified));
    }
    // No proven structure: grow the grid until quadrature confirms the
    // budget. The quadrature tolerance is counted against the budget, so the
    // reported stage cost stays an upper estimate.
    let tol = (budget * 1e-4).max(1e-13);
    let mut cells = 16;
    let mut last = f64::INFINITY;
    loop {
        let step = step_approximate(target, cells)?;
        let hints: Vec<f64> = target
            .breakpoints()
            .iter()
            .chain(step.cuts())
            .copied()
            .collect();
        let measured = measure::quad_l1_distance_1d(
            &|x| target.eval(x),
            &|x| step.value_at(x),
            &hints,
            tol,
        )?;
        let achieved = measured.value + tol;
        if achieved <= budget {
            return Ok((step, achieved, CertMode::Measured));
        }
        last = achieved.min(last);
        if cells >= MAX_CELLS {
            return Err(Error::BudgetInfeasible {
                requested: eps,
                achieved: last,
            });
        }
        cells = (cells * 2).min(MAX_CELLS);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_constructor_validates() {
        assert!(StepFn1D::new(vec![0.5], vec![1.0, 2.0]).is_ok());
        assert!(StepFn1D::new(vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(StepFn1D::new(vec![0.5, 0.5], vec![1.0, 2.0, 3.0]).is_err());
        assert!(StepFn1D::new(vec![0.6, 0.5], vec![1.0, 2.0, 3.0]).is_err());
        assert!(StepFn1D::new(vec![0.5], vec![1.0]).is_err());
        assert!(StepFn1D::new(vec![], vec![f64::NAN]).is_err());
    }

    #[test]
    fn step_value_is_right_continuous() {
        let s = StepFn1D::new(vec![0.25, 0.75], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.value_at(0.0), 1.0);
        assert_eq!(s.value_at(0.25), 2.0);
        assert_eq!(s.value_at(0.74), 2.0);
        assert_eq!(s.value_at(0.75), 3.0);
        assert_eq!(s.value_at(1.0), 3.0);
        assert_eq!(s.jumps(), vec![(0.25, 1.0), (0.75, 1.0)]);
    }

    #[test]
    fn registry_knows_its_targets() {
        for name in BUILTIN_TARGETS {
            let t = Target1D::builtin(name).unwrap();
            assert_eq!(t.name(), *name);
        }
        assert!(Target1D::builtin("cube").is_err());
        assert_eq!(Target1D::builtin("sign").unwrap().eval(0.25), -1.0);
        assert_eq!(Target1D::builtin("sign").unwrap().eval(0.5), 1.0);
        assert_eq!(Target1D::builtin("rsqrt").unwrap().eval(1e-8), 100.0);
        assert!((Target1D::builtin("rsqrt").unwrap().eval(0.25) - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn from_samples_builds_a_cpwl_target() {
        let t = Target1D::from_samples("tent", &[0.0, 0.5, 1.0], &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(t.lipschitz(), Some(2.0));
        assert_eq!(t.breakpoints(), &[0.5]);
        assert!((t.eval(0.25) - 0.5).abs() <= 1e-15);
        assert!(matches!(t.exact_form(), Some(ExactForm::Cpwl(_))));
        assert!(Target1D::from_samples("bad", &[0.1, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn step_approximate_uses_midpoints() {
        let t = Target1D::builtin("x").unwrap();
        let s = step_approximate(&t, 4).unwrap();
        assert_eq!(s.cuts(), &[0.25, 0.5, 0.75]);
        assert_eq!(s.values(), &[0.125, 0.375, 0.625, 0.875]);
        assert!(step_approximate(&t, 0).is_err());
        assert!(step_approximate(&t, MAX_CELLS + 1).is_err());
    }

    #[test]
    fn ramp_net_reproduces_the_step_off_windows() {
        let s = StepFn1D::new(vec![0.25, 0.75], vec![0.0, 2.0, -1.0]).unwrap();
        let r = step_to_sigma1_net(&s, 100.0).unwrap();
        assert_eq!(r.slope, 100.0);
        assert_eq!(r.net.hidden_count(), 3);
        for x in [0.0, 0.1, 0.3, 0.5, 0.9, 1.0] {
            let y = r.net.eval(&[x]).unwrap()[0];
            assert!(
                (y - s.value_at(x)).abs() <= 1e-12,
                "x = {x}: {y} vs {}",
                s.value_at(x)
            );
        }
        // Mid-ramp sits halfway across the jump.
        let y = r.net.eval(&[0.25]).unwrap()[0];
        assert!((y - 1.0).abs() <= 1e-12);
        assert!((r.ramp_l1 - (2.0 + 3.0) / 400.0).abs() <= 1e-15);
        assert!((r.window_measure - 0.02).abs() <= 1e-15);
    }

    #[test]
    fn ramp_slope_respects_window_confinement() {
        let s = StepFn1D::new(vec![0.5, 0.625], vec![0.0, 1.0, 0.0]).unwrap();
        let r = step_to_sigma1_net(&s, 1.0).unwrap();
        assert_eq!(r.slope, 8.0);
        assert!(step_to_sigma1_net(&s, 0.0).is_err());
    }

    #[test]
    fn certificate_check_catches_violations() {
        let good = ApproxCertificate {
            requested_eps: 0.1,
            stage_budgets: vec![NamedValue::new("step", 0.05), NamedValue::new("ramp", 0.05)],
            stage_achieved: vec![NamedValue::new("step", 0.04), NamedValue::new("ramp", 0.01)],
            total_achieved: 0.05,
            mode: CertMode::Certified,
        };
        good.check().unwrap();
        let mut over = good.clone();
        over.stage_achieved[0].value = 0.06;
        over.total_achieved = 0.07;
        assert!(over.check().is_err());
        let mut mismatched = good.clone();
        mismatched.total_achieved = 0.9;
        assert!(mismatched.check().is_err());
        let mut overbooked = good.clone();
        overbooked.stage_budgets[0].value = 0.09;
        assert!(overbooked.check().is_err());
    }

    #[test]
    fn mode_and_stage_tags_are_pinned() {
        assert_eq!(serde_json::to_string(&CertMode::Certified).unwrap(), "\"certified\"");
        assert_eq!(serde_json::to_string(&CertMode::Measured).unwrap(), "\"measured\"");
        let c = ApproxCertificate {
            requested_eps: 0.1,
            stage_budgets: vec![NamedValue::new("step", 0.05)],
            stage_achieved: vec![NamedValue::new("step", 0.01)],
            total_achieved: 0.01,
            mode: CertMode::Measured,
        };
        let text = serde_json::to_string(&c).unwrap();
        for field in ["requested_eps", "stage_budgets", "stage_achieved", "total_achieved", "mode"] {
            assert!(text.contains(field));
        }
    }
}
