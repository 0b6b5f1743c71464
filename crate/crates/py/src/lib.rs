//! Python extension module: nets, indicator specs, builders, and L1
//! measurement. Certificates and fit reports cross the boundary as JSON
//! strings; everything else is native Python scalars and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use shallownet::approx1d::{self, Target1D};
use shallownet::fitnd::{self, FitConfig, SamplePlan};
use shallownet::measure;
use shallownet::nets::{self, ActivationKind};
use shallownet::surgery::{self, IndicatorBackend};

fn err(e: shallownet::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A single-hidden-layer net. Immutable; transformations return new nets.
#[pyclass(frozen, module = "shallownet_py")]
struct Net {
    inner: nets::Net,
}

#[pymethods]
impl Net {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(json_err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(json_err)
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    #[getter]
    fn hidden_count(&self) -> usize {
        self.inner.hidden_count()
    }

    #[getter]
    fn output_count(&self) -> usize {
        self.inner.output_count()
    }

    #[getter]
    fn softmax_head(&self) -> bool {
        self.inner.softmax_head()
    }

    #[getter]
    fn activation(&self) -> &'static str {
        match self.inner.activation() {
            ActivationKind::Relu => "relu",
            ActivationKind::Sigma1 => "sigma1",
        }
    }

    /// Network output at `x` (softmax applied when the head is on).
    fn eval(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.eval(&x).map_err(err)
    }

    /// Pre-softmax outputs at `x`.
    fn eval_logits(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.eval_logits(&x).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Net(input_dim={}, hidden_count={}, output_count={}, activation={:?}, softmax_head={})",
            self.inner.input_dim(),
            self.inner.hidden_count(),
            self.inner.output_count(),
            self.activation(),
            self.inner.softmax_head()
        )
    }
}

/// An axis-aligned grid labeling of the unit cube.
#[pyclass(frozen, module = "shallownet_py")]
struct IndicatorSpec {
    inner: surgery::IndicatorSpec,
}

#[pymethods]
impl IndicatorSpec {
    /// `cell_labels` are 0-based, row-major with the last axis fastest.
    #[new]
    fn new(
        input_dim: usize,
        class_count: usize,
        axis_cuts: Vec<Vec<f64>>,
        cell_labels: Vec<usize>,
    ) -> PyResult<Self> {
        let inner = surgery::IndicatorSpec::new(input_dim, class_count, axis_cuts, cell_labels)
            .map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(json_err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(json_err)
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    #[getter]
    fn class_count(&self) -> usize {
        self.inner.class_count()
    }

    /// 0-based class label at a point of the unit cube.
    fn class_of(&self, x: Vec<f64>) -> PyResult<usize> {
        self.inner.class_of(&x).map_err(err)
    }

    fn onehot_at(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.onehot_at(&x).map_err(err)
    }

    /// Lebesgue measure of each class region.
    fn class_measures(&self) -> Vec<f64> {
        measure::class_measures(&self.inner).per_class().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "IndicatorSpec(input_dim={}, class_count={})",
            self.inner.input_dim(),
            self.inner.class_count()
        )
    }
}

/// Numerically stable softmax.
#[pyfunction]
fn softmax(logits: Vec<f64>) -> PyResult<Vec<f64>> {
    nets::softmax(&logits).map_err(err)
}

/// Rewrites a clipped-ramp net as a relu net of twice the width, exactly.
#[pyfunction]
fn expand_to_relu(net: PyRef<'_, Net>) -> PyResult<Net> {
    let inner = surgery::sigma1_expand_to_relu(&net.inner).map_err(err)?;
    Ok(Net { inner })
}

/// Concatenates the outputs of several nets over a shared input, exactly.
#[pyfunction]
fn stack(nets: Vec<PyRef<'_, Net>>) -> PyResult<Net> {
    let inners: Vec<nets::Net> = nets.iter().map(|n| n.inner.clone()).collect();
    let inner = surgery::stack_outputs(&inners).map_err(err)?;
    Ok(Net { inner })
}

/// Attaches a softmax head (the net must have at least two outputs).
#[pyfunction]
fn with_softmax_head(net: PyRef<'_, Net>) -> PyResult<Net> {
    let inner = net.inner.clone().with_softmax_head().map_err(err)?;
    Ok(Net { inner })
}

/// `(m * exp(-2m/eps), eps/2)` for a saturated softmax indicator with
/// `class_count` classes: the per-class error tail bound and the coarser
/// guarantee it always sits below.
#[pyfunction]
fn tail_bound(class_count: usize, eps: f64) -> PyResult<(f64, f64)> {
    let bound = surgery::indicator_tail_bound(class_count, eps).map_err(err)?;
    Ok((bound.tail, bound.guarantee))
}

/// Exact per-class L1 error of the saturated softmax indicator.
#[pyfunction]
fn closed_form_error(spec: PyRef<'_, IndicatorSpec>, eps: f64) -> PyResult<Vec<f64>> {
    let measures = measure::class_measures(&spec.inner);
    surgery::indicator_error_closed_form(&measures, eps).map_err(err)
}

/// Builds a relu approximation of a named builtin target within L1 budget
/// `eps` on [0, 1]. Returns `(sigma1_net, relu_net, certificate_json)`.
#[pyfunction]
fn build_approx_1d(target: &str, eps: f64) -> PyResult<(Net, Net, String)> {
    let t = Target1D::builtin(target).map_err(err)?;
    let built = approx1d::build_relu_approx_1d(&t, eps).map_err(err)?;
    let cert = serde_json::to_string_pretty(&built.certificate).map_err(json_err)?;
    Ok((
        Net {
            inner: built.sigma1_net,
        },
        Net {
            inner: built.relu_net,
        },
        cert,
    ))
}

/// Certified 1-D softmax indicator construction. Returns
/// `(net, per_class_bounds, certificate_json)`.
#[pyfunction]
fn build_indicator_1d(
    spec: PyRef<'_, IndicatorSpec>,
    eps: f64,
) -> PyResult<(Net, Vec<f64>, String)> {
    let built =
        surgery::build_softmax_indicator_net(&spec.inner, eps, &IndicatorBackend::Constructive1D)
            .map_err(err)?;
    let cert = serde_json::to_string_pretty(&built.certificate).map_err(json_err)?;
    Ok((Net { inner: built.net }, built.per_class, cert))
}

/// Random-feature ridge fit of a softmax indicator net in any dimension.
/// Deterministic in `seed`. Returns `(net, report_json)`; a miss shows in
/// the report's `success` field rather than raising.
#[pyfunction]
#[pyo3(signature = (spec, eps, *, hidden=256, scale=4.0, seed=0, ridge=1e-8, samples=4096, eval_samples=10_000))]
#[allow(clippy::too_many_arguments)]
fn fit_indicator(
    spec: PyRef<'_, IndicatorSpec>,
    eps: f64,
    hidden: usize,
    scale: f64,
    seed: u64,
    ridge: f64,
    samples: usize,
    eval_samples: u64,
) -> PyResult<(Net, String)> {
    let cfg = FitConfig {
        hidden_count: hidden,
        weight_scale: scale,
        seed,
        ridge,
        plan: SamplePlan::Random { count: samples },
        eval_samples,
    };
    let outcome = fitnd::fit_indicator_softmax(&spec.inner, eps, &cfg).map_err(err)?;
    let report = serde_json::to_string_pretty(&outcome.report).map_err(json_err)?;
    Ok((Net { inner: outcome.net }, report))
}

/// Seeded per-class Monte-Carlo L1 error of a softmax net against the
/// one-hot indicator. Returns `(value, ci_halfwidth)` per class.
#[pyfunction]
fn mc_l1_vs_indicator(
    net: PyRef<'_, Net>,
    spec: PyRef<'_, IndicatorSpec>,
    samples: u64,
    seed: u64,
) -> PyResult<Vec<(f64, f64)>> {
    let reports =
        measure::mc_l1_net_vs_onehot(&net.inner, &spec.inner, samples, seed).map_err(err)?;
    Ok(reports
        .into_iter()
        .map(|r| (r.value, r.ci_halfwidth.unwrap_or(0.0)))
        .collect())
}

/// L1 distance between a scalar 1-D net and a named builtin target: exact
/// piecewise integration when the target has an exact form, adaptive
/// quadrature at tolerance `tol` otherwise.
#[pyfunction]
#[pyo3(signature = (net, target, tol=1e-10))]
fn l1_vs_target_1d(net: PyRef<'_, Net>, target: &str, tol: f64) -> PyResult<f64> {
    let t = Target1D::builtin(target).map_err(err)?;
    let cpwl = measure::net_to_cpwl_1d(&net.inner, 0).map_err(err)?;
    let value = match t.exact_form() {
        Some(approx1d::ExactForm::Cpwl(f)) => measure::exact_l1_distance_1d(f, &cpwl).value,
        Some(approx1d::ExactForm::Step(s)) => measure::exact_l1_step_vs_cpwl(s, &cpwl).value,
        None => {
            let mut hints = cpwl.breakpoints().to_vec();
            hints.extend_from_slice(t.breakpoints());
            measure::quad_l1_distance_1d(&|x| t.eval(x), &|x| cpwl.value_at(x), &hints, tol)
                .map_err(err)?
                .value
        }
    };
    Ok(value)
}

#[pymodule]
fn shallownet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Net>()?;
    m.add_class::<IndicatorSpec>()?;
    m.add_function(wrap_pyfunction!(softmax, m)?)?;
    m.add_function(wrap_pyfunction!(expand_to_relu, m)?)?;
    m.add_function(wrap_pyfunction!(stack, m)?)?;
    m.add_function(wrap_pyfunction!(with_softmax_head, m)?)?;
    m.add_function(wrap_pyfunction!(tail_bound, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_error, m)?)?;
    m.add_function(wrap_pyfunction!(build_approx_1d, m)?)?;
    m.add_function(wrap_pyfunction!(build_indicator_1d, m)?)?;
    m.add_function(wrap_pyfunction!(fit_indicator, m)?)?;
    m.add_function(wrap_pyfunction!(mc_l1_vs_indicator, m)?)?;
    m.add_function(wrap_pyfunction!(l1_vs_target_1d, m)?)?;
    Ok(())
}
