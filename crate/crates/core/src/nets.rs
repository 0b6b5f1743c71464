//! Network data model and evaluation.
//!
//! A [`Net`] is a single hidden layer of `n` units over inputs in `R^d`,
//! followed by a linear read-out into `m` outputs and an optional softmax
//! head. Hidden unit `j` computes `act(w_j . x + b_j)` and output `i` is
//! `sum_j a[i][j] * act(w_j . x + b_j)`.
//!
//! Two activations are supported: `relu`, and the unit clipped ramp
//! `sigma1` which is 0 at or below -1/2, `t + 1/2` in between, and 1 at or
//! above 1/2. The ramp satisfies `sigma1(t) = relu(t + 1/2) - relu(t - 1/2)`,
//! which is what makes exact ramp-to-relu surgery possible (see
//! [`crate::surgery`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw constructor arguments of a [`Net`], in constructor order: input
/// dimension, hidden weights, hidden biases, output weights, activation,
/// softmax flag.
pub type NetParts = (
    usize,
    Vec<Vec<f64>>,
    Vec<f64>,
    Vec<Vec<f64>>,
    ActivationKind,
    bool,
);

/// Hidden-layer activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Relu,
    Sigma1,
}

impl ActivationKind {
    /// Applies the activation to a pre-activation value.
    #[inline]
    pub fn apply(self, t: f64) -> f64 {
        match self {
            ActivationKind::Relu => t.max(0.0),
            ActivationKind::Sigma1 => {
                if t <= -0.5 {
                    0.0
                } else if t >= 0.5 {
                    1.0
                } else {
                    t + 0.5
                }
            }
        }
    }
}

/// Evaluates one hidden unit at pre-activation `t`.
///
/// Errors with [`Error::Domain`] if `t` is not finite.
pub fn eval_hidden_unit(kind: ActivationKind, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!(
            "pre-activation must be finite, got {t}"
        )));
    }
    Ok(kind.apply(t))
}

/// Numerically stable softmax.
///
/// Subtracts the maximum logit before exponentiating so large logits cannot
/// overflow; the normalizer is then at least 1. Errors if `logits` is empty
/// or contains a non-finite value.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::InvalidInput("softmax of an empty logit vector".into()));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("softmax input has a non-finite logit".into()));
    }
    Ok(softmax_unchecked(logits))
}

pub(crate) fn softmax_unchecked(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A single-hidden-layer network.
///
/// Invariants, checked on construction and again on deserialization: every
/// hidden weight row has length `input_dim`, bias and output-row lengths
/// match the hidden count, all parameters are finite, and a softmax head
/// requires at least two outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNet", into = "RawNet")]
pub struct Net {
    input_dim: usize,
    hidden_weights: Vec<Vec<f64>>,
    hidden_biases: Vec<f64>,
    output_weights: Vec<Vec<f64>>,
    activation: ActivationKind,
    softmax_head: bool,
}

impl Net {
    pub fn new(
        input_dim: usize,
        hidden_weights: Vec<Vec<f64>>,
        hidden_biases: Vec<f64>,
        output_weights: Vec<Vec<f64>>,
        activation: ActivationKind,
        softmax_head: bool,
    ) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidInput("input_dim must be at least 1".into()));
        }
        let n = hidden_weights.len();
        if n == 0 {
            return Err(Error::InvalidInput("need at least one hidden unit".into()));
        }
        for row in &hidden_weights {
            if row.len() != input_dim {
                return Err(Error::Shape {
                    context: "hidden weight row",
                    expected: input_dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain("hidden weight is not finite".into()));
            }
        }
        if hidden_biases.len() != n {
            return Err(Error::Shape {
                context: "hidden biases",
                expected: n,
                got: hidden_biases.len(),
            });
        }
        if hidden_biases.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("hidden bias is not finite".into()));
        }
        if output_weights.is_empty() {
            return Err(Error::InvalidInput("need at least one output".into()));
        }
        for row in &output_weights {
            if row.len() != n {
                return Err(Error::Shape {
                    context: "output weight row",
                    expected: n,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain("output weight is not finite".into()));
            }
        }
        if softmax_head && output_weights.len() < 2 {
            return Err(Error::InvalidInput(
                "a softmax head needs at least two outputs".into(),
            ));
        }
        Ok(Self {
            input_dim,
            hidden_weights,
            hidden_biases,
            output_weights,
            activation,
            softmax_head,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_count(&self) -> usize {
        self.hidden_weights.len()
    }

    pub fn output_count(&self) -> usize {
        self.output_weights.len()
    }

    pub fn activation(&self) -> ActivationKind {
        self.activation
    }

    pub fn softmax_head(&self) -> bool {
        self.softmax_head
    }

    pub fn hidden_weights(&self) -> &[Vec<f64>] {
        &self.hidden_weights
    }

    pub fn hidden_biases(&self) -> &[f64] {
        &self.hidden_biases
    }

    pub fn output_weights(&self) -> &[Vec<f64>] {
        &self.output_weights
    }

    /// Decomposes the net into its raw parts, in constructor-argument order.
    pub fn into_parts(self) -> NetParts {
        (
            self.input_dim,
            self.hidden_weights,
            self.hidden_biases,
            self.output_weights,
            self.activation,
            self.softmax_head,
        )
    }

    /// Returns the same net with the softmax head enabled.
    pub fn with_softmax_head(mut self) -> Result<Self> {
        if self.output_count() < 2 {
            return Err(Error::InvalidInput(
                "a softmax head needs at least two outputs".into(),
            ));
        }
        self.softmax_head = true;
        Ok(self)
    }

    /// Returns the same net with the softmax head disabled.
    pub fn without_softmax_head(mut self) -> Self {
        self.softmax_head = false;
        self
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Shape {
                context: "input",
                expected: self.input_dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("input has a non-finite coordinate".into()));
        }
        Ok(())
    }

    fn hidden_unchecked(&self, x: &[f64]) -> Vec<f64> {
        self.hidden_weights
            .iter()
            .zip(&self.hidden_biases)
            .map(|(w, b)| self.activation.apply(dot(w, x) + b))
            .collect()
    }

    /// Hidden-layer activations at `x`.
    pub fn eval_hidden(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.hidden_unchecked(x))
    }

    pub(crate) fn eval_logits_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let h = self.hidden_unchecked(x);
        self.output_weights.iter().map(|row| dot(row, &h)).collect()
    }

    /// Linear read-out at `x`, before any softmax head.
    pub fn eval_logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.eval_logits_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let logits = self.eval_logits_unchecked(x);
        if self.softmax_head {
            softmax_unchecked(&logits)
        } else {
            logits
        }
    }

    /// Network output at `x`: the logits, passed through softmax when the
    /// head is enabled.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.eval_unchecked(x))
    }
}

/// On-disk shape of a [`Net`], with redundant counts for quick inspection.
#[derive(Serialize, Deserialize)]
struct RawNet {
    input_dim: usize,
    hidden_count: usize,
    output_count: usize,
    activation: ActivationKind,
    softmax_head: bool,
    hidden_weights: Vec<Vec<f64>>,
    hidden_biases: Vec<f64>,
    output_weights: Vec<Vec<f64>>,
}

impl TryFrom<RawNet> for Net {
    type Error = Error;

    fn try_from(raw: RawNet) -> Result<Self> {
        if raw.hidden_weights.len() != raw.hidden_count {
            return Err(Error::Shape {
                context: "declared hidden_count",
                expected: raw.hidden_count,
                got: raw.hidden_weights.len(),
            });
        }
        if raw.output_weights.len() != raw.output_count {
            return Err(Error::Shape {
                context: "declared output_count",
                expected: raw.output_count,
                got: raw.output_weights.len(),
            });
        }
        Net::new(
            raw.input_dim,
            raw.hidden_weights,
            raw.hidden_biases,
            raw.output_weights,
            raw.activation,
            raw.softmax_head,
        )
    }
}

impl From<Net> for RawNet {
    fn from(net: Net) -> Self {
        RawNet {
            input_dim: net.input_dim,
            hidden_count: net.hidden_weights.len(),
            output_count: net.output_weights.len(),
            activation: net.activation,
            softmax_head: net.softmax_head,
            hidden_weights: net.hidden_weights,
            hidden_biases: net.hidden_biases,
            output_weights: net.output_weights,
        }
    }
}
