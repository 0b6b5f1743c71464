//! Random-feature fitting of targets on the unit cube.
//!
//! The hidden layer is drawn once from a seeded RNG and frozen; only the
//! output weights are trained, by ridge regression on the normal equations.
//! Everything is deterministic in the seed: the ChaCha8 stream is consumed
//! in a fixed order (hidden weights row by row, then hidden biases, then
//! training points coordinate by coordinate), and evaluation uses its own
//! stream seeded with `seed + 1`.

use nalgebra::{Cholesky, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure;
use crate::nets::{ActivationKind, Net};
use crate::surgery::IndicatorSpec;

/// Hard cap on training-set size.
const MAX_TRAIN_POINTS: usize = 1 << 24;

/// Ridge escalation stops here.
const MAX_RIDGE: f64 = 1e-2;

/// Where the training inputs come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplePlan {
    /// Midpoint lattice with `per_axis` points per axis; consumes no
    /// randomness.
    Grid { per_axis: usize },
    /// `count` uniform points from the seeded stream.
    Random { count: usize },
}

/// Configuration for random-feature fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Number of random relu features.
    pub hidden_count: usize,
    /// Hidden weights are uniform on `[-s, s]`; biases on
    /// `[-s sqrt(d), s sqrt(d)]` so the kink surfaces cover the cube at
    /// every scale of `d`.
    pub weight_scale: f64,
    pub seed: u64,
    /// Ridge parameter added to the normal equations. Escalates by factors
    /// of 10 (up to 1e-2) if the factorization fails; an explicit 0 never
    /// escalates and fails instead.
    pub ridge: f64,
    pub plan: SamplePlan,
    /// Monte-Carlo samples used by fit evaluation (seeded with `seed + 1`).
    pub eval_samples: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            hidden_count: 256,
            weight_scale: 4.0,
            seed: 0,
            ridge: 1e-8,
            plan: SamplePlan::Random { count: 4096 },
            eval_samples: 10_000,
        }
    }
}

fn check_config(input_dim: usize, out_count: usize, cfg: &FitConfig) -> Result<()> {
    if input_dim == 0 {
        return Err(Error::InvalidInput("input_dim must be at least 1".into()));
    }
    if out_count == 0 {
        return Err(Error::InvalidInput("need at least one output".into()));
    }
    if cfg.hidden_count == 0 {
        return Err(Error::InvalidInput("need at least one hidden unit".into()));
    }
    if !(cfg.weight_scale > 0.0) || !cfg.weight_scale.is_finite() {
        return Err(Error::InvalidInput(format!(
            "weight scale must be positive and finite, got {}",
            cfg.weight_scale
        )));
    }
    if cfg.ridge < 0.0 || !cfg.ridge.is_finite() {
        return Err(Error::InvalidInput(format!(
            "ridge must be nonnegative and finite, got {}",
            cfg.ridge
        )));
    }
    Ok(())
}

fn train_points(input_dim: usize, plan: SamplePlan, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    match plan {
        SamplePlan::Random { count } => {
            if count == 0 || count > MAX_TRAIN_POINTS {
                return Err(Error::InvalidInput(format!(
                    "training count must be in 1..={MAX_TRAIN_POINTS}, got {count}"
                )));
            }
            Ok((0..count)
                .map(|_| (0..input_dim).map(|_| rng.random_range(0.0..1.0)).collect())
                .collect())
        }
        SamplePlan::Grid { per_axis } => {
            if per_axis == 0 {
                return Err(Error::InvalidInput("per_axis must be at least 1".into()));
            }
            let total = (per_axis as u128).checked_pow(input_dim as u32).unwrap_or(u128::MAX);
            if total > MAX_TRAIN_POINTS as u128 {
                return Err(Error::InvalidInput(format!(
                    "grid of {per_axis}^{input_dim} training points exceeds the cap of {MAX_TRAIN_POINTS}"
                )));
            }
            let mut points = Vec::with_capacity(total as usize);
            let mut idx = vec![0usize; input_dim];
            loop {
                points.push(
                    idx.iter()
                        .map(|i| (*i as f64 + 0.5) / per_axis as f64)
                        .collect(),
                );
                let mut carry = input_dim;
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
            Ok(points)
        }
    }
}

fn fit_core(
    input_dim: usize,
    out_count: usize,
    target: &dyn Fn(&[f64]) -> Vec<f64>,
    cfg: &FitConfig,
) -> Result<(Net, f64, usize)> {
    check_config(input_dim, out_count, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let s = cfg.weight_scale;
    let hidden_weights: Vec<Vec<f64>> = (0..cfg.hidden_count)
        .map(|_| (0..input_dim).map(|_| rng.random_range(-s..s)).collect())
        .collect();
    let bias_scale = s * (input_dim as f64).sqrt();
    let hidden_biases: Vec<f64> = (0..cfg.hidden_count)
        .map(|_| rng.random_range(-bias_scale..bias_scale))
        .collect();
    let points = train_points(input_dim, cfg.plan, &mut rng)?;

    let n_points = points.len();
    let n_units = cfg.hidden_count;
    let phi = DMatrix::from_fn(n_points, n_units, |i, j| {
        let t: f64 = hidden_weights[j]
            .iter()
            .zip(&points[i])
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + hidden_biases[j];
        t.max(0.0)
    });
    let targets: Vec<Vec<f64>> = points.iter().map(|p| target(p)).collect();
    for t in &targets {
        if t.len() != out_count {
            return Err(Error::Shape {
                context: "fit target outputs",
                expected: out_count,
                got: t.len(),
            });
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("fit target value is not finite".into()));
        }
    }
    let y = DMatrix::from_fn(n_points, out_count, |i, k| targets[i][k]);
    let gram = phi.transpose() * &phi;
    let rhs = phi.transpose() * &y;

    let mut lambda = cfg.ridge;
    let solution = loop {
        let mut damped = gram.clone();
        for i in 0..n_units {
            damped[(i, i)] += lambda;
        }
        if let Some(chol) = Cholesky::new(damped) {
            break chol.solve(&rhs);
        }
        if lambda == 0.0 {
            return Err(Error::Solver(
                "normal equations are singular with ridge 0; set ridge > 0".into(),
            ));
        }
        let next = lambda * 10.0;
        if next > MAX_RIDGE {
            return Err(Error::Solver(format!(
                "normal equations stayed singular up to ridge {lambda}"
            )));
        }
        lambda = next;
    };
    let output_weights: Vec<Vec<f64>> = (0..out_count)
        .map(|k| (0..n_units).map(|j| solution[(j, k)]).collect())
        .collect();
    let net = Net::new(
        input_dim,
        hidden_weights,
        hidden_biases,
        output_weights,
        ActivationKind::Relu,
        false,
    )?;
    Ok((net, lambda, n_points))
}

/// Fits a relu net with random hidden features to a vector target on
/// `[0, 1]^input_dim` by ridge regression. Deterministic in `cfg.seed`.
pub fn fit_random_features(
    input_dim: usize,
    output_count: usize,
    target: &dyn Fn(&[f64]) -> Vec<f64>,
    cfg: &FitConfig,
) -> Result<Net> {
    fit_core(input_dim, output_count, target, cfg).map(|(net, _, _)| net)
}

/// Outcome of an indicator fit: worst-case numbers and reproducibility data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub eps: f64,
    /// Monte-Carlo per-class L1 estimates against the one-hot indicator.
    pub per_class_l1: Vec<f64>,
    pub total_l1: f64,
    pub max_class_l1: f64,
    /// Whether every class came in under `eps`.
    pub success: bool,
    pub hidden_count: usize,
    pub train_count: usize,
    pub ridge_used: f64,
    pub seed: u64,
    pub eval_seed: u64,
    pub eval_samples: u64,
}

/// A fitted indicator net with its report.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    /// Relu net with a softmax head, one output per class.
    pub net: Net,
    pub report: FitReport,
}

/// Fits a softmax indicator net for `spec` with random relu features.
///
/// The regression targets are the scaled logits `+m/eps` on a class's own
/// region and `-m/eps` elsewhere; hitting them exactly would leave at most
/// `m * exp(-2m/eps) <= eps/2` of per-class L1 error after softmax. The fit
/// is then scored by seeded Monte-Carlo against the one-hot indicator.
/// Missing `eps` is reported, not an error.
pub fn fit_indicator_softmax(
    spec: &IndicatorSpec,
    eps: f64,
    cfg: &FitConfig,
) -> Result<FitOutcome> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!(
            "eps must be positive and finite, got {eps}"
        )));
    }
    let m = spec.class_count();
    let margin = m as f64 / eps;
    if !margin.is_finite() {
        return Err(Error::InvalidInput(format!(
            "eps = {eps} is too small to represent logit targets in f64"
        )));
    }
    let target = |x: &[f64]| -> Vec<f64> {
        let label = spec.class_of_unchecked(x);
        (0..m)
            .map(|i| if i == label { margin } else { -margin })
            .collect()
    };
    let (net, ridge_used, train_count) = fit_core(spec.input_dim(), m, &target, cfg)?;
    let net = net.with_softmax_head()?;

    let eval_seed = cfg.seed.wrapping_add(1);
    let reports = measure::mc_l1_net_vs_onehot(&net, spec, cfg.eval_samples, eval_seed)?;
    let per_class_l1: Vec<f64> = reports.iter().map(|r| r.value).collect();
    let total_l1 = per_class_l1.iter().sum();
    let max_class_l1 = per_class_l1.iter().copied().fold(0.0_f64, f64::max);
    let report = FitReport {
        eps,
        per_class_l1,
        total_l1,
        max_class_l1,
        success: max_class_l1 < eps,
        hidden_count: cfg.hidden_count,
        train_count,
        ridge_used,
        seed: cfg.seed,
        eval_seed,
        eval_samples: cfg.eval_samples,
    };
    Ok(FitOutcome { net, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halves_spec() -> IndicatorSpec {
        IndicatorSpec::new(1, 2, vec![vec![0.5]], vec![0, 1]).unwrap()
    }

    fn small_cfg() -> FitConfig {
        FitConfig {
            hidden_count: 96,
            weight_scale: 4.0,
            seed: 0,
            ridge: 1e-8,
            plan: SamplePlan::Random { count: 1024 },
            eval_samples: 4000,
        }
    }

    #[test]
    fn fit_is_deterministic_in_the_seed() {
        let target = |x: &[f64]| vec![x[0] * x[0]];
        let a = fit_random_features(1, 1, &target, &small_cfg()).unwrap();
        let b = fit_random_features(1, 1, &target, &small_cfg()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let mut other = small_cfg();
        other.seed = 1;
        let c = fit_random_features(1, 1, &target, &other).unwrap();
        assert_ne!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&c).unwrap()
        );
    }

    #[test]
    fn fit_recovers_a_smooth_scalar_target() {
        let target = |x: &[f64]| vec![x[0] * x[0]];
        let net = fit_random_features(1, 1, &target, &small_cfg()).unwrap();
        assert_eq!(net.output_count(), 1);
        assert!(!net.softmax_head());
        let r = measure::quad_l1_distance_1d(
            &|x| net.eval_logits(&[x]).unwrap()[0],
            &|x| x * x,
            &[],
            1e-8,
        )
        .unwrap();
        assert!(r.value < 0.01, "L1 error {} too large", r.value);
    }

    #[test]
    fn zero_ridge_on_a_singular_system_names_the_fix() {
        let target = |x: &[f64]| vec![x[0]];
        let cfg = FitConfig {
            hidden_count: 8,
            ridge: 0.0,
            plan: SamplePlan::Random { count: 4 },
            ..FitConfig::default()
        };
        let err = fit_random_features(1, 1, &target, &cfg).unwrap_err();
        assert!(matches!(err, Error::Solver(_)));
        assert!(err.to_string().contains("ridge > 0"));
    }

    #[test]
    fn grid_plan_consumes_no_point_randomness() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pts = train_points(2, SamplePlan::Grid { per_axis: 2 }, &mut rng).unwrap();
        assert_eq!(
            pts,
            vec![
                vec![0.25, 0.25],
                vec![0.25, 0.75],
                vec![0.75, 0.25],
                vec![0.75, 0.75]
            ]
        );
        assert!(train_points(4, SamplePlan::Grid { per_axis: 1 << 7 }, &mut rng).is_err());
        assert!(train_points(1, SamplePlan::Random { count: 0 }, &mut rng).is_err());
    }

    #[test]
    fn config_validation_rejects_nonsense() {
        let t = |_: &[f64]| vec![0.0];
        let mut cfg = small_cfg();
        cfg.hidden_count = 0;
        assert!(fit_random_features(1, 1, &t, &cfg).is_err());
        let mut cfg = small_cfg();
        cfg.weight_scale = -1.0;
        assert!(fit_random_features(1, 1, &t, &cfg).is_err());
        let mut cfg = small_cfg();
        cfg.ridge = f64::NAN;
        assert!(fit_random_features(1, 1, &t, &cfg).is_err());
        assert!(fit_random_features(0, 1, &t, &small_cfg()).is_err());
    }

    #[test]
    fn indicator_fit_succeeds_on_the_half_split()  {
        let outcome = fit_indicator_softmax(&halves_spec(), 0.15, &small_cfg()).unwrap();
        assert!(outcome.net.softmax_head());
        assert_eq!(outcome.report.per_class_l1.len(), 2);
        assert!(outcome.report.success, "report: {:?}", outcome.report);
        assert_eq!(outcome.report.eval_seed, 1);
        assert!((outcome.report.total_l1
            - outcome.report.per_class_l1.iter().sum::<f64>())
        .abs()
            <= 1e-15);
    }

    #[test]
    fn plan_tags_are_pinned() {
        let grid = serde_json::to_string(&SamplePlan::Grid { per_axis: 64 }).unwrap();
        assert_eq!(grid, r#"{"kind":"grid","per_axis":64}"#);
        let random = serde_json::to_string(&SamplePlan::Random { count: 4096 }).unwrap();
        assert_eq!(random, r#"{"kind":"random","count":4096}"#);
    }
}
