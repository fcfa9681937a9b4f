//! Consistency metric and penalized objectives.
//!
//! The smooth data term is the sum of log-sigmoids of the measurement
//! margins `b_i a_i^T x`; it is concave, so its negation makes a convex
//! data-fitting term. Two sparsity penalties are supported: the log-sum
//! (Gaussian entropy) penalty and the l1 norm.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::model::ProblemInstance;

/// Which sparsity penalty the objective (and the solver) uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyMode {
    /// Log-sum penalty `sum_i log x_i^2`.
    GaussianEntropy,
    /// `sum_i |x_i|`.
    L1,
}

impl PenaltyMode {
    /// Short label used in CLI flags and CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            PenaltyMode::GaussianEntropy => "gauss",
            PenaltyMode::L1 => "l1",
        }
    }
}

impl std::str::FromStr for PenaltyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss" => Ok(PenaltyMode::GaussianEntropy),
            "l1" => Ok(PenaltyMode::L1),
            other => Err(Error::invalid(format!(
                "unknown penalty mode `{other}`, expected `gauss` or `l1`"
            ))),
        }
    }
}

impl std::fmt::Display for PenaltyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// `1 / (1 + exp(-z))`, overflow-free over the whole f64 range.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(sigmoid(z))` without overflow or loss of the `z -> -inf` asymptote.
pub fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// The value of the chosen penalty at `x`. For the Gaussian entropy,
/// entries that are exactly zero are treated as pruned and excluded from
/// the sum; `log x_i^2` is evaluated as `2 log |x_i|` to avoid underflow.
pub fn penalty(x: &ArrayView1<f64>, mode: PenaltyMode) -> f64 {
    match mode {
        PenaltyMode::GaussianEntropy => x
            .iter()
            .filter(|&&v| v != 0.0)
            .map(|&v| 2.0 * v.abs().ln())
            .sum(),
        PenaltyMode::L1 => x.iter().map(|&v| v.abs()).sum(),
    }
}

// ---------------------------------------------------------------------------
// Raw kernels over (entries, signs) views. The solver reuses these on
// column-restricted copies of the sensing matrix.
// ---------------------------------------------------------------------------

pub(crate) fn margins(
    entries: &ArrayView2<f64>,
    signs: &ArrayView1<f64>,
    x: &ArrayView1<f64>,
) -> Array1<f64> {
    let mut z = entries.dot(x);
    z *= signs;
    z
}

pub(crate) fn phi_from_margins(z: &Array1<f64>) -> f64 {
    z.iter().map(|&zi| log_sigmoid(zi)).sum()
}

pub(crate) fn phi_gradient_from_margins(
    entries: &ArrayView2<f64>,
    signs: &ArrayView1<f64>,
    z: &Array1<f64>,
) -> Array1<f64> {
    // grad phi = sum_i (1 - sigma(z_i)) b_i a_i, and 1 - sigma(z) = sigma(-z)
    let mut u = z.mapv(|zi| sigmoid(-zi));
    u *= signs;
    entries.t().dot(&u)
}

pub(crate) fn phi_hessian_from_margins(
    entries: &ArrayView2<f64>,
    z: &Array1<f64>,
) -> Array2<f64> {
    // hess phi = -sum_i sigma(z_i) sigma(-z_i) a_i a_i^T  (b_i^2 = 1)
    let s = z.mapv(|zi| sigmoid(zi) * sigmoid(-zi));
    let scaled = entries * &s.view().insert_axis(Axis(1));
    let mut h = entries.t().dot(&scaled);
    h.mapv_inplace(|v| -v);
    h
}

fn check_dims(x: &ArrayView1<f64>, instance: &ProblemInstance) -> Result<()> {
    if x.len() != instance.n() {
        return Err(Error::invalid(format!(
            "x has length {}, expected n={}",
            x.len(),
            instance.n()
        )));
    }
    Ok(())
}

/// The consistency metric `phi(x) = sum_i log sigmoid(b_i a_i^T x)`.
/// Always nonpositive; larger is more consistent.
pub fn consistency(x: &ArrayView1<f64>, instance: &ProblemInstance) -> Result<f64> {
    check_dims(x, instance)?;
    let signs = instance.signs.to_f64();
    let z = margins(&instance.matrix.entries().view(), &signs.view(), x);
    Ok(phi_from_margins(&z))
}

/// The penalized objective `-phi(x) + lambda * penalty(x)`.
pub fn objective(
    x: &ArrayView1<f64>,
    instance: &ProblemInstance,
    lambda: f64,
    mode: PenaltyMode,
) -> Result<f64> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let phi = consistency(x, instance)?;
    Ok(-phi + lambda * penalty(x, mode))
}

/// Analytic gradient of the consistency metric.
pub fn consistency_gradient(x: &ArrayView1<f64>, instance: &ProblemInstance) -> Result<Array1<f64>> {
    check_dims(x, instance)?;
    let signs = instance.signs.to_f64();
    let entries = instance.matrix.entries().view();
    let z = margins(&entries, &signs.view(), x);
    Ok(phi_gradient_from_margins(&entries, &signs.view(), &z))
}

/// Analytic Hessian of the consistency metric; negative semidefinite.
pub fn consistency_hessian(x: &ArrayView1<f64>, instance: &ProblemInstance) -> Result<Array2<f64>> {
    check_dims(x, instance)?;
    let signs = instance.signs.to_f64();
    let entries = instance.matrix.entries().view();
    let z = margins(&entries, &signs.view(), x);
    Ok(phi_hessian_from_margins(&entries, &z))
}

/// Value, gradient, and (on request) Hessian of the negated consistency
/// metric `-phi` — the convex data term a Newton step minimizes. The
/// Hessian, when present, is symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct LossEvaluation {
    pub value: f64,
    pub gradient: Array1<f64>,
    pub hessian: Option<Array2<f64>>,
}

/// Evaluates the convex data term `-phi` and its derivatives in one pass,
/// sharing the margin computation.
pub fn evaluate_data_term(
    x: &ArrayView1<f64>,
    instance: &ProblemInstance,
    with_hessian: bool,
) -> Result<LossEvaluation> {
    check_dims(x, instance)?;
    let signs = instance.signs.to_f64();
    let entries = instance.matrix.entries().view();
    let z = margins(&entries, &signs.view(), x);
    let mut gradient = phi_gradient_from_margins(&entries, &signs.view(), &z);
    gradient.mapv_inplace(|v| -v);
    Ok(LossEvaluation {
        value: -phi_from_margins(&z),
        gradient,
        hessian: with_hessian.then(|| {
            let mut h = phi_hessian_from_margins(&entries, &z);
            h.mapv_inplace(|v| -v);
            h
        }),
    })
}
