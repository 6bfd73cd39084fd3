//! Evaluation metrics comparing a predictor against the empirical
//! frequencies of held-out observation cells.
//!
//! Conventions that change the reported numbers, fixed here: the
//! Jensen-Shannon divergence uses the natural logarithm (per-cell bound
//! ln 2) and is weighted by cell counts; RSS is the plain unweighted sum
//! over cells. Sums use compensated accumulation so results are stable to
//! 1e-12 regardless of how callers parallelize around them.

use crate::baselines::Predictor;
use crate::data::ObservationSet;
use crate::kernels::BetaMatrix;
use crate::{Error, Result};

/// Compensated (Kahan) accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum
    }
}

/// Metric bundle for one model on one evaluation set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub rss: f64,
    pub js_divergence: f64,
    pub bcf1: f64,
    /// Present only when a ground-truth matrix was available and
    /// comparable (same kernel family).
    pub mse_beta: Option<f64>,
    pub cell_count: usize,
}

impl EvalReport {
    pub fn compute<P: Predictor + ?Sized>(
        pred: &P,
        obs: &ObservationSet,
        mse_beta: Option<f64>,
    ) -> Self {
        Self {
            rss: rss(pred, obs),
            js_divergence: js_divergence(pred, obs),
            bcf1: bcf1(pred, obs),
            mse_beta,
            cell_count: obs.cells().len(),
        }
    }
}

/// Unweighted sum over cells of (frequency - prediction)².
pub fn rss<P: Predictor + ?Sized>(pred: &P, obs: &ObservationSet) -> f64 {
    let mut acc = KahanSum::default();
    for c in obs.cells() {
        let d = c.frequency() - pred.predict(c.target, c.source, c.gap);
        acc.add(d * d);
    }
    acc.value()
}

/// `a·ln(a/b)` with the 0·log 0 := 0 convention.
fn xlog_ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * (a / b).ln()
    }
}

/// Jensen-Shannon divergence between Bernoulli(f) and Bernoulli(p),
/// natural log. Bounded by ln 2.
fn bernoulli_js(f: f64, p: f64) -> f64 {
    let m = 0.5 * (f + p);
    let kl_f = xlog_ratio(f, m) + xlog_ratio(1.0 - f, 1.0 - m);
    let kl_p = xlog_ratio(p, m) + xlog_ratio(1.0 - p, 1.0 - m);
    0.5 * kl_f + 0.5 * kl_p
}

/// Count-weighted mean over cells of the per-cell Bernoulli JS divergence.
pub fn js_divergence<P: Predictor + ?Sized>(pred: &P, obs: &ObservationSet) -> f64 {
    let total: u64 = obs.cells().iter().map(|c| c.total).sum();
    if total == 0 {
        return 0.0;
    }
    let mut acc = KahanSum::default();
    for c in obs.cells() {
        let js = bernoulli_js(c.frequency(), pred.predict(c.target, c.source, c.gap));
        acc.add(c.total as f64 * js);
    }
    acc.value() / total as f64
}

/// Best-case F1: per cell with N observations, TP = N·min(p, f),
/// FP = N·max(p-f, 0), FN = N·max(f-p, 0); aggregated across cells into
/// 2TP / (2TP + FP + FN). A run with no positives anywhere (TP = FP =
/// FN = 0) scores 1.
pub fn bcf1<P: Predictor + ?Sized>(pred: &P, obs: &ObservationSet) -> f64 {
    let mut tp = KahanSum::default();
    let mut fp = KahanSum::default();
    let mut fneg = KahanSum::default();
    for c in obs.cells() {
        let n = c.total as f64;
        let f = c.frequency();
        let p = pred.predict(c.target, c.source, c.gap);
        tp.add(n * f.min(p));
        fp.add(n * (p - f).max(0.0));
        fneg.add(n * (f - p).max(0.0));
    }
    let denom = 2.0 * tp.value() + fp.value() + fneg.value();
    if denom == 0.0 {
        1.0
    } else {
        2.0 * tp.value() / denom
    }
}

/// Mean over pairs and coefficients of the squared difference between two
/// coefficient matrices. Requires the same kernel and the same pair set.
pub fn mse_beta(fitted: &BetaMatrix, truth: &BetaMatrix) -> Result<f64> {
    if fitted.kernel() != truth.kernel() {
        return Err(Error::IncomparableMatrices {
            reason: format!(
                "kernel mismatch: {} vs {}",
                fitted.kernel(),
                truth.kernel()
            ),
        });
    }
    if fitted.len() != truth.len() {
        return Err(Error::IncomparableMatrices {
            reason: format!("pair sets differ: {} vs {} pairs", fitted.len(), truth.len()),
        });
    }
    let mut acc = KahanSum::default();
    let mut count = 0usize;
    for ((ft, fs, fv), (tt, ts, tv)) in fitted.iter().zip(truth.iter()) {
        if (ft, fs) != (tt, ts) {
            return Err(Error::IncomparableMatrices {
                reason: format!("pair sets differ at ({ft}, {fs}) vs ({tt}, {ts})"),
            });
        }
        for (a, b) in fv.coefficients().iter().zip(tv.coefficients()) {
            let d = a - b;
            acc.add(d * d);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::IncomparableMatrices {
            reason: "empty matrices".into(),
        });
    }
    Ok(acc.value() / count as f64)
}
