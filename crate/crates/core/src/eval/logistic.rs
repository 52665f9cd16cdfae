//! Four-parameter logistic mapping fitted by Levenberg-Marquardt.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subjective::stats::{mean, population_std, quantile_sorted};

/// `f(q) = (eta1 - eta2) / (1 + exp(-(q - eta3) / eta4)) + eta2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub eta4: f64,
}

impl LogisticParams {
    fn from_vec(v: &Vector4<f64>) -> Self {
        Self {
            eta1: v[0],
            eta2: v[1],
            eta3: v[2],
            eta4: v[3],
        }
    }

    fn to_vec(self) -> Vector4<f64> {
        Vector4::new(self.eta1, self.eta2, self.eta3, self.eta4)
    }

    pub fn eval(&self, q: f64) -> f64 {
        (self.eta1 - self.eta2) * sigmoid((q - self.eta3) / self.eta4) + self.eta2
    }

    pub fn map(&self, q: &[f64]) -> Vec<f64> {
        q.iter().map(|v| self.eval(*v)).collect()
    }

    pub fn is_valid(&self) -> bool {
        self.eta4 != 0.0 && [self.eta1, self.eta2, self.eta3, self.eta4].iter().all(|v| v.is_finite())
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogisticFit {
    pub params: LogisticParams,
    /// Sum of squared residuals on the fitting sample.
    pub sse: f64,
    /// False when the iteration cap was hit; `params` is then the best found.
    pub converged: bool,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 2000;
/// Scale of `eta4` relative to `std(q)` for the near-linear start.
const LINEAR_START_STRETCH: f64 = 1e4;

fn sse(p: &LogisticParams, q: &[f64], y: &[f64]) -> f64 {
    q.iter().zip(y).map(|(a, b)| (b - p.eval(*a)).powi(2)).sum()
}

fn levenberg_marquardt(start: LogisticParams, q: &[f64], y: &[f64]) -> LogisticFit {
    let mut theta = start.to_vec();
    let mut cur = LogisticParams::from_vec(&theta);
    let mut cost = sse(&cur, q, y);
    let mut lambda = 1e-3;
    for it in 0..MAX_ITERATIONS {
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for (&qi, &yi) in q.iter().zip(y) {
            let s = sigmoid((qi - cur.eta3) / cur.eta4);
            let amp = cur.eta1 - cur.eta2;
            let ds = s * (1.0 - s);
            let j = Vector4::new(
                s,
                1.0 - s,
                -amp * ds / cur.eta4,
                -amp * ds * (qi - cur.eta3) / (cur.eta4 * cur.eta4),
            );
            let r = yi - cur.eval(qi);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        if jtr.amax() <= 1e-300 || cost == 0.0 {
            return LogisticFit { params: cur, sse: cost, converged: true, iterations: it };
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for k in 0..4 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = LogisticParams::from_vec(&(theta + step));
            let trial_cost = if trial.is_valid() { sse(&trial, q, y) } else { f64::INFINITY };
            if trial_cost < cost {
                let rel = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
                let small_step = step.norm() <= 1e-14 * (theta.norm() + 1e-14);
                theta += step;
                cur = trial;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if rel < 1e-14 || small_step {
                    return LogisticFit { params: cur, sse: cost, converged: true, iterations: it + 1 };
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no downhill step at any damping: a stationary point
            return LogisticFit { params: cur, sse: cost, converged: true, iterations: it + 1 };
        }
    }
    LogisticFit { params: cur, sse: cost, converged: false, iterations: MAX_ITERATIONS }
}

/// Deterministic starting points: both orientations of `(max, min)` MOS with
/// `eta3 = median(q)` and `eta4 = +-std(q) / 4`, plus a stretched logistic that
/// reproduces the least-squares line through the data.
pub fn initial_guesses(q: &[f64], mos: &[f64]) -> Vec<LogisticParams> {
    let mut sorted = q.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = quantile_sorted(&sorted, 0.5);
    let sd = population_std(q);
    let hi = mos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = mos.iter().copied().fold(f64::INFINITY, f64::min);
    let mut out = Vec::with_capacity(5);
    for (eta1, eta2) in [(hi, lo), (lo, hi)] {
        for sign in [1.0, -1.0] {
            out.push(LogisticParams {
                eta1,
                eta2,
                eta3: median,
                eta4: sign * sd / 4.0,
            });
        }
    }
    let (mq, my) = (mean(q), mean(mos));
    let sxy: f64 = q.iter().zip(mos).map(|(a, b)| (a - mq) * (b - my)).sum();
    let sxx: f64 = q.iter().map(|a| (a - mq) * (a - mq)).sum();
    let slope = sxy / sxx;
    if slope != 0.0 && slope.is_finite() {
        let eta4 = LINEAR_START_STRETCH * sd;
        let amp = 4.0 * slope * eta4;
        // the least-squares line passes through (mean q, mean mos)
        out.push(LogisticParams {
            eta1: my + amp / 2.0,
            eta2: my - amp / 2.0,
            eta3: mq,
            eta4,
        });
    }
    out
}

/// Least-squares logistic fit from every initial guess; returns the lowest-residual fit.
pub fn fit_logistic(q: &[f64], mos: &[f64]) -> Result<LogisticFit> {
    if q.len() != mos.len() {
        return Err(Error::DimensionMismatch(format!("{} scores vs {} MOS", q.len(), mos.len())));
    }
    if q.len() < 5 {
        return Err(Error::Undefined(format!("logistic fit needs at least 5 points, got {}", q.len())));
    }
    if q.iter().all(|v| *v == q[0]) {
        return Err(Error::Undefined("constant predictions".into()));
    }
    if q.iter().chain(mos).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite value in fit input".into()));
    }
    let best = initial_guesses(q, mos)
        .into_iter()
        .map(|g| levenberg_marquardt(g, q, mos))
        .min_by(|a, b| a.sse.total_cmp(&b.sse))
        .expect("at least four starts");
    Ok(best)
}
