//! Quantiles, distortion weights and spectral functionals.

use serde::Serialize;

/// Left-continuous quantile function as a step function: `values[i]` on
/// `(breakpoints[i-1], breakpoints[i]]`, with `breakpoints[-1] = 0` and the
/// last breakpoint equal to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantile {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl Quantile {
    pub fn new(prob: &[f64], x: &[f64]) -> Self {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]).then(i.cmp(&j)));
        let mut breakpoints: Vec<f64> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut cum = 0.0;
        for i in idx {
            cum += prob[i];
            match values.last() {
                Some(&v) if v == x[i] => *breakpoints.last_mut().unwrap() = cum,
                _ => {
                    breakpoints.push(cum);
                    values.push(x[i]);
                }
            }
        }
        if let Some(last) = breakpoints.last_mut() {
            *last = 1.0;
        }
        Self { breakpoints, values }
    }

    /// Evaluates `q(u)` for `u` in `(0, 1]`.
    pub fn at(&self, u: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b < u);
        self.values[k.min(self.values.len() - 1)]
    }

    /// `int_alpha^1 q(u) du`.
    pub fn upper_integral(&self, alpha: f64) -> f64 {
        let mut total = 0.0;
        let mut left: f64 = 0.0;
        for (&b, &v) in self.breakpoints.iter().zip(&self.values) {
            let lo = left.max(alpha);
            if b > lo {
                total += v * (b - lo);
            }
            left = b;
        }
        total
    }
}

/// A nondecreasing weight `sigma` on `(0, 1)` with unit integral.
#[derive(Debug, Clone, PartialEq)]
pub enum Distortion {
    /// `sigma(u) = (1 - gamma) (1 - u)^(-gamma)`, `0 < gamma < 1`.
    Power { gamma: f64 },
    /// Step weight: `sigma[i]` on the i-th of `sigma.len()` equal cells.
    Tabulated { sigma: Vec<f64> },
}

impl Distortion {
    /// Tail integral `int_alpha^1 sigma(u) du`.
    pub fn tail(&self, alpha: f64) -> f64 {
        let alpha = alpha.clamp(0.0, 1.0);
        match self {
            Distortion::Power { gamma } => (1.0 - alpha).powf(1.0 - gamma),
            Distortion::Tabulated { sigma } => {
                let k = sigma.len() as f64;
                let mut total = 0.0;
                for (i, &s) in sigma.iter().enumerate() {
                    let lo = (i as f64 / k).max(alpha);
                    let hi = (i + 1) as f64 / k;
                    if hi > lo {
                        total += s * (hi - lo);
                    }
                }
                total
            }
        }
    }

    /// `int_0^1 sigma(u) q(u) du` for the step quantile `q`.
    pub fn rho(&self, q: &Quantile) -> f64 {
        let mut total = 0.0;
        let mut prev_tail = 1.0;
        for (&b, &v) in q.breakpoints.iter().zip(&q.values) {
            let tail = self.tail(b);
            total += v * (prev_tail - tail);
            prev_tail = tail;
        }
        total
    }

    /// `sup_alpha int_alpha^1 q / int_alpha^1 sigma` for a nonnegative step
    /// quantile. Between consecutive breakpoints of `q` (and of a tabulated
    /// `sigma`) the ratio has no interior maximum, so the sup is attained at a
    /// breakpoint or in the limit `alpha -> 1`.
    pub fn gauge(&self, q: &Quantile) -> (f64, f64) {
        let mut alphas = vec![0.0];
        alphas.extend(q.breakpoints.iter().copied().filter(|&b| b < 1.0));
        if let Distortion::Tabulated { sigma } = self {
            let k = sigma.len();
            alphas.extend((1..k).map(|i| i as f64 / k as f64));
        }
        let mut best = (0.0, 0.0);
        for a in alphas {
            let s = self.tail(a);
            if s > 0.0 {
                let r = q.upper_integral(a) / s;
                if r > best.0 {
                    best = (r, a);
                }
            }
        }
        // Limit at alpha -> 1: zero for the power family (tail ~ (1-a)^(1-gamma)),
        // max(q) / sigma_last for a step weight.
        if let Distortion::Tabulated { sigma } = self {
            let last = *sigma.last().unwrap();
            let top = *q.values.last().unwrap();
            if last > 0.0 && top / last > best.0 {
                best = (top / last, 1.0);
            }
        }
        best
    }
}
