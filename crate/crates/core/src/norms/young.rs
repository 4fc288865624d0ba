//! Young functions, their conjugates, and Luxemburg gauges.

/// A Young function on the nonnegative half-line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum YoungFn {
    /// `x^p / p`, `p > 1`.
    Power(f64),
    /// `e^x - 1`.
    Exp,
    /// Conjugate of `e^x - 1` on the half-line: `0` on `[0, 1]`,
    /// `y ln y - y + 1` above.
    ExpConjugate,
}

impl YoungFn {
    pub fn eval(self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        match self {
            YoungFn::Power(p) => x.powf(p) / p,
            YoungFn::Exp => x.exp_m1(),
            YoungFn::ExpConjugate => {
                if x <= 1.0 {
                    0.0
                } else {
                    x * x.ln() - x + 1.0
                }
            }
        }
    }

    pub fn conjugate(self) -> YoungFn {
        match self {
            YoungFn::Power(p) => YoungFn::Power(p / (p - 1.0)),
            YoungFn::Exp => YoungFn::ExpConjugate,
            YoungFn::ExpConjugate => YoungFn::Exp,
        }
    }

    /// The point where the function reaches 1.
    pub fn inverse_at_one(self) -> f64 {
        match self {
            YoungFn::Power(p) => p.powf(1.0 / p),
            YoungFn::Exp => std::f64::consts::LN_2,
            YoungFn::ExpConjugate => std::f64::consts::E,
        }
    }

    /// `E Phi(|x| / beta)`.
    pub fn modular(self, prob: &[f64], x: &[f64], beta: f64) -> f64 {
        prob.iter().zip(x).map(|(p, v)| p * self.eval(v.abs() / beta)).sum()
    }

    /// Luxemburg gauge `inf { beta > 0 : E Phi(|x| / beta) <= 1 }` by
    /// bisection; the returned value always satisfies the constraint.
    pub fn luxemburg(self, prob: &[f64], x: &[f64]) -> f64 {
        let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max == 0.0 {
            return 0.0;
        }
        let mean: f64 = prob.iter().zip(x).map(|(p, v)| p * v.abs()).sum();
        let k = self.inverse_at_one();
        // Jensen gives the lower end, pointwise domination the upper end.
        let mut lo = mean / k;
        let mut hi = max / k;
        if self.modular(prob, x, hi) > 1.0 {
            // Rounding at the bracket edge; widen slightly.
            hi *= 1.0 + 1e-12;
        }
        for _ in 0..200 {
            if hi - lo <= 1e-15 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.modular(prob, x, mid) <= 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Orlicz polar `inf_{beta > 0} beta E Phi*(|eta| / beta) + beta`, where
    /// `self` is the primal function. Returns the value and the minimizer.
    pub fn orlicz_polar(self, prob: &[f64], eta: &[f64]) -> (f64, f64) {
        let conj = self.conjugate();
        let max = eta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max == 0.0 {
            return (0.0, 0.0);
        }
        let h = |lb: f64| {
            let b = lb.exp();
            b * conj.modular(prob, eta, b) + b
        };
        // h is convex in beta, hence unimodal in log beta. Any minimizer is at
        // most h(max) because h(beta) >= beta.
        let hi = h(max.ln()).ln();
        let grid: Vec<f64> = (0..=120).map(|k| hi - k as f64 * 0.5).collect();
        let vals: Vec<f64> = grid.iter().map(|&g| h(g)).collect();
        let k = (0..vals.len()).min_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j))).unwrap();
        let mut a = grid[(k + 1).min(grid.len() - 1)];
        let mut b = grid[k.saturating_sub(1)];
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (h(c), h(d));
        for _ in 0..200 {
            if b - a < 1e-13 {
                break;
            }
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = h(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = h(d);
            }
        }
        let candidates = [(fc, c), (fd, d), (vals[k], grid[k])];
        let (v, lb) = candidates.into_iter().min_by(|x, y| x.0.total_cmp(&y.0)).unwrap();
        (v, lb.exp())
    }
}
