//! Dense two-phase simplex with Bland's rule.
//!
//! Problems are stated as
//!
//! ```text
//! minimize    c . x
//! subject to  A_eq x = b_eq
//!             A_ub x <= b_ub
//!             lower <= x <= upper      (bounds may be infinite)
//! ```
//!
//! and converted internally to `min c'x', A'x' = b', x' >= 0, b' >= 0`.

use serde::Serialize;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;
const DEFAULT_MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq_rows: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub ub_rows: Vec<Vec<f64>>,
    pub ub_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// `n` variables, all nonnegative, zero objective, no rows.
    pub fn new(n: usize) -> Self {
        Self { objective: vec![0.0; n], lower: vec![0.0; n], upper: vec![f64::INFINITY; n], ..Default::default() }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_ub(&mut self, row: Vec<f64>, rhs: f64) {
        self.ub_rows.push(row);
        self.ub_rhs.push(rhs);
    }

    pub fn set_free(&mut self, var: usize) {
        self.lower[var] = f64::NEG_INFINITY;
        self.upper[var] = f64::INFINITY;
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        let bad_dim = self.eq_rows.iter().chain(&self.ub_rows).any(|r| r.len() != n)
            || self.eq_rows.len() != self.eq_rhs.len()
            || self.ub_rows.len() != self.ub_rhs.len()
            || self.lower.len() != n
            || self.upper.len() != n;
        if bad_dim {
            return Err(Error::Dimension("linear program rows and bounds must match the variable count".into()));
        }
        let finite = self
            .objective
            .iter()
            .chain(self.eq_rows.iter().flatten())
            .chain(self.ub_rows.iter().flatten())
            .chain(&self.eq_rhs)
            .chain(&self.ub_rhs)
            .all(|v| v.is_finite());
        if !finite || self.lower.contains(&f64::INFINITY) || self.upper.contains(&f64::NEG_INFINITY) {
            return Err(Error::Dimension("linear program has non-finite data".into()));
        }
        Ok(())
    }

    /// Largest violation of the constraints and bounds at `x`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, &b) in self.eq_rows.iter().zip(&self.eq_rhs) {
            worst = worst.max((dot(row, x) - b).abs());
        }
        for (row, &b) in self.ub_rows.iter().zip(&self.ub_rhs) {
            worst = worst.max(dot(row, x) - b);
        }
        for ((&xi, &l), &u) in x.iter().zip(&self.lower).zip(&self.upper) {
            worst = worst.max(l - xi).max(xi - u);
        }
        worst
    }

    pub fn solve(&self) -> Result<LpSolution> {
        self.solve_with_limit(DEFAULT_MAX_PIVOTS)
    }

    /// Solves and turns any non-optimal status into an error.
    pub fn solve_optimal(&self) -> Result<LpSolution> {
        let sol = self.solve()?;
        match sol.status {
            LpStatus::Optimal => Ok(sol),
            s => Err(Error::Solver(s)),
        }
    }

    pub fn solve_with_limit(&self, max_pivots: usize) -> Result<LpSolution> {
        self.validate()?;
        let std = StandardForm::build(self);
        let mut tab = Tableau::new(&std);
        let status = tab.run(&std, max_pivots);
        if status != LpStatus::Optimal {
            return Ok(LpSolution::failed(status));
        }
        Ok(std.recover(self, &tab))
    }
}

/// How an original variable maps onto nonnegative standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = shift + col`
    Shifted { col: usize, shift: f64 },
    /// `x = shift - col`
    Mirrored { col: usize, shift: f64 },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowKind {
    Eq(usize),
    Ub(usize),
    Bound,
}

struct StandardForm {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    /// Row was multiplied by -1 to make `b` nonnegative.
    flipped: Vec<bool>,
    kind: Vec<RowKind>,
    maps: Vec<VarMap>,
    offset: f64,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.n_vars();
        let mut maps = Vec::with_capacity(n);
        let mut cols = 0;
        for i in 0..n {
            let (l, u) = (lp.lower[i], lp.upper[i]);
            let m = if l.is_finite() {
                VarMap::Shifted { col: cols, shift: l }
            } else if u.is_finite() {
                VarMap::Mirrored { col: cols, shift: u }
            } else {
                cols += 1;
                VarMap::Split { pos: cols - 1, neg: cols }
            };
            cols += 1;
            maps.push(m);
        }
        let n_struct = cols;

        // Express a row over original variables in standard columns; returns
        // the constant contributed by shifts.
        let expand = |row: &[f64]| -> (Vec<f64>, f64) {
            let mut out = vec![0.0; n_struct];
            let mut constant = 0.0;
            for (i, &v) in row.iter().enumerate() {
                match maps[i] {
                    VarMap::Shifted { col, shift } => {
                        out[col] += v;
                        constant += v * shift;
                    }
                    VarMap::Mirrored { col, shift } => {
                        out[col] -= v;
                        constant += v * shift;
                    }
                    VarMap::Split { pos, neg } => {
                        out[pos] += v;
                        out[neg] -= v;
                    }
                }
            }
            (out, constant)
        };

        let (c, offset) = expand(&lp.objective);
        let mut rows: Vec<(Vec<f64>, f64, bool, RowKind)> = Vec::new();
        for (k, (row, &b)) in lp.eq_rows.iter().zip(&lp.eq_rhs).enumerate() {
            let (r, k0) = expand(row);
            rows.push((r, b - k0, false, RowKind::Eq(k)));
        }
        for (k, (row, &b)) in lp.ub_rows.iter().zip(&lp.ub_rhs).enumerate() {
            let (r, k0) = expand(row);
            rows.push((r, b - k0, true, RowKind::Ub(k)));
        }
        for i in 0..n {
            if let VarMap::Shifted { col, shift } = maps[i] {
                if lp.upper[i].is_finite() {
                    let mut r = vec![0.0; n_struct];
                    r[col] = 1.0;
                    rows.push((r, lp.upper[i] - shift, true, RowKind::Bound));
                }
            }
        }
        let n_slack = rows.iter().filter(|r| r.2).count();
        let total = n_struct + n_slack;
        let mut a = Vec::with_capacity(rows.len());
        let mut b = Vec::with_capacity(rows.len());
        let mut flipped = Vec::with_capacity(rows.len());
        let mut kind = Vec::with_capacity(rows.len());
        let mut slack = n_struct;
        for (mut r, mut rhs, has_slack, k) in rows {
            r.resize(total, 0.0);
            if has_slack {
                r[slack] = 1.0;
                slack += 1;
            }
            let flip = rhs < 0.0;
            if flip {
                r.iter_mut().for_each(|v| *v = -*v);
                rhs = -rhs;
            }
            a.push(r);
            b.push(rhs);
            flipped.push(flip);
            kind.push(k);
        }
        let mut c = c;
        c.resize(total, 0.0);
        Self { a, b, c, flipped, kind, maps, offset }
    }

    fn n_cols(&self) -> usize {
        self.c.len()
    }

    fn recover(&self, lp: &LinearProgram, tab: &Tableau) -> LpSolution {
        let m = self.a.len();
        let n = self.n_cols();
        let mut xs = vec![0.0; n];
        for (r, &j) in tab.basis.iter().enumerate() {
            if j < n {
                xs[j] = tab.rows[r][tab.rhs_col()];
            }
        }
        let x: Vec<f64> = self
            .maps
            .iter()
            .map(|m| match *m {
                VarMap::Shifted { col, shift } => shift + xs[col],
                VarMap::Mirrored { col, shift } => shift - xs[col],
                VarMap::Split { pos, neg } => xs[pos] - xs[neg],
            })
            .collect();
        // Duals of the standard rows: reduced cost of artificial i is -y_i.
        let y: Vec<f64> = (0..m).map(|i| -tab.obj[n + i]).collect();
        let dual_value = dot(&self.b, &y) + self.offset;
        let mut cs: f64 = 0.0;
        for j in 0..n {
            cs = cs.max((xs[j] * tab.obj[j]).abs());
        }
        let mut duals_eq = vec![0.0; lp.eq_rows.len()];
        let mut duals_ub = vec![0.0; lp.ub_rows.len()];
        for i in 0..m {
            let yi = if self.flipped[i] { -y[i] } else { y[i] };
            match self.kind[i] {
                RowKind::Eq(k) => duals_eq[k] = yi,
                RowKind::Ub(k) => duals_ub[k] = yi,
                RowKind::Bound => {}
            }
        }
        let value = dot(&lp.objective, &x);
        LpSolution {
            status: LpStatus::Optimal,
            value,
            x,
            duals_eq,
            duals_ub,
            dual_value,
            complementary_slackness: cs,
            pivots: tab.pivots,
        }
    }
}

struct Tableau {
    /// Constraint rows over structural+slack columns, then artificials, then rhs.
    rows: Vec<Vec<f64>>,
    /// Reduced costs (same layout, last entry is minus the objective value).
    obj: Vec<f64>,
    basis: Vec<usize>,
    n: usize,
    pivots: usize,
}

impl Tableau {
    fn new(std: &StandardForm) -> Self {
        let m = std.a.len();
        let n = std.n_cols();
        let rows = std
            .a
            .iter()
            .zip(&std.b)
            .enumerate()
            .map(|(i, (r, &b))| {
                let mut row = r.clone();
                row.resize(n + m + 1, 0.0);
                row[n + i] = 1.0;
                row[n + m] = b;
                row
            })
            .collect();
        Self { rows, obj: vec![0.0; n + m + 1], basis: (n..n + m).collect(), n, pivots: 0 }
    }

    fn rhs_col(&self) -> usize {
        self.obj.len() - 1
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn set_objective(&mut self, cost: &[f64]) {
        let w = self.obj.len();
        self.obj = vec![0.0; w];
        self.obj[..cost.len()].copy_from_slice(cost);
        for r in 0..self.m() {
            let cb = self.obj[self.basis[r]];
            if cb != 0.0 {
                for j in 0..w {
                    self.obj[j] -= cb * self.rows[r][j];
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&prow) {
                        *v -= f * pv;
                    }
                    row[c] = 0.0;
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Bland's rule simplex on columns `0..allowed`. Returns `None` on success.
    fn iterate(&mut self, allowed: usize, budget: usize) -> Option<LpStatus> {
        let rhs = self.rhs_col();
        loop {
            if self.pivots >= budget {
                return Some(LpStatus::IterationLimit);
            }
            let Some(c) = (0..allowed).find(|&j| self.obj[j] < -PIVOT_TOL) else {
                return None;
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.m() {
                let a = self.rows[r][c];
                if a > PIVOT_TOL {
                    let ratio = self.rows[r][rhs] / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - PIVOT_TOL
                                || (ratio <= bratio + PIVOT_TOL && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    }
                }
            }
            match best {
                None => return Some(LpStatus::Unbounded),
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    fn run(&mut self, std: &StandardForm, budget: usize) -> LpStatus {
        let m = self.m();
        let n = self.n;
        // Phase I: minimize the sum of artificials.
        let mut phase1 = vec![0.0; n + m];
        phase1[n..].iter_mut().for_each(|v| *v = 1.0);
        self.set_objective(&phase1);
        if let Some(s) = self.iterate(n + m, budget) {
            return s;
        }
        let infeas = -self.obj[self.rhs_col()];
        let scale = 1.0 + std.b.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if infeas > FEAS_TOL * scale {
            return LpStatus::Infeasible;
        }
        // Drive artificials out of the basis where possible.
        for r in 0..m {
            if self.basis[r] >= n {
                if let Some(c) = (0..n).find(|&j| self.rows[r][j].abs() > 1e-9) {
                    self.pivot(r, c);
                }
            }
        }
        // Phase II over structural and slack columns only.
        self.set_objective(&std.c);
        match self.iterate(n, budget) {
            Some(s) => s,
            None => LpStatus::Optimal,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub x: Vec<f64>,
    /// Multipliers of the equality rows (sensitivity of the value to `b_eq`).
    pub duals_eq: Vec<f64>,
    /// Multipliers of the inequality rows (nonpositive at optimum).
    pub duals_ub: Vec<f64>,
    pub dual_value: f64,
    pub complementary_slackness: f64,
    pub pivots: usize,
}

impl LpSolution {
    fn failed(status: LpStatus) -> Self {
        Self {
            status,
            value: f64::NAN,
            x: Vec::new(),
            duals_eq: Vec::new(),
            duals_ub: Vec::new(),
            dual_value: f64::NAN,
            complementary_slackness: f64::NAN,
            pivots: 0,
        }
    }

    pub fn duality_gap(&self) -> f64 {
        (self.value - self.dual_value).abs()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::solve_square;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lower_bound_only() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![1.0];
        lp.lower = vec![3.0];
        let s = lp.solve_optimal().unwrap();
        assert!((s.value - 3.0).abs() < 1e-12);
        assert!(s.duality_gap() < 1e-12);
    }

    #[test]
    fn absolute_value_gadget() {
        // variables z (free), s; min s, -s <= z <= s, z = 1
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![0.0, 1.0];
        lp.set_free(0);
        lp.add_ub(vec![1.0, -1.0], 0.0);
        lp.add_ub(vec![-1.0, -1.0], 0.0);
        lp.add_eq(vec![1.0, 0.0], 1.0);
        let s = lp.solve_optimal().unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
        assert!((s.duals_eq[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_eq(vec![1.0], -1.0);
        assert_eq!(lp.solve().unwrap().status, LpStatus::Infeasible);
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-1.0, 0.0];
        lp.add_ub(vec![-1.0, 1.0], 1.0);
        assert_eq!(lp.solve().unwrap().status, LpStatus::Unbounded);
        assert!(matches!(lp.solve_optimal(), Err(Error::Solver(LpStatus::Unbounded))));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 2.0];
        lp.add_eq(vec![1.0, 1.0], 2.0);
        lp.add_eq(vec![2.0, 2.0], 4.0);
        let s = lp.solve_optimal().unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
        assert!(s.duality_gap() < 1e-10);
    }

    #[test]
    fn upper_bounds_and_mirrored_vars() {
        // max x + y with x <= 2, y in (-inf, 1]
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-1.0, -1.0];
        lp.upper = vec![2.0, 1.0];
        lp.lower = vec![0.0, f64::NEG_INFINITY];
        let s = lp.solve_optimal().unwrap();
        assert!((s.value + 3.0).abs() < 1e-12);
        assert!(lp.residual(&s.x) < 1e-12);
    }

    /// Vertex enumeration: min c.x over {x >= 0, A x <= b}, bounded by construction.
    fn vertex_oracle(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
        let n = c.len();
        let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
        for i in 0..n {
            let mut r = vec![0.0; n];
            r[i] = -1.0;
            rows.push((r, 0.0));
        }
        let k = rows.len();
        let mut best: Option<f64> = None;
        for mask in 0u32..(1 << k) {
            if mask.count_ones() as usize != n {
                continue;
            }
            let active: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
            let m: Vec<Vec<f64>> = active.iter().map(|&i| rows[i].0.clone()).collect();
            let rhs: Vec<f64> = active.iter().map(|&i| rows[i].1).collect();
            if let Some(x) = solve_square(&m, &rhs, 1e-10) {
                if rows.iter().all(|(r, bb)| dot(r, &x) <= bb + 1e-9) {
                    let v = dot(c, &x);
                    best = Some(best.map_or(v, |bv: f64| bv.min(v)));
                }
            }
        }
        best
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn matches_vertex_enumeration(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let mut a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let mut b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..3.0)).collect();
            // Box rows keep the region bounded.
            a.push(vec![1.0; n]);
            b.push(5.0);
            let mut lp = LinearProgram::new(n);
            lp.objective = c.clone();
            for (r, &bb) in a.iter().zip(&b) {
                lp.add_ub(r.clone(), bb);
            }
            let s = lp.solve().unwrap();
            match vertex_oracle(&c, &a, &b) {
                Some(v) => {
                    prop_assert_eq!(s.status, LpStatus::Optimal);
                    prop_assert!((s.value - v).abs() < 1e-8, "{} vs {}", s.value, v);
                    prop_assert!(lp.residual(&s.x) < 1e-10);
                    prop_assert!(s.duality_gap() < 1e-9);
                    prop_assert!(s.complementary_slackness < 1e-9);
                }
                None => prop_assert_eq!(s.status, LpStatus::Infeasible),
            }
        }

        #[test]
        fn strong_duality_on_larger_programs(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(5..=40);
            let m_eq = rng.gen_range(0..=n / 3);
            let m_ub = rng.gen_range(1..=n);
            let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
            let mut lp = LinearProgram::new(n);
            lp.objective = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
            for _ in 0..m_eq {
                let r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let rhs = dot(&r, &x0);
                lp.add_eq(r, rhs);
            }
            for _ in 0..m_ub {
                let r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let rhs = dot(&r, &x0) + rng.gen_range(0.0..1.0);
                lp.add_ub(r, rhs);
            }
            let s = lp.solve().unwrap();
            prop_assert_eq!(s.status, LpStatus::Optimal);
            prop_assert!(lp.residual(&s.x) < 1e-10);
            prop_assert!(s.duality_gap() < 1e-9 * (1.0 + s.value.abs()));
            prop_assert!(s.value <= dot(&lp.objective, &x0) + 1e-9);
        }
    }
}
