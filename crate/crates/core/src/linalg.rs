//! Dense row reduction: rank, null space and square solves.

/// Reduced row echelon form with partial pivoting. Returns the reduced
/// matrix and the pivot column of each nonzero row.
pub fn rref(mut a: Vec<Vec<f64>>, tol: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, mag) =
            (r..rows).map(|i| (i, a[i][c].abs())).fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= tol {
            for row in a.iter_mut().skip(r) {
                row[c] = 0.0;
            }
            continue;
        }
        a.swap(r, best);
        let p = a[r][c];
        for v in a[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && row[c] != 0.0 {
                let f = row[c];
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(a: &[Vec<f64>], tol: f64) -> usize {
    rref(a.to_vec(), tol).1.len()
}

/// A basis of `{x : a x = 0}`, one vector per free column.
pub fn nullspace(a: &[Vec<f64>], cols: usize, tol: f64) -> Vec<Vec<f64>> {
    let (r, pivots) = rref(a.to_vec(), tol);
    let mut is_pivot = vec![None; cols];
    for (i, &c) in pivots.iter().enumerate() {
        is_pivot[c] = Some(i);
    }
    (0..cols)
        .filter(|&f| is_pivot[f].is_none())
        .map(|f| {
            let mut v = vec![0.0; cols];
            v[f] = 1.0;
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = -r[i][f];
            }
            v
        })
        .collect()
}

/// Solves `a x = b` for square nonsingular `a`; `None` if singular within `tol`.
pub fn solve_square(a: &[Vec<f64>], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = a.len();
    let aug: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let (r, pivots) = rref(aug, tol);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
        return None;
    }
    Some((0..n).map(|i| r[i][n]).collect())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
