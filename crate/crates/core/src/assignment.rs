//! Minimum-cost bipartite assignment.
//!
//! [`hungarian`] is the O(n³) shortest-augmenting-path form of Kuhn–Munkres
//! with row/column potentials. Rectangular inputs are padded to a square with
//! a constant larger than every entry and padded pairs are stripped.
//! [`brute_force_assignment`] enumerates every injection and exists as a test
//! oracle.

use crate::error::AssignmentError;

/// Dense row-major cost matrix with at least one row and one column.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, AssignmentError> {
        if rows == 0 || cols == 0 {
            return Err(AssignmentError::Empty { rows, cols });
        }
        if values.len() != rows * cols {
            return Err(AssignmentError::Shape { rows, cols, got: values.len() });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(AssignmentError::NonFinite { row: k / cols, col: k % cols });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, AssignmentError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            let got = rows.iter().map(Vec::len).sum();
            return Err(AssignmentError::Shape { rows: r, cols: c, got });
        }
        Self::new(r, c, rows.concat())
    }

    /// Fills an `rows x cols` matrix from `f(row, col)`.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, AssignmentError> {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(i, j));
            }
        }
        Self::new(rows, cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn transpose(&self) -> CostMatrix {
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                values.push(self.get(i, j));
            }
        }
        CostMatrix { rows: self.cols, cols: self.rows, values }
    }
}

/// Row/column index pairs of an assignment, sorted by row.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchPairs {
    pub pairs: Vec<(usize, usize)>,
}

impl MatchPairs {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn total_cost(&self, c: &CostMatrix) -> f64 {
        self.pairs.iter().map(|&(i, j)| c.get(i, j)).sum()
    }

    pub fn col_for_row(&self, row: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == row).map(|p| p.1)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.pairs.iter()
    }
}

/// Exact minimum-cost assignment. Matches `min(rows, cols)` pairs.
///
/// Runs directly on the rectangular matrix (after transposing so that rows
/// are the smaller side), in O(rows² · cols). Deterministic: columns are
/// scanned in index order and the first column attaining the minimum reduced
/// cost wins.
pub fn hungarian(c: &CostMatrix) -> MatchPairs {
    if c.rows > c.cols {
        let t = hungarian(&c.transpose());
        let mut pairs: Vec<(usize, usize)> = t.pairs.into_iter().map(|(i, j)| (j, i)).collect();
        pairs.sort_unstable();
        return MatchPairs { pairs };
    }
    let (n, m) = (c.rows, c.cols);

    // 1-based potentials; index 0 is the virtual source column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut row_of_col = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![f64::INFINITY; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let row = c.row(i0 - 1);
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> =
        (1..=m).filter(|&j| row_of_col[j] != 0).map(|j| (row_of_col[j] - 1, j - 1)).collect();
    pairs.sort_unstable();
    MatchPairs { pairs }
}

/// Exhaustive minimum over all injections of the smaller side into the larger.
/// Refuses when the smaller side exceeds 9.
pub fn brute_force_assignment(c: &CostMatrix) -> Result<MatchPairs, AssignmentError> {
    let transposed = c.rows > c.cols;
    let m = if transposed { c.transpose() } else { c.clone() };
    if m.rows > 9 {
        return Err(AssignmentError::TooLarge(m.rows));
    }

    struct Search<'a> {
        m: &'a CostMatrix,
        used: Vec<bool>,
        current: Vec<usize>,
        best: Vec<usize>,
        best_cost: f64,
    }

    impl Search<'_> {
        fn go(&mut self, row: usize, acc: f64) {
            if row == self.m.rows {
                if acc < self.best_cost {
                    self.best_cost = acc;
                    self.best.clone_from(&self.current);
                }
                return;
            }
            for j in 0..self.m.cols {
                if !self.used[j] {
                    self.used[j] = true;
                    self.current.push(j);
                    self.go(row + 1, acc + self.m.get(row, j));
                    self.current.pop();
                    self.used[j] = false;
                }
            }
        }
    }

    let mut s = Search {
        m: &m,
        used: vec![false; m.cols],
        current: Vec::with_capacity(m.rows),
        best: Vec::new(),
        best_cost: f64::INFINITY,
    };
    s.go(0, 0.0);

    let mut pairs: Vec<(usize, usize)> = s
        .best
        .iter()
        .enumerate()
        .map(|(i, &j)| if transposed { (j, i) } else { (i, j) })
        .collect();
    pairs.sort_unstable();
    Ok(MatchPairs { pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> CostMatrix {
        CostMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(matches!(CostMatrix::new(0, 3, vec![]), Err(AssignmentError::Empty { .. })));
        assert!(matches!(
            CostMatrix::new(2, 2, vec![1.0, f64::NAN, 0.0, 0.0]),
            Err(AssignmentError::NonFinite { row: 0, col: 1 })
        ));
        assert!(matches!(
            CostMatrix::new(1, 1, vec![f64::INFINITY]),
            Err(AssignmentError::NonFinite { .. })
        ));
        assert!(matches!(CostMatrix::new(2, 2, vec![1.0]), Err(AssignmentError::Shape { .. })));
    }

    #[test]
    fn identity_like() {
        let c = m(&[&[0., 1., 1.], &[1., 0., 1.], &[1., 1., 0.]]);
        let p = hungarian(&c);
        assert_eq!(p.pairs, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(p.total_cost(&c), 0.0);
    }

    #[test]
    fn two_by_two() {
        let c = m(&[&[1., 2.], &[2., 1.]]);
        let p = hungarian(&c);
        assert_eq!(p.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(p.total_cost(&c), 2.0);
    }

    #[test]
    fn brute_force_examples() {
        let one = m(&[&[5.]]);
        assert_eq!(brute_force_assignment(&one).unwrap().pairs, vec![(0, 0)]);

        let c = m(&[&[9., 1., 9.], &[1., 9., 9.]]);
        let p = brute_force_assignment(&c).unwrap();
        assert_eq!(p.pairs, vec![(0, 1), (1, 0)]);
        assert_eq!(p.total_cost(&c), 2.0);
        assert_eq!(hungarian(&c).total_cost(&c), 2.0);

        let perm = m(&[&[1., 0., 1.], &[0., 1., 1.], &[1., 1., 0.]]);
        assert_eq!(brute_force_assignment(&perm).unwrap().total_cost(&perm), 0.0);

        let big = CostMatrix::new(10, 10, vec![0.0; 100]).unwrap();
        assert_eq!(brute_force_assignment(&big), Err(AssignmentError::TooLarge(10)));
        // 9 rows against 12 columns is still accepted.
        let wide = CostMatrix::from_fn(2, 12, |i, j| (i * 7 + j * 3) as f64 % 5.0).unwrap();
        assert!(brute_force_assignment(&wide).is_ok());
    }

    #[test]
    fn tall_matrix_matches_every_column() {
        let c = m(&[&[5., 9.], &[1., 9.], &[9., 2.]]);
        let p = hungarian(&c);
        assert_eq!(p.pairs, vec![(1, 0), (2, 1)]);
    }

    #[test]
    fn deterministic_under_ties() {
        let c = CostMatrix::new(4, 4, vec![1.0; 16]).unwrap();
        let a = hungarian(&c);
        for _ in 0..5 {
            assert_eq!(hungarian(&c), a);
        }
    }

    fn matrix_strategy() -> impl Strategy<Value = CostMatrix> {
        (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| {
            prop::collection::vec(-5.0f64..5.0, r * c)
                .prop_map(move |v| CostMatrix::new(r, c, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn matches_oracle(c in matrix_strategy()) {
            let h = hungarian(&c);
            let b = brute_force_assignment(&c).unwrap();
            prop_assert_eq!(h.len(), c.rows().min(c.cols()));
            prop_assert!((h.total_cost(&c) - b.total_cost(&c)).abs() < 1e-9);
        }

        #[test]
        fn pairing_is_injective(c in matrix_strategy()) {
            let h = hungarian(&c);
            let mut rows: Vec<_> = h.pairs.iter().map(|p| p.0).collect();
            let mut cols: Vec<_> = h.pairs.iter().map(|p| p.1).collect();
            rows.dedup();
            cols.sort_unstable();
            cols.dedup();
            prop_assert_eq!(rows.len(), h.len());
            prop_assert_eq!(cols.len(), h.len());
        }

        #[test]
        fn transpose_preserves_total(c in matrix_strategy()) {
            let t = c.transpose();
            let a = hungarian(&c).total_cost(&c);
            let b = hungarian(&t).total_cost(&t);
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn row_shift_keeps_pairing(
            c in (2usize..=6).prop_flat_map(|n| {
                prop::collection::vec(0.0f64..100.0, n * n)
                    .prop_map(move |v| CostMatrix::new(n, n, v).unwrap())
            }),
            row in 0usize..6,
            shift in -50.0f64..50.0,
        ) {
            let row = row % c.rows();
            let base = hungarian(&c);
            let mut shifted = c.values().to_vec();
            for j in 0..c.cols() {
                shifted[row * c.cols() + j] += shift;
            }
            let s = CostMatrix::new(c.rows(), c.cols(), shifted).unwrap();
            prop_assert_eq!(hungarian(&s), base);
        }
    }
}
