use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{IntVector, RatVector, Rational};

/// Rational matrix used for exact Gauss-Jordan elimination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    cols: usize,
    rows: Vec<RatVector>,
}

impl RatMatrix {
    pub fn from_rows(cols: usize, rows: Vec<RatVector>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == cols));
        Self { cols, rows }
    }

    pub fn from_int_rows(cols: usize, rows: &[IntVector]) -> Self {
        Self::from_rows(cols, rows.iter().map(|r| super::int_to_rat(r)).collect())
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows.len() {
                break;
            }
            let Some(p) = (r..self.rows.len()).find(|&i| !self.rows[i][c].is_zero()) else {
                continue;
            };
            self.rows.swap(r, p);
            let inv = self.rows[r][c].recip();
            for e in self.rows[r].iter_mut() {
                *e *= &inv;
            }
            for i in 0..self.rows.len() {
                if i == r || self.rows[i][c].is_zero() {
                    continue;
                }
                let f = self.rows[i][c].clone();
                for j in c..self.cols {
                    let d = &f * &self.rows[r][j];
                    self.rows[i][j] -= d;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rows(&self) -> &[RatVector] {
        &self.rows
    }
}

/// Rank over the rationals of a list of integer vectors.
pub fn rank(rows: &[IntVector]) -> usize {
    match rows.first() {
        None => 0,
        Some(r) => RatMatrix::from_int_rows(r.len(), rows).rref().len(),
    }
}

pub fn rank_rational(rows: &[RatVector]) -> usize {
    match rows.first() {
        None => 0,
        Some(r) => RatMatrix::from_rows(r.len(), rows.to_vec()).rref().len(),
    }
}

/// Dimension of the affine hull of a nonempty point set (0 for a single point).
pub fn affine_rank(points: &[RatVector]) -> usize {
    let Some(base) = points.first() else {
        return 0;
    };
    let diffs: Vec<RatVector> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    rank_rational(&diffs)
}

/// Unique solution of a square system `a x = b`, or `None` if singular.
pub fn solve_square(a: &[RatVector], b: &[Rational]) -> Option<RatVector> {
    let n = a.len();
    debug_assert_eq!(b.len(), n);
    let rows = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            debug_assert_eq!(r.len(), n);
            let mut row = r.clone();
            row.push(bi.clone());
            row
        })
        .collect();
    let mut m = RatMatrix::from_rows(n + 1, rows);
    let pivots = m.rref();
    if pivots.len() != n || pivots.last().is_some_and(|&p| p >= n) {
        return None;
    }
    Some(m.rows.iter().map(|r| r[n].clone()).collect())
}

/// Scales a rational vector by the lcm of its denominators; returns the
/// integer vector and the (positive) scale factor.
pub fn clear_denominators(v: &[Rational]) -> (IntVector, BigInt) {
    let l = v.iter().fold(BigInt::one(), |acc, e| acc.lcm(e.denom()));
    let ints = v
        .iter()
        .map(|e| (e * Rational::from_integer(l.clone())).to_integer())
        .collect();
    (ints, l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int_vec, rat, rat_vec};

    #[test]
    fn rank_and_affine_rank() {
        assert_eq!(rank(&[int_vec(&[1, 0]), int_vec(&[2, 0])]), 1);
        assert_eq!(
            rank(&[
                int_vec(&[1, 1, 1]),
                int_vec(&[1, -1, 1]),
                int_vec(&[2, 0, 2])
            ]),
            2
        );
        let tri = vec![
            rat_vec(&[(0, 1), (0, 1)]),
            rat_vec(&[(1, 1), (0, 1)]),
            rat_vec(&[(0, 1), (1, 1)]),
        ];
        assert_eq!(affine_rank(&tri), 2);
        assert_eq!(affine_rank(&tri[..1]), 0);
    }

    #[test]
    fn square_solve() {
        let a = vec![rat_vec(&[(1, 1), (1, 1)]), rat_vec(&[(1, 1), (-1, 1)])];
        let x = solve_square(&a, &[rat(3, 1), rat(1, 1)]).unwrap();
        assert_eq!(x, rat_vec(&[(2, 1), (1, 1)]));
        let sing = vec![rat_vec(&[(1, 1), (2, 1)]), rat_vec(&[(2, 1), (4, 1)])];
        assert!(solve_square(&sing, &[rat(1, 1), rat(2, 1)]).is_none());
    }

    #[test]
    fn denominators_cleared() {
        let (v, l) = clear_denominators(&rat_vec(&[(2, 3), (1, 2)]));
        assert_eq!(v, int_vec(&[4, 3]));
        assert_eq!(l, BigInt::from(6));
    }
}
