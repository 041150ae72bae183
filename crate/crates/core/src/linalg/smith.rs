use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{IntMatrix, IntVector, LatticeBasis};

/// `U * A * V = D` with `U`, `V` unimodular and `D` diagonal with
/// `d_1 | d_2 | ... | d_r`, all nonnegative, zeros trailing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithDecomposition {
    /// The diagonal entries `d_1, ..., d_min(m,n)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d[(i, i)].clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().take_while(|d| !d.is_zero()).count()
    }
}

/// Smith normal form by repeated Euclidean elimination.
///
/// Pivot: nonzero entry of smallest absolute value in the trailing
/// submatrix, ties broken by lowest (row, col).
pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);

    for t in 0..m.min(n) {
        loop {
            let Some((pi, pj)) = smallest_pivot(&d, t) else {
                return finish(u, d, v);
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..m {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = -d[(i, t)].div_floor(&d[(t, t)]);
                d.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                clean &= d[(i, t)].is_zero();
            }
            for j in t + 1..n {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = -d[(t, j)].div_floor(&d[(t, t)]);
                d.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                clean &= d[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }

            // Enforce d_t | every remaining entry.
            let offender =
                (t + 1..m).find(|&i| (t + 1..n).any(|j| !d[(i, j)].is_multiple_of(&d[(t, t)])));
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    d.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    finish(u, d, v)
}

fn finish(u: IntMatrix, d: IntMatrix, v: IntMatrix) -> SmithDecomposition {
    SmithDecomposition { u, d, v }
}

fn smallest_pivot(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, BigInt)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            let e = d[(i, j)].abs();
            if e.is_zero() {
                continue;
            }
            if best.as_ref().is_none_or(|(_, _, b)| e < *b) {
                best = Some((i, j, e));
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

/// Basis of the integer kernel `{x in Z^n : A x = 0}`, in Hermite form.
pub fn kernel_basis(a: &IntMatrix) -> LatticeBasis {
    let n = a.cols();
    let snf = smith_normal_form(a);
    let r = snf.rank();
    let gens: Vec<IntVector> = (r..n).map(|j| snf.v.col(j)).collect();
    LatticeBasis::from_generators(n, &gens)
}

/// Invariants of `Z^m / (column span of A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CokernelInvariants {
    /// Invariant factors greater than one, in divisibility order.
    pub torsion: Vec<BigInt>,
    pub free_rank: usize,
}

impl CokernelInvariants {
    pub fn is_trivial(&self) -> bool {
        self.torsion.is_empty() && self.free_rank == 0
    }

    /// Order of the torsion part.
    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().product()
    }
}

pub fn cokernel_invariants(a: &IntMatrix) -> CokernelInvariants {
    let snf = smith_normal_form(a);
    let r = snf.rank();
    CokernelInvariants {
        torsion: snf
            .diagonal()
            .into_iter()
            .take(r)
            .filter(|d| !d.is_one())
            .collect(),
        free_rank: a.rows() - r,
    }
}

/// Some integer solution of `A x = b`, or `None` if none exists over Z.
pub fn solve_integer_system(a: &IntMatrix, b: &[BigInt]) -> Option<IntVector> {
    smith_normal_form(a).solve(b)
}

impl SmithDecomposition {
    /// Some integer solution of `A x = b` for the decomposed `A`.
    pub fn solve(&self, b: &[BigInt]) -> Option<IntVector> {
        assert_eq!(self.u.cols(), b.len(), "right-hand side length mismatch");
        let r = self.rank();
        let ub = self.u.mul_vec(b);
        if ub[r..].iter().any(|e| !e.is_zero()) {
            return None;
        }
        let mut y = vec![BigInt::zero(); self.v.rows()];
        for i in 0..r {
            let di = &self.d[(i, i)];
            if !ub[i].is_multiple_of(di) {
                return None;
            }
            y[i] = &ub[i] / di;
        }
        Some(self.v.mul_vec(&y))
    }
}
