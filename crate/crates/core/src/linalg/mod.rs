//! Exact integer and rational linear algebra.
//!
//! Everything here works over arbitrary-precision integers ([`BigInt`]) or
//! canonical rationals ([`Rational`]), so no operation can overflow or round.
//! The lattice algorithms (Smith and Hermite normal forms, integer kernels,
//! saturation, cokernel invariants) are the computational backbone of the
//! exact sequence `0 -> L -> Z^p -> Pi -> 0` built in [`crate::delzant`].

mod hermite;
mod matrix;
mod rational;
mod smith;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

pub use hermite::{hermite_normal_form, saturate_sublattice, LatticeBasis};
pub use matrix::IntMatrix;
pub use rational::{affine_rank, clear_denominators, rank, rank_rational, solve_square, RatMatrix};
pub use smith::{
    cokernel_invariants, kernel_basis, smith_normal_form, solve_integer_system, CokernelInvariants,
    SmithDecomposition,
};

pub type Rational = BigRational;
pub type IntVector = Vec<BigInt>;
pub type RatVector = Vec<Rational>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

/// Divides `v` by the gcd of its entries. The sign is kept.
pub fn primitive_vector(v: &[BigInt]) -> Result<IntVector, LinalgError> {
    let g = content(v);
    if g.is_zero() {
        return Err(LinalgError::DegenerateInput(
            "zero vector has no primitive direction".into(),
        ));
    }
    Ok(v.iter().map(|e| e / &g).collect())
}

/// Gcd of the entries (zero for the zero vector).
pub fn content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, e| g.gcd(e))
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_rat_int(a: &[Rational], b: &[BigInt]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn int_vec(v: &[i64]) -> IntVector {
    v.iter().map(|&e| BigInt::from(e)).collect()
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_vec(v: &[(i64, i64)]) -> RatVector {
    v.iter().map(|&(n, d)| rat(n, d)).collect()
}

pub fn int_to_rat(v: &[BigInt]) -> RatVector {
    v.iter()
        .map(|e| Rational::from_integer(e.clone()))
        .collect()
}

pub fn int_to_f64(e: &BigInt) -> f64 {
    e.to_f64().unwrap_or(f64::NAN)
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    // to_f64 on BigRational handles huge numerators/denominators gracefully.
    r.to_f64()
        .unwrap_or_else(|| int_to_f64(r.numer()) / int_to_f64(r.denom()))
}

/// Parses `"p/q"` or `"p"` into a canonical rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => Some(Rational::from_integer(s.parse().ok()?)),
    }
}

/// Formats a rational as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Columns of `m` chosen greedily so that each has a component of relative
/// size above `rel` orthogonal to the previous ones, with the smallest such
/// relative size seen among the chosen columns.
pub fn independent_columns(m: &nalgebra::DMatrix<f64>, rel: f64) -> (Vec<usize>, f64) {
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::new();
    let mut keep = Vec::new();
    let mut smallest = f64::INFINITY;
    for j in 0..m.ncols() {
        let col = m.column(j).into_owned();
        let scale = col.norm();
        if scale == 0.0 {
            continue;
        }
        let mut r = col;
        // reorthogonalize once
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&r);
                r.axpy(-c, q, 1.0);
            }
        }
        let norm = r.norm();
        if norm > rel * scale {
            smallest = smallest.min(norm / scale);
            basis.push(r / norm);
            keep.push(j);
        }
    }
    (keep, smallest)
}

/// Least-squares solution of `m c = rhs` in doubles, solved by QR on a
/// maximal set of independent columns; the remaining coefficients are zero.
pub fn least_squares(
    m: &nalgebra::DMatrix<f64>,
    rhs: &nalgebra::DMatrix<f64>,
) -> nalgebra::DMatrix<f64> {
    let (keep, _) = independent_columns(m, 1e-10);
    let mut out = nalgebra::DMatrix::zeros(m.ncols(), rhs.ncols());
    if keep.is_empty() {
        return out;
    }
    let qr = m.select_columns(&keep).qr();
    let y = qr.q().transpose() * rhs;
    let c = qr
        .r()
        .solve_upper_triangular(&y)
        .expect("selected columns are independent");
    for (r, &j) in keep.iter().enumerate() {
        out.set_row(j, &c.row(r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn least_squares_on_wide_full_rank_matrix() {
        let rows: [[f64; 8]; 7] = [
            [-1., -1., -1., 1., 0., 0., 0., 0.],
            [-1., -1., 1., 0., 1., 0., 0., 0.],
            [-1., 1., -1., 0., 0., 1., 0., 0.],
            [1., -1., -1., 0., 0., 0., 0., 1.],
            [1., -1., 1., 0., 0., 1., 1., -1.],
            [1., 1., -1., 0., 1., 0., 1., -1.],
            [1., 1., 1., 1., 0., 0., -1., 1.],
        ];
        let m = nalgebra::DMatrix::from_fn(7, 8, |r, c| rows[r][c]);
        let b = nalgebra::DMatrix::from_fn(7, 1, |r, _| (r as f64 * 1.7).sin());
        let c = least_squares(&m, &b);
        assert!((&m * c - &b).amax() < 1e-12);
        assert_eq!(independent_columns(&m, 1e-8).0.len(), 7);
    }

    #[test]
    fn least_squares_on_dependent_columns() {
        let m = nalgebra::DMatrix::from_row_slice(3, 3, &[1., 2., 0., 1., 2., 1., 0., 0., 1.]);
        let b = nalgebra::DMatrix::from_column_slice(3, 1, &[1., 0., 0.]);
        let c = least_squares(&m, &b);
        // best fit in the span of e1+e2 and e2+e3
        let r = &m * c - &b;
        assert!((r[(0, 0)] + 1.0 / 3.0).abs() < 1e-12);
        assert!((r[(1, 0)] - 1.0 / 3.0).abs() < 1e-12);
        assert!((r[(2, 0)] + 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(independent_columns(&m, 1e-8).0, vec![0, 2]);
    }

    #[test]
    fn primitive_vector_examples() {
        assert_eq!(
            primitive_vector(&int_vec(&[2, 4, 6])).unwrap(),
            int_vec(&[1, 2, 3])
        );
        assert_eq!(primitive_vector(&int_vec(&[5])).unwrap(), int_vec(&[1]));
        assert_eq!(
            primitive_vector(&int_vec(&[-3, 6])).unwrap(),
            int_vec(&[-1, 2])
        );
        assert!(matches!(
            primitive_vector(&int_vec(&[0, 0])),
            Err(LinalgError::DegenerateInput(_))
        ));
    }

    #[test]
    fn rational_strings() {
        assert_eq!(parse_rational("2/3"), Some(rat(2, 3)));
        assert_eq!(parse_rational(" -4/6 "), Some(rat(-2, 3)));
        assert_eq!(parse_rational("7"), Some(rat(7, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        assert_eq!(format_rational(&rat(-6, 4)), "-3/2");
        assert_eq!(format_rational(&rat(8, 4)), "2");
    }

    proptest! {
        #[test]
        fn primitive_vector_is_idempotent(v in prop::collection::vec(-50i64..50, 1..6)) {
            prop_assume!(v.iter().any(|&e| e != 0));
            let p = primitive_vector(&int_vec(&v)).unwrap();
            prop_assert!(content(&p).is_one());
            prop_assert_eq!(primitive_vector(&p).unwrap(), p.clone());
            // direction preserved: v is a positive multiple of p
            let g = content(&int_vec(&v));
            let scaled: IntVector = p.iter().map(|e| e * &g).collect();
            prop_assert_eq!(scaled, int_vec(&v));
        }
    }
}
