use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{
    kernel_basis, rank, smith_normal_form, solve_integer_system, IntMatrix, IntVector, LinalgError,
};

/// Row-style Hermite normal form of the lattice spanned by `rows`.
///
/// Output rows are the nonzero rows: echelon shape, positive pivots, entries
/// above each pivot reduced into `[0, pivot)`. Two generating sets span the
/// same lattice iff their Hermite forms are equal.
pub fn hermite_normal_form(cols: usize, rows: &[IntVector]) -> Vec<IntVector> {
    let mut m: Vec<IntVector> = rows.to_vec();
    debug_assert!(m.iter().all(|r| r.len() == cols));
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        loop {
            let pivot = (r..m.len())
                .filter(|&i| !m[i][c].is_zero())
                .min_by(|&a, &b| m[a][c].abs().cmp(&m[b][c].abs()).then(a.cmp(&b)));
            let Some(p) = pivot else { break };
            m.swap(r, p);
            let mut done = true;
            for i in r + 1..m.len() {
                if m[i][c].is_zero() {
                    continue;
                }
                let q = m[i][c].div_floor(&m[r][c]);
                sub_multiple(&mut m, i, r, &q);
                done &= m[i][c].is_zero();
            }
            if done {
                break;
            }
        }
        if m[r][c].is_zero() {
            continue;
        }
        if m[r][c].is_negative() {
            for e in m[r].iter_mut() {
                *e = -std::mem::take(e);
            }
        }
        for i in 0..r {
            let q = m[i][c].div_floor(&m[r][c]);
            sub_multiple(&mut m, i, r, &q);
        }
        r += 1;
    }
    m.truncate(r);
    m
}

fn sub_multiple(m: &mut [IntVector], dst: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let (d, s) = if dst < src {
        let (a, b) = m.split_at_mut(src);
        (&mut a[dst], &b[0])
    } else {
        let (a, b) = m.split_at_mut(dst);
        (&mut b[0], &a[src])
    };
    for (x, y) in d.iter_mut().zip(s) {
        *x -= q * y;
    }
}

/// A sublattice of `Z^ambient`, stored as the rows of its Hermite normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeBasis {
    ambient: usize,
    rows: Vec<IntVector>,
}

impl LatticeBasis {
    /// Lattice generated by arbitrary (possibly dependent) vectors.
    pub fn from_generators(ambient: usize, gens: &[IntVector]) -> Self {
        Self {
            ambient,
            rows: hermite_normal_form(ambient, gens),
        }
    }

    /// Lattice with the given basis; the rows must be linearly independent.
    pub fn new(ambient: usize, rows: &[IntVector]) -> Result<Self, LinalgError> {
        if rows.iter().any(|r| r.len() != ambient) {
            return Err(LinalgError::DegenerateInput(
                "basis vector has the wrong length".into(),
            ));
        }
        if rank(rows) != rows.len() {
            return Err(LinalgError::DegenerateInput(
                "basis rows are linearly dependent".into(),
            ));
        }
        Ok(Self::from_generators(ambient, rows))
    }

    pub fn standard(ambient: usize) -> Self {
        Self::from_generators(ambient, &IntMatrix::identity(ambient).row_vectors())
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn vectors(&self) -> Vec<IntVector> {
        self.rows.clone()
    }

    pub fn as_rows(&self) -> &[IntVector] {
        &self.rows
    }

    pub fn matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(self.ambient, &self.rows)
    }

    /// Integer coordinates of `v` in this basis, if `v` lies in the lattice.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<IntVector> {
        solve_integer_system(&self.matrix().transpose(), v)
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coordinates(v).is_some()
    }

    /// True if `other` is a sublattice of `self`.
    pub fn contains_lattice(&self, other: &LatticeBasis) -> bool {
        other.rows.iter().all(|v| self.contains(v))
    }
}

/// Saturation `(R-span B) ∩ Z^n` of `b`, and the index of `b` inside it.
pub fn saturate_sublattice(b: &LatticeBasis) -> Result<(LatticeBasis, BigInt), LinalgError> {
    let n = b.ambient();
    if rank(b.as_rows()) != b.rank() {
        return Err(LinalgError::DegenerateInput(
            "sublattice rows are linearly dependent".into(),
        ));
    }
    let mat = b.matrix();
    // the integer vectors orthogonal to the integer kernel form the saturation
    let orth = kernel_basis(&mat);
    let sat = kernel_basis(&IntMatrix::from_rows(n, orth.as_rows()));
    let index = smith_normal_form(&mat)
        .diagonal()
        .into_iter()
        .filter(|d| !d.is_zero())
        .fold(BigInt::one(), |acc, d| acc * d);
    Ok((sat, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cokernel_invariants, int_vec};
    use proptest::prelude::*;

    #[test]
    fn hermite_canonical() {
        let h = hermite_normal_form(2, &[int_vec(&[2, 4]), int_vec(&[3, 5])]);
        assert_eq!(h, vec![int_vec(&[1, 1]), int_vec(&[0, 2])]);
        let h = hermite_normal_form(2, &[int_vec(&[-2, 1]), int_vec(&[4, -2])]);
        assert_eq!(h, vec![int_vec(&[2, -1])]);
        assert!(hermite_normal_form(3, &[int_vec(&[0, 0, 0])]).is_empty());
    }

    #[test]
    fn saturation_examples() {
        let b = LatticeBasis::new(2, &[int_vec(&[2, 0])]).unwrap();
        let (sat, idx) = saturate_sublattice(&b).unwrap();
        assert_eq!(sat.vectors(), vec![int_vec(&[1, 0])]);
        assert_eq!(idx, BigInt::from(2));

        let b = LatticeBasis::new(2, &[int_vec(&[1, 0])]).unwrap();
        let (sat, idx) = saturate_sublattice(&b).unwrap();
        assert_eq!(sat.vectors(), vec![int_vec(&[1, 0])]);
        assert!(idx.is_one());

        let b = LatticeBasis::new(2, &[int_vec(&[1, 1]), int_vec(&[1, -1])]).unwrap();
        let (sat, idx) = saturate_sublattice(&b).unwrap();
        assert_eq!(sat, LatticeBasis::standard(2));
        assert_eq!(idx, BigInt::from(2));
    }

    #[test]
    fn dependent_rows_rejected() {
        let err = LatticeBasis::new(2, &[int_vec(&[1, 2]), int_vec(&[2, 4])]).unwrap_err();
        assert!(matches!(err, LinalgError::DegenerateInput(_)));
    }

    #[test]
    fn membership() {
        let l = LatticeBasis::from_generators(2, &[int_vec(&[2, 0]), int_vec(&[1, 1])]);
        assert!(l.contains(&int_vec(&[3, 1])));
        assert!(!l.contains(&int_vec(&[1, 0])));
        assert!(LatticeBasis::standard(2).contains_lattice(&l));
        assert!(!l.contains_lattice(&LatticeBasis::standard(2)));
    }

    fn independent_rows() -> impl Strategy<Value = (usize, Vec<IntVector>)> {
        (1usize..=4, 1usize..=4)
            .prop_flat_map(|(k, extra)| {
                let n = k.max(extra);
                prop::collection::vec(-9i64..=9, k * n)
                    .prop_map(move |e| (n, e.chunks(n).map(int_vec).collect::<Vec<_>>()))
            })
            .prop_filter("independent", |(_, rows)| rank(rows) == rows.len())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn hermite_is_idempotent_and_span_preserving((n, rows) in independent_rows()) {
            let h = hermite_normal_form(n, &rows);
            prop_assert_eq!(hermite_normal_form(n, &h), h.clone());
            let l = LatticeBasis::from_generators(n, &rows);
            for r in &rows {
                prop_assert!(l.contains(r));
            }
        }

        #[test]
        fn saturation_index_matches_quotient((n, rows) in independent_rows()) {
            let b = LatticeBasis::new(n, &rows).unwrap();
            let (sat, index) = saturate_sublattice(&b).unwrap();
            prop_assert_eq!(sat.rank(), b.rank());
            // inclusion matrix: columns are coordinates of b's rows in the saturation basis
            let cols: Vec<IntVector> = b
                .as_rows()
                .iter()
                .map(|v| sat.coordinates(v).expect("b lies in its saturation"))
                .collect();
            let inc = IntMatrix::from_columns(sat.rank(), &cols);
            let inv = cokernel_invariants(&inc);
            prop_assert_eq!(inv.free_rank, 0);
            prop_assert_eq!(inv.torsion_order(), index);
            // saturated: saturating again changes nothing
            let (sat2, idx2) = saturate_sublattice(&sat).unwrap();
            prop_assert_eq!(sat2, sat);
            prop_assert!(idx2.is_one());
        }
    }
}
