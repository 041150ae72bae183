use std::collections::HashMap;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::ToricError;
use crate::cone::{double_description, Cone};
use crate::linalg::{
    dot, int_to_rat, kernel_basis, smith_normal_form, solve_square, IntMatrix, IntVector,
    LatticeBasis, Rational,
};

/// Largest ambient dimension for which Hilbert bases are enumerated.
pub const MAX_MONOID_DIM: usize = 4;
const MAX_BOX_POINTS: u128 = 4_000_000;

/// Generators of the monoid `σ^∨ ∩ Π*` of lattice points in a dual cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartMonoid {
    pub face: usize,
    /// Basis of `σ^⊥ ∩ Π*`, the largest subgroup of the monoid.
    pub perp_basis: Vec<IntVector>,
    /// Hilbert basis of the pointed part, lifted back to `Π*`.
    pub pointed_generators: Vec<IntVector>,
    /// `perp_basis`, then its negatives, then `pointed_generators`.
    pub all_generators: Vec<IntVector>,
    halfspaces: Vec<IntVector>,
    quotient: IntMatrix,
    quotient_halfspaces: Vec<IntVector>,
    pointed_quotient: Vec<IntVector>,
}

/// Monoid generators of `σ^∨ ∩ Z^n`, where `σ` is given in lattice
/// coordinates (so `Z^n` here is `Π*` in its dual basis).
pub fn monoid_generators(face: usize, sigma: &Cone) -> Result<ChartMonoid, ToricError> {
    let n = sigma.ambient_dim();
    if n > MAX_MONOID_DIM {
        return Err(ToricError::DimensionTooLarge {
            dim: n,
            max: MAX_MONOID_DIM,
        });
    }
    let halfspaces = sigma.rays();
    let perp = kernel_basis(&IntMatrix::from_rows(n, &halfspaces));
    let d = perp.rank();

    // x -> q = quotient * x identifies Z^n / perp with Z^(n-d); lift rows
    // give a section q -> q * lift.
    let (quotient, lift) = if d == 0 {
        (IntMatrix::identity(n), IntMatrix::identity(n))
    } else {
        let v = smith_normal_form(&perp.matrix()).v;
        let vinv = unimodular_inverse(&v);
        (
            IntMatrix::from_rows(n, &v.transpose().row_vectors()[d..]),
            IntMatrix::from_rows(n, &vinv.row_vectors()[d..]),
        )
    };
    let m = n - d;
    let lift_rows = lift.row_vectors();
    let quotient_halfspaces: Vec<IntVector> = halfspaces
        .iter()
        .map(|h| lift_rows.iter().map(|l| dot(h, l)).collect())
        .collect();

    let mut pointed: Vec<(IntVector, IntVector)> = hilbert_basis(m, &quotient_halfspaces)?
        .into_iter()
        .map(|q| {
            let x = lift.transpose().mul_vec(&q);
            (x, q)
        })
        .collect();
    pointed.sort();
    let (pointed_generators, pointed_quotient): (Vec<_>, Vec<_>) = pointed.into_iter().unzip();

    let perp_basis = perp.vectors();
    let mut all_generators = perp_basis.clone();
    all_generators.extend(
        perp_basis
            .iter()
            .map(|p| p.iter().map(|e| -e).collect::<IntVector>()),
    );
    all_generators.extend(pointed_generators.iter().cloned());

    Ok(ChartMonoid {
        face,
        perp_basis,
        pointed_generators,
        all_generators,
        halfspaces,
        quotient,
        quotient_halfspaces,
        pointed_quotient,
    })
}

fn unimodular_inverse(m: &IntMatrix) -> IntMatrix {
    let n = m.rows();
    let rows: Vec<Vec<Rational>> = m.row_vectors().iter().map(|r| int_to_rat(r)).collect();
    let cols: Vec<IntVector> = (0..n)
        .map(|j| {
            let e: Vec<Rational> = (0..n)
                .map(|i| Rational::from_integer(BigInt::from((i == j) as i64)))
                .collect();
            solve_square(&rows, &e)
                .expect("unimodular matrix is invertible")
                .into_iter()
                .map(|r| r.to_integer())
                .collect()
        })
        .collect();
    IntMatrix::from_columns(n, &cols)
}

fn in_cone(halfspaces: &[IntVector], x: &[BigInt]) -> bool {
    halfspaces.iter().all(|h| !dot(h, x).is_negative())
}

/// Hilbert basis of the pointed cone `{q in Z^m : <h, q> >= 0}`.
///
/// Every irreducible element lies in the zonotope spanned by the extreme
/// rays, so candidates are the cone points in its bounding box; a candidate
/// is reducible iff some other candidate lies below it in the cone order.
fn hilbert_basis(m: usize, halfspaces: &[IntVector]) -> Result<Vec<IntVector>, ToricError> {
    if m == 0 {
        return Ok(Vec::new());
    }
    let rays = double_description(m, halfspaces).rays;
    debug_assert!(double_description(m, halfspaces).lineality.is_empty());
    let mut lo = vec![0i64; m];
    let mut hi = vec![0i64; m];
    for r in &rays {
        for k in 0..m {
            let e = r[k].to_i64().expect("ray entries fit in i64");
            if e < 0 {
                lo[k] += e;
            } else {
                hi[k] += e;
            }
        }
    }
    let points: u128 = (0..m).map(|k| (hi[k] - lo[k] + 1) as u128).product();
    if points > MAX_BOX_POINTS {
        return Err(ToricError::EnumerationTooLarge { points });
    }
    let candidates: Vec<IntVector> = (0..m)
        .map(|k| lo[k]..=hi[k])
        .multi_cartesian_product()
        .filter(|q| q.iter().any(|&e| e != 0))
        .map(|q| q.into_iter().map(BigInt::from).collect::<IntVector>())
        .filter(|q| in_cone(halfspaces, q))
        .collect();
    let irreducible = candidates
        .iter()
        .filter(|y| {
            !candidates.iter().any(|s| {
                s != *y && {
                    let diff: IntVector = y.iter().zip(s).map(|(a, b)| a - b).collect();
                    in_cone(halfspaces, &diff)
                }
            })
        })
        .cloned()
        .collect();
    Ok(irreducible)
}

impl ChartMonoid {
    pub fn ambient_dim(&self) -> usize {
        self.quotient.cols()
    }

    pub fn len(&self) -> usize {
        self.all_generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all_generators.is_empty()
    }

    /// Inequalities `<x, h> >= 0` cutting out the dual cone.
    pub fn halfspaces(&self) -> &[IntVector] {
        &self.halfspaces
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        in_cone(&self.halfspaces, x)
    }

    /// Whether `x` lies in `σ^⊥`.
    pub fn in_perp(&self, x: &[BigInt]) -> bool {
        self.halfspaces.iter().all(|h| dot(h, x).is_zero())
    }

    /// Indices of generators lying in `σ^⊥`.
    pub fn perp_generator_ids(&self) -> std::ops::Range<usize> {
        0..2 * self.perp_basis.len()
    }

    /// Nonnegative integer coefficients over `all_generators` summing to `x`,
    /// or `None` if `x` is not in the monoid.
    pub fn decompose(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        if x.len() != self.ambient_dim() || !self.contains(x) {
            return None;
        }
        let q = self.quotient.mul_vec(x);
        let mut memo = HashMap::new();
        let counts = self.decompose_pointed(&q, &mut memo)?;
        let mut residual: IntVector = x.to_vec();
        for (c, g) in counts.iter().zip(&self.pointed_generators) {
            for (r, e) in residual.iter_mut().zip(g) {
                *r -= c * e;
            }
        }
        let d = self.perp_basis.len();
        let mut coeffs = vec![BigInt::zero(); 2 * d];
        if d > 0 {
            let perp = LatticeBasis::from_generators(self.ambient_dim(), &self.perp_basis);
            let a = perp.coordinates(&residual)?;
            // perp_basis is already in Hermite form, so coordinates line up
            for (k, ak) in a.into_iter().enumerate() {
                if ak.is_negative() {
                    coeffs[d + k] = -ak;
                } else {
                    coeffs[k] = ak;
                }
            }
        } else if residual.iter().any(|e| !e.is_zero()) {
            return None;
        }
        coeffs.extend(counts);
        Some(coeffs)
    }

    fn decompose_pointed(
        &self,
        q: &IntVector,
        memo: &mut HashMap<IntVector, Option<Vec<BigInt>>>,
    ) -> Option<Vec<BigInt>> {
        if q.iter().all(Zero::is_zero) {
            return Some(vec![BigInt::zero(); self.pointed_quotient.len()]);
        }
        if let Some(hit) = memo.get(q) {
            return hit.clone();
        }
        let mut found = None;
        for (k, g) in self.pointed_quotient.iter().enumerate() {
            let rest: IntVector = q.iter().zip(g).map(|(a, b)| a - b).collect();
            if !in_cone(&self.quotient_halfspaces, &rest) {
                continue;
            }
            if let Some(mut c) = self.decompose_pointed(&rest, memo) {
                c[k] += 1;
                found = Some(c);
                break;
            }
        }
        memo.insert(q.clone(), found.clone());
        found
    }

    /// Integer relations `a` with `Σ a_g g = 0` among `all_generators`.
    pub fn relations(&self) -> Vec<IntVector> {
        if self.all_generators.is_empty() {
            return Vec::new();
        }
        kernel_basis(&IntMatrix::from_columns(
            self.ambient_dim(),
            &self.all_generators,
        ))
        .vectors()
    }

    /// Exponent table `<g, u_j>` for each generator `g` against the given
    /// normals (in lattice coordinates).
    pub fn exponents(&self, normal_coords: &[IntVector]) -> Vec<Vec<i64>> {
        self.all_generators
            .iter()
            .map(|g| {
                normal_coords
                    .iter()
                    .map(|u| dot(g, u).to_i64().expect("exponent fits in i64"))
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int_vec;
    use proptest::prelude::*;

    fn cone(gens: &[&[i64]]) -> Cone {
        let n = gens.first().map_or(2, |g| g.len());
        Cone::from_rays(n, &gens.iter().map(|g| int_vec(g)).collect::<Vec<_>>())
    }

    /// Independent oracle: all cone points in a box, minus sums of two
    /// nonzero cone points.
    fn brute_hilbert(h: &[IntVector], bound: i64) -> Vec<IntVector> {
        let pts: Vec<IntVector> = (-bound..=bound)
            .cartesian_product(-bound..=bound)
            .map(|(a, b)| int_vec(&[a, b]))
            .filter(|p| !p.iter().all(Zero::is_zero) && in_cone(h, p))
            .collect();
        let mut out: Vec<IntVector> = pts
            .iter()
            .filter(|y| {
                !pts.iter().any(|a| {
                    let b: IntVector = y.iter().zip(a).map(|(s, t)| s - t).collect();
                    !b.iter().all(Zero::is_zero) && in_cone(h, &b)
                })
            })
            .cloned()
            .collect();
        out.sort();
        out
    }

    #[test]
    fn smooth_quadrant() {
        let m = monoid_generators(0, &cone(&[&[1, 0], &[0, 1]])).unwrap();
        assert!(m.perp_basis.is_empty());
        assert_eq!(m.all_generators, vec![int_vec(&[0, 1]), int_vec(&[1, 0])]);
    }

    #[test]
    fn a1_singular_cone() {
        let c = cone(&[&[1, 0], &[1, 2]]);
        let m = monoid_generators(0, &c).unwrap();
        let mut gens = m.all_generators.clone();
        gens.sort();
        assert_eq!(
            gens,
            vec![int_vec(&[0, 1]), int_vec(&[1, 0]), int_vec(&[2, -1])]
        );
        assert_eq!(gens, brute_hilbert(c.rays().as_slice(), 6));
        // 2 * (1,0) = (2,-1) + (0,1)
        assert_eq!(m.relations().len(), 1);
    }

    #[test]
    fn zero_cone_gives_lattice_basis() {
        let m = monoid_generators(0, &Cone::origin(2)).unwrap();
        assert_eq!(m.perp_basis, vec![int_vec(&[1, 0]), int_vec(&[0, 1])]);
        assert!(m.pointed_generators.is_empty());
        assert_eq!(m.all_generators.len(), 4);
        assert!(m.all_generators.contains(&int_vec(&[0, -1])));
    }

    #[test]
    fn ray_in_plane() {
        // σ = cone((1,2)): σ^⊥ spanned by (2,-1), pointed part one generator
        let m = monoid_generators(0, &cone(&[&[1, 2]])).unwrap();
        assert_eq!(m.perp_basis, vec![int_vec(&[2, -1])]);
        assert_eq!(m.pointed_generators.len(), 1);
        let g = &m.pointed_generators[0];
        assert_eq!(dot(g, &int_vec(&[1, 2])), BigInt::from(1));
    }

    #[test]
    fn non_simplicial_cone() {
        let c = cone(&[&[1, 1, 1], &[1, 1, -1], &[1, -1, 1], &[1, -1, -1]]);
        let m = monoid_generators(0, &c).unwrap();
        for g in &m.all_generators {
            assert!(m.contains(g));
        }
        assert!(m.all_generators.len() >= 4);
    }

    #[test]
    fn dimension_cap() {
        let big = Cone::origin(5);
        assert_eq!(
            monoid_generators(0, &big),
            Err(ToricError::DimensionTooLarge { dim: 5, max: 4 })
        );
    }

    #[test]
    fn decomposition_examples() {
        let m = monoid_generators(0, &cone(&[&[1, 0], &[1, 2]])).unwrap();
        let c = m.decompose(&int_vec(&[3, 1])).unwrap();
        let sum: IntVector = (0..2)
            .map(|k| {
                c.iter()
                    .zip(&m.all_generators)
                    .map(|(a, g)| a * &g[k])
                    .sum::<BigInt>()
            })
            .collect();
        assert_eq!(sum, int_vec(&[3, 1]));
        assert!(m.decompose(&int_vec(&[-1, 0])).is_none());

        let whole = monoid_generators(0, &Cone::origin(2)).unwrap();
        let c = whole.decompose(&int_vec(&[-2, 3])).unwrap();
        assert_eq!(c, int_vec(&[0, 3, 2, 0]));
    }

    fn small_cone() -> impl Strategy<Value = Vec<IntVector>> {
        prop::collection::vec(prop::collection::vec(-3i64..=3, 2), 1..4)
            .prop_map(|v| v.iter().map(|r| int_vec(r)).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]

        #[test]
        fn hilbert_basis_matches_brute_force(gens in small_cone()) {
            let c = Cone::from_rays(2, &gens);
            let m = monoid_generators(0, &c).unwrap();
            let hs = c.rays();
            for g in &m.all_generators {
                prop_assert!(m.contains(g));
            }
            if c.is_pointed() && c.dimension() == 2 {
                let mut got = m.all_generators.clone();
                got.sort();
                prop_assert_eq!(got, brute_hilbert(&hs, 8));
            }
            // every lattice point of the dual cone in a box decomposes
            for a in -5i64..=5 {
                for b in -5i64..=5 {
                    let x = int_vec(&[a, b]);
                    if m.contains(&x) {
                        let coeffs = m.decompose(&x);
                        prop_assert!(coeffs.is_some(), "{:?} not decomposed", x);
                        let coeffs = coeffs.unwrap();
                        prop_assert!(coeffs.iter().all(|c| !c.is_negative()));
                        for k in 0..2 {
                            let s: BigInt = coeffs.iter().zip(&m.all_generators).map(|(c, g)| c * &g[k]).sum();
                            prop_assert_eq!(&s, &x[k]);
                        }
                    }
                }
            }
        }
    }
}
