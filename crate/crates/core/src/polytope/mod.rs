//! Exact H-representation polytopes `{x : <x, u_i> >= λ_i}` with primitive
//! integer inward normals.

mod faces;

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::cone::Cone;
use crate::linalg::{
    affine_rank, clear_denominators, content, dot_rat_int, format_rational, int_to_rat,
    solve_square, IntMatrix, IntVector, RatVector, Rational,
};

pub use faces::{build_face_lattice, relative_interior_point, Face, FaceLattice};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolytopeError {
    #[error("no inequalities given")]
    NoInequalities,
    #[error("inequality {index} has {found} coefficients, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("inequality {index} has a zero normal vector")]
    ZeroNormal { index: usize },
    #[error("the polyhedron is unbounded (recession direction {direction:?})")]
    Unbounded { direction: Vec<String> },
    #[error("the polytope is empty")]
    EmptyPolytope,
    #[error("the polytope has dimension {dim}, expected {expected}")]
    LowerDimensional { dim: usize, expected: usize },
}

/// One facet inequality `<x, normal> >= offset`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Facet {
    pub normal: IntVector,
    pub offset: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HPolytope {
    dim: usize,
    facets: Vec<Facet>,
}

/// What [`normalize_h_rep_logged`] did to the raw input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormalizationAction {
    /// Raw inequality `index` was multiplied by the positive `factor`.
    Scaled { index: usize, factor: Rational },
    /// Raw inequality `dropped` had the same normal as `kept` and a weaker offset.
    MergedDuplicate { kept: usize, dropped: usize },
    /// Raw inequality `index` does not support a facet.
    DroppedRedundant { index: usize },
}

impl fmt::Display for NormalizationAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Scaled { index, factor } => {
                write!(
                    f,
                    "inequality {index}: scaled by {}",
                    format_rational(factor)
                )
            }
            Self::MergedDuplicate { kept, dropped } => write!(
                f,
                "inequality {dropped}: duplicate normal of inequality {kept}, weaker offset dropped"
            ),
            Self::DroppedRedundant { index } => {
                write!(f, "inequality {index}: redundant, dropped")
            }
        }
    }
}

/// Normalizes raw inequalities `<x, a> >= b` into a valid [`HPolytope`].
pub fn normalize_h_rep(raw: &[(RatVector, Rational)]) -> Result<HPolytope, PolytopeError> {
    normalize_h_rep_logged(raw).map(|(p, _)| p)
}

pub fn normalize_h_rep_logged(
    raw: &[(RatVector, Rational)],
) -> Result<(HPolytope, Vec<NormalizationAction>), PolytopeError> {
    let dim = raw.first().ok_or(PolytopeError::NoInequalities)?.0.len();
    let mut log = Vec::new();

    // primitive integer normals, keyed by normal; value = (raw index, offset)
    let mut by_normal: BTreeMap<IntVector, (usize, Rational)> = BTreeMap::new();
    for (index, (a, b)) in raw.iter().enumerate() {
        if a.len() != dim {
            return Err(PolytopeError::DimensionMismatch {
                index,
                expected: dim,
                found: a.len(),
            });
        }
        let (ints, lcm) = clear_denominators(a);
        let g = content(&ints);
        if g.is_zero() {
            return Err(PolytopeError::ZeroNormal { index });
        }
        let normal: IntVector = ints.iter().map(|e| e / &g).collect();
        let factor = Rational::new(lcm, g);
        let offset = b * &factor;
        if factor != Rational::from_integer(1.into()) {
            log.push(NormalizationAction::Scaled { index, factor });
        }
        match by_normal.get_mut(&normal) {
            Some((kept, kept_offset)) => {
                if offset > *kept_offset {
                    log.push(NormalizationAction::MergedDuplicate {
                        kept: index,
                        dropped: *kept,
                    });
                    *kept = index;
                    *kept_offset = offset;
                } else {
                    log.push(NormalizationAction::MergedDuplicate {
                        kept: *kept,
                        dropped: index,
                    });
                }
            }
            None => {
                by_normal.insert(normal, (index, offset));
            }
        }
    }

    let candidates: Vec<(usize, Facet)> = by_normal
        .into_iter()
        .map(|(normal, (index, offset))| (index, Facet { normal, offset }))
        .collect();
    let facets: Vec<Facet> = candidates.iter().map(|(_, f)| f.clone()).collect();

    let normals: Vec<IntVector> = facets.iter().map(|f| f.normal.clone()).collect();
    let recession = Cone::from_halfspaces(dim, &normals);
    if let Some(dir) = recession.rays().first() {
        return Err(PolytopeError::Unbounded {
            direction: dir.iter().map(|e| e.to_string()).collect(),
        });
    }

    let vertices = vertices_of(dim, &facets);
    if vertices.is_empty() {
        return Err(PolytopeError::EmptyPolytope);
    }
    let d = affine_rank(&vertices);
    if d < dim {
        return Err(PolytopeError::LowerDimensional {
            dim: d,
            expected: dim,
        });
    }

    let mut kept = Vec::new();
    for (index, facet) in candidates {
        let tight: Vec<RatVector> = vertices
            .iter()
            .filter(|v| facet.slack(v).is_zero())
            .cloned()
            .collect();
        if !tight.is_empty() && affine_rank(&tight) + 1 == dim {
            kept.push(facet);
        } else {
            log.push(NormalizationAction::DroppedRedundant { index });
        }
    }
    kept.sort();
    Ok((HPolytope { dim, facets: kept }, log))
}

/// All vertices of `{x : <x, u_i> >= λ_i}` by solving every `dim`-subset of
/// facets exactly; deduplicated and sorted lexicographically.
fn vertices_of(dim: usize, facets: &[Facet]) -> Vec<RatVector> {
    let mut out: Vec<RatVector> = Vec::new();
    for subset in (0..facets.len()).combinations(dim) {
        let a: Vec<RatVector> = subset
            .iter()
            .map(|&i| int_to_rat(&facets[i].normal))
            .collect();
        let b: Vec<Rational> = subset.iter().map(|&i| facets[i].offset.clone()).collect();
        let Some(x) = solve_square(&a, &b) else {
            continue;
        };
        if facets.iter().all(|f| !f.slack(&x).is_negative()) {
            out.push(x);
        }
    }
    out.sort();
    out.dedup();
    out
}

impl Facet {
    /// `<x, normal> - offset`; nonnegative exactly on the feasible side.
    pub fn slack(&self, x: &[Rational]) -> Rational {
        dot_rat_int(x, &self.normal) - &self.offset
    }
}

impl HPolytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn normals(&self) -> Vec<IntVector> {
        self.facets.iter().map(|f| f.normal.clone()).collect()
    }

    pub fn offsets(&self) -> Vec<Rational> {
        self.facets.iter().map(|f| f.offset.clone()).collect()
    }

    /// The `dim x p` matrix whose columns are the facet normals.
    pub fn normal_matrix(&self) -> IntMatrix {
        IntMatrix::from_columns(self.dim, &self.normals())
    }

    /// Facet slacks `<x, u_i> - λ_i` for every facet, in facet order.
    pub fn slacks(&self, x: &[Rational]) -> Vec<Rational> {
        self.facets.iter().map(|f| f.slack(x)).collect()
    }

    /// `Ok(())` if `x` lies in the polytope, else the first violated facet.
    pub fn check_contains(&self, x: &[Rational]) -> Result<(), usize> {
        match self.facets.iter().position(|f| f.slack(x).is_negative()) {
            Some(i) => Err(i),
            None => Ok(()),
        }
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.check_contains(x).is_ok()
    }

    /// Indices of the facets tight at `x`.
    pub fn active_set(&self, x: &[Rational]) -> Vec<usize> {
        (0..self.facets.len())
            .filter(|&i| self.facets[i].slack(x).is_zero())
            .collect()
    }

    /// The raw form accepted by [`normalize_h_rep`].
    pub fn to_raw(&self) -> Vec<(RatVector, Rational)> {
        self.facets
            .iter()
            .map(|f| (int_to_rat(&f.normal), f.offset.clone()))
            .collect()
    }

    /// Canonical text used for hashing: `dim|u;λ|u;λ...`.
    pub fn canonical_text(&self) -> String {
        let mut s = self.dim.to_string();
        for f in &self.facets {
            s.push('|');
            s.push_str(&f.normal.iter().map(BigInt::to_string).join(","));
            s.push(';');
            s.push_str(&format_rational(&f.offset));
        }
        s
    }

    /// Exact bounding box `(lo, hi)` of the vertex set.
    pub fn bounding_box(&self) -> (RatVector, RatVector) {
        let vs = enumerate_vertices(self);
        let lo = (0..self.dim)
            .map(|k| vs.iter().map(|v| v[k].clone()).min().expect("nonempty"))
            .collect();
        let hi = (0..self.dim)
            .map(|k| vs.iter().map(|v| v[k].clone()).max().expect("nonempty"))
            .collect();
        (lo, hi)
    }
}

pub fn enumerate_vertices(p: &HPolytope) -> Vec<RatVector> {
    vertices_of(p.dim, &p.facets)
}

/// Convenience constructors for the polytopes used throughout the tests and
/// examples.
pub mod corpus {
    use super::*;
    use crate::linalg::{rat, rat_vec};

    fn build(rows: &[(&[i64], (i64, i64))]) -> HPolytope {
        let raw: Vec<(RatVector, Rational)> = rows
            .iter()
            .map(|(a, (n, d))| (a.iter().map(|&e| rat(e, 1)).collect(), rat(*n, *d)))
            .collect();
        normalize_h_rep(&raw).expect("corpus polytope is valid")
    }

    /// `[0, 1]`.
    pub fn interval() -> HPolytope {
        build(&[(&[1], (0, 1)), (&[-1], (-1, 1))])
    }

    /// `[0, 1]^2`.
    pub fn square() -> HPolytope {
        build(&[
            (&[1, 0], (0, 1)),
            (&[0, 1], (0, 1)),
            (&[-1, 0], (-1, 1)),
            (&[0, -1], (-1, 1)),
        ])
    }

    /// `{x >= 0, y >= 0, x + y <= 1}`.
    pub fn simplex() -> HPolytope {
        build(&[(&[1, 0], (0, 1)), (&[0, 1], (0, 1)), (&[-1, -1], (-1, 1))])
    }

    /// `{x >= 0, y >= 0, x + 2y <= 2}`, normals `(1,0), (0,1), (-1,-2)`.
    pub fn weighted_triangle() -> HPolytope {
        build(&[(&[1, 0], (0, 1)), (&[0, 1], (0, 1)), (&[-1, -2], (-2, 1))])
    }

    /// `|x| + |y| + |z| <= 1`.
    pub fn octahedron() -> HPolytope {
        let mut rows = Vec::new();
        for s in [[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]] {
            rows.push((rat_vec(&[(-s[0], 1), (-s[1], 1), (-s[2], 1)]), rat(-1, 1)));
            rows.push((rat_vec(&[(s[0], 1), (s[1], 1), (s[2], 1)]), rat(-1, 1)));
        }
        normalize_h_rep(&rows).expect("octahedron is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int_vec, rat, rat_vec};
    use proptest::prelude::*;

    type Row<'a> = (&'a [(i64, i64)], (i64, i64));

    fn raw(rows: &[Row]) -> Vec<(RatVector, Rational)> {
        rows.iter()
            .map(|(a, (n, d))| (rat_vec(a), rat(*n, *d)))
            .collect()
    }

    #[test]
    fn interval_normalization() {
        let p = normalize_h_rep(&raw(&[(&[(1, 1)], (0, 1)), (&[(-1, 1)], (-1, 1))])).unwrap();
        assert_eq!(p.num_facets(), 2);
        // lexicographic facet order puts the normal -1 first
        assert_eq!(
            p.facets()[0],
            Facet {
                normal: int_vec(&[-1]),
                offset: rat(-1, 1)
            }
        );
        assert_eq!(
            p.facets()[1],
            Facet {
                normal: int_vec(&[1]),
                offset: rat(0, 1)
            }
        );
    }

    #[test]
    fn rational_normals_are_scaled() {
        let (p, log) =
            normalize_h_rep_logged(&raw(&[(&[(2, 3)], (1, 3)), (&[(-1, 1)], (-1, 1))])).unwrap();
        assert!(p.facets().contains(&Facet {
            normal: int_vec(&[1]),
            offset: rat(1, 2)
        }));
        assert!(p.facets().contains(&Facet {
            normal: int_vec(&[-1]),
            offset: rat(-1, 1)
        }));
        assert_eq!(
            log,
            vec![NormalizationAction::Scaled {
                index: 0,
                factor: rat(3, 2)
            }]
        );
    }

    #[test]
    fn redundant_inequality_dropped() {
        let (p, log) = normalize_h_rep_logged(&raw(&[
            (&[(1, 1), (0, 1)], (0, 1)),
            (&[(0, 1), (1, 1)], (0, 1)),
            (&[(-1, 1), (0, 1)], (-1, 1)),
            (&[(0, 1), (-1, 1)], (-1, 1)),
            (&[(1, 1), (1, 1)], (-1, 1)),
        ]))
        .unwrap();
        assert_eq!(p.num_facets(), 4);
        assert!(log.contains(&NormalizationAction::DroppedRedundant { index: 4 }));
        // a supporting hyperplane through a single vertex is redundant too
        let p2 = normalize_h_rep(&raw(&[
            (&[(1, 1), (0, 1)], (0, 1)),
            (&[(0, 1), (1, 1)], (0, 1)),
            (&[(-1, 1), (0, 1)], (-1, 1)),
            (&[(0, 1), (-1, 1)], (-1, 1)),
            (&[(1, 1), (1, 1)], (0, 1)),
        ]))
        .unwrap();
        assert_eq!(p2, p);
    }

    #[test]
    fn duplicates_keep_tightest() {
        let (p, log) = normalize_h_rep_logged(&raw(&[
            (&[(1, 1)], (0, 1)),
            (&[(2, 1)], (1, 1)),
            (&[(-1, 1)], (-1, 1)),
        ]))
        .unwrap();
        assert_eq!(
            p.facets()[1],
            Facet {
                normal: int_vec(&[1]),
                offset: rat(1, 2)
            }
        );
        assert!(log.contains(&NormalizationAction::MergedDuplicate {
            kept: 1,
            dropped: 0
        }));
    }

    #[test]
    fn construction_errors_are_distinct() {
        assert_eq!(normalize_h_rep(&[]), Err(PolytopeError::NoInequalities));
        assert!(matches!(
            normalize_h_rep(&raw(&[(&[(1, 1)], (0, 1))])),
            Err(PolytopeError::Unbounded { .. })
        ));
        assert_eq!(
            normalize_h_rep(&raw(&[(&[(1, 1)], (1, 1)), (&[(-1, 1)], (0, 1))])),
            Err(PolytopeError::EmptyPolytope)
        );
        assert_eq!(
            normalize_h_rep(&raw(&[(&[(1, 1)], (0, 1)), (&[(-1, 1)], (0, 1))])),
            Err(PolytopeError::LowerDimensional {
                dim: 0,
                expected: 1
            })
        );
        assert_eq!(
            normalize_h_rep(&raw(&[(&[(0, 1)], (0, 1)), (&[(-1, 1)], (0, 1))])),
            Err(PolytopeError::ZeroNormal { index: 0 })
        );
        assert!(matches!(
            normalize_h_rep(&raw(&[(&[(1, 1), (0, 1)], (0, 1)), (&[(-1, 1)], (0, 1))])),
            Err(PolytopeError::DimensionMismatch { index: 1, .. })
        ));
        // a strip is unbounded in two dimensions
        assert!(matches!(
            normalize_h_rep(&raw(&[
                (&[(1, 1), (0, 1)], (0, 1)),
                (&[(-1, 1), (0, 1)], (-1, 1))
            ])),
            Err(PolytopeError::Unbounded { .. })
        ));
    }

    #[test]
    fn vertex_examples() {
        assert_eq!(
            enumerate_vertices(&corpus::interval()),
            vec![rat_vec(&[(0, 1)]), rat_vec(&[(1, 1)])]
        );
        assert_eq!(enumerate_vertices(&corpus::square()).len(), 4);
        let oct = enumerate_vertices(&corpus::octahedron());
        assert_eq!(oct.len(), 6);
        for v in &oct {
            let nonzero: Vec<&Rational> = v.iter().filter(|e| !e.is_zero()).collect();
            assert_eq!(nonzero.len(), 1);
            assert_eq!(nonzero[0].abs(), rat(1, 1));
        }
    }

    #[test]
    fn bounding_box_of_triangle() {
        let (lo, hi) = corpus::weighted_triangle().bounding_box();
        assert_eq!(lo, rat_vec(&[(0, 1), (0, 1)]));
        assert_eq!(hi, rat_vec(&[(2, 1), (1, 1)]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn normalization_is_idempotent(
            extra in prop::collection::vec((-3i64..=3, -3i64..=3, -4i64..=1, 1i64..=3), 0..4),
            scale in prop::collection::vec(1i64..=5, 4),
        ) {
            // a box with random scalings plus random extra cuts through it
            let mut rows = vec![
                (rat_vec(&[(scale[0], 1), (0, 1)]), rat(0, 1)),
                (rat_vec(&[(0, 1), (scale[1], 2)]), rat(0, 1)),
                (rat_vec(&[(-scale[2], 1), (0, 1)]), rat(-2 * scale[2], 1)),
                (rat_vec(&[(0, 1), (-1, scale[3])]), rat(-2, scale[3])),
            ];
            for (a, b, c, d) in extra {
                if a == 0 && b == 0 { continue; }
                rows.push((rat_vec(&[(a, 1), (b, 1)]), rat(c, d)));
            }
            if let Ok(p) = normalize_h_rep(&rows) {
                prop_assert_eq!(normalize_h_rep(&p.to_raw()).unwrap(), p.clone());
                for f in p.facets() {
                    prop_assert!(content(&f.normal) == BigInt::from(1));
                }
            }
        }
    }
}
