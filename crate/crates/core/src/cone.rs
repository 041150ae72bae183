//! Rational polyhedral cones and the double description method.
//!
//! A cone is kept in both representations: generators (lineality basis plus
//! extreme rays of the pointed part) and inequalities `<x, h> >= 0`. The
//! conversion is exact incremental halfspace insertion.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::linalg::{
    dot, int_to_rat, kernel_basis, primitive_vector, rank, solve_square, IntMatrix, IntVector,
    RatVector, Rational,
};

/// Generators of `{x : <x, h> >= 0 for all h}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeGenerators {
    /// Hermite basis of the integer points of the lineality space.
    pub lineality: Vec<IntVector>,
    /// Primitive extreme rays of the pointed part, orthogonal to the
    /// lineality space, sorted lexicographically.
    pub rays: Vec<IntVector>,
}

pub fn double_description(dim: usize, halfspaces: &[IntVector]) -> ConeGenerators {
    let mut lin: Vec<IntVector> = IntMatrix::identity(dim).row_vectors();
    let mut rays: Vec<IntVector> = Vec::new();
    let mut inserted: Vec<IntVector> = Vec::new();

    for h in halfspaces {
        debug_assert_eq!(h.len(), dim);
        if h.iter().all(Zero::is_zero) {
            continue;
        }
        if let Some(k) = lin.iter().position(|l| !dot(l, h).is_zero()) {
            let mut l = lin.remove(k);
            let mut c = dot(&l, h);
            if c.is_negative() {
                l = l.iter().map(|e| -e).collect();
                c = -c;
            }
            for v in lin.iter_mut().chain(rays.iter_mut()) {
                let a = dot(v, h);
                if !a.is_zero() {
                    let w: IntVector = v.iter().zip(&l).map(|(x, y)| &c * x - &a * y).collect();
                    *v = primitive_vector(&w).expect("independent of the removed direction");
                }
            }
            rays.push(primitive_vector(&l).expect("nonzero lineality vector"));
            inserted.push(h.clone());
        } else {
            inserted.push(h.clone());
            let (mut pos, mut neg, mut zero) = (Vec::new(), Vec::new(), Vec::new());
            for r in rays.drain(..) {
                let s = dot(&r, h);
                if s.is_positive() {
                    pos.push((r, s));
                } else if s.is_negative() {
                    neg.push((r, s));
                } else {
                    zero.push(r);
                }
            }
            let mut next: Vec<IntVector> = zero;
            for (rp, sp) in &pos {
                for (rn, sn) in neg.iter() {
                    let w: IntVector = rn.iter().zip(rp).map(|(a, b)| sp * a - sn * b).collect();
                    if let Ok(p) = primitive_vector(&w) {
                        next.push(p);
                    }
                }
            }
            next.extend(pos.into_iter().map(|(r, _)| r));
            rays = next;
        }
        rays = canonical_extreme_rays(dim, &lin, &inserted, rays);
    }

    let lineality = kernel_basis(&IntMatrix::from_rows(dim, halfspaces)).vectors();
    let rays = canonical_extreme_rays(dim, &lineality, halfspaces, rays);
    ConeGenerators { lineality, rays }
}

/// Projects rays onto the orthogonal complement of the lineality space,
/// drops duplicates and non-extreme candidates, and sorts.
fn canonical_extreme_rays(
    dim: usize,
    lin: &[IntVector],
    halfspaces: &[IntVector],
    rays: Vec<IntVector>,
) -> Vec<IntVector> {
    let Some(need) = dim.checked_sub(lin.len() + 1) else {
        return Vec::new();
    };
    let mut out: Vec<IntVector> = rays
        .into_iter()
        .filter_map(|r| project_out(&r, lin))
        .filter(|r| {
            let tight: Vec<IntVector> = halfspaces
                .iter()
                .filter(|h| dot(r, h).is_zero())
                .cloned()
                .collect();
            rank(&tight) == need
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Orthogonal projection of `r` onto `span(lin)^⊥`, made primitive.
/// `None` if the projection vanishes.
fn project_out(r: &[BigInt], lin: &[IntVector]) -> Option<IntVector> {
    if lin.is_empty() {
        return primitive_vector(r).ok();
    }
    let gram: Vec<RatVector> = lin
        .iter()
        .map(|a| {
            lin.iter()
                .map(|b| Rational::from_integer(dot(a, b)))
                .collect()
        })
        .collect();
    let rhs: RatVector = lin
        .iter()
        .map(|a| Rational::from_integer(dot(a, r)))
        .collect();
    let coef = solve_square(&gram, &rhs).expect("lineality basis is independent");
    let mut p = int_to_rat(r);
    for (c, l) in coef.iter().zip(lin) {
        for (pi, li) in p.iter_mut().zip(l) {
            *pi -= c * Rational::from_integer(li.clone());
        }
    }
    let (ints, _) = crate::linalg::clear_denominators(&p);
    primitive_vector(&ints).ok()
}

/// A rational polyhedral cone in `R^dim`, held in both representations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    dim: usize,
    lineality: Vec<IntVector>,
    rays: Vec<IntVector>,
    halfspaces: Vec<IntVector>,
}

impl Cone {
    /// The cone generated by `gens` (nonnegative combinations).
    pub fn from_rays(dim: usize, gens: &[IntVector]) -> Self {
        let dual = double_description(dim, gens);
        let halfspaces = flatten(&dual);
        Self::from_halfspaces(dim, &halfspaces)
    }

    /// The cone `{x : <x, h> >= 0}`. The stored inequalities are the
    /// canonical ones (generators of the dual), not the input list.
    pub fn from_halfspaces(dim: usize, halfspaces: &[IntVector]) -> Self {
        let g = double_description(dim, halfspaces);
        let canonical_h = flatten(&double_description(dim, &flatten(&g)));
        Self {
            dim,
            lineality: g.lineality,
            rays: g.rays,
            halfspaces: canonical_h,
        }
    }

    /// The zero cone `{0}`.
    pub fn origin(dim: usize) -> Self {
        Self::from_rays(dim, &[])
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Generators as a plain list: extreme rays, then `±` each lineality
    /// basis vector.
    pub fn rays(&self) -> Vec<IntVector> {
        let mut out = self.rays.clone();
        for l in &self.lineality {
            out.push(l.clone());
            out.push(l.iter().map(|e| -e).collect());
        }
        out
    }

    pub fn extreme_rays(&self) -> &[IntVector] {
        &self.rays
    }

    pub fn lineality(&self) -> &[IntVector] {
        &self.lineality
    }

    pub fn halfspaces(&self) -> &[IntVector] {
        &self.halfspaces
    }

    pub fn dimension(&self) -> usize {
        rank(&self.rays())
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.halfspaces.iter().all(|h| !dot(h, x).is_negative())
    }

    /// Whether every generator of `other` lies in `self`.
    pub fn contains_cone(&self, other: &Cone) -> bool {
        other.rays().iter().all(|r| self.contains(r))
    }

    /// `{y : <y, x> >= 0 for all x in self}`.
    pub fn dual(&self) -> Cone {
        Cone::from_halfspaces(self.dim, &self.rays())
    }
}

fn flatten(g: &ConeGenerators) -> Vec<IntVector> {
    let mut out = g.rays.clone();
    for l in &g.lineality {
        out.push(l.clone());
        out.push(l.iter().map(|e| -e).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int_vec;
    use proptest::prelude::*;

    fn set(v: &[IntVector]) -> Vec<IntVector> {
        let mut s = v.to_vec();
        s.sort();
        s
    }

    #[test]
    fn quadrant_is_self_dual() {
        let q = Cone::from_rays(2, &[int_vec(&[1, 0]), int_vec(&[0, 1])]);
        let d = q.dual();
        assert_eq!(d, q);
        assert_eq!(
            set(d.extreme_rays()),
            set(&[int_vec(&[0, 1]), int_vec(&[1, 0])])
        );
    }

    #[test]
    fn dual_of_single_ray() {
        let c = Cone::from_rays(2, &[int_vec(&[1, 2])]);
        let d = c.dual();
        assert_eq!(
            set(&d.rays()),
            set(&[int_vec(&[2, -1]), int_vec(&[-2, 1]), int_vec(&[1, 2])])
        );
        assert_eq!(d.dual(), c);
    }

    #[test]
    fn dual_of_origin_is_everything() {
        let o = Cone::origin(3);
        assert_eq!(o.dimension(), 0);
        let d = o.dual();
        assert_eq!(d.dimension(), 3);
        assert_eq!(d.lineality().len(), 3);
        assert_eq!(d.rays().len(), 6);
        assert!(d.rays().contains(&int_vec(&[0, 0, -1])));
        assert_eq!(d.dual(), o);
    }

    #[test]
    fn octahedron_vertex_cone() {
        let gens = [
            int_vec(&[1, 1, 1]),
            int_vec(&[1, 1, -1]),
            int_vec(&[1, -1, 1]),
            int_vec(&[1, -1, -1]),
        ];
        let c = Cone::from_rays(3, &gens);
        assert_eq!(set(c.extreme_rays()), set(&gens));
        assert_eq!(c.halfspaces().len(), 4);
        assert!(c.is_pointed());
    }

    #[test]
    fn redundant_generators_dropped() {
        let c = Cone::from_rays(2, &[int_vec(&[1, 0]), int_vec(&[0, 1]), int_vec(&[1, 1])]);
        assert_eq!(c.extreme_rays().len(), 2);
        let h = Cone::from_halfspaces(2, &[int_vec(&[1, 0]), int_vec(&[0, 1]), int_vec(&[1, 1])]);
        assert_eq!(h, c);
    }

    #[test]
    fn empty_interior_cone() {
        // x >= 0, -x >= 0, y >= 0: the ray (0,1)
        let c = Cone::from_halfspaces(2, &[int_vec(&[1, 0]), int_vec(&[-1, 0]), int_vec(&[0, 1])]);
        assert_eq!(c.rays(), vec![int_vec(&[0, 1])]);
        // the recession cone of a bounded polygon is the origin
        let z = Cone::from_halfspaces(2, &[int_vec(&[1, 0]), int_vec(&[0, 1]), int_vec(&[-1, -1])]);
        assert!(z.rays().is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn double_dual_is_identity(
            dim in 1usize..=3,
            raw in prop::collection::vec(prop::collection::vec(-3i64..=3, 3), 0..6),
        ) {
            let gens: Vec<IntVector> = raw.iter().map(|r| int_vec(&r[..dim])).collect();
            let c = Cone::from_rays(dim, &gens);
            let d = c.dual();
            prop_assert!(c.contains_cone(&d.dual()) && d.dual().contains_cone(&c));
            prop_assert_eq!(d.dual(), c.clone());
            // V and H agree: every input generator satisfies every halfspace,
            // and every halfspace is tight on a codimension-one set of rays
            for g in &gens {
                prop_assert!(c.contains(g));
            }
            for y in d.rays() {
                for x in c.rays() {
                    prop_assert!(!dot(&x, &y).is_negative());
                }
            }
        }
    }
}
