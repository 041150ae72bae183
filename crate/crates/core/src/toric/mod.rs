//! Normal fan, chart monoids and the affine charts of the toric variety
//! attached to a polytope.
//!
//! Chart monoids live in the dual lattice `Π*`. Elements of `Π*` are written
//! in the basis dual to the Hermite basis of `Π`, so pairing with a facet
//! normal is the dot product with that normal's `Π`-coordinates.

mod chart;
mod monoid;
mod transversality;

use num_bigint::BigInt;
use thiserror::Error;

use crate::cone::Cone;
use crate::delzant::DelzantData;
use crate::linalg::{int_to_rat, solve_square, IntVector, LatticeBasis, RatVector};

pub use chart::{act, base_point, ChartInclusion, ChartPoint, FiberSolution, ToricModel};
pub use monoid::{monoid_generators, ChartMonoid, MAX_MONOID_DIM};
pub use transversality::{transversality_check, TransversalityReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ToricError {
    #[error("monoid enumeration is capped at dimension {max}, got {dim}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("monoid enumeration box has {points} points, above the cap")]
    EnumerationTooLarge { points: u128 },
    #[error("zero pattern of z does not match the stratum of face {face}")]
    WrongStratum { face: usize },
    #[error("generator {generator} needs a negative power of z_{coordinate} = 0")]
    NegativePowerOfZero { generator: usize, coordinate: usize },
    #[error("vector is not in the dual cone of face {face}")]
    NotInCone { face: usize },
    #[error("face {e} is not contained in the closure of face {f}")]
    NotIncident { e: usize, f: usize },
    #[error("point is not in the fiber: residual {residual:e}")]
    NotInFiber { residual: f64 },
    #[error("no integer completion of the logarithm exists")]
    NoIntegerCompletion,
    #[error("expected a vector of length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// The normal fan: one cone `σ_F = cone{u_i : i in I_F}` per face.
#[derive(Clone, Debug)]
pub struct Fan {
    dim: usize,
    lattice: LatticeBasis,
    normal_coords: Vec<IntVector>,
    index_sets: Vec<Vec<usize>>,
    cones: Vec<Cone>,
}

pub fn build_fan(d: &DelzantData) -> Fan {
    let n = d.n();
    let normals = d.polytope().normals();
    let lattice = d.image().clone();
    let normal_coords = normals
        .iter()
        .map(|u| {
            lattice
                .coordinates(u)
                .expect("normals generate the image lattice")
        })
        .collect();
    let index_sets: Vec<Vec<usize>> = d
        .faces()
        .faces()
        .iter()
        .map(|f| f.index_set.clone())
        .collect();
    let cones = index_sets
        .iter()
        .map(|set| {
            let gens: Vec<IntVector> = set.iter().map(|&i| normals[i].clone()).collect();
            Cone::from_rays(n, &gens)
        })
        .collect();
    Fan {
        dim: n,
        lattice,
        normal_coords,
        index_sets,
        cones,
    }
}

/// `{y : <y, x> >= 0 for all x in c}`.
pub fn dual_cone(c: &Cone) -> Cone {
    c.dual()
}

impl Fan {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.cones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cones.is_empty()
    }

    /// `σ_F` in ambient coordinates.
    pub fn cone(&self, face: usize) -> &Cone {
        &self.cones[face]
    }

    pub fn cones(&self) -> &[Cone] {
        &self.cones
    }

    pub fn index_set(&self, face: usize) -> &[usize] {
        &self.index_sets[face]
    }

    /// The lattice `Π` the fan is taken in.
    pub fn lattice(&self) -> &LatticeBasis {
        &self.lattice
    }

    /// Coordinates of each facet normal in the basis of `Π`.
    pub fn normal_coords(&self) -> &[IntVector] {
        &self.normal_coords
    }

    /// `σ_F` written in `Π`-coordinates.
    pub fn lattice_cone(&self, face: usize) -> Cone {
        let gens: Vec<IntVector> = self.index_sets[face]
            .iter()
            .map(|&i| self.normal_coords[i].clone())
            .collect();
        Cone::from_rays(self.dim, &gens)
    }

    /// Faces whose cone is full-dimensional (the vertices).
    pub fn maximal_cone_ids(&self) -> Vec<usize> {
        (0..self.cones.len())
            .filter(|&f| self.cones[f].dimension() == self.dim)
            .collect()
    }

    /// Distinct primitive rays of the fan, sorted.
    pub fn rays(&self) -> Vec<IntVector> {
        let mut rays: Vec<IntVector> = self
            .cones
            .iter()
            .flat_map(|c| c.extreme_rays().iter().cloned())
            .collect();
        rays.sort();
        rays.dedup();
        rays
    }

    /// First maximal cone containing `y`.
    pub fn locate(&self, y: &[BigInt]) -> Option<usize> {
        self.maximal_cone_ids()
            .into_iter()
            .find(|&f| self.cones[f].contains(y))
    }

    /// An element of `Π*` given in dual-basis coordinates, as a rational
    /// covector in ambient coordinates.
    pub fn dual_to_ambient(&self, c: &[BigInt]) -> RatVector {
        let b: Vec<RatVector> = self
            .lattice
            .as_rows()
            .iter()
            .map(|r| int_to_rat(r))
            .collect();
        solve_square(&b, &int_to_rat(c)).expect("lattice basis is square and invertible")
    }
}
