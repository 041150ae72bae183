use std::collections::{BTreeSet, HashSet};

use num_traits::Zero;

use super::{enumerate_vertices, HPolytope};
use crate::linalg::{affine_rank, rank, IntVector, RatVector, Rational};

/// A nonempty face, identified by its maximal active set `I_F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    /// Sorted indices of the facets containing the face.
    pub index_set: Vec<usize>,
    pub dim: usize,
    /// Indices into [`FaceLattice::vertices`].
    pub vertex_ids: Vec<usize>,
    pub interior_point: RatVector,
}

impl Face {
    pub fn is_vertex(&self) -> bool {
        self.dim == 0
    }
}

/// All nonempty faces of a polytope, ordered by `(dim, index_set)`.
///
/// Face ids are positions in that order. `E ⊆ F` (closures) iff
/// `I_E ⊇ I_F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceLattice {
    dim: usize,
    vertices: Vec<RatVector>,
    faces: Vec<Face>,
}

pub fn build_face_lattice(p: &HPolytope) -> FaceLattice {
    let vertices = enumerate_vertices(p);
    let active: Vec<BTreeSet<usize>> = vertices
        .iter()
        .map(|v| p.active_set(v).into_iter().collect())
        .collect();

    // Closed active sets are exactly the intersections of vertex active sets.
    let mut closed: HashSet<BTreeSet<usize>> = active.iter().cloned().collect();
    let mut frontier: Vec<BTreeSet<usize>> = closed.iter().cloned().collect();
    while let Some(s) = frontier.pop() {
        for a in &active {
            let meet: BTreeSet<usize> = s.intersection(a).copied().collect();
            if closed.insert(meet.clone()) {
                frontier.push(meet);
            }
        }
    }

    let mut faces: Vec<Face> = closed
        .into_iter()
        .map(|set| {
            let vertex_ids: Vec<usize> = (0..vertices.len())
                .filter(|&v| set.is_subset(&active[v]))
                .collect();
            let pts: Vec<RatVector> = vertex_ids.iter().map(|&v| vertices[v].clone()).collect();
            Face {
                index_set: set.into_iter().collect(),
                dim: affine_rank(&pts),
                interior_point: mean(&pts),
                vertex_ids,
            }
        })
        .collect();
    faces.sort_by(|a, b| (a.dim, &a.index_set).cmp(&(b.dim, &b.index_set)));

    FaceLattice {
        dim: p.dim(),
        vertices,
        faces,
    }
}

fn mean(points: &[RatVector]) -> RatVector {
    let n = points[0].len();
    let k = Rational::from_integer(points.len().into());
    (0..n)
        .map(|j| points.iter().fold(Rational::zero(), |acc, p| acc + &p[j]) / &k)
        .collect()
}

/// Arithmetic mean of the face's vertices.
pub fn relative_interior_point(lattice: &FaceLattice, face: &Face) -> RatVector {
    let pts: Vec<RatVector> = face
        .vertex_ids
        .iter()
        .map(|&v| lattice.vertices[v].clone())
        .collect();
    mean(&pts)
}

impl FaceLattice {
    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[RatVector] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, id: usize) -> &Face {
        &self.faces[id]
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn faces_of_dim(&self, d: usize) -> impl Iterator<Item = (usize, &Face)> {
        self.faces
            .iter()
            .enumerate()
            .filter(move |(_, f)| f.dim == d)
    }

    pub fn vertex_face_ids(&self) -> Vec<usize> {
        self.faces_of_dim(0).map(|(i, _)| i).collect()
    }

    /// Id of the whole polytope (the face with empty active set).
    pub fn top_face_id(&self) -> usize {
        self.faces.len() - 1
    }

    pub fn face_id_by_index_set(&self, set: &[usize]) -> Option<usize> {
        self.faces.iter().position(|f| f.index_set == set)
    }

    /// Face whose relative interior contains `x`; `x` must lie in the polytope.
    pub fn carrier_face_id(&self, p: &HPolytope, x: &[Rational]) -> Option<usize> {
        self.face_id_by_index_set(&p.active_set(x))
    }

    /// Closure of `e` contained in closure of `f`, i.e. `I_E ⊇ I_F`.
    pub fn is_incident(&self, e: usize, f: usize) -> bool {
        let ie: BTreeSet<usize> = self.faces[e].index_set.iter().copied().collect();
        self.faces[f].index_set.iter().all(|i| ie.contains(i))
    }

    /// Number of faces of each dimension `0..=n`.
    pub fn f_vector(&self) -> Vec<usize> {
        (0..=self.dim)
            .map(|d| self.faces_of_dim(d).count())
            .collect()
    }

    /// `Σ (-1)^dim` over proper nonempty faces; equals `1 - (-1)^n` for the
    /// boundary sphere of an `n`-polytope.
    pub fn boundary_euler_characteristic(&self) -> i64 {
        self.f_vector()[..self.dim]
            .iter()
            .enumerate()
            .map(|(d, &c)| if d % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// `n - rank{u_i : i in I_F}`.
    pub fn normal_rank_dim(&self, p: &HPolytope, face: &Face) -> usize {
        let normals: Vec<IntVector> = face
            .index_set
            .iter()
            .map(|&i| p.facets()[i].normal.clone())
            .collect();
        self.dim - rank(&normals)
    }
}
