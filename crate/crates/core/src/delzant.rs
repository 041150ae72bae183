//! The symplectic-reduction model of a rational polytope.
//!
//! For a polytope with facets `<x, u_i> >= λ_i`, `i = 1..p`, the map
//! `π : Z^p -> Z^n, e_i -> u_i` gives the exact sequence
//! `0 -> L -> Z^p -> Π -> 0`. The torus `G = (S^1)^p` acts on `C^p` with
//! moment map `J_G(z) = ½|z|^2 + λ`; reducing by `A = L_R / L` at zero
//! gives a compact `2n`-dimensional space whose `T = R^n / Π` moment map
//! has image exactly the polytope.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{
    clear_denominators, cokernel_invariants, dot_rat_int, int_to_f64, int_to_rat, kernel_basis,
    rank, rat_to_f64, saturate_sublattice, solve_square, CokernelInvariants, IntMatrix, IntVector,
    LatticeBasis, RatVector, Rational,
};
use crate::polytope::{build_face_lattice, FaceLattice, HPolytope};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DelzantError {
    #[error("point lies outside the polytope (facet {facet} violated)")]
    OutsidePolytope { facet: usize },
    #[error("moment residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("expected a vector of length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the given lattice does not contain the image lattice")]
    NotAnOverlattice,
    #[error("the given lattice has rank {rank} < {dim}, so the index is infinite")]
    InfiniteIndex { rank: usize, dim: usize },
}

/// The exact sequence and moment-map data of a polytope.
#[derive(Clone, Debug)]
pub struct DelzantData {
    polytope: HPolytope,
    faces: FaceLattice,
    pi: IntMatrix,
    kernel: LatticeBasis,
    image: LatticeBasis,
    gamma: CokernelInvariants,
    lambda_f: Vec<f64>,
    normals_f: Vec<Vec<f64>>,
    kernel_f: Vec<Vec<f64>>,
    bbox: (RatVector, RatVector),
}

/// A point of the zero level `J_A^{-1}(0)` over a known `x` in the polytope.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroLevelPoint {
    pub z: Vec<Complex64>,
    pub source_x: RatVector,
    /// `2(<x, u_i> - λ_i)`, exact.
    pub squared_radii: RatVector,
}

/// Result of [`DelzantData::moment_t`].
#[derive(Clone, Debug, PartialEq)]
pub struct MomentImage {
    pub x: Vec<f64>,
    /// `max_i |<x, u_i> - J_G(z)_i|`.
    pub residual: f64,
}

/// Isotropy data of the stratum over a face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerData {
    pub face: usize,
    /// `{u_i : i in I_F}`.
    pub b_basis: Vec<IntVector>,
    pub dim_b: usize,
    /// Basis of `Π_F`, the saturation of `Z-span{u_i : i in I_F}` inside the
    /// torus lattice, in ambient coordinates.
    pub saturation_basis: Vec<RatVector>,
    /// Index of the span of the `u_i` inside `Π_F`.
    pub orbifold_index: BigInt,
    /// Simplicial cone whose generators extend to a basis of the lattice.
    pub smooth: bool,
}

/// Same polytope and fan, paired with a finer torus lattice `Π' ⊇ Π`.
#[derive(Clone, Debug, PartialEq)]
pub struct RetargetReport {
    pub polytope: HPolytope,
    /// Hermite basis of `Π'` (rational rows).
    pub lattice: Vec<RatVector>,
    /// Invariant factors of `Π' / Π`.
    pub gamma: CokernelInvariants,
    pub stabilizers: Vec<StabilizerData>,
}

pub fn build_delzant_data(p: &HPolytope) -> DelzantData {
    DelzantData::new(p.clone())
}

impl DelzantData {
    pub fn new(polytope: HPolytope) -> Self {
        let n = polytope.dim();
        let normals = polytope.normals();
        let pi = polytope.normal_matrix();
        let kernel = kernel_basis(&pi);
        let image = LatticeBasis::from_generators(n, &normals);
        let gamma = cokernel_invariants(&pi);
        let faces = build_face_lattice(&polytope);
        let bbox = polytope.bounding_box();
        Self {
            lambda_f: polytope.offsets().iter().map(rat_to_f64).collect(),
            normals_f: normals
                .iter()
                .map(|u| u.iter().map(int_to_f64).collect())
                .collect(),
            kernel_f: kernel
                .as_rows()
                .iter()
                .map(|l| l.iter().map(int_to_f64).collect())
                .collect(),
            polytope,
            faces,
            pi,
            kernel,
            image,
            gamma,
            bbox,
        }
    }

    pub fn polytope(&self) -> &HPolytope {
        &self.polytope
    }

    pub fn faces(&self) -> &FaceLattice {
        &self.faces
    }

    /// Number of facets `p`.
    pub fn p(&self) -> usize {
        self.polytope.num_facets()
    }

    pub fn n(&self) -> usize {
        self.polytope.dim()
    }

    /// `dim A = p - n`.
    pub fn k(&self) -> usize {
        self.p() - self.n()
    }

    /// The `n x p` matrix with columns `u_i`.
    pub fn pi(&self) -> &IntMatrix {
        &self.pi
    }

    /// `L = ker π ∩ Z^p`.
    pub fn kernel(&self) -> &LatticeBasis {
        &self.kernel
    }

    /// `Π = π(Z^p)`.
    pub fn image(&self) -> &LatticeBasis {
        &self.image
    }

    /// Invariants of `Γ = Z^n / Π`.
    pub fn gamma(&self) -> &CokernelInvariants {
        &self.gamma
    }

    pub fn lambda_f64(&self) -> &[f64] {
        &self.lambda_f
    }

    pub fn normals_f64(&self) -> &[Vec<f64>] {
        &self.normals_f
    }

    pub fn kernel_f64(&self) -> &[Vec<f64>] {
        &self.kernel_f
    }

    fn check_len(&self, len: usize, expected: usize) -> Result<(), DelzantError> {
        if len == expected {
            Ok(())
        } else {
            Err(DelzantError::DimensionMismatch {
                expected,
                found: len,
            })
        }
    }

    /// `J_G(z)_i = ½|z_i|^2 + λ_i`.
    pub fn moment_g(&self, z: &[Complex64]) -> Vec<f64> {
        assert_eq!(z.len(), self.p());
        z.iter()
            .zip(&self.lambda_f)
            .map(|(zi, l)| 0.5 * zi.norm_sqr() + l)
            .collect()
    }

    /// `J_A(z)`: pairing of `J_G(z)` with each basis vector of `L`.
    pub fn moment_a(&self, z: &[Complex64]) -> Vec<f64> {
        let y = self.moment_g(z);
        self.kernel_f
            .iter()
            .map(|l| l.iter().zip(&y).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Scale used for relative tolerances of `J_A` at `z`.
    fn moment_scale(&self, y: &[f64]) -> f64 {
        let ymax = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lmax = self
            .kernel_f
            .iter()
            .map(|l| l.iter().map(|e| e.abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        (ymax * lmax).max(1.0)
    }

    /// `‖J_A(z)‖_∞` relative to the size of the terms it cancels.
    pub fn relative_moment_a(&self, z: &[Complex64]) -> f64 {
        let y = self.moment_g(z);
        let scale = self.moment_scale(&y);
        self.moment_a(z).iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale
    }

    /// `J_T([z]) = (π^*)^{-1} J_G(z)`, solved by normal equations on `π^T`.
    pub fn moment_t(&self, z: &[Complex64], tol: f64) -> Result<MomentImage, DelzantError> {
        self.check_len(z.len(), self.p())?;
        let y = self.moment_g(z);
        let rel = self.relative_moment_a(z);
        if rel > tol {
            return Err(DelzantError::ResidualTooLarge { residual: rel, tol });
        }
        let (n, p) = (self.n(), self.p());
        let pt = DMatrix::from_fn(p, n, |i, j| self.normals_f[i][j]);
        let yv = DVector::from_column_slice(&y);
        let gram = pt.transpose() * &pt;
        let rhs = pt.transpose() * &yv;
        let x = gram
            .cholesky()
            .expect("normal matrix has full column rank")
            .solve(&rhs);
        let residual = (&pt * &x - &yv).amax();
        Ok(MomentImage {
            x: x.iter().copied().collect(),
            residual,
        })
    }

    /// Exact `(π^*)^{-1} y`, or `None` if `y` is not in the image of `π^T`.
    pub fn moment_t_exact(&self, y: &[Rational]) -> Option<RatVector> {
        let n = self.n();
        let normals = self.polytope.normals();
        let gram: Vec<RatVector> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        normals
                            .iter()
                            .map(|u| Rational::from_integer(&u[a] * &u[b]))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let rhs: RatVector = (0..n)
            .map(|a| {
                normals
                    .iter()
                    .zip(y)
                    .map(|(u, yi)| yi * Rational::from_integer(u[a].clone()))
                    .sum()
            })
            .collect();
        let x = solve_square(&gram, &rhs)?;
        normals
            .iter()
            .zip(y)
            .all(|(u, yi)| dot_rat_int(&x, u) == *yi)
            .then_some(x)
    }

    /// Integer basis of `L ∩ Z^{set}`: kernel vectors supported on `set`.
    pub fn kernel_supported_on(&self, set: &[usize]) -> Vec<IntVector> {
        if set.is_empty() {
            return Vec::new();
        }
        kernel_basis(&self.pi.select_columns(set))
            .as_rows()
            .iter()
            .map(|k| {
                let mut full = vec![BigInt::zero(); self.p()];
                for (&i, e) in set.iter().zip(k) {
                    full[i] = e.clone();
                }
                full
            })
            .collect()
    }

    /// Exact squared radii `2(<x, u_i> - λ_i)` and the active set.
    pub fn fiber_radii(&self, x: &[Rational]) -> Result<(RatVector, Vec<usize>), DelzantError> {
        self.check_len(x.len(), self.n())?;
        let two = Rational::from_integer(BigInt::from(2));
        let slacks = self.polytope.slacks(x);
        if let Some(facet) = slacks.iter().position(|s| s.is_negative()) {
            return Err(DelzantError::OutsidePolytope { facet });
        }
        let active = (0..slacks.len()).filter(|&i| slacks[i].is_zero()).collect();
        Ok((slacks.into_iter().map(|s| s * &two).collect(), active))
    }

    /// Zero-level point over `x` with the given phases (radians).
    pub fn zero_level_point(
        &self,
        x: &[Rational],
        phases: &[f64],
    ) -> Result<ZeroLevelPoint, DelzantError> {
        self.check_len(phases.len(), self.p())?;
        let (squared_radii, _) = self.fiber_radii(x)?;
        let z = squared_radii
            .iter()
            .zip(phases)
            .map(|(r2, &t)| Complex64::from_polar(rat_to_f64(r2).sqrt(), t))
            .collect();
        Ok(ZeroLevelPoint {
            z,
            source_x: x.to_vec(),
            squared_radii,
        })
    }

    /// Zero-level point over `x` with phases drawn uniformly from `[0, 2π)`.
    pub fn sample_zero_level(
        &self,
        x: &[Rational],
        seed: u64,
    ) -> Result<ZeroLevelPoint, DelzantError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_zero_level_with(x, &mut rng)
    }

    pub fn sample_zero_level_with<R: Rng>(
        &self,
        x: &[Rational],
        rng: &mut R,
    ) -> Result<ZeroLevelPoint, DelzantError> {
        let phases: Vec<f64> = (0..self.p()).map(|_| rng.gen::<f64>() * TAU).collect();
        self.zero_level_point(x, &phases)
    }

    /// Exact bounding box of the polytope.
    pub fn bounding_box(&self) -> &(RatVector, RatVector) {
        &self.bbox
    }

    /// Uniform point of the bounding box with coordinates on a `2^-32` grid.
    pub fn sample_box_point<R: Rng>(&self, rng: &mut R) -> RatVector {
        let denom: BigInt = BigInt::one() << 32;
        let (lo, hi) = &self.bbox;
        lo.iter()
            .zip(hi)
            .map(|(a, b)| {
                let m = Rational::new(BigInt::from(rng.gen::<u32>()), denom.clone());
                a + (b - a) * m
            })
            .collect()
    }

    /// Uniform point of the polytope by exact rejection from the bounding box.
    pub fn sample_polytope_point<R: Rng>(&self, rng: &mut R) -> RatVector {
        loop {
            let x = self.sample_box_point(rng);
            if self.polytope.contains(&x) {
                return x;
            }
        }
    }

    /// Exact bound on every squared radius over the zero level:
    /// `max_i max_v 2(<v, u_i> - λ_i)` over vertices `v`.
    pub fn properness_bound(&self) -> Rational {
        let two = Rational::from_integer(BigInt::from(2));
        self.faces
            .vertices()
            .iter()
            .flat_map(|v| self.polytope.slacks(v))
            .max()
            .map(|s| s * two)
            .unwrap_or_else(Rational::zero)
    }

    /// Dimension of `J_T^{-1}(F)` inside `X`, from the kernel lattice alone:
    /// the torus `(S^1)^{p - |I_F|}` of phases, minus the directions of `A`
    /// that act nontrivially on it (`rank` of `L` restricted to the
    /// coordinates outside `I_F`).
    pub fn fiber_dimension(&self, face: usize) -> usize {
        let set = &self.faces.face(face).index_set;
        let outside: Vec<usize> = (0..self.p()).filter(|i| !set.contains(i)).collect();
        let restricted = self.kernel.matrix().select_columns(&outside);
        outside.len() - rank(&restricted.row_vectors())
    }

    pub fn stabilizer_data(&self, face: usize) -> StabilizerData {
        stabilizer_in_lattice(self, face, self.image.as_rows(), &BigInt::one())
    }

    /// Pairs the same polytope with the lattice spanned by `basis` (rational
    /// rows), which must contain `Π` with finite index.
    pub fn retarget_lattice(&self, basis: &[RatVector]) -> Result<RetargetReport, DelzantError> {
        let n = self.n();
        for row in basis {
            self.check_len(row.len(), n)?;
        }
        let flat: RatVector = basis.iter().flatten().cloned().collect();
        let (_, scale) = clear_denominators(&flat);
        let scale_r = Rational::from_integer(scale.clone());
        let scaled_rows: Vec<IntVector> = basis
            .iter()
            .map(|r| r.iter().map(|e| (e * &scale_r).to_integer()).collect())
            .collect();
        let fine = LatticeBasis::from_generators(n, &scaled_rows);
        if fine.rank() < n {
            return Err(DelzantError::InfiniteIndex {
                rank: fine.rank(),
                dim: n,
            });
        }
        let scaled_image: Vec<IntVector> = self
            .image
            .as_rows()
            .iter()
            .map(|r| r.iter().map(|e| e * &scale).collect())
            .collect();
        let mut coords = Vec::with_capacity(n);
        for r in &scaled_image {
            coords.push(fine.coordinates(r).ok_or(DelzantError::NotAnOverlattice)?);
        }
        let gamma = cokernel_invariants(&IntMatrix::from_columns(n, &coords));
        let stabilizers = (0..self.faces.len())
            .map(|f| stabilizer_in_lattice(self, f, fine.as_rows(), &scale))
            .collect();
        Ok(RetargetReport {
            polytope: self.polytope.clone(),
            lattice: unscale(fine.as_rows(), &scale),
            gamma,
            stabilizers,
        })
    }
}

fn unscale(rows: &[IntVector], scale: &BigInt) -> Vec<RatVector> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|e| Rational::new(e.clone(), scale.clone()))
                .collect()
        })
        .collect()
}

/// Stabilizer data of `face` with respect to the lattice with (integer,
/// full-rank) basis `lattice_rows`, where everything has been scaled by
/// `scale` to clear denominators.
fn stabilizer_in_lattice(
    data: &DelzantData,
    face: usize,
    lattice_rows: &[IntVector],
    scale: &BigInt,
) -> StabilizerData {
    let n = data.n();
    let f = data.faces.face(face);
    let b_basis: Vec<IntVector> = f
        .index_set
        .iter()
        .map(|&i| data.polytope.facets()[i].normal.clone())
        .collect();
    let dim_b = rank(&b_basis);
    let lattice = LatticeBasis::from_generators(n, lattice_rows);

    let coords: Vec<IntVector> = b_basis
        .iter()
        .map(|u| {
            let scaled: IntVector = u.iter().map(|e| e * scale).collect();
            lattice
                .coordinates(&scaled)
                .expect("facet normals lie in the lattice")
        })
        .collect();
    let span = LatticeBasis::from_generators(n, &coords);
    let (sat, orbifold_index) = if span.rank() == 0 {
        (span.clone(), BigInt::one())
    } else {
        saturate_sublattice(&span).expect("Hermite rows are independent")
    };
    let lattice_mat = lattice.matrix();
    let saturation_basis: Vec<IntVector> = sat
        .as_rows()
        .iter()
        .map(|c| lattice_mat.transpose().mul_vec(c))
        .collect();
    let simplicial = b_basis.len() == dim_b;
    StabilizerData {
        face,
        smooth: simplicial && orbifold_index.is_one(),
        b_basis,
        dim_b,
        saturation_basis: unscale(&saturation_basis, scale),
        orbifold_index,
    }
}

/// `RatVector` of an integer vector, for callers building lattices by hand.
pub fn lattice_rows_from_ints(rows: &[IntVector]) -> Vec<RatVector> {
    rows.iter().map(|r| int_to_rat(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int_vec, rat, rat_vec};
    use crate::polytope::corpus;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn interval_sequence() {
        let d = build_delzant_data(&corpus::interval());
        assert_eq!((d.p(), d.n(), d.k()), (2, 1, 1));
        assert_eq!(d.kernel().vectors(), vec![int_vec(&[1, 1])]);
        assert_eq!(d.image(), &LatticeBasis::standard(1));
        assert!(d.gamma().is_trivial());
    }

    #[test]
    fn simplex_and_triangle_sequences() {
        let d = build_delzant_data(&corpus::simplex());
        assert_eq!(d.kernel().vectors(), vec![int_vec(&[1, 1, 1])]);
        assert!(d.gamma().is_trivial());

        let t = build_delzant_data(&corpus::weighted_triangle());
        // facets sorted: (-1,-2), (0,1), (1,0)
        assert_eq!(t.pi(), &IntMatrix::from_i64(2, 3, &[-1, 0, 1, -2, 1, 0]));
        assert_eq!(t.kernel().vectors(), vec![int_vec(&[1, 2, 1])]);
        assert_eq!(t.image(), &LatticeBasis::standard(2));
        assert!(t.gamma().is_trivial());
    }

    #[test]
    fn exact_sequence_invariants() {
        for p in [
            corpus::interval(),
            corpus::square(),
            corpus::simplex(),
            corpus::weighted_triangle(),
            corpus::octahedron(),
        ] {
            let d = build_delzant_data(&p);
            for l in d.kernel().as_rows() {
                assert!(d.pi().mul_vec(l).iter().all(Zero::is_zero));
            }
            assert_eq!(d.kernel().rank(), d.k());
            assert_eq!(d.image().rank(), d.n());
            let (_, idx) = saturate_sublattice(d.kernel()).unwrap();
            assert!(idx.is_one());
            assert_eq!(
                d.gamma().is_trivial(),
                d.image() == &LatticeBasis::standard(d.n())
            );
        }
        // octahedron normals only reach the even-parity sublattice
        let d = build_delzant_data(&corpus::octahedron());
        assert_eq!(d.gamma().torsion, int_vec(&[2, 2]));
    }

    #[test]
    fn moment_maps_on_interval() {
        let d = build_delzant_data(&corpus::interval());
        // facet order: (-1, λ=-1), (1, λ=0)
        assert_eq!(d.moment_g(&[c(1.0, 0.0), c(1.0, 0.0)]), vec![-0.5, 0.5]);
        assert_eq!(d.moment_g(&[c(0.0, 0.0), c(0.0, 0.0)]), vec![-1.0, 0.0]);
        assert_eq!(d.moment_a(&[c(1.0, 0.0), c(1.0, 0.0)]), vec![0.0]);
        assert_eq!(d.moment_a(&[c(0.0, 0.0), c(1.0, 0.0)]), vec![-0.5]);
        let m = d.moment_t(&[c(1.0, 0.0), c(1.0, 0.0)], 1e-9).unwrap();
        assert!((m.x[0] - 0.5).abs() < 1e-15);
        let m = d
            .moment_t(&[c(2f64.sqrt(), 0.0), c(0.0, 0.0)], 1e-9)
            .unwrap();
        assert!(m.x[0].abs() < 1e-15);
        assert!(matches!(
            d.moment_t(&[c(0.0, 0.0), c(1.0, 0.0)], 1e-9),
            Err(DelzantError::ResidualTooLarge { .. })
        ));
    }

    #[test]
    fn moment_maps_on_simplex_and_square() {
        let d = build_delzant_data(&corpus::simplex());
        // facets (-1,-1;-1), (0,1;0), (1,0;0)
        let r = (2.0f64 / 3.0).sqrt();
        let y = d.moment_g(&[c(r, 0.0), c(r, 0.0), c(r, 0.0)]);
        assert!((y[0] + 2.0 / 3.0).abs() < 1e-15);
        assert!((y[1] - 1.0 / 3.0).abs() < 1e-15 && (y[2] - 1.0 / 3.0).abs() < 1e-15);

        let bary = d
            .zero_level_point(&rat_vec(&[(1, 3), (1, 3)]), &[0.3, 1.1, 2.0])
            .unwrap();
        assert!(d.moment_a(&bary.z)[0].abs() < 1e-12);

        let sq = build_delzant_data(&corpus::square());
        let ones = vec![c(1.0, 0.0); 4];
        let m = sq.moment_t(&ones, 1e-9).unwrap();
        assert!((m.x[0] - 0.5).abs() < 1e-15 && (m.x[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fiber_radii_examples() {
        let d = build_delzant_data(&corpus::interval());
        let (r, a) = d.fiber_radii(&rat_vec(&[(1, 2)])).unwrap();
        assert_eq!(r, rat_vec(&[(1, 1), (1, 1)]));
        assert!(a.is_empty());
        let (r, a) = d.fiber_radii(&rat_vec(&[(0, 1)])).unwrap();
        assert_eq!(r, rat_vec(&[(2, 1), (0, 1)]));
        assert_eq!(a, vec![1]);
        assert_eq!(
            d.fiber_radii(&rat_vec(&[(3, 2)])),
            Err(DelzantError::OutsidePolytope { facet: 0 })
        );

        let s = build_delzant_data(&corpus::simplex());
        let (r, a) = s.fiber_radii(&rat_vec(&[(1, 3), (1, 3)])).unwrap();
        assert_eq!(r, rat_vec(&[(2, 3), (2, 3), (2, 3)]));
        assert!(a.is_empty());
    }

    #[test]
    fn zero_level_sampling() {
        let d = build_delzant_data(&corpus::interval());
        let z = d
            .zero_level_point(&rat_vec(&[(1, 2)]), &[0.0, 0.0])
            .unwrap();
        assert_eq!(z.z, vec![c(1.0, 0.0), c(1.0, 0.0)]);

        let sq = build_delzant_data(&corpus::square());
        for v in sq.faces().vertices() {
            let pt = sq.sample_zero_level(v, 7).unwrap();
            let zeros = pt.z.iter().filter(|w| w.norm() == 0.0).count();
            assert_eq!(zeros, sq.polytope().active_set(v).len());
        }
        let a = sq
            .sample_zero_level(&rat_vec(&[(1, 3), (1, 5)]), 99)
            .unwrap();
        let b = sq
            .sample_zero_level(&rat_vec(&[(1, 3), (1, 5)]), 99)
            .unwrap();
        assert_eq!(a, b);
        for (w, r2) in a.z.iter().zip(&a.squared_radii) {
            let exact = rat_to_f64(r2);
            assert!((w.norm_sqr() - exact).abs() <= 1e-12 * exact.max(1.0));
        }
    }

    #[test]
    fn exact_moment_inverse() {
        let d = build_delzant_data(&corpus::weighted_triangle());
        for v in d.faces().vertices() {
            let y: RatVector = d
                .polytope()
                .normals()
                .iter()
                .map(|u| dot_rat_int(v, u))
                .collect();
            assert_eq!(d.moment_t_exact(&y).as_ref(), Some(v));
        }
        assert_eq!(d.moment_t_exact(&rat_vec(&[(1, 1), (0, 1), (0, 1)])), None);
    }

    #[test]
    fn supported_kernel() {
        let d = build_delzant_data(&corpus::octahedron());
        for v in d.faces().vertex_face_ids() {
            let set = d.faces().face(v).index_set.clone();
            let k = d.kernel_supported_on(&set);
            assert_eq!(k.len(), 1);
            assert!(d.pi().mul_vec(&k[0]).iter().all(Zero::is_zero));
            assert!((0..d.p()).all(|i| set.contains(&i) || k[0][i].is_zero()));
        }
        let sq = build_delzant_data(&corpus::square());
        assert!(sq.kernel_supported_on(&[0, 1]).is_empty());
    }

    #[test]
    fn properness_bounds() {
        assert_eq!(
            build_delzant_data(&corpus::interval()).properness_bound(),
            rat(2, 1)
        );
        assert_eq!(
            build_delzant_data(&corpus::square()).properness_bound(),
            rat(2, 1)
        );
        // oracle: evaluate 2 * slack at the three vertices (0,0), (2,0), (0,1)
        let t = build_delzant_data(&corpus::weighted_triangle());
        let mut best = rat(0, 1);
        for v in [
            rat_vec(&[(0, 1), (0, 1)]),
            rat_vec(&[(2, 1), (0, 1)]),
            rat_vec(&[(0, 1), (1, 1)]),
        ] {
            for s in t.polytope().slacks(&v) {
                best = best.max(s * rat(2, 1));
            }
        }
        assert_eq!(best, rat(4, 1));
        assert_eq!(t.properness_bound(), best);
    }

    #[test]
    fn stabilizer_examples() {
        let d = build_delzant_data(&corpus::interval());
        let v0 = d.faces().face_id_by_index_set(&[1]).unwrap();
        let s = d.stabilizer_data(v0);
        assert_eq!(s.b_basis, vec![int_vec(&[1])]);
        assert_eq!(
            (s.dim_b, s.orbifold_index.clone(), s.smooth),
            (1, BigInt::one(), true)
        );

        let sq = build_delzant_data(&corpus::square());
        // facet (1,0) is index 3 in sorted order
        let edge = sq.faces().face_id_by_index_set(&[3]).unwrap();
        let s = sq.stabilizer_data(edge);
        assert_eq!(s.b_basis, vec![int_vec(&[1, 0])]);
        assert_eq!(s.dim_b, 1);
        assert!(s.orbifold_index.is_one());

        let t = build_delzant_data(&corpus::weighted_triangle());
        let singular = t.faces().face_id_by_index_set(&[0, 2]).unwrap();
        let s = t.stabilizer_data(singular);
        assert_eq!(s.orbifold_index, BigInt::from(2));
        assert!(!s.smooth);
        let indices: Vec<BigInt> = t
            .faces()
            .vertex_face_ids()
            .into_iter()
            .map(|f| t.stabilizer_data(f).orbifold_index)
            .collect();
        assert_eq!(indices.iter().filter(|i| !i.is_one()).count(), 1);
    }

    #[test]
    fn stabilizer_and_fiber_dimensions() {
        for p in [
            corpus::square(),
            corpus::weighted_triangle(),
            corpus::octahedron(),
        ] {
            let d = build_delzant_data(&p);
            let mut fixed = 0;
            for (id, f) in d.faces().faces().iter().enumerate() {
                let s = d.stabilizer_data(id);
                assert_eq!(s.dim_b, d.n() - f.dim);
                assert!(s.orbifold_index >= BigInt::one());
                if s.smooth {
                    assert!(s.orbifold_index.is_one());
                }
                assert_eq!(d.fiber_dimension(id), f.dim);
                if d.fiber_dimension(id) == 0 {
                    fixed += 1;
                }
            }
            assert_eq!(fixed, d.faces().vertices().len());
        }
        // octahedron vertices: span equals the torus lattice but the cone is not simplicial
        let d = build_delzant_data(&corpus::octahedron());
        for v in d.faces().vertex_face_ids() {
            let s = d.stabilizer_data(v);
            assert!(s.orbifold_index.is_one());
            assert!(!s.smooth);
        }
    }

    #[test]
    fn retarget_interval_to_half_lattice() {
        let d = build_delzant_data(&corpus::interval());
        let r = d.retarget_lattice(&[rat_vec(&[(1, 2)])]).unwrap();
        assert_eq!(r.gamma.torsion, int_vec(&[2]));
        assert_eq!(r.polytope, *d.polytope());
        for v in d.faces().vertex_face_ids() {
            assert_eq!(r.stabilizers[v].orbifold_index, BigInt::from(2));
            assert_eq!(r.stabilizers[v].saturation_basis, vec![rat_vec(&[(1, 2)])]);
        }
        let same = d.retarget_lattice(&[rat_vec(&[(1, 1)])]).unwrap();
        assert!(same.gamma.is_trivial());
        assert_eq!(
            same.stabilizers,
            (0..3).map(|f| d.stabilizer_data(f)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn retarget_square_changes_only_vertical_edges() {
        let d = build_delzant_data(&corpus::square());
        let r = d
            .retarget_lattice(&[rat_vec(&[(1, 2), (0, 1)]), rat_vec(&[(0, 1), (1, 1)])])
            .unwrap();
        assert_eq!(r.gamma.torsion, int_vec(&[2]));
        for (id, f) in d.faces().faces_of_dim(1) {
            let u = &d.polytope().facets()[f.index_set[0]].normal;
            let expected = if u[0].is_zero() { 1 } else { 2 };
            assert_eq!(r.stabilizers[id].orbifold_index, BigInt::from(expected));
        }
    }

    #[test]
    fn retarget_errors() {
        let d = build_delzant_data(&corpus::interval());
        assert_eq!(
            d.retarget_lattice(&[rat_vec(&[(2, 1)])]),
            Err(DelzantError::NotAnOverlattice)
        );
        let sq = build_delzant_data(&corpus::square());
        assert!(matches!(
            sq.retarget_lattice(&[rat_vec(&[(1, 2), (1, 2)])]),
            Err(DelzantError::InfiniteIndex { rank: 1, dim: 2 })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn zero_level_roundtrip(seed in any::<u64>()) {
            let d = build_delzant_data(&corpus::weighted_triangle());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = d.sample_polytope_point(&mut rng);
            let z = d.sample_zero_level_with(&x, &mut rng).unwrap();
            let m = d.moment_t(&z.z, 1e-9).unwrap();
            for (a, b) in m.x.iter().zip(&x) {
                prop_assert!((a - rat_to_f64(b)).abs() < 1e-9);
            }
            let bound = rat_to_f64(&d.properness_bound());
            for w in &z.z {
                prop_assert!(w.norm_sqr() <= bound * (1.0 + 1e-12));
            }
        }
    }
}
