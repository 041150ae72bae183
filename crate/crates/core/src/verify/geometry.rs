use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_traits::{Signed, Zero};
use rand::Rng;

use super::{batched, CheckRecord, Tally};
use crate::delzant::{DelzantData, DelzantError};
use crate::linalg::{int_to_f64, rank, rat_to_f64, IntVector, Rational};
use crate::toric::transversality_check;

/// Samples `x` in the bounding box and checks the moment map over it:
/// feasibility agrees with nonnegative radii, `J_T` of a fiber point
/// recovers `x`, images satisfy the facet inequalities, and each vertex is
/// attained exactly by its fixed point.
pub fn check_moment_image(d: &DelzantData, samples: usize, seed: u64, tol: f64) -> CheckRecord {
    let parts = batched(seed, "moment_image", samples, |rng, count| {
        let mut t = Tally::default();
        let mut feasible = 0u64;
        let mut disagreements = 0u64;
        for _ in 0..count {
            let x = d.sample_box_point(rng);
            let inside = d.polytope().contains(&x);
            let radii = d.fiber_radii(&x);
            let radii_nonneg = radii
                .as_ref()
                .map(|(r, _)| r.iter().all(|e| !e.is_negative()))
                .unwrap_or(false);
            if inside != radii_nonneg {
                disagreements += 1;
            }
            if !inside {
                continue;
            }
            feasible += 1;
            let z = d.sample_zero_level_with(&x, rng).expect("x is feasible");
            match d.moment_t(&z.z, tol) {
                Ok(m) => {
                    let roundtrip =
                        m.x.iter()
                            .zip(&x)
                            .map(|(a, b)| (a - rat_to_f64(b)).abs())
                            .fold(0.0f64, f64::max);
                    let outside = facet_violation(d, &m.x);
                    t.record(roundtrip.max(outside), true);
                }
                Err(_) => t.record(f64::INFINITY, false),
            }
        }
        (t, feasible, disagreements)
    });
    let mut tally = Tally::default();
    let (mut feasible, mut disagreements) = (0, 0);
    for (t, f, g) in parts {
        tally = tally.merge(t);
        feasible += f;
        disagreements += g;
    }

    let mut exact_vertices = 0usize;
    let two = Rational::from_integer(2.into());
    for v in d.faces().vertices() {
        let pt = d
            .zero_level_point(v, &vec![0.0; d.p()])
            .expect("vertices lie in the polytope");
        let y: Vec<Rational> = pt
            .squared_radii
            .iter()
            .zip(d.polytope().offsets())
            .map(|(r2, l)| r2 / &two + l)
            .collect();
        if d.moment_t_exact(&y).as_ref() == Some(v) {
            exact_vertices += 1;
        }
        match d.moment_t(&pt.z, tol) {
            Ok(m) => {
                let r =
                    m.x.iter()
                        .zip(v)
                        .map(|(a, b)| (a - rat_to_f64(b)).abs())
                        .fold(0.0f64, f64::max);
                tally.record(r, true);
            }
            Err(_) => tally.record(f64::INFINITY, false),
        }
    }
    let nv = d.faces().vertices().len();
    CheckRecord::new(
        "moment_image",
        "J_T(X) = Δ",
        samples as u64,
        tally.max,
        tol,
        tally.failures == 0 && disagreements == 0 && exact_vertices == nv,
        format!(
            "{feasible} of {samples} box samples feasible; {disagreements} feasibility disagreements; \
             {exact_vertices} of {nv} vertices attained exactly"
        ),
    )
}

fn facet_violation(d: &DelzantData, x: &[f64]) -> f64 {
    d.normals_f64()
        .iter()
        .zip(d.lambda_f64())
        .map(|(u, l)| l - u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
        .fold(0.0f64, f64::max)
}

/// Least-squares residual `‖M c - b‖_∞`.
fn lsq_residual(m: &DMatrix<f64>, b: &[f64]) -> f64 {
    let rhs = DMatrix::from_column_slice(b.len(), 1, b);
    let c = crate::linalg::least_squares(m, &rhs);
    (m * c - rhs).amax()
}

/// Any two zero-level points over `x` differ by a torus element: the phase
/// difference off the active set splits as `π^T s + l` with `l in L_R`.
/// Over a vertex, `l` alone suffices.
pub fn check_orbit_theorem(
    d: &DelzantData,
    x: &[Rational],
    fibers: usize,
    seed: u64,
    tol: f64,
) -> Result<CheckRecord, DelzantError> {
    let (radii, active) = d.fiber_radii(x)?;
    let face = d
        .faces()
        .face_id_by_index_set(&active)
        .expect("active sets of points are faces");
    let dim_f = d.faces().face(face).dim;
    let free: Vec<usize> = (0..d.p()).filter(|i| !active.contains(i)).collect();
    let n = d.n();
    let lrows = d.kernel_f64();
    let k = lrows.len();
    let full = DMatrix::from_fn(free.len(), n + k, |r, c| {
        let j = free[r];
        if c < n {
            d.normals_f64()[j][c]
        } else {
            lrows[c - n][j]
        }
    });
    let a_only = DMatrix::from_fn(free.len(), k, |r, c| lrows[c][free[r]]);

    let restricted: Vec<IntVector> = d
        .kernel()
        .as_rows()
        .iter()
        .map(|l| free.iter().map(|&j| l[j].clone()).collect())
        .collect();
    let exact_rank_ok = rank(&restricted) == free.len() - dim_f;

    let label = format!(
        "orbit/{}",
        d.faces()
            .face(face)
            .index_set
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    let parts = batched(seed, &label, fibers, |rng, count| {
        let mut t = Tally::default();
        for _ in 0..count {
            let th0: Vec<f64> = (0..d.p()).map(|_| rng.gen::<f64>() * TAU).collect();
            let th1: Vec<f64> = (0..d.p()).map(|_| rng.gen::<f64>() * TAU).collect();
            let z0 = d.zero_level_point(x, &th0).expect("x is feasible");
            let z1 = d.zero_level_point(x, &th1).expect("x is feasible");
            let same_radii = z0.z.iter().zip(&z1.z).zip(&radii).all(|((a, b), r2)| {
                (a.norm_sqr() - b.norm_sqr()).abs() <= 1e-12 * rat_to_f64(r2).max(1.0)
            });
            let b: Vec<f64> = free.iter().map(|&j| th1[j] - th0[j]).collect();
            let mut r = lsq_residual(&full, &b);
            if dim_f == 0 && k > 0 {
                r = r.max(lsq_residual(&a_only, &b));
            }
            t.record(r, same_radii);
        }
        t
    });
    let t = Tally::sum(parts);
    Ok(CheckRecord::new(
        "orbit_theorem",
        "J_T^{-1}(x) is a single T-orbit",
        fibers as u64,
        t.max,
        tol,
        t.failures == 0 && exact_rank_ok,
        format!("face of dimension {dim_f}; rank of L off the active set matches: {exact_rank_ok}"),
    ))
}

/// The orbit check at the relative interior point of every face, merged.
pub(crate) fn check_orbit_all_faces(
    d: &DelzantData,
    pairs: usize,
    seed: u64,
    tol: f64,
) -> CheckRecord {
    let mut samples = 0;
    let mut max = 0.0f64;
    let mut ok = true;
    for f in d.faces().faces() {
        let r = check_orbit_theorem(d, &f.interior_point, pairs, seed, tol)
            .expect("interior points lie in the polytope");
        samples += r.samples;
        max = max.max(r.max_residual);
        ok &= r.passed();
    }
    CheckRecord::new(
        "orbit_theorem",
        "J_T^{-1}(x) is a single T-orbit",
        samples,
        max,
        tol,
        ok,
        format!(
            "{pairs} fiber pairs over each of {} faces; connectedness of level sets is not certified",
            d.faces().len()
        ),
    )
}

/// Exact identities per face: fiber dimension, normal rank, stabilizer
/// dimension, and fixed points matching vertices.
pub fn check_face_structure(d: &DelzantData) -> CheckRecord {
    let faces = d.faces();
    let n = d.n();
    let mut mismatches = 0u64;
    let mut fixed = 0usize;
    for (id, f) in faces.faces().iter().enumerate() {
        let fiber = d.fiber_dimension(id);
        let normal_dim = faces.normal_rank_dim(d.polytope(), f);
        let stab = d.stabilizer_data(id);
        if fiber != f.dim || normal_dim != f.dim || stab.dim_b != n - f.dim {
            mismatches += 1;
        }
        if fiber == 0 {
            fixed += 1;
        }
    }
    let vertices = faces.vertices().len();
    let euler = faces.boundary_euler_characteristic();
    let sphere = 1 - (-1i64).pow(n as u32);
    let ok = mismatches == 0 && fixed == vertices && euler == sphere;
    CheckRecord::new(
        "face_structure",
        "dim J_T^{-1}(F) = dim F; fixed points are the vertices",
        faces.len() as u64,
        mismatches as f64,
        0.0,
        ok,
        format!(
            "{} faces, f-vector {:?}, {fixed} fixed points, {vertices} vertices, Euler {euler}",
            faces.len(),
            faces.f_vector()
        ),
    )
}

fn interior_sample<R: Rng>(d: &DelzantData, rng: &mut R) -> Vec<Rational> {
    loop {
        let x = d.sample_polytope_point(rng);
        if d.polytope().slacks(&x).iter().all(|s| s.is_positive()) {
            return x;
        }
    }
}

/// Real rank of the differential of `J_A` at interior zero-level points
/// is `k = p - n`, so the zero level has dimension `2p - k = p + n`.
pub fn check_zero_level_rank(
    d: &DelzantData,
    samples: usize,
    seed: u64,
    threshold: f64,
) -> CheckRecord {
    let p = d.p();
    let k = d.k();
    let lrows = d.kernel_f64().to_vec();
    let parts = batched(seed, "zero_level_rank", samples, |rng, count| {
        let mut t = Tally::default();
        let mut min_ratio = f64::INFINITY;
        for _ in 0..count {
            let x = interior_sample(d, rng);
            let z = d.sample_zero_level_with(&x, rng).expect("x is feasible").z;
            let m = DMatrix::from_fn(2 * p, k, |r, c| {
                let i = r / 2;
                let part = if r % 2 == 0 { z[i].re } else { z[i].im };
                part * lrows[c][i]
            });
            let (cols, smallest) = crate::linalg::independent_columns(&m, threshold);
            let r = cols.len();
            min_ratio = min_ratio.min(smallest);
            t.record((r as f64 - k as f64).abs(), r == k);
        }
        (t, min_ratio)
    });
    let mut t = Tally::default();
    let mut min_ratio = f64::INFINITY;
    for (part, ratio) in parts {
        t = t.merge(part);
        min_ratio = min_ratio.min(ratio);
    }
    let dim_ok = 2 * p - k == p + d.n();
    CheckRecord::new(
        "zero_level_rank",
        "J_A^{-1}(0) is a submanifold of dimension 2p - k = p + n",
        samples as u64,
        t.max,
        0.0,
        t.failures == 0 && dim_ok,
        format!(
            "k = {k}, zero-level dimension {}; smallest relative pivot {min_ratio:.3e}, threshold {threshold:e}",
            2 * p - k
        ),
    )
}

/// Every squared radius over the zero level is bounded by the exact
/// vertex bound.
pub fn check_properness(d: &DelzantData, samples: usize, seed: u64) -> CheckRecord {
    let bound = d.properness_bound();
    let parts = batched(seed, "properness", samples, |rng, count| {
        let mut t = Tally::default();
        for _ in 0..count {
            let x = d.sample_polytope_point(rng);
            let (radii, _) = d.fiber_radii(&x).expect("x is feasible");
            let worst = radii.iter().max().cloned().unwrap_or_else(Rational::zero);
            t.record(0.0, worst <= bound);
        }
        t
    });
    let t = Tally::sum(parts);
    CheckRecord::new(
        "properness",
        "|z|^2 is bounded on J_A^{-1}(0)",
        samples as u64,
        t.failures as f64,
        0.0,
        t.failures == 0,
        format!("bound {}", crate::linalg::format_rational(&bound)),
    )
}

/// For random zero-level `z` and `v in L_R`, the curve `s^v · z` leaves the
/// zero level unless it fixes `z`, with `g'(s) > 0` whenever some
/// `v_i z_i != 0`.
pub fn check_transversality(d: &DelzantData, samples: usize, seed: u64, tol: f64) -> CheckRecord {
    let faces = d.faces();
    let parts = batched(seed, "transversality", samples, |rng, count| {
        let mut t = Tally::default();
        let mut nontrivial = 0u64;
        for _ in 0..count {
            let f = faces.face(rng.gen_range(0..faces.len()));
            let x = &f.interior_point;
            let z = d.sample_zero_level_with(x, rng).expect("x is feasible").z;
            let basis: Vec<Vec<f64>> = if rng.gen_bool(0.5) {
                d.kernel_f64().to_vec()
            } else {
                d.kernel_supported_on(&f.index_set)
                    .iter()
                    .map(|l| l.iter().map(int_to_f64).collect())
                    .collect()
            };
            let mut v = vec![0.0; d.p()];
            for l in &basis {
                let c: f64 = rng.gen_range(-1.0..1.0);
                for (vi, li) in v.iter_mut().zip(l) {
                    *vi += c * li;
                }
            }
            let r = transversality_check(d, &z, &v, tol);
            if r.nontrivial {
                nontrivial += 1;
            }
            t.record(if r.holds { 0.0 } else { 1.0 }, r.holds);
        }
        (t, nontrivial)
    });
    let mut t = Tally::default();
    let mut nontrivial = 0;
    for (part, nt) in parts {
        t = t.merge(part);
        nontrivial += nt;
    }
    CheckRecord::new(
        "transversality",
        "L_R-orbits meet J_A^{-1}(0) transversally",
        samples as u64,
        t.failures as f64,
        0.0,
        t.failures == 0,
        format!(
            "{nontrivial} nontrivial and {} trivial pairs; level tolerance {tol:e}",
            samples as u64 - nontrivial
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delzant::build_delzant_data;
    use crate::linalg::rat_vec;
    use crate::polytope::corpus;

    #[test]
    fn moment_image_on_interval() {
        let d = build_delzant_data(&corpus::interval());
        let r = check_moment_image(&d, 2000, 1, 1e-9);
        assert!(r.passed(), "{}", r.detail);
        assert!(r.max_residual < 1e-9);
        assert!(r.detail.contains("2 of 2 vertices attained exactly"));
    }

    #[test]
    fn orbit_theorem_examples() {
        let d = build_delzant_data(&corpus::interval());
        let r = check_orbit_theorem(&d, &rat_vec(&[(1, 2)]), 20, 0, 1e-9).unwrap();
        assert!(r.passed());
        let sq = build_delzant_data(&corpus::square());
        let r = check_orbit_theorem(&sq, &rat_vec(&[(1, 3), (2, 3)]), 50, 0, 1e-9).unwrap();
        assert!(r.passed());
        for v in sq.faces().vertices() {
            let r = check_orbit_theorem(&sq, v, 20, 0, 1e-12).unwrap();
            assert!(r.passed() && r.max_residual < 1e-12);
        }
        assert_eq!(
            check_orbit_theorem(&d, &rat_vec(&[(2, 1)]), 5, 0, 1e-9),
            Err(DelzantError::OutsidePolytope { facet: 0 })
        );
    }

    #[test]
    fn face_structure_examples() {
        let d = build_delzant_data(&corpus::interval());
        let r = check_face_structure(&d);
        assert!(r.passed());
        assert!(r.detail.contains("2 fixed points"));
        let oct = build_delzant_data(&corpus::octahedron());
        let r = check_face_structure(&oct);
        assert!(r.passed());
        assert!(r.detail.contains("6 fixed points") && r.detail.contains("27 faces"));
    }

    #[test]
    fn zero_level_rank_examples() {
        for p in [
            corpus::interval(),
            corpus::simplex(),
            corpus::weighted_triangle(),
        ] {
            let d = build_delzant_data(&p);
            let r = check_zero_level_rank(&d, 200, 3, 1e-8);
            assert!(r.passed(), "{}", r.detail);
            assert!(r
                .detail
                .contains(&format!("zero-level dimension {}", d.p() + d.n())));
        }
    }

    #[test]
    fn transversality_and_properness() {
        for p in [
            corpus::square(),
            corpus::weighted_triangle(),
            corpus::octahedron(),
        ] {
            let d = build_delzant_data(&p);
            let r = check_transversality(&d, 300, 2, 1e-9);
            assert!(r.passed(), "{}", r.detail);
            assert!(check_properness(&d, 200, 2).passed());
        }
    }
}
