use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{build_fan, monoid_generators, ChartMonoid, Fan, ToricError};
use crate::delzant::DelzantData;
use crate::linalg::{dot, int_to_f64, smith_normal_form, IntMatrix, IntVector, SmithDecomposition};

/// A point of the affine chart `U_F`: one value per monoid generator.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    pub face: usize,
    pub values: Vec<Complex64>,
}

/// Generators of the `target` monoid written over the `source` monoid,
/// allowing negative powers of the generators in `invertible`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartInclusion {
    pub source: usize,
    pub target: usize,
    /// Row per target generator, column per source generator.
    pub table: Vec<IntVector>,
    /// Source generators that do not vanish on the overlap.
    pub invertible: Vec<usize>,
}

impl ChartInclusion {
    /// Target chart values computed from source chart values.
    pub fn apply(&self, source_values: &[Complex64]) -> Vec<Complex64> {
        self.table
            .iter()
            .map(|row| {
                row.iter()
                    .zip(source_values)
                    .fold(Complex64::new(1.0, 0.0), |acc, (e, v)| {
                        acc * int_power(*v, e.to_i64().expect("small exponent"))
                    })
            })
            .collect()
    }

    /// Exact determinant of a square table.
    pub fn determinant(&self) -> Option<BigInt> {
        let n = self.table.len();
        if self.table.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(IntMatrix::from_rows(n, &self.table).determinant())
    }
}

/// Output of the fiber log-solve: `v` in `L_C` with `e^{2πi v} · 1_F = z`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberSolution {
    pub v: Vec<Complex64>,
    /// `max_j |e^{2πi v_j} - z_j| / max(1, |z_j|)` off `I_F`, combined with
    /// `‖π(v)‖_∞`.
    pub residual: f64,
}

fn int_power(z: Complex64, e: i64) -> Complex64 {
    if e == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        z.powi(e as i32)
    }
}

/// `(e^{2πi v_j} z_j)_j`: the action of `G_C = (C^*)^p` written additively.
pub fn act(z: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    z.iter()
        .zip(v)
        .map(|(zj, vj)| (Complex64::new(0.0, TAU) * vj).exp() * zj)
        .collect()
}

/// `1_F`: ones off `I_F`, zeros on it.
pub fn base_point(p: usize, index_set: &[usize]) -> Vec<Complex64> {
    (0..p)
        .map(|j| {
            if index_set.contains(&j) {
                Complex64::zero()
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect()
}

/// The fan of a polytope together with all of its chart monoids.
#[derive(Clone, Debug)]
pub struct ToricModel {
    data: DelzantData,
    fan: Fan,
    monoids: Vec<ChartMonoid>,
    exponents: Vec<Vec<Vec<i64>>>,
    perp_solvers: Vec<SmithDecomposition>,
    normal_solver: SmithDecomposition,
}

impl ToricModel {
    pub fn new(data: DelzantData) -> Result<Self, ToricError> {
        let fan = build_fan(&data);
        let monoids = (0..fan.len())
            .map(|f| monoid_generators(f, &fan.lattice_cone(f)))
            .collect::<Result<Vec<_>, _>>()?;
        let exponents = monoids
            .iter()
            .map(|m| m.exponents(fan.normal_coords()))
            .collect();
        let n = data.n();
        let perp_solvers = monoids
            .iter()
            .map(|m| smith_normal_form(&IntMatrix::from_rows(n, &m.perp_basis)))
            .collect();
        let normal_solver = smith_normal_form(&IntMatrix::from_columns(n, fan.normal_coords()));
        Ok(Self {
            data,
            fan,
            monoids,
            exponents,
            perp_solvers,
            normal_solver,
        })
    }

    pub fn data(&self) -> &DelzantData {
        &self.data
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn monoid(&self, face: usize) -> &ChartMonoid {
        &self.monoids[face]
    }

    pub fn monoids(&self) -> &[ChartMonoid] {
        &self.monoids
    }

    /// `<g, u_j>` for each generator `g` of the face's monoid.
    pub fn exponents(&self, face: usize) -> &[Vec<i64>] {
        &self.exponents[face]
    }

    fn index_set(&self, face: usize) -> &[usize] {
        self.fan.index_set(face)
    }

    fn check_len(&self, z: &[Complex64]) -> Result<(), ToricError> {
        let p = self.data.p();
        if z.len() != p {
            return Err(ToricError::DimensionMismatch {
                expected: p,
                found: z.len(),
            });
        }
        Ok(())
    }

    /// `φ_F(z)(x) = ∏_j z_j^{<x, u_j>}` for `z` in the stratum `V_F`.
    pub fn evaluate_chart(&self, face: usize, z: &[Complex64]) -> Result<ChartPoint, ToricError> {
        self.check_len(z)?;
        let set = self.index_set(face);
        let zero_pattern_matches =
            (0..z.len()).all(|j| (z[j] == Complex64::zero()) == set.contains(&j));
        if !zero_pattern_matches {
            return Err(ToricError::WrongStratum { face });
        }
        self.evaluate_chart_on(face, z)
    }

    /// `φ_F` on the open set `W_F` of points whose zeros lie in `I_F`.
    pub fn evaluate_chart_on(
        &self,
        face: usize,
        z: &[Complex64],
    ) -> Result<ChartPoint, ToricError> {
        self.check_len(z)?;
        let set = self.index_set(face);
        if (0..z.len()).any(|j| z[j] == Complex64::zero() && !set.contains(&j)) {
            return Err(ToricError::WrongStratum { face });
        }
        let mut values = Vec::with_capacity(self.exponents[face].len());
        for (g, row) in self.exponents[face].iter().enumerate() {
            let mut acc = Complex64::new(1.0, 0.0);
            for (j, &e) in row.iter().enumerate() {
                if z[j] == Complex64::zero() {
                    if e < 0 {
                        return Err(ToricError::NegativePowerOfZero {
                            generator: g,
                            coordinate: j,
                        });
                    }
                    if e > 0 {
                        acc = Complex64::zero();
                    }
                } else {
                    acc *= int_power(z[j], e);
                }
            }
            values.push(acc);
        }
        Ok(ChartPoint { face, values })
    }

    /// `x` if `x` lies in `σ_F^⊥`, otherwise `0`.
    pub fn project_to_perp(&self, face: usize, x: &[BigInt]) -> Result<IntVector, ToricError> {
        let m = &self.monoids[face];
        if x.len() != m.ambient_dim() || !m.contains(x) {
            return Err(ToricError::NotInCone { face });
        }
        Ok(if m.in_perp(x) {
            x.to_vec()
        } else {
            vec![BigInt::zero(); x.len()]
        })
    }

    /// Writes `x` in `σ_F^∨ ∩ Π*` as an integer combination of the generators
    /// of face `e`, where `I_E ⊇ I_F`. Negative coefficients only occur on
    /// generators in `σ_F^⊥`, which are invertible on `U_F`.
    fn express(&self, e: usize, f: usize, x: &[BigInt]) -> Result<IntVector, ToricError> {
        let me = &self.monoids[e];
        let mf = &self.monoids[f];
        if !mf.contains(x) {
            return Err(ToricError::NotInCone { face: f });
        }
        let units: Vec<usize> = (0..me.all_generators.len())
            .filter(|&k| mf.in_perp(&me.all_generators[k]))
            .collect();
        // sum of the pointed units lies in the relative interior of σ_E^∨ ∩ σ_F^⊥
        let n = me.ambient_dim();
        let mut m = vec![BigInt::zero(); n];
        for &k in units.iter().filter(|&&k| k >= 2 * me.perp_basis.len()) {
            for (a, b) in m.iter_mut().zip(&me.all_generators[k]) {
                *a += b;
            }
        }
        let mut shift = BigInt::zero();
        for h in me.halfspaces() {
            let need = -dot(x, h);
            if need.is_positive() {
                let rate = dot(&m, h);
                if !rate.is_positive() {
                    return Err(ToricError::NotIncident { e, f });
                }
                let steps = (&need + &rate - 1) / &rate;
                shift = shift.max(steps);
            }
        }
        let target: IntVector = x.iter().zip(&m).map(|(a, b)| a + &shift * b).collect();
        let mut coeffs = me
            .decompose(&target)
            .expect("shifted vector lies in the source monoid");
        if !shift.is_zero() {
            for &k in &units {
                if k >= 2 * me.perp_basis.len() {
                    coeffs[k] -= &shift;
                }
            }
        }
        Ok(coeffs)
    }

    /// Generators of the chart of `f` expressed through the chart of `e`,
    /// for `Ē ⊆ F̄` (so `U_F ⊆ U_E`).
    pub fn chart_inclusion(&self, e: usize, f: usize) -> Result<ChartInclusion, ToricError> {
        if !self.data.faces().is_incident(e, f) {
            return Err(ToricError::NotIncident { e, f });
        }
        self.expressed_through(e, f, &self.monoids[f].all_generators, f)
    }

    /// Generators of the chart of `a` expressed through the chart of `b`,
    /// valid on the overlap `U_J`, where `J` is the smallest face whose
    /// closure contains both.
    pub fn transition(&self, a: usize, b: usize) -> Result<ChartInclusion, ToricError> {
        let ia = self.index_set(a);
        let join: Vec<usize> = self
            .index_set(b)
            .iter()
            .copied()
            .filter(|i| ia.contains(i))
            .collect();
        let j = self
            .data
            .faces()
            .face_id_by_index_set(&join)
            .expect("intersections of closed active sets are faces");
        let mut inc = self.expressed_through(b, j, &self.monoids[a].all_generators, j)?;
        inc.target = a;
        Ok(inc)
    }

    fn expressed_through(
        &self,
        e: usize,
        f: usize,
        gens: &[IntVector],
        target: usize,
    ) -> Result<ChartInclusion, ToricError> {
        let table = gens
            .iter()
            .map(|g| self.express(e, f, g))
            .collect::<Result<Vec<_>, _>>()?;
        let me = &self.monoids[e];
        let mf = &self.monoids[f];
        let invertible = (0..me.all_generators.len())
            .filter(|&k| mf.in_perp(&me.all_generators[k]))
            .collect();
        Ok(ChartInclusion {
            source: e,
            target,
            table,
            invertible,
        })
    }

    /// Recovers `v in L_C` with `e^{2πi v_j} = z_j` for `j ∉ I_F`, given
    /// `z in V_F` whose chart values match those of `1_F`.
    ///
    /// Principal logarithms give `w` off `I_F`; an integer `t in Π` and a
    /// complex completion on `I_F` make `π(w) + t = 0` solvable, and an
    /// integer `w'` with `π(w') = t` absorbs the branch choice.
    pub fn fiber_log_solve(
        &self,
        face: usize,
        z: &[Complex64],
        tol: f64,
    ) -> Result<FiberSolution, ToricError> {
        let point = self.evaluate_chart(face, z)?;
        let p = self.data.p();
        let n = self.data.n();
        let set = self.index_set(face).to_vec();
        let reference = self.evaluate_chart(face, &base_point(p, &set))?;
        let chart_dev = point
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        if chart_dev > tol {
            return Err(ToricError::NotInFiber {
                residual: chart_dev,
            });
        }

        let ut = self.fan.normal_coords();
        let ut_f: Vec<Vec<f64>> = ut
            .iter()
            .map(|u| u.iter().map(int_to_f64).collect())
            .collect();
        let two_pi_i = Complex64::new(0.0, TAU);
        let mut v: Vec<Complex64> = (0..p)
            .map(|j| {
                if set.contains(&j) {
                    Complex64::zero()
                } else {
                    z[j].ln() / two_pi_i
                }
            })
            .collect();
        let s: Vec<Complex64> = (0..n)
            .map(|k| (0..p).map(|j| v[j] * ut_f[j][k]).sum())
            .collect();

        let perp = &self.monoids[face].perp_basis;
        let t: IntVector = if perp.is_empty() {
            vec![BigInt::zero(); n]
        } else {
            let rhs: IntVector = perp
                .iter()
                .map(|row| {
                    let val: f64 = row.iter().zip(&s).map(|(a, b)| -int_to_f64(a) * b.re).sum();
                    BigInt::from(val.round() as i64)
                })
                .collect();
            self.perp_solvers[face]
                .solve(&rhs)
                .ok_or(ToricError::NoIntegerCompletion)?
        };

        if !set.is_empty() {
            let a = DMatrix::from_fn(n, set.len(), |k, c| ut_f[set[c]][k]);
            let rhs_re = DMatrix::from_fn(n, 1, |k, _| -s[k].re - int_to_f64(&t[k]));
            let rhs_im = DMatrix::from_fn(n, 1, |k, _| -s[k].im);
            let re = crate::linalg::least_squares(&a, &rhs_re);
            let im = crate::linalg::least_squares(&a, &rhs_im);
            for (c, &i) in set.iter().enumerate() {
                v[i] = Complex64::new(re[(c, 0)], im[(c, 0)]);
            }
        }

        let w_int = self
            .normal_solver
            .solve(&t)
            .ok_or(ToricError::NoIntegerCompletion)?;
        for (vj, wj) in v.iter_mut().zip(&w_int) {
            *vj += int_to_f64(wj);
        }

        let kernel_res = (0..n)
            .map(|k| (0..p).map(|j| v[j] * ut_f[j][k]).sum::<Complex64>().norm())
            .fold(0.0f64, f64::max);
        let moved = act(&base_point(p, &set), &v);
        let fiber_res = (0..p)
            .filter(|j| !set.contains(j))
            .map(|j| (moved[j] - z[j]).norm() / z[j].norm().max(1.0))
            .fold(0.0f64, f64::max);
        let residual = kernel_res.max(fiber_res);
        if residual > tol {
            return Err(ToricError::NotInFiber { residual });
        }
        Ok(FiberSolution { v, residual })
    }

    /// For two points of `V_F` with equal chart values, finds `v in L_C`
    /// carrying one to the other off `I_F`.
    pub fn relate_fiber_points(
        &self,
        face: usize,
        z: &[Complex64],
        w: &[Complex64],
        tol: f64,
    ) -> Result<FiberSolution, ToricError> {
        self.check_len(z)?;
        self.check_len(w)?;
        let set = self.index_set(face);
        let ratio: Vec<Complex64> = (0..z.len())
            .map(|j| {
                if set.contains(&j) || z[j] == Complex64::zero() {
                    Complex64::zero()
                } else {
                    w[j] / z[j]
                }
            })
            .collect();
        self.fiber_log_solve(face, &ratio, tol)
    }
}
