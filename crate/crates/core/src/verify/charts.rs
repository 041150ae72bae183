use std::f64::consts::TAU;

use itertools::Itertools;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{batched, CheckRecord, Tally};
use crate::linalg::IntVector;
use crate::toric::{act, base_point, ToricModel};

fn relative_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm() / x.norm().max(y.norm()).max(1.0))
        .fold(0.0f64, f64::max)
}

/// Random point of the stratum `V_F`.
fn stratum_point(rng: &mut ChaCha8Rng, p: usize, set: &[usize]) -> Vec<Complex64> {
    (0..p)
        .map(|j| {
            let r = rng.gen_range(0.5..1.5);
            let t = rng.gen::<f64>() * TAU;
            if set.contains(&j) {
                Complex64::zero()
            } else {
                Complex64::from_polar(r, t)
            }
        })
        .collect()
}

/// Random `v in L_C` with real coefficients in `[-1, 1]` and imaginary
/// coefficients in `[-im, im]` over the kernel basis.
fn kernel_sample(m: &ToricModel, rng: &mut ChaCha8Rng, im: f64) -> Vec<Complex64> {
    let mut v = vec![Complex64::zero(); m.data().p()];
    for l in m.data().kernel_f64() {
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-im..=im));
        for (vj, lj) in v.iter_mut().zip(l) {
            *vj += c * lj;
        }
    }
    v
}

/// Runs `sample` `samples` times for every face and merges the tallies.
fn per_face<F>(m: &ToricModel, label: &str, samples: usize, seed: u64, sample: F) -> Tally
where
    F: Fn(&mut ChaCha8Rng, usize) -> (f64, bool) + Sync,
{
    let mut total = Tally::default();
    for f in 0..m.fan().len() {
        let parts = batched(seed, &format!("{label}/{f}"), samples, |rng, count| {
            let mut t = Tally::default();
            for _ in 0..count {
                let (r, ok) = sample(rng, f);
                t.record(r, ok);
            }
            t
        });
        total = total.merge(Tally::sum(parts));
    }
    total
}

/// `φ_F(a · z) = φ_F(z)` for `a = e^{2πi v}`, `v in L_C`.
pub fn check_a_invariance(m: &ToricModel, samples: usize, seed: u64, tol: f64) -> CheckRecord {
    let p = m.data().p();
    let t = per_face(m, "a_invariance", samples, seed, |rng, f| {
        let z = stratum_point(rng, p, m.fan().index_set(f));
        let v = kernel_sample(m, rng, 0.1);
        match (m.evaluate_chart(f, &z), m.evaluate_chart(f, &act(&z, &v))) {
            (Ok(a), Ok(b)) => (relative_deviation(&a.values, &b.values), true),
            _ => (f64::INFINITY, false),
        }
    });
    CheckRecord::new(
        "chart_a_invariance",
        "φ_F(a·z) = φ_F(z) for a in A_C",
        t.count,
        t.max,
        tol,
        t.failures == 0,
        format!("{samples} samples per face over {} faces", m.fan().len()),
    )
}

/// `φ_F(g · z)(x) = e^{2πi <x, π(v)>} φ_F(z)(x)` for `g = e^{2πi v}`.
pub fn check_g_equivariance(m: &ToricModel, samples: usize, seed: u64, tol: f64) -> CheckRecord {
    let p = m.data().p();
    let t = per_face(m, "g_equivariance", samples, seed, |rng, f| {
        let z = stratum_point(rng, p, m.fan().index_set(f));
        let v: Vec<Complex64> = (0..p)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.1..=0.1)))
            .collect();
        match (m.evaluate_chart(f, &z), m.evaluate_chart(f, &act(&z, &v))) {
            (Ok(a), Ok(b)) => {
                let expected: Vec<Complex64> = m
                    .exponents(f)
                    .iter()
                    .zip(&a.values)
                    .map(|(row, val)| {
                        let phase: Complex64 =
                            row.iter().zip(&v).map(|(&e, vj)| vj * e as f64).sum();
                        (Complex64::new(0.0, TAU) * phase).exp() * val
                    })
                    .collect();
                (relative_deviation(&expected, &b.values), true)
            }
            _ => (f64::INFINITY, false),
        }
    });
    CheckRecord::new(
        "chart_g_equivariance",
        "φ_F(g·z)(x) = e^{2πi<x,π(v)>} φ_F(z)(x)",
        t.count,
        t.max,
        tol,
        t.failures == 0,
        format!("{samples} samples per face over {} faces", m.fan().len()),
    )
}

/// Constructs `z = e^{2πi v} · 1_F` with `v in L_C` and recovers a
/// generating element with the log-solve.
pub fn check_fiber_lemma(m: &ToricModel, samples: usize, seed: u64, tol: f64) -> CheckRecord {
    let p = m.data().p();
    let t = per_face(m, "fiber_lemma", samples, seed, |rng, f| {
        let z = act(
            &base_point(p, m.fan().index_set(f)),
            &kernel_sample(m, rng, 0.2),
        );
        match m.fiber_log_solve(f, &z, tol) {
            Ok(s) => (s.residual, true),
            Err(_) => (f64::INFINITY, false),
        }
    });
    CheckRecord::new(
        "fiber_lemma",
        "V_F ∩ φ_F^{-1}(φ_F(1_F)) is a single A_C-orbit",
        t.count,
        t.max,
        tol,
        t.failures == 0,
        format!("{samples} constructed fiber points per face"),
    )
}

/// Two stratum points with equal chart values are related by one element
/// of `A_C`.
pub fn check_chart_injectivity(m: &ToricModel, samples: usize, seed: u64, tol: f64) -> CheckRecord {
    let p = m.data().p();
    let t = per_face(m, "chart_injectivity", samples, seed, |rng, f| {
        let z = stratum_point(rng, p, m.fan().index_set(f));
        let w = act(&z, &kernel_sample(m, rng, 0.1));
        let (Ok(a), Ok(b)) = (m.evaluate_chart(f, &z), m.evaluate_chart(f, &w)) else {
            return (f64::INFINITY, false);
        };
        if relative_deviation(&a.values, &b.values) > 1e-9 {
            return (f64::INFINITY, false);
        }
        match m.relate_fiber_points(f, &z, &w, tol) {
            Ok(s) => (s.residual, true),
            Err(_) => (f64::INFINITY, false),
        }
    });
    CheckRecord::new(
        "chart_injectivity",
        "φ_F(z) = φ_F(z') implies z' in A_C·z",
        t.count,
        t.max,
        tol,
        t.failures == 0,
        format!("{samples} pairs per face"),
    )
}

/// For every incident pair `Ē ⊆ F̄`, chart values on `U_F` computed
/// directly and through the chart of `E` agree.
pub fn check_chart_inclusions(m: &ToricModel, per_pair: usize, seed: u64, tol: f64) -> CheckRecord {
    let faces = m.data().faces();
    let p = m.data().p();
    let pairs: Vec<(usize, usize)> = (0..faces.len())
        .cartesian_product(0..faces.len())
        .filter(|&(e, f)| faces.is_incident(e, f))
        .collect();
    let mut total = Tally::default();
    let mut errors = 0u64;
    for &(e, f) in &pairs {
        let Ok(inc) = m.chart_inclusion(e, f) else {
            errors += 1;
            continue;
        };
        let parts = batched(
            seed,
            &format!("chart_inclusions/{e}/{f}"),
            per_pair,
            |rng, count| {
                let mut t = Tally::default();
                for _ in 0..count {
                    let z = stratum_point(rng, p, m.fan().index_set(f));
                    match (m.evaluate_chart(f, &z), m.evaluate_chart_on(e, &z)) {
                        (Ok(direct), Ok(via)) => t.record(
                            relative_deviation(&direct.values, &inc.apply(&via.values)),
                            true,
                        ),
                        _ => t.record(f64::INFINITY, false),
                    }
                }
                t
            },
        );
        total = total.merge(Tally::sum(parts));
    }
    CheckRecord::new(
        "chart_inclusions",
        "U_F ⊆ U_E for Ē ⊆ F̄, by monomial maps",
        total.count,
        total.max,
        tol,
        total.failures == 0 && errors == 0,
        format!("{} incident pairs, {per_pair} samples each", pairs.len()),
    )
}

/// Every lattice point of `σ_F^∨` in the box `[-b, b]^n` is a nonnegative
/// integer combination of the chart generators.
pub fn check_monoid_generation(m: &ToricModel, b: i64) -> CheckRecord {
    let n = m.data().n();
    let points: Vec<IntVector> = (0..n)
        .map(|_| -b..=b)
        .multi_cartesian_product()
        .map(|v| v.into_iter().map(BigInt::from).collect())
        .collect();
    let mut checked = 0u64;
    let mut failures = 0u64;
    for mono in m.monoids() {
        if mono.all_generators.iter().any(|g| !mono.contains(g)) {
            failures += 1;
        }
        for x in points.iter().filter(|x| mono.contains(x)) {
            checked += 1;
            let ok = mono.decompose(x).is_some_and(|c| {
                c.iter().all(|e| !e.is_negative())
                    && (0..n).all(|k| {
                        c.iter()
                            .zip(&mono.all_generators)
                            .map(|(a, g)| a * &g[k])
                            .sum::<BigInt>()
                            == x[k]
                    })
            });
            if !ok {
                failures += 1;
            }
        }
    }
    CheckRecord::new(
        "monoid_generation",
        "σ_F^∨ ∩ Π* is generated by the chart monoid",
        checked,
        failures as f64,
        0.0,
        failures == 0,
        format!(
            "lattice points in [-{b}, {b}]^{n} over {} faces",
            m.monoids().len()
        ),
    )
}

/// Exact cone dimensions and incidence reversal, plus completeness by
/// locating random integer directions in maximal cones.
pub fn check_fan_structure(m: &ToricModel, samples: usize, seed: u64) -> CheckRecord {
    let faces = m.data().faces();
    let fan = m.fan();
    let n = m.data().n();
    let mut exact_failures = 0u64;
    for (e, fe) in faces.faces().iter().enumerate() {
        if fan.cone(e).dimension() != n - fe.dim {
            exact_failures += 1;
        }
        for g in 0..faces.len() {
            if fan.cone(e).contains_cone(fan.cone(g)) != faces.is_incident(e, g) {
                exact_failures += 1;
            }
        }
    }
    let parts = batched(seed, "fan_completeness", samples, |rng, count| {
        let mut t = Tally::default();
        for _ in 0..count {
            let y: IntVector = (0..n)
                .map(|_| BigInt::from(rng.gen_range(-1000i64..=1000)))
                .collect();
            t.record(0.0, fan.locate(&y).is_some());
        }
        t
    });
    let t = Tally::sum(parts);
    let failures = exact_failures + t.failures;
    CheckRecord::new(
        "fan_structure",
        "σ_F = cone{u_i : i in I_F} has dimension n - dim F; the fan is complete",
        t.count,
        failures as f64,
        0.0,
        failures == 0,
        format!(
            "{} cones, {} maximal, {} rays",
            fan.len(),
            fan.maximal_cone_ids().len(),
            fan.rays().len()
        ),
    )
}
