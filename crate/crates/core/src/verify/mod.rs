//! Seeded numerical checks of a constructed instance.
//!
//! Every check draws its randomness from per-batch streams derived from
//! `(seed, check label, batch index)`, runs batches in parallel, and merges
//! results in batch order, so reports do not depend on the worker count.

mod charts;
mod geometry;

use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::delzant::DelzantData;
use crate::linalg::rat_to_f64;
use crate::toric::{ToricError, ToricModel};

pub use charts::{
    check_a_invariance, check_chart_inclusions, check_chart_injectivity, check_fan_structure,
    check_fiber_lemma, check_g_equivariance, check_monoid_generation,
};
pub use geometry::{
    check_face_structure, check_moment_image, check_orbit_theorem, check_properness,
    check_transversality, check_zero_level_rank,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of one check. `verdict` is `PASS` iff the exact parts of the
/// check held and `max_residual <= tol`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// The statement being checked.
    pub anchor: String,
    pub samples: u64,
    pub max_residual: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl CheckRecord {
    pub(crate) fn new(
        name: &str,
        anchor: &str,
        samples: u64,
        max_residual: f64,
        tol: f64,
        exact_ok: bool,
        detail: String,
    ) -> Self {
        // non-finite residuals cannot be written as JSON numbers
        let (max_residual, detail) = if max_residual.is_finite() {
            (max_residual, detail)
        } else {
            (f64::MAX, format!("{detail}; non-finite residual"))
        };
        let verdict = if exact_ok && max_residual <= tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            name: name.to_string(),
            anchor: anchor.to_string(),
            samples,
            max_residual,
            tol,
            verdict,
            detail,
            wall_time_ms: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub moment_samples: usize,
    /// Samples for the invariance, fiber and transversality suites (per face
    /// where the suite is per face).
    pub samples: usize,
    /// Fiber pairs per face for the orbit decomposition.
    pub orbit_pairs: usize,
    /// Algebraic identities in doubles.
    pub tol: f64,
    /// Logarithm and exponential roundtrips.
    pub log_tol: f64,
    /// Chart invariance and equivariance.
    pub chart_tol: f64,
    /// Relative pivot threshold for numeric rank.
    pub rank_threshold: f64,
    /// Half-width of the box of lattice points checked for monoid generation.
    pub monoid_box: i64,
    /// Record wall-clock times (makes the report non-reproducible).
    pub timings: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            moment_samples: 10_000,
            samples: 1_000,
            orbit_pairs: 50,
            tol: 1e-9,
            log_tol: 1e-6,
            chart_tol: 1e-8,
            rank_threshold: 1e-8,
            monoid_box: 3,
            timings: false,
        }
    }
}

/// Identifies the instance a report was computed for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDigest {
    /// SHA-256 of `polytope`.
    pub polytope_sha256: String,
    pub polytope: String,
    pub p: usize,
    pub n: usize,
    pub kernel_basis: Vec<Vec<String>>,
    pub image_basis: Vec<Vec<String>>,
    pub gamma: Vec<String>,
}

impl InstanceDigest {
    pub fn of(d: &DelzantData) -> Self {
        let text = d.polytope().canonical_text();
        let rows = |rs: &[crate::linalg::IntVector]| -> Vec<Vec<String>> {
            rs.iter()
                .map(|r| r.iter().map(|e| e.to_string()).collect())
                .collect()
        };
        Self {
            polytope_sha256: hex::encode(Sha256::digest(text.as_bytes())),
            polytope: text,
            p: d.p(),
            n: d.n(),
            kernel_basis: rows(d.kernel().as_rows()),
            image_basis: rows(d.image().as_rows()),
            gamma: d.gamma().torsion.iter().map(|t| t.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub digest: InstanceDigest,
    pub seed: u64,
    pub config: VerifyConfig,
    pub checks: Vec<CheckRecord>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Runs every check with the configured counts, seed and tolerances.
pub fn run_all(d: &DelzantData, cfg: &VerifyConfig) -> Result<VerificationReport, ToricError> {
    let start = Instant::now();
    let model = ToricModel::new(d.clone())?;
    let seed = cfg.seed;
    let timed = |f: &dyn Fn() -> CheckRecord| -> CheckRecord {
        let t = Instant::now();
        let mut r = f();
        if cfg.timings {
            r.wall_time_ms = Some(t.elapsed().as_secs_f64() * 1e3);
        }
        r
    };
    let checks = vec![
        timed(&|| check_moment_image(d, cfg.moment_samples, seed, cfg.tol)),
        timed(&|| geometry::check_orbit_all_faces(d, cfg.orbit_pairs, seed, cfg.tol)),
        timed(&|| check_face_structure(d)),
        timed(&|| check_zero_level_rank(d, cfg.samples, seed, cfg.rank_threshold)),
        timed(&|| check_properness(d, cfg.samples, seed)),
        timed(&|| check_transversality(d, cfg.samples, seed, cfg.tol)),
        timed(&|| check_fan_structure(&model, cfg.samples, seed)),
        timed(&|| check_monoid_generation(&model, cfg.monoid_box)),
        timed(&|| check_a_invariance(&model, cfg.samples, seed, cfg.chart_tol)),
        timed(&|| check_g_equivariance(&model, cfg.samples, seed, cfg.chart_tol)),
        timed(&|| {
            check_chart_inclusions(
                &model,
                cfg.samples.div_ceil(100).max(1),
                seed,
                cfg.chart_tol,
            )
        }),
        timed(&|| check_fiber_lemma(&model, cfg.samples, seed, cfg.log_tol)),
        timed(&|| check_chart_injectivity(&model, cfg.samples, seed, cfg.log_tol)),
    ];
    let verdict = if checks.iter().all(CheckRecord::passed) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(VerificationReport {
        digest: InstanceDigest::of(d),
        seed,
        config: cfg.clone(),
        checks,
        verdict,
        wall_time_ms: cfg.timings.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

/// One plot sample: a point `x` of the polytope and `|J_T(z) - x|_∞` for a
/// random zero-level point `z` over it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSample {
    pub x: Vec<f64>,
    pub residual: f64,
}

/// Seeded samples of the moment map residual over the polytope.
pub fn moment_residual_samples(d: &DelzantData, samples: usize, seed: u64) -> Vec<MomentSample> {
    batched(seed, "moment_plot", samples, |rng, count| {
        (0..count)
            .map(|_| {
                let x = d.sample_polytope_point(rng);
                let z = d.sample_zero_level_with(&x, rng).expect("x is feasible");
                let xf: Vec<f64> = x.iter().map(rat_to_f64).collect();
                let residual = match d.moment_t(&z.z, f64::INFINITY) {
                    Ok(m) => {
                        m.x.iter()
                            .zip(&xf)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0f64, f64::max)
                    }
                    Err(_) => f64::INFINITY,
                };
                MomentSample { x: xf, residual }
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

const BATCH: usize = 128;

/// Independent random stream for one batch of one check.
pub(crate) fn batch_rng(seed: u64, label: &str, batch: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    h.update(batch.to_le_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Runs `f(rng, count)` over batches covering `samples` draws, in parallel,
/// returning results in batch order.
pub(crate) fn batched<T, F>(seed: u64, label: &str, samples: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let batches = samples.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = BATCH.min(samples - b * BATCH);
            let mut rng = batch_rng(seed, label, b as u64);
            f(&mut rng, count)
        })
        .collect()
}

/// Running maximum and failure count.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Tally {
    pub max: f64,
    pub failures: u64,
    pub count: u64,
}

impl Tally {
    pub fn record(&mut self, residual: f64, ok: bool) {
        self.count += 1;
        if residual.is_nan() {
            self.max = f64::INFINITY;
        } else {
            self.max = self.max.max(residual);
        }
        if !ok {
            self.failures += 1;
        }
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.max = self.max.max(other.max);
        self.failures += other.failures;
        self.count += other.count;
        self
    }

    pub fn sum(parts: impl IntoIterator<Item = Tally>) -> Tally {
        parts.into_iter().fold(Tally::default(), Tally::merge)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delzant::build_delzant_data;
    use crate::linalg::int_to_f64;
    use crate::polytope::corpus;

    fn quick() -> VerifyConfig {
        VerifyConfig {
            moment_samples: 500,
            samples: 100,
            orbit_pairs: 10,
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn batch_streams_are_independent_of_scheduling() {
        let a = batched(7, "x", 1000, |rng, n| {
            use rand::Rng;
            (0..n).map(|_| rng.gen::<u64>()).collect::<Vec<_>>()
        });
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| {
            batched(7, "x", 1000, |rng, n| {
                use rand::Rng;
                (0..n).map(|_| rng.gen::<u64>()).collect::<Vec<_>>()
            })
        });
        assert_eq!(a, b);
        assert_eq!(a.iter().map(Vec::len).sum::<usize>(), 1000);
        assert_ne!(
            batch_rng(1, "x", 0).get_seed(),
            batch_rng(1, "y", 0).get_seed()
        );
    }

    #[test]
    fn corpus_passes_quick_config() {
        for p in [
            corpus::interval(),
            corpus::square(),
            corpus::simplex(),
            corpus::weighted_triangle(),
            corpus::octahedron(),
        ] {
            let d = build_delzant_data(&p);
            let r = run_all(&d, &quick()).unwrap();
            for c in &r.checks {
                assert!(
                    c.passed(),
                    "{}: {} ({})",
                    p.canonical_text(),
                    c.name,
                    c.detail
                );
            }
            assert!(r.passed());
        }
    }

    #[test]
    fn reports_do_not_depend_on_worker_count() {
        let d = build_delzant_data(&corpus::weighted_triangle());
        let a = run_all(&d, &quick()).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| run_all(&d, &quick()).unwrap());
        assert_eq!(a, b);
        let other = run_all(&d, &VerifyConfig { seed: 1, ..quick() }).unwrap();
        assert_eq!(other.seed, 1);
        assert_eq!(other.digest, a.digest);
    }

    #[test]
    fn moment_samples_are_seeded_and_small() {
        let d = build_delzant_data(&corpus::weighted_triangle());
        let a = moment_residual_samples(&d, 300, 5);
        assert_eq!(a.len(), 300);
        assert_eq!(a, moment_residual_samples(&d, 300, 5));
        assert_ne!(a, moment_residual_samples(&d, 300, 6));
        for s in &a {
            assert!(s.residual < 1e-9);
            assert!(d.polytope().facets().iter().all(|f| {
                let v: f64 = f
                    .normal
                    .iter()
                    .zip(&s.x)
                    .map(|(u, x)| int_to_f64(u) * x)
                    .sum();
                v >= rat_to_f64(&f.offset) - 1e-12
            }));
        }
    }

    #[test]
    fn digest_is_stable() {
        let d = build_delzant_data(&corpus::interval());
        let a = InstanceDigest::of(&d);
        assert_eq!(
            a,
            InstanceDigest::of(&build_delzant_data(&corpus::interval()))
        );
        assert_eq!(a.kernel_basis, vec![vec!["1".to_string(), "1".to_string()]]);
        assert_eq!(a.polytope_sha256.len(), 64);
        assert!(a.gamma.is_empty());
    }
}
