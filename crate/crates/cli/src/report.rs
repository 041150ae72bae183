//! The JSON report written by every subcommand. Exact quantities are
//! strings (`"p/q"` for rationals, decimal for integers); floats appear
//! only in the verification block.

use delzant_core::delzant::{DelzantData, RetargetReport, StabilizerData};
use delzant_core::linalg::{format_rational, CokernelInvariants, IntVector, Rational};
use delzant_core::polytope::{HPolytope, NormalizationAction};
use delzant_core::toric::ToricModel;
use delzant_core::verify::VerificationReport;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

pub const TOOL: &str = "delzant";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub metadata: Metadata,
    pub construction: Construction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fan: Option<FanBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient: Option<QuotientBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// Wall-clock time of the whole command, present only with `--timings`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl Metadata {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            wall_time_ms: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacetBlock {
    pub normal: Vec<String>,
    pub offset: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopeBlock {
    pub dim: usize,
    pub facets: Vec<FacetBlock>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupBlock {
    /// Invariant factors above one, each dividing the next.
    pub torsion: Vec<String>,
    pub free_rank: usize,
    /// Product of the torsion factors when the group is finite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizerBlock {
    pub dim: usize,
    pub normals: Vec<Vec<String>>,
    pub saturation_basis: Vec<Vec<String>>,
    pub orbifold_index: String,
    pub smooth: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceBlock {
    pub id: usize,
    pub dim: usize,
    pub index_set: Vec<usize>,
    pub vertex_ids: Vec<usize>,
    pub interior_point: Vec<String>,
    pub fiber_dimension: usize,
    pub stabilizer: StabilizerBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub polytope: PolytopeBlock,
    /// What normalization did to the raw inequalities.
    pub normalization: Vec<String>,
    pub p: usize,
    pub n: usize,
    pub k: usize,
    /// Hermite basis of `L = ker π`.
    pub kernel_basis: Vec<Vec<String>>,
    /// Hermite basis of `Π = π(Z^p)`.
    pub image_basis: Vec<Vec<String>>,
    /// `Γ = Z^n / Π`.
    pub gamma: GroupBlock,
    pub vertices: Vec<Vec<String>>,
    pub f_vector: Vec<usize>,
    pub euler_characteristic: i64,
    pub faces: Vec<FaceBlock>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonoidBlock {
    /// Basis of the units `σ^⊥ ∩ Π*`, in dual-basis coordinates.
    pub perp_basis: Vec<Vec<String>>,
    /// Hilbert basis of the pointed part, in dual-basis coordinates.
    pub pointed_generators: Vec<Vec<String>>,
    /// The full generating set (units, their negatives, pointed part), as
    /// rational covectors in ambient coordinates.
    pub generators_ambient: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeBlock {
    pub face: usize,
    pub index_set: Vec<usize>,
    pub dim: usize,
    /// Extreme rays of `σ_F` in ambient coordinates.
    pub rays: Vec<Vec<String>>,
    /// Extreme rays and lineality of the dual cone, ambient coordinates.
    pub dual_rays: Vec<Vec<String>>,
    pub dual_lineality: Vec<Vec<String>>,
    pub monoid: MonoidBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FanBlock {
    pub dim: usize,
    /// Basis of the lattice `Π` the cones are taken in.
    pub lattice_basis: Vec<Vec<String>>,
    pub rays: Vec<Vec<String>>,
    pub maximal_cones: Vec<usize>,
    pub cones: Vec<ConeBlock>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientBlock {
    /// Hermite basis of the new lattice `Π'`.
    pub lattice: Vec<Vec<String>>,
    /// `Π' / Π`.
    pub gamma: GroupBlock,
    /// Vertices of the (unchanged) moment polytope.
    pub vertices: Vec<Vec<String>>,
    pub stabilizers: Vec<StabilizerBlock>,
}

pub fn ints(v: &[BigInt]) -> Vec<String> {
    v.iter().map(|e| e.to_string()).collect()
}

pub fn rats(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn int_rows(rows: &[IntVector]) -> Vec<Vec<String>> {
    rows.iter().map(|r| ints(r)).collect()
}

fn rat_rows(rows: &[Vec<Rational>]) -> Vec<Vec<String>> {
    rows.iter().map(|r| rats(r)).collect()
}

fn group(g: &CokernelInvariants) -> GroupBlock {
    GroupBlock {
        torsion: ints(&g.torsion),
        free_rank: g.free_rank,
        order: (g.free_rank == 0).then(|| g.torsion.iter().product::<BigInt>().to_string()),
    }
}

fn stabilizer(s: &StabilizerData) -> StabilizerBlock {
    StabilizerBlock {
        dim: s.dim_b,
        normals: int_rows(&s.b_basis),
        saturation_basis: rat_rows(&s.saturation_basis),
        orbifold_index: s.orbifold_index.to_string(),
        smooth: s.smooth,
    }
}

pub fn polytope_block(p: &HPolytope) -> PolytopeBlock {
    PolytopeBlock {
        dim: p.dim(),
        facets: p
            .facets()
            .iter()
            .map(|f| FacetBlock {
                normal: ints(&f.normal),
                offset: format_rational(&f.offset),
            })
            .collect(),
    }
}

pub fn construction(d: &DelzantData, normalization: &[NormalizationAction]) -> Construction {
    let faces = d.faces();
    Construction {
        polytope: polytope_block(d.polytope()),
        normalization: normalization.iter().map(|a| a.to_string()).collect(),
        p: d.p(),
        n: d.n(),
        k: d.k(),
        kernel_basis: int_rows(d.kernel().as_rows()),
        image_basis: int_rows(d.image().as_rows()),
        gamma: group(d.gamma()),
        vertices: rat_rows(faces.vertices()),
        f_vector: faces.f_vector(),
        euler_characteristic: faces.boundary_euler_characteristic(),
        faces: faces
            .faces()
            .iter()
            .enumerate()
            .map(|(id, f)| FaceBlock {
                id,
                dim: f.dim,
                index_set: f.index_set.clone(),
                vertex_ids: f.vertex_ids.clone(),
                interior_point: rats(&f.interior_point),
                fiber_dimension: d.fiber_dimension(id),
                stabilizer: stabilizer(&d.stabilizer_data(id)),
            })
            .collect(),
    }
}

pub fn fan_block(m: &ToricModel) -> FanBlock {
    let fan = m.fan();
    let cones = (0..fan.len())
        .map(|f| {
            let cone = fan.cone(f);
            let dual = cone.dual();
            let monoid = m.monoid(f);
            ConeBlock {
                face: f,
                index_set: fan.index_set(f).to_vec(),
                dim: cone.dimension(),
                rays: int_rows(cone.extreme_rays()),
                dual_rays: int_rows(dual.extreme_rays()),
                dual_lineality: int_rows(dual.lineality()),
                monoid: MonoidBlock {
                    perp_basis: int_rows(&monoid.perp_basis),
                    pointed_generators: int_rows(&monoid.pointed_generators),
                    generators_ambient: monoid
                        .all_generators
                        .iter()
                        .map(|g| rats(&fan.dual_to_ambient(g)))
                        .collect(),
                },
            }
        })
        .collect();
    FanBlock {
        dim: fan.dim(),
        lattice_basis: int_rows(fan.lattice().as_rows()),
        rays: int_rows(&fan.rays()),
        maximal_cones: fan.maximal_cone_ids(),
        cones,
    }
}

pub fn quotient_block(d: &DelzantData, r: &RetargetReport) -> QuotientBlock {
    QuotientBlock {
        lattice: rat_rows(&r.lattice),
        gamma: group(&r.gamma),
        vertices: rat_rows(d.faces().vertices()),
        stabilizers: r.stabilizers.iter().map(stabilizer).collect(),
    }
}
