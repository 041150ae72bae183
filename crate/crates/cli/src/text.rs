//! Plain-text rendering of a [`ReportFile`]. Floats are printed with the
//! same formatting as the JSON output.

use std::fmt::Write;

use crate::report::{GroupBlock, ReportFile, StabilizerBlock};

fn vec(v: &[String]) -> String {
    format!("({})", v.join(","))
}

fn rows(r: &[Vec<String>]) -> String {
    if r.is_empty() {
        return "-".to_string();
    }
    r.iter().map(|v| vec(v)).collect::<Vec<_>>().join(" ")
}

fn group(g: &GroupBlock) -> String {
    let mut parts: Vec<String> = g.torsion.iter().map(|t| format!("Z/{t}")).collect();
    if g.free_rank > 0 {
        parts.push(if g.free_rank == 1 {
            "Z".to_string()
        } else {
            format!("Z^{}", g.free_rank)
        });
    }
    if parts.is_empty() {
        "trivial".to_string()
    } else {
        parts.join(" x ")
    }
}

fn float(x: f64) -> String {
    serde_json::to_string(&x).expect("finite floats serialize")
}

fn stabilizer_cells(s: &StabilizerBlock) -> String {
    format!(
        "{:>5} {:>6} {:>6}",
        s.dim,
        s.orbifold_index,
        if s.smooth { "yes" } else { "no" }
    )
}

pub fn render(r: &ReportFile) -> String {
    let mut out = String::new();
    let c = &r.construction;
    let _ = writeln!(out, "polytope  dim {}, {} facets", c.polytope.dim, c.p);
    for (i, f) in c.polytope.facets.iter().enumerate() {
        let _ = writeln!(
            out,
            "  u_{i} = {}  lambda_{i} = {}",
            vec(&f.normal),
            f.offset
        );
    }
    for note in &c.normalization {
        let _ = writeln!(out, "  normalized: {note}");
    }
    let _ = writeln!(out, "p = {}  n = {}  k = {}", c.p, c.n, c.k);
    let _ = writeln!(out, "L basis     {}", rows(&c.kernel_basis));
    let _ = writeln!(out, "Pi basis    {}", rows(&c.image_basis));
    let _ = writeln!(out, "Gamma       {}", group(&c.gamma));
    let _ = writeln!(
        out,
        "vertices    {} {}",
        c.vertices.len(),
        rows(&c.vertices)
    );
    let f: Vec<String> = c.f_vector.iter().map(|x| x.to_string()).collect();
    let _ = writeln!(out, "f-vector    {}", vec(&f));
    let _ = writeln!(
        out,
        "boundary euler characteristic {}",
        c.euler_characteristic
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:>4} {:>3} {:<16} {:>9}  {:>5} {:>6} {:>6}  point",
        "face", "dim", "I_F", "fiberdim", "dimB", "index", "smooth"
    );
    for face in &c.faces {
        let set: Vec<String> = face.index_set.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(
            out,
            "{:>4} {:>3} {:<16} {:>9}  {}  {}",
            face.id,
            face.dim,
            format!("{{{}}}", set.join(",")),
            face.fiber_dimension,
            stabilizer_cells(&face.stabilizer),
            vec(&face.interior_point)
        );
    }

    if let Some(fan) = &r.fan {
        let _ = writeln!(out);
        let _ = writeln!(out, "fan  dim {}, {} cones", fan.dim, fan.cones.len());
        let _ = writeln!(out, "lattice     {}", rows(&fan.lattice_basis));
        let _ = writeln!(out, "rays        {}", rows(&fan.rays));
        let maximal: Vec<String> = fan.maximal_cones.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "maximal     {}", vec(&maximal));
        for cone in &fan.cones {
            let _ = writeln!(out, "cone {} (dim {})", cone.face, cone.dim);
            let _ = writeln!(out, "  rays       {}", rows(&cone.rays));
            let _ = writeln!(out, "  dual rays  {}", rows(&cone.dual_rays));
            let _ = writeln!(out, "  dual lin   {}", rows(&cone.dual_lineality));
            let _ = writeln!(out, "  units      {}", rows(&cone.monoid.perp_basis));
            let _ = writeln!(
                out,
                "  generators {}",
                rows(&cone.monoid.pointed_generators)
            );
            let _ = writeln!(
                out,
                "  ambient    {}",
                rows(&cone.monoid.generators_ambient)
            );
        }
    }

    if let Some(q) = &r.quotient {
        let _ = writeln!(out);
        let _ = writeln!(out, "quotient lattice {}", rows(&q.lattice));
        let _ = writeln!(out, "Gamma            {}", group(&q.gamma));
        let _ = writeln!(
            out,
            "vertices         {} {}",
            q.vertices.len(),
            rows(&q.vertices)
        );
        let _ = writeln!(
            out,
            "{:>4}  {:>5} {:>6} {:>6}",
            "face", "dimB", "index", "smooth"
        );
        for (id, s) in q.stabilizers.iter().enumerate() {
            let _ = writeln!(out, "{id:>4}  {}", stabilizer_cells(s));
        }
    }

    if let Some(v) = &r.verification {
        let _ = writeln!(out);
        let _ = writeln!(out, "verification seed {}", v.seed);
        for check in &v.checks {
            let _ = write!(
                out,
                "{:<22} {:<4} samples {:>7}  max residual {}  tol {}",
                check.name,
                format!("{:?}", check.verdict).to_uppercase(),
                check.samples,
                float(check.max_residual),
                float(check.tol)
            );
            if let Some(ms) = check.wall_time_ms {
                let _ = write!(out, "  {} ms", float(ms));
            }
            let _ = writeln!(out, "\n  {}: {}", check.anchor, check.detail);
        }
        let _ = writeln!(out, "verdict {}", format!("{:?}", v.verdict).to_uppercase());
    }
    if let Some(ms) = r.metadata.wall_time_ms {
        let _ = writeln!(out, "wall time {} ms", float(ms));
    }
    out
}
