//! CSV dumps of fields, traces, property verdicts and meshes.

use std::io;
use std::path::Path;

use doublephase_core::modular::ModularReport;
use doublephase_core::{DiscreteFunction, Mesh};

fn e17(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> io::Result<csv::Writer<std::fs::File>> {
    csv::WriterBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(io::Error::other)
}

fn finish(mut w: csv::Writer<std::fs::File>) -> io::Result<()> {
    w.flush()
}

/// `x,y,value` per vertex.
pub fn write_field(path: &Path, u: &DiscreteFunction<'_>) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["x", "y", "value"]).map_err(io::Error::other)?;
    for (x, v) in u.mesh().vertices().iter().zip(u.values()) {
        w.write_record([e17(x[0]), e17(x[1]), e17(*v)]).map_err(io::Error::other)?;
    }
    finish(w)
}

/// Iteration traces: an integer column followed by float columns.
pub fn write_trace(path: &Path, header: &[&str], rows: &[(usize, Vec<f64>)]) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(io::Error::other)?;
    for (iter, vals) in rows {
        let rec: Vec<String> = std::iter::once(iter.to_string()).chain(vals.iter().map(|&v| e17(v))).collect();
        w.write_record(&rec).map_err(io::Error::other)?;
    }
    finish(w)
}

/// `sample,property_id,verdict,slack`; inapplicable checks have verdict `n/a`.
pub fn write_props(path: &Path, reports: &[ModularReport]) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["sample", "property_id", "verdict", "slack"]).map_err(io::Error::other)?;
    for (i, r) in reports.iter().enumerate() {
        for c in &r.checks {
            let verdict = match (c.applicable, c.holds) {
                (false, _) => "n/a",
                (true, true) => "pass",
                (true, false) => "fail",
            };
            w.write_record([i.to_string(), c.id.to_string(), verdict.to_string(), e17(c.slack)])
                .map_err(io::Error::other)?;
        }
    }
    finish(w)
}

/// A `VERTICES` block (`id,x,y,boundary`) then a `TRIANGLES` block
/// (`id,v0,v1,v2`).
pub fn write_mesh(path: &Path, mesh: &Mesh) -> io::Result<()> {
    let mut w = writer(path)?;
    let io = io::Error::other;
    w.write_record(["VERTICES"]).map_err(io)?;
    w.write_record(["id", "x", "y", "boundary"]).map_err(io)?;
    for (i, x) in mesh.vertices().iter().enumerate() {
        let b = if mesh.is_boundary(i) { "1" } else { "0" };
        w.write_record([i.to_string(), e17(x[0]), e17(x[1]), b.to_string()]).map_err(io)?;
    }
    w.write_record(["TRIANGLES"]).map_err(io)?;
    w.write_record(["id", "v0", "v1", "v2"]).map_err(io)?;
    for (i, t) in mesh.triangles().iter().enumerate() {
        w.write_record([i.to_string(), t[0].to_string(), t[1].to_string(), t[2].to_string()])
            .map_err(io)?;
    }
    finish(w)
}
