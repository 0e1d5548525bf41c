//! Field dumps and the run manifest.

use std::io::{BufWriter, Write};
use std::path::Path;

use icap_core::cases::{CaseSetup, Scheme};
use icap_core::diagnostics::{log_smearing, DiagnosticRow, ErrorNorms};
use icap_core::grid::{CellField, Grid2D};
use icap_core::Result;
use serde_json::json;

fn write_cells(path: &Path, z: &CellField, t: f64, f: impl Fn(f64) -> f64) -> Result<()> {
    let g = z.grid();
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "# nx={} ny={} h={:.16e} t={:.16e}", g.nx, g.ny, g.h, t)?;
    writeln!(w, "i,j,x,y,value")?;
    for j in 0..g.ny as isize {
        for i in 0..g.nx as isize {
            let (x, y) = g.center(i, j);
            writeln!(w, "{i},{j},{x:.16e},{y:.16e},{:.16e}", f(z.get(i, j)))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_field(path: &Path, z: &CellField, t: f64) -> Result<()> {
    write_cells(path, z, t, |v| v)
}

pub fn write_log_smearing(path: &Path, z: &CellField, t: f64) -> Result<()> {
    write_cells(path, z, t, log_smearing)
}

/// Writes `field_t<t>.csv` (and the log-smearing dump when asked); returns the file names.
pub fn write_snapshot(dir: &Path, z: &CellField, t: f64, log: bool) -> Result<Vec<String>> {
    let mut names = vec![format!("field_t{t:.6}.csv")];
    write_field(&dir.join(&names[0]), z, t)?;
    if log {
        names.push(format!("log_smearing_t{t:.6}.csv"));
        write_log_smearing(&dir.join(&names[1]), z, t)?;
    }
    Ok(names)
}

pub struct RunInfo<'a> {
    pub setup: &'a CaseSetup,
    pub grid: &'a Grid2D,
    pub dt: f64,
    pub snapshots: &'a [f64],
    pub steps: usize,
    pub t_final: f64,
    pub wall_time: f64,
    pub status: &'a str,
    pub errors: Option<ErrorNorms>,
    pub last: Option<&'a DiagnosticRow>,
    pub files: &'a [String],
}

pub fn write_manifest(path: &Path, r: &RunInfo) -> Result<()> {
    let s = r.setup;
    let (scheme, beta) = match s.scheme {
        Scheme::Muscl(l) => (format!("muscl:{}", l.name()), None),
        Scheme::Mlp(c) => ("mlp".to_string(), Some(c.beta)),
    };
    let value = json!({
        "case": s.case.as_str(),
        "scheme": scheme,
        "beta": beta,
        "integrator": s.integrator.name(),
        "cfl": s.cfl,
        "n": s.n,
        "nx": r.grid.nx,
        "ny": r.grid.ny,
        "h": r.grid.h,
        "t_end": s.t_end,
        "dt": r.dt,
        "subsamples": s.subsamples,
        "snapshots": r.snapshots,
        "threads": rayon::current_num_threads(),
        "steps": r.steps,
        "t_final": r.t_final,
        "wall_time_s": r.wall_time,
        "status": r.status,
        "errors": r.errors.map(|e| json!({"L1": e.l1, "L2": e.l2, "Linf": e.linf, "Econs": e.econs})),
        "final": r.last.map(|d| json!({
            "smearing": d.smearing,
            "max_smearing": d.max_smearing,
            "min_z": d.min_z,
            "max_z": d.max_z,
            "mass": d.mass,
        })),
        "files": r.files,
    });
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &value).map_err(std::io::Error::from)?;
    writeln!(w)?;
    Ok(())
}
