use icap_core::cases::{build, CaseName, Scheme};
use icap_core::diagnostics::{error_norms, log_smearing as log_smearing_core, smearing_of};
use icap_core::flowfields::{face_means, FlowField};
use icap_core::grid::{fill_ghosts, BoundarySpec, CellField, Grid2D};
use icap_core::integrate::Integrator;
use icap_core::limiters1d::Limiter1D;
use icap_core::mlp::{mlp_rate as mlp_rate_core, MlpConfig};
use icap_core::multimat::compat_project as compat_project_core;
use icap_core::IcapError;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: IcapError) -> PyErr {
    match e {
        IcapError::Instability { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rows_of(z: &CellField) -> Vec<Vec<f64>> {
    let g = z.grid();
    (0..g.ny).map(|j| z.row(j).to_vec()).collect()
}

/// Outcome of one benchmark run; `field[j][i]` is the cell `(i, j)` value.
#[pyclass(frozen, get_all)]
struct RunResult {
    case: String,
    scheme: String,
    n: usize,
    h: f64,
    steps: usize,
    t_final: f64,
    field: Vec<Vec<f64>>,
    smearing: f64,
    mass: f64,
    l1: Option<f64>,
    l2: Option<f64>,
    linf: Option<f64>,
    econs: Option<f64>,
}

#[pymethods]
impl RunResult {
    fn __repr__(&self) -> String {
        format!("RunResult(case={}, n={}, steps={}, t_final={})", self.case, self.n, self.steps, self.t_final)
    }
}

#[pyfunction]
fn list_cases() -> Vec<&'static str> {
    CaseName::ALL.iter().map(|c| c.as_str()).collect()
}

/// Runs a named case with optional overrides of its defaults.
#[pyfunction]
#[pyo3(signature = (case, n=None, t_end=None, scheme=None, beta=None, integrator=None, cfl=None))]
fn run_case(
    py: Python<'_>,
    case: &str,
    n: Option<usize>,
    t_end: Option<f64>,
    scheme: Option<&str>,
    beta: Option<f64>,
    integrator: Option<&str>,
    cfl: Option<f64>,
) -> PyResult<RunResult> {
    let name: CaseName = case.parse().map_err(to_py)?;
    let mut setup = name.defaults();
    if let Some(s) = scheme {
        setup.scheme = Scheme::parse(s, beta.unwrap_or(2.0)).map_err(to_py)?;
    } else if let Some(b) = beta {
        setup.scheme = Scheme::Mlp(MlpConfig::new(b).map_err(to_py)?);
    }
    if let Some(name) = integrator {
        setup.integrator = [Integrator::Euler, Integrator::Rk2, Integrator::Rk2Midpoint]
            .into_iter()
            .find(|i| i.name() == name)
            .ok_or_else(|| PyValueError::new_err(format!("unknown integrator '{name}'")))?;
    }
    setup.n = n.unwrap_or(setup.n);
    setup.t_end = t_end.unwrap_or(setup.t_end);
    setup.cfl = cfl.unwrap_or(setup.cfl);

    let problem = build(&setup).map_err(to_py)?;
    let outcome = py.detach(|| problem.run(&[])).map_err(to_py)?;
    let errors = outcome.errors;
    Ok(RunResult {
        case: setup.case.as_str().to_string(),
        scheme: setup.scheme.label(),
        n: setup.n,
        h: problem.grid.h,
        steps: outcome.summary.steps,
        t_final: outcome.summary.t_final,
        smearing: problem.smearing(&outcome.field),
        mass: problem.mass(&outcome.field),
        field: rows_of(&outcome.field),
        l1: errors.map(|e| e.l1),
        l2: errors.map(|e| e.l2),
        linf: errors.map(|e| e.linf),
        econs: errors.map(|e| e.econs),
    })
}

/// Slope limiter `kind` in {superbee, overbee, unlimited, zero} applied to
/// the one-sided differences `a`, `b`.
#[pyfunction]
fn limit(kind: &str, a: f64, b: f64) -> PyResult<f64> {
    let l = match kind {
        "superbee" => Limiter1D::Superbee,
        "overbee" => Limiter1D::Overbee,
        "unlimited" => Limiter1D::Unlimited,
        "zero" => Limiter1D::Zero,
        _ => return Err(PyValueError::new_err(format!("unknown limiter '{kind}'"))),
    };
    Ok(l.limit(a, b))
}

fn field_from_rows(rows: &[Vec<f64>]) -> PyResult<CellField> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a non-empty square list of rows"));
    }
    let grid = Grid2D::square(n, 0.0, 1.0).map_err(to_py)?;
    let mut z = CellField::zeros(grid);
    for (j, row) in rows.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            z.set(i as isize, j as isize, v);
        }
    }
    Ok(z)
}

/// MLP rate `dz/dt` on the periodic unit square in the uniform flow `(a, b)`.
#[pyfunction]
#[pyo3(signature = (z, a, b, beta=2.0))]
fn mlp_rate(z: Vec<Vec<f64>>, a: f64, b: f64, beta: f64) -> PyResult<Vec<Vec<f64>>> {
    let mut z = field_from_rows(&z)?;
    let cfg = MlpConfig::new(beta).map_err(to_py)?;
    fill_ghosts(&mut z, &BoundarySpec::periodic(), 0.0).map_err(to_py)?;
    let v = face_means(&FlowField::Uniform { a, b }, z.grid(), 0.0);
    let mut out = CellField::zeros(*z.grid());
    mlp_rate_core(&z, &v, &cfg, &mut out);
    Ok(rows_of(&out))
}

/// Compatible limiting factors for per-fluid gradients summing to zero.
#[pyfunction]
fn compat_project(phi_hat: Vec<f64>, grads: Vec<(f64, f64)>) -> PyResult<Vec<f64>> {
    if phi_hat.len() != grads.len() {
        return Err(PyValueError::new_err("one gradient per factor"));
    }
    Ok(compat_project_core(&phi_hat, &grads))
}

#[pyfunction]
fn smearing(values: Vec<f64>, cell_measure: f64) -> f64 {
    smearing_of(values, cell_measure)
}

#[pyfunction]
fn log_smearing(z: f64) -> f64 {
    log_smearing_core(z)
}

/// `(L1, L2, Linf, Econs)` of `z` against `z_ref` on the unit square.
#[pyfunction]
fn norms(z: Vec<Vec<f64>>, z_ref: Vec<Vec<f64>>) -> PyResult<(f64, f64, f64, f64)> {
    let e = error_norms(&field_from_rows(&z)?, &field_from_rows(&z_ref)?).map_err(to_py)?;
    Ok((e.l1, e.l2, e.linf, e.econs))
}

#[pymodule]
fn icap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<RunResult>()?;
    m.add_function(wrap_pyfunction!(list_cases, m)?)?;
    m.add_function(wrap_pyfunction!(run_case, m)?)?;
    m.add_function(wrap_pyfunction!(limit, m)?)?;
    m.add_function(wrap_pyfunction!(mlp_rate, m)?)?;
    m.add_function(wrap_pyfunction!(compat_project, m)?)?;
    m.add_function(wrap_pyfunction!(smearing, m)?)?;
    m.add_function(wrap_pyfunction!(log_smearing, m)?)?;
    m.add_function(wrap_pyfunction!(norms, m)?)?;
    Ok(())
}
