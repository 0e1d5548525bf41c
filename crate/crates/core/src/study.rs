//! Grid-refinement studies: error norms against the case reference on a
//! sequence of grids, with fitted orders.

use std::io::Write;

use crate::cases::{build, CaseSetup};
use crate::diagnostics::{fit_order, ErrorNorms, OrderFit};
use crate::error::{IcapError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub norms: ErrorNorms,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub l1: OrderFit,
    pub l2: OrderFit,
    pub linf: OrderFit,
    pub econs: OrderFit,
}

pub const CONVERGENCE_HEADER: &str = "h,L1,L2,Linf,Econs";

impl ConvergenceTable {
    pub fn from_rows(rows: Vec<ConvergenceRow>) -> Result<Self> {
        let fit = |f: fn(&ErrorNorms) -> f64| {
            let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, f(&r.norms))).collect();
            fit_order(&pairs)
        };
        Ok(Self {
            l1: fit(|n| n.l1)?,
            l2: fit(|n| n.l2)?,
            linf: fit(|n| n.linf)?,
            econs: fit(|n| n.econs)?,
            rows,
        })
    }

    /// Table rows followed by `# slope_<norm> = <value>` comment lines.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{CONVERGENCE_HEADER}")?;
        for r in &self.rows {
            let n = r.norms;
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r.h, n.l1, n.l2, n.linf, n.econs)?;
        }
        for (name, fit) in [("L1", self.l1), ("L2", self.l2), ("Linf", self.linf), ("Econs", self.econs)] {
            match fit {
                OrderFit::Slope(s) => writeln!(w, "# slope_{name} = {s:.6}")?,
                OrderFit::Exact => writeln!(w, "# slope_{name} = exact")?,
            }
        }
        Ok(())
    }
}

/// Runs `base` on each grid size in `grids` and fits the error orders.
pub fn convergence_study(base: &CaseSetup, grids: &[usize]) -> Result<ConvergenceTable> {
    convergence_study_with(base, grids, |_| {})
}

/// As [`convergence_study`], reporting each finished row to `progress`.
pub fn convergence_study_with(
    base: &CaseSetup,
    grids: &[usize],
    mut progress: impl FnMut(&ConvergenceRow),
) -> Result<ConvergenceTable> {
    if grids.len() < 2 {
        return Err(IcapError::Config("a convergence study needs at least two grids".into()));
    }
    let mut rows = Vec::with_capacity(grids.len());
    for &n in grids {
        let problem = build(&CaseSetup { n, ..base.clone() })?;
        if problem.reference.is_none() {
            return Err(IcapError::Config(format!(
                "case {} has no exact reference at t = {}",
                base.case, base.t_end
            )));
        }
        let outcome = problem.run(&[])?;
        let norms = outcome.errors.expect("reference present");
        let row = ConvergenceRow { n, h: problem.grid.h, norms, steps: outcome.summary.steps };
        progress(&row);
        rows.push(row);
    }
    ConvergenceTable::from_rows(rows)
}
