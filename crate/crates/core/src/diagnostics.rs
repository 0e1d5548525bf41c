//! Smearing functional, error norms, conservation error and empirical
//! convergence order.

use std::io::Write;

use crate::error::{IcapError, Result};
use crate::grid::CellField;

/// Floor added inside log-scale smearing plots, `log10(z(1-z) + floor)`.
pub const LOG_FLOOR: f64 = 1e-10;

/// `Σ z(1-z)·measure` over `values`.
pub fn smearing_of(values: impl IntoIterator<Item = f64>, cell_measure: f64) -> f64 {
    values.into_iter().map(|z| z * (1.0 - z)).sum::<f64>() * cell_measure
}

/// Two-dimensional smearing `Σ z(1-z) h²` over interior cells.
pub fn smearing(z: &CellField) -> f64 {
    let g = z.grid();
    (0..g.ny).map(|j| smearing_of(z.row(j).iter().copied(), 1.0)).sum::<f64>() * g.cell_area()
}

pub fn log_smearing(z: f64) -> f64 {
    (z * (1.0 - z) + LOG_FLOOR).log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    /// `|Σ (z - z_ref) h²|`.
    pub econs: f64,
}

pub fn error_norms(z: &CellField, z_ref: &CellField) -> Result<ErrorNorms> {
    let g = z.grid();
    if !g.same_shape(z_ref.grid()) {
        return Err(IcapError::GridMismatch(format!(
            "{}x{} vs {}x{}",
            g.nx,
            g.ny,
            z_ref.grid().nx,
            z_ref.grid().ny
        )));
    }
    let area = g.cell_area();
    let (mut l1, mut l2, mut linf, mut signed) = (0.0, 0.0, 0.0_f64, 0.0);
    for j in 0..g.ny {
        for (a, b) in z.row(j).iter().zip(z_ref.row(j)) {
            let d = a - b;
            l1 += d.abs();
            l2 += d * d;
            linf = linf.max(d.abs());
            signed += d;
        }
    }
    Ok(ErrorNorms { l1: l1 * area, l2: (l2 * area).sqrt(), linf, econs: (signed * area).abs() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderFit {
    Slope(f64),
    /// Every error is exactly zero.
    Exact,
}

impl OrderFit {
    pub fn slope(self) -> Option<f64> {
        match self {
            OrderFit::Slope(s) => Some(s),
            OrderFit::Exact => None,
        }
    }
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn fit_order(pairs: &[(f64, f64)]) -> Result<OrderFit> {
    if pairs.len() < 2 {
        return Err(IcapError::Config("order fit needs at least two (h, error) pairs".into()));
    }
    if pairs.iter().all(|&(_, e)| e == 0.0) {
        return Ok(OrderFit::Exact);
    }
    if pairs.iter().any(|&(h, e)| !(h > 0.0) || !(e > 0.0)) {
        return Err(IcapError::Degenerate(
            "order fit needs positive step sizes and errors".into(),
        ));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(IcapError::Degenerate("order fit needs distinct step sizes".into()));
    }
    Ok(OrderFit::Slope(sxy / sxx))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub time: f64,
    pub smearing: f64,
    pub max_smearing: f64,
    pub min_z: f64,
    pub max_z: f64,
    pub mass: f64,
}

/// Time history of interface diagnostics.
#[derive(Debug, Clone, Default)]
pub struct DiagnosticSeries {
    rows: Vec<DiagnosticRow>,
}

pub const DIAGNOSTICS_HEADER: &str = "time,smearing,max_smearing,min_z,max_z,mass";

impl DiagnosticSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a row; `smearing` and `mass` are supplied by the caller so
    /// one-dimensional problems can use their own measure.
    pub fn push(&mut self, time: f64, smearing: f64, min_z: f64, max_z: f64, mass: f64) {
        let running = self.rows.last().map_or(smearing, |r| r.max_smearing.max(smearing));
        self.rows.push(DiagnosticRow { time, smearing, max_smearing: running, min_z, max_z, mass });
    }

    pub fn push_field(&mut self, time: f64, z: &CellField) {
        let (lo, hi) = z.interior_min_max();
        self.push(time, smearing(z), lo, hi, z.mass());
    }

    pub fn rows(&self) -> &[DiagnosticRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&DiagnosticRow> {
        self.rows.last()
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{DIAGNOSTICS_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.time, r.smearing, r.max_smearing, r.min_z, r.max_z, r.mass
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use proptest::prelude::*;

    #[test]
    fn smearing_values() {
        let g = Grid2D::square(10, 0.0, 1.0).unwrap();
        let mut z = CellField::zeros(g);
        for j in 0..10 {
            for i in 0..10 {
                z.set(i, j, ((i + j) % 2) as f64);
            }
        }
        assert_eq!(smearing(&z), 0.0);
        let mut z = CellField::zeros(g);
        z.set(4, 4, 0.5);
        assert!((smearing(&z) - 0.0025).abs() < 1e-17);
    }

    #[test]
    fn norms_of_constant_offset() {
        let g = Grid2D::square(16, 0.0, 1.0).unwrap();
        let a = CellField::constant(g, 0.3);
        assert_eq!(error_norms(&a, &a).unwrap(), ErrorNorms { l1: 0.0, l2: 0.0, linf: 0.0, econs: 0.0 });
        let b = CellField::constant(g, 0.3 + 0.125);
        let n = error_norms(&b, &a).unwrap();
        for v in [n.l1, n.l2, n.linf, n.econs] {
            assert!((v - 0.125).abs() < 1e-14);
        }
        let other = CellField::zeros(Grid2D::square(8, 0.0, 1.0).unwrap());
        assert!(matches!(error_norms(&a, &other), Err(IcapError::GridMismatch(_))));
    }

    #[test]
    fn fit_order_on_power_laws() {
        let hs = [0.1, 0.05, 0.025, 0.0125];
        for p in [1.0, 2.0, 0.5] {
            let pairs: Vec<_> = hs.iter().map(|&h| (h, 3.0 * f64::powf(h, p))).collect();
            let s = fit_order(&pairs).unwrap().slope().unwrap();
            assert!((s - p).abs() < 1e-12);
        }
        assert_eq!(fit_order(&[(0.1, 0.0), (0.05, 0.0)]).unwrap(), OrderFit::Exact);
        assert!(fit_order(&[(0.1, 1.0)]).is_err());
        assert!(fit_order(&[(0.1, 1.0), (0.05, 0.0)]).is_err());
    }

    #[test]
    fn running_max_is_monotone() {
        let mut s = DiagnosticSeries::new();
        for (t, v) in [(0.0, 0.1), (1.0, 0.3), (2.0, 0.2), (3.0, 0.5)] {
            s.push(t, v, 0.0, 1.0, 1.0);
        }
        let maxes: Vec<f64> = s.rows().iter().map(|r| r.max_smearing).collect();
        assert_eq!(maxes, vec![0.1, 0.3, 0.3, 0.5]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(DIAGNOSTICS_HEADER));
        assert_eq!(text.lines().count(), 5);
    }

    proptest! {
        #[test]
        fn fit_is_scale_invariant(
            errs in prop::collection::vec(1e-6f64..1.0, 3..6),
            scale in 1e-3f64..1e3,
        ) {
            let pairs: Vec<_> = errs.iter().enumerate().map(|(k, &e)| (0.5f64.powi(k as i32), e)).collect();
            let scaled: Vec<_> = pairs.iter().map(|&(h, e)| (h, e * scale)).collect();
            let a = fit_order(&pairs).unwrap().slope().unwrap();
            let b = fit_order(&scaled).unwrap().slope().unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn econs_bounded_by_l1_and_smearing_nonnegative(
            vals in prop::collection::vec(0.0f64..=1.0, 25),
            refs in prop::collection::vec(0.0f64..=1.0, 25),
        ) {
            let g = Grid2D::square(5, 0.0, 1.0).unwrap();
            let mut a = CellField::zeros(g);
            let mut b = CellField::zeros(g);
            for k in 0..25 {
                a.set((k % 5) as isize, (k / 5) as isize, vals[k]);
                b.set((k % 5) as isize, (k / 5) as isize, refs[k]);
            }
            let n = error_norms(&a, &b).unwrap();
            prop_assert!(n.econs <= n.l1 + 1e-15);
            prop_assert!(smearing(&a) >= 0.0);
        }
    }
}
