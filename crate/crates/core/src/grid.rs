//! Uniform square-cell Cartesian mesh, cell fields with ghost layers, and
//! boundary-condition filling.
//!
//! Cells are addressed by signed indices `(i, j)` with `0 <= i < nx`,
//! `0 <= j < ny` in the interior and `-GHOST <= i < nx + GHOST` including the
//! ghost layers. Storage is row-major (`i` fastest).

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{IcapError, Result};

/// Ghost-layer width. Covers the 8-point gradient stencil plus the neighbor
/// reconstruction needed at boundary faces.
pub const GHOST: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub x0: f64,
    pub y0: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, h: f64, x0: f64, y0: f64) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(IcapError::Config(format!(
                "grid needs at least 3 cells per axis, got {nx}x{ny}"
            )));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(IcapError::Config(format!("cell size must be positive, got {h}")));
        }
        Ok(Self { nx, ny, h, x0, y0 })
    }

    /// `n x n` grid covering `[lo, hi]^2`.
    pub fn square(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(n, n, (hi - lo) / n as f64, lo, lo)
    }

    pub fn ghost(&self) -> usize {
        GHOST
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.nx + 2 * GHOST
    }

    /// Number of stored values including ghosts.
    pub fn padded_len(&self) -> usize {
        self.stride() * (self.ny + 2 * GHOST)
    }

    #[inline]
    pub fn idx(&self, i: isize, j: isize) -> usize {
        debug_assert!(i >= -(GHOST as isize) && i < (self.nx + GHOST) as isize);
        debug_assert!(j >= -(GHOST as isize) && j < (self.ny + GHOST) as isize);
        (i + GHOST as isize) as usize + (j + GHOST as isize) as usize * self.stride()
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    #[inline]
    pub fn center(&self, i: isize, j: isize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.h,
            self.y0 + (j as f64 + 0.5) * self.h,
        )
    }

    /// Mesh node `(i, j)`, the lower-left corner of cell `(i, j)`.
    #[inline]
    pub fn node(&self, i: isize, j: isize) -> (f64, f64) {
        (self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h)
    }

    pub fn extent(&self) -> (f64, f64) {
        (self.nx as f64 * self.h, self.ny as f64 * self.h)
    }

    pub fn same_shape(&self, other: &Grid2D) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.h == other.h
    }
}

/// Cell-averaged scalar over a grid, ghost layers included.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl CellField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid2D, c: f64) -> Self {
        Self { grid, values: vec![c; grid.padded_len()] }
    }

    /// Evaluates `f` at every cell center, ghosts included.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let mut field = Self::zeros(grid);
        let stride = grid.stride();
        field.values.par_chunks_mut(stride).enumerate().for_each(|(row, out)| {
            let j = row as isize - GHOST as isize;
            for (col, v) in out.iter_mut().enumerate() {
                let (x, y) = grid.center(col as isize - GHOST as isize, j);
                *v = f(x, y);
            }
        });
        field
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn get(&self, i: isize, j: isize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: isize, j: isize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    /// Raw padded storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Interior row `j` (length `nx`).
    pub fn row(&self, j: usize) -> &[f64] {
        let start = self.grid.idx(0, j as isize);
        &self.values[start..start + self.grid.nx]
    }

    /// Interior values in row-major order.
    pub fn interior(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.grid.ny).flat_map(move |j| self.row(j).iter().copied())
    }

    /// Σ z·h² over interior cells, summed row by row in index order.
    pub fn mass(&self) -> f64 {
        self.interior_sum() * self.grid.cell_area()
    }

    pub fn interior_sum(&self) -> f64 {
        let mut total = 0.0;
        for j in 0..self.grid.ny {
            total += self.row(j).iter().sum::<f64>();
        }
        total
    }

    pub fn interior_min_max(&self) -> (f64, f64) {
        self.interior()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `self += a * other` on all stored values.
    pub fn axpy(&mut self, a: f64, other: &CellField) {
        debug_assert!(self.grid.same_shape(&other.grid));
        self.values
            .par_iter_mut()
            .zip(other.values.par_iter())
            .for_each(|(s, o)| *s += a * o);
    }

    pub fn fill(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v = c);
    }

    pub fn is_finite(&self) -> bool {
        self.interior().all(f64::is_finite)
    }
}

/// Analytic reference `f(x, y, t)` used for inflow ghost cells.
pub type ReferenceFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum SideBc {
    Periodic,
    ZeroGradient,
    InflowExact(ReferenceFn),
}

impl fmt::Debug for SideBc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SideBc::Periodic => f.write_str("Periodic"),
            SideBc::ZeroGradient => f.write_str("ZeroGradient"),
            SideBc::InflowExact(_) => f.write_str("InflowExact(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundarySpec {
    pub left: SideBc,
    pub right: SideBc,
    pub bottom: SideBc,
    pub top: SideBc,
}

impl BoundarySpec {
    pub fn periodic() -> Self {
        Self {
            left: SideBc::Periodic,
            right: SideBc::Periodic,
            bottom: SideBc::Periodic,
            top: SideBc::Periodic,
        }
    }

    pub fn zero_gradient() -> Self {
        Self {
            left: SideBc::ZeroGradient,
            right: SideBc::ZeroGradient,
            bottom: SideBc::ZeroGradient,
            top: SideBc::ZeroGradient,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let periodic = |s: &SideBc| matches!(s, SideBc::Periodic);
        if periodic(&self.left) != periodic(&self.right) {
            return Err(IcapError::Config(
                "periodic boundary on left/right must be paired".into(),
            ));
        }
        if periodic(&self.bottom) != periodic(&self.top) {
            return Err(IcapError::Config(
                "periodic boundary on bottom/top must be paired".into(),
            ));
        }
        Ok(())
    }
}

/// Populates all ghost cells of `field` according to `bc` at time `t`.
///
/// The x-direction ghosts of interior rows are filled first, then the
/// y-direction ghost rows over the full padded width, so corner ghosts are
/// consistent with both sides. Interior values are never modified.
pub fn fill_ghosts(field: &mut CellField, bc: &BoundarySpec, t: f64) -> Result<()> {
    bc.validate()?;
    let grid = field.grid;
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    let g = GHOST as isize;

    for j in 0..ny {
        for k in 1..=g {
            let left = match &bc.left {
                SideBc::Periodic => field.get(nx - k, j),
                SideBc::ZeroGradient => field.get(0, j),
                SideBc::InflowExact(f) => {
                    let (x, y) = grid.center(-k, j);
                    f(x, y, t)
                }
            };
            field.set(-k, j, left);
            let right = match &bc.right {
                SideBc::Periodic => field.get(k - 1, j),
                SideBc::ZeroGradient => field.get(nx - 1, j),
                SideBc::InflowExact(f) => {
                    let (x, y) = grid.center(nx - 1 + k, j);
                    f(x, y, t)
                }
            };
            field.set(nx - 1 + k, j, right);
        }
    }

    for i in -g..nx + g {
        for k in 1..=g {
            let bottom = match &bc.bottom {
                SideBc::Periodic => field.get(i, ny - k),
                SideBc::ZeroGradient => field.get(i, 0),
                SideBc::InflowExact(f) => {
                    let (x, y) = grid.center(i, -k);
                    f(x, y, t)
                }
            };
            field.set(i, -k, bottom);
            let top = match &bc.top {
                SideBc::Periodic => field.get(i, k - 1),
                SideBc::ZeroGradient => field.get(i, ny - 1),
                SideBc::InflowExact(f) => {
                    let (x, y) = grid.center(i, ny - 1 + k);
                    f(x, y, t)
                }
            };
            field.set(i, ny - 1 + k, top);
        }
    }
    Ok(())
}

/// Cell-average projection of a region's indicator, approximated by
/// `subsamples²` midpoint samples per cell. Ghost cells are projected too.
pub fn project_indicator(
    grid: &Grid2D,
    region: impl Fn(f64, f64) -> bool + Sync,
    subsamples: usize,
) -> Result<CellField> {
    if subsamples == 0 {
        return Err(IcapError::Config("subsamples must be at least 1".into()));
    }
    let n = subsamples;
    let sub_h = grid.h / n as f64;
    let weight = 1.0 / (n * n) as f64;
    let mut field = CellField::zeros(*grid);
    let stride = grid.stride();
    field.values.par_chunks_mut(stride).enumerate().for_each(|(row, out)| {
        let j = row as isize - GHOST as isize;
        for (col, v) in out.iter_mut().enumerate() {
            let (xa, ya) = grid.node(col as isize - GHOST as isize, j);
            let mut inside = 0usize;
            for b in 0..n {
                let y = ya + (b as f64 + 0.5) * sub_h;
                for a in 0..n {
                    let x = xa + (a as f64 + 0.5) * sub_h;
                    if region(x, y) {
                        inside += 1;
                    }
                }
            }
            *v = inside as f64 * weight;
        }
    });
    Ok(field)
}

/// Exact area fraction of every cell inside the half-plane `a·x + b·y <= c`.
pub fn project_half_plane(grid: &Grid2D, a: f64, b: f64, c: f64) -> CellField {
    let mut field = CellField::zeros(*grid);
    let stride = grid.stride();
    let area = grid.cell_area();
    field.values.par_chunks_mut(stride).enumerate().for_each(|(row, out)| {
        let j = row as isize - GHOST as isize;
        for (col, v) in out.iter_mut().enumerate() {
            let (xa, ya) = grid.node(col as isize - GHOST as isize, j);
            // clip in cell-local coordinates to keep the shoelace sum well conditioned
            let local_c = c - a * xa - b * ya;
            let square = [(0.0, 0.0), (grid.h, 0.0), (grid.h, grid.h), (0.0, grid.h)];
            let frac = clipped_area(&square, a, b, local_c) / area;
            // shoelace round-off on full or empty cells
            *v = if frac < 1e-13 {
                0.0
            } else if frac > 1.0 - 1e-13 {
                1.0
            } else {
                frac
            };
        }
    });
    field
}

/// Area of the convex polygon `poly` intersected with `a·x + b·y <= c`
/// (single-plane Sutherland–Hodgman clip, then shoelace).
fn clipped_area(poly: &[(f64, f64)], a: f64, b: f64, c: f64) -> f64 {
    let side = |p: (f64, f64)| a * p.0 + b * p.1 - c;
    let mut clipped: Vec<(f64, f64)> = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let p = poly[k];
        let q = poly[(k + 1) % poly.len()];
        let (sp, sq) = (side(p), side(q));
        if sp <= 0.0 {
            clipped.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let s = sp / (sp - sq);
            clipped.push((p.0 + s * (q.0 - p.0), p.1 + s * (q.1 - p.1)));
        }
    }
    if clipped.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for k in 0..clipped.len() {
        let (x1, y1) = clipped[k];
        let (x2, y2) = clipped[(k + 1) % clipped.len()];
        twice += x1 * y2 - x2 * y1;
    }
    0.5 * twice.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2D {
        Grid2D::square(8, 0.0, 1.0).unwrap()
    }

    fn ramp(grid: Grid2D) -> CellField {
        let mut f = CellField::zeros(grid);
        for j in 0..grid.ny as isize {
            for i in 0..grid.nx as isize {
                f.set(i, j, (i * 31 + j * 7) as f64 * 0.01);
            }
        }
        f
    }

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(Grid2D::new(2, 5, 0.1, 0.0, 0.0).is_err());
        assert!(Grid2D::new(5, 5, 0.0, 0.0, 0.0).is_err());
        assert!(Grid2D::new(5, 5, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn cell_centers_and_area() {
        let g = Grid2D::new(4, 3, 0.5, -1.0, 2.0).unwrap();
        assert_eq!(g.center(0, 0), (-0.75, 2.25));
        assert_eq!(g.center(3, 2), (0.75, 3.25));
        assert_eq!(g.cell_area(), 0.25);
    }

    #[test]
    fn constant_field_ghosts_stay_constant() {
        let g = grid();
        let reference: ReferenceFn = Arc::new(|_, _, _| 3.5);
        let specs = [
            BoundarySpec::periodic(),
            BoundarySpec::zero_gradient(),
            BoundarySpec {
                left: SideBc::InflowExact(reference.clone()),
                right: SideBc::ZeroGradient,
                bottom: SideBc::InflowExact(reference),
                top: SideBc::ZeroGradient,
            },
        ];
        for bc in &specs {
            let mut f = CellField::constant(g, 0.0);
            for j in 0..8 {
                for i in 0..8 {
                    f.set(i, j, 3.5);
                }
            }
            fill_ghosts(&mut f, bc, 0.0).unwrap();
            assert!(f.as_slice().iter().all(|&v| v == 3.5), "{bc:?}");
        }
    }

    #[test]
    fn periodic_wraparound() {
        let g = Grid2D::square(3, 0.0, 1.0).unwrap();
        let mut f = ramp(g);
        fill_ghosts(&mut f, &BoundarySpec::periodic(), 0.0).unwrap();
        for j in 0..3 {
            assert_eq!(f.get(-1, j), f.get(2, j));
            assert_eq!(f.get(-2, j), f.get(1, j));
            assert_eq!(f.get(3, j), f.get(0, j));
            assert_eq!(f.get(4, j), f.get(1, j));
        }
        assert_eq!(f.get(-1, -1), f.get(2, 2));
        assert_eq!(f.get(4, 4), f.get(1, 1));
    }

    #[test]
    fn zero_gradient_replicates_edge() {
        let g = grid();
        let mut f = ramp(g);
        fill_ghosts(&mut f, &BoundarySpec::zero_gradient(), 0.0).unwrap();
        for j in 0..8 {
            assert_eq!(f.get(-2, j), f.get(0, j));
            assert_eq!(f.get(9, j), f.get(7, j));
        }
        assert_eq!(f.get(-2, -2), f.get(0, 0));
        assert_eq!(f.get(9, 9), f.get(7, 7));
    }

    #[test]
    fn inflow_exact_evaluates_indicator_at_ghost_centers() {
        let g = Grid2D::square(16, 0.0, 1.0).unwrap();
        let indicator: ReferenceFn = Arc::new(|x, y, _| if y <= x / 2.0 { 1.0 } else { 0.0 });
        let bc = BoundarySpec {
            left: SideBc::InflowExact(indicator.clone()),
            right: SideBc::ZeroGradient,
            bottom: SideBc::InflowExact(indicator),
            top: SideBc::ZeroGradient,
        };
        let mut f = project_half_plane(&g, -0.5, 1.0, 0.0);
        fill_ghosts(&mut f, &bc, 0.0).unwrap();
        for k in 1..=2isize {
            for j in 0..16 {
                let (x, y) = g.center(-k, j);
                let expected = if y <= x / 2.0 { 1.0 } else { 0.0 };
                assert_eq!(f.get(-k, j), expected);
            }
            for i in -2..18 {
                let (x, y) = g.center(i, -k);
                let expected = if y <= x / 2.0 { 1.0 } else { 0.0 };
                assert_eq!(f.get(i, -k), expected);
            }
        }
    }

    #[test]
    fn unpaired_periodic_is_a_config_error() {
        let mut bc = BoundarySpec::periodic();
        bc.right = SideBc::ZeroGradient;
        let mut f = CellField::zeros(grid());
        assert!(matches!(fill_ghosts(&mut f, &bc, 0.0), Err(IcapError::Config(_))));
    }

    #[test]
    fn ghost_filling_is_idempotent_and_leaves_interior() {
        let g = grid();
        for bc in [BoundarySpec::periodic(), BoundarySpec::zero_gradient()] {
            let mut f = ramp(g);
            let before: Vec<f64> = f.interior().collect();
            fill_ghosts(&mut f, &bc, 0.0).unwrap();
            let once = f.clone();
            fill_ghosts(&mut f, &bc, 0.0).unwrap();
            assert_eq!(once, f);
            assert_eq!(before, f.interior().collect::<Vec<_>>());
        }
    }

    #[test]
    fn whole_domain_projects_to_one() {
        let f = project_indicator(&grid(), |_, _| true, 8).unwrap();
        assert!(f.as_slice().iter().all(|&v| v == 1.0));
        assert!(project_indicator(&grid(), |_, _| true, 0).is_err());
    }

    #[test]
    fn oblique_interface_mixed_cells_are_quarter_and_three_quarter() {
        let g = Grid2D::square(200, 0.0, 1.0).unwrap();
        let f = project_half_plane(&g, -0.5, 1.0, 0.0);
        let mut mixed = Vec::new();
        for v in f.interior() {
            if v > 0.0 && v < 1.0 {
                mixed.push(v);
            }
        }
        assert_eq!(mixed.len(), 200);
        for v in mixed {
            assert!((v - 0.25).abs() < 1e-12 || (v - 0.75).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn disk_mass_matches_area() {
        let g = Grid2D::square(256, -1.0, 1.0).unwrap();
        let f = project_indicator(&g, |x, y| x * x + y * y < 0.2, 8).unwrap();
        let exact = std::f64::consts::PI * 0.2;
        // one cell-row of perimeter area
        let tolerance = 2.0 * std::f64::consts::PI * 0.2f64.sqrt() * g.h;
        assert!((f.mass() - exact).abs() < tolerance);
        let (lo, hi) = f.interior_min_max();
        assert!(lo >= 0.0 && hi <= 1.0);
    }

    #[test]
    fn clipped_area_of_half_square() {
        let sq = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        assert!((clipped_area(&sq, 1.0, 1.0, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(clipped_area(&sq, 1.0, 0.0, -1.0), 0.0);
        assert!((clipped_area(&sq, 1.0, 0.0, 5.0) - 1.0).abs() < 1e-15);
    }
}
