//! Multidimensional limiting process.
//!
//! Each cell carries a predicted gradient from the 8-point Simpson stencil and
//! a single scalar factor `φ` that scales it so the extrapolated values at the
//! four cell corners stay within the extrema of the four cells sharing each
//! corner. The limited linear reconstruction is projected onto four constant
//! corner sub-squares; fluxes are computed per half-face from the upwind
//! sub-square.

use rayon::prelude::*;

use crate::error::{IcapError, Result};
use crate::flowfields::FaceVelocity;
use crate::grid::{CellField, Grid2D, GHOST};

/// Relative size below which a predicted gradient is treated as zero.
pub const GRADIENT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpConfig {
    /// Compressiveness: 1 keeps second order, 2 is compressive.
    pub beta: f64,
}

impl MlpConfig {
    pub fn new(beta: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&beta) {
            return Err(IcapError::Config(format!("beta must lie in [1, 2], got {beta}")));
        }
        Ok(Self { beta })
    }

    pub fn second_order() -> Self {
        Self { beta: 1.0 }
    }

    pub fn compressive() -> Self {
        Self { beta: 2.0 }
    }
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self::compressive()
    }
}

/// Per-cell gradient vectors on the padded layout. Only cells with
/// `-1 <= i <= nx`, `-1 <= j <= ny` are populated; the outer ghost ring is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    grid: Grid2D,
    gx: Vec<f64>,
    gy: Vec<f64>,
}

impl GradientField {
    #[inline]
    pub fn get(&self, i: isize, j: isize) -> (f64, f64) {
        let k = self.grid.idx(i, j);
        (self.gx[k], self.gy[k])
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// Zeroes every gradient with `|g|·h < threshold`.
    pub fn suppress_below(&mut self, threshold: f64) {
        let h = self.grid.h;
        self.gx.par_iter_mut().zip(self.gy.par_iter_mut()).for_each(|(x, y)| {
            if x.hypot(*y) * h < threshold {
                *x = 0.0;
                *y = 0.0;
            }
        });
    }
}

/// Rows `-1..=ny` of the padded layout, as `(j, row)` chunks.
fn reconstruction_rows<'a>(
    grid: &Grid2D,
    data: &'a mut [f64],
) -> impl IndexedParallelIterator<Item = (isize, &'a mut [f64])> {
    let stride = grid.stride();
    data.par_chunks_mut(stride)
        .enumerate()
        .skip(GHOST - 1)
        .take(grid.ny + 2)
        .map(|(row, chunk)| (row as isize - GHOST as isize, chunk))
}

/// 8-point gradient predictor from Simpson quadrature of `∮ z ν`.
/// Requires one filled ghost ring around every populated cell.
pub fn predict_gradient(z: &CellField) -> GradientField {
    let grid = *z.grid();
    let inv_h = 1.0 / grid.h;
    let (c1, c2) = (1.0 / 12.0, 1.0 / 3.0);
    let mut gx = vec![0.0; grid.padded_len()];
    let mut gy = vec![0.0; grid.padded_len()];
    let nx = grid.nx as isize;
    reconstruction_rows(&grid, &mut gx)
        .zip(reconstruction_rows(&grid, &mut gy))
        .for_each(|((j, rx), (_, ry))| {
            for i in -1..=nx {
                let k = (i + GHOST as isize) as usize;
                let zz = |di: isize, dj: isize| z.get(i + di, j + dj);
                rx[k] = inv_h
                    * (c1 * (zz(1, 1) - zz(-1, 1)) + c2 * (zz(1, 0) - zz(-1, 0)) + c1 * (zz(1, -1) - zz(-1, -1)));
                ry[k] = inv_h
                    * (c1 * (zz(1, 1) - zz(1, -1)) + c2 * (zz(0, 1) - zz(0, -1)) + c1 * (zz(-1, 1) - zz(-1, -1)));
            }
        });
    GradientField { grid, gx, gy }
}

/// Limiting factor for one corner: the largest `φ <= beta` keeping
/// `z + φ(ẑ - z)` inside `[lo, hi]`.
#[inline]
pub fn corner_factor(zk: f64, zhat: f64, lo: f64, hi: f64, beta: f64) -> f64 {
    if zhat > zk {
        beta.min((hi - zk) / (zhat - zk))
    } else if zhat < zk {
        beta.min((lo - zk) / (zhat - zk))
    } else {
        beta
    }
}

/// Extrema of the four cells sharing the corner of `(i, j)` in direction `(sx, sy)`.
#[inline]
pub fn corner_bounds(z: &CellField, i: isize, j: isize, sx: isize, sy: isize) -> (f64, f64) {
    let v = [z.get(i, j), z.get(i + sx, j), z.get(i, j + sy), z.get(i + sx, j + sy)];
    (
        v[0].min(v[1]).min(v[2]).min(v[3]),
        v[0].max(v[1]).max(v[2]).max(v[3]),
    )
}

pub const CORNERS: [(isize, isize); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Scalar limiting factor per cell: minimum over the four corner factors.
pub fn limit_gradient(z: &CellField, g: &GradientField, cfg: &MlpConfig) -> CellField {
    let grid = *z.grid();
    let half = 0.5 * grid.h;
    let mut phi = CellField::zeros(grid);
    let nx = grid.nx as isize;
    reconstruction_rows(&grid, phi.as_mut_slice()).for_each(|(j, row)| {
        for i in -1..=nx {
            let zk = z.get(i, j);
            let (gx, gy) = g.get(i, j);
            let mut f = cfg.beta;
            for (sx, sy) in CORNERS {
                let zhat = zk + half * (gx * sx as f64 + gy * sy as f64);
                let (lo, hi) = corner_bounds(z, i, j, sx, sy);
                f = f.min(corner_factor(zk, zhat, lo, hi, cfg.beta));
            }
            row[(i + GHOST as isize) as usize] = f;
        }
    });
    phi
}

/// Limited piecewise-linear reconstruction and its sub-square projection.
#[derive(Debug, Clone)]
pub struct MlpReconstruction {
    pub base: CellField,
    pub gradient: GradientField,
    pub phi: CellField,
}

impl MlpReconstruction {
    /// Predicts, floors and limits the gradient of `z` (ghosts filled).
    pub fn build(z: &CellField, cfg: &MlpConfig) -> Self {
        Self::build_with_scale(z, cfg, z.max_abs())
    }

    /// As [`build`](Self::build) with an explicit magnitude for the zero-gradient floor.
    pub fn build_with_scale(z: &CellField, cfg: &MlpConfig, scale: f64) -> Self {
        let mut gradient = predict_gradient(z);
        gradient.suppress_below(GRADIENT_FLOOR * scale);
        let phi = limit_gradient(z, &gradient, cfg);
        Self { base: z.clone(), gradient, phi }
    }

    /// First-order reconstruction: `φ ≡ 0`.
    pub fn with_zero_phi(mut self) -> Self {
        self.phi.fill(0.0);
        self
    }

    #[inline]
    pub fn limited_gradient(&self, i: isize, j: isize) -> (f64, f64) {
        let (gx, gy) = self.gradient.get(i, j);
        let f = self.phi.get(i, j);
        (f * gx, f * gy)
    }

    /// Constant on the sub-square of `(i, j)` towards corner `(sx, sy)`.
    #[inline]
    pub fn sub(&self, i: isize, j: isize, sx: f64, sy: f64) -> f64 {
        let (gx, gy) = self.limited_gradient(i, j);
        let q = 0.25 * self.base.grid().h;
        self.base.get(i, j) + q * (gx * sx + gy * sy)
    }

    /// Limited reconstruction evaluated at the corner `(sx, sy)`.
    #[inline]
    pub fn corner_value(&self, i: isize, j: isize, sx: f64, sy: f64) -> f64 {
        let (gx, gy) = self.limited_gradient(i, j);
        let q = 0.5 * self.base.grid().h;
        self.base.get(i, j) + q * (gx * sx + gy * sy)
    }
}

/// Donor cell and facing sub-square of the x half-face `(i, j, upper)`.
#[inline]
pub fn x_half_donor(i: usize, j: usize, upper: usize, v: f64) -> (isize, isize, f64, f64) {
    let sy = if upper == 1 { 1.0 } else { -1.0 };
    if v >= 0.0 {
        (i as isize - 1, j as isize, 1.0, sy)
    } else {
        (i as isize, j as isize, -1.0, sy)
    }
}

/// Donor cell and facing sub-square of the y half-face `(i, j, right)`.
#[inline]
pub fn y_half_donor(i: usize, j: usize, right: usize, v: f64) -> (isize, isize, f64, f64) {
    let sx = if right == 1 { 1.0 } else { -1.0 };
    if v >= 0.0 {
        (i as isize, j as isize - 1, sx, 1.0)
    } else {
        (i as isize, j as isize, sx, -1.0)
    }
}

/// Upwind half-face fluxes `v·z_up` (per unit length) of a reconstruction.
pub struct HalfFaceFluxes {
    pub nx: usize,
    pub ny: usize,
    /// `(nx + 1) x 2ny`, index `i + (2j + upper)(nx + 1)`.
    pub x: Vec<f64>,
    /// `2nx x (ny + 1)`, index `2i + right + j·2nx`.
    pub y: Vec<f64>,
}

impl HalfFaceFluxes {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            x: vec![0.0; (grid.nx + 1) * 2 * grid.ny],
            y: vec![0.0; 2 * grid.nx * (grid.ny + 1)],
        }
    }

    /// Fills both arrays with `f(donor_i, donor_j, sx, sy, v)`.
    pub fn compute(
        grid: &Grid2D,
        v: &FaceVelocity,
        f: impl Fn(isize, isize, f64, f64, f64) -> f64 + Sync,
    ) -> Self {
        let mut out = Self::zeros(grid);
        let nx = grid.nx;
        out.x.par_chunks_mut(nx + 1).enumerate().for_each(|(row, chunk)| {
            let (j, upper) = (row / 2, row % 2);
            for (i, flux) in chunk.iter_mut().enumerate() {
                let vh = v.x_half(i, j, upper);
                let (di, dj, sx, sy) = x_half_donor(i, j, upper, vh);
                *flux = f(di, dj, sx, sy, vh);
            }
        });
        out.y.par_chunks_mut(2 * nx).enumerate().for_each(|(j, chunk)| {
            for (col, flux) in chunk.iter_mut().enumerate() {
                let (i, right) = (col / 2, col % 2);
                let vh = v.y_half(i, j, right);
                let (di, dj, sx, sy) = y_half_donor(i, j, right, vh);
                *flux = f(di, dj, sx, sy, vh);
            }
        });
        out
    }

    /// Like [`compute`](Self::compute) for `k` flux components at once:
    /// `f(donor_i, donor_j, sx, sy, v, out)` fills `out[..k]`.
    pub fn compute_many(
        grid: &Grid2D,
        v: &FaceVelocity,
        k: usize,
        f: impl Fn(isize, isize, f64, f64, f64, &mut [f64]) + Sync,
    ) -> Vec<Self> {
        let nx = grid.nx;
        let mut xs = vec![0.0; k * (nx + 1) * 2 * grid.ny];
        let mut ys = vec![0.0; k * 2 * nx * (grid.ny + 1)];
        xs.par_chunks_mut(k * (nx + 1)).enumerate().for_each(|(row, chunk)| {
            let (j, upper) = (row / 2, row % 2);
            for (i, slot) in chunk.chunks_mut(k).enumerate() {
                let vh = v.x_half(i, j, upper);
                let (di, dj, sx, sy) = x_half_donor(i, j, upper, vh);
                f(di, dj, sx, sy, vh, slot);
            }
        });
        ys.par_chunks_mut(k * 2 * nx).enumerate().for_each(|(j, chunk)| {
            for (col, slot) in chunk.chunks_mut(k).enumerate() {
                let (i, right) = (col / 2, col % 2);
                let vh = v.y_half(i, j, right);
                let (di, dj, sx, sy) = y_half_donor(i, j, right, vh);
                f(di, dj, sx, sy, vh, slot);
            }
        });
        (0..k)
            .map(|c| Self {
                nx,
                ny: grid.ny,
                x: xs.iter().skip(c).step_by(k).copied().collect(),
                y: ys.iter().skip(c).step_by(k).copied().collect(),
            })
            .collect()
    }

    #[inline]
    pub fn x_at(&self, i: usize, j: usize, upper: usize) -> f64 {
        self.x[i + (2 * j + upper) * (self.nx + 1)]
    }

    #[inline]
    pub fn y_at(&self, i: usize, j: usize, right: usize) -> f64 {
        self.y[2 * i + right + j * 2 * self.nx]
    }

    /// Net outward flux of cell `(i, j)` per unit cell area, `(1/h²) Σ (h/2) F`.
    #[inline]
    pub fn net_outflow(&self, i: usize, j: usize, h: f64) -> f64 {
        let xs = self.x_at(i + 1, j, 0) + self.x_at(i + 1, j, 1) - self.x_at(i, j, 0) - self.x_at(i, j, 1);
        let ys = self.y_at(i, j + 1, 0) + self.y_at(i, j + 1, 1) - self.y_at(i, j, 0) - self.y_at(i, j, 1);
        0.5 * (xs + ys) / h
    }

    /// Writes `-net_outflow` into the interior of `out`, zeroing the ghosts.
    pub fn write_rate(&self, h: f64, out: &mut CellField) {
        out.fill(0.0);
        let stride = out.grid().stride();
        let nx = self.nx;
        out.as_mut_slice()
            .par_chunks_mut(stride)
            .skip(GHOST)
            .take(self.ny)
            .enumerate()
            .for_each(|(j, row)| {
                for i in 0..nx {
                    row[i + GHOST] = -self.net_outflow(i, j, h);
                }
            });
    }
}

/// Semi-discrete rate of the half-face upwind scheme for a given reconstruction.
pub fn reconstruction_rate(rec: &MlpReconstruction, v: &FaceVelocity, out: &mut CellField) {
    let grid = *rec.base.grid();
    let fluxes = HalfFaceFluxes::compute(&grid, v, |i, j, sx, sy, vh| vh * rec.sub(i, j, sx, sy));
    fluxes.write_rate(grid.h, out);
}

/// MLP semi-discrete rate `dz/dt`; `z` must have both ghost rings filled.
///
/// Same arithmetic as [`MlpReconstruction::build`] followed by
/// [`reconstruction_rate`], fused into two sweeps.
pub fn mlp_rate(z: &CellField, v: &FaceVelocity, cfg: &MlpConfig, out: &mut CellField) {
    let grid = *z.grid();
    let subs = sub_square_values(z, cfg, GRADIENT_FLOOR * z.max_abs());
    let stride = grid.stride();
    let (nx, h) = (grid.nx, grid.h);
    // corner slot: bit 0 set for +x, bit 1 set for +y
    let sub = |i: usize, j: usize, c: usize| subs[4 * (i + j * stride) + c];
    out.fill(0.0);
    out.as_mut_slice()
        .par_chunks_mut(stride)
        .enumerate()
        .skip(GHOST)
        .take(grid.ny)
        .for_each(|(row, chunk)| {
            let j = row - GHOST;
            let xflux = |node: usize, upper: usize| {
                let vh = v.x_half(node, j, upper);
                // padded column of the cell left of the node is node - 1 + GHOST
                if vh >= 0.0 {
                    vh * sub(node + GHOST - 1, row, 1 + 2 * upper)
                } else {
                    vh * sub(node + GHOST, row, 2 * upper)
                }
            };
            let yflux = |i: usize, node: usize, right: usize| {
                let vh = v.y_half(i, node, right);
                if vh >= 0.0 {
                    vh * sub(i + GHOST, node + GHOST - 1, right + 2)
                } else {
                    vh * sub(i + GHOST, node + GHOST, right)
                }
            };
            for i in 0..nx {
                let xs = xflux(i + 1, 0) + xflux(i + 1, 1) - xflux(i, 0) - xflux(i, 1);
                let ys = yflux(i, j + 1, 0) + yflux(i, j + 1, 1) - yflux(i, j, 0) - yflux(i, j, 1);
                chunk[i + GHOST] = -(0.5 * (xs + ys) / h);
            }
        });
}

/// Sub-square constants of every cell with `-1 <= i <= nx`, `-1 <= j <= ny`,
/// four per padded cell (slot bit 0: `+x`, bit 1: `+y`).
fn sub_square_values(z: &CellField, cfg: &MlpConfig, floor: f64) -> Vec<f64> {
    let grid = *z.grid();
    let stride = grid.stride();
    let (h, beta) = (grid.h, cfg.beta);
    let (inv_h, half, q) = (1.0 / h, 0.5 * h, 0.25 * h);
    let (c1, c2) = (1.0 / 12.0, 1.0 / 3.0);
    let zs = z.as_slice();
    let mut subs = vec![0.0; 4 * grid.padded_len()];
    subs.par_chunks_mut(4 * stride)
        .enumerate()
        .skip(GHOST - 1)
        .take(grid.ny + 2)
        .for_each(|(row, chunk)| {
            for col in GHOST - 1..=grid.nx + GHOST {
                let k = col + row * stride;
                let at = |di: isize, dj: isize| zs[(k as isize + di + dj * stride as isize) as usize];
                let zk = zs[k];
                let mut gx = inv_h * (c1 * (at(1, 1) - at(-1, 1)) + c2 * (at(1, 0) - at(-1, 0)) + c1 * (at(1, -1) - at(-1, -1)));
                let mut gy = inv_h * (c1 * (at(1, 1) - at(1, -1)) + c2 * (at(0, 1) - at(0, -1)) + c1 * (at(-1, 1) - at(-1, -1)));
                if gx.hypot(gy) * h < floor {
                    gx = 0.0;
                    gy = 0.0;
                }
                let mut phi = beta;
                for (sx, sy) in CORNERS {
                    let zhat = zk + half * (gx * sx as f64 + gy * sy as f64);
                    let (a, b, c) = (at(sx, 0), at(0, sy), at(sx, sy));
                    let lo = zk.min(a).min(b).min(c);
                    let hi = zk.max(a).max(b).max(c);
                    phi = phi.min(corner_factor(zk, zhat, lo, hi, beta));
                }
                let (lx, ly) = (phi * gx, phi * gy);
                let out = &mut chunk[4 * col..4 * col + 4];
                out[0] = zk + q * (-lx - ly);
                out[1] = zk + q * (lx - ly);
                out[2] = zk + q * (-lx + ly);
                out[3] = zk + q * (lx + ly);
            }
        });
    subs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fused_rate_matches_reconstruction_path() {
        let g = Grid2D::square(24, 0.0, 1.0).unwrap();
        let mut z = crate::grid::project_indicator(&g, |x, y| (x - 0.4).powi(2) + (y - 0.55).powi(2) < 0.08, 4).unwrap();
        fill_ghosts(&mut z, &BoundarySpec::periodic(), 0.0).unwrap();
        let v = face_means(&FlowField::Rotation { cx: 0.5, cy: 0.5 }, &g, 0.0);
        for beta in [1.0, 1.5, 2.0] {
            let cfg = MlpConfig::new(beta).unwrap();
            let (mut fused, mut plain) = (CellField::zeros(g), CellField::zeros(g));
            mlp_rate(&z, &v, &cfg, &mut fused);
            reconstruction_rate(&MlpReconstruction::build(&z, &cfg), &v, &mut plain);
            for (a, b) in fused.as_slice().iter().zip(plain.as_slice()) {
                assert!((a - b).abs() < 1e-12, "{a} {b}");
            }
        }
    }
    use crate::flowfields::{face_means, FlowField};
    use crate::grid::{fill_ghosts, project_half_plane, BoundarySpec};

    fn linear(grid: Grid2D, a: f64, b: f64) -> CellField {
        CellField::from_fn(grid, |x, y| a * x + b * y)
    }

    #[test]
    fn beta_range_enforced() {
        assert!(MlpConfig::new(0.5).is_err());
        assert!(MlpConfig::new(2.5).is_err());
        assert!(MlpConfig::new(1.5).is_ok());
    }

    #[test]
    fn constant_field_has_zero_gradient() {
        let g = Grid2D::square(8, 0.0, 1.0).unwrap();
        let z = CellField::constant(g, 0.3);
        let grad = predict_gradient(&z);
        for j in -1..=8 {
            for i in -1..=8 {
                assert_eq!(grad.get(i, j), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn predictor_exact_on_linear_and_quadratic_data() {
        let g = Grid2D::square(16, -1.0, 1.0).unwrap();
        let grad = predict_gradient(&linear(g, 0.7, -1.3));
        for j in -1..=16 {
            for i in -1..=16 {
                let (gx, gy) = grad.get(i, j);
                assert!((gx - 0.7).abs() < 1e-13 && (gy + 1.3).abs() < 1e-13);
            }
        }
        let quad = CellField::from_fn(g, |x, _| x * x);
        let grad = predict_gradient(&quad);
        for j in 0..16 {
            for i in 0..16 {
                let (xc, _) = g.center(i, j);
                let (gx, gy) = grad.get(i, j);
                assert!((gx - 2.0 * xc).abs() < 1e-12 && gy.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_field_is_not_limited_with_beta_one() {
        let g = Grid2D::square(12, 0.0, 1.0).unwrap();
        let z = linear(g, 0.4, 1.1);
        let rec = MlpReconstruction::build(&z, &MlpConfig::second_order());
        for j in 0..12 {
            for i in 0..12 {
                assert!((rec.phi.get(i, j) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flat_reconstruction_when_gradient_is_zero() {
        let g = Grid2D::square(6, 0.0, 1.0).unwrap();
        let mut z = CellField::zeros(g);
        z.set(3, 3, 1.0);
        // symmetric peak: central differences vanish at the peak itself
        let rec = MlpReconstruction::build(&z, &MlpConfig::compressive());
        assert_eq!(rec.gradient.get(3, 3), (0.0, 0.0));
        assert_eq!(rec.phi.get(3, 3), 2.0);
        for (sx, sy) in CORNERS {
            assert_eq!(rec.sub(3, 3, sx as f64, sy as f64), 1.0);
        }
    }

    #[test]
    fn isolated_cell_corner_values_in_unit_interval() {
        let g = Grid2D::square(7, 0.0, 1.0).unwrap();
        let mut z = CellField::zeros(g);
        z.set(3, 3, 1.0);
        for beta in [1.0, 2.0] {
            let rec = MlpReconstruction::build(&z, &MlpConfig::new(beta).unwrap());
            for j in 2..=4 {
                for i in 2..=4 {
                    assert!(rec.phi.get(i, j) >= 0.0);
                    for (sx, sy) in CORNERS {
                        let c = rec.corner_value(i, j, sx as f64, sy as f64);
                        assert!((-1e-15..=1.0 + 1e-15).contains(&c), "{i} {j} {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn corner_factor_cases() {
        assert_eq!(corner_factor(0.5, 0.5, 0.0, 1.0, 2.0), 2.0);
        assert_eq!(corner_factor(0.5, 0.75, 0.0, 1.0, 2.0), 2.0);
        assert_eq!(corner_factor(0.5, 1.5, 0.0, 1.0, 2.0), 0.5);
        assert_eq!(corner_factor(0.5, 0.0, 0.25, 1.0, 1.0), 0.5);
        assert_eq!(corner_factor(0.5, 0.6, 0.0, 0.5, 2.0), 0.0);
    }

    #[test]
    fn constant_field_rate_vanishes() {
        let g = Grid2D::square(10, -1.0, 1.0).unwrap();
        let v = face_means(&FlowField::Rotation { cx: 0.0, cy: 0.0 }, &g, 0.0);
        let z = CellField::constant(g, 0.8);
        let mut rate = CellField::zeros(g);
        mlp_rate(&z, &v, &MlpConfig::compressive(), &mut rate);
        assert!(rate.interior().all(|r| r.abs() < 1e-13));
    }

    #[test]
    fn zero_phi_is_donor_cell_on_uniform_flow() {
        let g = Grid2D::square(9, 0.0, 1.0).unwrap();
        let (a, b) = (1.5, -0.5);
        let v = face_means(&FlowField::Uniform { a, b }, &g, 0.0);
        let mut z = CellField::from_fn(g, |x, y| (7.0 * x).sin() + y * y);
        fill_ghosts(&mut z, &BoundarySpec::periodic(), 0.0).unwrap();
        let rec = MlpReconstruction::build(&z, &MlpConfig::compressive()).with_zero_phi();
        let mut rate = CellField::zeros(g);
        reconstruction_rate(&rec, &v, &mut rate);
        for j in 0..9 {
            for i in 0..9 {
                // a > 0: donor on the left; b < 0: donor above
                let donor = a * (z.get(i, j) - z.get(i - 1, j)) + b * (z.get(i, j + 1) - z.get(i, j));
                let expected = -donor / g.h;
                assert!((rate.get(i, j) - expected).abs() < 1e-11, "{i} {j}");
            }
        }
    }

    #[test]
    fn sub_squares_average_to_cell_mean() {
        let g = Grid2D::square(10, 0.0, 1.0).unwrap();
        let mut z = project_half_plane(&g, -0.5, 1.0, 0.0);
        fill_ghosts(&mut z, &BoundarySpec::zero_gradient(), 0.0).unwrap();
        let rec = MlpReconstruction::build(&z, &MlpConfig::compressive());
        for j in 0..10 {
            for i in 0..10 {
                let mean = CORNERS.iter().map(|&(sx, sy)| rec.sub(i, j, sx as f64, sy as f64)).sum::<f64>() / 4.0;
                assert!((mean - z.get(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn oblique_pattern_rate_is_self_similar() {
        // the 1/4-3/4 staircase looks the same on every grid, so h·rate does too
        let scaled = |n: usize| {
            let g = Grid2D::square(n, 0.0, 1.0).unwrap();
            let mut z = project_half_plane(&g, -0.5, 1.0, 0.0);
            fill_ghosts(&mut z, &BoundarySpec::zero_gradient(), 0.0).unwrap();
            let v = face_means(&FlowField::Uniform { a: 2.0, b: 1.0 }, &g, 0.0);
            let mut rate = CellField::zeros(g);
            mlp_rate(&z, &v, &MlpConfig::compressive(), &mut rate);
            let (i, j) = (n as isize / 2 + 1, n as isize / 4);
            assert!((z.get(i, j) - 0.75).abs() < 1e-12);
            rate.get(i, j) * g.h
        };
        let (a, b) = (scaled(40), scaled(160));
        assert!((a - b).abs() < 1e-12, "{a} {b}");
        assert!(a < -0.5);
    }
}
