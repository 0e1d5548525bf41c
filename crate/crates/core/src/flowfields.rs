//! Analytic divergence-free velocity fields given by a stream function
//! `psi(x, y, t)` with `u = (dpsi/dy, -dpsi/dx)`, and their exact edge-mean
//! normal velocities.
//!
//! The mean normal velocity over a segment is the difference of `psi` at its
//! endpoints divided by its length, so the discrete divergence of every cell
//! telescopes to zero.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{IcapError, Result};
use crate::grid::Grid2D;

pub type StreamFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum FlowField {
    /// Constant velocity `(a, b)`.
    Uniform { a: f64, b: f64 },
    /// Rigid counter-clockwise rotation with unit angular speed about `(cx, cy)`.
    Rotation { cx: f64, cy: f64 },
    /// Rigid rotation `u = (1/2 - y, x - 1/2)` on the unit square.
    Zalesak,
    /// Single-vortex deformation on the unit square, reversed with `cos(πt/T)`.
    KotheRider { period: f64 },
    Custom(StreamFn),
}

impl fmt::Debug for FlowField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowField::Uniform { a, b } => write!(f, "Uniform({a}, {b})"),
            FlowField::Rotation { cx, cy } => write!(f, "Rotation({cx}, {cy})"),
            FlowField::Zalesak => f.write_str("Zalesak"),
            FlowField::KotheRider { period } => write!(f, "KotheRider(T={period})"),
            FlowField::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Single-vortex stream function `(1/π) sin²(πx) sin²(πy) cos(πt/T)`.
pub fn kothe_rider_field(period: f64) -> Result<FlowField> {
    if !(period > 0.0) {
        return Err(IcapError::Config(format!("vortex period must be positive, got {period}")));
    }
    Ok(FlowField::KotheRider { period })
}

impl FlowField {
    pub fn stream(&self, x: f64, y: f64, t: f64) -> f64 {
        match self {
            FlowField::Uniform { a, b } => a * y - b * x,
            FlowField::Rotation { cx, cy } => {
                let (dx, dy) = (x - cx, y - cy);
                -0.5 * (dx * dx + dy * dy)
            }
            FlowField::Zalesak => 0.5 * (y - y * y - x * x + x),
            FlowField::KotheRider { period } => {
                let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
                sx * sx * sy * sy * (PI * t / period).cos() / PI
            }
            FlowField::Custom(psi) => psi(x, y, t),
        }
    }

    /// Pointwise velocity.
    pub fn velocity(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        match self {
            FlowField::Uniform { a, b } => (*a, *b),
            FlowField::Rotation { cx, cy } => (-(y - cy), x - cx),
            FlowField::Zalesak => (0.5 - y, x - 0.5),
            FlowField::KotheRider { period } => {
                let c = (PI * t / period).cos();
                let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
                (
                    sx * sx * (2.0 * PI * y).sin() * c,
                    -sy * sy * (2.0 * PI * x).sin() * c,
                )
            }
            FlowField::Custom(psi) => {
                let e = 1e-6;
                (
                    (psi(x, y + e, t) - psi(x, y - e, t)) / (2.0 * e),
                    -(psi(x + e, y, t) - psi(x - e, y, t)) / (2.0 * e),
                )
            }
        }
    }

    pub fn is_steady(&self) -> bool {
        !matches!(self, FlowField::KotheRider { .. } | FlowField::Custom(_))
    }
}

/// Edge-mean normal velocities on a grid at a given time.
///
/// `vx(i, j)` is the mean of `u_x` over the x-face at node column `i`
/// (between cells `i-1` and `i`), `0 <= i <= nx`. `vy(i, j)` is the mean of
/// `u_y` over the y-face at node row `j`. The half-face arrays split every face
/// at its midpoint; half `0` is the lower (resp. left) half.
#[derive(Debug, Clone)]
pub struct FaceVelocity {
    grid: Grid2D,
    time: f64,
    vx: Vec<f64>,
    vy: Vec<f64>,
    vx_half: Vec<f64>,
    vy_half: Vec<f64>,
}

impl FaceVelocity {
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    #[inline]
    pub fn x_face(&self, i: usize, j: usize) -> f64 {
        self.vx[i + j * (self.grid.nx + 1)]
    }

    #[inline]
    pub fn y_face(&self, i: usize, j: usize) -> f64 {
        self.vy[i + j * self.grid.nx]
    }

    #[inline]
    pub fn x_half(&self, i: usize, j: usize, upper: usize) -> f64 {
        self.vx_half[i + (2 * j + upper) * (self.grid.nx + 1)]
    }

    #[inline]
    pub fn y_half(&self, i: usize, j: usize, right: usize) -> f64 {
        self.vy_half[(2 * i + right) + j * 2 * self.grid.nx]
    }

    /// Every face mean multiplied by `factor`, relabelled at time `t`.
    pub fn scaled(&self, factor: f64, t: f64) -> Self {
        let s = |v: &[f64]| v.iter().map(|x| x * factor).collect();
        Self {
            grid: self.grid,
            time: t,
            vx: s(&self.vx),
            vy: s(&self.vy),
            vx_half: s(&self.vx_half),
            vy_half: s(&self.vy_half),
        }
    }

    /// Largest magnitude of any full-face mean.
    pub fn max_speed(&self) -> f64 {
        self.vx
            .iter()
            .chain(self.vy.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Discrete divergence `(1/|K|) Σ |A| u_A·ν_A` of interior cell `(i, j)`.
    pub fn divergence(&self, i: usize, j: usize) -> f64 {
        let h = self.grid.h;
        (self.x_face(i + 1, j) - self.x_face(i, j) + self.y_face(i, j + 1) - self.y_face(i, j)) / h
    }
}

/// Exact face and half-face means of `flow` at time `t`.
pub fn face_means(flow: &FlowField, grid: &Grid2D, t: f64) -> FaceVelocity {
    let (nx, ny, h) = (grid.nx, grid.ny, grid.h);
    // psi on the half-spaced node lattice, (2nx+1) x (2ny+1)
    let lw = 2 * nx + 1;
    let mut psi = vec![0.0; lw * (2 * ny + 1)];
    psi.par_chunks_mut(lw).enumerate().for_each(|(b, row)| {
        let y = grid.y0 + b as f64 * 0.5 * h;
        for (a, p) in row.iter_mut().enumerate() {
            *p = flow.stream(grid.x0 + a as f64 * 0.5 * h, y, t);
        }
    });
    let at = |a: usize, b: usize| psi[a + b * lw];
    let half = 0.5 * h;

    let mut vx = vec![0.0; (nx + 1) * ny];
    let mut vx_half = vec![0.0; (nx + 1) * 2 * ny];
    for j in 0..ny {
        for i in 0..=nx {
            let (lo, mid, hi) = (at(2 * i, 2 * j), at(2 * i, 2 * j + 1), at(2 * i, 2 * j + 2));
            vx[i + j * (nx + 1)] = (hi - lo) / h;
            vx_half[i + 2 * j * (nx + 1)] = (mid - lo) / half;
            vx_half[i + (2 * j + 1) * (nx + 1)] = (hi - mid) / half;
        }
    }
    let mut vy = vec![0.0; nx * (ny + 1)];
    let mut vy_half = vec![0.0; 2 * nx * (ny + 1)];
    for j in 0..=ny {
        for i in 0..nx {
            let (l, mid, r) = (at(2 * i, 2 * j), at(2 * i + 1, 2 * j), at(2 * i + 2, 2 * j));
            vy[i + j * nx] = (l - r) / h;
            vy_half[2 * i + j * 2 * nx] = (l - mid) / half;
            vy_half[2 * i + 1 + j * 2 * nx] = (mid - r) / half;
        }
    }
    FaceVelocity { grid: *grid, time: t, vx, vy, vx_half, vy_half }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_divergence(v: &FaceVelocity) -> f64 {
        let g = v.grid();
        let mut m = 0.0_f64;
        for j in 0..g.ny {
            for i in 0..g.nx {
                m = m.max(v.divergence(i, j).abs());
            }
        }
        m
    }

    #[test]
    fn uniform_face_means_are_constant() {
        let g = Grid2D::square(16, 0.0, 1.0).unwrap();
        let v = face_means(&FlowField::Uniform { a: 1.0, b: 1.0 }, &g, 0.0);
        for j in 0..16 {
            for i in 0..=16 {
                assert!((v.x_face(i, j) - 1.0).abs() < 1e-13);
                assert!((v.y_face(j, i) - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rotation_is_discretely_divergence_free() {
        let g = Grid2D::square(64, -1.0, 1.0).unwrap();
        let v = face_means(&FlowField::Rotation { cx: 0.0, cy: 0.0 }, &g, 0.0);
        assert!(max_divergence(&v) <= 1e-12 * v.max_speed());
    }

    #[test]
    fn every_flow_is_discretely_divergence_free() {
        let g = Grid2D::square(50, 0.0, 1.0).unwrap();
        let flows = [
            FlowField::Uniform { a: 2.0, b: 1.0 },
            FlowField::Rotation { cx: 0.3, cy: -0.2 },
            FlowField::Zalesak,
            kothe_rider_field(12.0).unwrap(),
        ];
        for flow in &flows {
            for t in [0.0, 1.7] {
                let v = face_means(flow, &g, t);
                assert!(max_divergence(&v) <= 1e-12 * v.max_speed().max(1e-300), "{flow:?}");
            }
        }
    }

    #[test]
    fn half_faces_sum_to_full_face() {
        let g = Grid2D::square(20, 0.0, 1.0).unwrap();
        let v = face_means(&kothe_rider_field(12.0).unwrap(), &g, 0.4);
        for j in 0..20 {
            for i in 0..=20 {
                let s = 0.5 * (v.x_half(i, j, 0) + v.x_half(i, j, 1));
                assert!((s - v.x_face(i, j)).abs() < 1e-13);
                let s = 0.5 * (v.y_half(j, i, 0) + v.y_half(j, i, 1));
                assert!((s - v.y_face(j, i)).abs() < 1e-13);
            }
        }
    }

    fn gauss5(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let nodes = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        let weights = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
        nodes.iter().zip(weights).map(|(x, w)| w * f(m + r * x)).sum::<f64>() * r
    }

    #[test]
    fn zalesak_face_mean_matches_quadrature() {
        // face from (0.5, 0.5) to (0.5, 0.5 + h)
        for n in [16usize, 64, 256] {
            let g = Grid2D::square(n, 0.0, 1.0).unwrap();
            let v = face_means(&FlowField::Zalesak, &g, 0.0);
            let (i, j) = (n / 2, n / 2);
            let h = g.h;
            let quad = gauss5(|y| FlowField::Zalesak.velocity(0.5, y, 0.0).0, 0.5, 0.5 + h) / h;
            assert!((v.x_face(i, j) - quad).abs() < 1e-13);
            // mean of (1/2 - y) over [1/2, 1/2 + h] is -h/2; psi-difference form agrees
            assert!((v.x_face(i, j) + 0.5 * h).abs() < 1e-13);
        }
    }

    #[test]
    fn kothe_rider_properties() {
        let flow = kothe_rider_field(12.0).unwrap();
        assert!(flow.stream(0.3, 0.8, 6.0).abs() < 1e-16);
        let (u, w) = flow.velocity(0.3, 0.8, 6.0);
        assert!(u.abs() < 1e-16 && w.abs() < 1e-16);
        assert!((flow.stream(0.5, 0.5, 0.0) - 1.0 / PI).abs() < 1e-15);
        for s in [0.1, 0.37, 0.9] {
            assert!(flow.velocity(0.0, s, 1.0).0.abs() < 1e-15);
            assert!(flow.velocity(1.0, s, 1.0).0.abs() < 1e-15);
            assert!(flow.velocity(s, 0.0, 1.0).1.abs() < 1e-15);
            assert!(flow.velocity(s, 1.0, 1.0).1.abs() < 1e-15);
        }
        assert!(kothe_rider_field(0.0).is_err());
    }

    #[test]
    fn velocity_matches_stream_derivatives() {
        let flows = [FlowField::Rotation { cx: 0.5, cy: 0.0 }, FlowField::Zalesak, kothe_rider_field(12.0).unwrap()];
        let e = 1e-6;
        for flow in &flows {
            let (x, y, t) = (0.31, 0.62, 2.5);
            let (u, w) = flow.velocity(x, y, t);
            let dy = (flow.stream(x, y + e, t) - flow.stream(x, y - e, t)) / (2.0 * e);
            let dx = (flow.stream(x + e, y, t) - flow.stream(x - e, y, t)) / (2.0 * e);
            assert!((u - dy).abs() < 1e-8 && (w + dx).abs() < 1e-8, "{flow:?}");
        }
    }
}
