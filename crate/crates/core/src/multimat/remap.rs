//! Remap (advection) rate of the multimaterial state with shared-mass-flux
//! partial-mass fluxes and pressure-compatible edge densities.

use rayon::prelude::*;

use super::compat::compat_project;
use super::eos::{recover_into, PerfectGasEos};
use crate::error::{IcapError, Result};
use crate::flowfields::FaceVelocity;
use crate::grid::{fill_ghosts, BoundarySpec, CellField, Grid2D, SideBc, GHOST};
use crate::integrate::{OdeState, RateOperator};
use crate::mlp::{limit_gradient, predict_gradient, HalfFaceFluxes, MlpConfig, MlpReconstruction, GRADIENT_FLOOR};

/// Conserved multimaterial state: partial masses `m_l`, momentum `ρu` and
/// total energy `ρE` per unit volume.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiMatState {
    pub m: Vec<CellField>,
    pub mom_x: CellField,
    pub mom_y: CellField,
    pub energy: CellField,
}

/// Cell primitives used to build a state.
#[derive(Debug, Clone, PartialEq)]
pub struct CellPrimitives {
    pub alpha: Vec<f64>,
    pub p: f64,
    pub t: f64,
    pub u: (f64, f64),
}

impl MultiMatState {
    /// Evaluates `f(i, j)` on every interior cell; ghosts are left at zero.
    pub fn from_primitives(
        grid: Grid2D,
        eos: &PerfectGasEos,
        f: impl Fn(isize, isize) -> CellPrimitives,
    ) -> Result<Self> {
        let n = eos.fluids();
        let mut s = Self {
            m: vec![CellField::zeros(grid); n],
            mom_x: CellField::zeros(grid),
            mom_y: CellField::zeros(grid),
            energy: CellField::zeros(grid),
        };
        for j in 0..grid.ny as isize {
            for i in 0..grid.nx as isize {
                let c = f(i, j);
                if c.alpha.len() != n {
                    return Err(IcapError::Config(format!("{} volume fractions for {n} fluids", c.alpha.len())));
                }
                let (m, mom, e) = super::eos::conserved_from(&c.alpha, c.p, c.t, c.u, eos);
                for (field, v) in s.m.iter_mut().zip(m) {
                    field.set(i, j, v);
                }
                s.mom_x.set(i, j, mom.0);
                s.mom_y.set(i, j, mom.1);
                s.energy.set(i, j, e);
            }
        }
        Ok(s)
    }

    pub fn grid(&self) -> &Grid2D {
        self.energy.grid()
    }

    pub fn fluids(&self) -> usize {
        self.m.len()
    }

    fn fields(&self) -> impl Iterator<Item = &CellField> {
        self.m.iter().chain([&self.mom_x, &self.mom_y, &self.energy])
    }

    fn fields_mut(&mut self) -> impl Iterator<Item = &mut CellField> {
        self.m.iter_mut().chain([&mut self.mom_x, &mut self.mom_y, &mut self.energy])
    }

    pub fn fill_ghosts(&mut self, bc: &BoundarySpec, t: f64) -> Result<()> {
        for f in self.fields_mut() {
            fill_ghosts(f, bc, t)?;
        }
        Ok(())
    }

    /// Mass fraction field `z_l = m_l / Σ m`.
    pub fn mass_fraction(&self, l: usize) -> CellField {
        let mut z = CellField::zeros(*self.grid());
        let rho = self.density();
        z.as_mut_slice()
            .iter_mut()
            .zip(self.m[l].as_slice().iter().zip(rho.as_slice()))
            .for_each(|(z, (m, r))| *z = if *r > 0.0 { m / r } else { 0.0 });
        z
    }

    pub fn density(&self) -> CellField {
        let mut rho = CellField::zeros(*self.grid());
        for m in &self.m {
            rho.axpy(1.0, m);
        }
        rho
    }

    /// Pressure and temperature of every interior cell.
    pub fn pressure_temperature(&self, eos: &PerfectGasEos) -> Result<(CellField, CellField)> {
        let g = *self.grid();
        let mut p = CellField::zeros(g);
        let mut t = CellField::zeros(g);
        let n = self.fluids();
        let (mut rl, mut al, mut m) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for j in 0..g.ny as isize {
            for i in 0..g.nx as isize {
                for l in 0..n {
                    m[l] = self.m[l].get(i, j);
                }
                let mom = (self.mom_x.get(i, j), self.mom_y.get(i, j));
                let (_, _, tt, pp) = recover_into(&m, mom, self.energy.get(i, j), eos, &mut rl, &mut al)
                    .map_err(|reason| IcapError::Inadmissible { i, j, reason: reason.into() })?;
                p.set(i, j, pp);
                t.set(i, j, tt);
            }
        }
        Ok((p, t))
    }
}

impl OdeState for MultiMatState {
    fn axpy(&mut self, a: f64, other: &Self) {
        let others: Vec<&CellField> = other.fields().collect();
        for (f, o) in self.fields_mut().zip(others) {
            f.axpy(a, o);
        }
    }

    fn is_finite(&self) -> bool {
        self.fields().all(|f| f.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemapConfig {
    /// Limiter for the mass fractions.
    pub mlp: MlpConfig,
    /// Reconstruct `p` and `T` on sub-squares instead of using cell values.
    pub second_order_thermo: bool,
    /// Donor-cell fluxes (`φ ≡ 0` for every reconstruction).
    pub first_order: bool,
}

impl Default for RemapConfig {
    fn default() -> Self {
        Self { mlp: MlpConfig::compressive(), second_order_thermo: false, first_order: false }
    }
}

/// Cell primitives on the padded layout.
struct PrimitiveFields {
    z: Vec<CellField>,
    ux: CellField,
    uy: CellField,
    p: CellField,
    t: CellField,
}

fn primitive_fields(s: &MultiMatState, eos: &PerfectGasEos) -> Result<PrimitiveFields> {
    let grid = *s.grid();
    let n = s.fluids();
    let len = grid.padded_len();
    let stride = grid.stride();
    // per cell: z_0..z_{n-1}, ux, uy, p, t
    let k = n + 4;
    let mut buf = vec![0.0; k * len];
    let rows: Vec<std::result::Result<(), (isize, isize, &'static str)>> = buf
        .par_chunks_mut(k * stride)
        .enumerate()
        .map(|(row, chunk)| {
            let (mut rl, mut al, mut m) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
            let j = row as isize - GHOST as isize;
            for col in 0..stride {
                let i = col as isize - GHOST as isize;
                let idx = grid.idx(i, j);
                for l in 0..n {
                    m[l] = s.m[l].as_slice()[idx];
                }
                let mom = (s.mom_x.as_slice()[idx], s.mom_y.as_slice()[idx]);
                let (rho, u, t, p) = recover_into(&m, mom, s.energy.as_slice()[idx], eos, &mut rl, &mut al)
                    .map_err(|reason| (i, j, reason))?;
                let out = &mut chunk[col * k..(col + 1) * k];
                for l in 0..n {
                    out[l] = m[l] / rho;
                }
                out[n..].copy_from_slice(&[u.0, u.1, p, t]);
            }
            Ok(())
        })
        .collect();
    if let Some(Err((i, j, reason))) = rows.into_iter().find(|r| r.is_err()) {
        return Err(IcapError::Inadmissible { i, j, reason: reason.into() });
    }
    let unpack = |c: usize| {
        let mut f = CellField::zeros(grid);
        f.as_mut_slice().iter_mut().enumerate().for_each(|(idx, v)| *v = buf[idx * k + c]);
        f
    };
    Ok(PrimitiveFields {
        z: (0..n).map(unpack).collect(),
        ux: unpack(n),
        uy: unpack(n + 1),
        p: unpack(n + 2),
        t: unpack(n + 3),
    })
}

/// Limited reconstructions of all mass fractions with the compatibility
/// projection applied cell by cell.
pub fn compatible_fraction_reconstructions(z: &[CellField], cfg: &MlpConfig) -> Vec<MlpReconstruction> {
    let mut recs: Vec<MlpReconstruction> = z
        .iter()
        .map(|zl| {
            let mut gradient = predict_gradient(zl);
            gradient.suppress_below(GRADIENT_FLOOR);
            let phi = limit_gradient(zl, &gradient, cfg);
            MlpReconstruction { base: zl.clone(), gradient, phi }
        })
        .collect();
    let grid = *z[0].grid();
    let n = z.len();
    let stride = grid.stride();
    let phis: Vec<Vec<f64>> = (-1..=grid.ny as isize)
        .into_par_iter()
        .map(|j| {
            let mut row = vec![0.0; n * stride];
            let (mut hat, mut grads) = (vec![0.0; n], vec![(0.0, 0.0); n]);
            for i in -1..=grid.nx as isize {
                for l in 0..n {
                    hat[l] = recs[l].phi.get(i, j);
                    grads[l] = recs[l].gradient.get(i, j);
                }
                let phi = compat_project(&hat, &grads);
                let col = (i + GHOST as isize) as usize;
                row[col * n..(col + 1) * n].copy_from_slice(&phi);
            }
            row
        })
        .collect();
    for (r, j) in phis.iter().zip(-1..=grid.ny as isize) {
        for i in -1..=grid.nx as isize {
            let col = (i + GHOST as isize) as usize;
            for (l, rec) in recs.iter_mut().enumerate() {
                rec.phi.set(i, j, r[col * n + l]);
            }
        }
    }
    recs
}

/// Remap rate of `s` (ghosts filled) for the half-face velocity means `v`.
///
/// Per donor sub-square: mass fractions from the compatible MLP
/// reconstruction, edge density `ρ_A = 1/Σ z_lA τ_l`, mass flux
/// `Φ = ρ_A v`, species fluxes `z_lA Φ`, momentum `u_A Φ` and energy
/// `(Σ z_lA e_l + ½|u_A|²) Φ`.
pub fn remap_rate(
    s: &MultiMatState,
    v: &FaceVelocity,
    eos: &PerfectGasEos,
    cfg: &RemapConfig,
    out: &mut MultiMatState,
) -> Result<()> {
    let grid = *s.grid();
    let n = s.fluids();
    if n != eos.fluids() || out.fluids() != n {
        return Err(IcapError::Config(format!("state has {n} fluids, closure has {}", eos.fluids())));
    }
    let prim = primitive_fields(s, eos)?;
    let finish = |r: MlpReconstruction| if cfg.first_order { r.with_zero_phi() } else { r };
    let z: Vec<MlpReconstruction> =
        compatible_fraction_reconstructions(&prim.z, &cfg.mlp).into_iter().map(finish).collect();
    let smooth = MlpConfig::second_order();
    let ux = finish(MlpReconstruction::build(&prim.ux, &smooth));
    let uy = finish(MlpReconstruction::build(&prim.uy, &smooth));
    let thermo = cfg.second_order_thermo.then(|| {
        (finish(MlpReconstruction::build(&prim.p, &smooth)), finish(MlpReconstruction::build(&prim.t, &smooth)))
    });

    let k = n + 3;
    let fluxes = HalfFaceFluxes::compute_many(&grid, v, k, |i, j, sx, sy, vh, f| {
        let (p, t) = match &thermo {
            Some((p, t)) => (p.sub(i, j, sx, sy), t.sub(i, j, sx, sy)),
            None => (prim.p.get(i, j), prim.t.get(i, j)),
        };
        let mut spec_vol = 0.0;
        let mut internal = 0.0;
        for (l, rec) in z.iter().enumerate() {
            let zl = rec.sub(i, j, sx, sy);
            f[l] = zl;
            spec_vol += zl / eos.density(l, p, t);
            internal += zl * eos.internal_energy(l, t);
        }
        let mass_flux = vh / spec_vol;
        let u = (ux.sub(i, j, sx, sy), uy.sub(i, j, sx, sy));
        for fl in f[..n].iter_mut() {
            *fl *= mass_flux;
        }
        f[n] = u.0 * mass_flux;
        f[n + 1] = u.1 * mass_flux;
        f[n + 2] = (internal + 0.5 * (u.0 * u.0 + u.1 * u.1)) * mass_flux;
    });
    for (flux, field) in fluxes.iter().zip(out.fields_mut()) {
        flux.write_rate(grid.h, field);
    }
    Ok(())
}

/// Largest `Δt |Φ_A| / (h ρ_K)` over every half-face and both neighbouring
/// cells, using donor-cell edge densities. Ghosts of `s` must be filled.
pub fn remap_cfl_ratio(s: &MultiMatState, v: &FaceVelocity, dt: f64) -> f64 {
    let grid = *s.grid();
    let rho = s.density();
    let h = grid.h;
    let ratio = |ia: isize, ja: isize, ib: isize, jb: isize, vh: f64| {
        let donor = if vh >= 0.0 { rho.get(ia, ja) } else { rho.get(ib, jb) };
        let flux = (donor * vh).abs();
        (dt * flux / (h * rho.get(ia, ja))).max(dt * flux / (h * rho.get(ib, jb)))
    };
    let mut worst = 0.0_f64;
    for j in 0..grid.ny {
        for i in 0..=grid.nx {
            for half in 0..2 {
                let r = ratio(i as isize - 1, j as isize, i as isize, j as isize, v.x_half(i, j, half));
                worst = worst.max(r);
            }
        }
    }
    for j in 0..=grid.ny {
        for i in 0..grid.nx {
            for half in 0..2 {
                let r = ratio(i as isize, j as isize - 1, i as isize, j as isize, v.y_half(i, j, half));
                worst = worst.max(r);
            }
        }
    }
    worst
}

/// `Δt |A|/|K| |Φ_A| / ρ_K <= 1` on every face of every cell.
pub fn remap_cfl_check(s: &MultiMatState, v: &FaceVelocity, dt: f64) -> bool {
    remap_cfl_ratio(s, v, dt) <= 1.0
}

/// Remap of a multimaterial state in a prescribed velocity field.
pub struct Remap {
    pub bc: BoundarySpec,
    pub velocity: FaceVelocity,
    pub eos: PerfectGasEos,
    pub cfg: RemapConfig,
}

impl Remap {
    pub fn new(bc: BoundarySpec, velocity: FaceVelocity, eos: PerfectGasEos, cfg: RemapConfig) -> Result<Self> {
        bc.validate()?;
        let sides = [&bc.left, &bc.right, &bc.bottom, &bc.top];
        if sides.iter().any(|s| matches!(s, SideBc::InflowExact(_))) {
            return Err(IcapError::Config("multimaterial remap supports periodic and zero-gradient sides only".into()));
        }
        Ok(Self { bc, velocity, eos, cfg })
    }
}

impl RateOperator<MultiMatState> for Remap {
    fn rate(&self, state: &mut MultiMatState, t: f64, out: &mut MultiMatState) -> Result<()> {
        state.fill_ghosts(&self.bc, t)?;
        remap_rate(state, &self.velocity, &self.eos, &self.cfg, out)
    }
}
