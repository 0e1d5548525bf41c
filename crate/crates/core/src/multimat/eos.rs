//! Perfect-gas closure and primitive recovery in temperature equilibrium.

use crate::error::{IcapError, Result};

/// Mixture of perfect gases `p_l = (γ_l - 1) ρ_l e_l`, `e_l = cv_l T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerfectGasEos {
    pub gamma: Vec<f64>,
    pub cv: Vec<f64>,
}

impl PerfectGasEos {
    pub fn new(gamma: Vec<f64>, cv: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() || gamma.len() != cv.len() {
            return Err(IcapError::Config(format!(
                "need one (gamma, cv) pair per fluid, got {} and {}",
                gamma.len(),
                cv.len()
            )));
        }
        if gamma.iter().any(|&g| !(g > 1.0)) || cv.iter().any(|&c| !(c > 0.0)) {
            return Err(IcapError::Config("gamma must exceed 1 and cv must be positive".into()));
        }
        Ok(Self { gamma, cv })
    }

    pub fn fluids(&self) -> usize {
        self.gamma.len()
    }

    /// `ρ_l(p, T) = p / ((γ_l - 1) cv_l T)`.
    #[inline]
    pub fn density(&self, l: usize, p: f64, t: f64) -> f64 {
        p / ((self.gamma[l] - 1.0) * self.cv[l] * t)
    }

    #[inline]
    pub fn internal_energy(&self, l: usize, t: f64) -> f64 {
        self.cv[l] * t
    }
}

/// Thermodynamic and kinematic state of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Primitives {
    pub rho: f64,
    pub u: (f64, f64),
    pub t: f64,
    pub p: f64,
    pub e: Vec<f64>,
    pub rho_l: Vec<f64>,
    pub alpha: Vec<f64>,
}

/// Tolerance of the `Σα = 1` post-check.
pub const ALPHA_SUM_TOL: f64 = 1e-12;

/// Scalar part of the recovery: returns `(ρ, u, T, p)` and writes the phase
/// densities and volume fractions. `Err` carries the reason.
pub(crate) fn recover_into(
    m: &[f64],
    mom: (f64, f64),
    energy: f64,
    eos: &PerfectGasEos,
    rho_l: &mut [f64],
    alpha: &mut [f64],
) -> std::result::Result<(f64, (f64, f64), f64, f64), &'static str> {
    let rho: f64 = m.iter().sum();
    if !(rho > 0.0) {
        return Err("nonpositive density");
    }
    if m.iter().any(|&v| v < 0.0) {
        return Err("negative partial mass");
    }
    let u = (mom.0 / rho, mom.1 / rho);
    let internal = energy - 0.5 * rho * (u.0 * u.0 + u.1 * u.1);
    if !(internal > 0.0) {
        return Err("nonpositive internal energy");
    }
    let heat: f64 = m.iter().zip(&eos.cv).map(|(m, cv)| m * cv).sum();
    let t = internal / heat;
    let p: f64 = (0..m.len()).map(|l| (eos.gamma[l] - 1.0) * m[l] * eos.cv[l] * t).sum();
    let mut sum = 0.0;
    for l in 0..m.len() {
        rho_l[l] = eos.density(l, p, t);
        alpha[l] = m[l] / rho_l[l];
        sum += alpha[l];
    }
    if (sum - 1.0).abs() > ALPHA_SUM_TOL {
        return Err("volume fractions do not sum to one");
    }
    Ok((rho, u, t, p))
}

/// `ρ = Σm`, `u = ρu/ρ`, `T = (ρE - ½ρ|u|²)/Σ cv_l m_l`, `p = Σ(γ_l-1) m_l cv_l T`,
/// `ρ_l = p/((γ_l-1) cv_l T)`, `α_l = m_l/ρ_l`.
pub fn recover_primitives(m: &[f64], mom: (f64, f64), energy: f64, eos: &PerfectGasEos) -> Result<Primitives> {
    if m.len() != eos.fluids() {
        return Err(IcapError::Config(format!("{} partial masses for {} fluids", m.len(), eos.fluids())));
    }
    let n = m.len();
    let (mut rho_l, mut alpha) = (vec![0.0; n], vec![0.0; n]);
    let (rho, u, t, p) = recover_into(m, mom, energy, eos, &mut rho_l, &mut alpha)
        .map_err(|reason| IcapError::Inadmissible { i: 0, j: 0, reason: reason.into() })?;
    let e = (0..n).map(|l| eos.internal_energy(l, t)).collect();
    Ok(Primitives { rho, u, t, p, e, rho_l, alpha })
}

/// Conserved cell values `(m_l, ρu, ρE)` of volume fractions `alpha` at
/// pressure `p`, temperature `t` and velocity `u`.
pub fn conserved_from(alpha: &[f64], p: f64, t: f64, u: (f64, f64), eos: &PerfectGasEos) -> (Vec<f64>, (f64, f64), f64) {
    let m: Vec<f64> = alpha.iter().enumerate().map(|(l, a)| a * eos.density(l, p, t)).collect();
    let rho: f64 = m.iter().sum();
    let internal: f64 = m.iter().enumerate().map(|(l, m)| m * eos.internal_energy(l, t)).sum();
    let energy = internal + 0.5 * rho * (u.0 * u.0 + u.1 * u.1);
    (m, (rho * u.0, rho * u.1), energy)
}

/// `z_l = α_l ρ_l / Σ α_m ρ_m`.
pub fn z_from_alpha(alpha: &[f64], rho: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = alpha.iter().zip(rho).map(|(a, r)| a * r).sum();
    if !(total > 0.0) {
        return Err(IcapError::Degenerate("zero mixture density".into()));
    }
    Ok(alpha.iter().zip(rho).map(|(a, r)| a * r / total).collect())
}

/// `α_l = z_l τ_l / Σ z_m τ_m`, `τ = 1/ρ`.
pub fn alpha_from_z(z: &[f64], rho: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = z.iter().zip(rho).map(|(z, r)| z / r).sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(IcapError::Degenerate("zero mixture specific volume".into()));
    }
    Ok(z.iter().zip(rho).map(|(z, r)| z / r / total).collect())
}
