//! Named interface-transport benchmarks: grid, flow, initial data, boundary
//! conditions, scheme, Courant number and final time bound together.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::diagnostics::{error_norms, smearing_of, DiagnosticSeries, ErrorNorms};
use crate::error::{IcapError, Result};
use crate::flowfields::{face_means, kothe_rider_field, FaceVelocity, FlowField};
use crate::grid::{
    fill_ghosts, project_half_plane, project_indicator, BoundarySpec, CellField, Grid2D, ReferenceFn, SideBc,
};
use crate::integrate::{advance, dt_from_cfl, AdvanceSummary, Integrator, RateOperator, TimeControl};
use crate::limiters1d::{muscl_rate, Limiter1D};
use crate::mlp::{mlp_rate, MlpConfig};

/// Default midpoint subsampling for indicator projection.
pub const DEFAULT_SUBSAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseName {
    Tophat1d,
    DiagDisk,
    RotationDisk,
    ObliqueSteady,
    Zalesak,
    KotheRider,
}

impl CaseName {
    pub const ALL: [CaseName; 6] = [
        CaseName::Tophat1d,
        CaseName::DiagDisk,
        CaseName::RotationDisk,
        CaseName::ObliqueSteady,
        CaseName::Zalesak,
        CaseName::KotheRider,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseName::Tophat1d => "tophat1d",
            CaseName::DiagDisk => "diag_disk",
            CaseName::RotationDisk => "rotation_disk",
            CaseName::ObliqueSteady => "oblique_steady",
            CaseName::Zalesak => "zalesak",
            CaseName::KotheRider => "kothe_rider",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            CaseName::Tophat1d => "1D periodic top hat, u = 1, overbee MUSCL + Euler",
            CaseName::DiagDisk => "disk x²+y² < 0.2 in u = (1,1) on periodic [-1,1]², t = 10",
            CaseName::RotationDisk => "disk (x-1/2)²+y² < 0.15 in u = (-y,x) on [-1,1]², one revolution",
            CaseName::ObliqueSteady => "steady interface y <= x/2 aligned with u = (2,1) on (0,1)²",
            CaseName::Zalesak => "slotted disk in rigid rotation about (1/2,1/2), one revolution",
            CaseName::KotheRider => "single-vortex forward/backward deformation of a disk, T = 12",
        }
    }

    /// Defaults of the interface-capturing configuration.
    pub fn defaults(self) -> CaseSetup {
        let mlp = Scheme::Mlp(MlpConfig::compressive());
        let (scheme, integrator, cfl, n, t_end) = match self {
            CaseName::Tophat1d => (Scheme::Muscl(Limiter1D::Overbee), Integrator::Euler, 0.35, 250, 1.25),
            CaseName::DiagDisk => (mlp, Integrator::Rk2, 0.3, 256, 10.0),
            CaseName::RotationDisk => (mlp, Integrator::Rk2, 0.3, 512, 2.0 * PI),
            CaseName::ObliqueSteady => (mlp, Integrator::Rk2, 0.25, 200, 2.0),
            CaseName::Zalesak => (mlp, Integrator::Rk2, 0.3, 512, 2.0 * PI),
            CaseName::KotheRider => (mlp, Integrator::Rk2, 0.3, 300, KOTHE_RIDER_PERIOD),
        };
        CaseSetup { case: self, scheme, integrator, cfl, n, t_end, subsamples: DEFAULT_SUBSAMPLES }
    }

    /// The direction-by-direction configuration that exhibits the artefact
    /// this case was designed to show, if any.
    pub fn artefact_setup(self) -> Option<CaseSetup> {
        let base = self.defaults();
        let (scheme, integrator) = match self {
            CaseName::DiagDisk => (Scheme::Muscl(Limiter1D::Superbee), Integrator::Rk2),
            CaseName::RotationDisk => (Scheme::Muscl(Limiter1D::Superbee), Integrator::Euler),
            CaseName::ObliqueSteady => (Scheme::Muscl(Limiter1D::Overbee), Integrator::Euler),
            _ => return None,
        };
        Some(CaseSetup { scheme, integrator, ..base })
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseName {
    type Err = IcapError;

    fn from_str(s: &str) -> Result<Self> {
        CaseName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| IcapError::UnknownCase(s.to_string()))
    }
}

/// Alternative Courant number for the diagonal disk (the default is 0.3).
pub const DIAG_DISK_ALT_CFL: f64 = 0.2;

pub const KOTHE_RIDER_PERIOD: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Muscl(Limiter1D),
    Mlp(MlpConfig),
}

impl Scheme {
    /// Parses `muscl:superbee`, `muscl:overbee`, `muscl:unlimited`,
    /// `muscl:zero` or `mlp`.
    pub fn parse(s: &str, beta: f64) -> Result<Self> {
        match s {
            "mlp" => Ok(Scheme::Mlp(MlpConfig::new(beta)?)),
            "muscl:superbee" => Ok(Scheme::Muscl(Limiter1D::Superbee)),
            "muscl:overbee" => Ok(Scheme::Muscl(Limiter1D::Overbee)),
            "muscl:unlimited" => Ok(Scheme::Muscl(Limiter1D::Unlimited)),
            "muscl:zero" => Ok(Scheme::Muscl(Limiter1D::Zero)),
            other => Err(IcapError::Config(format!("unknown scheme '{other}'"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Scheme::Muscl(l) => format!("muscl:{}", l.name()),
            Scheme::Mlp(c) => format!("mlp(beta={})", c.beta),
        }
    }
}

/// Resolved parameters of one benchmark run.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseSetup {
    pub case: CaseName,
    pub scheme: Scheme,
    pub integrator: Integrator,
    pub cfl: f64,
    /// Cells per axis (the 1D top hat uses it for `nx` only).
    pub n: usize,
    pub t_end: f64,
    pub subsamples: usize,
}

/// Semi-discrete scalar advection `dz/dt = -div_h(u z)` with ghost refresh.
pub struct ScalarAdvection {
    pub bc: BoundarySpec,
    pub flow: FlowField,
    pub scheme: Scheme,
    base_velocity: FaceVelocity,
}

impl ScalarAdvection {
    pub fn new(grid: &Grid2D, bc: BoundarySpec, flow: FlowField, scheme: Scheme) -> Self {
        let base_velocity = face_means(&flow, grid, 0.0);
        Self { bc, flow, scheme, base_velocity }
    }

    /// Face velocities at `t`.
    pub fn velocity_at(&self, t: f64) -> std::borrow::Cow<'_, FaceVelocity> {
        use std::borrow::Cow;
        match &self.flow {
            f if f.is_steady() => Cow::Borrowed(&self.base_velocity),
            FlowField::KotheRider { period } => {
                Cow::Owned(self.base_velocity.scaled((PI * t / period).cos(), t))
            }
            f => Cow::Owned(face_means(f, self.base_velocity.grid(), t)),
        }
    }

    pub fn initial_velocity(&self) -> &FaceVelocity {
        &self.base_velocity
    }
}

impl RateOperator<CellField> for ScalarAdvection {
    fn rate(&self, state: &mut CellField, t: f64, out: &mut CellField) -> Result<()> {
        fill_ghosts(state, &self.bc, t)?;
        let v = self.velocity_at(t);
        match &self.scheme {
            Scheme::Muscl(l) => muscl_rate(state, &v, *l, out),
            Scheme::Mlp(cfg) => mlp_rate(state, &v, cfg, out),
        }
        Ok(())
    }
}

type Region = Arc<dyn Fn(f64, f64, f64) -> bool + Send + Sync>;

/// An assembled, runnable benchmark.
pub struct Problem {
    pub setup: CaseSetup,
    pub grid: Grid2D,
    pub initial: CellField,
    pub operator: ScalarAdvection,
    pub time: TimeControl,
    pub dt: f64,
    /// Exact solution at `t_end`, projected on the grid, when one is known.
    pub reference: Option<CellField>,
    one_dimensional: bool,
    region: Region,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub field: CellField,
    pub summary: AdvanceSummary,
    pub series: DiagnosticSeries,
    pub snapshots: Vec<(f64, CellField)>,
    pub errors: Option<ErrorNorms>,
}

fn wrap(v: f64, lo: f64, len: f64) -> f64 {
    lo + (v - lo).rem_euclid(len)
}

fn rotate(x: f64, y: f64, cx: f64, cy: f64, angle: f64) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    let (dx, dy) = (x - cx, y - cy);
    (cx + c * dx - s * dy, cy + s * dx + c * dy)
}

/// Slotted disk: center `(1/2, 7/10)`, radius 1/5, slot width 1/10 and depth 3/10.
pub fn in_slotted_disk(x: f64, y: f64) -> bool {
    let (dx, dy) = (x - 0.5, y - 0.7);
    let in_disk = dx * dx + dy * dy < 0.04;
    let in_slot = dx.abs() < 0.05 && y < 0.5 + 0.3;
    in_disk && !in_slot
}

pub fn build(setup: &CaseSetup) -> Result<Problem> {
    if setup.subsamples == 0 {
        return Err(IcapError::Config("subsamples must be at least 1".into()));
    }
    let case = setup.case;
    let n = setup.n;
    let mut one_dimensional = false;
    let (grid, bc, flow, region): (Grid2D, BoundarySpec, FlowField, Region) = match case {
        CaseName::Tophat1d => {
            let h = 1.0 / n as f64;
            one_dimensional = true;
            (
                Grid2D::new(n, 3, h, 0.0, 0.0)?,
                BoundarySpec::periodic(),
                FlowField::Uniform { a: 1.0, b: 0.0 },
                Arc::new(|x, _, t| {
                    let xs = wrap(x - t, 0.0, 1.0);
                    (0.0..=0.5).contains(&xs)
                }),
            )
        }
        CaseName::DiagDisk => (
            Grid2D::square(n, -1.0, 1.0)?,
            BoundarySpec::periodic(),
            FlowField::Uniform { a: 1.0, b: 1.0 },
            Arc::new(|x, y, t| {
                let (xs, ys) = (wrap(x - t, -1.0, 2.0), wrap(y - t, -1.0, 2.0));
                xs * xs + ys * ys < 0.2
            }),
        ),
        CaseName::RotationDisk => (
            Grid2D::square(n, -1.0, 1.0)?,
            BoundarySpec::periodic(),
            FlowField::Rotation { cx: 0.0, cy: 0.0 },
            Arc::new(|x, y, t| {
                let (xs, ys) = rotate(x, y, 0.0, 0.0, -t);
                (xs - 0.5) * (xs - 0.5) + ys * ys < 0.15
            }),
        ),
        CaseName::ObliqueSteady => {
            let indicator: ReferenceFn = Arc::new(|x, y, _| if y <= 0.5 * x { 1.0 } else { 0.0 });
            (
                Grid2D::square(n, 0.0, 1.0)?,
                BoundarySpec {
                    left: SideBc::InflowExact(indicator.clone()),
                    right: SideBc::ZeroGradient,
                    bottom: SideBc::InflowExact(indicator),
                    top: SideBc::ZeroGradient,
                },
                FlowField::Uniform { a: 2.0, b: 1.0 },
                Arc::new(|x, y, _| y <= 0.5 * x),
            )
        }
        CaseName::Zalesak => (
            Grid2D::square(n, 0.0, 1.0)?,
            BoundarySpec::zero_gradient(),
            FlowField::Zalesak,
            Arc::new(|x, y, t| {
                let (xs, ys) = rotate(x, y, 0.5, 0.5, -t);
                in_slotted_disk(xs, ys)
            }),
        ),
        CaseName::KotheRider => (
            Grid2D::square(n, 0.0, 1.0)?,
            BoundarySpec::zero_gradient(),
            kothe_rider_field(KOTHE_RIDER_PERIOD)?,
            Arc::new(|x, y, _| {
                let (dx, dy) = (x - 0.5, y - 0.75);
                dx * dx + dy * dy < 0.15 * 0.15
            }),
        ),
    };

    let time = TimeControl::new(setup.cfl, setup.t_end, setup.integrator)?;
    let operator = ScalarAdvection::new(&grid, bc, flow, setup.scheme);
    // the vortex speed peaks at t = 0, so this step is valid for the whole run
    let dt = dt_from_cfl(operator.initial_velocity(), setup.cfl)?;

    let project_at = |t: f64| -> Result<CellField> {
        match case {
            CaseName::ObliqueSteady => Ok(project_half_plane(&grid, -0.5, 1.0, 0.0)),
            _ => {
                let r = region.clone();
                project_indicator(&grid, move |x, y| r(x, y, t), setup.subsamples)
            }
        }
    };
    let initial = project_at(0.0)?;
    let reference = match case {
        CaseName::KotheRider => {
            let periods = setup.t_end / KOTHE_RIDER_PERIOD;
            (periods.fract() == 0.0).then(|| initial.clone())
        }
        _ => Some(project_at(setup.t_end)?),
    };

    Ok(Problem { setup: setup.clone(), grid, initial, operator, time, dt, reference, one_dimensional, region })
}

impl Problem {
    pub fn is_one_dimensional(&self) -> bool {
        self.one_dimensional
    }

    /// Smearing `∫ z(1-z)`; the 1D top hat integrates along its first row.
    pub fn smearing(&self, z: &CellField) -> f64 {
        if self.one_dimensional {
            smearing_of(z.row(0).iter().copied(), self.grid.h)
        } else {
            crate::diagnostics::smearing(z)
        }
    }

    /// Mass `∫ z`, per unit transverse length in 1D.
    pub fn mass(&self, z: &CellField) -> f64 {
        if self.one_dimensional {
            z.row(0).iter().sum::<f64>() * self.grid.h
        } else {
            z.mass()
        }
    }

    /// Exact indicator at `(x, y, t)` for rigid motions and the steady case.
    pub fn exact_indicator(&self, x: f64, y: f64, t: f64) -> bool {
        (self.region)(x, y, t)
    }

    /// Integrates `state` to `t_end`, calling `on_step(t, state, is_snapshot)`.
    pub fn run_with(
        &self,
        state: &mut CellField,
        snapshots: &[f64],
        on_step: impl FnMut(f64, &CellField, bool),
    ) -> Result<AdvanceSummary> {
        advance(state, 0.0, &self.operator, &self.time, self.dt, snapshots, on_step)
    }

    /// Runs from the initial data, recording diagnostics after every step.
    pub fn run(&self, snapshots: &[f64]) -> Result<RunOutcome> {
        let mut state = self.initial.clone();
        let mut series = DiagnosticSeries::new();
        let mut snaps = Vec::new();
        let summary = self.run_with(&mut state, snapshots, |t, z, snap| {
            let (lo, hi) = if self.one_dimensional {
                z.row(0).iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
            } else {
                z.interior_min_max()
            };
            series.push(t, self.smearing(z), lo, hi, self.mass(z));
            if snap {
                snaps.push((t, z.clone()));
            }
        })?;
        let errors = match &self.reference {
            Some(r) => Some(error_norms(&state, r)?),
            None => None,
        };
        Ok(RunOutcome { field: state, summary, series, snapshots: snaps, errors })
    }
}
