use std::f64::consts::PI;

use icap_core::cases::{ScalarAdvection, Scheme};
use icap_core::diagnostics::{error_norms, fit_order};
use icap_core::flowfields::{face_means, FlowField};
use icap_core::grid::{fill_ghosts, project_half_plane, project_indicator, BoundarySpec, CellField, Grid2D};
use icap_core::integrate::{advance, Integrator, TimeControl};
use icap_core::mlp::{mlp_rate, MlpConfig};
use proptest::prelude::*;

fn field_from(grid: Grid2D, values: &[f64]) -> CellField {
    let mut z = CellField::zeros(grid);
    let n = grid.nx as isize;
    for (k, &v) in values.iter().enumerate() {
        z.set(k as isize % n, k as isize / n, v);
    }
    z
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn periodic_ghosts_copy_the_opposite_side(values in prop::collection::vec(-2.0f64..2.0, 64)) {
        let grid = Grid2D::square(8, 0.0, 1.0).unwrap();
        let mut z = field_from(grid, &values);
        let before = z.interior_sum();
        fill_ghosts(&mut z, &BoundarySpec::periodic(), 0.0).unwrap();
        prop_assert_eq!(z.interior_sum(), before);
        let g = grid.ghost() as isize;
        for j in -g..8 + g {
            for i in -g..8 + g {
                prop_assert_eq!(z.get(i, j), z.get(i.rem_euclid(8), j.rem_euclid(8)));
            }
        }
    }

    #[test]
    fn projections_are_fractions(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, r2 in 0.0f64..0.5) {
        let grid = Grid2D::square(12, -1.0, 1.0).unwrap();
        let half = project_half_plane(&grid, a, b, c);
        let disk = project_indicator(&grid, |x, y| x * x + y * y < r2, 3).unwrap();
        for z in [half, disk] {
            let (lo, hi) = z.interior_min_max();
            prop_assert!(lo >= 0.0 && hi <= 1.0);
        }
    }

    #[test]
    fn mlp_rate_conserves_on_periodic_grids(
        values in prop::collection::vec(0.0f64..1.0, 100),
        beta in 1.0f64..=2.0,
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let grid = Grid2D::square(10, 0.0, 1.0).unwrap();
        let mut z = field_from(grid, &values);
        fill_ghosts(&mut z, &BoundarySpec::periodic(), 0.0).unwrap();
        let v = face_means(&FlowField::Uniform { a, b }, &grid, 0.0);
        let mut rate = CellField::zeros(grid);
        mlp_rate(&z, &v, &MlpConfig::new(beta).unwrap(), &mut rate);
        prop_assert!(rate.interior_sum().abs() < 1e-12);
    }
}

/// Exact cell averages of `½ + ¼ sin(2πx) sin(2πy)` shifted by `(s, s)`.
fn sine_averages(grid: Grid2D, s: f64) -> CellField {
    let mut z = CellField::zeros(grid);
    let k = 2.0 * PI;
    let avg = |x0: f64| ((k * (x0 - s)).cos() - (k * (x0 + grid.h - s)).cos()) / (k * grid.h);
    for j in 0..grid.ny as isize {
        for i in 0..grid.nx as isize {
            let (x0, y0) = grid.node(i, j);
            z.set(i, j, 0.5 + 0.25 * avg(x0) * avg(y0));
        }
    }
    z
}

fn smooth_l1_slope(beta: f64) -> f64 {
    let t_end = 0.25;
    let pairs: Vec<(f64, f64)> = [32, 64, 128]
        .iter()
        .map(|&n| {
            let grid = Grid2D::square(n, 0.0, 1.0).unwrap();
            let mut z = sine_averages(grid, 0.0);
            let flow = FlowField::Uniform { a: 1.0, b: 1.0 };
            let scheme = Scheme::Mlp(MlpConfig::new(beta).unwrap());
            let op = ScalarAdvection::new(&grid, BoundarySpec::periodic(), flow, scheme);
            let tc = TimeControl::new(0.3, t_end, Integrator::Rk2).unwrap();
            advance(&mut z, 0.0, &op, &tc, 0.3 * grid.h, &[], |_, _, _| {}).unwrap();
            (grid.h, error_norms(&z, &sine_averages(grid, t_end)).unwrap().l1)
        })
        .collect();
    fit_order(&pairs).unwrap().slope().unwrap()
}

// β = 1 is first order on smooth data, β = 2 nearly second
#[test]
fn smooth_data_orders() {
    let s1 = smooth_l1_slope(1.0);
    let s2 = smooth_l1_slope(2.0);
    println!("smooth L1 slopes: beta=1 {s1:.3}, beta=2 {s2:.3}");
    assert!(s2 >= 1.6, "beta=2 slope {s2}");
    assert!((0.8..=1.3).contains(&s1), "beta=1 slope {s1}");
    assert!(s2 > s1 + 0.4);
}
