//! Gradient-compatibility projection of per-fluid limiting factors.
//!
//! Given raw factors `φ̂_l` and predicted gradients `g_l` with `Σ g_l = 0`,
//! finds the factors closest to `φ̂` with `0 <= φ_l <= φ̂_l` and
//! `Σ φ_l g_l = 0`, so the limited mass fractions still sum to one.

/// Largest fluid count solved exactly; above it the common factor is used.
pub const MAX_ENUMERATED_FLUIDS: usize = 8;

/// Relative tolerance on `|Σ φ_l g_l|` for candidate active sets.
const EQ_TOL: f64 = 1e-12;

/// Pseudo-inverse of the symmetric 2x2 matrix `[[a, b], [b, c]]` applied to `r`.
fn pinv_sym2(a: f64, b: f64, c: f64, r: (f64, f64)) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let (hi, lo) = (mean + rad, mean - rad);
    if hi <= 0.0 {
        return (0.0, 0.0);
    }
    if lo > 1e-12 * hi {
        let det = a * c - b * b;
        return ((c * r.0 - b * r.1) / det, (a * r.1 - b * r.0) / det);
    }
    let (v1, v2) = if (hi - a).abs() + b.abs() >= (hi - c).abs() + b.abs() {
        (b, hi - a)
    } else {
        (hi - c, b)
    };
    let norm2 = v1 * v1 + v2 * v2;
    if norm2 == 0.0 {
        // a multiple of the identity
        return (r.0 / hi, r.1 / hi);
    }
    let s = (v1 * r.0 + v2 * r.1) / (norm2 * hi);
    (s * v1, s * v2)
}

/// Equality residual `Σ φ_l g_l`.
pub fn compat_residual(phi: &[f64], grads: &[(f64, f64)]) -> (f64, f64) {
    phi.iter()
        .zip(grads)
        .fold((0.0, 0.0), |(x, y), (p, g)| (x + p * g.0, y + p * g.1))
}

/// Minimises `½ Σ (φ_l - φ̂_l)²` subject to `0 <= φ_l <= φ̂_l` and
/// `Σ φ_l g_l = 0`.
///
/// Every assignment of the variables to {free, at 0, at φ̂} is solved as an
/// equality-constrained problem and the best feasible candidate is kept,
/// which is exact for the small fluid counts met in practice.
pub fn compat_project(phi_hat: &[f64], grads: &[(f64, f64)]) -> Vec<f64> {
    let n = phi_hat.len();
    assert_eq!(n, grads.len(), "one gradient per factor");
    if n == 0 {
        return Vec::new();
    }
    let first = phi_hat[0];
    if phi_hat.iter().all(|&p| p == first) {
        return phi_hat.to_vec();
    }
    let gmax = grads.iter().fold(0.0_f64, |m, g| m.max(g.0.hypot(g.1)));
    if gmax == 0.0 {
        return phi_hat.to_vec();
    }
    let g: Vec<(f64, f64)> = grads.iter().map(|&(x, y)| (x / gmax, y / gmax)).collect();
    let scale = phi_hat.iter().fold(1.0_f64, |m, &p| m.max(p));
    let tol = EQ_TOL * scale;
    let r = compat_residual(phi_hat, &g);
    if r.0.abs() <= tol && r.1.abs() <= tol {
        return phi_hat.to_vec();
    }
    let sum = (g.iter().map(|v| v.0).sum::<f64>(), g.iter().map(|v| v.1).sum::<f64>());
    if n == 2 && sum.0.abs() <= EQ_TOL && sum.1.abs() <= EQ_TOL {
        // (φ1 - φ2) g1 = 0 with g1 != 0
        let c = phi_hat[0].min(phi_hat[1]);
        return vec![c, c];
    }
    if n > MAX_ENUMERATED_FLUIDS {
        let c = phi_hat.iter().copied().fold(f64::INFINITY, f64::min);
        return vec![c; n];
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut phi = vec![0.0; n];
    let mut code = vec![0u8; n];
    let total = 3usize.pow(n as u32);
    'codes: for mut k in 0..total {
        for c in code.iter_mut() {
            *c = (k % 3) as u8;
            k /= 3;
        }
        // free: 0, lower bound: 1, upper bound: 2
        let (mut a, mut b, mut cc) = (0.0, 0.0, 0.0);
        let mut rhs = (0.0, 0.0);
        for l in 0..n {
            match code[l] {
                0 => {
                    if phi_hat[l] == 0.0 {
                        continue 'codes;
                    }
                    a += g[l].0 * g[l].0;
                    b += g[l].0 * g[l].1;
                    cc += g[l].1 * g[l].1;
                    rhs.0 += g[l].0 * phi_hat[l];
                    rhs.1 += g[l].1 * phi_hat[l];
                }
                1 => {}
                _ => {
                    if phi_hat[l] == 0.0 {
                        continue 'codes;
                    }
                    rhs.0 += g[l].0 * phi_hat[l];
                    rhs.1 += g[l].1 * phi_hat[l];
                }
            }
        }
        let w = pinv_sym2(a, b, cc, rhs);
        let mut obj = 0.0;
        for l in 0..n {
            phi[l] = match code[l] {
                0 => phi_hat[l] - (g[l].0 * w.0 + g[l].1 * w.1),
                1 => 0.0,
                _ => phi_hat[l],
            };
            if phi[l] < -tol || phi[l] > phi_hat[l] + tol {
                continue 'codes;
            }
            obj += 0.5 * (phi[l] - phi_hat[l]).powi(2);
        }
        let res = compat_residual(&phi, &g);
        if res.0.abs() > tol || res.1.abs() > tol {
            continue;
        }
        if best.as_ref().is_none_or(|(o, _)| obj < *o) {
            best = Some((obj, phi.clone()));
        }
    }
    // φ = 0 is always a candidate, so `best` is set
    let mut out = best.map(|b| b.1).unwrap_or_else(|| vec![0.0; n]);
    for (p, &hat) in out.iter_mut().zip(phi_hat) {
        *p = p.clamp(0.0, hat);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_fluids_take_the_minimum() {
        let g = [(0.3, -1.2), (-0.3, 1.2)];
        assert_eq!(compat_project(&[1.7, 0.4], &g), vec![0.4, 0.4]);
        assert_eq!(compat_project(&[0.2, 2.0], &g), vec![0.2, 0.2]);
    }

    #[test]
    fn equal_factors_are_kept() {
        let g = [(1.0, 0.0), (0.5, 2.0), (-1.5, -2.0)];
        assert_eq!(compat_project(&[0.7; 3], &g), vec![0.7; 3]);
    }

    #[test]
    fn generic_three_fluid_gradients_force_a_common_factor() {
        let g = [(1.0, 0.0), (0.0, 1.0), (-1.0, -1.0)];
        let phi = compat_project(&[1.0, 0.5, 2.0], &g);
        for p in phi {
            assert!((p - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn collinear_three_fluid_case_by_hand() {
        // g = a d with a = (1, 1, -2): constraint φ1 + φ2 = 2 φ3
        let d = (0.6, 0.8);
        let g = [(d.0, d.1), (d.0, d.1), (-2.0 * d.0, -2.0 * d.1)];
        // projection of (1, 1, 2) onto {φ1 + φ2 - 2φ3 = 0} is (4/3, 4/3, 4/3)
        // which violates φ1 <= 1; with φ1 = φ2 = 1 the best is φ3 = 1
        let phi = compat_project(&[1.0, 1.0, 2.0], &g);
        for (p, e) in phi.iter().zip([1.0, 1.0, 1.0]) {
            assert!((p - e).abs() < 1e-13, "{phi:?}");
        }
        // (2, 0, 0.8): φ2 <= 0 forces φ1 = 2 φ3, closest point (1.6, 0, 0.8)
        let phi = compat_project(&[2.0, 0.0, 0.8], &g);
        for (p, e) in phi.iter().zip([1.6, 0.0, 0.8]) {
            assert!((p - e).abs() < 1e-13, "{phi:?}");
        }
    }

    #[test]
    fn pseudo_inverse_cases() {
        let w = pinv_sym2(2.0, 0.0, 4.0, (2.0, 2.0));
        assert!((w.0 - 1.0).abs() < 1e-15 && (w.1 - 0.5).abs() < 1e-15);
        // rank one: M = v v^T with v = (1, 1)
        let w = pinv_sym2(1.0, 1.0, 1.0, (2.0, 2.0));
        assert!((w.0 - 1.0).abs() < 1e-14 && (w.1 - 1.0).abs() < 1e-14);
        assert_eq!(pinv_sym2(0.0, 0.0, 0.0, (1.0, 1.0)), (0.0, 0.0));
    }

    proptest! {
        #[test]
        fn output_satisfies_constraints(
            hat in prop::collection::vec(0.0f64..2.0, 2..6),
            raw in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 6),
            collinear in any::<bool>(),
        ) {
            let n = hat.len();
            let mut g: Vec<(f64, f64)> = raw[..n - 1].to_vec();
            if collinear {
                g.iter_mut().for_each(|v| v.1 = 0.5 * v.0);
            }
            let sx: f64 = g.iter().map(|v| v.0).sum();
            let sy: f64 = g.iter().map(|v| v.1).sum();
            g.push((-sx, -sy));
            let phi = compat_project(&hat, &g);
            let gmax = g.iter().fold(0.0_f64, |m, v| m.max(v.0.hypot(v.1)));
            for (p, h) in phi.iter().zip(&hat) {
                prop_assert!(*p >= 0.0 && p <= h);
            }
            let r = compat_residual(&phi, &g);
            prop_assert!(r.0.abs() <= 1e-11 * gmax && r.1.abs() <= 1e-11 * gmax, "{:?}", r);
            // never worse than the common factor
            let c = hat.iter().copied().fold(f64::INFINITY, f64::min);
            let obj = |v: &[f64]| v.iter().zip(&hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            prop_assert!(obj(&phi) <= obj(&vec![c; n]) + 1e-12);
        }
    }
}
