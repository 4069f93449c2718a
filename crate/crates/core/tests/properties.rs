//! Property tests for the analytic invariants: identities that must hold on
//! whole input regions, not just at the pinned example points.

use proptest::prelude::*;

use levyrep::certify::{convexity_check, NormSpec, QSet};
use levyrep::funk_hecke::{admissible_q, c_constant, lambda_closed};
use levyrep::harmonics::{dim_harmonics, HarmonicCoefficients};
use levyrep::inversion::{forward, invert, uniform_bound};
use levyrep::specfun::gamma_ln;
use levyrep::sphere::{build_grid, surface_area};

const PI: f64 = std::f64::consts::PI;

/// Exponents q > 0 kept clear of the even integers.
fn admissible_exponent() -> impl Strategy<Value = f64> {
    (0.1f64..5.9).prop_filter("too close to an even integer", |q| {
        let nearest = 2.0 * (q / 2.0).round();
        !(nearest >= 2.0 && (q - nearest).abs() < 0.05)
    })
}

/// Random even band-limited coefficient sets on S^2 with a positive mean,
/// so the represented function is a plausible H.
fn even_coefficients() -> impl Strategy<Value = HarmonicCoefficients<f64>> {
    let entry = -0.3f64..0.3;
    (
        proptest::collection::vec(entry.clone(), 5),
        proptest::collection::vec(entry, 9),
    )
        .prop_map(|(deg2, deg4)| {
            let mut h = HarmonicCoefficients::<f64>::zero(3, 4).unwrap();
            h.set(0, 1, (4.0 * PI).sqrt()).unwrap();
            for (j, v) in deg2.into_iter().enumerate() {
                h.set(2, j + 1, v).unwrap();
            }
            for (j, v) in deg4.into_iter().enumerate() {
                h.set(4, j + 1, v).unwrap();
            }
            h
        })
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 32,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn gamma_recurrence_holds(x in 0.1f64..100.0) {
        let residual = gamma_ln(x + 1.0).unwrap() - gamma_ln(x).unwrap() - x.ln();
        prop_assert!(residual.abs() <= 1e-12);
    }

    #[test]
    fn lambda_zero_inverts_c(q in admissible_exponent(), n in 2usize..=5) {
        let prod = lambda_closed(n, 0, q).unwrap() * c_constant(n, q).unwrap();
        prop_assert!((prod - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn odd_eigenvalues_vanish(q in admissible_exponent(), n in 2usize..=5, k in 0usize..10) {
        prop_assert_eq!(lambda_closed(n, 2 * k + 1, q).unwrap(), 0.0);
    }

    #[test]
    fn inversion_round_trips(h in even_coefficients(), q in admissible_exponent()) {
        let density = invert(&h, q, 5, 4).unwrap();
        let back = forward(&density.coefficients, q).unwrap();
        for (m, j, v) in h.iter() {
            prop_assert!((back.get(m, j) - v).abs() <= 1e-10 * v.abs().max(1.0));
        }
    }

    #[test]
    fn sup_bound_dominates(h in even_coefficients(), q in admissible_exponent()) {
        let grid = build_grid::<f64>(3, 16).unwrap();
        let density = invert(&h, q, 5, 4).unwrap();
        let bound = uniform_bound(&h, q, 5).unwrap();
        let sup = density
            .coefficients
            .evaluate_on_grid(&grid)
            .into_iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        prop_assert!(sup <= bound, "sup {} exceeds bound {}", sup, bound);
    }

    #[test]
    fn truncation_tail_is_monotone(h in even_coefficients(), q in admissible_exponent()) {
        // widen the stored degree without new content: tails of the
        // restricted inversions must decrease with the window.
        let t0 = invert(&h, q, 5, 0).unwrap().truncation_bound;
        let t2 = invert(&h, q, 5, 2).unwrap().truncation_bound;
        let t4 = invert(&h, q, 5, 4).unwrap().truncation_bound;
        prop_assert!(t0 >= t2 && t2 >= t4);
        prop_assert_eq!(t4, 0.0);
    }

    #[test]
    fn grids_carry_surface_measure(n in 2usize..=3, res in 4usize..24) {
        let grid = build_grid::<f64>(n, res).unwrap();
        let mass: f64 = grid.weights().iter().sum();
        let omega = surface_area::<f64>(n).unwrap();
        prop_assert!((mass - omega).abs() <= 1e-10 * omega);
        for i in 0..grid.len() {
            let r: f64 = grid.node(i).iter().map(|c| c * c).sum::<f64>().sqrt();
            prop_assert!((r - 1.0).abs() <= 1e-12);
            prop_assert!(grid.weights()[i] > 0.0);
        }
    }

    #[test]
    fn parseval_on_band_limited(h in even_coefficients()) {
        let grid = build_grid::<f64>(3, 12).unwrap();
        let quad_sq = grid.quadrature(|x| {
            let v = h.evaluate(x);
            v * v
        });
        let coeff_sq: f64 = h.iter().map(|(_, _, v)| v * v).sum();
        prop_assert!((quad_sq - coeff_sq).abs() <= 1e-8 * coeff_sq.max(1.0));
    }

    #[test]
    fn dimension_counts_match_gamma_form(n in 2usize..=6, m in 1usize..=16) {
        let want = ((2 * m + n - 2) as f64
            * (gamma_ln((n + m - 2) as f64).unwrap()
                - gamma_ln((m + 1) as f64).unwrap()
                - gamma_ln((n - 1) as f64).unwrap())
            .exp())
        .round() as usize;
        prop_assert_eq!(dim_harmonics(n, m).unwrap(), want);
    }

    #[test]
    fn euclidean_triangle_inequality_everywhere(seed in 0u64..1000) {
        let report = convexity_check(&NormSpec::<f64>::euclidean(3), 500, seed);
        prop_assert!(report.pass);
    }

    #[test]
    fn qsets_reject_guarded_exponents(k in 1u32..4, eps in -5e-10f64..5e-10) {
        let q = 2.0 * k as f64 + eps;
        prop_assert!(admissible_q(q).is_err());
        prop_assert!(QSet::new(vec![1.0f64, q]).is_err());
    }
}
