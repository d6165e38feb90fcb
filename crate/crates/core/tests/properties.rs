use std::path::Path;

use proptest::prelude::*;
use rsm_core::ed::{build_hamiltonian, photon_parity, relative_commutator, solve_at, z4_parity};
use rsm_core::observables::{wavefunction_from_fock, GridSpec, SpinBasis};
use rsm_core::qfi::qfi_from_pair;
use rsm_core::sweep::{parse_table, Axis, Spacing, SweepKind, SweepSpec};
use rsm_core::wigner::{wigner_transform, Component};
use rsm_core::{critical_coupling, rotated_frame, ModelParams};

/// A point strictly inside the disk, away from the origin.
fn stable_point() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.01f64..0.98, -0.98f64..0.98, 0.0f64..=1.0, 0.1f64..2.0)
        .prop_filter("inside the disk", |(g, chi, _, _)| g * g + chi * chi < 0.97)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotated_frame_is_positive_inside_disk((g, chi, chi_z, split) in stable_point()) {
        let p = ModelParams::from_reduced(1.0, split, g, chi_z, chi).unwrap();
        let f = rotated_frame(&p).unwrap();
        prop_assert!((f.cos_theta.powi(2) + f.sin_theta.powi(2) - 1.0).abs() < 1e-14);
        prop_assert!(f.m_tilde_plus > 0.0 && f.m_tilde_minus > 0.0);
        prop_assert!(f.varpi_tilde_sq_plus > 0.0 && f.varpi_tilde_sq_minus > 0.0);
        prop_assert!(f.varpi_tilde_sq_minus <= f.varpi_tilde_sq_plus);
    }

    #[test]
    fn critical_coupling_falls_with_chi(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(critical_coupling(hi).unwrap() <= critical_coupling(lo).unwrap());
        prop_assert_eq!(critical_coupling(-a).unwrap(), critical_coupling(a).unwrap());
    }

    #[test]
    fn symmetries_hold_at_random_draws(g in 0.0f64..0.3, chi in -0.9f64..0.9, split in 0.0f64..2.0) {
        let z4 = build_hamiltonian(&ModelParams::new(1.0, split, g, 0.0, chi).unwrap(), 24).unwrap();
        prop_assert!(relative_commutator(&z4, &z4_parity(24)) < 1e-12);
        let px = build_hamiltonian(&ModelParams::new(1.0, split, g, 1.0, chi).unwrap(), 24).unwrap();
        prop_assert!(relative_commutator(&px, &photon_parity(24)) < 1e-12);
    }

    #[test]
    fn qfi_estimate_ignores_state_sign(v in prop::collection::vec(-1.0f64..1.0, 6), w in prop::collection::vec(-0.01f64..0.01, 6)) {
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(n > 0.1);
        let a: Vec<f64> = v.iter().map(|x| x / n).collect();
        let b: Vec<f64> = a.iter().zip(&w).map(|(x, d)| x + d).collect();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let b: Vec<f64> = b.iter().map(|x| x / nb).collect();
        let flipped: Vec<f64> = b.iter().map(|x| -x).collect();
        let (f1, _) = qfi_from_pair(&a, &b, 1e-3);
        let (f2, _) = qfi_from_pair(&a, &flipped, 1e-3);
        prop_assert!(f1 >= 0.0);
        prop_assert!((f1 - f2).abs() <= 1e-9 * f1.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ground_energy_never_rises_with_cutoff((g, chi, chi_z, split) in stable_point()) {
        let p = ModelParams::from_reduced(1.0, split, g.min(0.8), chi_z, chi * 0.6).unwrap();
        let e: Vec<f64> = [16, 32, 64].iter().map(|&n| solve_at(&p, n).unwrap().e0).collect();
        prop_assert!(e[1] <= e[0] + 1e-10 && e[2] <= e[1] + 1e-10, "{:?}", e);
    }

    #[test]
    fn wigner_is_even_in_p_and_has_right_marginal(c in prop::collection::vec(-1.0f64..1.0, 1..8)) {
        let n: f64 = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(n > 0.1);
        let c: Vec<f64> = c.iter().map(|x| x / n).collect();
        let grid = GridSpec { x_max: 9.0, n_points: 181 };
        let wf = wavefunction_from_fock(&c, &[0.0], grid, SpinBasis::Unrotated).unwrap();
        let g = wigner_transform(&wf, 9.0, 181).unwrap();
        let np = g.p.len();
        for i in 0..g.x.len() {
            for j in 0..np / 2 {
                prop_assert!((g.w_plus[i * np + j] - g.w_plus[i * np + np - 1 - j]).abs() < 1e-13);
            }
        }
        for (m, psi) in g.x_marginal(Component::Plus).iter().zip(&wf.psi_plus) {
            prop_assert!((m - psi * psi).abs() < 1e-4);
        }
    }

    #[test]
    fn tables_round_trip_bitwise(vals in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 9)) {
        let spec = SweepSpec::new(SweepKind::PhaseDiagram)
            .with_axis1(Axis::new("chi", 0.0, 1.0, 2, Spacing::Linear))
            .with_axis2(Axis::new("gbar2", 0.0, 1.0, 2, Spacing::Linear));
        let mut t = rsm_core::sweep::run_sweep(&spec).unwrap().main;
        let width = t.header.len();
        t.rows = vec![vals.iter().copied().cycle().take(width).collect()];
        let back = parse_table(&t.to_csv(), Path::new("p.csv")).unwrap();
        for (a, b) in t.rows[0].iter().zip(&back.rows[0]) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn axis_values_are_ordered(lo in -5.0f64..5.0, span in 0.01f64..5.0, n in 2usize..40) {
        for s in [Spacing::Linear, Spacing::Cosine] {
            let v = Axis::new("gbar2", lo, lo + span, n, s).values();
            prop_assert_eq!(v.len(), n);
            prop_assert_eq!(v[0], lo);
            prop_assert!((v[n - 1] - (lo + span)).abs() < 1e-12);
            prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
