//! Fast invariant checks behind `rsm selftest`.

use std::path::Path;

use crate::ed::{
    build_hamiltonian, converge_cutoff, photon_parity, relative_commutator, solve_at, z4_parity, CutoffPolicy,
};
use crate::error::Result;
use crate::model::{critical_coupling, ModelParams};
use crate::observables::{wavefunction_from_fock, GridSpec, SpinBasis};
use crate::polaron::qfi_decompose;
use crate::ptps::{preparation_time, GapCurve};
use crate::qfi::qfi_ed;
use crate::sweep::{parse_table, Axis, Spacing, SweepKind, SweepSpec};
use crate::wigner::{wigner_transform, Component};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Runs every check; takes well under a second on a release build.
pub fn run() -> Vec<Check> {
    let policy = CutoffPolicy::default();
    vec![
        check("decoupled gap equals min(omega, Omega)", || {
            let p = ModelParams::new(1.0, 0.6, 0.0, 1.0, 0.0)?;
            let gap = converge_cutoff(&p, &policy)?.gap;
            Ok(((gap - 0.6).abs() < 1e-9, format!("gap = {gap}")))
        }),
        check("Z4 and photon-parity symmetries", || {
            let h0 = build_hamiltonian(&ModelParams::new(1.0, 0.7, 0.13, 0.0, 0.3)?, 40)?;
            let h1 = build_hamiltonian(&ModelParams::new(1.0, 0.7, 0.13, 1.0, -0.5)?, 40)?;
            let a = relative_commutator(&h0, &z4_parity(40));
            let b = relative_commutator(&h1, &photon_parity(40));
            Ok((a < 1e-12 && b < 1e-12, format!("[H,P4] = {a:e}, [H,Px] = {b:e}")))
        }),
        check("critical coupling sqrt(1 - chi^2)", || {
            let g = critical_coupling(0.6)?;
            Ok(((g - 0.8).abs() < 1e-15, format!("gbar2c(0.6) = {g}")))
        }),
        check("E0 non-increasing under cutoff doubling", || {
            let p = ModelParams::from_reduced(1.0, 1.0, 0.5, 1.0, 0.4)?;
            let e: Vec<f64> = [16, 32, 64]
                .iter()
                .map(|&n| solve_at(&p, n).map(|s| s.e0))
                .collect::<Result<_>>()?;
            Ok((e[1] <= e[0] + 1e-12 && e[2] <= e[1] + 1e-12, format!("{e:?}")))
        }),
        check("QFI stable under step halving", || {
            let p = ModelParams::from_reduced(1.0, 1.0, 0.4, 1.0, 0.3)?;
            let a = qfi_ed(&p, Some(2e-5), &policy)?.f_q;
            let b = qfi_ed(&p, Some(1e-5), &policy)?.f_q;
            let rel = ((a - b) / b).abs();
            Ok((rel < 1e-3, format!("relative change {rel:e}")))
        }),
        check("polaron decomposition closes", || {
            let p = ModelParams::from_reduced(1.0, 1.1, 0.45, 1.0, 0.6)?;
            let d = qfi_decompose(&p, None, None)?;
            let e = d.closure_error();
            Ok((e < 1e-8, format!("closure error {e:e}")))
        }),
        check("Wigner marginal of |1>", || {
            let wf = wavefunction_from_fock(
                &[0.0, 1.0],
                &[0.0, 0.0],
                GridSpec {
                    x_max: 7.0,
                    n_points: 141,
                },
                SpinBasis::Unrotated,
            )?;
            let g = wigner_transform(&wf, 7.0, 141)?;
            let err = g
                .x_marginal(Component::Plus)
                .iter()
                .zip(&wf.psi_plus)
                .map(|(m, psi)| (m - psi * psi).abs())
                .fold(0.0, f64::max);
            Ok((err < 1e-4, format!("max marginal error {err:e}")))
        }),
        check("preparation time of a constant gap", || {
            let c = GapCurve::from_fn(0.6, 128, |_| 0.5)?;
            let t = preparation_time(&c)?;
            Ok(((t - 1.6).abs() < 1e-9, format!("T = {t}")))
        }),
        check("CSV round trip", || {
            let spec = SweepSpec::new(SweepKind::PhaseDiagram)
                .with_axis1(Axis::new("chi", -1.0, 1.0, 3, Spacing::Linear))
                .with_axis2(Axis::new("gbar2", 0.0, 1.0, 3, Spacing::Linear));
            let out = crate::sweep::run_sweep(&spec)?;
            let back = parse_table(&out.main.to_csv(), Path::new("selftest.csv"))?;
            let same = back.rows.len() == out.main.rows.len()
                && back
                    .rows
                    .iter()
                    .flatten()
                    .zip(out.main.rows.iter().flatten())
                    .all(|(a, b)| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
            Ok((same, format!("{} rows", back.rows.len())))
        }),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn selftest_passes() {
        for c in super::run() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
