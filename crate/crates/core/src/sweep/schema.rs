//! Column layout of every table kind.

use super::SweepKind;

const COMMON: [&str; 4] = ["chi", "gbar2", "g2", "Omega"];

fn with_common(rest: &[&'static str]) -> Vec<&'static str> {
    COMMON.iter().chain(rest).copied().collect()
}

/// Columns of the main table of `kind`.
pub fn columns(kind: SweepKind) -> Vec<&'static str> {
    use SweepKind::*;
    match kind {
        Observables => with_common(&[
            "E0", "E1", "gap", "sx", "sz", "sx_rot", "sz_rot", "x2", "p2", "cutoff", "flag",
        ]),
        Qfi | Qfi3d => with_common(&[
            "distance",
            "F_Q",
            "ln_F_Q",
            "F_Q_rescaled",
            "F_Q_major",
            "F_Q_leading",
            "delta",
            "cutoff",
            "flag",
        ]),
        PolaronDecomposition => with_common(&[
            "F_total",
            "F_rho",
            "F_xi",
            "F_sigma",
            "F_mixed",
            "F_gram",
            "closure_error",
            "F_Q_ED",
            "xi_plus",
            "xi_minus",
            "c_plus",
            "c_minus",
            "E_lower",
            "gap_polaron",
            "gap_floor",
            "flag",
        ]),
        Wavefunction => with_common(&["x", "psi_plus", "psi_minus", "flag"]),
        Wigner => with_common(&["x", "p", "W_plus", "W_minus", "flag"]),
        GapPtps => vec!["chi", "Omega", "gbar2", "gap", "cutoff", "flag"],
        ExponentFit => vec![
            "chi",
            "Omega",
            "distance",
            "gbar2",
            "F_Q",
            "F_Q_rescaled",
            "F_Q_major",
            "flag",
        ],
        PhaseDiagram => with_common(&[
            "stable",
            "radius_sq",
            "m_plus",
            "m_minus",
            "varpi_sq_plus",
            "varpi_sq_minus",
            "Omega_tilde",
            "flag",
        ]),
    }
}

/// Columns of the summary table, for kinds that have one.
pub fn summary_columns(kind: SweepKind) -> Option<Vec<&'static str>> {
    use SweepKind::*;
    match kind {
        Wigner => Some(with_common(&[
            "norm_plus",
            "norm_minus",
            "var_major_plus",
            "var_minor_plus",
            "aspect_plus",
            "var_major_minus",
            "var_minor_minus",
            "aspect_minus",
            "aspect_plus_direct",
            "aspect_minus_direct",
            "flag",
        ])),
        GapPtps => Some(vec![
            "chi",
            "Omega",
            "T",
            "T_coarse",
            "gap_min",
            "boundary_gap",
            "F_Q_crit",
            "ratio",
            "flag",
        ]),
        ExponentFit => Some(vec![
            "chi",
            "Omega",
            "gamma",
            "coefficient",
            "coefficient_scaled",
            "r_squared",
            "n_points",
            "flag",
        ]),
        _ => None,
    }
}

/// Unit of a column, in powers of ω (energies) or "1" for pure numbers.
pub fn unit(column: &str) -> &'static str {
    match column {
        "g2" | "Omega" | "E0" | "E1" | "gap" | "E_lower" | "gap_polaron" | "gap_floor" | "gap_min" | "boundary_gap"
        | "Omega_tilde" | "delta" => "omega",
        "F_Q" | "F_Q_major" | "F_Q_leading" | "F_total" | "F_rho" | "F_xi" | "F_sigma" | "F_mixed" | "F_gram"
        | "F_Q_ED" | "F_Q_crit" | "coefficient" => "1/omega^2",
        "ln_F_Q" => "ln(omega^-2)",
        "T" | "T_coarse" => "1/omega",
        "ratio" => "omega^3",
        "W_plus" | "W_minus" => "1/(x p)",
        _ => "1",
    }
}

/// Meaning of the `flag` column.
pub mod flags {
    pub const OK: f64 = 0.0;
    pub const UNCONVERGED: f64 = 1.0;
    /// Outside the stability disk or otherwise outside the domain of the pipeline.
    pub const UNSTABLE: f64 = 2.0;
    pub const NUMERIC: f64 = 3.0;
    pub const OPTIMIZER_BOUNDARY: f64 = 4.0;
    /// Wavefunction still above 1e-6 of its peak at the grid edge.
    pub const TRUNCATED: f64 = 5.0;

    pub const LEGEND: &str = "0 ok; 1 cutoff unconverged; 2 unstable or out of domain; 3 numeric failure; \
                              4 optimizer at search-box boundary; 5 wavefunction grid truncated";
}
