//! Per-kind point evaluation and table assembly.

use rayon::prelude::*;

use super::schema::{columns, flags, summary_columns, unit};
use super::table::ResultTable;
use super::{SweepKind, SweepOutput, SweepSpec, DEFAULT_OMEGA_TILDE_C};
use crate::ed::{converge_cutoff, CutoffPolicy, SpectralResult};
use crate::error::{Error, Result};
use crate::model::{critical_coupling, equi_flip_omega, rotated_frame, ModelParams};
use crate::observables::{
    auto_wavefunctions, component_fock, component_wavefunctions, fock_moments, quadrature_moments, spin_expectations,
    ComponentWavefunction, GridSpec, QuadratureMoments,
};
use crate::polaron::{polaron_gap, qfi_decompose};
use crate::ptps::{ptps, FQ_OFFSET};
use crate::qfi::{fit_critical_exponent, qfi_ed, qfi_leading, qfi_major_orders, QfiPoint};
use crate::wigner::{
    default_p_max, squeezing_from_moments, squeezing_metrics, wigner_transform, Component, SqueezingMetrics,
    DEFAULT_P_POINTS,
};

pub(super) const DEFAULT_PTPS_SAMPLES: usize = 64;
pub(super) const DEFAULT_FIT_POINTS: usize = 12;

const NAN: f64 = f64::NAN;

/// One grid point with every parameter resolved.
#[derive(Debug, Clone, Copy)]
struct Point {
    omega: f64,
    chi: f64,
    chi_z: f64,
    /// NaN when Ω could not be derived (|χ| ≥ 1 with an Ω̃_c spec).
    splitting: f64,
    /// NaN for kinds that sweep the coupling themselves.
    gbar2: f64,
}

impl Point {
    fn resolve(spec: &SweepSpec, a1: Option<f64>, a2: Option<f64>) -> Self {
        let get = |name: &str| -> Option<f64> {
            match (&spec.axis1, &spec.axis2) {
                (Some(a), _) if a.name == name => a1,
                (_, Some(a)) if a.name == name => a2,
                _ => spec.fixed.get(name).copied(),
            }
        };
        let omega = get("omega").unwrap_or(1.0);
        let chi = get("chi").unwrap_or(0.0);
        let chi_z = get("chi_z").unwrap_or(1.0);
        let splitting = match get("Omega") {
            Some(s) => s,
            None => {
                let otc = get("omega_tilde_c").unwrap_or(DEFAULT_OMEGA_TILDE_C);
                equi_flip_omega(chi, otc, omega).unwrap_or(NAN)
            }
        };
        let gbar2 = match get("distance") {
            Some(d) => critical_coupling(chi).map_or(NAN, |gc| gc - d),
            None => get("gbar2").unwrap_or(NAN),
        };
        Self {
            omega,
            chi,
            chi_z,
            splitting,
            gbar2,
        }
    }

    fn g2(&self) -> f64 {
        self.gbar2 * self.omega / (2.0 * (1.0 + self.chi_z))
    }

    fn common(&self) -> Vec<f64> {
        vec![self.chi, self.gbar2, self.g2(), self.splitting]
    }

    fn params(&self) -> Result<ModelParams> {
        if !self.splitting.is_finite() {
            return Err(Error::domain("qubit splitting undefined at this point"));
        }
        if !self.gbar2.is_finite() || self.gbar2 < 0.0 {
            return Err(Error::domain(format!(
                "coupling gbar2 = {} is out of range",
                self.gbar2
            )));
        }
        ModelParams::from_reduced(self.omega, self.splitting, self.gbar2, self.chi_z, self.chi)
    }

    /// Template with zero coupling for kinds that sweep it.
    fn template(&self) -> Result<ModelParams> {
        Self { gbar2: 0.0, ..*self }.params()
    }
}

fn flag_for(e: &Error) -> f64 {
    match e {
        Error::Instability { .. } | Error::Domain(_) | Error::DegenerateRotation => flags::UNSTABLE,
        Error::OptimizerBoundary => flags::OPTIMIZER_BOUNDARY,
        _ => flags::NUMERIC,
    }
}

fn conv_flag(converged: bool) -> f64 {
    if converged {
        flags::OK
    } else {
        flags::UNCONVERGED
    }
}

/// Rows produced by one grid point.
#[derive(Debug, Default)]
struct Chunk {
    rows: Vec<Vec<f64>>,
    summary: Option<Vec<f64>>,
}

/// Values in front of the kind-specific columns.
fn prefix(kind: SweepKind, p: &Point) -> Vec<f64> {
    match kind {
        SweepKind::GapPtps | SweepKind::ExponentFit => vec![p.chi, p.splitting],
        _ => p.common(),
    }
}

fn padded(mut row: Vec<f64>, width: usize, flag: f64) -> Vec<f64> {
    row.resize(width - 1, NAN);
    row.push(flag);
    row
}

fn failed(kind: SweepKind, p: &Point, flag: f64) -> Chunk {
    let pre = prefix(kind, p);
    Chunk {
        rows: vec![padded(pre.clone(), columns(kind).len(), flag)],
        summary: summary_columns(kind).map(|c| padded(pre, c.len(), flag)),
    }
}

struct Ctx<'a> {
    spec: &'a SweepSpec,
    policy: CutoffPolicy,
}

impl Ctx<'_> {
    fn eval(&self, p: &Point, warm: Option<(f64, f64)>) -> (Chunk, Option<(f64, f64)>) {
        let kind = self.spec.kind;
        let res = match kind {
            SweepKind::Observables => self.observables(p).map(|c| (c, None)),
            SweepKind::Qfi | SweepKind::Qfi3d => self.qfi(p).map(|c| (c, None)),
            SweepKind::PolaronDecomposition => self.polaron(p, warm),
            SweepKind::Wavefunction => self.wavefunction(p).map(|c| (c, None)),
            SweepKind::Wigner => self.wigner(p).map(|c| (c, None)),
            SweepKind::GapPtps => self.gap_ptps(p).map(|c| (c, None)),
            SweepKind::ExponentFit => self.exponent(p).map(|c| (c, None)),
            SweepKind::PhaseDiagram => self.phase(p).map(|c| (c, None)),
        };
        match res {
            Ok((chunk, next)) => (chunk, next.or(warm)),
            Err(e) => (failed(kind, p, flag_for(&e)), warm),
        }
    }

    fn row(&self, p: &Point, values: &[f64]) -> Vec<f64> {
        let mut r = prefix(self.spec.kind, p);
        r.extend_from_slice(values);
        r
    }

    fn observables(&self, p: &Point) -> Result<Chunk> {
        let params = p.params()?;
        let st = converge_cutoff(&params, &self.policy)?;
        let s = spin_expectations(&st, &params);
        let (sxr, szr) = s.rotated.unwrap_or((NAN, NAN));
        let q = quadrature_moments(&st)?;
        Ok(Chunk {
            rows: vec![self.row(
                p,
                &[
                    st.e0,
                    st.e1,
                    st.gap,
                    s.sx,
                    s.sz,
                    sxr,
                    szr,
                    q.x2,
                    q.p2,
                    st.cutoff_used as f64,
                    conv_flag(st.converged),
                ],
            )],
            summary: None,
        })
    }

    fn qfi(&self, p: &Point) -> Result<Chunk> {
        let params = p.params()?;
        let q = qfi_ed(&params, self.spec.tolerances.delta, &self.policy)?;
        let d = q.distance();
        let g_t = params.g_t();
        let flag = if q.clamped {
            flags::NUMERIC
        } else {
            conv_flag(q.converged)
        };
        Ok(Chunk {
            rows: vec![self.row(
                p,
                &[
                    d,
                    q.f_q,
                    q.f_q.ln(),
                    q.f_q * 8.0 * g_t * g_t * d * d,
                    qfi_major_orders(&params).unwrap_or(NAN),
                    qfi_leading(&params).unwrap_or(NAN),
                    q.delta_used,
                    q.cutoff_used as f64,
                    flag,
                ],
            )],
            summary: None,
        })
    }

    fn polaron(&self, p: &Point, warm: Option<(f64, f64)>) -> Result<(Chunk, Option<(f64, f64)>)> {
        let params = p.params()?;
        let delta = self.spec.tolerances.delta;
        let dec = qfi_decompose(&params, delta, warm)?;
        let ed = qfi_ed(&params, delta, &self.policy)?;
        let s = dec.solution;
        let row = self.row(
            p,
            &[
                dec.f_total,
                dec.f_rho,
                dec.f_xi,
                dec.f_sigma,
                dec.f_mixed,
                dec.f_gram,
                dec.closure_error(),
                ed.f_q,
                s.xi_plus,
                s.xi_minus,
                s.c_plus,
                s.c_minus,
                s.energy_lower,
                polaron_gap(&s),
                s.gap_floor(),
                conv_flag(ed.converged),
            ],
        );
        Ok((
            Chunk {
                rows: vec![row],
                summary: None,
            },
            Some((s.xi_plus, s.xi_minus)),
        ))
    }

    /// Auto-widened grid unless `x_max` or `n_x` is pinned in the sweep settings.
    fn component_wf(&self, st: &SpectralResult, params: &ModelParams, x2: f64) -> Result<ComponentWavefunction> {
        let fixed = &self.spec.fixed;
        if !fixed.contains_key("x_max") && !fixed.contains_key("n_x") {
            return auto_wavefunctions(st, params, self.spec.basis);
        }
        let auto = GridSpec::auto(&QuadratureMoments { x2, p2: 0.0 });
        let grid = GridSpec {
            x_max: self.spec.setting("x_max", auto.x_max),
            n_points: self.spec.setting("n_x", GridSpec::DEFAULT_POINTS as f64) as usize,
        };
        component_wavefunctions(st, params, grid, self.spec.basis)
    }

    fn wavefunction(&self, p: &Point) -> Result<Chunk> {
        let params = p.params()?;
        let st = converge_cutoff(&params, &self.policy)?;
        let q = quadrature_moments(&st)?;
        let wf = self.component_wf(&st, &params, q.x2)?;
        let flag = if wf.truncated {
            flags::TRUNCATED
        } else {
            conv_flag(st.converged)
        };
        let rows = wf
            .grid
            .iter()
            .zip(wf.psi_plus.iter().zip(&wf.psi_minus))
            .map(|(&x, (&a, &b))| self.row(p, &[x, a, b, flag]))
            .collect();
        Ok(Chunk { rows, summary: None })
    }

    fn wigner(&self, p: &Point) -> Result<Chunk> {
        let params = p.params()?;
        let st = converge_cutoff(&params, &self.policy)?;
        let q = quadrature_moments(&st)?;
        let basis = self.spec.basis;
        let wf = self.component_wf(&st, &params, q.x2)?;
        if wf.truncated {
            return Ok(failed(SweepKind::Wigner, p, flags::TRUNCATED));
        }
        let p_max = self.spec.setting("p_max", default_p_max(q.p2));
        let n_p = self.spec.setting("n_p", DEFAULT_P_POINTS as f64) as usize;
        let g = wigner_transform(&wf, p_max, n_p)?;
        let flag = conv_flag(st.converged);
        let mut rows = Vec::with_capacity(g.x.len() * n_p);
        for (i, &x) in g.x.iter().enumerate() {
            for (j, &pj) in g.p.iter().enumerate() {
                let k = i * n_p + j;
                rows.push(self.row(p, &[x, pj, g.w_plus[k], g.w_minus[k], flag]));
            }
        }
        let triple = |m: Result<SqueezingMetrics>| m.map_or([NAN; 3], |m| [m.var_major, m.var_minor, m.aspect_ratio]);
        let (plus_c, minus_c) = component_fock(&st, &params, basis)?;
        let direct = |c: &[f64]| {
            fock_moments(c)
                .and_then(|m| squeezing_from_moments(&m))
                .map_or(NAN, |m| m.aspect_ratio)
        };
        let mut summary = vec![g.component_norms.0, g.component_norms.1];
        summary.extend(triple(squeezing_metrics(&g, Component::Plus)));
        summary.extend(triple(squeezing_metrics(&g, Component::Minus)));
        summary.extend([direct(&plus_c), direct(&minus_c), flag]);
        Ok(Chunk {
            rows,
            summary: Some(self.row(p, &summary)),
        })
    }

    fn gap_ptps(&self, p: &Point) -> Result<Chunk> {
        let n = self.spec.setting("n_samples", DEFAULT_PTPS_SAMPLES as f64) as usize;
        let r = ptps(&p.template()?, p.chi, n, &self.policy)?;
        let rows = r
            .curve
            .samples
            .iter()
            .map(|s| self.row(p, &[s.gbar2, s.gap, s.cutoff_used as f64, conv_flag(s.converged)]))
            .collect();
        let summary = self.row(
            p,
            &[
                r.t,
                r.t_coarse,
                r.gap_min,
                r.boundary_gap,
                r.fq_at_crit,
                r.ratio,
                conv_flag(r.converged),
            ],
        );
        Ok(Chunk {
            rows,
            summary: Some(summary),
        })
    }

    fn exponent(&self, p: &Point) -> Result<Chunk> {
        let tpl = p.template()?;
        let gc = critical_coupling(p.chi)?;
        let (lo, hi) = self.spec.window();
        let n = self.spec.setting("n_points", DEFAULT_FIT_POINTS as f64) as usize;
        let distances: Vec<f64> = (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect();
        let points = distances
            .par_iter()
            .map(|d| qfi_ed(&tpl.with_gbar2(gc - d), self.spec.tolerances.delta, &self.policy))
            .collect::<Result<Vec<QfiPoint>>>()?;
        // widened so that rounding in gc - d cannot drop the window ends
        let fit = fit_critical_exponent(&points, (lo * (1.0 - 1e-9), hi * (1.0 + 1e-9)))?;
        let g_t = tpl.g_t();
        let rows = points
            .iter()
            .zip(&distances)
            .map(|(q, &d)| {
                let major = qfi_major_orders(&tpl.with_g2(q.g2)).unwrap_or(NAN);
                self.row(
                    p,
                    &[
                        d,
                        q.gbar2,
                        q.f_q,
                        q.f_q * 8.0 * g_t * g_t * d * d,
                        major,
                        conv_flag(q.converged),
                    ],
                )
            })
            .collect();
        let all_conv = points.iter().all(|q| q.converged);
        let summary = self.row(
            p,
            &[
                fit.gamma,
                fit.coefficient,
                fit.coefficient * 8.0 * g_t * g_t,
                fit.r_squared,
                fit.n_points as f64,
                conv_flag(all_conv),
            ],
        );
        Ok(Chunk {
            rows,
            summary: Some(summary),
        })
    }

    fn phase(&self, p: &Point) -> Result<Chunk> {
        let split = if p.splitting.is_finite() { p.splitting } else { 0.0 };
        let params = Point { splitting: split, ..*p }.params()?;
        let r2 = params.radius_sq();
        let stable = if r2 < 1.0 { 1.0 } else { 0.0 };
        let values = match rotated_frame(&params) {
            Ok(f) => {
                let omega_tilde = if p.splitting.is_finite() { f.omega_tilde } else { NAN };
                [
                    f.m_tilde_plus,
                    f.m_tilde_minus,
                    f.varpi_tilde_sq_plus,
                    f.varpi_tilde_sq_minus,
                    omega_tilde,
                ]
            }
            // the origin: no rotation, unit masses and frequencies
            Err(Error::DegenerateRotation) => [1.0, 1.0, 1.0, 1.0, p.splitting - p.chi * p.omega],
            Err(e) => return Err(e),
        };
        let mut row = vec![stable, r2];
        row.extend(values);
        row.push(flags::OK);
        Ok(Chunk {
            rows: vec![self.row(p, &row)],
            summary: None,
        })
    }
}

fn axis_values(a: &Option<super::Axis>) -> Vec<Option<f64>> {
    match a {
        Some(a) => a.values().into_iter().map(Some).collect(),
        None => vec![None],
    }
}

pub(super) fn run(spec: &SweepSpec) -> Result<SweepOutput> {
    let ctx = Ctx {
        spec,
        policy: spec.tolerances.policy(),
    };
    let v1 = axis_values(&spec.axis1);
    let v2 = axis_values(&spec.axis2);

    // polaron chains warm-start along axis1; everything else is pointwise
    let chunks: Vec<Chunk> = if spec.kind == SweepKind::PolaronDecomposition {
        v2.par_iter()
            .map(|&b| {
                let mut warm = None;
                v1.iter()
                    .map(|&a| {
                        let (c, next) = ctx.eval(&Point::resolve(spec, a, b), warm);
                        warm = next;
                        c
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    } else {
        let grid: Vec<(Option<f64>, Option<f64>)> = v2.iter().flat_map(|&b| v1.iter().map(move |&a| (a, b))).collect();
        grid.par_iter()
            .map(|&(a, b)| ctx.eval(&Point::resolve(spec, a, b), None).0)
            .collect()
    };

    let kind = spec.kind;
    let mut main = ResultTable::new(kind, false, &columns(kind));
    let mut summary = summary_columns(kind).map(|c| ResultTable::new(kind, true, &c));
    for c in chunks {
        main.rows.extend(c.rows);
        if let (Some(t), Some(r)) = (summary.as_mut(), c.summary) {
            t.rows.push(r);
        }
    }
    let meta = metadata(spec, &main);
    main.metadata.extend(meta.iter().cloned());
    if let Some(t) = summary.as_mut() {
        t.metadata.extend(meta);
    }
    for t in std::iter::once(&mut main).chain(summary.as_mut()) {
        let units: Vec<(String, String)> = t
            .header
            .iter()
            .map(|h| (format!("unit.{h}"), unit(h).to_string()))
            .collect();
        t.metadata.extend(units);
    }
    Ok(SweepOutput { main, summary })
}

fn metadata(spec: &SweepSpec, main: &ResultTable) -> Vec<(String, String)> {
    let mut m = vec![("spec.hash".to_string(), spec.hash())];
    m.extend(spec.echo());
    m.push(("defaults".into(), defaults_note(spec)));
    match spec.kind {
        SweepKind::GapPtps => {
            m.push(("ptps.fq_offset".into(), format!("{FQ_OFFSET:?}")));
            m.push(("ptps.grid".into(), "gbar2 = gbar2c sin(pi i / (2 n)), i = 0..n".into()));
        }
        SweepKind::ExponentFit => {
            let (lo, hi) = spec.window();
            m.push(("fit.window".into(), format!("{lo:?}:{hi:?}")));
        }
        _ => {}
    }
    if let Some(cut) = main.column("cutoff") {
        let used: Vec<f64> = cut.into_iter().filter(|c| c.is_finite()).collect();
        if !used.is_empty() {
            let lo = used.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = used.iter().copied().fold(0.0, f64::max);
            m.push(("cutoff.min".into(), format!("{lo}")));
            m.push(("cutoff.max".into(), format!("{hi}")));
        }
    }
    let fl = main.column("flag").unwrap_or_default();
    let count = |f: f64| fl.iter().filter(|&&v| v == f).count();
    m.push(("rows".into(), main.rows.len().to_string()));
    m.push(("rows.unconverged".into(), count(flags::UNCONVERGED).to_string()));
    m.push((
        "rows.failed".into(),
        fl.iter()
            .filter(|&&v| v != flags::OK && v != flags::UNCONVERGED)
            .count()
            .to_string(),
    ));
    m.push(("flags".into(), flags::LEGEND.into()));
    m
}

fn defaults_note(spec: &SweepSpec) -> String {
    let mut parts = Vec::new();
    if !spec.has("omega") {
        parts.push("omega = 1.0".to_string());
    }
    if !spec.has("chi") {
        parts.push("chi = 0.0".to_string());
    }
    if !spec.has("chi_z") {
        parts.push("chi_z = 1.0".to_string());
    }
    if !spec.has("Omega") && !spec.has("omega_tilde_c") {
        parts.push(format!("omega_tilde_c = {DEFAULT_OMEGA_TILDE_C:?}"));
    }
    if parts.is_empty() {
        "none".into()
    } else {
        parts.join("; ")
    }
}

#[cfg(test)]
mod tests {
    use super::super::{run_sweep, Axis, Spacing};
    use super::*;

    #[test]
    fn phase_diagram_reproduces_disk() {
        let spec = SweepSpec::new(SweepKind::PhaseDiagram)
            .with_axis1(Axis::new("chi", -1.2, 1.2, 13, Spacing::Linear))
            .with_axis2(Axis::new("gbar2", 0.0, 1.2, 13, Spacing::Linear));
        let out = run_sweep(&spec).unwrap();
        let t = &out.main;
        assert_eq!(t.rows.len(), 169);
        let (ci, gi, si) = (
            t.column_index("chi").unwrap(),
            t.column_index("gbar2").unwrap(),
            t.column_index("stable").unwrap(),
        );
        for r in &t.rows {
            let inside = r[ci] * r[ci] + r[gi] * r[gi] < 1.0;
            assert_eq!(r[si] == 1.0, inside);
        }
        // axis2 outer, axis1 inner
        assert_eq!(t.rows[1][gi], 0.0);
        assert!(t.rows[13][gi] > 0.0);
    }

    #[test]
    fn outside_points_become_flagged_rows() {
        let spec = SweepSpec::new(SweepKind::Observables)
            .with("chi", 0.8)
            .with_axis1(Axis::new("gbar2", 0.5, 0.7, 3, Spacing::Linear));
        let t = run_sweep(&spec).unwrap().main;
        let flag = t.column("flag").unwrap();
        assert_eq!(flag, vec![0.0, 2.0, 2.0]);
        assert!(t.rows[2][t.column_index("E0").unwrap()].is_nan());
    }

    #[test]
    fn output_is_independent_of_worker_count() {
        let mut spec = SweepSpec::new(SweepKind::Qfi).with("chi", 0.4).with_axis1(Axis::new(
            "gbar2",
            0.2,
            0.8,
            6,
            Spacing::Cosine,
        ));
        spec.workers = Some(1);
        let a = run_sweep(&spec).unwrap().main.to_csv();
        spec.workers = Some(4);
        let b = run_sweep(&spec).unwrap().main.to_csv();
        assert_eq!(a, b);
    }
}
