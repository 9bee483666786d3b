//! Closed form against quadrature, per term and sweep point.

use std::fmt::Write as _;

use magdip_core::kernel::{k_brackets, k_kernel_oracle};
use magdip_core::spectral::{j_brackets, j_coupling_oracle};
use magdip_core::{
    j_coupling, k_kernel, CVec3, Complex64, Error as CoreError, PairGeometry, PhysicalConstants,
    RegulatorPlan, Tolerances,
};
use rayon::prelude::*;

use crate::error::{exit, RunError};
use crate::run::{prepare, RunOptions};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStatus {
    Ok,
    /// Converged but outside tolerance.
    Fail,
    NonConvergent,
    /// Nothing to compare (zero frequency).
    Skipped,
    Error,
}

impl OracleStatus {
    pub fn label(&self) -> &'static str {
        match self {
            OracleStatus::Ok => "ok",
            OracleStatus::Fail => "fail",
            OracleStatus::NonConvergent => "nonconvergent",
            OracleStatus::Skipped => "skipped",
            OracleStatus::Error => "error",
        }
    }

    pub fn flagged(&self) -> bool {
        !matches!(self, OracleStatus::Ok | OracleStatus::Skipped)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub value: Option<Complex64>,
    pub rel_err: Option<f64>,
    pub error_estimate: Option<f64>,
    pub status: OracleStatus,
    pub message: Option<String>,
}

impl OracleOutcome {
    fn skipped() -> Self {
        Self { value: None, rel_err: None, error_estimate: None, status: OracleStatus::Skipped, message: None }
    }

    fn error(e: CoreError) -> Self {
        Self { value: None, rel_err: None, error_estimate: None, status: OracleStatus::Error, message: Some(e.to_string()) }
    }
}

/// Relative error against the closed form, floored at `1e-3` of the
/// configuration's natural magnitude so that accidental zeros of the bilinear
/// do not turn rounding noise into failures.
fn relative(closed: Complex64, oracle: Complex64, scale: f64) -> f64 {
    let denom = closed.norm().max(1e-3 * scale);
    if denom == 0.0 {
        return (closed - oracle).norm();
    }
    (closed - oracle).norm() / denom
}

fn magnitude(geom: &PairGeometry, m1: &CVec3, m2: &CVec3, consts: &PhysicalConstants, dot: f64, radial: f64) -> f64 {
    consts.strength(geom.r()) * m1.norm() * m2.norm() * (dot.abs() + 3.0 * radial.abs())
}

/// Angular-quadrature check of `J(Ω)`; negative `Ω` uses the oddness of `J`.
pub fn j_oracle(
    omega: f64,
    geom: &PairGeometry,
    m1: &CVec3,
    m2: &CVec3,
    consts: &PhysicalConstants,
    quad_points: usize,
    tol: &Tolerances,
) -> OracleOutcome {
    if omega == 0.0 {
        return OracleOutcome::skipped();
    }
    let closed = j_coupling(omega, geom, m1, m2, consts);
    let value = match j_coupling_oracle(omega.abs(), geom, m1, m2, consts, quad_points) {
        Ok(v) => v * omega.signum(),
        Err(e) => return OracleOutcome::error(e),
    };
    let b = j_brackets(consts.eta(omega, geom.r()));
    let rel = relative(closed, value, magnitude(geom, m1, m2, consts, b.dot, b.radial));
    let status = if rel <= tol.angular_oracle { OracleStatus::Ok } else { OracleStatus::Fail };
    OracleOutcome { value: Some(value), rel_err: Some(rel), error_estimate: None, status, message: None }
}

/// Regulated principal-value check of `K(Ω)`.
pub fn k_oracle(
    omega: f64,
    geom: &PairGeometry,
    m1: &CVec3,
    m2: &CVec3,
    consts: &PhysicalConstants,
    plan: &RegulatorPlan,
    tol: &Tolerances,
) -> OracleOutcome {
    if omega == 0.0 {
        return OracleOutcome::skipped();
    }
    let closed = k_kernel(omega, geom, m1, m2, consts);
    let b = k_brackets(consts.eta(omega, geom.r()));
    let scale = magnitude(geom, m1, m2, consts, b.dot, b.radial);
    match k_kernel_oracle(omega, geom, m1, m2, consts, plan) {
        Ok(reg) => {
            let rel = relative(closed, reg.value, scale);
            let status = if rel <= tol.pv_oracle { OracleStatus::Ok } else { OracleStatus::Fail };
            OracleOutcome {
                value: Some(reg.value),
                rel_err: Some(rel),
                error_estimate: Some(reg.error_estimate),
                status,
                message: None,
            }
        }
        Err(CoreError::NonConvergence { error_estimate, estimates, .. }) => {
            let value = estimates.last().copied();
            OracleOutcome {
                value,
                rel_err: value.map(|v| relative(closed, v, scale)),
                error_estimate: Some(error_estimate),
                status: OracleStatus::NonConvergent,
                message: None,
            }
        }
        Err(e) => OracleOutcome::error(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub point: usize,
    pub sweep_value: f64,
    pub term: magdip_core::TermIndex,
    pub quantity: &'static str,
    pub eta: f64,
    pub closed: Complex64,
    pub tolerance: f64,
    pub outcome: OracleOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub axis: &'static str,
    pub rows: Vec<OracleRow>,
}

impl OracleReport {
    /// 0 when every comparison passed or was skipped, 3 when any oracle failed
    /// to converge, 1 when any comparison is out of tolerance or errored.
    pub fn exit_code(&self) -> i32 {
        let has = |s: OracleStatus| self.rows.iter().any(|r| r.outcome.status == s);
        if has(OracleStatus::NonConvergent) {
            exit::NON_CONVERGENCE
        } else if has(OracleStatus::Fail) || has(OracleStatus::Error) {
            exit::FAILURE
        } else {
            exit::SUCCESS
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>5}  {:>12}  {:<9}  {:<2}  {:>10}  {:>12}  {:>9}  status",
            "point", self.axis, "term", "q", "eta", "rel_err", "tol"
        );
        for r in &self.rows {
            let t = r.term;
            let rel = r.outcome.rel_err.map_or_else(|| "-".to_string(), |e| format!("{e:.3e}"));
            let _ = write!(
                out,
                "{:>5}  {:>12.5e}  {:<9}  {:<2}  {:>10.4e}  {:>12}  {:>9.1e}  {}",
                r.point,
                r.sweep_value,
                format!("{},{},{},{}", t.y, t.x, t.u, t.v),
                r.quantity,
                r.eta,
                rel,
                r.tolerance,
                r.outcome.status.label().to_uppercase()
            );
            if let Some(m) = &r.outcome.message {
                let _ = write!(out, "  ({m})");
            }
            out.push('\n');
        }
        let count = |s: OracleStatus| self.rows.iter().filter(|r| r.outcome.status == s).count();
        let _ = writeln!(
            out,
            "{} comparisons: {} ok, {} fail, {} nonconvergent, {} skipped, {} error",
            self.rows.len(),
            count(OracleStatus::Ok),
            count(OracleStatus::Fail),
            count(OracleStatus::NonConvergent),
            count(OracleStatus::Skipped),
            count(OracleStatus::Error)
        );
        out
    }
}

/// Compares closed-form `J` and `K` with their oracles for every scalar term
/// at every sweep point, regardless of `oracle.enabled`.
pub fn oracle_check(s: &Scenario, opts: &RunOptions) -> Result<OracleReport, RunError> {
    let p = prepare(s, opts.dimensionless)?;
    let tol = s.tolerances;
    let eval = |index: usize| -> Result<Vec<OracleRow>, RunError> {
        let (spec1, spec2, geom) = p.point(index)?;
        let consts = &p.constants;
        let mut rows = Vec::new();
        for term in s.scalar_terms() {
            let (m1, m2) = (spec1.moment(term.y, term.x), spec2.moment(term.u, term.v));
            let omega = (spec1.energy(term.y) - spec1.energy(term.x)) / consts.hbar();
            let eta = consts.eta(omega, geom.r());
            let row = |quantity, closed, tolerance, outcome| OracleRow {
                point: index,
                sweep_value: p.values[index],
                term,
                quantity,
                eta,
                closed,
                tolerance,
                outcome,
            };
            rows.push(row(
                "J",
                j_coupling(omega, &geom, m1, m2, consts),
                tol.angular_oracle,
                j_oracle(omega, &geom, m1, m2, consts, s.oracle.quad_points, &tol),
            ));
            rows.push(row(
                "K",
                k_kernel(omega, &geom, m1, m2, consts),
                tol.pv_oracle,
                k_oracle(omega, &geom, m1, m2, consts, &s.oracle.plan, &tol),
            ));
        }
        Ok(rows)
    };
    let run = || (0..p.values.len()).into_par_iter().map(eval).collect::<Vec<_>>();
    let results = match opts.threads {
        None => run(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Invalid(format!("cannot start {n} worker threads: {e}")))?
            .install(run),
    };
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(OracleReport { axis: p.axis_name(), rows })
}
