//! Scenario files: a strict TOML document describing two dipoles, their
//! geometry, an optional one-axis sweep and the quantities to compute.
//!
//! ```toml
//! outputs = ["K", "tensor"]
//!
//! [units]
//! mode = "si"                      # or "dimensionless"
//!
//! [dipole1]
//! energies = [0.0, 1.0e9]
//! energy_unit = "rad_per_s"        # joule | ev | rad_per_s | natural
//! moment_unit = "bohr_magneton"    # a_m2 | bohr_magneton | natural
//! [[dipole1.moment]]
//! row = 1
//! col = 0
//! re = [0.0, 0.0, 1.0]
//! [[dipole1.moment]]
//! row = 0
//! col = 1
//! re = [0.0, 0.0, 1.0]
//!
//! [geometry]
//! r = 1.0e-8
//! direction = [0.0, 0.0, 1.0]
//!
//! [sweep.distance]
//! min = 1.0e-9
//! max = 1.0e-6
//! points = 40
//! spacing = "log"
//! ```
//!
//! Moment elements not listed are zero, so both `(row, col)` and `(col, row)`
//! must be given for an off-diagonal element. Sweep values are in the
//! scenario's base units: metres (distance), rad/s (detuning), a pure ratio
//! (frequency_ratio) and radians (orientation_angle).
//!
//! Sweep axes:
//! - `distance` replaces the separation.
//! - `detuning` shifts the highest level of dipole 2 by `ħδ`.
//! - `frequency_ratio` rescales dipole 2's ladder so its top-to-bottom gap is
//!   `ratio` times dipole 1's.
//! - `orientation_angle` rotates every moment element of dipole 2 about
//!   `normalize(ê_r × ẑ)` (or `ê_r × x̂` when `ê_r ∥ ẑ`).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::Path;

use magdip_core::coupling::TermIndex;
use magdip_core::{
    CVec3, DipoleSpec, Error as CoreError, PairGeometry, PhysicalConstants, RegulatorPlan,
    Tolerances, UnitVec3,
};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use toml::Spanned;

const ELECTRON_VOLT: f64 = 1.602_176_634e-19;
const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;

/// Where in the scenario file a problem was found.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub origin: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.origin)?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
            if let Some(col) = self.column {
                write!(f, ":{col}")?;
            }
        }
        if !self.field.is_empty() {
            write!(f, ": {}", self.field)?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UnitMode {
    #[default]
    Si,
    Dimensionless,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyUnit {
    Joule,
    Ev,
    RadPerS,
    Natural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentUnit {
    #[serde(rename = "a_m2")]
    AmpereSquareMetre,
    BohrMagneton,
    Natural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
pub enum Output {
    J,
    K,
    #[serde(rename = "tensor")]
    Tensor,
    #[serde(rename = "hamiltonian")]
    Hamiltonian,
    #[serde(rename = "classical")]
    Classical,
    #[serde(rename = "dicke")]
    Dicke,
    #[serde(rename = "rwa_compare")]
    RwaCompare,
}

impl Output {
    pub fn name(&self) -> &'static str {
        match self {
            Output::J => "J",
            Output::K => "K",
            Output::Tensor => "tensor",
            Output::Hamiltonian => "hamiltonian",
            Output::Classical => "classical",
            Output::Dicke => "dicke",
            Output::RwaCompare => "rwa_compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Distance,
    Detuning,
    FrequencyRatio,
    OrientationAngle,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Distance => "distance",
            SweepAxis::Detuning => "detuning",
            SweepAxis::FrequencyRatio => "frequency_ratio",
            SweepAxis::OrientationAngle => "orientation_angle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                if i == 0 {
                    return self.min;
                }
                if i + 1 == self.points {
                    return self.max;
                }
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * t,
                    Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dipole {
    pub spec: DipoleSpec,
    pub label: String,
    pub levels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub enabled: bool,
    pub quad_points: usize,
    pub plan: RegulatorPlan,
}

/// A parsed and validated scenario. Quantities are stored in the scenario's
/// base units (SI, or natural units with `μ₀ = ħ = c = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub unit_mode: UnitMode,
    pub reference_length: Option<f64>,
    pub constants: PhysicalConstants,
    pub dipole1: Dipole,
    pub dipole2: Dipole,
    pub geometry: PairGeometry,
    pub sweep: Option<Sweep>,
    pub outputs: Vec<Output>,
    pub terms: Option<Vec<TermIndex>>,
    pub include_dissipative: bool,
    pub oracle: OracleConfig,
    pub tolerances: Tolerances,
    /// SHA-256 of the file contents, lowercase hex.
    pub source_hash: String,
}

impl Scenario {
    pub fn wants(&self, output: Output) -> bool {
        self.outputs.contains(&output)
    }

    /// Terms for the per-term scalar outputs: the listed ones, or the
    /// top→bottom / bottom→top exchange term.
    pub fn scalar_terms(&self) -> Vec<TermIndex> {
        self.terms.clone().unwrap_or_else(|| {
            let (d1, d2) = (self.dipole1.spec.dim(), self.dipole2.spec.dim());
            vec![TermIndex::new(d1 - 1, 0, 0, d2 - 1)]
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    units: Option<Spanned<RawUnits>>,
    #[serde(default)]
    constants: Option<Spanned<RawConstants>>,
    dipole1: Spanned<RawDipole>,
    dipole2: Spanned<RawDipole>,
    geometry: Spanned<RawGeometry>,
    #[serde(default)]
    sweep: Option<Spanned<RawSweep>>,
    outputs: Spanned<Vec<Output>>,
    #[serde(default)]
    terms: Option<Spanned<Vec<[usize; 4]>>>,
    #[serde(default = "default_true")]
    include_dissipative: bool,
    #[serde(default)]
    oracle: Option<Spanned<RawOracle>>,
    #[serde(default)]
    tolerances: Option<Spanned<RawTolerances>>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUnits {
    #[serde(default)]
    mode: UnitMode,
    reference_length: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstants {
    mu0: Option<f64>,
    hbar: Option<f64>,
    c: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDipole {
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    levels: Option<Vec<String>>,
    energies: Vec<f64>,
    energy_unit: Option<EnergyUnit>,
    moment_unit: Option<MomentUnit>,
    #[serde(default)]
    moment: Vec<Spanned<RawMoment>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMoment {
    row: usize,
    col: usize,
    #[serde(default)]
    re: [f64; 3],
    #[serde(default)]
    im: [f64; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    r: Option<f64>,
    direction: Option<[f64; 3]>,
    position1: Option<[f64; 3]>,
    position2: Option<[f64; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    distance: Option<Spanned<RawRange>>,
    detuning: Option<Spanned<RawRange>>,
    frequency_ratio: Option<Spanned<RawRange>>,
    orientation_angle: Option<Spanned<RawRange>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    min: f64,
    max: f64,
    points: usize,
    #[serde(default)]
    spacing: Spacing,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    #[serde(default)]
    enabled: bool,
    quad_points: Option<usize>,
    epsilons: Option<Vec<f64>>,
    eta_max: Option<f64>,
    extrapolation_order: Option<usize>,
    rel_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    validation: Option<f64>,
    resonance: Option<f64>,
    angular_oracle: Option<f64>,
    pv_oracle: Option<f64>,
    oracle_structure: Option<f64>,
}

pub const DEFAULT_QUAD_POINTS: usize = 96;

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError {
        origin: origin.clone(),
        line: None,
        column: None,
        field: String::new(),
        message: e.to_string(),
    })?;
    parse_scenario(&text, &origin)
}

struct Ctx<'a> {
    text: &'a str,
    origin: &'a str,
}

impl Ctx<'_> {
    fn err(&self, span: Option<Range<usize>>, field: impl Into<String>, message: impl fmt::Display) -> ScenarioError {
        let (line, column) = match span {
            Some(s) => {
                let start = s.start.min(self.text.len());
                let before = &self.text[..start];
                let line = before.matches('\n').count() + 1;
                let column = start - before.rfind('\n').map_or(0, |p| p + 1) + 1;
                (Some(line), Some(column))
            }
            None => (None, None),
        };
        ScenarioError { origin: self.origin.to_string(), line, column, field: field.into(), message: message.to_string() }
    }
}

/// Parses scenario text; `origin` names the source in error messages.
pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario, ScenarioError> {
    let ctx = Ctx { text, origin };
    let raw: RawScenario = toml::from_str(text).map_err(|e| ctx.err(e.span(), "", e.message().trim_end()))?;

    let (unit_mode, reference_length) = match &raw.units {
        Some(u) => {
            if let Some(l) = u.get_ref().reference_length {
                if !(l > 0.0 && l.is_finite()) {
                    return Err(ctx.err(Some(u.span()), "units.reference_length", "must be positive and finite"));
                }
            }
            (u.get_ref().mode, u.get_ref().reference_length)
        }
        None => (UnitMode::Si, None),
    };

    let constants = match (unit_mode, &raw.constants) {
        (UnitMode::Dimensionless, Some(c)) => {
            return Err(ctx.err(Some(c.span()), "constants", "overrides are only allowed in si mode"));
        }
        (UnitMode::Dimensionless, None) => PhysicalConstants::dimensionless(),
        (UnitMode::Si, None) => PhysicalConstants::si(),
        (UnitMode::Si, Some(c)) => {
            let si = PhysicalConstants::si();
            let o = c.get_ref();
            PhysicalConstants::new(o.mu0.unwrap_or(si.mu0()), o.hbar.unwrap_or(si.hbar()), o.c.unwrap_or(si.c()))
                .map_err(|e| ctx.err(Some(c.span()), "constants", e))?
        }
    };

    let dipole1 = build_dipole(&ctx, "dipole1", &raw.dipole1, unit_mode, &constants)?;
    let dipole2 = build_dipole(&ctx, "dipole2", &raw.dipole2, unit_mode, &constants)?;
    let geometry = build_geometry(&ctx, &raw.geometry)?;
    let sweep = raw.sweep.as_ref().map(|s| build_sweep(&ctx, s)).transpose()?.flatten();

    let mut outputs: Vec<Output> = raw.outputs.get_ref().clone();
    outputs.sort();
    outputs.dedup();
    if outputs.is_empty() {
        return Err(ctx.err(Some(raw.outputs.span()), "outputs", "at least one output is required"));
    }
    if outputs.contains(&Output::Dicke) {
        let ok = matches!(&sweep, Some(s) if s.axis == SweepAxis::Distance && s.points >= 2);
        if !ok {
            return Err(ctx.err(Some(raw.outputs.span()), "outputs", "dicke needs a distance sweep with at least two points"));
        }
    }

    let terms = match &raw.terms {
        None => None,
        Some(t) => {
            let (d1, d2) = (dipole1.spec.dim(), dipole2.spec.dim());
            let mut out = Vec::new();
            for &[y, x, u, v] in t.get_ref() {
                if y >= d1 || x >= d1 || u >= d2 || v >= d2 {
                    return Err(ctx.err(
                        Some(t.span()),
                        "terms",
                        format!("term [{y}, {x}, {u}, {v}] is out of range for dimensions ({d1}, {d2})"),
                    ));
                }
                out.push(TermIndex::new(y, x, u, v));
            }
            if out.is_empty() {
                return Err(ctx.err(Some(t.span()), "terms", "list must not be empty"));
            }
            Some(out)
        }
    };

    let oracle = build_oracle(&ctx, raw.oracle.as_ref())?;
    let tolerances = build_tolerances(&ctx, raw.tolerances.as_ref())?;

    Ok(Scenario {
        unit_mode,
        reference_length,
        constants,
        dipole1,
        dipole2,
        geometry,
        sweep,
        outputs,
        terms,
        include_dissipative: raw.include_dissipative,
        oracle,
        tolerances,
        source_hash: hex::encode(Sha256::digest(text.as_bytes())),
    })
}

fn build_dipole(
    ctx: &Ctx<'_>,
    name: &str,
    raw: &Spanned<RawDipole>,
    mode: UnitMode,
    consts: &PhysicalConstants,
) -> Result<Dipole, ScenarioError> {
    let span = raw.span();
    let d = raw.get_ref();
    let dim = d.energies.len();
    if dim < 2 {
        return Err(ctx.err(Some(span), format!("{name}.energies"), "a dipole needs at least two levels"));
    }
    let energy_unit = d.energy_unit.unwrap_or(match mode {
        UnitMode::Si => EnergyUnit::Joule,
        UnitMode::Dimensionless => EnergyUnit::Natural,
    });
    let moment_unit = d.moment_unit.unwrap_or(match mode {
        UnitMode::Si => MomentUnit::AmpereSquareMetre,
        UnitMode::Dimensionless => MomentUnit::Natural,
    });
    let natural_energy = energy_unit == EnergyUnit::Natural;
    let natural_moment = moment_unit == MomentUnit::Natural;
    if (mode == UnitMode::Dimensionless) != natural_energy || (mode == UnitMode::Dimensionless) != natural_moment {
        return Err(ctx.err(Some(span), name, "natural units are used exactly when units.mode = \"dimensionless\""));
    }
    let energy_scale = match energy_unit {
        EnergyUnit::Joule | EnergyUnit::Natural => 1.0,
        EnergyUnit::Ev => ELECTRON_VOLT,
        EnergyUnit::RadPerS => consts.hbar(),
    };
    let moment_scale = match moment_unit {
        MomentUnit::AmpereSquareMetre | MomentUnit::Natural => 1.0,
        MomentUnit::BohrMagneton => BOHR_MAGNETON,
    };

    let levels = match &d.levels {
        Some(l) if l.len() != dim => {
            return Err(ctx.err(Some(span), format!("{name}.levels"), format!("expected {dim} labels, got {}", l.len())));
        }
        Some(l) => l.clone(),
        None => (0..dim).map(|i| i.to_string()).collect(),
    };

    let mut moments = vec![CVec3::ZERO; dim * dim];
    let mut seen: BTreeMap<(usize, usize), Range<usize>> = BTreeMap::new();
    for m in &d.moment {
        let e = m.get_ref();
        let field = format!("{name}.moment[{}][{}]", e.row, e.col);
        if e.row >= dim || e.col >= dim {
            return Err(ctx.err(Some(m.span()), field, format!("index out of range for {dim} levels")));
        }
        if seen.insert((e.row, e.col), m.span()).is_some() {
            return Err(ctx.err(Some(m.span()), field, "element given twice"));
        }
        let v = CVec3::from_parts(e.re, e.im).scale(moment_scale);
        if !v.is_finite() {
            return Err(ctx.err(Some(m.span()), field, "non-finite component"));
        }
        moments[e.row * dim + e.col] = v;
    }
    let energies = d.energies.iter().map(|e| e * energy_scale).collect();
    let spec = DipoleSpec::new(energies, moments).map_err(|e| match e {
        CoreError::NotHermitian { row, col, deviation } => {
            let at = seen.get(&(row, col)).or_else(|| seen.get(&(col, row))).cloned().unwrap_or(span.clone());
            ctx.err(
                Some(at),
                format!("{name}.moment[{row}][{col}]"),
                format!(
                    "moment matrix is not Hermitian: element ({row},{col}) differs from conj of ({col},{row}) by {deviation:e}"
                ),
            )
        }
        other => ctx.err(Some(span.clone()), name, other),
    })?;
    Ok(Dipole { spec, label: d.label.clone().unwrap_or_else(|| name.to_string()), levels })
}

fn build_geometry(ctx: &Ctx<'_>, raw: &Spanned<RawGeometry>) -> Result<PairGeometry, ScenarioError> {
    let g = raw.get_ref();
    let span = Some(raw.span());
    match (g.r, g.direction, g.position1, g.position2) {
        (Some(r), Some(dir), None, None) => {
            let e = UnitVec3::normalize(dir).map_err(|e| ctx.err(span.clone(), "geometry.direction", e))?;
            PairGeometry::new(r, e).map_err(|e| ctx.err(span, "geometry.r", e))
        }
        (None, None, Some(p1), Some(p2)) => {
            PairGeometry::from_positions(p1, p2).map_err(|e| ctx.err(span, "geometry", e))
        }
        _ => Err(ctx.err(span, "geometry", "give either r and direction, or position1 and position2")),
    }
}

fn build_sweep(ctx: &Ctx<'_>, raw: &Spanned<RawSweep>) -> Result<Option<Sweep>, ScenarioError> {
    let s = raw.get_ref();
    let given: Vec<(SweepAxis, &Spanned<RawRange>)> = [
        (SweepAxis::Distance, &s.distance),
        (SweepAxis::Detuning, &s.detuning),
        (SweepAxis::FrequencyRatio, &s.frequency_ratio),
        (SweepAxis::OrientationAngle, &s.orientation_angle),
    ]
    .into_iter()
    .filter_map(|(a, r)| r.as_ref().map(|r| (a, r)))
    .collect();
    if given.len() > 1 {
        let names: Vec<&str> = given.iter().map(|(a, _)| a.name()).collect();
        return Err(ctx.err(Some(raw.span()), "sweep", format!("at most one sweep axis is allowed, got {}", names.join(", "))));
    }
    let Some(&(axis, range)) = given.first() else {
        return Ok(None);
    };
    let field = format!("sweep.{}", axis.name());
    let r = range.get_ref();
    let span = Some(range.span());
    if r.points == 0 {
        return Err(ctx.err(span, field, "points must be at least 1"));
    }
    if !(r.min.is_finite() && r.max.is_finite()) || r.max < r.min || (r.points > 1 && r.max == r.min) {
        return Err(ctx.err(span, field, "range must be finite with min < max"));
    }
    if r.spacing == Spacing::Log && !(r.min > 0.0) {
        return Err(ctx.err(span, field, "log spacing needs a positive range"));
    }
    let positive = matches!(axis, SweepAxis::Distance | SweepAxis::FrequencyRatio);
    if positive && !(r.min > 0.0) {
        return Err(ctx.err(span, field, "values must be positive"));
    }
    Ok(Some(Sweep { axis, min: r.min, max: r.max, points: r.points, spacing: r.spacing }))
}

fn build_oracle(ctx: &Ctx<'_>, raw: Option<&Spanned<RawOracle>>) -> Result<OracleConfig, ScenarioError> {
    let Some(raw) = raw else {
        return Ok(OracleConfig { enabled: false, quad_points: DEFAULT_QUAD_POINTS, plan: RegulatorPlan::default() });
    };
    let o = raw.get_ref();
    let span = Some(raw.span());
    let default = RegulatorPlan::default();
    let plan = match (&o.epsilons, o.eta_max, o.extrapolation_order, o.rel_tol) {
        (None, None, None, None) => default,
        (eps, eta_max, order, rel_tol) => {
            let eps = eps.clone().unwrap_or_else(|| default.epsilons().to_vec());
            let rel_tol = rel_tol.unwrap_or(default.rel_tol());
            match (eta_max, order) {
                (None, None) => RegulatorPlan::with_epsilons(eps, rel_tol),
                _ => {
                    let min_eps = eps.iter().cloned().fold(f64::INFINITY, f64::min);
                    let eta_max = eta_max.unwrap_or(RegulatorPlan::DEFAULT_CUTOFF_DECAY / min_eps);
                    let order = order.unwrap_or(eps.len().saturating_sub(1));
                    RegulatorPlan::new(eps, eta_max, order, rel_tol)
                }
            }
            .map_err(|e| ctx.err(span.clone(), "oracle", e))?
        }
    };
    let quad_points = o.quad_points.unwrap_or(DEFAULT_QUAD_POINTS);
    if quad_points < magdip_core::spectral::MIN_QUAD_POINTS {
        return Err(ctx.err(
            span,
            "oracle.quad_points",
            format!("at least {} points are required", magdip_core::spectral::MIN_QUAD_POINTS),
        ));
    }
    Ok(OracleConfig { enabled: o.enabled, quad_points, plan })
}

fn build_tolerances(ctx: &Ctx<'_>, raw: Option<&Spanned<RawTolerances>>) -> Result<Tolerances, ScenarioError> {
    let mut tol = Tolerances::DEFAULT;
    let Some(raw) = raw else { return Ok(tol) };
    let t = raw.get_ref();
    for (value, slot, name) in [
        (t.validation, &mut tol.validation, "validation"),
        (t.resonance, &mut tol.resonance, "resonance"),
        (t.angular_oracle, &mut tol.angular_oracle, "angular_oracle"),
        (t.pv_oracle, &mut tol.pv_oracle, "pv_oracle"),
        (t.oracle_structure, &mut tol.oracle_structure, "oracle_structure"),
    ] {
        if let Some(v) = value {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ctx.err(Some(raw.span()), format!("tolerances.{name}"), "must be positive and finite"));
            }
            *slot = v;
        }
    }
    Ok(tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
outputs = ["K"]

[units]
mode = "dimensionless"

[dipole1]
energies = [0.0, 1.0]
[[dipole1.moment]]
row = 1
col = 0
re = [0.0, 0.0, 1.0]
[[dipole1.moment]]
row = 0
col = 1
re = [0.0, 0.0, 1.0]

[dipole2]
energies = [0.0, 1.0]
[[dipole2.moment]]
row = 1
col = 0
re = [0.0, 0.0, 1.0]
[[dipole2.moment]]
row = 0
col = 1
re = [0.0, 0.0, 1.0]

[geometry]
r = 1.0
direction = [0.0, 0.0, 1.0]
"#;

    #[test]
    fn minimal_resonant_scenario() {
        let s = parse_scenario(MINIMAL, "minimal.toml").unwrap();
        assert_eq!(s.unit_mode, UnitMode::Dimensionless);
        assert_eq!(s.dipole1.spec.dim(), 2);
        assert_eq!(s.outputs, vec![Output::K]);
        assert_eq!(s.scalar_terms(), vec![TermIndex::new(1, 0, 0, 1)]);
        assert!(s.sweep.is_none());
        assert_eq!(s.source_hash.len(), 64);
    }

    #[test]
    fn non_hermitian_moment_names_indices() {
        let text = MINIMAL.replacen("row = 0\ncol = 1\nre = [0.0, 0.0, 1.0]", "row = 0\ncol = 1\nre = [0.0, 0.0, 2.0]", 1);
        let err = parse_scenario(&text, "bad.toml").unwrap_err();
        assert_eq!(err.field, "dipole1.moment[0][1]");
        assert!(err.message.contains("(0,1)"), "{err}");
        assert_eq!(err.line, Some(13));
    }

    #[test]
    fn two_sweep_axes_rejected() {
        let text = format!(
            "{MINIMAL}\n[sweep.distance]\nmin = 0.1\nmax = 1.0\npoints = 3\n[sweep.detuning]\nmin = 0.0\nmax = 1.0\npoints = 3\n"
        );
        let err = parse_scenario(&text, "two.toml").unwrap_err();
        assert_eq!(err.field, "sweep");
        assert!(err.message.contains("distance, detuning"));
    }

    #[test]
    fn unknown_key_rejected_with_location() {
        let text = MINIMAL.replace("[geometry]\n", "[geometry]\nradius = 2.0\n");
        let err = parse_scenario(&text, "typo.toml").unwrap_err();
        assert!(err.message.contains("radius"), "{err}");
        assert!(err.line.is_some());
    }

    #[test]
    fn unknown_output_rejected() {
        let text = MINIMAL.replace("outputs = [\"K\"]", "outputs = [\"K\", \"spectrum\"]");
        assert!(parse_scenario(&text, "x.toml").is_err());
    }

    #[test]
    fn sweep_values() {
        let s = Sweep { axis: SweepAxis::Distance, min: 1e-3, max: 1e-1, points: 3, spacing: Spacing::Log };
        let v = s.values();
        assert!((v[1] - 1e-2).abs() < 1e-15);
        let s = Sweep { axis: SweepAxis::Detuning, min: -1.0, max: 1.0, points: 5, spacing: Spacing::Linear };
        assert_eq!(s.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn dicke_needs_distance_sweep() {
        let text = MINIMAL.replace("outputs = [\"K\"]", "outputs = [\"dicke\"]");
        assert_eq!(parse_scenario(&text, "d.toml").unwrap_err().field, "outputs");
    }

    #[test]
    fn si_units_convert() {
        let text = MINIMAL
            .replace("mode = \"dimensionless\"", "mode = \"si\"")
            .replace("energies = [0.0, 1.0]", "energies = [0.0, 1.0e9]\nenergy_unit = \"rad_per_s\"\nmoment_unit = \"bohr_magneton\"");
        let s = parse_scenario(&text, "si.toml").unwrap();
        assert!((s.dipole1.spec.energy(1) - 1e9 * PhysicalConstants::si().hbar()).abs() < 1e-40);
        assert!((s.dipole2.spec.moment(1, 0)[2].re - BOHR_MAGNETON).abs() < 1e-36);
    }
}
