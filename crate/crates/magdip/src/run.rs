//! Sweep execution: evaluates every requested quantity at each sweep point and
//! writes the output bundle.

use std::path::Path;

use magdip_core::coupling::{classify, TermIndex};
use magdip_core::hamiltonian::{assemble_with, classical_hamiltonian, dicke_deviation, rwa_filter};
use magdip_core::{
    coupling_tensor, j_coupling, k_kernel, Complex64, DipoleSpec, NaturalUnits, PairGeometry,
    PhysicalConstants, UnitVec3,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::RunError;
use crate::oracle::{j_oracle, k_oracle, OracleOutcome};
use crate::output::{basis_labels, float, matrix_table, write_file, CsvTable, FileEntry};
use crate::scenario::{Output, Scenario, Spacing, SweepAxis, UnitMode};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Report everything in natural units (`μ₀ = ħ = c = 1`, length unit
    /// `units.reference_length` or the separation).
    pub dimensionless: bool,
    /// Worker threads for sweep points; `None` uses the rayon default.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub files: Vec<FileEntry>,
    pub points: usize,
    /// Oracle rows whose status is not `ok` or `skipped`.
    pub flagged_oracle_rows: usize,
    pub dicke_slope: Option<f64>,
}

/// The scenario in the units the run reports in, with its sweep expanded.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub constants: PhysicalConstants,
    pub natural: bool,
    pub length_unit: Option<f64>,
    pub spec1: DipoleSpec,
    pub spec2: DipoleSpec,
    pub geometry: PairGeometry,
    pub axis: Option<SweepAxis>,
    pub values: Vec<f64>,
}

pub fn prepare(s: &Scenario, dimensionless: bool) -> Result<Prepared, RunError> {
    let point_err = |source| RunError::Point { index: 0, axis: "none", value: 0.0, source };
    let mut values = s.sweep.as_ref().map_or_else(|| vec![0.0], |sw| sw.values());
    let axis = s.sweep.as_ref().map(|sw| sw.axis);
    if dimensionless && s.unit_mode == UnitMode::Si {
        let length = s.reference_length.unwrap_or(s.geometry.r());
        let units = NaturalUnits::new(length, s.constants).map_err(point_err)?;
        match axis {
            Some(SweepAxis::Distance) => values.iter_mut().for_each(|v| *v /= units.length()),
            Some(SweepAxis::Detuning) => values.iter_mut().for_each(|v| *v /= units.frequency()),
            _ => {}
        }
        Ok(Prepared {
            constants: PhysicalConstants::dimensionless(),
            natural: true,
            length_unit: Some(length),
            spec1: units.spec_to_natural(&s.dipole1.spec).map_err(point_err)?,
            spec2: units.spec_to_natural(&s.dipole2.spec).map_err(point_err)?,
            geometry: units.geometry_to_natural(&s.geometry).map_err(point_err)?,
            axis,
            values,
        })
    } else {
        Ok(Prepared {
            constants: s.constants,
            natural: s.unit_mode == UnitMode::Dimensionless,
            length_unit: None,
            spec1: s.dipole1.spec.clone(),
            spec2: s.dipole2.spec.clone(),
            geometry: s.geometry,
            axis,
            values,
        })
    }
}

fn orientation_axis(e_r: &UnitVec3) -> Result<UnitVec3, magdip_core::Error> {
    UnitVec3::normalize(e_r.cross(&UnitVec3::Z)).or_else(|_| UnitVec3::normalize(e_r.cross(&UnitVec3::X)))
}

impl Prepared {
    pub fn axis_name(&self) -> &'static str {
        self.axis.map_or("point", |a| a.name())
    }

    /// Dipoles and geometry at sweep point `index`.
    pub fn point(&self, index: usize) -> Result<(DipoleSpec, DipoleSpec, PairGeometry), RunError> {
        let value = self.values[index];
        let wrap = |source| RunError::Point { index, axis: self.axis_name(), value, source };
        let (spec1, mut spec2, mut geom) = (self.spec1.clone(), self.spec2.clone(), self.geometry);
        match self.axis {
            None => {}
            Some(SweepAxis::Distance) => geom = geom.with_distance(value).map_err(wrap)?,
            Some(SweepAxis::Detuning) => {
                let mut e = spec2.energies().to_vec();
                let top = (0..e.len()).fold(0, |best, i| if e[i] > e[best] { i } else { best });
                e[top] += self.constants.hbar() * value;
                spec2 = spec2.with_energies(e).map_err(wrap)?;
            }
            Some(SweepAxis::FrequencyRatio) => {
                let gap = |s: &DipoleSpec| {
                    let lo = s.energies().iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = s.energies().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    (lo, hi - lo)
                };
                let (_, gap1) = gap(&spec1);
                let (lo2, gap2) = gap(&spec2);
                if gap2 == 0.0 {
                    return Err(RunError::Invalid("frequency_ratio sweep needs non-degenerate levels in dipole2".into()));
                }
                let scale = value * gap1 / gap2;
                let e = spec2.energies().iter().map(|x| lo2 + (x - lo2) * scale).collect();
                spec2 = spec2.with_energies(e).map_err(wrap)?;
            }
            Some(SweepAxis::OrientationAngle) => {
                let n = orientation_axis(&geom.direction()).map_err(wrap)?;
                spec2 = spec2.rotated(&n.rotation(value)).map_err(wrap)?;
            }
        }
        Ok((spec1, spec2, geom))
    }
}

fn term_fields(idx: TermIndex) -> [String; 4] {
    [idx.y.to_string(), idx.x.to_string(), idx.u.to_string(), idx.v.to_string()]
}

fn oracle_fields(o: &OracleOutcome, with_estimate: bool) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(float).unwrap_or_default();
    let mut f = vec![opt(o.value.map(|z| z.re)), opt(o.value.map(|z| z.im)), opt(o.rel_err)];
    if with_estimate {
        f.push(opt(o.error_estimate));
    }
    f.push(o.status.label().to_string());
    f
}

#[derive(Default)]
struct PointRows {
    j: Vec<Vec<String>>,
    k: Vec<Vec<String>>,
    tensor: Vec<Vec<String>>,
    rwa: Option<Vec<String>>,
    hamiltonian: Option<magdip_core::HamiltonianMatrix>,
    classical: Option<magdip_core::HamiltonianMatrix>,
    flagged: usize,
}

fn check_finite(index: usize, quantity: &'static str, z: Complex64) -> Result<(), RunError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(RunError::NonFinite { index, quantity })
    }
}

fn evaluate_point(s: &Scenario, p: &Prepared, index: usize) -> Result<PointRows, RunError> {
    let (spec1, spec2, geom) = p.point(index)?;
    let value = p.values[index];
    let consts = &p.constants;
    let wrap = |source| RunError::Point { index, axis: p.axis_name(), value, source };
    let lead = [index.to_string(), float(value)];
    let mut rows = PointRows::default();
    let tol = &s.tolerances;

    for idx in s.scalar_terms() {
        let class = classify(&spec1, &spec2, idx, tol.resonance).map_err(wrap)?;
        let (m1, m2) = (spec1.moment(idx.y, idx.x), spec2.moment(idx.u, idx.v));
        let omega = (spec1.energy(idx.y) - spec1.energy(idx.x)) / consts.hbar();
        let eta = consts.eta(omega, geom.r());
        let base = |z: Complex64| {
            let mut f = lead.to_vec();
            f.extend(term_fields(idx));
            f.extend([class.label().to_string(), float(omega), float(eta), float(z.re), float(z.im)]);
            f
        };
        if s.wants(Output::J) {
            let j = j_coupling(omega, &geom, m1, m2, consts);
            check_finite(index, "J", j)?;
            let mut f = base(j);
            if s.oracle.enabled {
                let o = j_oracle(omega, &geom, m1, m2, consts, s.oracle.quad_points, tol);
                rows.flagged += o.status.flagged() as usize;
                f.extend(oracle_fields(&o, false));
            }
            rows.j.push(f);
        }
        if s.wants(Output::K) {
            let k = k_kernel(omega, &geom, m1, m2, consts);
            check_finite(index, "K", k)?;
            let mut f = base(k);
            if s.oracle.enabled {
                let o = k_oracle(omega, &geom, m1, m2, consts, &s.oracle.plan, tol);
                rows.flagged += o.status.flagged() as usize;
                f.extend(oracle_fields(&o, true));
            }
            rows.k.push(f);
        }
    }

    let needs_tensor = [Output::Tensor, Output::Hamiltonian, Output::RwaCompare].iter().any(|o| s.wants(*o));
    if needs_tensor {
        let tensor = coupling_tensor(&spec1, &spec2, &geom, consts).map_err(wrap)?;
        if s.wants(Output::Tensor) {
            let terms: Vec<TermIndex> = s.terms.clone().unwrap_or_else(|| tensor.terms().collect());
            for idx in terms {
                let (gp, gd) = (tensor.principal(idx), tensor.dissipative(idx));
                check_finite(index, "G(P)", gp)?;
                check_finite(index, "G(D)", gd)?;
                let mut f = lead.to_vec();
                f.extend(term_fields(idx));
                f.extend([
                    tensor.class(idx, tol.resonance).label().to_string(),
                    float(tensor.omega1(idx.y, idx.x)),
                    float(tensor.omega2(idx.u, idx.v)),
                    float(gp.re),
                    float(gp.im),
                    float(gd.re),
                    float(gd.im),
                ]);
                rows.tensor.push(f);
            }
        }
        let h = assemble_with(&tensor, s.include_dissipative);
        if s.wants(Output::RwaCompare) {
            let filtered = rwa_filter(&tensor, tol.resonance);
            let dropped = tensor
                .terms()
                .filter(|&i| tensor.total(i) != Complex64::new(0.0, 0.0) && filtered.total(i) == Complex64::new(0.0, 0.0))
                .count();
            let hr = assemble_with(&filtered, s.include_dissipative);
            let full = h.frobenius_norm();
            let rel = if full > 0.0 { (&h - &hr).frobenius_norm() / full } else { 0.0 };
            let mut f = lead.to_vec();
            f.extend([float(full), float(hr.frobenius_norm()), float(rel), dropped.to_string(), float(hr.hermiticity_defect())]);
            rows.rwa = Some(f);
        }
        if s.wants(Output::Hamiltonian) {
            rows.hamiltonian = Some(h);
        }
    }
    if s.wants(Output::Classical) {
        rows.classical = Some(classical_hamiltonian(&spec1, &spec2, &geom, consts));
    }
    Ok(rows)
}

#[derive(Serialize)]
struct ManifestConstants {
    mu0: f64,
    hbar: f64,
    c: f64,
}

#[derive(Serialize)]
struct ManifestSweep {
    axis: &'static str,
    min: f64,
    max: f64,
    points: usize,
    spacing: &'static str,
}

#[derive(Serialize)]
struct ManifestOracle {
    enabled: bool,
    quad_points: usize,
    epsilons: Vec<f64>,
    eta_max: f64,
    extrapolation_order: usize,
    rel_tol: f64,
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    config_sha256: String,
    units: &'static str,
    length_unit: Option<f64>,
    constants: ManifestConstants,
    sweep: Option<ManifestSweep>,
    outputs: Vec<&'static str>,
    include_dissipative: bool,
    oracle: ManifestOracle,
    flagged_oracle_rows: usize,
    dicke_slope: Option<f64>,
    files: Vec<FileEntry>,
}

fn scalar_header(axis: &str, oracle: bool, estimate: bool) -> Vec<String> {
    let mut h: Vec<String> =
        ["index", axis, "y", "x", "u", "v", "class", "omega", "eta", "re", "im"].map(String::from).to_vec();
    if oracle {
        h.extend(["oracle_re", "oracle_im", "oracle_rel_err"].map(String::from));
        if estimate {
            h.push("oracle_error_estimate".into());
        }
        h.push("oracle_status".into());
    }
    h
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Invalid(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every sweep point and writes the CSV files, matrix files and
/// `manifest.json` into `out_dir`.
pub fn run_scenario(s: &Scenario, out_dir: &Path, opts: &RunOptions) -> Result<RunSummary, RunError> {
    let p = prepare(s, opts.dimensionless)?;
    let results: Vec<Result<PointRows, RunError>> =
        with_pool(opts.threads, || (0..p.values.len()).into_par_iter().map(|i| evaluate_point(s, &p, i)).collect())?;
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    std::fs::create_dir_all(out_dir).map_err(|e| RunError::Io { path: out_dir.to_path_buf(), source: e })?;
    let axis = p.axis_name();
    let mut files = Vec::new();
    let flagged: usize = results.iter().map(|r| r.flagged).sum();

    for (output, name, estimate) in [(Output::J, "J.csv", false), (Output::K, "K.csv", true)] {
        if s.wants(output) {
            let mut t = CsvTable::new(name, &scalar_header(axis, s.oracle.enabled, estimate));
            for r in &results {
                for row in if output == Output::J { &r.j } else { &r.k } {
                    t.row(row);
                }
            }
            files.push(t.finish(out_dir)?);
        }
    }
    if s.wants(Output::Tensor) {
        let header = ["index", axis, "y", "x", "u", "v", "class", "omega1", "omega2", "gp_re", "gp_im", "gd_re", "gd_im"];
        let mut t = CsvTable::new("tensor.csv", &header.map(String::from));
        results.iter().flat_map(|r| &r.tensor).for_each(|row| t.row(row));
        files.push(t.finish(out_dir)?);
    }
    if s.wants(Output::RwaCompare) {
        let header = ["index", axis, "frobenius_full", "frobenius_rwa", "relative_change", "dropped_terms", "hermiticity_defect_rwa"];
        let mut t = CsvTable::new("rwa_compare.csv", &header.map(String::from));
        results.iter().filter_map(|r| r.rwa.as_ref()).for_each(|row| t.row(row));
        files.push(t.finish(out_dir)?);
    }
    let labels = basis_labels(&s.dipole1.levels, &s.dipole2.levels);
    for (i, r) in results.iter().enumerate() {
        if let Some(h) = &r.hamiltonian {
            files.push(matrix_table(format!("hamiltonian/point_{i:04}.csv"), h, &labels).finish(out_dir)?);
        }
        if let Some(h) = &r.classical {
            files.push(matrix_table(format!("classical/point_{i:04}.csv"), h, &labels).finish(out_dir)?);
        }
    }

    let mut dicke_slope = None;
    if s.wants(Output::Dicke) {
        let wrap = |source| RunError::Point { index: 0, axis, value: p.values[0], source };
        let report = dicke_deviation(&p.spec1, &p.spec2, p.geometry.direction(), &p.values, &p.constants).map_err(wrap)?;
        let header = ["index", "distance", "eta_max", "frobenius", "max_entry"];
        let mut t = CsvTable::new("dicke.csv", &header.map(String::from));
        for (i, pt) in report.points.iter().enumerate() {
            t.row(&[i.to_string(), float(pt.r), float(pt.eta_max), float(pt.frobenius), float(pt.max_entry)]);
        }
        files.push(t.finish(out_dir)?);
        dicke_slope = report.slope;
    }

    files.sort_by(|a, b| a.name.cmp(&b.name));
    let plan = &s.oracle.plan;
    let manifest = Manifest {
        tool: "magdip",
        version: env!("CARGO_PKG_VERSION"),
        core_version: magdip_core::VERSION,
        config_sha256: s.source_hash.clone(),
        units: if p.natural { "natural" } else { "si" },
        length_unit: p.length_unit,
        constants: ManifestConstants { mu0: p.constants.mu0(), hbar: p.constants.hbar(), c: p.constants.c() },
        sweep: s.sweep.as_ref().map(|sw| ManifestSweep {
            axis: sw.axis.name(),
            min: p.values[0],
            max: *p.values.last().expect("sweep has points"),
            points: sw.points,
            spacing: match sw.spacing {
                Spacing::Linear => "linear",
                Spacing::Log => "log",
            },
        }),
        outputs: s.outputs.iter().map(|o| o.name()).collect(),
        include_dissipative: s.include_dissipative,
        oracle: ManifestOracle {
            enabled: s.oracle.enabled,
            quad_points: s.oracle.quad_points,
            epsilons: plan.epsilons().to_vec(),
            eta_max: plan.eta_max(),
            extrapolation_order: plan.extrapolation_order(),
            rel_tol: plan.rel_tol(),
        },
        flagged_oracle_rows: flagged,
        dicke_slope,
        files: files.clone(),
    };
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serialises");
    json.push(b'\n');
    write_file(out_dir, "manifest.json", &json)?;

    Ok(RunSummary { files, points: p.values.len(), flagged_oracle_rows: flagged, dicke_slope })
}
