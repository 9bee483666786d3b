use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use magdip::output::sha256_hex;
use magdip::{load_scenario, parse_scenario, run_scenario, RunOptions};
use magdip_core::coupling::TermIndex;
use magdip_core::{classical_coefficient, k_kernel, NaturalUnits, PhysicalConstants};

const TWO_LEVEL: &str = r#"
outputs = OUTPUTS

[units]
mode = "dimensionless"

[dipole1]
levels = ["g", "e"]
energies = [0.0, 1.0]
[[dipole1.moment]]
row = 1
col = 0
re = [0.0, 0.0, 1.0]
im = [0.0, 0.4, 0.0]
[[dipole1.moment]]
row = 0
col = 1
re = [0.0, 0.0, 1.0]
im = [0.0, -0.4, 0.0]

[dipole2]
levels = ["g", "e"]
energies = [0.0, 1.0]
[[dipole2.moment]]
row = 1
col = 0
re = [0.3, 0.0, 1.0]
[[dipole2.moment]]
row = 0
col = 1
re = [0.3, 0.0, 1.0]

[geometry]
r = 1.0
direction = [0.0, 0.0, 1.0]
"#;

fn scenario(outputs: &str, extra: &str) -> String {
    format!("{}{extra}", TWO_LEVEL.replace("OUTPUTS", outputs))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn magdip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magdip")).args(args).output().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn validate_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = write(tmp.path(), "ok.toml", &scenario(r#"["K"]"#, ""));
    let out = magdip(&["validate", ok.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let bad = scenario(r#"["K"]"#, "").replacen("im = [0.0, -0.4, 0.0]", "im = [0.0, 0.4, 0.0]", 1);
    let bad = write(tmp.path(), "bad.toml", &bad);
    let out = magdip(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("dipole1.moment[0][1]") && err.contains("(0,1)"), "{err}");
    assert!(err.contains("bad.toml:"), "{err}");

    let two = scenario(
        r#"["K"]"#,
        "[sweep.distance]\nmin = 0.1\nmax = 1.0\npoints = 2\n[sweep.orientation_angle]\nmin = 0.0\nmax = 1.0\npoints = 2\n",
    );
    let two = write(tmp.path(), "two.toml", &two);
    assert_eq!(magdip(&["validate", two.to_str().unwrap()]).status.code(), Some(2));

    let missing = tmp.path().join("missing.toml");
    assert_eq!(magdip(&["run", missing.to_str().unwrap(), "--out", "x"]).status.code(), Some(2));
}

#[test]
fn k_near_zero_distance_is_classical() {
    let tmp = tempfile::tempdir().unwrap();
    let text = scenario(r#"["K"]"#, "[sweep.distance]\nmin = 1e-8\nmax = 1.0\npoints = 5\nspacing = \"log\"\n");
    let s = parse_scenario(&text, "k.toml").unwrap();
    run_scenario(&s, tmp.path(), &RunOptions::default()).unwrap();
    let (h, rows) = read_csv(&tmp.path().join("K.csv"));
    assert_eq!(rows.len(), 5);
    let re: f64 = rows[0][col(&h, "re")].parse().unwrap();
    let im: f64 = rows[0][col(&h, "im")].parse().unwrap();
    let geom = s.geometry.with_distance(1e-8).unwrap();
    let cl = classical_coefficient(s.dipole1.spec.moment(1, 0), s.dipole2.spec.moment(0, 1), &geom, &s.constants);
    let rel = ((re - cl.re).powi(2) + (im - cl.im).powi(2)).sqrt() / cl.norm();
    assert!(rel < 1e-14, "rel {rel}");
    assert_eq!(rows[0][col(&h, "class")], "resonant");
}

#[test]
fn detuning_sweep_dissipative_part_vanishes_at_resonance() {
    let tmp = tempfile::tempdir().unwrap();
    let text = scenario(r#"["tensor"]"#, "[sweep.detuning]\nmin = -0.2\nmax = 0.2\npoints = 5\n");
    let s = parse_scenario(&text, "t.toml").unwrap();
    run_scenario(&s, tmp.path(), &RunOptions::default()).unwrap();
    let (h, rows) = read_csv(&tmp.path().join("tensor.csv"));
    let exchange: Vec<&Vec<String>> =
        rows.iter().filter(|r| r[col(&h, "y")] == "1" && r[col(&h, "x")] == "0" && r[col(&h, "u")] == "0" && r[col(&h, "v")] == "1").collect();
    assert_eq!(exchange.len(), 5);
    for r in &exchange {
        let detuning: f64 = r[col(&h, "detuning")].parse().unwrap();
        let gd = (r[col(&h, "gd_re")].parse::<f64>().unwrap(), r[col(&h, "gd_im")].parse::<f64>().unwrap());
        if detuning == 0.0 {
            assert_eq!(gd, (0.0, 0.0));
            assert_eq!(r[col(&h, "class")], "resonant");
        } else {
            assert!(gd.0.abs() + gd.1.abs() > 0.0);
            assert_eq!(r[col(&h, "class")], "non-resonant");
        }
    }
}

#[test]
fn oracle_columns_leave_closed_forms_untouched() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep = "[sweep.distance]\nmin = 0.2\nmax = 6.0\npoints = 4\n";
    let plain = parse_scenario(&scenario(r#"["J", "K"]"#, sweep), "a.toml").unwrap();
    let with = parse_scenario(&scenario(r#"["J", "K"]"#, &format!("{sweep}[oracle]\nenabled = true\n")), "b.toml").unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_scenario(&plain, &a, &RunOptions::default()).unwrap();
    let summary = run_scenario(&with, &b, &RunOptions::default()).unwrap();
    assert_eq!(summary.flagged_oracle_rows, 0);
    for name in ["J.csv", "K.csv"] {
        let (ha, ra) = read_csv(&a.join(name));
        let (hb, rb) = read_csv(&b.join(name));
        assert_eq!(hb[..ha.len()], ha[..]);
        assert!(hb.contains(&"oracle_status".to_string()));
        for (x, y) in ra.iter().zip(&rb) {
            assert_eq!(y[..x.len()], x[..]);
            assert_eq!(y.last().unwrap(), "ok");
        }
    }
}

#[test]
fn manifest_lists_every_file_with_its_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let text = scenario(
        r#"["J", "K", "tensor", "hamiltonian", "classical", "dicke", "rwa_compare"]"#,
        "[sweep.distance]\nmin = 1e-3\nmax = 1e-1\npoints = 9\nspacing = \"log\"\n",
    );
    let path = write(tmp.path(), "s.toml", &text);
    let out = tmp.path().join("out");
    let res = magdip(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_sha256"], sha256_hex(text.as_bytes()));
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), 5 + 2 * 9);
    for f in files {
        let bytes = std::fs::read(out.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"], sha256_hex(&bytes));
    }
    let slope = manifest["dicke_slope"].as_f64().unwrap();
    assert!((slope - 2.0).abs() < 0.02, "slope {slope}");

    let (h, rows) = read_csv(&out.join("hamiltonian/point_0000.csv"));
    assert_eq!(h[..4], ["row", "basis", "re(g:g)", "im(g:g)"]);
    assert_eq!(rows.iter().map(|r| r[1].as_str()).collect::<Vec<_>>(), ["g:g", "g:e", "e:g", "e:e"]);
}

#[test]
fn dimensionless_flag_rescales_si_run() {
    let tmp = tempfile::tempdir().unwrap();
    let text = scenario(r#"["K"]"#, "")
        .replace("mode = \"dimensionless\"", "mode = \"si\"\nreference_length = 0.05")
        .replace("energies = [0.0, 1.0]", "energies = [0.0, 2.0e9]\nenergy_unit = \"rad_per_s\"\nmoment_unit = \"bohr_magneton\"")
        .replace("r = 1.0", "r = 0.02");
    let path = write(tmp.path(), "si.toml", &text);
    let s = load_scenario(&path).unwrap();
    let (si_dir, nat_dir) = (tmp.path().join("si"), tmp.path().join("nat"));
    run_scenario(&s, &si_dir, &RunOptions::default()).unwrap();
    run_scenario(&s, &nat_dir, &RunOptions { dimensionless: true, threads: Some(2) }).unwrap();
    let (h, si) = read_csv(&si_dir.join("K.csv"));
    let (_, nat) = read_csv(&nat_dir.join("K.csv"));
    let units = NaturalUnits::new(0.05, PhysicalConstants::si()).unwrap();
    let k_si: f64 = si[0][col(&h, "re")].parse().unwrap();
    let k_nat: f64 = nat[0][col(&h, "re")].parse().unwrap();
    assert!((k_nat * units.frequency() - k_si).abs() <= 1e-12 * k_si.abs());
    let eta_si: f64 = si[0][col(&h, "eta")].parse().unwrap();
    let eta_nat: f64 = nat[0][col(&h, "eta")].parse().unwrap();
    assert!((eta_si - eta_nat).abs() <= 1e-14 * eta_si);
    let direct = k_kernel(2e9, &s.geometry, s.dipole1.spec.moment(1, 0), s.dipole2.spec.moment(0, 1), &s.constants);
    assert!((direct.re - k_si).abs() <= 1e-15 * k_si.abs());
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(nat_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["units"], "natural");
    assert_eq!(manifest["length_unit"], 0.05);
}

#[test]
fn sweep_axes_follow_documented_conventions() {
    let tmp = tempfile::tempdir().unwrap();
    let base = parse_scenario(&scenario(r#"["tensor"]"#, ""), "base.toml").unwrap();
    run_scenario(&base, &tmp.path().join("base"), &RunOptions::default()).unwrap();
    let (h, base_rows) = read_csv(&tmp.path().join("base/tensor.csv"));
    let data = |r: &Vec<String>| r[col(&h, "y")..].to_vec();

    // zero rotation and unit frequency ratio reproduce the unswept point
    for (axis, value) in [("orientation_angle", 0.0), ("frequency_ratio", 1.0)] {
        let text = scenario(r#"["tensor"]"#, &format!("[sweep.{axis}]\nmin = {value:?}\nmax = 2.0\npoints = 2\n"));
        let s = parse_scenario(&text, "s.toml").unwrap();
        let dir = tmp.path().join(axis);
        run_scenario(&s, &dir, &RunOptions::default()).unwrap();
        let (_, rows) = read_csv(&dir.join("tensor.csv"));
        assert_eq!(rows.len(), 2 * base_rows.len());
        for (a, b) in base_rows.iter().zip(&rows) {
            assert_eq!(data(a), data(b), "{axis}");
        }
        // the second point differs
        assert_ne!(data(&rows[base_rows.len() + 6]), data(&base_rows[6]));
    }

    // frequency ratio 2 doubles dipole 2's transition frequency
    let text = scenario(r#"["tensor"]"#, "[sweep.frequency_ratio]\nmin = 2.0\nmax = 3.0\npoints = 2\n");
    let s = parse_scenario(&text, "r.toml").unwrap();
    let dir = tmp.path().join("ratio");
    run_scenario(&s, &dir, &RunOptions::default()).unwrap();
    let (h, rows) = read_csv(&dir.join("tensor.csv"));
    let term = rows.iter().find(|r| r[col(&h, "u")] == "1" && r[col(&h, "v")] == "0").unwrap();
    assert_eq!(term[col(&h, "omega2")].parse::<f64>().unwrap(), 2.0);
}

#[test]
fn selected_terms_restrict_tensor_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let text = scenario(r#"["tensor", "J"]"#, "").replace("[units]", "terms = [[1, 0, 0, 1], [0, 0, 1, 1]]\n\n[units]");
    let s = parse_scenario(&text, "terms.toml").unwrap();
    assert_eq!(s.scalar_terms(), vec![TermIndex::new(1, 0, 0, 1), TermIndex::new(0, 0, 1, 1)]);
    run_scenario(&s, tmp.path(), &RunOptions::default()).unwrap();
    let (h, rows) = read_csv(&tmp.path().join("tensor.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][col(&h, "class")], "permanent");
    let out_of_range = text.replace("[0, 0, 1, 1]", "[0, 0, 2, 1]");
    assert_eq!(parse_scenario(&out_of_range, "x.toml").unwrap_err().field, "terms");
}

#[test]
fn oracle_check_prints_table() {
    let tmp = tempfile::tempdir().unwrap();
    let text = scenario(r#"["K"]"#, "[sweep.distance]\nmin = 0.3\nmax = 7.0\npoints = 3\n");
    let path = write(tmp.path(), "o.toml", &text);
    let out = magdip(&["--threads", "2", "oracle-check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8_lossy(&out.stdout);
    assert_eq!(table.matches(" OK").count(), 6, "{table}");
    assert!(table.contains("6 comparisons: 6 ok"));

    // a regulator plan too coarse to converge is reported as non-convergence
    let coarse = format!("{text}[oracle]\nepsilons = [0.4, 0.3, 0.2]\neta_max = 200.0\nrel_tol = 1e-12\n");
    let path = write(tmp.path(), "c.toml", &coarse);
    let out = magdip(&["oracle-check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn shipped_scenarios_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            load_scenario(&path).unwrap_or_else(|e| panic!("{e}"));
            n += 1;
        }
    }
    assert!(n >= 2);
}
