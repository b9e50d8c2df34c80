use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

struct Run {
    code: i32,
    json: Value,
}

fn slipflow(out: &Path, args: &[&str]) -> Run {
    let o = Command::new(env!("CARGO_BIN_EXE_slipflow"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("SLIPFLOW_OUT_DIR")
        .output()
        .expect("run slipflow");
    let stdout = String::from_utf8(o.stdout).unwrap();
    let json = serde_json::from_str(&stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {stdout}"));
    Run { code: o.status.code().unwrap(), json }
}

fn check_schema(name: &str, v: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(v).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{name} schema violations: {errors:?}\n{v:#}");
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn check_manifest(dir: &Path, command: &str) -> Value {
    let m = read_json(&dir.join(format!("{}_manifest.json", command.replace('-', "_"))));
    check_schema("manifest", &m);
    for f in m["outputs"].as_array().unwrap() {
        assert!(dir.join(f.as_str().unwrap()).exists(), "listed output {f} missing");
    }
    m
}

fn field_psi(path: &Path) -> Vec<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["r", "theta", "psi", "v_r", "v_theta"]);
    let mut rows: Vec<Vec<f64>> = vec![];
    let mut last_r = f64::NAN;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let r: f64 = rec[0].parse().unwrap();
        if r != last_r {
            rows.push(vec![]);
            last_r = r;
        }
        rows.last_mut().unwrap().push(rec[2].parse().unwrap());
    }
    rows
}

#[test]
fn mu_c_reference_value() {
    let dir = tempfile::tempdir().unwrap();
    let r = slipflow(dir.path(), &["mu-c", "1", "3", "5"]);
    assert_eq!(r.code, 0);
    check_schema("mu_c", &r.json);
    assert!((r.json["mu_c_closed"].as_f64().unwrap() - 1.3404).abs() < 2e-4);
    assert!(r.json["mu_c_oracle"].is_null());
    let m = check_manifest(dir.path(), "mu-c");
    assert_eq!(m["command"], "mu-c");
}

#[test]
fn mu_c_oracle_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let r = slipflow(dir.path(), &["mu-c", "2", "6", "5", "--oracle"]);
    assert_eq!(r.code, 0);
    check_schema("mu_c", &r.json);
    assert!(r.json["discrepancy"].as_f64().unwrap() < 1e-8);
}

#[test]
fn invalid_geometry_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let r = slipflow(dir.path(), &["mu-c", "1", "1", "5"]);
    assert_eq!(r.code, 2);
    check_schema("error", &r.json);
    assert_eq!(r.json["error"], "InvalidGeometry");
    let r = slipflow(dir.path(), &["mu-c", "1", "3"]);
    assert_eq!(r.code, 2);
    check_schema("error", &r.json);
}

#[test]
fn eigen_examples() {
    let dir = tempfile::tempdir().unwrap();
    let mc = "1.3403712354824624";
    let r = slipflow(dir.path(), &["eigen", "1", "3", "5", mc]);
    assert_eq!(r.code, 0);
    check_schema("eigen", &r.json);
    assert!(r.json["lambda1"].as_f64().unwrap().abs() < 1e-5);

    let r48 = slipflow(dir.path(), &["eigen", "1", "3", "5", "1.2", "-N", "48", "--profile"]);
    let r64 = slipflow(dir.path(), &["eigen", "1", "3", "5", "1.2", "-N", "64"]);
    let (l48, l64) = (r48.json["lambda1"].as_f64().unwrap(), r64.json["lambda1"].as_f64().unwrap());
    assert!(l48 > 0.0);
    assert!((l48 - l64).abs() < 1e-8, "{l48} vs {l64}");
    assert_eq!(r48.json["r"].as_array().unwrap().len(), 49);
    let m = check_manifest(dir.path(), "eigen");
    assert_eq!(m["resolution"]["N"], 64);
}

#[test]
fn eigen_rejects_huge_viscosity() {
    let dir = tempfile::tempdir().unwrap();
    let r = slipflow(dir.path(), &["eigen", "1", "3", "5", "1000"]);
    assert_eq!(r.code, 2);
    check_schema("error", &r.json);
}

#[test]
fn bifurcate_phases_are_rotations() {
    let dir = tempfile::tempdir().unwrap();
    let r = slipflow(dir.path(), &["bifurcate", "1", "3", "5", "--mu", "1.3403", "--phases", "4", "--ntheta", "64"]);
    assert_eq!(r.code, 0, "{}", r.json);
    check_schema("bifurcate", &r.json);
    assert_eq!(r.json["classification"], "supercritical");
    assert!(r.json["l"].as_f64().unwrap() < 0.0);
    let fields: Vec<Vec<Vec<f64>>> = (0..4).map(|j| field_psi(&dir.path().join(format!("field_{j}.csv")))).collect();
    let scale = fields[0].iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for (j, f) in fields.iter().enumerate() {
        // phase 2 pi j / 4 shifts the lattice by 16 j columns
        for (row0, row) in fields[0].iter().zip(f) {
            for k in 0..64 {
                assert!((row[k] - row0[(k + 16 * j) % 64]).abs() < 1e-10 * scale);
            }
        }
        let svg = fs::read_to_string(dir.path().join(format!("field_{j}.svg"))).unwrap();
        assert!(svg.starts_with("<svg") && svg.matches("<path").count() == 11);
    }
    check_manifest(dir.path(), "bifurcate");
}

#[test]
fn bifurcate_single_phase_first_harmonic_is_even() {
    let dir = tempfile::tempdir().unwrap();
    let r = slipflow(dir.path(), &["bifurcate", "1", "3", "5", "--mu", "1.3403", "--ntheta", "32"]);
    assert_eq!(r.code, 0);
    let f = field_psi(&dir.path().join("field_0.csv"));
    for row in &f {
        // odd part projected on sin(theta) must vanish
        let s: f64 = (0..32)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 32.0;
                (row[k] - row[(32 - k) % 32]) * th.sin()
            })
            .sum();
        assert!(s.abs() < 1e-10, "{s}");
    }
}

#[test]
fn bifurcate_without_branch_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let r = slipflow(dir.path(), &["bifurcate", "1", "3", "5", "--mu", "1.5"]);
    assert_eq!(r.code, 4);
    check_schema("error", &r.json);
    assert!(r.json["message"].as_str().unwrap().contains("no bifurcated states"));
}

#[test]
fn simulate_stable_preset_matches_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let r = slipflow(dir.path(), &["simulate", "--preset", "stable"]);
    assert_eq!(r.code, 0, "{}", r.json);
    check_schema("simulate_run", &r.json);
    let g = r.json["growth_rate"].as_f64().unwrap();
    assert!(g < 0.0);
    assert!(r.json["growth_rate_rel_error"].as_f64().unwrap() < 1e-3);
    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,E3,E1,E2,max_psi,E3_mode1,"));
    assert_eq!(traj.lines().count(), 102);
    assert!(dir.path().join("final.csv").exists());
    check_manifest(dir.path(), "simulate");
}

#[test]
fn simulate_is_deterministic() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = d1.path().join("run.toml");
    fs::write(&cfg, "preset = \"stable\"\nmu_factor = 1.5\nntheta = 16\nt_end = 0.2\nsnapshot_every = 10\n").unwrap();
    slipflow(d1.path(), &["simulate", cfg.to_str().unwrap()]);
    slipflow(d2.path(), &["simulate", cfg.to_str().unwrap()]);
    for f in ["trajectory.csv", "final.csv", "snapshot_000010.csv", "diagnostics.json", "simulate_manifest.json"] {
        assert_eq!(fs::read(d1.path().join(f)).unwrap(), fs::read(d2.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn simulate_escape_preset_slope() {
    let dir = tempfile::tempdir().unwrap();
    let r = slipflow(dir.path(), &["simulate", "--preset", "escape"]);
    assert_eq!(r.code, 0, "{}", r.json);
    check_schema("simulate_escape", &r.json);
    assert!(r.json["slope_rel_error"].as_f64().unwrap() < 0.05);
    assert!(dir.path().join("escape.csv").exists());
}

#[test]
fn simulate_supercritical_preset_saturates_near_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let r = slipflow(dir.path(), &["simulate", "--preset", "supercritical"]);
    assert_eq!(r.code, 0, "{}", r.json);
    check_schema("simulate_run", &r.json);
    assert!(r.json["prediction_rel_diff"].as_f64().unwrap() < 0.1, "{}", r.json);
}

#[test]
fn simulate_cfl_violation_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfl.toml");
    fs::write(&cfg, "preset = \"stable\"\ndelta = 100.0\n").unwrap();
    let r = slipflow(dir.path(), &["simulate", cfg.to_str().unwrap()]);
    assert_eq!(r.code, 5);
    check_schema("error", &r.json);
    assert_eq!(r.json["error"], "CflViolation");
}

#[test]
fn simulate_bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "dt = 0.01\nwhatever = 3\n").unwrap();
    let r = slipflow(dir.path(), &["simulate", cfg.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    let r = slipflow(dir.path(), &["simulate", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(r.code, 2);
}

const SPEC: &str = "a = 1.0\nn = 32\n[alpha]\nmin = 5.0\nmax = 15.0\ncount = 2\n[b]\nmin = 5.0\nmax = 15.0\ncount = 2\n";

#[test]
fn sweep_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, SPEC).unwrap();
    let r = slipflow(dir.path(), &["sweep", spec.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.json);
    check_schema("sweep", &r.json);
    assert_eq!(r.json["rows"], 4);
    let csv1 = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv1.starts_with("alpha,b,mu_c,lambda1,l,class,status\n"));
    let man1 = fs::read(dir.path().join("sweep_manifest.json")).unwrap();
    check_manifest(dir.path(), "sweep");

    let r = slipflow(dir.path(), &["sweep", spec.to_str().unwrap(), "--resume"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json["reused"], 4);
    assert_eq!(fs::read_to_string(dir.path().join("sweep.csv")).unwrap(), csv1);
    assert_eq!(fs::read(dir.path().join("sweep_manifest.json")).unwrap(), man1);

    fs::write(&spec, SPEC.replace("n = 32", "n = 40")).unwrap();
    let r = slipflow(dir.path(), &["sweep", spec.to_str().unwrap(), "--resume"]);
    assert_eq!(r.code, 2);
}

#[test]
fn sweep_empty_range_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, SPEC.replacen("count = 2", "count = 0", 1)).unwrap();
    let r = slipflow(dir.path(), &["sweep", spec.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    check_schema("error", &r.json);
    assert_eq!(r.json["error"], "InvalidSpec");
}

#[test]
fn boundary_reports_no_flip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, SPEC.replacen("count = 2", "count = 1", 1)).unwrap();
    let r = slipflow(dir.path(), &["boundary", spec.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.json);
    check_schema("boundary", &r.json);
    assert_eq!(r.json["no_flip"].as_array().unwrap().len() + r.json["points"].as_u64().unwrap() as usize, 1);
    check_manifest(dir.path(), "boundary");
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_slipflow"))
        .args(["mu-c", "1", "3", "5"])
        .env("SLIPFLOW_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("mu_c.json").exists());
}
