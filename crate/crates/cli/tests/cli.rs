use std::path::Path;
use std::process::{Command, Output};

fn mhd2d(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("case.cfg");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_mhd2d"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .arg("--quiet")
        .env("MHD2D_THREADS", "2")
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn shear_run_decays_like_the_heat_equation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "schema_version = 1\n\
               grid.n = 32\n\
               ic.kind = shear\n\
               solver.dt = 1e-3\n\
               solver.t_end = 0.5\n\
               diagnostics.every = 50\n\
               output.formats = csv, json\n\
               assert.energy_residual = 1e-8\n";
    let o = mhd2d(dir.path(), cfg, &["run"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let text = std::fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let (it, iu) = (0, header.iter().position(|h| *h == "l2_u").unwrap());
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let l0 = 1.0 * std::f64::consts::PI * 2.0_f64.sqrt();
        let want = l0 * (-v[it]).exp();
        assert!((v[iu] - want).abs() <= 1e-8 * l0, "t = {}: {} vs {}", v[it], v[iu], want);
        rows += 1;
    }
    assert_eq!(rows, 11);
    let summary = json(&dir.path().join("out/summary.json"));
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["kind"], "run");
}

#[test]
fn diag_recovers_a_synthetic_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("# config_hash = synthetic\n# seed = none\n");
    csv += "time,l2_u,l2_b,grad_l2_u,grad_l2_b,hs,hdot_neg,low_freq_energy,g_value,energy_residual\n";
    for i in 0..=200 {
        let t = 0.1 * i as f64;
        let l2 = (std::f64::consts::E + t).powf(-0.5);
        let shell = 0.1 * (1.0 + t).powf(-0.6);
        csv += &format!("{t},{l2},0,1,0,1,1,{shell},0,0\n");
    }
    let path = dir.path().join("synthetic.csv");
    std::fs::write(&path, csv).unwrap();
    let cfg = "schema_version = 1\n\
               solver.t_end = 20\n\
               diagnostics.eps = 0.3\n\
               diagnostics.fit_start = 2\n\
               diagnostics.fit_end = 20\n\
               assert.kappa = 0.5\n\
               assert.kappa_tol = 1e-9\n\
               assert.envelope_misfit = 1e-9\n";
    let o = mhd2d(dir.path(), cfg, &["diag", "--csv", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let r = json(&dir.path().join("out/diag.json"));
    assert_eq!(r["report"]["source_config_hash"], "synthetic");
    let k = r["report"]["analysis"]["decay"]["kappa_hat"].as_f64().unwrap();
    assert!((k - 0.5).abs() < 1e-10, "{k}");
}

#[test]
fn ineq_gn_at_q_two_is_an_identity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "schema_version = 1\n\
               ineq.suites = gn\n\
               ineq.samples = 100\n\
               ineq.kmax = 8\n\
               ineq.resolutions = 64, 128\n\
               ineq.q = 2\n\
               assert.unit_ratio = 1e-10\n\
               assert.resolution_growth = 2\n";
    let o = mhd2d(dir.path(), cfg, &["ineq", "--seed", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let r = json(&dir.path().join("out/ineq.json"));
    assert_eq!(r["seed"], 5);
    let reports = r["report"]["reports"].as_array().unwrap();
    assert!(!reports.is_empty());
    for rep in reports {
        assert!((rep["max_ratio"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn ic_writes_a_loadable_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "schema_version = 1\n\
               grid.n = 64\n\
               grid.length = 8pi\n\
               ic.kind = random_spectrum\n\
               ic.amplitude = 0.5\n\
               ic.seed = 3\n";
    let o = mhd2d(dir.path(), cfg, &["ic"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let r = json(&dir.path().join("out/ic.json"));
    assert!((r["report"]["report"]["rms"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(dir.path().join("out/ic.snap").exists());
}

#[test]
fn bad_config_fails_with_every_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "schema_version = 1\ngrid.n = banana\nbogus.key = 1\ndiagnostics.s = 1.5\n";
    let o = mhd2d(dir.path(), cfg, &["run"]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&dir.path().join("out/failure.json"));
    assert_eq!(v["command"], "run");
    assert_eq!(v["status"], "error");
    let errors = v["errors"].as_array().unwrap();
    assert_eq!(errors.len(), 3, "{errors:?}");
    assert!(errors.iter().any(|e| e.as_str().unwrap().contains("line 3")));
}

#[test]
fn failed_assertion_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "schema_version = 1\n\
               grid.n = 32\n\
               solver.dt = 1e-2\n\
               solver.t_end = 0.1\n\
               output.formats = csv\n\
               assert.hs_growth = 0.5\n";
    let o = mhd2d(dir.path(), cfg, &["run"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&dir.path().join("out/failure.json"));
    assert_eq!(v["status"], "assertions_failed");
    assert_eq!(v["failed"][0]["name"], "hs_growth");
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 16);
}
