use std::fs;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_conveyor");

const SMALL: &str = "\
kind = ground_state_sweep
trap_depth_uK = 254
n_eff = 8
gamma0_over_2pi_kHz = 1.67
profiles = sine
distance_mm = 0.2
n_steps = 200
axis_trip_time_ms = 0.3, 0.6, 0.9
outputs = ground_population, populations
";

fn body(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn empty_config_exits_2_and_names_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.conf");
    fs::write(&path, "").unwrap();
    let out = Command::new(BIN)
        .args(["sweep", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for key in [
        "kind",
        "trap_depth_uK",
        "n_eff",
        "gamma0_over_2pi_kHz",
        "profiles",
        "distance_mm",
    ] {
        assert!(err.contains(key), "{key} missing from {err}");
    }
}

#[test]
fn gamma0_estimate_prints_rate() {
    let out = Command::new(BIN).arg("estimate-gamma0").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().find(|l| l.starts_with("gamma0/2pi")).unwrap();
    let khz: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((khz - 2.72).abs() < 0.01, "{khz}");
}

#[test]
fn warm_cache_reproduces_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("small.conf");
    fs::write(&conf, SMALL).unwrap();
    let cache = dir.path().join("cache");
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let status = Command::new(BIN)
            .args(["sweep", "--no-timing", "--workers", workers, "--config"])
            .arg(&conf)
            .arg("--cache-dir")
            .arg(&cache)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read_to_string(out).unwrap()
    };
    let cold = run("a.csv", "1");
    let tables = fs::read_dir(&cache)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "tbl")
        })
        .count();
    assert_eq!(tables, 2);
    let warm = run("b.csv", "2");
    assert_eq!(cold, warm);
    assert_eq!(body(&cold).len(), 4);
    assert!(body(&cold)[0].starts_with("axis_value,retention,t_eff_uK,ground_pop,wall_ms"));
    let pops = fs::read_to_string(dir.path().join("a.populations.csv")).unwrap();
    assert_eq!(pops.lines().count(), 4);
}

#[test]
fn oracle_flag_appends_report() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("small.conf");
    fs::write(&conf, SMALL.replace("0.3, 0.6, 0.9", "0.4")).unwrap();
    let out = Command::new(BIN)
        .args(["sweep", "--oracle", "--config"])
        .arg(&conf)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8_lossy(&out.stdout);
    assert!(csv.contains("# oracle verdict: agree"), "{csv}");
}
